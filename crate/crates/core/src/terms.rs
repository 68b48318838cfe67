//! Terms, atoms and positions.
//!
//! Constants, labelled nulls and variables live in disjoint syntactic spaces:
//! a [`Term`] is always exactly one of them, and equality is structural.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// Interned-ish text shared between clones.
pub type Symbol = Arc<str>;

/// A constant from the domain of the database.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant(Symbol);

impl Constant {
    pub fn new(name: impl AsRef<str>) -> Self {
        Constant(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A first-order variable. Only rules and queries contain variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Symbol);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Self {
        Variable(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Variable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A labelled null invented by the chase.
///
/// The `(branch, id)` pair is unique within one chase run: every branch of a
/// disjunctive chase tree owns its own tag, and ids are never reused inside a
/// branch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Null {
    branch: Symbol,
    id: u64,
}

impl Null {
    pub fn new(branch: impl AsRef<str>, id: u64) -> Self {
        Null {
            branch: Arc::from(branch.as_ref()),
            id,
        }
    }

    pub(crate) fn with_symbol(branch: Symbol, id: u64) -> Self {
        Null { branch, id }
    }

    pub fn branch(&self) -> &str {
        &self.branch
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

impl fmt::Display for Null {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:b{}_{}", self.branch, self.id)
    }
}

impl Serialize for Null {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A term: constant, labelled null or variable.
///
/// The derived order (constants, then nulls, then variables) is the canonical
/// order used for instance iteration and homomorphism enumeration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Constant(Constant),
    Null(Null),
    Variable(Variable),
}

impl Term {
    pub fn constant(name: impl AsRef<str>) -> Self {
        Term::Constant(Constant::new(name))
    }

    pub fn variable(name: impl AsRef<str>) -> Self {
        Term::Variable(Variable::new(name))
    }

    pub fn null(branch: impl AsRef<str>, id: u64) -> Self {
        Term::Null(Null::new(branch, id))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Variable(_))
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_constant(&self) -> Option<&Constant> {
        match self {
            Term::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_null(&self) -> Option<&Null> {
        match self {
            Term::Null(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => c.fmt(f),
            Term::Null(n) => n.fmt(f),
            Term::Variable(v) => v.fmt(f),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Constant(c)
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Variable(v)
    }
}

impl From<Null> for Term {
    fn from(n: Null) -> Self {
        Term::Null(n)
    }
}

/// `predicate(t1, ..., tk)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl AsRef<str>, args: Vec<Term>) -> Self {
        Atom {
            predicate: Arc::from(predicate.as_ref()),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.args.iter().filter_map(Term::as_variable)
    }

    pub fn contains_variable(&self, v: &Variable) -> bool {
        self.variables().any(|w| w == v)
    }

    /// Positions (1-based) at which `v` occurs.
    pub fn positions_of<'a>(&'a self, v: &'a Variable) -> impl Iterator<Item = Position> + 'a {
        self.args
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.as_variable() == Some(v))
            .map(move |(i, _)| Position::new(self.predicate.clone(), i + 1))
    }

    pub fn position(&self, index: usize) -> Position {
        Position::new(self.predicate.clone(), index + 1)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        f.write_str("(")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            t.fmt(f)?;
        }
        f.write_str(")")
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The `index`-th attribute of a predicate, written `r[i]`. 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub predicate: Symbol,
    pub index: usize,
}

impl Position {
    pub fn new(predicate: impl Into<Symbol>, index: usize) -> Self {
        Position {
            predicate: predicate.into(),
            index,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.predicate, self.index)
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Formats a conjunction as `a1, a2, ...`.
pub(crate) fn fmt_conjunction(atoms: &[Atom], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        fmt::Display::fmt(a, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_spaces_are_disjoint() {
        assert_ne!(Term::constant("a"), Term::variable("a"));
        assert_ne!(Term::constant("b0_0"), Term::null("0", 0));
    }

    #[test]
    fn null_display() {
        assert_eq!(Term::null("0.1", 3).to_string(), "_:b0.1_3");
    }

    #[test]
    fn positions_are_one_based() {
        let x = Variable::new("X");
        let a = Atom::new(
            "r",
            vec![
                Term::variable("X"),
                Term::constant("a"),
                Term::variable("X"),
            ],
        );
        let ps: Vec<_> = a.positions_of(&x).map(|p| p.to_string()).collect();
        assert_eq!(ps, vec!["r[1]", "r[3]"]);
    }
}
