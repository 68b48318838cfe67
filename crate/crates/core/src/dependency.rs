//! Disjunctive TGDs, EGDs and negative constraints.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::terms::{fmt_conjunction, Atom, Variable};

/// One head disjunct: `exists Y1..Yk  a1, ..., am`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Disjunct {
    pub existentials: Vec<Variable>,
    pub head: Vec<Atom>,
}

impl Disjunct {
    pub fn new(existentials: Vec<Variable>, head: Vec<Atom>) -> Self {
        Disjunct { existentials, head }
    }

    pub fn is_existential(&self, v: &Variable) -> bool {
        self.existentials.contains(v)
    }
}

/// `body -> D1 | ... | Dn`. With a single disjunct this is an ordinary TGD.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dtgd {
    pub body: Vec<Atom>,
    pub disjuncts: Vec<Disjunct>,
}

impl Dtgd {
    pub fn new(body: Vec<Atom>, disjuncts: Vec<Disjunct>) -> Self {
        Dtgd { body, disjuncts }
    }

    pub fn tgd(body: Vec<Atom>, existentials: Vec<Variable>, head: Vec<Atom>) -> Self {
        Dtgd {
            body,
            disjuncts: vec![Disjunct::new(existentials, head)],
        }
    }

    pub fn is_tgd(&self) -> bool {
        self.disjuncts.len() == 1
    }

    pub fn body_variables(&self) -> BTreeSet<Variable> {
        self.body
            .iter()
            .flat_map(Atom::variables)
            .cloned()
            .collect()
    }

    /// The rule restricted to one disjunct, as a plain TGD.
    pub fn disjunct_tgd(&self, k: usize) -> Dtgd {
        Dtgd {
            body: self.body.clone(),
            disjuncts: vec![self.disjuncts[k].clone()],
        }
    }
}

/// `body -> left = right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Egd {
    pub body: Vec<Atom>,
    pub left: Variable,
    pub right: Variable,
}

/// `body -> false`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NegConstraint {
    pub body: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Dependency {
    Dtgd(Dtgd),
    Egd(Egd),
    NegConstraint(NegConstraint),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SafetyError {
    #[error("head variable {0} is neither existential nor bound in the body")]
    UnsafeVariable(Variable),
    #[error("existential variable {0} also occurs in the body")]
    ExistentialInBody(Variable),
    #[error("existential variable {0} declared twice")]
    DuplicateExistential(Variable),
    #[error("equality variable {0} does not occur in the body")]
    EqualityNotInBody(Variable),
    #[error("dependency has no head disjunct")]
    EmptyHead,
}

impl Dependency {
    pub fn body(&self) -> &[Atom] {
        match self {
            Dependency::Dtgd(d) => &d.body,
            Dependency::Egd(e) => &e.body,
            Dependency::NegConstraint(c) => &c.body,
        }
    }

    pub fn as_dtgd(&self) -> Option<&Dtgd> {
        match self {
            Dependency::Dtgd(d) => Some(d),
            _ => None,
        }
    }

    /// Every atom of the dependency, body first.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        let head: Box<dyn Iterator<Item = &Atom>> = match self {
            Dependency::Dtgd(d) => Box::new(d.disjuncts.iter().flat_map(|x| x.head.iter())),
            _ => Box::new(std::iter::empty()),
        };
        self.body().iter().chain(head)
    }

    /// Checks that every head variable is existential or bound in the body.
    pub fn check_safety(&self) -> Result<(), SafetyError> {
        let body_vars: BTreeSet<&Variable> = self.body().iter().flat_map(Atom::variables).collect();
        match self {
            Dependency::Dtgd(d) => {
                if d.disjuncts.is_empty() {
                    return Err(SafetyError::EmptyHead);
                }
                for dj in &d.disjuncts {
                    let mut seen = BTreeSet::new();
                    for y in &dj.existentials {
                        if !seen.insert(y) {
                            return Err(SafetyError::DuplicateExistential(y.clone()));
                        }
                        if body_vars.contains(y) {
                            return Err(SafetyError::ExistentialInBody(y.clone()));
                        }
                    }
                    for v in dj.head.iter().flat_map(Atom::variables) {
                        if !body_vars.contains(v) && !dj.is_existential(v) {
                            return Err(SafetyError::UnsafeVariable(v.clone()));
                        }
                    }
                }
                Ok(())
            }
            Dependency::Egd(e) => {
                for v in [&e.left, &e.right] {
                    if !body_vars.contains(v) {
                        return Err(SafetyError::EqualityNotInBody(v.clone()));
                    }
                }
                Ok(())
            }
            Dependency::NegConstraint(_) => Ok(()),
        }
    }
}

impl From<Dtgd> for Dependency {
    fn from(d: Dtgd) -> Self {
        Dependency::Dtgd(d)
    }
}

impl From<Egd> for Dependency {
    fn from(e: Egd) -> Self {
        Dependency::Egd(e)
    }
}

impl From<NegConstraint> for Dependency {
    fn from(c: NegConstraint) -> Self {
        Dependency::NegConstraint(c)
    }
}

impl fmt::Display for Disjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.existentials.is_empty() {
            f.write_str("exists ")?;
            for (i, v) in self.existentials.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                v.fmt(f)?;
            }
            f.write_str(" ")?;
        }
        fmt_conjunction(&self.head, f)
    }
}

impl fmt::Display for Dependency {
    /// Canonical rule syntax without the terminating period.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_conjunction(self.body(), f)?;
        f.write_str(" -> ")?;
        match self {
            Dependency::Dtgd(d) => {
                for (i, dj) in d.disjuncts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    dj.fmt(f)?;
                }
                Ok(())
            }
            Dependency::Egd(e) => write!(f, "{} = {}", e.left, e.right),
            Dependency::NegConstraint(_) => f.write_str("false"),
        }
    }
}
