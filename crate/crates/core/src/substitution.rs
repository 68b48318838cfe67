use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::CoreError;
use crate::terms::{Atom, Null, Term, Variable};

/// Variable bindings plus an optional renaming of labelled nulls.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    pub binding: BTreeMap<Variable, Term>,
    pub null_binding: BTreeMap<Null, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, v: Variable, t: Term) -> Option<Term> {
        self.binding.insert(v, t)
    }

    pub fn with(mut self, v: &str, t: Term) -> Self {
        self.binding.insert(Variable::new(v), t);
        self
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.binding.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.binding.is_empty() && self.null_binding.is_empty()
    }

    /// Image of a single term; unbound terms map to themselves.
    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Variable(v) => self.binding.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Null(n) => self
                .null_binding
                .get(n)
                .cloned()
                .unwrap_or_else(|| t.clone()),
            Term::Constant(_) => t.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    /// `self` followed by `then`: the image of `t` is `then(self(t))`.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.binding {
            out.binding.insert(v.clone(), then.apply_term(t));
        }
        for (v, t) in &then.binding {
            out.binding.entry(v.clone()).or_insert_with(|| t.clone());
        }
        for (n, t) in &self.null_binding {
            out.null_binding.insert(n.clone(), then.apply_term(t));
        }
        for (n, t) in &then.null_binding {
            out.null_binding
                .entry(n.clone())
                .or_insert_with(|| t.clone());
        }
        out
    }

    /// Restricts the binding to the given variables.
    pub fn restrict<'a, I: IntoIterator<Item = &'a Variable>>(&self, vars: I) -> Substitution {
        let binding = vars
            .into_iter()
            .filter_map(|v| self.binding.get(v).map(|t| (v.clone(), t.clone())))
            .collect();
        Substitution {
            binding,
            null_binding: self.null_binding.clone(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let vars = self.binding.iter().map(|(v, t)| (v.to_string(), t));
        let nulls = self.null_binding.iter().map(|(n, t)| (n.to_string(), t));
        for (i, (k, t)) in vars.chain(nulls).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(
            self.binding
                .iter()
                .map(|(v, t)| (v.to_string(), t.to_string()))
                .chain(
                    self.null_binding
                        .iter()
                        .map(|(n, t)| (n.to_string(), t.to_string())),
                ),
        )
    }
}

/// Applies `s` to every atom of `c`, preserving order.
///
/// With `strict`, any variable of `c` left unbound is an error.
pub fn apply_substitution(
    s: &Substitution,
    c: &[Atom],
    strict: bool,
) -> Result<Vec<Atom>, CoreError> {
    if strict {
        if let Some(v) = c
            .iter()
            .flat_map(Atom::variables)
            .find(|v| !s.binding.contains_key(*v))
        {
            return Err(CoreError::StrictModeUnbound(v.clone()));
        }
    }
    Ok(c.iter().map(|a| s.apply_atom(a)).collect())
}
