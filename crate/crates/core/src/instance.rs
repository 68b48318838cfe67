//! Finite sets of ground atoms and the predicate schema.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::CoreError;
use crate::terms::{Atom, Constant, Null, Symbol, Term};

type Tuple = Arc<[Term]>;

/// One relation: its tuples in lexicographic order, plus the same tuples
/// keyed by each `(argument index, term)` they contain.
#[derive(Clone, Default)]
struct Relation {
    tuples: BTreeSet<Tuple>,
    index: HashMap<(usize, Term), BTreeSet<Tuple>>,
    /// Longest tuple ever inserted.
    width: usize,
}

impl Relation {
    fn insert(&mut self, t: Tuple) -> bool {
        if !self.tuples.insert(t.clone()) {
            return false;
        }
        self.width = self.width.max(t.len());
        for (k, term) in t.iter().enumerate() {
            self.index
                .entry((k, term.clone()))
                .or_default()
                .insert(t.clone());
        }
        true
    }

    fn remove(&mut self, t: &Tuple) {
        if self.tuples.remove(t) {
            for (k, term) in t.iter().enumerate() {
                let key = (k, term.clone());
                if let Some(set) = self.index.get_mut(&key) {
                    set.remove(t);
                    if set.is_empty() {
                        self.index.remove(&key);
                    }
                }
            }
        }
    }

    fn containing(&self, term: &Term) -> BTreeSet<Tuple> {
        (0..self.width)
            .filter_map(|k| self.index.get(&(k, term.clone())))
            .flatten()
            .cloned()
            .collect()
    }
}

/// A finite set of variable-free atoms, grouped by predicate.
///
/// Iteration order is lexicographic: by predicate name, then by argument tuple.
#[derive(Clone, Default)]
pub struct Instance {
    relations: BTreeMap<Symbol, Relation>,
    len: usize,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.is_subset(other)
    }
}

impl Eq for Instance {}

impl Hash for Instance {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for (p, r) in &self.relations {
            if !r.tuples.is_empty() {
                p.hash(state);
                r.tuples.hash(state);
            }
        }
    }
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an instance, rejecting atoms that contain variables.
    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Result<Self, CoreError> {
        let mut inst = Instance::new();
        for a in atoms {
            inst.try_insert(a)?;
        }
        Ok(inst)
    }

    pub fn try_insert(&mut self, atom: Atom) -> Result<bool, CoreError> {
        if !atom.is_ground() {
            return Err(CoreError::NonGroundAtom(atom));
        }
        Ok(self.insert(atom))
    }

    /// Inserts a ground atom; returns whether it was new.
    ///
    /// Panics if the atom contains a variable.
    pub fn insert(&mut self, atom: Atom) -> bool {
        assert!(atom.is_ground(), "instance atoms must be ground: {atom}");
        let added = self
            .relations
            .entry(atom.predicate)
            .or_default()
            .insert(atom.args.into());
        if added {
            self.len += 1;
        }
        added
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.relations
            .get(&atom.predicate)
            .is_some_and(|r| r.tuples.contains(atom.args.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Tuples of one relation, in lexicographic order.
    pub fn relation(&self, predicate: &str) -> impl Iterator<Item = &[Term]> {
        self.relations
            .get(predicate)
            .into_iter()
            .flat_map(|r| r.tuples.iter().map(|t| &**t))
    }

    /// Tuples of one relation that agree with every `(index, term)` pair in
    /// `bound`, in lexicographic order. Drawn from the smallest index entry;
    /// callers still check the remaining positions.
    pub(crate) fn candidates<'a>(
        &'a self,
        predicate: &str,
        bound: &[(usize, Term)],
    ) -> impl Iterator<Item = &'a [Term]> + 'a {
        let rel = self.relations.get(predicate);
        let mut best: Option<&BTreeSet<Tuple>> = rel.map(|r| &r.tuples);
        if let Some(r) = rel {
            for key in bound {
                match r.index.get(key) {
                    None => {
                        best = None;
                        break;
                    }
                    Some(set) if best.is_none_or(|b| set.len() < b.len()) => best = Some(set),
                    Some(_) => {}
                }
            }
        }
        best.into_iter().flat_map(|set| set.iter().map(|t| &**t))
    }

    pub fn relation_len(&self, predicate: &str) -> usize {
        self.relations.get(predicate).map_or(0, |r| r.tuples.len())
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Symbol> {
        self.relations
            .iter()
            .filter(|(_, r)| !r.tuples.is_empty())
            .map(|(p, _)| p)
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.relations.iter().flat_map(|(p, r)| {
            r.tuples.iter().map(move |args| Atom {
                predicate: p.clone(),
                args: args.to_vec(),
            })
        })
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.relations
            .iter()
            .all(|(p, r)| match other.relations.get(p) {
                Some(o) => r.tuples.is_subset(&o.tuples),
                None => r.tuples.is_empty(),
            })
    }

    /// Atoms of `self` that are not in `other`.
    pub fn difference(&self, other: &Instance) -> Instance {
        let mut out = Instance::new();
        for (p, r) in &self.relations {
            let theirs = other.relations.get(p).map(|o| &o.tuples);
            for t in &r.tuples {
                if !theirs.is_some_and(|o| o.contains(t)) {
                    out.relations
                        .entry(p.clone())
                        .or_default()
                        .insert(t.clone());
                    out.len += 1;
                }
            }
        }
        out
    }

    pub fn extend<I: IntoIterator<Item = Atom>>(&mut self, atoms: I) -> usize {
        atoms.into_iter().filter(|a| self.insert(a.clone())).count()
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.terms()
            .filter_map(|t| t.as_constant().cloned())
            .collect()
    }

    pub fn nulls(&self) -> BTreeSet<Null> {
        self.terms().filter_map(|t| t.as_null().cloned()).collect()
    }

    fn terms(&self) -> impl Iterator<Item = &Term> {
        self.relations
            .values()
            .flat_map(|r| r.tuples.iter())
            .flat_map(|t| t.iter())
    }

    /// Replaces every occurrence of `from` by `to`. Duplicates collapse.
    pub fn replace_term(&mut self, from: &Term, to: &Term) {
        let mut len = 0;
        for r in self.relations.values_mut() {
            for old in r.containing(from) {
                r.remove(&old);
                let new: Tuple = old
                    .iter()
                    .map(|t| if t == from { to.clone() } else { t.clone() })
                    .collect();
                r.insert(new);
            }
            len += r.tuples.len();
        }
        self.len = len;
    }
}

impl FromIterator<Atom> for Instance {
    /// Panics on non-ground atoms; use [`Instance::from_atoms`] for checked input.
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut inst = Instance::new();
        for a in iter {
            inst.insert(a);
        }
        inst
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.atoms().map(|a| a.to_string()))
            .finish()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            a.fmt(f)?;
        }
        f.write_str("}")
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.atoms().map(|a| a.to_string()))
    }
}

/// Predicate arities, inferred from first occurrence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    arities: BTreeMap<Symbol, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the arity of `atom`'s predicate, or checks it against the
    /// one already recorded.
    pub fn observe(&mut self, atom: &Atom) -> Result<(), CoreError> {
        match self.arities.get(&atom.predicate) {
            Some(&expected) if expected != atom.arity() => Err(CoreError::ArityMismatch {
                predicate: atom.predicate.to_string(),
                expected,
                found: atom.arity(),
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.arities.iter().map(|(p, a)| (p, *a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str, args: &[&str]) -> Atom {
        Atom::new(p, args.iter().copied().map(Term::constant).collect())
    }

    #[test]
    fn set_semantics() {
        let mut i = Instance::new();
        assert!(i.insert(atom("r", &["a"])));
        assert!(!i.insert(atom("r", &["a"])));
        assert_eq!(i.len(), 1);
    }

    #[test]
    fn rejects_variables() {
        let a = Atom::new("r", vec![Term::variable("X")]);
        assert!(matches!(
            Instance::from_atoms([a]),
            Err(CoreError::NonGroundAtom(_))
        ));
    }

    #[test]
    fn lexicographic_iteration() {
        let i: Instance = [atom("s", &["a"]), atom("r", &["b"]), atom("r", &["a"])]
            .into_iter()
            .collect();
        let shown: Vec<_> = i.atoms().map(|a| a.to_string()).collect();
        assert_eq!(shown, vec!["r(a)", "r(b)", "s(a)"]);
    }

    #[test]
    fn replace_collapses_duplicates() {
        let n = Term::null("0", 0);
        let b = Term::constant("b");
        let mut i: Instance = [
            atom("r", &["a", "b"]),
            Atom::new("r", vec![Term::constant("a"), n.clone()]),
        ]
        .into_iter()
        .collect();
        i.replace_term(&n, &b);
        assert_eq!(i.len(), 1);
        assert!(i.contains(&atom("r", &["a", "b"])));
    }

    #[test]
    fn schema_rejects_mismatch() {
        let mut s = Schema::new();
        s.observe(&atom("r", &["a"])).unwrap();
        assert!(s.observe(&atom("r", &["a", "b"])).is_err());
    }
}
