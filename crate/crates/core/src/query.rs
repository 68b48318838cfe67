//! Conjunctive queries and their evaluation over a single instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::error::CoreError;
use crate::homomorphism::{for_each_homomorphism, has_homomorphism};
use crate::instance::Instance;
use crate::substitution::Substitution;
use crate::terms::{fmt_conjunction, Atom, Constant, Term, Variable};

/// `q(t1, ..., tk) :- body, equalities`.
///
/// `head` holds the answer variables as written; after [`normalize_query`]
/// an answer position may hold a constant forced by an equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    pub head: Vec<Term>,
    pub body: Vec<Atom>,
    pub equalities: Vec<(Term, Term)>,
}

/// A tuple of constants answering a query.
pub type AnswerTuple = Vec<Constant>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("query equalities force two distinct constants to be equal")]
pub struct Unsatisfiable;

impl ConjunctiveQuery {
    pub fn new(head: Vec<Term>, body: Vec<Atom>) -> Self {
        ConjunctiveQuery {
            head,
            body,
            equalities: Vec::new(),
        }
    }

    pub fn boolean(body: Vec<Atom>) -> Self {
        Self::new(Vec::new(), body)
    }

    pub fn arity(&self) -> usize {
        self.head.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.equalities.is_empty()
    }

    pub fn body_variables(&self) -> BTreeSet<&Variable> {
        self.body.iter().flat_map(Atom::variables).collect()
    }

    /// Answer variables that do not occur in the (normalized) body.
    pub fn unbound_answer_variables(&self) -> Vec<Variable> {
        let body = self.body_variables();
        self.head
            .iter()
            .filter_map(Term::as_variable)
            .filter(|v| !body.contains(v))
            .cloned()
            .collect()
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            t.fmt(f)?;
        }
        f.write_str(") :- ")?;
        fmt_conjunction(&self.body, f)?;
        for (i, (l, r)) in self.equalities.iter().enumerate() {
            if i > 0 || !self.body.is_empty() {
                f.write_str(", ")?;
            }
            write!(f, "{l} = {r}")?;
        }
        Ok(())
    }
}

/// Compiles equalities away by unification.
///
/// Variables merged with each other are represented by the least variable of
/// their class; a class containing a constant is replaced by that constant.
pub fn normalize_query(q: &ConjunctiveQuery) -> Result<ConjunctiveQuery, Unsatisfiable> {
    if q.equalities.is_empty() {
        return Ok(q.clone());
    }
    let mut uf = UnionFind::default();
    for (l, r) in &q.equalities {
        uf.union(l, r);
    }
    let mut classes: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for t in uf.parent.keys().cloned().collect::<Vec<_>>() {
        let root = uf.find(&t);
        classes.entry(root).or_default().push(t);
    }
    let mut subst = Substitution::new();
    for members in classes.values() {
        let mut rigid: BTreeSet<&Term> = members.iter().filter(|t| t.is_ground()).collect();
        let rep = match rigid.len() {
            0 => members.iter().min().cloned().expect("class is nonempty"),
            1 => rigid.pop_first().cloned().expect("one rigid term"),
            _ => return Err(Unsatisfiable),
        };
        for m in members {
            match m {
                Term::Variable(v) if *m != rep => {
                    subst.bind(v.clone(), rep.clone());
                }
                _ => {}
            }
        }
    }
    Ok(ConjunctiveQuery {
        head: q.head.iter().map(|t| subst.apply_term(t)).collect(),
        body: q.body.iter().map(|a| subst.apply_atom(a)).collect(),
        equalities: Vec::new(),
    })
}

#[derive(Default)]
struct UnionFind {
    parent: BTreeMap<Term, Term>,
}

impl UnionFind {
    fn find(&mut self, t: &Term) -> Term {
        let p = self
            .parent
            .entry(t.clone())
            .or_insert_with(|| t.clone())
            .clone();
        if &p == t {
            return p;
        }
        let root = self.find(&p);
        self.parent.insert(t.clone(), root.clone());
        root
    }

    fn union(&mut self, a: &Term, b: &Term) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }
}

/// Whether a boolean query holds in `i`.
///
/// Queries with pending equalities are normalized first; an unsatisfiable
/// query holds nowhere.
pub fn evaluate_bcq(q: &ConjunctiveQuery, i: &Instance) -> Result<bool, CoreError> {
    if !q.is_boolean() {
        return Err(CoreError::NotBoolean(q.arity()));
    }
    Ok(match normalize_query(q) {
        Ok(nq) => has_homomorphism(&nq.body, i, &Substitution::new()),
        Err(Unsatisfiable) => false,
    })
}

/// Images of the answer terms under all homomorphisms into `i`, keeping only
/// tuples made entirely of constants.
pub fn answers(q: &ConjunctiveQuery, i: &Instance) -> BTreeSet<AnswerTuple> {
    let Ok(nq) = normalize_query(q) else {
        return BTreeSet::new();
    };
    let mut out = BTreeSet::new();
    for_each_homomorphism(&nq.body, i, &Substitution::new(), |h| {
        let tuple: Option<AnswerTuple> = nq
            .head
            .iter()
            .map(|t| h.apply_term(t).as_constant().cloned())
            .collect();
        if let Some(tuple) = tuple {
            out.insert(tuple);
        }
        std::ops::ControlFlow::Continue(())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn v(n: &str) -> Term {
        Term::variable(n)
    }
    fn inst(atoms: Vec<Atom>) -> Instance {
        atoms.into_iter().collect()
    }

    #[test]
    fn variable_merge() {
        let mut q = ConjunctiveQuery::boolean(vec![Atom::new("r", vec![v("X"), v("Y")])]);
        q.equalities.push((v("X"), v("Y")));
        let n = normalize_query(&q).unwrap();
        assert_eq!(n.body, vec![Atom::new("r", vec![v("X"), v("X")])]);
        assert!(n.equalities.is_empty());
    }

    #[test]
    fn constant_substitution() {
        let mut q = ConjunctiveQuery::boolean(vec![Atom::new("r", vec![v("X")])]);
        q.equalities.push((v("X"), c("a")));
        assert_eq!(
            normalize_query(&q).unwrap().body,
            vec![Atom::new("r", vec![c("a")])]
        );
    }

    #[test]
    fn distinct_constants_unsatisfiable() {
        let mut q = ConjunctiveQuery::boolean(vec![Atom::new("r", vec![v("X")])]);
        q.equalities.push((c("a"), c("b")));
        assert_eq!(normalize_query(&q), Err(Unsatisfiable));
        let mut q2 = ConjunctiveQuery::boolean(vec![Atom::new("r", vec![v("X")])]);
        q2.equalities.push((v("X"), c("a")));
        q2.equalities.push((v("X"), c("b")));
        assert_eq!(normalize_query(&q2), Err(Unsatisfiable));
    }

    #[test]
    fn answer_vars_rewritten() {
        let mut q = ConjunctiveQuery::new(
            vec![v("X"), v("Z")],
            vec![Atom::new("r", vec![v("Y"), v("Z")])],
        );
        q.equalities.push((v("X"), v("Y")));
        let n = normalize_query(&q).unwrap();
        assert_eq!(n.head, vec![v("X"), v("Z")]);
        assert_eq!(n.body, vec![Atom::new("r", vec![v("X"), v("Z")])]);
        assert!(n.unbound_answer_variables().is_empty());
    }

    #[test]
    fn bcq_examples() {
        let q = ConjunctiveQuery::boolean(vec![Atom::new("person", vec![v("X")])]);
        assert!(evaluate_bcq(&q, &inst(vec![Atom::new("person", vec![c("a")])])).unwrap());
        assert!(!evaluate_bcq(&q, &Instance::new()).unwrap());
        let q = ConjunctiveQuery::boolean(vec![
            Atom::new("r", vec![v("X"), v("Y")]),
            Atom::new("s", vec![v("Y")]),
        ]);
        let i = inst(vec![
            Atom::new("r", vec![c("a"), c("b")]),
            Atom::new("s", vec![c("c")]),
        ]);
        assert!(!evaluate_bcq(&q, &i).unwrap());
    }

    #[test]
    fn bcq_rejects_non_boolean() {
        let q = ConjunctiveQuery::new(vec![v("X")], vec![Atom::new("p", vec![v("X")])]);
        assert_eq!(
            evaluate_bcq(&q, &Instance::new()),
            Err(CoreError::NotBoolean(1))
        );
    }

    #[test]
    fn answers_exclude_nulls() {
        let q = ConjunctiveQuery::new(vec![v("X")], vec![Atom::new("person", vec![v("X")])]);
        let i = inst(vec![
            Atom::new("person", vec![c("a")]),
            Atom::new("person", vec![Term::null("0", 1)]),
        ]);
        let got = answers(&q, &i);
        assert_eq!(got, BTreeSet::from([vec![Constant::new("a")]]));
    }

    #[test]
    fn boolean_answers_are_empty_tuple() {
        let q = ConjunctiveQuery::boolean(vec![Atom::new("person", vec![c("a")])]);
        let i = inst(vec![Atom::new("person", vec![c("a")])]);
        assert_eq!(answers(&q, &i), BTreeSet::from([vec![]]));
        assert!(answers(&q, &Instance::new()).is_empty());
    }

    #[test]
    fn binary_answers() {
        let q = ConjunctiveQuery::new(
            vec![v("X"), v("Y")],
            vec![Atom::new("r", vec![v("X"), v("Y")])],
        );
        let i = inst(vec![
            Atom::new("r", vec![c("a"), c("b")]),
            Atom::new("r", vec![c("b"), c("a")]),
        ]);
        let a = Constant::new("a");
        let b = Constant::new("b");
        assert_eq!(
            answers(&q, &i),
            BTreeSet::from([vec![a.clone(), b.clone()], vec![b, a]])
        );
    }

    #[test]
    fn nulls_allowed_on_non_answer_positions() {
        let q = ConjunctiveQuery::new(vec![v("X")], vec![Atom::new("p", vec![v("X"), v("Y")])]);
        let i = inst(vec![Atom::new("p", vec![c("a"), Term::null("0", 0)])]);
        assert_eq!(answers(&q, &i).len(), 1);
    }
}
