//! Variable marking for stickiness.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dependency::{Dependency, Dtgd};
use crate::terms::{Atom, Variable};

use super::{tgds, RuleRef};

/// A variable occurrence in a rule body: rule, body atom, argument (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Occurrence {
    pub rule: usize,
    pub atom: usize,
    pub arg: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Marking {
    pub marked: BTreeSet<Occurrence>,
}

impl Marking {
    pub fn is_marked(&self, rule: usize, atom: usize, arg: usize) -> bool {
        self.marked.contains(&Occurrence { rule, atom, arg })
    }

    /// Whether some body occurrence of `v` in `rule` is marked.
    pub fn is_marked_variable(&self, rule: usize, d: &Dtgd, v: &Variable) -> bool {
        body_occurrences(rule, d, v).any(|o| self.marked.contains(&o))
    }

    fn mark_variable(&mut self, rule: usize, d: &Dtgd, v: &Variable) -> bool {
        let mut changed = false;
        for o in body_occurrences(rule, d, v) {
            changed |= self.marked.insert(o);
        }
        changed
    }
}

fn body_occurrences<'a>(
    rule: usize,
    d: &'a Dtgd,
    v: &'a Variable,
) -> impl Iterator<Item = Occurrence> + 'a {
    d.body.iter().enumerate().flat_map(move |(atom, a)| {
        a.args
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.as_variable() == Some(v))
            .map(move |(arg, _)| Occurrence { rule, atom, arg })
    })
}

fn head_atoms(d: &Dtgd) -> impl Iterator<Item = &Atom> {
    d.disjuncts.iter().flat_map(|dj| dj.head.iter())
}

/// Initial step: a body variable missing from some head atom is marked at
/// every body occurrence.
pub fn initial_marking(sigma: &[Dependency]) -> Marking {
    let mut m = Marking::default();
    for (RuleRef(i), d) in tgds(sigma) {
        for v in d.body_variables() {
            if head_atoms(d).any(|h| !h.contains_variable(&v)) {
                m.mark_variable(i, d, &v);
            }
        }
    }
    m
}

/// One propagation pass over all rule pairs. Returns whether anything new
/// was marked.
///
/// For each head atom of a rule in which a universal variable `V` occurs at
/// positions `p[i1..im]`, if some body atom over `p` in any rule carries
/// marked variables at all of `i1..im`, then `V` is marked in the first rule.
pub fn propagation_pass(sigma: &[Dependency], m: &mut Marking) -> bool {
    let rules: Vec<(usize, &Dtgd)> = tgds(sigma).map(|(r, d)| (r.0, d)).collect();
    let mut changed = false;
    for &(i, d1) in &rules {
        for v in d1.body_variables() {
            if m.is_marked_variable(i, d1, &v) {
                continue;
            }
            let hit = head_atoms(d1).any(|h| {
                let idx: Vec<usize> = h
                    .args
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.as_variable() == Some(&v))
                    .map(|(k, _)| k)
                    .collect();
                !idx.is_empty()
                    && rules.iter().any(|&(j, d2)| {
                        d2.body.iter().enumerate().any(|(b, ba)| {
                            ba.predicate == h.predicate
                                && ba.arity() == h.arity()
                                && idx.iter().all(|&k| m.is_marked(j, b, k))
                        })
                    })
            });
            if hit {
                changed |= m.mark_variable(i, d1, &v);
            }
        }
    }
    changed
}

/// Least fixpoint of the initial marking under propagation.
pub fn smarking(sigma: &[Dependency]) -> Marking {
    let mut m = initial_marking(sigma);
    while propagation_pass(sigma, &mut m) {}
    m
}

/// A marked variable occurring more than once in a rule body.
pub fn sticky_violation(sigma: &[Dependency]) -> Option<(RuleRef, Variable)> {
    let m = smarking(sigma);
    for (r, d) in tgds(sigma) {
        for v in d.body_variables() {
            if m.is_marked_variable(r.0, d, &v) && body_occurrences(r.0, d, &v).count() > 1 {
                return Some((r, v));
            }
        }
    }
    None
}

pub fn is_sticky(sigma: &[Dependency]) -> bool {
    sticky_violation(sigma).is_none()
}
