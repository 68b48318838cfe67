//! Backtracking search for homomorphisms from a conjunction into an instance.
//!
//! Body atoms are matched left to right; candidate tuples for each atom are
//! visited in the instance's lexicographic order, so the enumeration order is
//! canonical and reproducible.

use std::ops::ControlFlow;

use crate::instance::Instance;
use crate::substitution::Substitution;
use crate::terms::{Atom, Term};

/// All extensions of `seed` mapping every atom of `c` into `i`.
pub fn find_homomorphisms(c: &[Atom], i: &Instance, seed: &Substitution) -> Vec<Substitution> {
    let mut out = Vec::new();
    for_each_homomorphism(c, i, seed, |h| {
        out.push(h.clone());
        ControlFlow::Continue(())
    });
    out
}

/// The first homomorphism in canonical order, if any.
pub fn first_homomorphism(c: &[Atom], i: &Instance, seed: &Substitution) -> Option<Substitution> {
    let mut found = None;
    for_each_homomorphism(c, i, seed, |h| {
        found = Some(h.clone());
        ControlFlow::Break(())
    });
    found
}

pub fn has_homomorphism(c: &[Atom], i: &Instance, seed: &Substitution) -> bool {
    first_homomorphism(c, i, seed).is_some()
}

/// Visits homomorphisms in canonical order until `visit` breaks.
pub fn for_each_homomorphism<F>(c: &[Atom], i: &Instance, seed: &Substitution, mut visit: F)
where
    F: FnMut(&Substitution) -> ControlFlow<()>,
{
    let sources = vec![i; c.len()];
    let mut h = seed.clone();
    let _ = search(c, &sources, &mut h, &mut visit);
}

/// Like [`for_each_homomorphism`], but atom `pivot` of `c` is matched in
/// `delta` and every other atom in `full`.
pub(crate) fn for_each_homomorphism_through<F>(
    c: &[Atom],
    full: &Instance,
    delta: &Instance,
    pivot: usize,
    mut visit: F,
) where
    F: FnMut(&Substitution) -> ControlFlow<()>,
{
    let mut sources = vec![full; c.len()];
    sources[pivot] = delta;
    let mut h = Substitution::new();
    let _ = search(c, &sources, &mut h, &mut visit);
}

fn search<F>(
    c: &[Atom],
    sources: &[&Instance],
    h: &mut Substitution,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&Substitution) -> ControlFlow<()>,
{
    let (Some((atom, rest)), Some((i, rest_sources))) = (c.split_first(), sources.split_first())
    else {
        return visit(h);
    };
    let mut newly_bound = Vec::new();
    let bound: Vec<(usize, Term)> = atom
        .args
        .iter()
        .enumerate()
        .filter_map(|(k, t)| match t {
            Term::Constant(_) => Some((k, t.clone())),
            Term::Null(n) => Some((k, h.null_binding.get(n).unwrap_or(t).clone())),
            Term::Variable(v) => h.binding.get(v).map(|b| (k, b.clone())),
        })
        .collect();
    for tuple in i.candidates(&atom.predicate, &bound) {
        if tuple.len() != atom.args.len() {
            continue;
        }
        if unify_tuple(&atom.args, tuple, h, &mut newly_bound) {
            search(rest, rest_sources, h, visit)?;
        }
        for v in newly_bound.drain(..) {
            h.binding.remove(&v);
        }
    }
    ControlFlow::Continue(())
}

/// Extends `h` so that `pattern` maps onto `tuple`, recording which variables
/// were bound here. On mismatch the caller unbinds them.
fn unify_tuple(
    pattern: &[Term],
    tuple: &[Term],
    h: &mut Substitution,
    newly_bound: &mut Vec<crate::terms::Variable>,
) -> bool {
    for (p, t) in pattern.iter().zip(tuple) {
        match p {
            Term::Constant(_) => {
                if p != t {
                    return false;
                }
            }
            Term::Null(n) => {
                let image = h.null_binding.get(n).unwrap_or(p);
                if image != t {
                    return false;
                }
            }
            Term::Variable(v) => match h.binding.get(v) {
                Some(bound) => {
                    if bound != t {
                        return false;
                    }
                }
                None => {
                    h.binding.insert(v.clone(), t.clone());
                    newly_bound.push(v.clone());
                }
            },
        }
    }
    true
}
