//! Brute-force oracles shared by the integration tests. They only use the
//! data types of the crate, never its matching or chase code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dlpm::{Atom, ConjunctiveQuery, Dependency, Instance, Term, Variable};

pub type Assignment = BTreeMap<Variable, Term>;

fn variables<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<Variable> {
    let mut vs: Vec<Variable> = atoms
        .into_iter()
        .flat_map(|a| a.args.iter().filter_map(|t| t.as_variable().cloned()))
        .collect();
    vs.sort();
    vs.dedup();
    vs
}

/// Every total map from `vars` into `domain`.
pub fn assignments(vars: &[Variable], domain: &[Term]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                domain.iter().map(move |t| {
                    let mut a = a.clone();
                    a.insert(v.clone(), t.clone());
                    a
                })
            })
            .collect();
    }
    out
}

pub fn ground(atom: &Atom, a: &Assignment) -> Atom {
    let args = atom
        .args
        .iter()
        .map(|t| match t.as_variable() {
            Some(v) => a[v].clone(),
            None => t.clone(),
        })
        .collect();
    Atom {
        predicate: atom.predicate.clone(),
        args,
    }
}

fn term_under(t: &Term, a: &Assignment) -> Term {
    match t.as_variable() {
        Some(v) => a.get(v).cloned().unwrap_or_else(|| t.clone()),
        None => t.clone(),
    }
}

/// All terms occurring in `i`.
pub fn domain_of(i: &Instance) -> Vec<Term> {
    let mut d: Vec<Term> = i.atoms().flat_map(|a| a.args).collect();
    d.sort();
    d.dedup();
    d
}

/// All assignments of the variables of `c` into the terms of `i` whose image lies in `i`.
pub fn brute_homomorphisms(c: &[Atom], i: &Instance) -> BTreeSet<Assignment> {
    let vars = variables(c);
    let facts: BTreeSet<Atom> = i.atoms().collect();
    assignments(&vars, &domain_of(i))
        .into_iter()
        .filter(|a| c.iter().all(|atom| facts.contains(&ground(atom, a))))
        .collect()
}

/// A set of ground atoms as a model candidate.
pub type Model = BTreeSet<Atom>;

pub fn satisfies(model: &Model, sigma: &[Dependency], domain: &[Term]) -> bool {
    sigma.iter().all(|dep| {
        let body = dep.body();
        assignments(&variables(body), domain).iter().all(|a| {
            if !body.iter().all(|b| model.contains(&ground(b, a))) {
                return true;
            }
            match dep {
                Dependency::Dtgd(d) => d.disjuncts.iter().any(|dj| {
                    assert!(
                        dj.existentials.is_empty(),
                        "oracle handles existential-free rules only"
                    );
                    dj.head.iter().all(|h| model.contains(&ground(h, a)))
                }),
                Dependency::Egd(e) => a[&e.left] == a[&e.right],
                Dependency::NegConstraint(_) => false,
            }
        })
    })
}

pub fn bcq_holds(q: &ConjunctiveQuery, model: &Model, domain: &[Term]) -> bool {
    let mut atoms: Vec<Atom> = q.body.clone();
    // Equality-only variables still need a value.
    for (l, r) in &q.equalities {
        atoms.push(Atom::new("=", vec![l.clone(), r.clone()]));
    }
    assignments(&variables(&atoms), domain).iter().any(|a| {
        q.body.iter().all(|b| model.contains(&ground(b, a)))
            && q.equalities
                .iter()
                .all(|(l, r)| term_under(l, a) == term_under(r, a))
    })
}

/// Whether `q` holds in every model of `db` and `sigma` drawn from subsets
/// of `base` (which must contain `db`). True when there is no model.
pub fn certain_by_enumeration(
    q: &ConjunctiveQuery,
    db: &Instance,
    sigma: &[Dependency],
    base: &[Atom],
    domain: &[Term],
) -> bool {
    let fixed: Model = db.atoms().collect();
    let free: Vec<&Atom> = base.iter().filter(|a| !fixed.contains(*a)).collect();
    assert!(free.len() <= 20, "Herbrand base too large for enumeration");
    for mask in 0u32..(1 << free.len()) {
        let mut m = fixed.clone();
        for (k, a) in free.iter().enumerate() {
            if mask & (1 << k) != 0 {
                m.insert((*a).clone());
            }
        }
        if satisfies(&m, sigma, domain) && !bcq_holds(q, &m, domain) {
            return false;
        }
    }
    true
}

pub fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_files() -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "dl"))
        .collect();
    files.sort();
    files
}
