//! Affected positions and weak guards.

use std::collections::BTreeSet;

use crate::dependency::{Dependency, Dtgd};
use crate::terms::{Atom, Position, Variable};

use super::{tgds, RuleRef};

/// Positions where a labelled null may appear during the chase.
///
/// Least fixpoint of: every position holding an existential variable is
/// affected; a head position of a universal variable is affected when every
/// body occurrence of that variable is at an affected position.
pub fn affected_positions(sigma: &[Dependency]) -> BTreeSet<Position> {
    let mut affected = BTreeSet::new();
    for (_, d) in tgds(sigma) {
        for dj in &d.disjuncts {
            for a in &dj.head {
                for (i, t) in a.args.iter().enumerate() {
                    if t.as_variable().is_some_and(|v| dj.is_existential(v)) {
                        affected.insert(a.position(i));
                    }
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for (_, d) in tgds(sigma) {
            for v in d.body_variables() {
                if !only_at_affected(&d.body, &v, &affected) {
                    continue;
                }
                for dj in &d.disjuncts {
                    for a in &dj.head {
                        for p in a.positions_of(&v) {
                            changed |= affected.insert(p);
                        }
                    }
                }
            }
        }
        if !changed {
            return affected;
        }
    }
}

fn only_at_affected(body: &[Atom], v: &Variable, affected: &BTreeSet<Position>) -> bool {
    let mut any = false;
    for a in body {
        for p in a.positions_of(v) {
            any = true;
            if !affected.contains(&p) {
                return false;
            }
        }
    }
    any
}

/// Body variables of `d` that occur only at affected positions.
pub fn null_admitting_variables(d: &Dtgd, affected: &BTreeSet<Position>) -> BTreeSet<Variable> {
    d.body_variables()
        .into_iter()
        .filter(|v| only_at_affected(&d.body, v, affected))
        .collect()
}

/// Index of the leftmost body atom containing every null-admitting variable.
pub fn weak_guard_index(d: &Dtgd, affected: &BTreeSet<Position>) -> Option<usize> {
    let vars = null_admitting_variables(d, affected);
    d.body
        .iter()
        .position(|a| vars.iter().all(|v| a.contains_variable(v)))
}

/// Weak guard (as a body atom index) for every rule, `None` where missing.
pub fn weak_guards(sigma: &[Dependency]) -> Vec<(RuleRef, Option<usize>)> {
    let affected = affected_positions(sigma);
    tgds(sigma)
        .map(|(i, d)| (i, weak_guard_index(d, &affected)))
        .collect()
}

pub fn is_weakly_guarded(sigma: &[Dependency]) -> bool {
    weak_guards(sigma).iter().all(|(_, g)| g.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn sigma(src: &str) -> Vec<Dependency> {
        parse_program(src).unwrap().dependencies
    }

    fn shown(ps: &BTreeSet<Position>) -> Vec<String> {
        ps.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn base_case_only() {
        assert_eq!(
            shown(&affected_positions(&sigma("r(X) -> exists Y s(X, Y)."))),
            vec!["s[2]"]
        );
    }

    #[test]
    fn propagation() {
        let s = sigma("r(X) -> exists Y s(X, Y).\ns(U, V) -> t(V).");
        assert_eq!(shown(&affected_positions(&s)), vec!["s[2]", "t[1]"]);
    }

    #[test]
    fn empty_set() {
        assert!(affected_positions(&[]).is_empty());
        assert!(is_weakly_guarded(&[]));
    }

    #[test]
    fn join_on_unaffected_position_is_weakly_guarded() {
        let s = sigma("r(X) -> exists Y s(X, Y).\ns(U, V), p(V) -> t(U, V).");
        assert!(is_weakly_guarded(&s));
        assert_eq!(weak_guards(&s)[1], (RuleRef(1), Some(0)));
    }

    #[test]
    fn two_null_admitting_variables_without_cover() {
        let s = sigma("a(X) -> exists Y s(Y).\na(X) -> exists Y p(Y).\ns(U), p(V) -> t(U, V).");
        assert!(!is_weakly_guarded(&s));
        assert_eq!(weak_guards(&s)[2], (RuleRef(2), None));
    }
}
