//! Syntactic fragment membership with witnesses.
//!
//! Single-rule checks ([`is_inclusion_dependency`], [`is_linear`],
//! [`guard_of`]) accept only single-disjunct TGDs. Set-level checks lift them
//! to disjunctive rules disjunct-wise: a rule passes iff every disjunct,
//! taken as a TGD with the shared body, passes. EGDs and negative constraints
//! are not TGDs and are skipped by every check.

mod affected;
mod graph;
mod marking;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::dependency::{Dependency, Dtgd};
use crate::error::CoreError;
use crate::terms::{Atom, Position, Variable};

pub use affected::{
    affected_positions, is_weakly_guarded, null_admitting_variables, weak_guard_index, weak_guards,
};
pub use graph::{
    dependency_graph, dependency_graph_with, is_weakly_acyclic, DependencyGraph, Edge, EdgeKind,
    SpecialEdgeSource,
};
pub use marking::{
    initial_marking, is_sticky, propagation_pass, smarking, sticky_violation, Marking, Occurrence,
};

/// Index of a dependency within its set. Displayed 1-based as `rule#N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleRef(pub usize);

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule#{}", self.0 + 1)
    }
}

impl Serialize for RuleRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The TGDs (single- or multi-disjunct) of a set, with their indices.
pub(crate) fn tgds(sigma: &[Dependency]) -> impl Iterator<Item = (RuleRef, &Dtgd)> {
    sigma
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.as_dtgd().map(|t| (RuleRef(i), t)))
}

fn single_tgd(d: &Dependency) -> Result<&Dtgd, CoreError> {
    match d {
        Dependency::Dtgd(t) if t.is_tgd() => Ok(t),
        _ => Err(CoreError::NotATgd),
    }
}

fn has_repeated_variable(a: &Atom) -> bool {
    let mut seen = BTreeSet::new();
    a.variables().any(|v| !seen.insert(v))
}

/// One body atom, one head atom, and no variable repeated in either.
pub fn is_inclusion_dependency(d: &Dependency) -> Result<bool, CoreError> {
    Ok(dtgd_is_inclusion(single_tgd(d)?))
}

fn dtgd_is_inclusion(d: &Dtgd) -> bool {
    d.body.len() == 1
        && !has_repeated_variable(&d.body[0])
        && d.disjuncts
            .iter()
            .all(|dj| dj.head.len() == 1 && !has_repeated_variable(&dj.head[0]))
}

/// Exactly one body atom.
pub fn is_linear(d: &Dependency) -> Result<bool, CoreError> {
    Ok(single_tgd(d)?.body.len() == 1)
}

/// Leftmost body atom containing every body variable.
pub fn guard_of(d: &Dependency) -> Result<Option<Atom>, CoreError> {
    let t = single_tgd(d)?;
    Ok(guard_index(t).map(|i| t.body[i].clone()))
}

pub fn guard_index(d: &Dtgd) -> Option<usize> {
    let vars = d.body_variables();
    d.body
        .iter()
        .position(|a| vars.iter().all(|v| a.contains_variable(v)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuardWitness {
    pub rule: RuleRef,
    pub guard: Option<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StickyViolation {
    pub rule: RuleRef,
    pub variable: Variable,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    /// First rule that is not an inclusion dependency.
    pub not_id: Option<RuleRef>,
    /// First rule with more than one body atom.
    pub not_linear: Option<RuleRef>,
    pub guards: Vec<GuardWitness>,
    pub affected_positions: Vec<Position>,
    pub weak_guards: Vec<GuardWitness>,
    pub special_cycle: Option<Vec<Edge>>,
    pub sticky_violation: Option<StickyViolation>,
    pub warnings: Vec<String>,
}

/// Verdicts for every fragment, with witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    pub id: bool,
    pub linear: bool,
    pub guarded: bool,
    pub weakly_guarded: bool,
    pub weakly_acyclic: bool,
    pub sticky: bool,
    pub witnesses: Witnesses,
}

impl FragmentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for FragmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, v) in [
            ("id", self.id),
            ("linear", self.linear),
            ("guarded", self.guarded),
            ("weakly_guarded", self.weakly_guarded),
            ("weakly_acyclic", self.weakly_acyclic),
            ("sticky", self.sticky),
        ] {
            writeln!(f, "{name}: {v}")?;
        }
        let w = &self.witnesses;
        if let Some(r) = w.not_id {
            writeln!(f, "  not an inclusion dependency: {r}")?;
        }
        if let Some(r) = w.not_linear {
            writeln!(f, "  not linear: {r}")?;
        }
        for g in &w.guards {
            match &g.guard {
                Some(a) => writeln!(f, "  guard of {}: {a}", g.rule)?,
                None => writeln!(f, "  {} has no guard", g.rule)?,
            }
        }
        if !w.affected_positions.is_empty() {
            let ps: Vec<String> = w
                .affected_positions
                .iter()
                .map(Position::to_string)
                .collect();
            writeln!(f, "  affected positions: {}", ps.join(", "))?;
        }
        for g in &w.weak_guards {
            match &g.guard {
                Some(a) => writeln!(f, "  weak guard of {}: {a}", g.rule)?,
                None => writeln!(f, "  {} has no weak guard", g.rule)?,
            }
        }
        if let Some(cycle) = &w.special_cycle {
            let es: Vec<String> = cycle.iter().map(Edge::to_string).collect();
            writeln!(f, "  cycle through special edge: {}", es.join(", "))?;
        }
        if let Some(v) = &w.sticky_violation {
            writeln!(
                f,
                "  marked variable {} repeats in the body of {}",
                v.variable, v.rule
            )?;
        }
        for msg in &w.warnings {
            writeln!(f, "  warning: {msg}")?;
        }
        Ok(())
    }
}

/// Runs every fragment check over `sigma`.
pub fn classify(sigma: &[Dependency]) -> FragmentReport {
    let rules: Vec<(RuleRef, &Dtgd)> = tgds(sigma).collect();
    let mut w = Witnesses {
        not_id: rules
            .iter()
            .find(|(_, d)| !dtgd_is_inclusion(d))
            .map(|(r, _)| *r),
        not_linear: rules
            .iter()
            .find(|(_, d)| d.body.len() != 1)
            .map(|(r, _)| *r),
        ..Default::default()
    };

    w.guards = rules
        .iter()
        .map(|(r, d)| GuardWitness {
            rule: *r,
            guard: guard_index(d).map(|i| d.body[i].clone()),
        })
        .collect();

    let affected = affected_positions(sigma);
    w.weak_guards = rules
        .iter()
        .map(|(r, d)| GuardWitness {
            rule: *r,
            guard: weak_guard_index(d, &affected).map(|i| d.body[i].clone()),
        })
        .collect();
    w.affected_positions = affected.into_iter().collect();

    w.special_cycle = dependency_graph(sigma).special_cycle();
    w.sticky_violation =
        sticky_violation(sigma).map(|(rule, variable)| StickyViolation { rule, variable });

    let skipped = sigma.len() - rules.len();
    if skipped > 0 {
        w.warnings.push(format!(
            "{skipped} EGD(s) or negative constraint(s) not considered"
        ));
    }
    if rules.iter().any(|(_, d)| !d.is_tgd()) {
        w.warnings.push(
            "disjunctive rules present: verdicts are computed disjunct-wise; stickiness is not \
             established for disjunctive rules"
                .into(),
        );
    }

    FragmentReport {
        id: w.not_id.is_none(),
        linear: w.not_linear.is_none(),
        guarded: w.guards.iter().all(|g| g.guard.is_some()),
        weakly_guarded: w.weak_guards.iter().all(|g| g.guard.is_some()),
        weakly_acyclic: w.special_cycle.is_none(),
        sticky: w.sticky_violation.is_none(),
        witnesses: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn rule(src: &str) -> Dependency {
        parse_program(src).unwrap().dependencies.remove(0)
    }

    fn sigma(src: &str) -> Vec<Dependency> {
        parse_program(src).unwrap().dependencies
    }

    #[test]
    fn inclusion_dependencies() {
        assert!(is_inclusion_dependency(&rule("student(X, Y) -> exists Z person(X, Z).")).unwrap());
        assert!(!is_inclusion_dependency(&rule("r(X, Y, X) -> s(X, Y).")).unwrap());
        assert!(is_inclusion_dependency(&rule("r(X) -> r(X).")).unwrap());
        assert!(!is_inclusion_dependency(&rule("r(X, Y) -> s(X, X).")).unwrap());
    }

    #[test]
    fn linear_tgds() {
        assert!(is_linear(&rule("r(X, Y, X) -> s(X, Y).")).unwrap());
        assert!(!is_linear(&rule(
            "student(X, Y), firstsemester(X) -> exists Z tutor(X, Z)."
        ))
        .unwrap());
    }

    #[test]
    fn guards() {
        let g = guard_of(&rule(
            "student(X, Y), firstsemester(X) -> exists Z tutor(X, Z).",
        ))
        .unwrap();
        assert_eq!(g.unwrap().to_string(), "student(X, Y)");
        assert_eq!(guard_of(&rule("r(X), s(Y) -> t(X, Y).")).unwrap(), None);
        let g = guard_of(&rule("r(X, Y), s(X, Y) -> t(X).")).unwrap();
        assert_eq!(g.unwrap().to_string(), "r(X, Y)");
    }

    #[test]
    fn non_tgds_rejected_by_local_checks() {
        for src in [
            "r(X, Y), r(X, Z) -> Y = Z.",
            "male(X), female(X) -> false.",
            "person(X) -> male(X) | female(X).",
        ] {
            let d = rule(src);
            assert_eq!(is_inclusion_dependency(&d), Err(CoreError::NotATgd));
            assert_eq!(is_linear(&d), Err(CoreError::NotATgd));
            assert_eq!(guard_of(&d), Err(CoreError::NotATgd));
        }
    }

    #[test]
    fn empty_set_is_in_every_fragment() {
        let r = classify(&[]);
        assert!(r.id && r.linear && r.guarded && r.weakly_guarded && r.weakly_acyclic && r.sticky);
    }

    #[test]
    fn existential_self_loop() {
        let r = classify(&sigma("r(X) -> exists Y r(Y)."));
        assert!(r.linear && r.guarded);
        assert!(!r.weakly_acyclic);
        assert!(r.witnesses.special_cycle.is_some());
    }

    #[test]
    fn disjunct_wise_lifting() {
        let r = classify(&sigma("person(X) -> male(X) | female(X)."));
        assert!(r.id && r.linear && r.guarded && r.weakly_acyclic);
        assert!(!r.witnesses.warnings.is_empty());
        let r = classify(&sigma("person(X) -> male(X) | likes(X, X)."));
        assert!(!r.id && r.linear);
    }

    #[test]
    fn report_json_key_order() {
        let json = classify(&[]).to_json();
        let keys = [
            "\"id\"",
            "\"linear\"",
            "\"guarded\"",
            "\"weakly_guarded\"",
            "\"weakly_acyclic\"",
            "\"sticky\"",
            "\"witnesses\"",
        ];
        let mut last = 0;
        for k in keys {
            let at = json.find(k).unwrap();
            assert!(at >= last, "{k} out of order");
            last = at;
        }
    }
}
