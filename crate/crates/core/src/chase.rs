//! The restricted chase for TGDs, EGDs and negative constraints.
//!
//! Expansion proceeds level by level. At the start of a level every active
//! trigger (a body match whose head cannot yet be satisfied by extending it)
//! is collected; each one is then applied in order, re-checking that it is
//! still active. After the batch, EGDs are applied to a fixpoint and negative
//! constraints are checked. The run ends with success when a level starts
//! with no active trigger.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::classify::RuleRef;
use crate::dependency::{Dependency, Dtgd, Egd};
use crate::error::CoreError;
use crate::homomorphism::{
    find_homomorphisms, first_homomorphism, for_each_homomorphism, for_each_homomorphism_through,
    has_homomorphism,
};
use crate::instance::Instance;
use crate::substitution::Substitution;
use crate::terms::{Atom, Null, Symbol, Term};

/// Work limits. `None` disables a bound.
///
/// `max_steps` counts TGD applications; `max_depth` counts levels (per branch
/// in the disjunctive chase).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_steps: Option<usize>,
    pub max_depth: Option<usize>,
}

impl Budget {
    pub fn new(max_steps: Option<usize>, max_depth: Option<usize>) -> Self {
        Budget {
            max_steps,
            max_depth,
        }
    }

    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn steps(n: usize) -> Self {
        Budget {
            max_steps: Some(n),
            max_depth: None,
        }
    }

    pub fn depth(n: usize) -> Self {
        Budget {
            max_steps: None,
            max_depth: Some(n),
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.max_steps.is_none() && self.max_depth.is_none()
    }

    pub(crate) fn steps_left(&self, used: usize) -> bool {
        self.max_steps.is_none_or(|m| used < m)
    }

    pub(crate) fn depth_left(&self, level: usize) -> bool {
        self.max_depth.is_none_or(|m| level < m)
    }
}

/// Issues fresh labelled nulls for one branch.
#[derive(Clone, Debug)]
pub struct NullSource {
    branch: Symbol,
    next_id: u64,
}

impl NullSource {
    pub fn new(branch: impl AsRef<str>) -> Self {
        NullSource {
            branch: Arc::from(branch.as_ref()),
            next_id: 0,
        }
    }

    pub fn fresh(&mut self) -> Null {
        let n = Null::with_symbol(self.branch.clone(), self.next_id);
        self.next_id += 1;
        n
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn branch(&self) -> &str {
        &self.branch
    }

    /// Source for the `k`-th child branch (0-based) of a disjunctive step.
    pub fn child(&self, k: usize) -> NullSource {
        NullSource::new(format!("{}.{}", self.branch, k + 1))
    }
}

impl Default for NullSource {
    fn default() -> Self {
        NullSource::new("0")
    }
}

/// Two distinct constants were equated by an EGD.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot equate distinct constants {left} and {right}")]
pub struct HardFailure {
    pub left: Term,
    pub right: Term,
}

/// Why a run (or branch) failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Egd {
        rule: RuleRef,
        substitution: Substitution,
        left: Term,
        right: Term,
    },
    Constraint {
        rule: RuleRef,
        substitution: Substitution,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Egd {
                rule,
                substitution,
                left,
                right,
            } => write!(f, "{rule} with {substitution} equates {left} and {right}"),
            Violation::Constraint { rule, substitution } => {
                write!(
                    f,
                    "{rule} with {substitution} matches a negative constraint"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChaseOutcome {
    Success { result: Instance, steps: usize },
    Failure { step: usize, violation: Violation },
    BudgetExhausted { partial: Instance, steps: usize },
}

impl ChaseOutcome {
    pub fn steps(&self) -> usize {
        match self {
            ChaseOutcome::Success { steps, .. } | ChaseOutcome::BudgetExhausted { steps, .. } => {
                *steps
            }
            ChaseOutcome::Failure { step, .. } => *step,
        }
    }

    pub fn instance(&self) -> Option<&Instance> {
        match self {
            ChaseOutcome::Success { result, .. } => Some(result),
            ChaseOutcome::BudgetExhausted { partial, .. } => Some(partial),
            ChaseOutcome::Failure { .. } => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, ChaseOutcome::Success { .. })
    }
}

/// Order in which rules and their triggers are visited within a level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ApplicationOrder {
    /// Rules in program order, triggers in canonical order.
    #[default]
    Forward,
    /// Rules in reverse program order, triggers in reverse canonical order.
    Reverse,
}

/// One line of a chase trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Tgd {
        step: usize,
        rule: RuleRef,
        substitution: Substitution,
        added: Vec<Atom>,
    },
    Merge {
        rule: RuleRef,
        substitution: Substitution,
        replaced: Term,
        by: Term,
    },
    Fail {
        violation: Violation,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Tgd {
                step,
                rule,
                substitution,
                added,
            } => {
                write!(f, "step {step}: {rule} with {substitution} added {{")?;
                crate::terms::fmt_conjunction(added, f)?;
                f.write_str("}")
            }
            TraceEvent::Merge {
                rule,
                substitution,
                replaced,
                by,
            } => write!(
                f,
                "merge: {rule} with {substitution} replaced {replaced} by {by}"
            ),
            TraceEvent::Fail { violation } => write!(f, "fail: {violation}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ChaseConfig {
    pub budget: Budget,
    pub order: ApplicationOrder,
    pub trace: bool,
}

#[derive(Clone, Debug)]
pub struct ChaseRun {
    pub outcome: ChaseOutcome,
    pub levels: usize,
    pub trace: Vec<TraceEvent>,
}

/// Whether `h` (a body match of `d`) leaves every head disjunct unsatisfied.
pub fn is_active_trigger(d: &Dtgd, h: &Substitution, i: &Instance) -> bool {
    d.disjuncts
        .iter()
        .all(|dj| !has_homomorphism(&dj.head, i, h))
}

/// First body match (canonical order) whose head is not yet satisfied.
pub fn dtgd_applicable(d: &Dtgd, i: &Instance) -> Option<Substitution> {
    let mut found = None;
    for_each_homomorphism(&d.body, i, &Substitution::new(), |h| {
        if is_active_trigger(d, h, i) {
            found = Some(h.clone());
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    found
}

/// Restricted-chase applicability of a single-disjunct TGD.
pub fn tgd_applicable(d: &Dtgd, i: &Instance) -> Option<Substitution> {
    debug_assert!(d.is_tgd());
    dtgd_applicable(d, i)
}

/// Adds the image of disjunct `k` under `h` extended by fresh nulls.
/// Returns the atoms that were new.
pub(crate) fn extend_with_disjunct(
    d: &Dtgd,
    k: usize,
    h: &Substitution,
    i: &mut Instance,
    nulls: &mut NullSource,
) -> Vec<Atom> {
    let dj = &d.disjuncts[k];
    let mut ext = h.clone();
    for y in &dj.existentials {
        ext.bind(y.clone(), Term::Null(nulls.fresh()));
    }
    let mut added = Vec::new();
    for a in &dj.head {
        let img = ext.apply_atom(a);
        if i.insert(img.clone()) {
            added.push(img);
        }
    }
    added
}

/// `i` extended with the image of the TGD head under `h` and fresh nulls.
pub fn apply_tgd(d: &Dtgd, h: &Substitution, i: &Instance, nulls: &mut NullSource) -> Instance {
    let mut out = i.clone();
    extend_with_disjunct(d, 0, h, &mut out, nulls);
    out
}

/// Equates two terms in place. A null is replaced by a constant; of two
/// nulls, the smaller one survives. Returns `(replaced, by)`, or `None` when
/// the terms are already equal.
pub(crate) fn merge_terms(
    i: &mut Instance,
    a: &Term,
    b: &Term,
) -> Result<Option<(Term, Term)>, HardFailure> {
    if a == b {
        return Ok(None);
    }
    let (from, to) = match (a, b) {
        (Term::Null(_), Term::Constant(_)) => (a, b),
        (Term::Constant(_), Term::Null(_)) => (b, a),
        (Term::Null(x), Term::Null(y)) => {
            if x < y {
                (b, a)
            } else {
                (a, b)
            }
        }
        _ => {
            return Err(HardFailure {
                left: a.clone(),
                right: b.clone(),
            })
        }
    };
    i.replace_term(from, to);
    Ok(Some((from.clone(), to.clone())))
}

/// Applies one EGD step for the match `h`.
pub fn apply_egd(e: &Egd, h: &Substitution, i: &Instance) -> Result<Instance, HardFailure> {
    let a = h.apply_term(&Term::Variable(e.left.clone()));
    let b = h.apply_term(&Term::Variable(e.right.clone()));
    let mut out = i.clone();
    merge_terms(&mut out, &a, &b)?;
    Ok(out)
}

/// A match of `e`'s body that equates two different terms.
pub fn egd_violation(e: &Egd, i: &Instance) -> Option<Substitution> {
    let (l, r) = (
        Term::Variable(e.left.clone()),
        Term::Variable(e.right.clone()),
    );
    let mut found = None;
    for_each_homomorphism(&e.body, i, &Substitution::new(), |h| {
        if h.apply_term(&l) != h.apply_term(&r) {
            found = Some(h.clone());
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    found
}

/// Applies EGDs until none is violated, then checks negative constraints.
pub(crate) fn settle(
    sigma: &[Dependency],
    i: &mut Instance,
    trace: Option<&mut Vec<TraceEvent>>,
) -> Result<(), Violation> {
    let mut sink = Vec::new();
    let trace = trace.unwrap_or(&mut sink);
    'fixpoint: loop {
        for (idx, dep) in sigma.iter().enumerate() {
            let Dependency::Egd(e) = dep else { continue };
            let Some(h) = egd_violation(e, i) else {
                continue;
            };
            let a = h.apply_term(&Term::Variable(e.left.clone()));
            let b = h.apply_term(&Term::Variable(e.right.clone()));
            match merge_terms(i, &a, &b) {
                Ok(Some((replaced, by))) => {
                    trace.push(TraceEvent::Merge {
                        rule: RuleRef(idx),
                        substitution: h,
                        replaced,
                        by,
                    });
                    continue 'fixpoint;
                }
                Ok(None) => unreachable!("violation implies distinct terms"),
                Err(_) => {
                    let v = Violation::Egd {
                        rule: RuleRef(idx),
                        substitution: h,
                        left: a,
                        right: b,
                    };
                    trace.push(TraceEvent::Fail {
                        violation: v.clone(),
                    });
                    return Err(v);
                }
            }
        }
        break;
    }
    for (idx, dep) in sigma.iter().enumerate() {
        let Dependency::NegConstraint(c) = dep else {
            continue;
        };
        if let Some(h) = first_homomorphism(&c.body, i, &Substitution::new()) {
            let v = Violation::Constraint {
                rule: RuleRef(idx),
                substitution: h,
            };
            trace.push(TraceEvent::Fail {
                violation: v.clone(),
            });
            return Err(v);
        }
    }
    Ok(())
}

/// All active triggers of all (D)TGDs on `i`, in the given order.
///
/// With `seen`, the instance at the previous collection, only body matches
/// that use at least one atom outside `seen` are enumerated. Every other
/// match was already a trigger then and has since been applied or
/// deactivated, so the result is the same; matches are sorted by their body
/// images, which is the canonical enumeration order.
pub(crate) fn collect_triggers(
    sigma: &[Dependency],
    i: &Instance,
    order: ApplicationOrder,
    seen: Option<&Instance>,
) -> VecDeque<(RuleRef, Substitution)> {
    let delta = seen.map(|s| i.difference(s));
    let mut out = VecDeque::new();
    let mut visit = |idx: usize, d: &Dtgd| {
        let mut hs: Vec<Substitution> = match &delta {
            None => find_homomorphisms(&d.body, i, &Substitution::new()),
            Some(delta) => {
                let mut by_image: BTreeMap<Vec<Vec<Term>>, Substitution> = BTreeMap::new();
                for pivot in 0..d.body.len() {
                    for_each_homomorphism_through(&d.body, i, delta, pivot, |h| {
                        let key = d.body.iter().map(|a| h.apply_atom(a).args).collect();
                        by_image.entry(key).or_insert_with(|| h.clone());
                        ControlFlow::Continue(())
                    });
                }
                by_image.into_values().collect()
            }
        };
        hs.retain(|h| is_active_trigger(d, h, i));
        if order == ApplicationOrder::Reverse {
            hs.reverse();
        }
        out.extend(hs.into_iter().map(|h| (RuleRef(idx), h)));
    };
    let rules = sigma
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.as_dtgd().map(|t| (i, t)));
    match order {
        ApplicationOrder::Forward => rules.for_each(|(i, d)| visit(i, d)),
        ApplicationOrder::Reverse => rules.rev().for_each(|(i, d)| visit(i, d)),
    }
    out
}

/// The first dependency of `sigma` that `i` does not satisfy, if any.
pub fn first_unsatisfied(sigma: &[Dependency], i: &Instance) -> Option<RuleRef> {
    sigma.iter().enumerate().find_map(|(idx, dep)| {
        let violated = match dep {
            Dependency::Dtgd(d) => dtgd_applicable(d, i).is_some(),
            Dependency::Egd(e) => egd_violation(e, i).is_some(),
            Dependency::NegConstraint(c) => has_homomorphism(&c.body, i, &Substitution::new()),
        };
        violated.then_some(RuleRef(idx))
    })
}

/// Whether `i` is a model of every dependency in `sigma`.
pub fn satisfies(i: &Instance, sigma: &[Dependency]) -> bool {
    first_unsatisfied(sigma, i).is_none()
}

/// Runs the chase with the default order and no trace.
///
/// Fails with [`CoreError::NotATgd`] if `sigma` contains a multi-disjunct rule.
pub fn chase(
    d: &Instance,
    sigma: &[Dependency],
    budget: Budget,
) -> Result<ChaseOutcome, CoreError> {
    let config = ChaseConfig {
        budget,
        ..Default::default()
    };
    Ok(run_chase(d, sigma, &config)?.outcome)
}

pub fn run_chase(
    d: &Instance,
    sigma: &[Dependency],
    config: &ChaseConfig,
) -> Result<ChaseRun, CoreError> {
    if sigma
        .iter()
        .any(|dep| dep.as_dtgd().is_some_and(|t| !t.is_tgd()))
    {
        return Err(CoreError::NotATgd);
    }
    let mut trace = Vec::new();
    let mut inst = d.clone();
    let mut nulls = NullSource::default();
    let mut steps = 0;
    let mut levels = 0;
    let mut seen: Option<Instance> = None;
    let budget = config.budget;

    let outcome = 'run: loop {
        if let Err(violation) = settle(sigma, &mut inst, Some(&mut trace)) {
            break ChaseOutcome::Failure {
                step: steps,
                violation,
            };
        }
        let triggers = collect_triggers(sigma, &inst, config.order, seen.as_ref());
        if triggers.is_empty() {
            break ChaseOutcome::Success {
                result: inst,
                steps,
            };
        }
        seen = Some(inst.clone());
        if !budget.depth_left(levels) {
            break ChaseOutcome::BudgetExhausted {
                partial: inst,
                steps,
            };
        }
        levels += 1;
        for (rule, h) in triggers {
            let Dependency::Dtgd(tgd) = &sigma[rule.0] else {
                unreachable!("triggers come from TGDs")
            };
            if !is_active_trigger(tgd, &h, &inst) {
                continue;
            }
            if !budget.steps_left(steps) {
                break 'run ChaseOutcome::BudgetExhausted {
                    partial: inst,
                    steps,
                };
            }
            steps += 1;
            let added = extend_with_disjunct(tgd, 0, &h, &mut inst, &mut nulls);
            trace.push(TraceEvent::Tgd {
                step: steps,
                rule,
                substitution: h,
                added,
            });
        }
    };
    if !config.trace {
        trace.clear();
    }
    Ok(ChaseRun {
        outcome,
        levels,
        trace,
    })
}
