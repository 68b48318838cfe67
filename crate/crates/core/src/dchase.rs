//! The disjunctive chase tree and certain answers over its leaves.
//!
//! A step of a disjunctive rule with `n` head disjuncts turns a node into `n`
//! children, one per disjunct. Each child of a branching step receives its
//! own null namespace (`<parent>.<k>`), so nulls are fresh across siblings
//! without coordination.
//!
//! Expansion is breadth-first: every queue entry performs at most one chase
//! step and re-enters the queue behind its siblings and cousins, so every
//! branch progresses. Within a branch the level discipline of
//! [`crate::chase`] applies: triggers are collected at the start of a level,
//! EGDs and negative constraints are settled at its end.
//!
//! Leaves are `Saturated` (a model of the database and the rules), `Failed`
//! (EGD clash or constraint match) or `Open` (cut by the budget). Failed
//! leaves admit no model and are ignored by query answering.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::chase::{
    collect_triggers, dtgd_applicable, extend_with_disjunct, is_active_trigger, settle,
    ApplicationOrder, Budget, NullSource, Violation,
};
use crate::classify::RuleRef;
use crate::dependency::{Dependency, Dtgd};
use crate::error::CoreError;
use crate::instance::Instance;
use crate::query::{answers, evaluate_bcq, AnswerTuple, ConjunctiveQuery};
use crate::substitution::Substitution;
use crate::terms::{Constant, Term};

pub use crate::chase::dtgd_applicable as is_applicable;

/// One child instance per head disjunct.
///
/// With a single disjunct the child keeps `nulls`; otherwise child `k` draws
/// from `nulls.child(k)`.
pub fn apply_dtgd(
    d: &Dtgd,
    h: &Substitution,
    i: &Instance,
    nulls: &mut NullSource,
) -> Vec<Instance> {
    if d.is_tgd() {
        let mut out = i.clone();
        extend_with_disjunct(d, 0, h, &mut out, nulls);
        return vec![out];
    }
    (0..d.disjuncts.len())
        .map(|k| {
            let mut out = i.clone();
            extend_with_disjunct(d, k, h, &mut out, &mut nulls.child(k));
            out
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NodeStatus {
    /// Expanded by a chase step.
    Internal,
    Saturated,
    Failed {
        violation: Violation,
    },
    /// Cut by the step or depth budget.
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedStep {
    pub rule: RuleRef,
    pub substitution: Substitution,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub branch: String,
    /// Completed levels on this branch when the node was reached.
    pub level: usize,
    pub step: Option<AppliedStep>,
    pub status: NodeStatus,
    /// Present for the root and all leaves; internal nodes keep theirs only
    /// when [`DChaseConfig::retain_instances`] is set.
    pub instance: Option<Instance>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.status != NodeStatus::Internal
    }
}

#[derive(Clone, Debug, Default)]
pub struct DChaseConfig {
    pub budget: Budget,
    pub order: ApplicationOrder,
    /// Expand sibling branches on the rayon pool. Which branches are cut
    /// first under a tight step budget then depends on scheduling.
    pub parallel: bool,
    pub retain_instances: bool,
}

#[derive(Clone, Debug)]
pub struct ChaseTree {
    pub nodes: Vec<Node>,
    /// Total rule applications across the tree.
    pub steps: usize,
}

/// A branch waiting in the expansion queue.
struct Frontier {
    node: usize,
    instance: Instance,
    nulls: NullSource,
    pending: VecDeque<(RuleRef, Substitution)>,
    /// The instance when `pending` was last collected.
    seen: Option<Arc<Instance>>,
    level: usize,
}

enum Expansion {
    Leaf(Frontier, NodeStatus),
    Step {
        parent: Frontier,
        step: AppliedStep,
        children: Vec<Frontier>,
    },
}

/// Advances one branch by at most one rule application.
fn expand(
    sigma: &[Dependency],
    config: &DChaseConfig,
    steps: &AtomicUsize,
    mut f: Frontier,
) -> Expansion {
    loop {
        if f.pending.is_empty() {
            if let Err(violation) = settle(sigma, &mut f.instance, None) {
                return Expansion::Leaf(f, NodeStatus::Failed { violation });
            }
            let triggers = collect_triggers(sigma, &f.instance, config.order, f.seen.as_deref());
            if triggers.is_empty() {
                return Expansion::Leaf(f, NodeStatus::Saturated);
            }
            if !config.budget.depth_left(f.level) {
                return Expansion::Leaf(f, NodeStatus::Open);
            }
            f.level += 1;
            f.pending = triggers;
            f.seen = Some(Arc::new(f.instance.clone()));
        }
        let (rule, h) = f.pending.pop_front().expect("pending is nonempty");
        let Dependency::Dtgd(d) = &sigma[rule.0] else {
            unreachable!("triggers come from rules")
        };
        if !is_active_trigger(d, &h, &f.instance) {
            continue;
        }
        let reserved = steps
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |used| {
                config.budget.steps_left(used).then_some(used + 1)
            })
            .is_ok();
        if !reserved {
            f.pending.push_front((rule, h));
            return Expansion::Leaf(f, NodeStatus::Open);
        }
        let children = (0..d.disjuncts.len())
            .map(|k| {
                let mut nulls = if d.is_tgd() {
                    f.nulls.clone()
                } else {
                    f.nulls.child(k)
                };
                let mut instance = f.instance.clone();
                extend_with_disjunct(d, k, &h, &mut instance, &mut nulls);
                Frontier {
                    node: usize::MAX,
                    instance,
                    nulls,
                    pending: f.pending.clone(),
                    seen: f.seen.clone(),
                    level: f.level,
                }
            })
            .collect();
        return Expansion::Step {
            parent: f,
            step: AppliedStep {
                rule,
                substitution: h,
            },
            children,
        };
    }
}

/// Builds the disjunctive chase tree with default settings.
pub fn disjunctive_chase(d: &Instance, sigma: &[Dependency], budget: Budget) -> ChaseTree {
    run_disjunctive_chase(
        d,
        sigma,
        &DChaseConfig {
            budget,
            ..Default::default()
        },
    )
}

pub fn run_disjunctive_chase(
    d: &Instance,
    sigma: &[Dependency],
    config: &DChaseConfig,
) -> ChaseTree {
    let mut tree = ChaseTree {
        nodes: vec![Node {
            parent: None,
            children: Vec::new(),
            branch: "0".into(),
            level: 0,
            step: None,
            status: NodeStatus::Internal,
            instance: Some(d.clone()),
        }],
        steps: 0,
    };
    let steps = AtomicUsize::new(0);
    let mut queue = VecDeque::from([Frontier {
        node: 0,
        instance: d.clone(),
        nulls: NullSource::default(),
        pending: VecDeque::new(),
        seen: None,
        level: 0,
    }]);

    while !queue.is_empty() {
        let wave: Vec<Frontier> = if config.parallel {
            queue.drain(..).collect()
        } else {
            vec![queue.pop_front().expect("queue is nonempty")]
        };
        let results: Vec<Expansion> = if config.parallel {
            wave.into_par_iter()
                .map(|f| expand(sigma, config, &steps, f))
                .collect()
        } else {
            wave.into_iter()
                .map(|f| expand(sigma, config, &steps, f))
                .collect()
        };
        for r in results {
            tree.absorb(r, config.retain_instances, &mut queue);
        }
    }
    tree.steps = steps.load(Ordering::SeqCst);
    tree
}

impl ChaseTree {
    fn absorb(&mut self, r: Expansion, retain: bool, queue: &mut VecDeque<Frontier>) {
        match r {
            Expansion::Leaf(f, status) => {
                let node = &mut self.nodes[f.node];
                node.status = status;
                node.level = f.level;
                node.instance = Some(f.instance);
            }
            Expansion::Step {
                parent,
                step,
                children,
            } => {
                let pid = parent.node;
                if retain || pid == 0 {
                    if self.nodes[pid].instance.is_none() || retain {
                        self.nodes[pid].instance = Some(parent.instance);
                    }
                } else {
                    self.nodes[pid].instance = None;
                }
                self.nodes[pid].step = Some(step);
                for mut child in children {
                    let id = self.nodes.len();
                    self.nodes.push(Node {
                        parent: Some(pid),
                        children: Vec::new(),
                        branch: child.nulls.branch().to_string(),
                        level: child.level,
                        step: None,
                        status: NodeStatus::Internal,
                        instance: None,
                    });
                    self.nodes[pid].children.push(id);
                    child.node = id;
                    queue.push_back(child);
                }
            }
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf())
    }

    /// Instances of the non-failed leaves: saturated and open.
    pub fn live_leaves(&self) -> impl Iterator<Item = (&Node, &Instance)> {
        self.leaves()
            .filter(|(_, n)| !matches!(n.status, NodeStatus::Failed { .. }))
            .map(|(_, n)| (n, n.instance.as_ref().expect("leaves keep instances")))
    }

    /// The chase result: instances of saturated leaves.
    pub fn saturated(&self) -> Vec<&Instance> {
        self.live_leaves()
            .filter(|(n, _)| n.status == NodeStatus::Saturated)
            .map(|(_, i)| i)
            .collect()
    }

    pub fn is_fully_expanded(&self) -> bool {
        self.leaves().all(|(_, n)| n.status != NodeStatus::Open)
    }

    pub fn all_failed(&self) -> bool {
        self.leaves()
            .all(|(_, n)| matches!(n.status, NodeStatus::Failed { .. }))
    }

    pub fn count(&self, pred: impl Fn(&NodeStatus) -> bool) -> usize {
        self.leaves().filter(|(_, n)| pred(&n.status)).count()
    }

    /// Certain entailment of a boolean query over the leaves.
    pub fn certain_bcq(&self, q: &ConjunctiveQuery) -> Result<Entailment, CoreError> {
        if !q.is_boolean() {
            return Err(CoreError::NotBoolean(q.arity()));
        }
        if self.all_failed() {
            return Ok(Entailment::Entailed);
        }
        let mut open_miss = false;
        let mut saturated_miss = false;
        for (n, i) in self.live_leaves() {
            if !evaluate_bcq(q, i)? {
                match n.status {
                    NodeStatus::Open => open_miss = true,
                    _ => saturated_miss = true,
                }
            }
        }
        Ok(match (open_miss, saturated_miss) {
            (false, false) => Entailment::Entailed,
            (true, _) => Entailment::Unknown,
            (false, true) if self.is_fully_expanded() => Entailment::NotEntailed,
            (false, true) => Entailment::Unknown,
        })
    }

    /// Intersection of leaf answers. When every leaf failed the theory has
    /// no model, and every tuple over the active domain is returned.
    pub fn certain_answers(&self, q: &ConjunctiveQuery, sigma: &[Dependency]) -> CertainAnswers {
        let status = if self.is_fully_expanded() {
            AnswerStatus::Exact
        } else {
            AnswerStatus::LowerBoundUnknown
        };
        if self.all_failed() {
            let root = self
                .root()
                .instance
                .as_ref()
                .expect("root keeps its instance");
            let domain = active_domain(root, sigma, q);
            return CertainAnswers {
                tuples: all_tuples(&domain, q.arity()),
                status,
                inconsistent: true,
            };
        }
        let mut acc: Option<BTreeSet<AnswerTuple>> = None;
        for (_, i) in self.live_leaves() {
            let here = answers(q, i);
            acc = Some(match acc {
                None => here,
                Some(prev) => prev.intersection(&here).cloned().collect(),
            });
        }
        CertainAnswers {
            tuples: acc.unwrap_or_default(),
            status,
            inconsistent: false,
        }
    }

    /// Indented text rendering, one node per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_node(0, 0, &mut out);
        out
    }

    fn write_node(&self, id: usize, indent: usize, out: &mut String) {
        let n = &self.nodes[id];
        let pad = "  ".repeat(indent);
        let status = match &n.status {
            NodeStatus::Internal => String::new(),
            NodeStatus::Saturated => " saturated".into(),
            NodeStatus::Open => " open".into(),
            NodeStatus::Failed { violation } => format!(" failed: {violation}"),
        };
        let _ = write!(out, "{pad}node {id} [branch {}]{status}", n.branch);
        if let Some(s) = &n.step {
            let _ = write!(out, " {} with {}", s.rule, s.substitution);
        }
        out.push('\n');
        if n.is_leaf() {
            if let Some(i) = &n.instance {
                let _ = writeln!(out, "{pad}  {i}");
            }
        }
        for &c in &n.children {
            self.write_node(c, indent + 1, out);
        }
    }

    /// Nested structure for machine-readable export.
    pub fn to_export(&self) -> TreeExport {
        self.export_node(0)
    }

    fn export_node(&self, id: usize) -> TreeExport {
        let n = &self.nodes[id];
        TreeExport {
            id,
            branch: n.branch.clone(),
            rule: n.step.as_ref().map(|s| s.rule),
            substitution: n.step.as_ref().map(|s| s.substitution.clone()),
            status: n.status.clone(),
            facts: if n.is_leaf() {
                n.instance.clone()
            } else {
                None
            },
            children: n.children.iter().map(|&c| self.export_node(c)).collect(),
        }
    }
}

impl fmt::Display for ChaseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeExport {
    pub id: usize,
    pub branch: String,
    pub rule: Option<RuleRef>,
    pub substitution: Option<Substitution>,
    #[serde(flatten)]
    pub status: NodeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facts: Option<Instance>,
    pub children: Vec<TreeExport>,
}

/// An instance in fact syntax, one atom per line, nulls printed as `_:b<branch>_<id>`.
pub fn instance_to_facts(i: &Instance) -> String {
    let mut out = String::new();
    for a in i.atoms() {
        let _ = writeln!(out, "{a}.");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Entailment {
    Entailed,
    NotEntailed,
    Unknown,
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Entailment::Entailed => "Entailed",
            Entailment::NotEntailed => "NotEntailed",
            Entailment::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AnswerStatus {
    /// Tree fully expanded: the tuple set is exact.
    Exact,
    /// Some branch was cut by the budget; the tuple set is not final.
    LowerBoundUnknown,
}

impl fmt::Display for AnswerStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerStatus::Exact => "Exact",
            AnswerStatus::LowerBoundUnknown => "LowerBoundUnknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertainAnswers {
    pub tuples: BTreeSet<AnswerTuple>,
    pub status: AnswerStatus,
    /// Every branch failed: the theory has no model.
    pub inconsistent: bool,
}

fn active_domain(d: &Instance, sigma: &[Dependency], q: &ConjunctiveQuery) -> BTreeSet<Constant> {
    let mut dom = d.constants();
    let rule_terms = sigma
        .iter()
        .flat_map(Dependency::atoms)
        .flat_map(|a| a.args.iter());
    let query_terms = q
        .body
        .iter()
        .flat_map(|a| a.args.iter())
        .chain(q.head.iter())
        .chain(q.equalities.iter().flat_map(|(l, r)| [l, r]));
    dom.extend(
        rule_terms
            .chain(query_terms)
            .filter_map(Term::as_constant)
            .cloned(),
    );
    dom
}

fn all_tuples(domain: &BTreeSet<Constant>, arity: usize) -> BTreeSet<AnswerTuple> {
    let mut out: BTreeSet<AnswerTuple> = BTreeSet::from([Vec::new()]);
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                domain.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Certain entailment of a boolean query under `sigma`.
pub fn certain_bcq(
    q: &ConjunctiveQuery,
    d: &Instance,
    sigma: &[Dependency],
    budget: Budget,
) -> Result<Entailment, CoreError> {
    if !q.is_boolean() {
        return Err(CoreError::NotBoolean(q.arity()));
    }
    disjunctive_chase(d, sigma, budget).certain_bcq(q)
}

/// Certain answers of a query under `sigma`.
pub fn certain_answers(
    q: &ConjunctiveQuery,
    d: &Instance,
    sigma: &[Dependency],
    budget: Budget,
) -> CertainAnswers {
    disjunctive_chase(d, sigma, budget).certain_answers(q, sigma)
}

/// First applicable disjunctive rule of `sigma` on `i`, if any.
pub fn first_applicable(sigma: &[Dependency], i: &Instance) -> Option<(RuleRef, Substitution)> {
    sigma.iter().enumerate().find_map(|(idx, dep)| {
        dep.as_dtgd()
            .and_then(|d| dtgd_applicable(d, i))
            .map(|h| (RuleRef(idx), h))
    })
}
