//! The position dependency graph and the weak-acyclicity check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::dependency::Dependency;
use crate::terms::Position;

use super::tgds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Normal,
    Special,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub from: Position,
    pub to: Position,
    pub kind: EdgeKind,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            EdgeKind::Normal => "->",
            EdgeKind::Special => "=>",
        };
        write!(f, "{} {arrow} {}", self.from, self.to)
    }
}

/// Which body positions feed a special edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpecialEdgeSource {
    /// Every body position of the rule.
    #[default]
    AllBodyPositions,
    /// Only body positions holding a variable that also occurs in the head disjunct.
    ExportedPositions,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<Position>,
    pub edges: BTreeSet<Edge>,
}

impl DependencyGraph {
    fn successors(&self) -> BTreeMap<&Position, Vec<&Edge>> {
        let mut succ: BTreeMap<&Position, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            succ.entry(&e.from).or_default().push(e);
        }
        succ
    }

    /// A cycle through at least one special edge, as an edge list starting
    /// with that special edge. `None` when the graph is weakly acyclic.
    pub fn special_cycle(&self) -> Option<Vec<Edge>> {
        let succ = self.successors();
        for special in self.edges.iter().filter(|e| e.kind == EdgeKind::Special) {
            if let Some(path) = shortest_path(&succ, &special.to, &special.from) {
                let mut cycle = vec![special.clone()];
                cycle.extend(path.into_iter().cloned());
                return Some(cycle);
            }
        }
        None
    }
}

/// Breadth-first path of edges from `start` to `goal` (empty when equal).
fn shortest_path<'a>(
    succ: &BTreeMap<&'a Position, Vec<&'a Edge>>,
    start: &'a Position,
    goal: &Position,
) -> Option<Vec<&'a Edge>> {
    if start == goal {
        return Some(Vec::new());
    }
    let mut via: BTreeMap<&Position, &Edge> = BTreeMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for e in succ.get(p).into_iter().flatten() {
            if &e.to == start || via.contains_key(&e.to) {
                continue;
            }
            via.insert(&e.to, e);
            if &e.to == goal {
                let mut path = vec![*e];
                let mut at = &e.from;
                while at != start {
                    let back = via[at];
                    path.push(back);
                    at = &back.from;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(&e.to);
        }
    }
    None
}

pub fn dependency_graph(sigma: &[Dependency]) -> DependencyGraph {
    dependency_graph_with(sigma, SpecialEdgeSource::default())
}

/// Builds the graph disjunct-wise: each head disjunct contributes edges as if
/// it were a separate TGD with the shared body.
pub fn dependency_graph_with(sigma: &[Dependency], source: SpecialEdgeSource) -> DependencyGraph {
    let mut g = DependencyGraph::default();
    for (_, d) in tgds(sigma) {
        for a in d
            .body
            .iter()
            .chain(d.disjuncts.iter().flat_map(|dj| dj.head.iter()))
        {
            for i in 0..a.arity() {
                g.vertices.insert(a.position(i));
            }
        }
        for dj in &d.disjuncts {
            for body_atom in &d.body {
                for (i, t) in body_atom.args.iter().enumerate() {
                    let from = body_atom.position(i);
                    let exported = t
                        .as_variable()
                        .is_some_and(|v| dj.head.iter().any(|h| h.contains_variable(v)));
                    if let Some(v) = t.as_variable() {
                        for h in &dj.head {
                            for to in h.positions_of(v) {
                                g.edges.insert(Edge {
                                    from: from.clone(),
                                    to,
                                    kind: EdgeKind::Normal,
                                });
                            }
                        }
                    }
                    if source == SpecialEdgeSource::ExportedPositions && !exported {
                        continue;
                    }
                    for h in &dj.head {
                        for (k, ht) in h.args.iter().enumerate() {
                            if ht.as_variable().is_some_and(|y| dj.is_existential(y)) {
                                g.edges.insert(Edge {
                                    from: from.clone(),
                                    to: h.position(k),
                                    kind: EdgeKind::Special,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    g
}

pub fn is_weakly_acyclic(sigma: &[Dependency]) -> bool {
    dependency_graph(sigma).special_cycle().is_none()
}
