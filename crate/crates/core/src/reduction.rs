//! Reduction of a realizable multigraph to a semi-free base.
//!
//! Take an edge `p -> q` of largest label `l > 1`, with `x1` the label of
//! the other edge at `p` and `x2` the label of the other edge at `q`. The
//! indices of `p` and `q` fix the case, and the equal modulo property forces
//! the relation between `x1`, `x2` and `l`:
//!
//! | case | (n_p, n_q) | relation     | undone by |
//! |------|------------|--------------|-----------|
//! | 1    | (1, 1)     | x1 + x2 = l  | rev-op1   |
//! | 2    | (0, 1)     | x1 = x2      | rev-op2   |
//! | 3    | (1, 2)     | x1 = x2      | rev-op3   |
//! | 4    | (0, 2)     | x1 + x2 = l  | rev-op4   |
//!
//! Every step lowers the sum of `label - 1` over all edges, so the number of
//! steps is bounded by that sum for the input.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::multigraph::{Edge, GraphError, Multigraph, VertexId};
use crate::operations::{apply, OpError, OpKind, OperationTrace, Site};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl CaseTag {
    pub fn from_indices(n_p: usize, n_q: usize) -> Option<CaseTag> {
        match (n_p, n_q) {
            (1, 1) => Some(CaseTag::Case1),
            (0, 1) => Some(CaseTag::Case2),
            (1, 2) => Some(CaseTag::Case3),
            (0, 2) => Some(CaseTag::Case4),
            _ => None,
        }
    }

    pub fn reverse_kind(self) -> OpKind {
        match self {
            CaseTag::Case1 => OpKind::RevOp1,
            CaseTag::Case2 => OpKind::RevOp2,
            CaseTag::Case3 => OpKind::RevOp3,
            CaseTag::Case4 => OpKind::RevOp4,
        }
    }

    /// Whether the flanks must sum to the label (cases 1 and 4) rather than agree.
    pub fn sums(self) -> bool {
        matches!(self, CaseTag::Case1 | CaseTag::Case4)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            CaseTag::Case1 => 1,
            CaseTag::Case2 => 2,
            CaseTag::Case3 => 3,
            CaseTag::Case4 => 4,
        };
        write!(f, "case {n}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("edge {edge} is not of maximal label {max} > 1 in its component")]
    NotMaximal { edge: Edge, max: i64 },
    #[error("edge {edge} ({case}): flanking labels {x1}, {x2} break the forced relation")]
    CongruenceViolation {
        edge: Edge,
        case: CaseTag,
        x1: i64,
        x2: i64,
    },
    #[error("edge {edge} joins vertices of indices {n_p} and {n_q}")]
    BadIndices { edge: Edge, n_p: usize, n_q: usize },
    #[error("graph is already semi-free")]
    AlreadySemiFree,
    #[error("graph fails the {0} condition")]
    NotCandidate(&'static str),
    #[error("no reverse operation applies at {edge}: {reason}")]
    NotReducible { edge: Edge, reason: String },
    #[error("reduction broke an invariant: {0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub case: CaseTag,
    pub x1: i64,
    pub x2: i64,
}

/// (largest label, number of edges carrying it).
pub fn measure(g: &Multigraph) -> (i64, usize) {
    let max = g.edges().iter().map(|e| e.label).max().unwrap_or(0);
    (max, g.edges().iter().filter(|e| e.label == max).count())
}

/// Sum of `label - 1` over all edges; zero exactly on all-1 labelings.
pub fn excess(g: &Multigraph) -> i64 {
    g.edges().iter().map(|e| e.label - 1).sum()
}

pub fn classify_edge(g: &Multigraph, edge: &Edge) -> Result<Classification, ReductionError> {
    let idx = g.find_edge(edge).ok_or_else(|| GraphError::Format(format!("edge {edge} not in graph")))?;
    let comp = g
        .connected_components()
        .into_iter()
        .find(|c| c.contains_vertex(&edge.from))
        .expect("endpoint belongs to a component");
    let max = measure(&comp).0;
    if edge.label != max || max <= 1 {
        return Err(ReductionError::NotMaximal {
            edge: edge.clone(),
            max,
        });
    }
    let (p, q) = (&edge.from, &edge.to);
    let n_p = g.vertex_index(p)?;
    let n_q = g.vertex_index(q)?;
    let case = CaseTag::from_indices(n_p, n_q).ok_or_else(|| ReductionError::BadIndices {
        edge: edge.clone(),
        n_p,
        n_q,
    })?;
    let other = |v: &VertexId| -> Result<i64, ReductionError> {
        let o = g.other_edge(v, idx).ok_or_else(|| GraphError::NotTwoRegular(v.clone()))?;
        Ok(g.edges()[o].label)
    };
    let (x1, x2) = (other(p)?, other(q)?);
    let holds = if case.sums() {
        x1 + x2 == edge.label
    } else {
        x1 == x2
    };
    if !holds || x1 >= edge.label || x2 >= edge.label {
        return Err(ReductionError::CongruenceViolation {
            edge: edge.clone(),
            case,
            x1,
            x2,
        });
    }
    Ok(Classification { case, x1, x2 })
}

/// One reduction step as recorded in the log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub step: usize,
    pub edge: Edge,
    pub case: CaseTag,
    pub x1: i64,
    pub x2: i64,
    pub measure: (i64, usize),
    pub reverse: Site,
    pub forward: Site,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: {} {}, x1={} x2={}, {}, measure ({}, {})",
            self.step,
            self.edge,
            self.case,
            self.x1,
            self.x2,
            self.case.reverse_kind(),
            self.measure.0,
            self.measure.1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub entry: LogEntry,
    pub graph: Multigraph,
}

/// The maximal-label edge whose source comes first in cycle order.
pub fn select_edge(g: &Multigraph) -> Result<Edge, ReductionError> {
    let order = g.cycle_order()?;
    let max = measure(g).0;
    let pos = |v: &VertexId| order.position(v).expect("vertex on cycle");
    order
        .edges
        .iter()
        .filter(|e| e.label == max)
        .min_by_key(|e| pos(&e.from))
        .cloned()
        .ok_or(ReductionError::AlreadySemiFree)
}

fn check_candidate(g: &Multigraph) -> Result<(), ReductionError> {
    match g.predicate_table().first_failure() {
        Some(name) => Err(ReductionError::NotCandidate(name)),
        None => Ok(()),
    }
}

/// One step on a connected candidate that is not yet semi-free.
pub fn reduce_step(g: &Multigraph) -> Result<ReductionStep, ReductionError> {
    let fresh = g.fresh_id("r1");
    reduce_step_named(g, 1, fresh)
}

fn reduce_step_named(g: &Multigraph, step: usize, fresh: VertexId) -> Result<ReductionStep, ReductionError> {
    check_candidate(g)?;
    if !g.is_connected() {
        return Err(GraphError::NotConnected.into());
    }
    if g.is_semi_free() {
        return Err(ReductionError::AlreadySemiFree);
    }
    let edge = select_edge(g)?;
    if edge.label == 1 {
        return Err(ReductionError::NotCandidate("minimal"));
    }
    let class = classify_edge(g, &edge)?;
    let reverse = match class.case {
        CaseTag::Case1 => Site::RevOp1 {
            edge: edge.clone(),
            fresh: Some(fresh),
        },
        CaseTag::Case2 => Site::RevOp2 { edge: edge.clone() },
        CaseTag::Case3 => Site::RevOp3 { edge: edge.clone() },
        CaseTag::Case4 => Site::RevOp4 {
            edge: edge.clone(),
            fresh: Some(fresh),
        },
    };
    let applied = apply(g, &reverse).map_err(|e| ReductionError::NotReducible {
        edge: edge.clone(),
        reason: match e {
            OpError::PatternMismatch { reason, .. } => reason,
            other => other.to_string(),
        },
    })?;
    Ok(ReductionStep {
        entry: LogEntry {
            step,
            edge,
            case: class.case,
            x1: class.x1,
            x2: class.x2,
            measure: measure(g),
            reverse,
            forward: applied.inverse,
        },
        graph: applied.graph,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentReduction {
    pub input: Multigraph,
    pub base: Multigraph,
    /// Forward trace from `base` back to `input`.
    pub trace: OperationTrace,
    pub log: Vec<LogEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    pub components: Vec<ComponentReduction>,
    pub todd: u64,
}

impl ReductionResult {
    pub fn bases(&self) -> Vec<&Multigraph> {
        self.components.iter().map(|c| &c.base).collect()
    }

    pub fn traces(&self) -> Vec<&OperationTrace> {
        self.components.iter().map(|c| &c.trace).collect()
    }

    pub fn steps(&self) -> usize {
        self.components.iter().map(|c| c.log.len()).sum()
    }
}

/// Reduces every component to a semi-free base and records the forward
/// traces. Fresh vertices are named `r1`, `r2`, ... avoiding every id of the
/// input.
pub fn reduce_to_semifree(g: &Multigraph) -> Result<ReductionResult, ReductionError> {
    check_candidate(g)?;
    let mut taken: BTreeSet<VertexId> = g.vertices().iter().cloned().collect();
    let mut counter = 0usize;
    let mut components = Vec::new();
    for comp in g.connected_components() {
        let todd = comp.todd();
        let budget = excess(&comp);
        let mut current = comp.clone();
        let mut log = Vec::new();
        while !current.is_semi_free() {
            if log.len() as i64 >= budget {
                return Err(ReductionError::Invariant(format!(
                    "more than {budget} steps on a component"
                )));
            }
            let fresh = loop {
                counter += 1;
                let id = VertexId::new(format!("r{counter}"));
                if !taken.contains(&id) && !current.contains_vertex(&id) {
                    break id;
                }
            };
            taken.insert(fresh.clone());
            let before = measure(&current);
            let before_excess = excess(&current);
            let step = reduce_step_named(&current, log.len() + 1, fresh)?;
            let after = measure(&step.graph);
            if after >= before || excess(&step.graph) >= before_excess {
                return Err(ReductionError::Invariant(format!(
                    "measure {before:?} did not decrease at {}",
                    step.entry.edge
                )));
            }
            if step.graph.todd() != todd {
                return Err(ReductionError::Invariant("Todd genus changed".into()));
            }
            log.push(step.entry);
            current = step.graph;
        }
        let steps = log.iter().rev().map(|e| e.forward.clone()).collect();
        components.push(ComponentReduction {
            input: comp,
            base: current.clone(),
            trace: OperationTrace {
                base: current,
                steps,
            },
            log,
        });
    }
    Ok(ReductionResult {
        components,
        todd: g.todd(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Validation,
    Effectiveness,
    Symmetry,
    Minimal,
    EqualModulo,
    NotReducible,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::Validation => "validation",
            RejectReason::Effectiveness => "effectiveness",
            RejectReason::Symmetry => "symmetry",
            RejectReason::Minimal => "minimal",
            RejectReason::EqualModulo => "equal-modulo",
            RejectReason::NotReducible => "not-reducible",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Realizability {
    Accepted(ReductionResult),
    Rejected(Rejection),
}

impl Realizability {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Realizability::Accepted(_))
    }
}

pub fn realizability_check(g: &Multigraph) -> Realizability {
    let reject = |reason, detail: String| Realizability::Rejected(Rejection { reason, detail });
    if let Err(e) = g.validate() {
        return reject(RejectReason::Validation, e.to_string());
    }
    let checks = [
        (g.is_effective(), RejectReason::Effectiveness),
        (g.is_symmetric(), RejectReason::Symmetry),
        (g.has_minimal_property(), RejectReason::Minimal),
        (g.has_equal_modulo_property(), RejectReason::EqualModulo),
    ];
    if let Some((_, reason)) = checks.iter().find(|(ok, _)| !ok) {
        return reject(*reason, format!("{reason} condition fails"));
    }
    match reduce_to_semifree(g) {
        Ok(r) => Realizability::Accepted(r),
        Err(e) => reject(RejectReason::NotReducible, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operations::replay;

    fn g(edges: &[(&str, &str, i64)]) -> Multigraph {
        Multigraph::from_edges(edges.iter().map(|&(a, b, l)| Edge::new(a, b, l)).collect())
    }

    fn square() -> Multigraph {
        g(&[("p1", "p2", 1), ("p2", "p3", 1), ("p4", "p3", 1), ("p1", "p4", 1)])
    }

    fn triangle(a: i64, b: i64) -> Multigraph {
        g(&[("p1", "p2", a), ("p2", "p3", b), ("p1", "p3", a + b)])
    }

    #[test]
    fn classify_examples() {
        let c = classify_edge(&triangle(1, 1), &Edge::new("p1", "p3", 2)).unwrap();
        assert_eq!((c.case, c.x1, c.x2), (CaseTag::Case4, 1, 1));

        // after a blow-up with a = 1, b = 2
        let blown = g(&[("u", "x", 1), ("x", "y", 3), ("y", "w", 2), ("u", "z", 2), ("z", "w", 1)]);
        let c = classify_edge(&blown, &Edge::new("x", "y", 3)).unwrap();
        assert_eq!((c.case, c.x1, c.x2), (CaseTag::Case1, 1, 2));

        // after a relabel with c = d = 1
        let relabeled = g(&[("p", "x", 1), ("q", "p", 2), ("q", "y", 1), ("x", "y", 1)]);
        let c = classify_edge(&relabeled, &Edge::new("q", "p", 2)).unwrap();
        assert_eq!((c.case, c.x1, c.x2), (CaseTag::Case2, 1, 1));

        assert!(matches!(
            classify_edge(&triangle(2, 3), &Edge::new("p1", "p2", 2)),
            Err(ReductionError::NotMaximal { .. })
        ));
        // 2-labeled edge p -> q with flanks 1 and 3 in a (0, 1) configuration
        let bad = g(&[("q", "p", 4), ("p", "x", 1), ("q", "y", 3), ("x", "y", 2)]);
        assert!(matches!(
            classify_edge(&bad, &Edge::new("q", "p", 4)),
            Err(ReductionError::CongruenceViolation { .. })
        ));
    }

    #[test]
    fn step_examples() {
        let s = reduce_step(&triangle(1, 1)).unwrap();
        assert_eq!(s.entry.case, CaseTag::Case4);
        assert!(s.graph.is_isomorphic(&square()));
        assert_eq!(reduce_step(&square()), Err(ReductionError::AlreadySemiFree));
    }

    #[test]
    fn reduce_examples() {
        // first Hirzebruch shape, (c, d, e) = (5, 2, 1)
        let h = g(&[("p1", "p2", 2), ("p1", "p3", 5), ("p2", "p4", 1), ("p3", "p4", 2)]);
        let r = reduce_to_semifree(&h).unwrap();
        assert_eq!(r.components.len(), 1);
        assert!(r.components[0].base.is_isomorphic(&square()));
        assert_eq!(replay(&r.components[0].trace).unwrap(), h);

        let two = square().disjoint_union(&square());
        let r = reduce_to_semifree(&two).unwrap();
        assert_eq!(r.components.len(), 2);
        assert!(r.components.iter().all(|c| c.trace.steps.is_empty()));

        let t = triangle(2, 3);
        let r = reduce_to_semifree(&t).unwrap();
        assert!(r.components[0].base.is_isomorphic(&square()));
        assert_eq!(r.todd, 1);
        assert_eq!(replay(&r.components[0].trace).unwrap(), t);
        assert!(r.steps() as i64 <= excess(&t));
    }

    #[test]
    fn realizability_examples() {
        let fghh = g(&[("p1", "p2", 5), ("p1", "p3", 3), ("p2", "p4", 3), ("p3", "p4", 2)]);
        assert!(realizability_check(&fghh).is_accepted());
        let t222 = g(&[("a", "b", 2), ("b", "c", 2), ("a", "c", 2)]);
        match realizability_check(&t222) {
            Realizability::Rejected(r) => assert_eq!(r.reason, RejectReason::Effectiveness),
            other => panic!("{other:?}"),
        }
        // residues at the 4-edge disagree
        let bad = g(&[("p", "q", 4), ("p", "x", 1), ("x", "y", 3), ("y", "q", 2)]);
        match realizability_check(&bad) {
            Realizability::Rejected(r) => assert_ne!(r.reason, RejectReason::NotReducible),
            other => panic!("{other:?}"),
        }
        let loop_graph = g(&[("a", "a", 1)]);
        match realizability_check(&loop_graph) {
            Realizability::Rejected(r) => assert_eq!(r.reason, RejectReason::Validation),
            other => panic!("{other:?}"),
        }
    }
}
