//! The four local rewrites of a two-regular multigraph and their reverses.
//!
//! Each rewrite is a [`Rewrite`] strategy held in a [`Registry`] and looked
//! up by [`OpKind`] or by name (`op1` .. `op4`, `rev-op1` .. `rev-op4`).
//! Sites are addressed by concrete vertex and edge anchors. Applying a site
//! yields the new graph together with the site that undoes it, so a chain
//! of reverse steps can be turned into a forward trace without any
//! bookkeeping on the caller's side.
//!
//! Pictures, with `p -a-> q` meaning an `a`-labeled edge from `p` to `q`:
//!
//! ```text
//! op1  u -a-> p -b-> w                 =>  u -a-> p' -(a+b)-> p'' -b-> w
//! op2  x <-c- p <-d- q -c-> y          =>  label d becomes d+c
//! op3  x -e-> p -f-> q <-e- y          =>  label f becomes f+e
//! op4  x <-g- u -h-> r -g-> w <-h- y   =>  u -(g+h)-> w, r removed
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{Edge, GraphError, Multigraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Op1,
    Op2,
    Op3,
    Op4,
    RevOp1,
    RevOp2,
    RevOp3,
    RevOp4,
}

impl OpKind {
    pub const ALL: [OpKind; 8] = [
        OpKind::Op1,
        OpKind::Op2,
        OpKind::Op3,
        OpKind::Op4,
        OpKind::RevOp1,
        OpKind::RevOp2,
        OpKind::RevOp3,
        OpKind::RevOp4,
    ];

    pub const FORWARD: [OpKind; 4] = [OpKind::Op1, OpKind::Op2, OpKind::Op3, OpKind::Op4];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Op1 => "op1",
            OpKind::Op2 => "op2",
            OpKind::Op3 => "op3",
            OpKind::Op4 => "op4",
            OpKind::RevOp1 => "rev-op1",
            OpKind::RevOp2 => "rev-op2",
            OpKind::RevOp3 => "rev-op3",
            OpKind::RevOp4 => "rev-op4",
        }
    }

    pub fn is_reverse(self) -> bool {
        !OpKind::FORWARD.contains(&self)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("{kind} does not match at {anchor}: {reason}")]
    PatternMismatch {
        kind: OpKind,
        anchor: String,
        reason: String,
    },
    #[error("{kind} would leave edge {edge} with label {label} <= 0")]
    NonPositiveLabel { kind: OpKind, edge: Edge, label: i64 },
    #[error("fresh vertex id {0} is already in use")]
    FreshIdTaken(VertexId),
    #[error("label arithmetic overflowed")]
    Overflow,
    #[error("trace base is not semi-free")]
    BaseNotSemiFree,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<OpError>,
    },
}

/// Where a rewrite acts.
///
/// Rewrites that create vertices may name them through `fresh`; when absent
/// ids are derived from the anchor by priming.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "anchors", rename_all = "kebab-case")]
pub enum Site {
    Op1 {
        vertex: VertexId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fresh: Option<(VertexId, VertexId)>,
    },
    Op2 {
        edge: Edge,
    },
    Op3 {
        edge: Edge,
    },
    Op4 {
        incoming: Edge,
        outgoing: Edge,
    },
    RevOp1 {
        edge: Edge,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fresh: Option<VertexId>,
    },
    RevOp2 {
        edge: Edge,
    },
    RevOp3 {
        edge: Edge,
    },
    RevOp4 {
        edge: Edge,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fresh: Option<VertexId>,
    },
}

impl Site {
    pub fn kind(&self) -> OpKind {
        match self {
            Site::Op1 { .. } => OpKind::Op1,
            Site::Op2 { .. } => OpKind::Op2,
            Site::Op3 { .. } => OpKind::Op3,
            Site::Op4 { .. } => OpKind::Op4,
            Site::RevOp1 { .. } => OpKind::RevOp1,
            Site::RevOp2 { .. } => OpKind::RevOp2,
            Site::RevOp3 { .. } => OpKind::RevOp3,
            Site::RevOp4 { .. } => OpKind::RevOp4,
        }
    }

    pub fn op1(vertex: impl Into<VertexId>) -> Site {
        Site::Op1 {
            vertex: vertex.into(),
            fresh: None,
        }
    }

    /// Same site with any unnamed fresh vertices named after `stem`.
    pub fn with_fresh_names(&self, g: &Multigraph, stem: &str) -> Site {
        match self {
            Site::Op1 {
                vertex,
                fresh: None,
            } => {
                let a = g.fresh_id(&format!("{vertex}{stem}"));
                let b = g.fresh_id(&format!("{a}'"));
                Site::Op1 {
                    vertex: vertex.clone(),
                    fresh: Some((a, b)),
                }
            }
            Site::RevOp1 { edge, fresh: None } => Site::RevOp1 {
                edge: edge.clone(),
                fresh: Some(g.fresh_id(&format!("{}{stem}", edge.from))),
            },
            Site::RevOp4 { edge, fresh: None } => Site::RevOp4 {
                edge: edge.clone(),
                fresh: Some(g.fresh_id(&format!("{}{stem}", edge.from))),
            },
            other => other.clone(),
        }
    }

    /// True when the pattern closes up on itself: the two outer neighbors
    /// of the picture are the same vertex. Such matches are accepted.
    pub fn is_self_overlapping(&self, g: &Multigraph) -> bool {
        let outer = |v: &VertexId, e: &Edge| -> Option<VertexId> {
            let i = g.find_edge(e)?;
            let o = g.other_edge(v, i)?;
            Some(g.edges()[o].other_end(v).clone())
        };
        let pair = match self {
            Site::Op2 { edge } | Site::Op3 { edge } | Site::RevOp2 { edge } | Site::RevOp3 { edge } => {
                (outer(&edge.from, edge), outer(&edge.to, edge))
            }
            Site::Op4 { incoming, outgoing } => {
                (outer(&incoming.from, incoming), outer(&outgoing.to, outgoing))
            }
            _ => return false,
        };
        matches!(pair, (Some(a), Some(b)) if a == b)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Op1 { vertex, .. } => write!(f, "op1 at {vertex}"),
            Site::Op4 { incoming, outgoing } => write!(f, "op4 at {incoming} {outgoing}"),
            Site::Op2 { edge }
            | Site::Op3 { edge }
            | Site::RevOp1 { edge, .. }
            | Site::RevOp2 { edge }
            | Site::RevOp3 { edge }
            | Site::RevOp4 { edge, .. } => write!(f, "{} at {edge}", self.kind()),
        }
    }
}

/// Result of a rewrite: the new graph and the site that undoes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub graph: Multigraph,
    pub inverse: Site,
}

pub trait Rewrite: Send + Sync {
    fn kind(&self) -> OpKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError>;

    /// Every matching site, in cycle order component by component.
    fn find_sites(&self, g: &Multigraph) -> Vec<Site> {
        candidates(g, self.kind())
            .into_iter()
            .filter(|s| self.apply(g, s).is_ok())
            .collect()
    }
}

fn candidates(g: &Multigraph, kind: OpKind) -> Vec<Site> {
    let mut out = Vec::new();
    for comp in g.connected_components() {
        let Ok(order) = comp.cycle_order() else {
            continue;
        };
        match kind {
            OpKind::Op1 | OpKind::Op4 => {
                for v in &order.vertices {
                    let inc = comp.incident(v);
                    let ins: Vec<&Edge> = inc
                        .iter()
                        .map(|&i| &comp.edges()[i])
                        .filter(|e| &e.to == v)
                        .collect();
                    let outs: Vec<&Edge> = inc
                        .iter()
                        .map(|&i| &comp.edges()[i])
                        .filter(|e| &e.from == v)
                        .collect();
                    if ins.len() != 1 || outs.len() != 1 {
                        continue;
                    }
                    out.push(if kind == OpKind::Op1 {
                        Site::op1(v.clone())
                    } else {
                        Site::Op4 {
                            incoming: ins[0].clone(),
                            outgoing: outs[0].clone(),
                        }
                    });
                }
            }
            _ => {
                for e in &order.edges {
                    let edge = e.clone();
                    out.push(match kind {
                        OpKind::Op2 => Site::Op2 { edge },
                        OpKind::Op3 => Site::Op3 { edge },
                        OpKind::RevOp1 => Site::RevOp1 { edge, fresh: None },
                        OpKind::RevOp2 => Site::RevOp2 { edge },
                        OpKind::RevOp3 => Site::RevOp3 { edge },
                        _ => Site::RevOp4 { edge, fresh: None },
                    });
                }
            }
        }
    }
    out.dedup();
    out
}

fn mismatch(kind: OpKind, anchor: impl fmt::Display, reason: impl Into<String>) -> OpError {
    OpError::PatternMismatch {
        kind,
        anchor: anchor.to_string(),
        reason: reason.into(),
    }
}

fn wrong_site(kind: OpKind, site: &Site) -> OpError {
    mismatch(kind, site, format!("site is for {}", site.kind()))
}

fn locate(g: &Multigraph, kind: OpKind, e: &Edge) -> Result<usize, OpError> {
    g.find_edge(e)
        .ok_or_else(|| mismatch(kind, e, "edge is not in the graph"))
}

/// The edge at `v` other than edge `idx`.
fn flank<'g>(g: &'g Multigraph, kind: OpKind, v: &VertexId, idx: usize) -> Result<&'g Edge, OpError> {
    g.other_edge(v, idx)
        .map(|o| &g.edges()[o])
        .ok_or_else(|| mismatch(kind, v, "vertex does not have exactly two incidences"))
}

fn check_fresh(g: &Multigraph, ids: &[&VertexId], removed: &VertexId) -> Result<(), OpError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if (*id != removed && g.contains_vertex(id)) || !seen.insert(*id) {
            return Err(OpError::FreshIdTaken((*id).clone()));
        }
    }
    Ok(())
}

fn add(a: i64, b: i64) -> Result<i64, OpError> {
    a.checked_add(b).ok_or(OpError::Overflow)
}

/// Rebuilds `g` without the edges at `drop` and vertex `gone`, plus the new items.
fn rebuild(
    g: &Multigraph,
    drop: &[usize],
    gone: Option<&VertexId>,
    new_vertices: &[&VertexId],
    new_edges: Vec<Edge>,
) -> Multigraph {
    let mut vertices: Vec<VertexId> = g
        .vertices()
        .iter()
        .filter(|v| Some(*v) != gone)
        .cloned()
        .collect();
    vertices.extend(new_vertices.iter().map(|v| (*v).clone()));
    let mut edges: Vec<Edge> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, e)| e.clone())
        .collect();
    edges.extend(new_edges);
    Multigraph::from_parts(vertices, edges)
}

/// Operation 1: blow up an index-1 vertex into an edge.
pub struct VertexBlowUp;

impl Rewrite for VertexBlowUp {
    fn kind(&self) -> OpKind {
        OpKind::Op1
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let kind = self.kind();
        let Site::Op1 { vertex, fresh } = site else {
            return Err(wrong_site(kind, site));
        };
        let inc = g.incident(vertex);
        if inc.len() != 2 {
            return Err(mismatch(kind, vertex, "not a vertex of degree two"));
        }
        let ins: Vec<usize> = inc.iter().copied().filter(|&i| &g.edges()[i].to == vertex).collect();
        let outs: Vec<usize> = inc.iter().copied().filter(|&i| &g.edges()[i].from == vertex).collect();
        if ins.len() != 1 || outs.len() != 1 || ins[0] == outs[0] {
            return Err(mismatch(kind, vertex, "vertex does not have index 1"));
        }
        let (ein, eout) = (&g.edges()[ins[0]], &g.edges()[outs[0]]);
        let (x, y) = match fresh {
            Some((x, y)) => (x.clone(), y.clone()),
            None => {
                let x = g.fresh_id(&format!("{vertex}'"));
                let mut y = g.fresh_id(&format!("{vertex}''"));
                while y == x {
                    y = VertexId::new(format!("{y}'"));
                }
                (x, y)
            }
        };
        check_fresh(g, &[&x, &y], vertex)?;
        let sum = add(ein.label, eout.label)?;
        let graph = rebuild(
            g,
            &[ins[0], outs[0]],
            Some(vertex),
            &[&x, &y],
            vec![
                Edge::new(ein.from.clone(), x.clone(), ein.label),
                Edge::new(x.clone(), y.clone(), sum),
                Edge::new(y.clone(), eout.to.clone(), eout.label),
            ],
        );
        Ok(Applied {
            graph,
            inverse: Site::RevOp1 {
                edge: Edge::new(x, y, sum),
                fresh: Some(vertex.clone()),
            },
        })
    }
}

/// Reverse of operation 1: contract an edge joining two index-1 vertices.
pub struct EdgeContraction;

impl Rewrite for EdgeContraction {
    fn kind(&self) -> OpKind {
        OpKind::RevOp1
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let kind = self.kind();
        let Site::RevOp1 { edge, fresh } = site else {
            return Err(wrong_site(kind, site));
        };
        let idx = locate(g, kind, edge)?;
        let (p, q) = (&edge.from, &edge.to);
        let fp = flank(g, kind, p, idx)?;
        let fq = flank(g, kind, q, idx)?;
        if &fp.to != p {
            return Err(mismatch(kind, edge, "source does not have index 1"));
        }
        if &fq.from != q {
            return Err(mismatch(kind, edge, "target does not have index 1"));
        }
        let (ip, iq) = (g.other_edge(p, idx).unwrap(), g.other_edge(q, idx).unwrap());
        if ip == iq {
            return Err(mismatch(kind, edge, "contraction would create a self-loop"));
        }
        let (x1, x2) = (fp.label, fq.label);
        if add(x1, x2)? != edge.label {
            return Err(mismatch(
                kind,
                edge,
                format!("flanking labels {x1} + {x2} differ from {}", edge.label),
            ));
        }
        let r = match fresh {
            Some(r) => r.clone(),
            None => g.fresh_id(&format!("{p}+{q}")),
        };
        if r != *p && r != *q && g.contains_vertex(&r) {
            return Err(OpError::FreshIdTaken(r));
        }
        let new_edges = vec![
            Edge::new(fp.from.clone(), r.clone(), x1),
            Edge::new(r.clone(), fq.to.clone(), x2),
        ];
        let mut vertices: Vec<VertexId> = g
            .vertices()
            .iter()
            .filter(|v| *v != p && *v != q)
            .cloned()
            .collect();
        vertices.push(r.clone());
        let mut edges: Vec<Edge> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| ![idx, ip, iq].contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        edges.extend(new_edges);
        Ok(Applied {
            graph: Multigraph::from_parts(vertices, edges),
            inverse: Site::Op1 {
                vertex: r,
                fresh: Some((p.clone(), q.clone())),
            },
        })
    }
}

/// Operations 2 and 3 and their reverses: shift the label of an edge by the
/// common label of its two flanks.
///
/// Operation 2 needs both flanks pointing away from the edge's endpoints,
/// operation 3 needs both pointing in.
pub struct Relabel {
    kind: OpKind,
}

impl Relabel {
    pub fn new(kind: OpKind) -> Self {
        assert!(matches!(
            kind,
            OpKind::Op2 | OpKind::Op3 | OpKind::RevOp2 | OpKind::RevOp3
        ));
        Relabel { kind }
    }

    fn outward(&self) -> bool {
        matches!(self.kind, OpKind::Op2 | OpKind::RevOp2)
    }

    fn raising(&self) -> bool {
        matches!(self.kind, OpKind::Op2 | OpKind::Op3)
    }

    fn site(kind: OpKind, edge: Edge) -> Site {
        match kind {
            OpKind::Op2 => Site::Op2 { edge },
            OpKind::Op3 => Site::Op3 { edge },
            OpKind::RevOp2 => Site::RevOp2 { edge },
            _ => Site::RevOp3 { edge },
        }
    }

    fn inverse_kind(&self) -> OpKind {
        match self.kind {
            OpKind::Op2 => OpKind::RevOp2,
            OpKind::Op3 => OpKind::RevOp3,
            OpKind::RevOp2 => OpKind::Op2,
            _ => OpKind::Op3,
        }
    }
}

impl Rewrite for Relabel {
    fn kind(&self) -> OpKind {
        self.kind
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let kind = self.kind;
        let edge = match (kind, site) {
            (OpKind::Op2, Site::Op2 { edge })
            | (OpKind::Op3, Site::Op3 { edge })
            | (OpKind::RevOp2, Site::RevOp2 { edge })
            | (OpKind::RevOp3, Site::RevOp3 { edge }) => edge,
            _ => return Err(wrong_site(kind, site)),
        };
        let idx = locate(g, kind, edge)?;
        let fa = flank(g, kind, &edge.from, idx)?;
        let fb = flank(g, kind, &edge.to, idx)?;
        let points_out = |f: &Edge, v: &VertexId| &f.from == v;
        let shape_ok = if self.outward() {
            points_out(fa, &edge.from) && points_out(fb, &edge.to)
        } else {
            !points_out(fa, &edge.from) && !points_out(fb, &edge.to)
        };
        if !shape_ok {
            return Err(mismatch(kind, edge, "flanking edges have the wrong directions"));
        }
        if fa.label != fb.label {
            return Err(mismatch(
                kind,
                edge,
                format!("flanking labels {} and {} differ", fa.label, fb.label),
            ));
        }
        let c = fa.label;
        let label = if self.raising() {
            add(edge.label, c)?
        } else {
            edge.label - c
        };
        if label <= 0 {
            return Err(OpError::NonPositiveLabel {
                kind,
                edge: edge.clone(),
                label,
            });
        }
        let new_edge = Edge::new(edge.from.clone(), edge.to.clone(), label);
        let graph = rebuild(g, &[idx], None, &[], vec![new_edge.clone()]);
        Ok(Applied {
            graph,
            inverse: Relabel::site(self.inverse_kind(), new_edge),
        })
    }
}

/// Operation 4: merge the two edges at an index-1 vertex.
pub struct EdgeMerge;

impl Rewrite for EdgeMerge {
    fn kind(&self) -> OpKind {
        OpKind::Op4
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let kind = self.kind();
        let Site::Op4 { incoming, outgoing } = site else {
            return Err(wrong_site(kind, site));
        };
        let r = &incoming.to;
        if &outgoing.from != r {
            return Err(mismatch(kind, site, "edges do not meet head to tail"));
        }
        let i_in = locate(g, kind, incoming)?;
        let i_out = locate(g, kind, outgoing)?;
        if g.other_edge(r, i_in) != Some(i_out) {
            return Err(mismatch(kind, r, "vertex does not have index 1"));
        }
        let (u, w) = (&incoming.from, &outgoing.to);
        let (h, gl) = (incoming.label, outgoing.label);
        let fu = flank(g, kind, u, i_in)?;
        let fw = flank(g, kind, w, i_out)?;
        if &fu.from != u || fu.label != gl {
            return Err(mismatch(
                kind,
                site,
                format!("{u} needs a second outgoing edge labeled {gl}"),
            ));
        }
        if &fw.to != w || fw.label != h {
            return Err(mismatch(
                kind,
                site,
                format!("{w} needs a second incoming edge labeled {h}"),
            ));
        }
        let merged = Edge::new(u.clone(), w.clone(), add(gl, h)?);
        let graph = rebuild(g, &[i_in, i_out], Some(r), &[], vec![merged.clone()]);
        Ok(Applied {
            graph,
            inverse: Site::RevOp4 {
                edge: merged,
                fresh: Some(r.clone()),
            },
        })
    }
}

/// Reverse of operation 4: split an edge from an index-0 to an index-2 vertex.
pub struct EdgeSplit;

impl Rewrite for EdgeSplit {
    fn kind(&self) -> OpKind {
        OpKind::RevOp4
    }

    fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let kind = self.kind();
        let Site::RevOp4 { edge, fresh } = site else {
            return Err(wrong_site(kind, site));
        };
        let idx = locate(g, kind, edge)?;
        let (p, q) = (&edge.from, &edge.to);
        let fp = flank(g, kind, p, idx)?;
        let fq = flank(g, kind, q, idx)?;
        if &fp.from != p {
            return Err(mismatch(kind, edge, "source does not have index 0"));
        }
        if &fq.to != q {
            return Err(mismatch(kind, edge, "target does not have index 2"));
        }
        let (x1, x2) = (fp.label, fq.label);
        if add(x1, x2)? != edge.label {
            return Err(mismatch(
                kind,
                edge,
                format!("flanking labels {x1} + {x2} differ from {}", edge.label),
            ));
        }
        let r = match fresh {
            Some(r) => r.clone(),
            None => g.fresh_id(&format!("{p}'")),
        };
        if g.contains_vertex(&r) {
            return Err(OpError::FreshIdTaken(r));
        }
        let first = Edge::new(p.clone(), r.clone(), x2);
        let second = Edge::new(r.clone(), q.clone(), x1);
        let graph = rebuild(g, &[idx], None, &[&r], vec![first.clone(), second.clone()]);
        Ok(Applied {
            graph,
            inverse: Site::Op4 {
                incoming: first,
                outgoing: second,
            },
        })
    }
}

/// Rewrite strategies by kind.
pub struct Registry {
    rules: Vec<Box<dyn Rewrite>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { rules: Vec::new() }
    }

    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(VertexBlowUp));
        r.register(Box::new(Relabel::new(OpKind::Op2)));
        r.register(Box::new(Relabel::new(OpKind::Op3)));
        r.register(Box::new(EdgeMerge));
        r.register(Box::new(EdgeContraction));
        r.register(Box::new(Relabel::new(OpKind::RevOp2)));
        r.register(Box::new(Relabel::new(OpKind::RevOp3)));
        r.register(Box::new(EdgeSplit));
        r
    }

    /// Adds a strategy, replacing any earlier one of the same kind.
    pub fn register(&mut self, rule: Box<dyn Rewrite>) {
        self.rules.retain(|r| r.kind() != rule.kind());
        self.rules.push(rule);
    }

    pub fn get(&self, kind: OpKind) -> Option<&dyn Rewrite> {
        self.rules.iter().find(|r| r.kind() == kind).map(|r| r.as_ref())
    }

    pub fn by_name(&self, name: &str) -> Option<&dyn Rewrite> {
        self.rules.iter().find(|r| r.name() == name).map(|r| r.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Rewrite> {
        self.rules.iter().map(|r| r.as_ref())
    }

    pub fn apply(&self, g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
        let rule = self
            .get(site.kind())
            .ok_or_else(|| mismatch(site.kind(), site, "no strategy registered"))?;
        rule.apply(g, site)
    }
}

pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::standard)
}

pub fn apply(g: &Multigraph, site: &Site) -> Result<Applied, OpError> {
    registry().apply(g, site)
}

pub fn find_sites(g: &Multigraph, kind: OpKind) -> Vec<Site> {
    registry().get(kind).map(|r| r.find_sites(g)).unwrap_or_default()
}

pub fn apply_op1(g: &Multigraph, vertex: &VertexId) -> Result<Multigraph, OpError> {
    Ok(apply(g, &Site::op1(vertex.clone()))?.graph)
}

pub fn apply_op2(g: &Multigraph, target: &Edge) -> Result<Multigraph, OpError> {
    Ok(apply(g, &Site::Op2 { edge: target.clone() })?.graph)
}

pub fn apply_op3(g: &Multigraph, target: &Edge) -> Result<Multigraph, OpError> {
    Ok(apply(g, &Site::Op3 { edge: target.clone() })?.graph)
}

pub fn apply_op4(g: &Multigraph, incoming: &Edge, outgoing: &Edge) -> Result<Multigraph, OpError> {
    let site = Site::Op4 {
        incoming: incoming.clone(),
        outgoing: outgoing.clone(),
    };
    Ok(apply(g, &site)?.graph)
}

pub fn apply_reverse(g: &Multigraph, site: &Site) -> Result<Multigraph, OpError> {
    if !site.kind().is_reverse() {
        return Err(mismatch(site.kind(), site, "not a reverse operation"));
    }
    Ok(apply(g, site)?.graph)
}

/// A semi-free base and the forward steps that rebuild a graph from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationTrace {
    pub base: Multigraph,
    pub steps: Vec<Site>,
}

impl OperationTrace {
    pub fn new(base: Multigraph) -> Self {
        OperationTrace {
            base,
            steps: Vec::new(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        serde_json::from_str(s).map_err(|e| GraphError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Graphs after each step, starting with the base. Unnamed fresh
    /// vertices at step `n` get ids like `p7.s3`.
    pub fn intermediates(&self) -> Result<Vec<Multigraph>, OpError> {
        self.base.validate()?;
        if !self.base.is_semi_free() {
            return Err(OpError::BaseNotSemiFree);
        }
        let mut out = vec![self.base.clone()];
        for (i, step) in self.steps.iter().enumerate() {
            let n = i + 1;
            let g = out.last().expect("nonempty");
            let site = step.with_fresh_names(g, &format!(".s{n}"));
            let next = apply(g, &site)
                .and_then(|a| {
                    a.graph.validate()?;
                    Ok(a.graph)
                })
                .map_err(|e| OpError::AtStep {
                    step: n,
                    source: Box::new(e),
                })?;
            out.push(next);
        }
        Ok(out)
    }
}

pub fn replay(trace: &OperationTrace) -> Result<Multigraph, OpError> {
    Ok(trace.intermediates()?.pop().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpdata::FixedPointData;

    fn g(edges: &[(&str, &str, i64)]) -> Multigraph {
        Multigraph::from_edges(edges.iter().map(|&(a, b, l)| Edge::new(a, b, l)).collect())
    }

    fn square() -> Multigraph {
        g(&[("p1", "p2", 1), ("p2", "p3", 1), ("p4", "p3", 1), ("p1", "p4", 1)])
    }

    fn double_base() -> Multigraph {
        g(&[
            ("p1", "p2", 1),
            ("p2", "p3", 1),
            ("p4", "p3", 1),
            ("p5", "p4", 1),
            ("p5", "p6", 1),
            ("p6", "p7", 1),
            ("p8", "p7", 1),
            ("p1", "p8", 1),
        ])
    }

    fn triangle(a: i64, b: i64) -> Multigraph {
        g(&[("p1", "p2", a), ("p2", "p3", b), ("p1", "p3", a + b)])
    }

    fn labels(gr: &Multigraph) -> Vec<i64> {
        let mut l: Vec<i64> = gr.edges().iter().map(|e| e.label).collect();
        l.sort();
        l
    }

    #[test]
    fn op1_on_square() {
        let out = apply_op1(&square(), &"p2".into()).unwrap();
        assert_eq!(out.vertices().len(), 5);
        assert_eq!(labels(&out), vec![1, 1, 1, 1, 2]);
        assert!(out.contains_vertex(&"p2'".into()) && out.contains_vertex(&"p2''".into()));
        assert!(matches!(
            apply_op1(&square(), &"p1".into()),
            Err(OpError::PatternMismatch { .. })
        ));
    }

    #[test]
    fn op1_matches_blow_up_weights() {
        // at a vertex with weights {-a, b} the new points carry {-a, a+b} and {-a-b, b}
        for (a, b) in [(1, 1), (2, 3), (3, 1)] {
            let t = triangle(a, b);
            let out = apply_op1(&t, &"p2".into()).unwrap();
            let mut expected: Vec<Vec<i64>> = vec![vec![a, a + b], vec![-b, -a - b]];
            expected.push(vec![-a, a + b]);
            expected.push(vec![-a - b, b]);
            let want = FixedPointData::from_weights(expected).unwrap();
            assert_eq!(out.fixed_point_data().unwrap(), want);
        }
    }

    #[test]
    fn op2_examples() {
        // length-8 base, target p5 -> p4: flanks p4 -> p3 and p5 -> p6 both labeled 1
        let out = apply_op2(&double_base(), &Edge::new("p5", "p4", 1)).unwrap();
        assert!(out.edges().contains(&Edge::new("p5", "p4", 2)));
        let pat = g(&[("p", "x", 2), ("q", "p", 3), ("q", "y", 2), ("x", "y", 1)]);
        let out = apply_op2(&pat, &Edge::new("q", "p", 3)).unwrap();
        assert!(out.edges().contains(&Edge::new("q", "p", 5)));
        let bad = g(&[("p", "x", 1), ("q", "p", 3), ("q", "y", 2), ("x", "y", 1)]);
        assert!(matches!(
            apply_op2(&bad, &Edge::new("q", "p", 3)),
            Err(OpError::PatternMismatch { .. })
        ));
    }

    #[test]
    fn op3_examples() {
        let out = apply_op3(&double_base(), &Edge::new("p2", "p3", 1)).unwrap();
        assert!(out.edges().contains(&Edge::new("p2", "p3", 2)));
        let pat = g(&[("x", "p", 1), ("p", "q", 2), ("y", "q", 1), ("x", "y", 3)]);
        let out = apply_op3(&pat, &Edge::new("p", "q", 2)).unwrap();
        assert!(out.edges().contains(&Edge::new("p", "q", 3)));
        assert!(apply_op3(&square(), &Edge::new("p1", "p3", 1)).is_err());
    }

    #[test]
    fn op4_examples() {
        let out = apply_op4(&square(), &Edge::new("p1", "p2", 1), &Edge::new("p2", "p3", 1)).unwrap();
        assert!(out.is_isomorphic(&triangle(1, 1)));
        assert_eq!(
            out.fixed_point_data().unwrap(),
            triangle(1, 1).fixed_point_data().unwrap()
        );
        let bad = g(&[("u", "x", 2), ("u", "r", 1), ("r", "w", 1), ("y", "w", 1), ("x", "y", 1)]);
        assert!(apply_op4(&bad, &Edge::new("u", "r", 1), &Edge::new("r", "w", 1)).is_err());
    }

    #[test]
    fn reverse_examples() {
        let out = apply_reverse(&triangle(1, 1), &Site::RevOp4 {
            edge: Edge::new("p1", "p3", 2),
            fresh: None,
        })
        .unwrap();
        assert!(out.is_isomorphic(&square()));

        // after a blow-up, a = 1, b = 2
        let after = g(&[("u", "x", 1), ("x", "y", 3), ("y", "w", 2), ("u", "z", 2), ("z", "w", 1)]);
        let out = apply_reverse(&after, &Site::RevOp1 {
            edge: Edge::new("x", "y", 3),
            fresh: Some("v".into()),
        })
        .unwrap();
        assert_eq!(out.weights_at(&"v".into()), vec![-1, 2]);

        let relabeled = g(&[("p", "x", 1), ("q", "p", 2), ("q", "y", 1), ("x", "y", 1)]);
        let out = apply_reverse(&relabeled, &Site::RevOp2 {
            edge: Edge::new("q", "p", 2),
        })
        .unwrap();
        assert!(out.edges().contains(&Edge::new("q", "p", 1)));
        assert!(matches!(
            apply_reverse(&out, &Site::RevOp2 { edge: Edge::new("q", "p", 1) }),
            Err(OpError::NonPositiveLabel { .. })
        ));
    }

    #[test]
    fn find_sites_examples() {
        assert_eq!(find_sites(&square(), OpKind::Op4).len(), 2);
        assert_eq!(find_sites(&triangle(1, 1), OpKind::RevOp4).len(), 1);
        let op1 = find_sites(&double_base(), OpKind::Op1);
        assert_eq!(op1.len(), 4);
        assert_eq!(op1[0], Site::op1("p2"));
    }

    #[test]
    fn inverses_restore_exactly() {
        let graphs = [square(), double_base(), triangle(2, 3)];
        for gr in &graphs {
            for kind in OpKind::ALL {
                for site in find_sites(gr, kind) {
                    let a = apply(gr, &site).unwrap();
                    let back = apply(&a.graph, &a.inverse).unwrap();
                    assert_eq!(&back.graph, gr, "{site}");
                    assert_eq!(a.graph.todd(), gr.todd());
                }
            }
        }
    }

    #[test]
    fn replay_examples() {
        let trace = OperationTrace {
            base: square(),
            steps: vec![Site::Op4 {
                incoming: Edge::new("p1", "p2", 1),
                outgoing: Edge::new("p2", "p3", 1),
            }],
        };
        let out = replay(&trace).unwrap();
        assert!(out.is_isomorphic(&triangle(1, 1)));
        assert_eq!(replay(&OperationTrace::new(square())).unwrap(), square());

        let json = trace.to_json();
        assert_eq!(OperationTrace::from_json(&json).unwrap(), trace);

        let bad = OperationTrace {
            base: square(),
            steps: vec![Site::op1("p1")],
        };
        assert!(matches!(replay(&bad), Err(OpError::AtStep { step: 1, .. })));
        let not_base = OperationTrace::new(triangle(1, 1));
        assert_eq!(replay(&not_base), Err(OpError::BaseNotSemiFree));
    }

    #[test]
    fn replay_names_fresh_vertices_by_step() {
        let trace = OperationTrace {
            base: square(),
            steps: vec![Site::op1("p4"), Site::op1("p2")],
        };
        let out = replay(&trace).unwrap();
        for id in ["p4.s1", "p4.s1'", "p2.s2", "p2.s2'"] {
            assert!(out.contains_vertex(&id.into()), "{id}");
        }
    }

    #[test]
    fn registry_lookup() {
        let r = Registry::standard();
        assert_eq!(r.iter().count(), 8);
        assert_eq!(r.by_name("rev-op4").unwrap().kind(), OpKind::RevOp4);
        assert!(r.by_name("op5").is_none());
    }

    #[test]
    fn overlapping_sites_are_flagged() {
        // both flanks of q -> p end at x
        let t = g(&[("q", "p", 1), ("p", "x", 1), ("q", "x", 1)]);
        let site = Site::Op2 { edge: Edge::new("q", "p", 1) };
        assert!(site.is_self_overlapping(&t));
        let out = apply(&t, &site).unwrap().graph;
        assert!(out.edges().contains(&Edge::new("q", "p", 2)));
        assert!(!Site::Op2 { edge: Edge::new("p5", "p4", 1) }.is_self_overlapping(&double_base()));
    }
}
