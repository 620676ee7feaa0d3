//! Plumbing sequences: cyclic lists of pairs `(v_i, a_i)` with `v_i` in Z^2.
//!
//! A sequence is accepted when, for every `i` (indices mod k):
//!
//! * `det(v_i, v_{i+1}) = 1`,
//! * `v_{i+1} = -a_i v_i - v_{i-1}`,
//! * the first component `v_{i,1}` is nonzero.
//!
//! Its derived graph is the cycle `p_1 .. p_k` with the edge between `p_i`
//! and `p_{i+1}` labeled `|v_{i,1}|` and pointing from `p_i` to `p_{i+1}`
//! when `v_{i,1} > 0`. The torus weights at `p_i` are `{v_i, -v_{i-1}}`.
//!
//! Each entry may carry the id of its vertex. Sequences produced by
//! [`replay_on_sequence`] and [`realize`] always do, so their derived graph
//! is equal to the graph they witness, ids included.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{Edge, GraphError, Multigraph, VertexId};
use crate::operations::{apply, OpError, Site};
use crate::reduction::{realizability_check, RejectReason, Realizability};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternCondition {
    /// Flanks pointing away from the middle edge.
    Outward,
    /// Flanks pointing into the middle edge.
    Inward,
}

impl fmt::Display for PatternCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternCondition::Outward => "outward",
            PatternCondition::Inward => "inward",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlumbingError {
    #[error("a plumbing sequence needs at least 3 entries, got {0}")]
    TooShort(usize),
    #[error("v_{0} and v_{0}+1 do not form a basis")]
    NotBasis(usize),
    #[error("v_{0} and v_{0}+1 are a negatively oriented basis")]
    Orientation(usize),
    #[error("recurrence fails at entry {0}")]
    RecurrenceFail(usize),
    #[error("entry {0} has zero first component")]
    ZeroFirstComponent(usize),
    #[error("first components of entries {0} and its predecessor are not coprime")]
    NotCoprime(usize),
    #[error("flanks of entry {0} have opposite first components but are not opposite vectors ({1})")]
    PatternVectorFail(usize, PatternCondition),
    #[error("site does not fit the sequence: {0}")]
    SiteMismatch(String),
    #[error("sequence does not satisfy the hypotheses: {0}")]
    PropertyAViolated(String),
    #[error("no integer a_{0} solves the recurrence")]
    NoIntegerSolution(usize),
    #[error("vertex id {0} appears twice")]
    DuplicateVertex(VertexId),
    #[error("integer overflow")]
    Overflow,
    #[error("graph rejected ({reason}): {detail}")]
    Rejected { reason: RejectReason, detail: String },
    #[error("derived graph does not match: {0}")]
    DerivedMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct IntVector2 {
    pub x: i64,
    pub y: i64,
}

impl IntVector2 {
    pub const fn new(x: i64, y: i64) -> Self {
        IntVector2 { x, y }
    }

    pub fn det(self, other: IntVector2) -> i128 {
        self.x as i128 * other.y as i128 - self.y as i128 * other.x as i128
    }

    pub fn checked_add(self, o: IntVector2) -> Option<IntVector2> {
        Some(IntVector2::new(self.x.checked_add(o.x)?, self.y.checked_add(o.y)?))
    }

    pub fn checked_neg(self) -> Option<IntVector2> {
        Some(IntVector2::new(self.x.checked_neg()?, self.y.checked_neg()?))
    }

    fn wide(self) -> (i128, i128) {
        (self.x as i128, self.y as i128)
    }
}

impl From<[i64; 2]> for IntVector2 {
    fn from(a: [i64; 2]) -> Self {
        IntVector2::new(a[0], a[1])
    }
}

impl From<IntVector2> for [i64; 2] {
    fn from(v: IntVector2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for IntVector2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlumbingEntry {
    pub v: IntVector2,
    pub a: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexId>,
}

impl PlumbingEntry {
    pub fn new(v: IntVector2, a: i64) -> Self {
        PlumbingEntry { v, a, vertex: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlumbingSequence {
    entries: Vec<PlumbingEntry>,
}

/// Torus weights at one vertex: `{v_i, -v_{i-1}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct T2Weights {
    pub vertex: VertexId,
    pub weights: [IntVector2; 2],
}

impl PlumbingSequence {
    pub fn new(entries: Vec<PlumbingEntry>) -> Self {
        PlumbingSequence { entries }
    }

    /// Builds a sequence from vectors alone, solving each `a_i` from the
    /// recurrence.
    pub fn from_vectors(vs: &[IntVector2]) -> Result<Self, PlumbingError> {
        let k = vs.len();
        if k < 3 {
            return Err(PlumbingError::TooShort(k));
        }
        let mut entries = Vec::with_capacity(k);
        for i in 0..k {
            let (prev, cur, next) = (vs[(i + k - 1) % k].wide(), vs[i].wide(), vs[(i + 1) % k].wide());
            // -a * cur = next + prev
            let rhs = (next.0 + prev.0, next.1 + prev.1);
            let a = if cur.0 != 0 && rhs.0 % cur.0 == 0 {
                -rhs.0 / cur.0
            } else if cur.1 != 0 && rhs.1 % cur.1 == 0 {
                -rhs.1 / cur.1
            } else {
                return Err(PlumbingError::NoIntegerSolution(i));
            };
            if (-a * cur.0, -a * cur.1) != rhs {
                return Err(PlumbingError::NoIntegerSolution(i));
            }
            let a = i64::try_from(a).map_err(|_| PlumbingError::Overflow)?;
            entries.push(PlumbingEntry::new(vs[i], a));
        }
        Ok(PlumbingSequence { entries })
    }

    pub fn entries(&self) -> &[PlumbingEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vectors(&self) -> Vec<IntVector2> {
        self.entries.iter().map(|e| e.v).collect()
    }

    pub fn coefficients(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.a).collect()
    }

    /// Vertex ids, `p{i+1}` where an entry carries none.
    pub fn ids(&self) -> Vec<VertexId> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.vertex
                    .clone()
                    .unwrap_or_else(|| VertexId::new(format!("p{}", i + 1)))
            })
            .collect()
    }

    /// Same sequence with every id written out.
    pub fn with_explicit_ids(&self) -> Self {
        let ids = self.ids();
        PlumbingSequence {
            entries: self
                .entries
                .iter()
                .zip(ids)
                .map(|(e, id)| PlumbingEntry {
                    vertex: Some(id),
                    ..e.clone()
                })
                .collect(),
        }
    }

    fn at(&self, i: isize) -> &PlumbingEntry {
        let k = self.entries.len() as isize;
        &self.entries[i.rem_euclid(k) as usize]
    }

    pub fn from_json(s: &str) -> Result<Self, PlumbingError> {
        serde_json::from_str(s).map_err(|e| GraphError::Format(e.to_string()).into())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }
}

/// The length-4k sequence (1,0), (1,1), (-1,0), (-1,-1), ... with all a_i = 0.
pub fn base_sequence(k: usize) -> PlumbingSequence {
    const BLOCK: [IntVector2; 4] = [
        IntVector2::new(1, 0),
        IntVector2::new(1, 1),
        IntVector2::new(-1, 0),
        IntVector2::new(-1, -1),
    ];
    PlumbingSequence::new(
        (0..4 * k)
            .map(|i| PlumbingEntry::new(BLOCK[i % 4], 0))
            .collect(),
    )
}

pub fn verify_conditions(s: &PlumbingSequence) -> Result<(), PlumbingError> {
    let k = s.len();
    if k < 3 {
        return Err(PlumbingError::TooShort(k));
    }
    let ids = s.ids();
    let mut seen = BTreeSet::new();
    for id in &ids {
        if !seen.insert(id) {
            return Err(PlumbingError::DuplicateVertex(id.clone()));
        }
    }
    if let Some(i) = s.entries.iter().position(|e| e.v.x == 0) {
        return Err(PlumbingError::ZeroFirstComponent(i));
    }
    for i in 0..k as isize {
        let (prev, cur, next) = (s.at(i - 1), s.at(i), s.at(i + 1));
        let a = cur.a as i128;
        let (c, p, n) = (cur.v.wide(), prev.v.wide(), next.v.wide());
        if (n.0, n.1) != (-a * c.0 - p.0, -a * c.1 - p.1) {
            return Err(PlumbingError::RecurrenceFail(i as usize));
        }
    }
    for i in 0..k as isize {
        match s.at(i).v.det(s.at(i + 1).v) {
            1 => {}
            -1 => return Err(PlumbingError::Orientation(i as usize)),
            _ => return Err(PlumbingError::NotBasis(i as usize)),
        }
    }
    Ok(())
}

/// Coprime neighboring first components, and opposite flank vectors wherever
/// the flank first components are opposite. The second part covers both
/// relabel patterns read in either direction around the cycle.
pub fn verify_property_a(s: &PlumbingSequence) -> Result<(), PlumbingError> {
    let k = s.len() as isize;
    for i in 0..k {
        let (a, b) = (s.at(i).v.x, s.at(i - 1).v.x);
        if a.unsigned_abs().gcd(&b.unsigned_abs()) != 1 {
            return Err(PlumbingError::NotCoprime(i as usize));
        }
    }
    for t in 0..k {
        let (before, after) = (s.at(t - 1).v.wide(), s.at(t + 1).v.wide());
        if after.0 == -before.0 && after.1 != -before.1 {
            let which = if before.0 < 0 {
                PatternCondition::Outward
            } else {
                PatternCondition::Inward
            };
            return Err(PlumbingError::PatternVectorFail(t as usize, which));
        }
    }
    Ok(())
}

pub fn derived_graph(s: &PlumbingSequence) -> Multigraph {
    let ids = s.ids();
    let k = s.len();
    let edges = (0..k)
        .map(|i| {
            let (p, q) = (ids[i].clone(), ids[(i + 1) % k].clone());
            let x = s.entries[i].v.x;
            if x > 0 {
                Edge::new(p, q, x)
            } else {
                Edge::new(q, p, -x)
            }
        })
        .collect();
    Multigraph::from_parts(ids, edges)
}

pub fn t2_weights(s: &PlumbingSequence) -> Vec<T2Weights> {
    let ids = s.ids();
    (0..s.len() as isize)
        .map(|i| T2Weights {
            vertex: ids[i as usize].clone(),
            weights: [
                s.at(i).v,
                s.at(i - 1).v.checked_neg().expect("negation of a sequence entry"),
            ],
        })
        .collect()
}

fn site_error(e: OpError) -> PlumbingError {
    PlumbingError::SiteMismatch(e.to_string())
}

fn add_a(a: i64, d: i64) -> Result<i64, PlumbingError> {
    a.checked_add(d).ok_or(PlumbingError::Overflow)
}

fn vsum(a: IntVector2, b: IntVector2) -> Result<IntVector2, PlumbingError> {
    a.checked_add(b).ok_or(PlumbingError::Overflow)
}

/// Applies a forward operation to a sequence.
///
/// The site is read on the derived graph. The update is done in place at the
/// site's position, in whichever direction the cycle runs there, and the
/// result carries explicit vertex ids matching the rewritten graph.
pub fn replay_on_sequence(s: &PlumbingSequence, site: &Site) -> Result<PlumbingSequence, PlumbingError> {
    if site.kind().is_reverse() {
        return Err(PlumbingError::SiteMismatch(format!(
            "{} is not a forward operation",
            site.kind()
        )));
    }
    verify_conditions(s)?;
    verify_property_a(s).map_err(|e| PlumbingError::PropertyAViolated(e.to_string()))?;
    let s = s.with_explicit_ids();
    let g = derived_graph(&s);
    let applied = apply(&g, site).map_err(site_error)?;
    let ids = s.ids();
    let k = s.len();
    let pos = |v: &VertexId| ids.iter().position(|x| x == v).expect("vertex of derived graph");
    let mut e = s.entries.clone();

    match (site, &applied.inverse) {
        (Site::Op1 { vertex, .. }, Site::RevOp1 { edge: new_edge, .. }) => {
            let i = pos(vertex);
            let prev = (i + k - 1) % k;
            let (vp, vi) = (e[prev].v, e[i].v);
            let (first, second) = (new_edge.from.clone(), new_edge.to.clone());
            let (at_i, at_next) = if vp.x > 0 { (first, second) } else { (second, first) };
            e[prev].a = add_a(e[prev].a, -1)?;
            let old_a = e[i].a;
            e[i] = PlumbingEntry {
                v: vi,
                a: add_a(old_a, -1)?,
                vertex: Some(at_next),
            };
            e.insert(
                i,
                PlumbingEntry {
                    v: vsum(vp, vi)?,
                    a: -1,
                    vertex: Some(at_i),
                },
            );
        }
        (Site::Op2 { edge } | Site::Op3 { edge }, _) => {
            let (i, j) = (pos(&edge.from), pos(&edge.to));
            let t = if (i + 1) % k == j && e[i].v.x > 0 {
                i
            } else if (j + 1) % k == i && e[j].v.x < 0 {
                j
            } else {
                return Err(PlumbingError::SiteMismatch(format!("edge {edge} is not on the sequence")));
            };
            let (prev, next) = ((t + k - 1) % k, (t + 1) % k);
            let (vb, va) = (e[prev].v, e[next].v);
            if va.checked_neg() != Some(vb) {
                return Err(PlumbingError::PropertyAViolated(format!(
                    "flanks {vb} and {va} of entry {t} are not opposite"
                )));
            }
            let s_sign: i64 = if (vb.x > 0) == (e[t].v.x > 0) { 1 } else { -1 };
            let shift = if s_sign > 0 {
                vb
            } else {
                vb.checked_neg().ok_or(PlumbingError::Overflow)?
            };
            e[t].v = vsum(e[t].v, shift)?;
            e[prev].a = add_a(e[prev].a, -s_sign)?;
            e[t].a = 0;
            e[next].a = add_a(e[next].a, s_sign)?;
        }
        (Site::Op4 { incoming, .. }, _) => {
            if k < 4 {
                return Err(PlumbingError::SiteMismatch(
                    "merging would leave fewer than 3 entries".into(),
                ));
            }
            let m = pos(&incoming.to);
            let (m1, m2, p1) = ((m + k - 1) % k, (m + k - 2) % k, (m + 1) % k);
            if e[m].v.checked_neg() != Some(e[m2].v) || e[p1].v.checked_neg() != Some(e[m1].v) {
                return Err(PlumbingError::PropertyAViolated(format!(
                    "entries around {} are not pairwise opposite",
                    incoming.to
                )));
            }
            e[m1].v = vsum(e[m1].v, e[m].v)?;
            e[m2].a = add_a(e[m2].a, 1)?;
            e[m1].a = 1;
            e[p1].a = add_a(e[p1].a, 1)?;
            e.remove(m);
        }
        _ => unreachable!("forward sites invert to their reverse kinds"),
    }

    let out = PlumbingSequence { entries: e };
    let derived = derived_graph(&out);
    if derived != applied.graph {
        return Err(PlumbingError::DerivedMismatch(format!(
            "after {site}: sequence gives {:?}, graph rewrite gives {:?}",
            derived.edges(),
            applied.graph.edges()
        )));
    }
    Ok(out)
}

/// The base sequence laid along a connected semi-free graph, starting at its
/// first index-0 vertex in cycle order.
pub fn base_sequence_for(base: &Multigraph) -> Result<PlumbingSequence, PlumbingError> {
    let order = base.cycle_order()?;
    let k = order.len();
    let start = (0..k)
        .find(|&i| base.vertex_index(&order.vertices[i]) == Ok(0))
        .ok_or_else(|| PlumbingError::DerivedMismatch("base has no index-0 vertex".into()))?;
    let template = base_sequence(k / 4);
    if k % 4 != 0 || !base.is_semi_free() {
        return Err(PlumbingError::DerivedMismatch("base is not semi-free".into()));
    }
    let entries = template
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| PlumbingEntry {
            vertex: Some(order.vertices[(start + i) % k].clone()),
            ..e.clone()
        })
        .collect();
    let s = PlumbingSequence { entries };
    if derived_graph(&s) != *base {
        return Err(PlumbingError::DerivedMismatch("base sequence does not match base".into()));
    }
    Ok(s)
}

/// One verified sequence per component of a realizable graph.
pub fn realize(g: &Multigraph) -> Result<Vec<PlumbingSequence>, PlumbingError> {
    let result = match realizability_check(g) {
        Realizability::Accepted(r) => r,
        Realizability::Rejected(r) => {
            return Err(PlumbingError::Rejected {
                reason: r.reason,
                detail: r.detail,
            })
        }
    };
    let mut out = Vec::with_capacity(result.components.len());
    for comp in &result.components {
        let mut s = base_sequence_for(&comp.base)?;
        for step in &comp.trace.steps {
            s = replay_on_sequence(&s, step)?;
        }
        verify_conditions(&s)?;
        verify_property_a(&s)?;
        if derived_graph(&s) != comp.input {
            return Err(PlumbingError::DerivedMismatch(
                "realized sequence does not describe the component".into(),
            ));
        }
        out.push(s);
    }
    Ok(out)
}
