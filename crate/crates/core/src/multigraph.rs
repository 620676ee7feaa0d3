//! Two-regular labeled directed multigraphs.
//!
//! A vertex is a fixed point, and a `w`-labeled edge `p -> q` contributes
//! weight `+w` at `p` and `-w` at `q`. The index of a vertex is its
//! in-degree. Parallel edges are allowed, self-loops are rejected by
//! [`Multigraph::validate`].
//!
//! Vertices and edges are stored in canonical sorted order, so two graphs
//! with the same ids and edge multiset compare equal and serialize to the
//! same bytes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpdata::{FixedPointData, WeightMultiset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} is not incident to exactly two edges")]
    NotTwoRegular(VertexId),
    #[error("edge {0} is a self-loop")]
    SelfLoop(Edge),
    #[error("edge {0} has a nonpositive label")]
    BadLabel(Edge),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is listed twice")]
    DuplicateVertex(VertexId),
    #[error("graph is not connected")]
    NotConnected,
    #[error("malformed graph file: {0}")]
    Format(String),
}

/// Vertex identifier. Ordered naturally, so `p2 < p10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn chunks(s: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..=bytes.len() {
        if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
            out.push((bytes[start].is_ascii_digit(), &s[start..i]));
            start = i;
        }
    }
    out
}

impl Ord for VertexId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (chunks(&self.0), chunks(&other.0));
        for ((da, sa), (db, sb)) in a.iter().zip(&b) {
            let ord = match (da, db) {
                (true, true) => {
                    let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
                    ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
                }
                _ => sa.cmp(sb),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        a.len().cmp(&b.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for VertexId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub label: i64,
}

impl Edge {
    pub fn new(from: impl Into<VertexId>, to: impl Into<VertexId>, label: i64) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            label,
        }
    }

    pub fn other_end(&self, v: &VertexId) -> &VertexId {
        if &self.from == v {
            &self.to
        } else {
            &self.from
        }
    }

    /// Weight this edge contributes at `v`.
    pub fn weight_at(&self, v: &VertexId) -> i64 {
        if &self.from == v {
            self.label
        } else {
            -self.label
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {}, {})", self.from, self.to, self.label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Multigraph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

impl Serialize for Multigraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphFile {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multigraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = GraphFile::deserialize(d)?;
        Multigraph::new(f.vertices, f.edges).map_err(serde::de::Error::custom)
    }
}

/// A connected component read as a closed chain.
///
/// `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleOrder {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

impl CycleOrder {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn position(&self, v: &VertexId) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    /// Edge `i` points forward along the traversal.
    pub fn is_forward(&self, i: usize) -> bool {
        self.edges[i].from == self.vertices[i]
    }
}

/// Predicate outcomes for the realizability conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredicateTable {
    pub two_regular: bool,
    pub loop_free: bool,
    pub effective: bool,
    pub symmetric: bool,
    pub minimal: bool,
    pub equal_modulo: bool,
}

impl PredicateTable {
    pub fn all(&self) -> bool {
        self.two_regular
            && self.loop_free
            && self.effective
            && self.symmetric
            && self.minimal
            && self.equal_modulo
    }

    /// Name of the first failing condition.
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.two_regular, "two-regular"),
            (self.loop_free, "loop-free"),
            (self.effective, "effectiveness"),
            (self.symmetric, "symmetry"),
            (self.minimal, "minimal"),
            (self.equal_modulo, "equal-modulo"),
        ]
        .iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| *name)
    }
}

impl Multigraph {
    /// Builds a graph, checking only that ids are unique and that every edge
    /// endpoint is a listed vertex.
    pub fn new(vertices: Vec<VertexId>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !seen.contains(end) {
                    return Err(GraphError::UnknownVertex(end.clone()));
                }
            }
        }
        Ok(Self::from_parts(seen.into_iter().collect(), edges))
    }

    /// Builds a graph whose vertex set is exactly the edge endpoints.
    pub fn from_edges(edges: Vec<Edge>) -> Self {
        let vertices: BTreeSet<VertexId> = edges
            .iter()
            .flat_map(|e| [e.from.clone(), e.to.clone()])
            .collect();
        Self::from_parts(vertices.into_iter().collect(), edges)
    }

    pub(crate) fn from_parts(mut vertices: Vec<VertexId>, mut edges: Vec<Edge>) -> Self {
        vertices.sort();
        edges.sort();
        Multigraph { vertices, edges }
    }

    pub fn empty() -> Self {
        Multigraph::default()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        self.vertices.binary_search(v).is_ok()
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        serde_json::from_str(s).map_err(|e| GraphError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Indices into `edges()` of the edges touching `v`, one entry per
    /// incidence.
    pub fn incident(&self, v: &VertexId) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        for (i, e) in self.edges.iter().enumerate() {
            if &e.from == v {
                out.push(i);
            }
            if &e.to == v {
                out.push(i);
            }
        }
        out
    }

    /// The incidence at `v` other than edge `edge`.
    pub fn other_edge(&self, v: &VertexId, edge: usize) -> Option<usize> {
        let inc = self.incident(v);
        if inc.len() != 2 {
            return None;
        }
        match (inc[0] == edge, inc[1] == edge) {
            (true, false) => Some(inc[1]),
            (false, true) => Some(inc[0]),
            _ => None,
        }
    }

    pub fn find_edge(&self, e: &Edge) -> Option<usize> {
        self.edges.binary_search(e).ok()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for e in &self.edges {
            if e.label < 1 {
                return Err(GraphError::BadLabel(e.clone()));
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop(e.clone()));
            }
        }
        let mut degree: BTreeMap<&VertexId, usize> =
            self.vertices.iter().map(|v| (v, 0)).collect();
        for e in &self.edges {
            *degree.get_mut(&e.from).expect("endpoint listed") += 1;
            *degree.get_mut(&e.to).expect("endpoint listed") += 1;
        }
        if let Some((v, _)) = degree.iter().find(|(_, d)| **d != 2) {
            return Err(GraphError::NotTwoRegular((*v).clone()));
        }
        Ok(())
    }

    pub fn vertex_index(&self, v: &VertexId) -> Result<usize, GraphError> {
        if !self.contains_vertex(v) {
            return Err(GraphError::UnknownVertex(v.clone()));
        }
        Ok(self.edges.iter().filter(|e| &e.to == v).count())
    }

    fn index_map(&self) -> BTreeMap<&VertexId, usize> {
        let mut m: BTreeMap<&VertexId, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for e in &self.edges {
            *m.get_mut(&e.to).expect("endpoint listed") += 1;
        }
        m
    }

    /// Weights at `v`, sorted.
    pub fn weights_at(&self, v: &VertexId) -> Vec<i64> {
        let mut w: Vec<i64> = self
            .incident(v)
            .into_iter()
            .map(|i| self.edges[i].weight_at(v))
            .collect();
        w.sort_unstable();
        w
    }

    pub fn fixed_point_data(&self) -> Result<FixedPointData, GraphError> {
        self.validate()?;
        let points = self
            .vertices
            .iter()
            .map(|v| WeightMultiset::new(self.weights_at(v)).expect("labels are positive"))
            .collect();
        Ok(FixedPointData::new(2, points).expect("two weights per vertex"))
    }

    /// N_0, N_1, N_2 read off the in-degrees.
    pub fn index_counts(&self) -> [u64; 3] {
        let mut c = [0u64; 3];
        for (_, i) in self.index_map() {
            c[i.min(2)] += 1;
        }
        c
    }

    pub fn todd(&self) -> u64 {
        self.index_counts()[0]
    }

    pub fn is_semi_free(&self) -> bool {
        let idx = self.index_map();
        self.edges
            .iter()
            .all(|e| e.label == 1 && idx[&e.from] + 1 == idx[&e.to])
    }

    pub fn is_effective(&self) -> bool {
        self.vertices.iter().all(|v| {
            self.incident(v)
                .iter()
                .fold(0i64, |g, &i| g.gcd(&self.edges[i].label))
                == 1
        })
    }

    pub fn is_symmetric(&self) -> bool {
        let c = self.index_counts();
        c[0] == c[2]
    }

    pub fn has_minimal_property(&self) -> bool {
        let idx = self.index_map();
        self.edges
            .iter()
            .filter(|e| e.label == 1)
            .all(|e| idx[&e.from] + 1 == idx[&e.to])
    }

    pub fn has_equal_modulo_property(&self) -> bool {
        self.edges.iter().all(|e| {
            let w = e.label;
            let residues = |v: &VertexId| {
                let mut r: Vec<i64> = self.weights_at(v).iter().map(|x| x.rem_euclid(w)).collect();
                r.sort_unstable();
                r
            };
            w == 1 || residues(&e.from) == residues(&e.to)
        })
    }

    pub fn predicate_table(&self) -> PredicateTable {
        let loop_free = self.edges.iter().all(|e| e.from != e.to);
        let labels_ok = self.edges.iter().all(|e| e.label >= 1);
        let two_regular = loop_free
            && labels_ok
            && !matches!(self.validate(), Err(GraphError::NotTwoRegular(_)));
        let valid = two_regular && loop_free && labels_ok;
        PredicateTable {
            two_regular,
            loop_free,
            effective: valid && self.is_effective(),
            symmetric: valid && self.is_symmetric(),
            minimal: valid && self.has_minimal_property(),
            equal_modulo: valid && self.has_equal_modulo_property(),
        }
    }

    pub fn is_realizable_candidate(&self) -> bool {
        self.validate().is_ok()
            && self.is_effective()
            && self.is_symmetric()
            && self.has_minimal_property()
            && self.has_equal_modulo_property()
    }

    /// Components by undirected connectivity, ordered by smallest vertex.
    pub fn connected_components(&self) -> Vec<Multigraph> {
        let pos: BTreeMap<&VertexId, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, pos[&e.from]), find(&mut parent, pos[&e.to]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, (Vec<VertexId>, Vec<Edge>)> = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().0.push(v.clone());
        }
        for e in &self.edges {
            let r = find(&mut parent, pos[&e.from]);
            groups.get_mut(&r).expect("root exists").1.push(e.clone());
        }
        groups
            .into_values()
            .map(|(v, e)| Multigraph::from_parts(v, e))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// The closed chain of a connected graph, starting at the smallest id
    /// and heading first toward its smaller neighbor.
    pub fn cycle_order(&self) -> Result<CycleOrder, GraphError> {
        self.validate()?;
        let Some(start) = self.vertices.first() else {
            return Ok(CycleOrder {
                vertices: vec![],
                edges: vec![],
            });
        };
        let inc = self.incident(start);
        let first = inc
            .iter()
            .copied()
            .min_by(|&a, &b| {
                self.edges[a]
                    .other_end(start)
                    .cmp(self.edges[b].other_end(start))
                    .then(a.cmp(&b))
            })
            .expect("two incidences");
        let mut vertices = vec![start.clone()];
        let mut edges = Vec::new();
        let mut current = start.clone();
        let mut via = first;
        loop {
            let e = &self.edges[via];
            edges.push(e.clone());
            let next = e.other_end(&current).clone();
            if &next == start {
                break;
            }
            vertices.push(next.clone());
            via = self.other_edge(&next, via).expect("two-regular");
            current = next;
        }
        if vertices.len() != self.vertices.len() {
            return Err(GraphError::NotConnected);
        }
        Ok(CycleOrder { vertices, edges })
    }

    /// Union with `other`; colliding ids in `other` get a `~N` suffix.
    pub fn disjoint_union(&self, other: &Multigraph) -> Multigraph {
        let mut taken: BTreeSet<VertexId> = self.vertices.iter().cloned().collect();
        let mut rename = BTreeMap::new();
        for v in &other.vertices {
            let mut id = v.clone();
            let mut k = 2;
            while taken.contains(&id) || other.contains_vertex(&id) && &id != v {
                id = VertexId(format!("{}~{}", v, k));
                k += 1;
            }
            taken.insert(id.clone());
            rename.insert(v.clone(), id);
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().map(|v| rename[v].clone()));
        let mut edges = self.edges.clone();
        edges.extend(
            other
                .edges
                .iter()
                .map(|e| Edge::new(rename[&e.from].clone(), rename[&e.to].clone(), e.label)),
        );
        Multigraph::from_parts(vertices, edges)
    }

    /// An id not present in the graph, derived from `base` by priming.
    pub fn fresh_id(&self, base: &str) -> VertexId {
        let mut id = VertexId(base.to_string());
        while self.contains_vertex(&id) {
            id.0.push('\'');
        }
        id
    }

    /// Graphviz rendering: edges carry labels, vertices their index.
    pub fn to_dot(&self) -> String {
        let idx = self.index_map();
        let mut out = String::from("digraph G {\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{}\" [label=\"{} ({})\"];\n", v, v, idx[v]));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                e.from, e.to, e.label
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Rotation and reflection invariant description of each component, sorted.
    ///
    /// Two graphs are isomorphic exactly when these agree.
    pub fn shape(&self) -> Result<Vec<Vec<(bool, i64)>>, GraphError> {
        let mut out = Vec::new();
        for c in self.connected_components() {
            let order = c.cycle_order()?;
            let tokens: Vec<(bool, i64)> = (0..order.len())
                .map(|i| (order.is_forward(i), order.edges[i].label))
                .collect();
            out.push(cyclic_canonical(&tokens));
        }
        out.sort();
        Ok(out)
    }

    pub fn is_isomorphic(&self, other: &Multigraph) -> bool {
        match (self.shape(), other.shape()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

/// Smallest rotation of the token cycle read in either direction.
/// Reading backwards flips every edge direction.
pub fn cyclic_canonical(tokens: &[(bool, i64)]) -> Vec<(bool, i64)> {
    let k = tokens.len();
    let reversed: Vec<(bool, i64)> = tokens.iter().rev().map(|&(f, l)| (!f, l)).collect();
    let mut best: Option<Vec<(bool, i64)>> = None;
    for seq in [tokens, &reversed[..]] {
        for r in 0..k {
            let cand: Vec<(bool, i64)> = (0..k).map(|i| seq[(r + i) % k]).collect();
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}
