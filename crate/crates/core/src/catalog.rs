//! Named example graphs: projective plane, Hirzebruch surfaces, semi-free
//! bases, the minimal-count family and the odd chain.
//!
//! Every generator is registered behind the [`Generator`] trait so the CLI
//! can look one up by name and feed it a parameter map.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::fpdata::InvariantReport;
use crate::multigraph::{Edge, Multigraph, VertexId};
use crate::operations::{apply_op1, apply_op2, apply_op3, apply_op4, OpError};
use crate::plumbing::{base_sequence, derived_graph, IntVector2, PlumbingError, PlumbingSequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("{0} and {1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("weight c - n*d vanishes")]
    DegenerateWeight,
    #[error("parameter {name} = {value} is out of range: {reason}")]
    BadParameter {
        name: String,
        value: i64,
        reason: &'static str,
    },
    #[error("missing parameter {0}")]
    MissingParameter(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Plumbing(#[from] PlumbingError),
}

fn bad(name: &str, value: i64, reason: &'static str) -> CatalogError {
    CatalogError::BadParameter {
        name: name.to_string(),
        value,
        reason,
    }
}

fn positive(name: &str, value: i64) -> Result<(), CatalogError> {
    if value < 1 {
        return Err(bad(name, value, "must be positive"));
    }
    Ok(())
}

fn coprime(a: i64, b: i64) -> Result<(), CatalogError> {
    if a.gcd(&b) != 1 {
        return Err(CatalogError::NotCoprime(a, b));
    }
    Ok(())
}

fn sum(a: i64, b: i64) -> Result<i64, CatalogError> {
    a.checked_add(b).ok_or(CatalogError::Op(OpError::Overflow))
}

fn graph(edges: &[(&str, &str, i64)]) -> Multigraph {
    Multigraph::from_edges(edges.iter().map(|&(a, b, l)| Edge::new(a, b, l)).collect())
}

fn p(i: usize) -> VertexId {
    VertexId::new(format!("p{i}"))
}

/// Triangle with weights {a+b, a}, {-a, b}, {-b, -a-b}.
pub fn cp2(a: i64, b: i64) -> Result<Multigraph, CatalogError> {
    positive("a", a)?;
    positive("b", b)?;
    coprime(a, b)?;
    let ab = sum(a, b)?;
    Ok(graph(&[("p1", "p2", a), ("p2", "p3", b), ("p1", "p3", ab)]))
}

/// Weights {-c, d}, {nd - c, -d}, {c, d}, {c - nd, -d}.
pub fn hirzebruch(n: i64, c: i64, d: i64) -> Result<Multigraph, CatalogError> {
    positive("c", c)?;
    positive("d", d)?;
    coprime(c, d)?;
    let nd = n.checked_mul(d).ok_or(CatalogError::Op(OpError::Overflow))?;
    let e = c.checked_sub(nd).ok_or(CatalogError::Op(OpError::Overflow))?;
    if e == 0 {
        return Err(CatalogError::DegenerateWeight);
    }
    if e > 0 || d == 1 {
        Ok(graph(&[
            ("p1", "p2", d),
            ("p1", "p3", c),
            ("p2", "p4", e.abs()),
            ("p3", "p4", d),
        ]))
    } else {
        Ok(graph(&[
            ("p1", "p3", c),
            ("p1", "p2", d),
            ("p3", "p4", d),
            ("p4", "p2", -e),
        ]))
    }
}

/// The 4k-cycle described by `base_sequence(k)`.
pub fn semifree_base_graph(k: usize) -> Multigraph {
    derived_graph(&base_sequence(k))
}

/// Square with labels f, g, g, h.
pub fn labeled_square(f: i64, g: i64, h: i64) -> Result<Multigraph, CatalogError> {
    for (name, v) in [("f", f), ("g", g), ("h", h)] {
        positive(name, v)?;
    }
    coprime(f, g)?;
    coprime(g, h)?;
    coprime(f, h)?;
    Ok(graph(&[("p1", "p2", f), ("p1", "p3", g), ("p2", "p4", g), ("p3", "p4", h)]))
}

/// Replaces an index-1 vertex with weights {-a, b} by an (a+b)-edge.
pub fn blow_up(g: &Multigraph, v: &VertexId) -> Result<Multigraph, CatalogError> {
    Ok(apply_op1(g, v)?)
}

/// A connected graph with index counts (n0, n1, n0).
pub fn min_fixed_points(n0: usize, n1: usize) -> Result<Multigraph, CatalogError> {
    if n0 == 0 {
        return Err(bad("n0", 0, "must be positive"));
    }
    if n1 == 0 {
        return Err(bad("n1", 0, "must be positive"));
    }
    let mut g = semifree_base_graph(n0);
    if n1 >= 2 * n0 {
        for _ in 0..n1 - 2 * n0 {
            let v = g
                .vertices()
                .iter()
                .find(|v| g.vertex_index(v) == Ok(1))
                .cloned()
                .expect("an index-1 vertex");
            g = apply_op1(&g, &v)?;
        }
        return Ok(g);
    }
    let wrap = |i: usize| p((i - 1) % (4 * n0) + 1);
    let label_of = |g: &Multigraph, a: &VertexId, b: &VertexId| {
        g.edges()
            .iter()
            .find(|e| &e.from == a && &e.to == b)
            .map(|e| e.label)
            .expect("edge present in the construction")
    };
    for j in 0..n0 {
        let (a, b) = (wrap(4 * j + 2), wrap(4 * j + 3));
        let times = if j == 0 { 1 } else { 2 * j };
        for _ in 0..times {
            let e = Edge::new(a.clone(), b.clone(), label_of(&g, &a, &b));
            g = apply_op3(&g, &e)?;
        }
        let (a, b) = (wrap(4 * j + 5), wrap(4 * j + 4));
        for _ in 0..2 * j + 1 {
            let e = Edge::new(a.clone(), b.clone(), label_of(&g, &a, &b));
            g = apply_op2(&g, &e)?;
        }
    }
    for m in 1..=2 * n0 - n1 {
        let r = p(2 * m + 2);
        let (mut incoming, mut outgoing) = (None, None);
        for e in g.edges() {
            if e.to == r {
                incoming = Some(e.clone());
            }
            if e.from == r {
                outgoing = Some(e.clone());
            }
        }
        let (i, o) = incoming.zip(outgoing).expect("merge vertex has index 1");
        g = apply_op4(&g, &i, &o)?;
    }
    Ok(g)
}

/// Odd-length chain v_1 = (1,0), v_i = (-1)^i (i, 1), with each a_i solved
/// from the recurrence.
pub fn odd_chain(k: usize) -> Result<PlumbingSequence, CatalogError> {
    if k < 3 || k % 2 == 0 {
        return Err(bad("k", k as i64, "must be odd and at least 3"));
    }
    let vs: Vec<IntVector2> = (1..=k as i64)
        .map(|i| match i {
            1 => IntVector2::new(1, 0),
            _ if i % 2 == 0 => IntVector2::new(i, 1),
            _ => IntVector2::new(-i, -1),
        })
        .collect();
    Ok(PlumbingSequence::from_vectors(&vs)?)
}

/// Invariants a 4-dimensional example with index counts (n0, n1, n0) must have.
pub fn expected_report(n0: u64, n1: u64) -> InvariantReport {
    let (a, b) = (n0 as i64, n1 as i64);
    InvariantReport {
        index_counts: vec![n0, n1, n0],
        todd: n0,
        chi: vec![a, -b, a],
        euler: 2 * n0 + n1,
        signature: 2 * a - b,
        c1_squared: Some(10 * a - b),
        c2: Some(2 * a + b),
    }
}

pub type Params = BTreeMap<String, i64>;

pub trait Generator: Send + Sync {
    fn name(&self) -> &'static str;
    /// Parameter names in the order the generator reads them.
    fn params(&self) -> &'static [&'static str];
    fn summary(&self) -> &'static str;
    fn build(&self, params: &Params) -> Result<Multigraph, CatalogError>;
    /// Index counts (n0, n1) the result is known to have.
    fn expected_counts(&self, params: &Params) -> Result<(u64, u64), CatalogError>;
}

fn get(params: &Params, name: &str) -> Result<i64, CatalogError> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| CatalogError::MissingParameter(name.to_string()))
}

fn get_usize(params: &Params, name: &str) -> Result<usize, CatalogError> {
    let v = get(params, name)?;
    usize::try_from(v).map_err(|_| bad(name, v, "must be non-negative"))
}

struct Cp2;
struct Hirzebruch;
struct SemifreeBase;
struct LabeledSquare;
struct MinFixedPoints;
struct OddChain;

impl Generator for Cp2 {
    fn name(&self) -> &'static str {
        "cp2"
    }
    fn params(&self) -> &'static [&'static str] {
        &["a", "b"]
    }
    fn summary(&self) -> &'static str {
        "projective plane with weights (a, a+b)"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        cp2(get(ps, "a")?, get(ps, "b")?)
    }
    fn expected_counts(&self, _: &Params) -> Result<(u64, u64), CatalogError> {
        Ok((1, 1))
    }
}

impl Generator for Hirzebruch {
    fn name(&self) -> &'static str {
        "hirzebruch"
    }
    fn params(&self) -> &'static [&'static str] {
        &["n", "c", "d"]
    }
    fn summary(&self) -> &'static str {
        "Hirzebruch surface H_n with weights c, d"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        hirzebruch(get(ps, "n")?, get(ps, "c")?, get(ps, "d")?)
    }
    fn expected_counts(&self, _: &Params) -> Result<(u64, u64), CatalogError> {
        Ok((1, 2))
    }
}

impl Generator for SemifreeBase {
    fn name(&self) -> &'static str {
        "semifree-base"
    }
    fn params(&self) -> &'static [&'static str] {
        &["k"]
    }
    fn summary(&self) -> &'static str {
        "semi-free 4k-cycle with Todd genus k"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        let k = get_usize(ps, "k")?;
        if k == 0 {
            return Err(bad("k", 0, "must be positive"));
        }
        Ok(semifree_base_graph(k))
    }
    fn expected_counts(&self, ps: &Params) -> Result<(u64, u64), CatalogError> {
        let k = get_usize(ps, "k")? as u64;
        Ok((k, 2 * k))
    }
}

impl Generator for LabeledSquare {
    fn name(&self) -> &'static str {
        "square"
    }
    fn params(&self) -> &'static [&'static str] {
        &["f", "g", "h"]
    }
    fn summary(&self) -> &'static str {
        "square with labels f, g, g, h"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        labeled_square(get(ps, "f")?, get(ps, "g")?, get(ps, "h")?)
    }
    fn expected_counts(&self, _: &Params) -> Result<(u64, u64), CatalogError> {
        Ok((1, 2))
    }
}

impl Generator for MinFixedPoints {
    fn name(&self) -> &'static str {
        "min-fixed-points"
    }
    fn params(&self) -> &'static [&'static str] {
        &["n0", "n1"]
    }
    fn summary(&self) -> &'static str {
        "connected graph with index counts (n0, n1, n0)"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        min_fixed_points(get_usize(ps, "n0")?, get_usize(ps, "n1")?)
    }
    fn expected_counts(&self, ps: &Params) -> Result<(u64, u64), CatalogError> {
        Ok((get_usize(ps, "n0")? as u64, get_usize(ps, "n1")? as u64))
    }
}

impl Generator for OddChain {
    fn name(&self) -> &'static str {
        "odd-chain"
    }
    fn params(&self) -> &'static [&'static str] {
        &["k"]
    }
    fn summary(&self) -> &'static str {
        "graph of the odd chain sequence of length k"
    }
    fn build(&self, ps: &Params) -> Result<Multigraph, CatalogError> {
        Ok(derived_graph(&odd_chain(get_usize(ps, "k")?)?))
    }
    fn expected_counts(&self, ps: &Params) -> Result<(u64, u64), CatalogError> {
        let k = get_usize(ps, "k")? as u64;
        Ok(((k - 1) / 2, 1))
    }
}

pub struct GeneratorRegistry {
    generators: Vec<Box<dyn Generator>>,
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        GeneratorRegistry { generators: Vec::new() }
    }

    pub fn standard() -> Self {
        let mut r = GeneratorRegistry::empty();
        r.register(Box::new(Cp2));
        r.register(Box::new(Hirzebruch));
        r.register(Box::new(SemifreeBase));
        r.register(Box::new(LabeledSquare));
        r.register(Box::new(MinFixedPoints));
        r.register(Box::new(OddChain));
        r
    }

    pub fn register(&mut self, g: Box<dyn Generator>) {
        self.generators.retain(|x| x.name() != g.name());
        self.generators.push(g);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Generator> {
        self.generators
            .iter()
            .find(|g| g.name() == name)
            .map(|g| g.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Generator> {
        self.generators.iter().map(|g| g.as_ref())
    }

    pub fn entry(&self, name: &str, params: Params) -> Result<CatalogEntry, CatalogError> {
        let g = self
            .get(name)
            .ok_or_else(|| CatalogError::UnknownGenerator(name.to_string()))?;
        let graph = g.build(&params)?;
        let (n0, n1) = g.expected_counts(&params)?;
        Ok(CatalogEntry {
            name: g.name().to_string(),
            params,
            graph,
            expected: expected_report(n0, n1),
        })
    }
}

pub fn generators() -> &'static GeneratorRegistry {
    static REG: OnceLock<GeneratorRegistry> = OnceLock::new();
    REG.get_or_init(GeneratorRegistry::standard)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub params: Params,
    pub graph: Multigraph,
    pub expected: InvariantReport,
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
