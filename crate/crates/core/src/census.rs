//! Exhaustive enumeration of small connected cycles.
//!
//! Every labeled directed cycle with at most `max_vertices` vertices and
//! labels at most `max_label` is listed once up to isomorphism. Candidates
//! (graphs passing every predicate) are pushed through reduction and
//! realization and the outcomes are tallied.

use std::thread;

use serde::Serialize;

use crate::multigraph::{cyclic_canonical, Edge, Multigraph, VertexId};
use crate::plumbing::{realize, PlumbingError};
use crate::reduction::RejectReason;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FIXGRAPH_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CensusBounds {
    pub max_vertices: usize,
    pub max_label: i64,
}

impl Default for CensusBounds {
    fn default() -> Self {
        CensusBounds {
            max_vertices: 6,
            max_label: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusFailure {
    pub graph: Multigraph,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    /// Isomorphism classes enumerated.
    pub total: u64,
    /// Classes passing every predicate.
    pub candidates: u64,
    pub accepted: u64,
    pub realized: u64,
    pub not_reducible: u64,
    pub failures: Vec<CensusFailure>,
}

impl CensusReport {
    fn merge(&mut self, other: CensusReport) {
        self.total += other.total;
        self.candidates += other.candidates;
        self.accepted += other.accepted;
        self.realized += other.realized;
        self.not_reducible += other.not_reducible;
        self.failures.extend(other.failures);
    }

    /// Every candidate accepted and realized.
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
            && self.not_reducible == 0
            && self.accepted == self.candidates
            && self.realized == self.candidates
    }
}

/// The cycle `p1 .. pn` read from tokens; token i is the edge between
/// `p{i+1}` and `p{i+2}`, forward when its flag is set.
pub fn cycle_from_tokens(tokens: &[(bool, i64)]) -> Multigraph {
    let n = tokens.len();
    let id = |i: usize| VertexId::new(format!("p{}", i % n + 1));
    let edges = tokens
        .iter()
        .enumerate()
        .map(|(i, &(fwd, l))| {
            if fwd {
                Edge::new(id(i), id(i + 1), l)
            } else {
                Edge::new(id(i + 1), id(i), l)
            }
        })
        .collect();
    Multigraph::from_edges(edges)
}

/// Canonical token cycles of length exactly `n`, one per isomorphism class.
pub fn canonical_cycles(n: usize, max_label: i64) -> Vec<Vec<(bool, i64)>> {
    if n < 2 || max_label < 1 {
        return Vec::new();
    }
    let alphabet: Vec<(bool, i64)> = [false, true]
        .iter()
        .flat_map(|&f| (1..=max_label).map(move |l| (f, l)))
        .collect();
    let base = alphabet.len();
    let mut digits = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let tokens: Vec<(bool, i64)> = digits.iter().map(|&d| alphabet[d]).collect();
        if cyclic_canonical(&tokens) == tokens {
            out.push(tokens);
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Classifies one graph and records the outcome.
fn examine(g: &Multigraph, report: &mut CensusReport) {
    report.total += 1;
    if !g.is_realizable_candidate() {
        return;
    }
    report.candidates += 1;
    match realize(g) {
        Ok(_) => {
            report.accepted += 1;
            report.realized += 1;
        }
        Err(PlumbingError::Rejected { reason, detail }) => {
            if reason == RejectReason::NotReducible {
                report.not_reducible += 1;
            }
            report.failures.push(CensusFailure {
                graph: g.clone(),
                reason: format!("{reason}: {detail}"),
            });
        }
        Err(e) => {
            report.accepted += 1;
            report.failures.push(CensusFailure {
                graph: g.clone(),
                reason: e.to_string(),
            });
        }
    }
}

pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_census(bounds: CensusBounds, workers: usize) -> CensusReport {
    let cycles: Vec<Vec<(bool, i64)>> = (2..=bounds.max_vertices)
        .flat_map(|n| canonical_cycles(n, bounds.max_label))
        .collect();
    let workers = workers.max(1).min(cycles.len().max(1));
    let parts: Vec<CensusReport> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let cycles = &cycles;
                scope.spawn(move || {
                    let mut report = CensusReport::default();
                    for tokens in cycles.iter().skip(w).step_by(workers) {
                        examine(&cycle_from_tokens(tokens), &mut report);
                    }
                    report
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("census worker panicked"))
            .collect()
    });
    let mut report = CensusReport::default();
    for p in parts {
        report.merge(p);
    }
    report
        .failures
        .sort_by(|a, b| a.graph.edges().cmp(b.graph.edges()));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    // Number of distinct graph shapes over every raw token string.
    fn brute_classes(n: usize, max_label: i64) -> usize {
        let mut seen = BTreeSet::new();
        let alphabet: Vec<(bool, i64)> = [false, true]
            .iter()
            .flat_map(|&f| (1..=max_label).map(move |l| (f, l)))
            .collect();
        let total = alphabet.len().pow(n as u32);
        for mut code in 0..total {
            let mut tokens = Vec::with_capacity(n);
            for _ in 0..n {
                tokens.push(alphabet[code % alphabet.len()]);
                code /= alphabet.len();
            }
            let g = cycle_from_tokens(&tokens);
            seen.insert(g.shape().unwrap());
        }
        seen.len()
    }

    #[test]
    fn one_representative_per_class() {
        for (n, l) in [(2, 2), (3, 2), (4, 1), (4, 2)] {
            assert_eq!(canonical_cycles(n, l).len(), brute_classes(n, l), "n={n} l={l}");
        }
    }

    #[test]
    fn tokens_build_cycles() {
        let g = cycle_from_tokens(&[(true, 1), (true, 1), (false, 1), (false, 1)]);
        assert!(g.is_semi_free());
        assert_eq!(g.index_counts(), [1, 2, 1]);
    }

    #[test]
    fn small_census_is_clean() {
        let r = run_census(
            CensusBounds {
                max_vertices: 4,
                max_label: 3,
            },
            2,
        );
        assert!(r.candidates > 0);
        assert!(r.is_clean(), "{:?}", r.failures);
        let single = run_census(
            CensusBounds {
                max_vertices: 4,
                max_label: 3,
            },
            1,
        );
        assert_eq!(r, single);
    }
}
