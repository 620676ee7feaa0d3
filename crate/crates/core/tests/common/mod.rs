#![allow(dead_code)]

use fixgraph::catalog::semifree_base_graph;
use fixgraph::operations::{apply, find_sites, OpKind, Site};
use fixgraph::plumbing::{base_sequence, derived_graph, replay_on_sequence, PlumbingSequence};
use fixgraph::Multigraph;
use rand::seq::SliceRandom;
use rand::Rng;

pub const LABEL_CAP: i64 = 50;

pub fn max_label(g: &Multigraph) -> i64 {
    g.edges().iter().map(|e| e.label).max().unwrap_or(0)
}

/// Total Todd genus 1..=3, split over one or two semi-free components.
pub fn random_base<R: Rng>(rng: &mut R) -> Multigraph {
    let t = rng.gen_range(1..=3);
    if t >= 2 && rng.gen_bool(0.3) {
        let a = rng.gen_range(1..t);
        semifree_base_graph(a).disjoint_union(&semifree_base_graph(t - a))
    } else {
        semifree_base_graph(t)
    }
}

/// A forward site on `g` whose result keeps labels under the cap.
pub fn random_site<R: Rng>(rng: &mut R, g: &Multigraph, cap: i64) -> Option<(Site, Multigraph)> {
    let mut kinds = OpKind::FORWARD.to_vec();
    kinds.shuffle(rng);
    for kind in kinds {
        let mut sites = find_sites(g, kind);
        sites.shuffle(rng);
        for site in sites {
            let out = apply(g, &site).expect("found sites apply").graph;
            if max_label(&out) <= cap {
                return Some((site, out));
            }
        }
    }
    None
}

/// Random forward walk of at most `max_steps` from a random base.
pub fn random_graph<R: Rng>(rng: &mut R, max_steps: usize) -> Multigraph {
    let mut g = random_base(rng);
    let steps = rng.gen_range(0..=max_steps);
    for _ in 0..steps {
        match random_site(rng, &g, LABEL_CAP) {
            Some((_, next)) => g = next,
            None => break,
        }
    }
    g
}

/// A sequence reached from `base_sequence(k)` by a random replay walk.
pub fn random_sequence<R: Rng>(rng: &mut R, max_steps: usize) -> PlumbingSequence {
    let mut s = base_sequence(rng.gen_range(1..=3));
    let steps = rng.gen_range(0..=max_steps);
    for _ in 0..steps {
        let g = derived_graph(&s);
        match random_site(rng, &g, LABEL_CAP) {
            Some((site, _)) => s = replay_on_sequence(&s, &site).expect("replay of a found site"),
            None => break,
        }
    }
    s
}

/// c1^2 and c2 by localization: sum over points of (w1 + w2)^2 / (w1 w2)
/// and of 1.
pub fn chern_by_localization(g: &Multigraph) -> (f64, f64) {
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    for v in g.vertices() {
        let w = g.weights_at(v);
        let (a, b) = (w[0] as f64, w[1] as f64);
        c1 += (a + b) * (a + b) / (a * b);
        c2 += 1.0;
    }
    (c1, c2)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
