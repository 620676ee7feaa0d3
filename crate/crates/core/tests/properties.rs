mod common;

use fixgraph::fpdata::{
    adjacent_index_check, index_counts, product, smallest_weight_check, weight_pairing_check,
    FixedPointData,
};
use fixgraph::multigraph::cyclic_canonical;
use fixgraph::operations::{replay, OperationTrace};
use fixgraph::plumbing::{derived_graph, realize, t2_weights, verify_conditions, PlumbingSequence};
use fixgraph::reduction::reduce_to_semifree;
use fixgraph::{Edge, Multigraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn graph_from_seed(seed: u64) -> Multigraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), 10)
}

/// Renames every vertex and shifts the listing order.
fn relabel(g: &Multigraph, shift: usize) -> Multigraph {
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .cycle()
        .skip(shift % g.edges().len().max(1))
        .take(g.edges().len())
        .map(|e| Edge::new(format!("v_{}", e.from), format!("v_{}", e.to), e.label))
        .collect();
    Multigraph::from_edges(edges)
}

fn point_multiset(d: &FixedPointData) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = d.points().iter().map(|p| p.weights().to_vec()).collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_data_passes_necessary_checks(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let d = g.fixed_point_data().unwrap();
        prop_assert!(weight_pairing_check(&d));
        prop_assert!(smallest_weight_check(&d));
        prop_assert!(adjacent_index_check(&d));
        let n = index_counts(&d);
        prop_assert_eq!(n[0], n[2]);
        prop_assert_eq!(n.iter().sum::<u64>() as usize, d.len());
        prop_assert!(g.is_realizable_candidate());
    }

    #[test]
    fn shape_ignores_names_and_order(seed in any::<u64>(), shift in 0usize..20) {
        let g = graph_from_seed(seed);
        let h = relabel(&g, shift);
        prop_assert!(g.is_isomorphic(&h));
        prop_assert_eq!(g.fixed_point_data().unwrap(), h.fixed_point_data().unwrap());
    }

    #[test]
    fn canonical_form_is_idempotent(tokens in prop::collection::vec((any::<bool>(), 1i64..6), 2..9)) {
        let c = cyclic_canonical(&tokens);
        prop_assert_eq!(cyclic_canonical(&c), c.clone());
        let mut rotated = tokens.clone();
        rotated.rotate_left(1);
        prop_assert_eq!(cyclic_canonical(&rotated), c.clone());
        let reflected: Vec<(bool, i64)> = tokens.iter().rev().map(|&(f, l)| (!f, l)).collect();
        prop_assert_eq!(cyclic_canonical(&reflected), c);
    }

    #[test]
    fn trace_json_round_trip(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let r = reduce_to_semifree(&g).unwrap();
        for c in &r.components {
            let text = c.trace.to_json();
            let back = OperationTrace::from_json(&text).unwrap();
            prop_assert_eq!(&back, &c.trace);
            prop_assert_eq!(replay(&back).unwrap(), c.input.clone());
        }
    }

    #[test]
    fn realized_data_is_exact(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let seqs = realize(&g).unwrap();
        let mut union = Multigraph::empty();
        for s in &seqs {
            prop_assert!(verify_conditions(s).is_ok());
            let json = s.to_json();
            prop_assert_eq!(&PlumbingSequence::from_json(&json).unwrap(), s);
            for row in t2_weights(s) {
                let mut first = vec![row.weights[0].x, row.weights[1].x];
                first.sort();
                prop_assert_eq!(first, derived_graph(s).weights_at(&row.vertex));
            }
            union = union.disjoint_union(&derived_graph(s));
        }
        prop_assert_eq!(union.fixed_point_data().unwrap(), g.fixed_point_data().unwrap());
    }

    #[test]
    fn product_commutes(a in any::<u64>(), b in any::<u64>()) {
        let d1 = graph_from_seed(a).fixed_point_data().unwrap();
        let d2 = graph_from_seed(b).fixed_point_data().unwrap();
        let p = product(&d1, &d2);
        let q = product(&d2, &d1);
        prop_assert_eq!(p.len(), d1.len() * d2.len());
        prop_assert_eq!(point_multiset(&p), point_multiset(&q));
    }

    #[test]
    fn graph_json_round_trip(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        prop_assert_eq!(Multigraph::from_json(&g.to_json()).unwrap(), g);
    }
}
