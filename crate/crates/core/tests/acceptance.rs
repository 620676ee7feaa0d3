//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fixgraph::catalog::{cp2, hirzebruch, min_fixed_points, semifree_base_graph};
use fixgraph::census::{run_census, workers_from_env, CensusBounds};
use fixgraph::fpdata::{
    chi_y, chi_y_at, invariant_report, product, semifree_count_check, FixedPointData,
};
use fixgraph::operations::{apply, replay, OpKind};
use fixgraph::plumbing::{
    derived_graph, realize, replay_on_sequence, verify_conditions, verify_property_a,
};
use fixgraph::reduction::{realizability_check, reduce_to_semifree, CaseTag};
use fixgraph::Multigraph;
use num_integer::Integer;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(lists: &[[i64; 2]]) -> FixedPointData {
    FixedPointData::from_weights(lists.iter().map(|l| l.to_vec())).unwrap()
}

fn chern_matches(g: &Multigraph, c1: i64, c2: i64) -> Result<(), String> {
    let (l1, l2) = chern_by_localization(g);
    ensure((l1 - c1 as f64).abs() < 1e-9 && (l2 - c2 as f64).abs() < 1e-9, || {
        format!("localization gives ({l1}, {l2}), expected ({c1}, {c2})")
    })
}

fn ac1() -> Check {
    let pairs = [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (1, 4), (3, 4), (5, 2), (4, 7), (9, 10)];
    for (a, b) in pairs {
        let g = cp2(a, b).map_err(|e| e.to_string())?;
        let r = invariant_report(&g.fixed_point_data().unwrap()).map_err(|e| e.to_string())?;
        ensure(r.index_counts == [1, 1, 1], || format!("cp2({a},{b}) N={:?}", r.index_counts))?;
        ensure(r.todd == 1, || format!("cp2({a},{b}) todd {}", r.todd))?;
        ensure(r.c1_squared == Some(9) && r.c2 == Some(3), || {
            format!("cp2({a},{b}) chern {:?} {:?}", r.c1_squared, r.c2)
        })?;
        ensure(r.chi == [1, -1, 1], || format!("cp2({a},{b}) chi {:?}", r.chi))?;
        chern_matches(&g, 9, 3)?;
    }
    Ok(format!("{} pairs", pairs.len()))
}

fn ac2() -> Check {
    let mut picked = Vec::new();
    for n in 0..=4i64 {
        for &(c, d) in &[(3, 2), (5, 3), (1, 1), (7, 4), (2, 5)] {
            if c.gcd(&d) == 1 && c != n * d {
                picked.push((n, c, d));
            }
        }
    }
    picked.truncate(20);
    ensure(picked.len() == 20, || format!("only {} triples", picked.len()))?;
    let mut seventhree = 0;
    for &(n, c, d) in &picked {
        let g = hirzebruch(n, c, d).map_err(|e| e.to_string())?;
        let quoted = data(&[[-c, d], [n * d - c, -d], [c, d], [c - n * d, -d]]);
        ensure(g.fixed_point_data().unwrap() == quoted, || {
            format!("hirzebruch({n},{c},{d}) weights differ from the quoted list")
        })?;
        let r = invariant_report(&quoted).map_err(|e| e.to_string())?;
        ensure(r.index_counts == [1, 2, 1], || format!("N={:?}", r.index_counts))?;
        ensure(r.c1_squared == Some(8) && r.c2 == Some(4), || {
            format!("hirzebruch({n},{c},{d}) chern {:?} {:?}", r.c1_squared, r.c2)
        })?;
        chern_matches(&g, 8, 4)?;
        if c < n * d && d > 1 {
            seventhree += 1;
        }
    }
    Ok(format!("20 triples, {seventhree} in the second shape"))
}

fn random_graphs(count: usize) -> Vec<Multigraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    (0..count).map(|_| random_graph(&mut rng, 12)).collect()
}

fn ac3(graphs: &[Multigraph]) -> Check {
    let samples = [
        BigRational::from_integer(2.into()),
        BigRational::from_integer(3.into()),
        BigRational::new(5.into(), 2.into()),
    ];
    for g in graphs {
        let d = g.fixed_point_data().map_err(|e| e.to_string())?;
        let counts = g.index_counts();
        let want: Vec<i64> = counts
            .iter()
            .enumerate()
            .map(|(i, &n)| if i % 2 == 0 { n as i64 } else { -(n as i64) })
            .collect();
        let got = chi_y(&d).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("chi_y {got:?} != {want:?}"))?;
        for t in &samples {
            let at = chi_y_at(&d, t).map_err(|e| e.to_string())?;
            let as_int: Vec<BigRational> =
                want.iter().map(|&w| BigRational::from_integer(w.into())).collect();
            ensure(at == as_int, || format!("chi_y at t={t} is {at:?}"))?;
        }
    }
    Ok(format!("{} graphs, 3 sample points each", graphs.len()))
}

fn ac4(graphs: &[Multigraph]) -> Check {
    let mut total_steps = 0;
    for g in graphs {
        let label_sum: i64 = g.edges().iter().map(|e| e.label).sum();
        let r = reduce_to_semifree(g).map_err(|e| format!("{e} on {:?}", g.edges()))?;
        ensure(r.steps() as i64 <= label_sum, || {
            format!("{} steps exceed label sum {label_sum}", r.steps())
        })?;
        ensure(r.todd == g.todd(), || "todd changed".into())?;
        let mut rebuilt = Multigraph::empty();
        for c in &r.components {
            ensure(c.base.is_semi_free(), || "base not semi-free".into())?;
            // walk the input back to the base, checking Todd at each step
            let mut cur = c.input.clone();
            let t = cur.todd();
            for entry in &c.log {
                cur = apply(&cur, &entry.reverse).map_err(|e| e.to_string())?.graph;
                ensure(cur.todd() == t, || format!("todd changes at step {}", entry.step))?;
            }
            ensure(cur == c.base, || "logged reverse steps do not reach the base".into())?;
            let back = replay(&c.trace).map_err(|e| e.to_string())?;
            ensure(back == c.input, || "trace replay differs from the component".into())?;
            rebuilt = rebuilt.disjoint_union(&back);
        }
        ensure(rebuilt.is_isomorphic(g), || "replayed union not isomorphic".into())?;
        total_steps += r.steps();
    }
    Ok(format!("{} graphs, {total_steps} reduction steps", graphs.len()))
}

fn ac5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut kinds = [0usize; 4];
    let mut done = 0;
    while done < 500 {
        let s = random_sequence(&mut rng, 8);
        let g = derived_graph(&s);
        let Some((site, expected)) = random_site(&mut rng, &g, LABEL_CAP) else {
            continue;
        };
        let out = replay_on_sequence(&s, &site).map_err(|e| format!("{site}: {e}"))?;
        ensure(derived_graph(&out) == expected, || format!("square fails at {site}"))?;
        ensure(expected == apply(&g, &site).unwrap().graph, || "apply not deterministic".into())?;
        verify_conditions(&out).map_err(|e| e.to_string())?;
        verify_property_a(&out).map_err(|e| e.to_string())?;
        kinds[OpKind::FORWARD.iter().position(|&k| k == site.kind()).unwrap()] += 1;
        done += 1;
    }
    Ok(format!("500 pairs, per-kind counts {kinds:?}"))
}

fn ac6() -> Check {
    let report = run_census(
        CensusBounds {
            max_vertices: 5,
            max_label: 4,
        },
        workers_from_env(),
    );
    ensure(report.is_clean(), || {
        format!(
            "{} failures, {} not reducible; first: {:?}",
            report.failures.len(),
            report.not_reducible,
            report.failures.first().map(|f| &f.reason)
        )
    })?;
    Ok(format!(
        "{} classes, {} candidates, {} accepted, {} realized, {} not reducible",
        report.total, report.candidates, report.accepted, report.realized, report.not_reducible
    ))
}

fn ac7() -> Check {
    for n0 in 1..=5usize {
        for n1 in 1..=5usize {
            let g = min_fixed_points(n0, n1).map_err(|e| e.to_string())?;
            ensure(g.vertices().len() == 2 * n0 + n1, || {
                format!("({n0},{n1}) has {} vertices", g.vertices().len())
            })?;
            ensure(g.index_counts() == [n0 as u64, n1 as u64, n0 as u64], || {
                format!("({n0},{n1}) counts {:?}", g.index_counts())
            })?;
            ensure(g.is_connected() && g.is_realizable_candidate(), || {
                format!("({n0},{n1}) fails a predicate")
            })?;
            let seqs = realize(&g).map_err(|e| format!("({n0},{n1}) {e}"))?;
            ensure(seqs.len() == 1 && derived_graph(&seqs[0]) == g, || {
                format!("({n0},{n1}) realization differs")
            })?;
            let (c1, c2) = (10 * n0 as i64 - n1 as i64, 2 * n0 as i64 + n1 as i64);
            chern_matches(&g, c1, c2)?;
        }
    }
    let g = min_fixed_points(2, 1).unwrap();
    let (c1, c2) = chern_by_localization(&g);
    ensure(c1.round() == 19.0 && c2.round() == 5.0 && c1 > 3.0 * c2, || {
        format!("(2,1) gives c1^2={c1} c2={c2}")
    })?;
    Ok("25 pairs; (2,1) has c1^2 = 19 > 15 = 3 c2".into())
}

fn ac8() -> Check {
    for k in 1..=3u64 {
        let base = semifree_base_graph(k as usize).fixed_point_data().unwrap();
        for n in 2..=5u64 {
            let mut d = base.clone();
            for _ in 0..n - 2 {
                d = product(&d, &FixedPointData::sphere_rotation());
            }
            ensure(d.len() as u64 == k * (1 << n), || format!("k={k} n={n}: {} points", d.len()))?;
            let mut counts = vec![0u64; n as usize + 1];
            for p in d.points() {
                counts[p.weights().iter().filter(|&&w| w < 0).count()] += 1;
            }
            let want: Vec<u64> = (0..=n).map(|i| k * binomial(n, i)).collect();
            ensure(counts == want, || format!("k={k} n={n}: N={counts:?}"))?;
            ensure(semifree_count_check(&d) == Ok(true), || format!("k={k} n={n}: check fails"))?;
        }
    }
    Ok("k <= 3, n <= 5".into())
}

fn ac9() -> Check {
    let mut cases = 0;
    for n in 1..=6i64 {
        for d in 2..=7i64 {
            for c in 1..n * d {
                if c.gcd(&d) != 1 {
                    continue;
                }
                let g = hirzebruch(n, c, d).map_err(|e| e.to_string())?;
                let e = n * d - c;
                let (j1, j2) = ((c - 1) / d, (e - 1) / d);
                let (c1, c2) = (c - j1 * d, e - j2 * d);
                let stage = (j1 + j2) as usize;
                let r = reduce_to_semifree(&g).map_err(|x| x.to_string())?;
                let comp = &r.components[0];
                let log = &comp.log;
                ensure(log.len() > stage, || format!("({n},{c},{d}) log too short"))?;
                ensure(
                    log[..stage]
                        .iter()
                        .all(|l| matches!(l.case, CaseTag::Case2 | CaseTag::Case3)),
                    || format!("({n},{c},{d}) relabel stage uses another case"),
                )?;
                // the graph after `stage` reverse steps
                let mut cur = g.clone();
                for l in &log[..stage] {
                    cur = apply(&cur, &l.reverse).unwrap().graph;
                }
                let mut labels: Vec<i64> = cur.edges().iter().map(|x| x.label).collect();
                labels.sort();
                let mut want = vec![c1, c2, d, d];
                want.sort();
                ensure(labels == want && c1 + c2 == d, || {
                    format!("({n},{c},{d}) stage labels {labels:?}, expected {want:?}")
                })?;
                ensure(log[stage].edge.label == d && log[stage].x1 + log[stage].x2 == d, || {
                    format!("({n},{c},{d}) step {stage} is {}", log[stage])
                })?;
                ensure(comp.base.is_isomorphic(&semifree_base_graph(1)), || {
                    format!("({n},{c},{d}) base is not the square")
                })?;
                ensure(realizability_check(&g).is_accepted(), || "rejected".into())?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} instances"))
}

fn run(id: usize, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
        Err(e) => (false, e),
    };
    println!(
        "{} AC{id} ({:.3}s of {:?}): {detail}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit
    );
    ok
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let mut ok = true;
    ok &= run(1, s(1), ac1);
    ok &= run(2, s(1), ac2);
    let start = Instant::now();
    let graphs = random_graphs(500);
    let built = start.elapsed();
    ok &= run(3, s(30).saturating_sub(built), || ac3(&graphs));
    ok &= run(4, s(60), || ac4(&graphs));
    ok &= run(5, s(60), ac5);
    ok &= run(6, s(300), ac6);
    ok &= run(7, s(10), ac7);
    ok &= run(8, s(5), ac8);
    ok &= run(9, s(5), ac9);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
