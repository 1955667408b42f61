//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use gre_core::sample::{dirichlet, disjoint_pair, one_hot};
use gre_core::{
    approx_equal, cross_entropy, gre_breakdown, gre_distance, gre_upper_bound, jsd_oracle,
    kl_divergence, mutual_information, shannon_entropy, GreParams, JointTable, Metric, MetricIndex,
    NumericPolicy, ProbVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KS: [f64; 4] = [1.5, 2.0, 4.0, 10.0];
const DIMS: [usize; 4] = [2, 3, 10, 100];
const TRIPLES_PER_CONFIG: usize = 100_000;

const SYMMETRY_TOL: f64 = 1e-12;
const TRIANGLE_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-9;
const ATTAIN_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-9;
const INDEX_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn pv(v: &[f64]) -> ProbVector {
    ProbVector::new(v.to_vec()).unwrap()
}

/// Worst-case observations over the shared random sample of criteria 1-4.
#[derive(Default)]
struct SampleStats {
    triples: usize,
    identity_failures: usize,
    max_asymmetry: f64,
    min_triangle_slack: f64,
    distinct_pairs: usize,
    range_failures: usize,
    min_margin_over_2l: f64,
    max_excess_over_4l: f64,
    attain_checks: usize,
    max_attain_error: f64,
    lemma_failures: usize,
    inference_failures: usize,
    equal_pairs: usize,
    oracle_pairs: usize,
    max_oracle_error: f64,
}

fn sample_triple(rng: &mut ChaCha8Rng, t: usize, s: usize) -> (ProbVector, ProbVector, ProbVector, bool) {
    match t % 10 {
        0 => (one_hot(rng, s), dirichlet(rng, s), one_hot(rng, s), false),
        1 => {
            let (x, y) = disjoint_pair(rng, s);
            (x, y, dirichlet(rng, s), true)
        }
        2 => {
            let x = dirichlet(rng, s);
            (x.clone(), x, dirichlet(rng, s), false)
        }
        _ => (dirichlet(rng, s), dirichlet(rng, s), dirichlet(rng, s), false),
    }
}

fn collect_sample() -> SampleStats {
    let mut st = SampleStats {
        min_triangle_slack: f64::INFINITY,
        min_margin_over_2l: f64::INFINITY,
        max_excess_over_4l: f64::NEG_INFINITY,
        ..SampleStats::default()
    };
    for (ki, &k) in KS.iter().enumerate() {
        let params = GreParams::new(k, NumericPolicy::default()).unwrap();
        let l = params.half_gap();
        let tol = params.policy().equality_tol();
        for (si, &s) in DIMS.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + (ki * DIMS.len() + si) as u64);
            for t in 0..TRIPLES_PER_CONFIG {
                let (x, y, z, disjoint_xy) = sample_triple(&mut rng, t, s);
                st.triples += 1;
                for v in [&x, &y, &z] {
                    if gre_distance(v, v, &params).unwrap() != 0.0 {
                        st.identity_failures += 1;
                    }
                }
                let mut d = [0.0; 3];
                for (slot, (a, b)) in [(&x, &y), (&y, &z), (&x, &z)].into_iter().enumerate() {
                    let fwd = gre_breakdown(a, b, &params).unwrap();
                    let rev = gre_breakdown(b, a, &params).unwrap();
                    d[slot] = fwd.total;
                    st.max_asymmetry = st.max_asymmetry.max((fwd.total - rev.total).abs());

                    for sum in [fwd.forward_sum, fwd.backward_sum] {
                        if !(sum >= -BOUND_TOL && sum <= l + BOUND_TOL) {
                            st.lemma_failures += 1;
                        }
                    }
                    let equal = approx_equal(a, b, tol).unwrap();
                    if equal {
                        st.equal_pairs += 1;
                        if fwd.forward_sum.abs() > BOUND_TOL {
                            st.inference_failures += 1;
                        }
                    } else {
                        if fwd.forward_sum <= 0.0 || fwd.forward_sum.is_nan() {
                            st.inference_failures += 1;
                        }
                        st.distinct_pairs += 1;
                        st.min_margin_over_2l = st.min_margin_over_2l.min(fwd.total - 2.0 * l);
                        st.max_excess_over_4l = st.max_excess_over_4l.max(fwd.total - 4.0 * l);
                        if !(fwd.total > 2.0 * l && fwd.total <= 4.0 * l + BOUND_TOL) {
                            st.range_failures += 1;
                        }
                    }
                    if k == 2.0 {
                        let jsd = jsd_oracle(a, b, params.policy().log_base()).unwrap();
                        st.oracle_pairs += 1;
                        st.max_oracle_error = st
                            .max_oracle_error
                            .max((fwd.forward_sum + fwd.backward_sum - 2.0 * jsd).abs());
                    }
                }
                for slack in [d[0] + d[1] - d[2], d[0] + d[2] - d[1], d[2] + d[1] - d[0]] {
                    st.min_triangle_slack = st.min_triangle_slack.min(slack);
                }
                if disjoint_xy {
                    st.attain_checks += 1;
                    st.max_attain_error = st.max_attain_error.max((d[0] - 4.0 * l).abs());
                }
            }
        }
    }
    st
}

fn criterion_1(st: &SampleStats) -> Outcome {
    let detail = format!(
        "{} triples over {} configs; identity failures {}; max |d(p,q)-d(q,p)| {:e}; min triangle slack {:e}",
        st.triples,
        KS.len() * DIMS.len(),
        st.identity_failures,
        st.max_asymmetry,
        st.min_triangle_slack
    );
    if st.identity_failures == 0
        && st.max_asymmetry <= SYMMETRY_TOL
        && st.min_triangle_slack >= -TRIANGLE_TOL
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2(st: &SampleStats) -> Outcome {
    let mut max_attain = st.max_attain_error;
    let (a, b) = (pv(&[1.0, 0.0]), pv(&[0.0, 1.0]));
    for k in KS {
        let params = GreParams::new(k, NumericPolicy::default()).unwrap();
        let d = gre_distance(&a, &b, &params).unwrap();
        max_attain = max_attain.max((d - gre_upper_bound(&params)).abs());
    }
    let detail = format!(
        "{} distinct pairs, {} outside (2L, 4L]; min d-2L {:e}; max d-4L {:e}; {} disjoint pairs, max |d-4L| {:e}",
        st.distinct_pairs,
        st.range_failures,
        st.min_margin_over_2l,
        st.max_excess_over_4l,
        st.attain_checks,
        max_attain
    );
    if st.range_failures == 0 && st.attain_checks > 0 && max_attain <= ATTAIN_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3(st: &SampleStats) -> Outcome {
    let detail = format!(
        "directional sums outside [-1e-12, L+1e-12]: {}; Inference 1 failures: {} ({} equal pairs, {} distinct)",
        st.lemma_failures, st.inference_failures, st.equal_pairs, st.distinct_pairs
    );
    if st.lemma_failures == 0 && st.inference_failures == 0 && st.equal_pairs > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4(st: &SampleStats) -> Outcome {
    let detail = format!(
        "{} pairs at k=2; max |forward+backward - 2 JSD| {:e}",
        st.oracle_pairs, st.max_oracle_error
    );
    if st.oracle_pairs >= 10_000 && st.max_oracle_error <= ORACLE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let exact = NumericPolicy::new(0.0, 2.0, 1e-12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut max_kl_gap: f64 = 0.0;
    for _ in 0..10_000 {
        let s = rng.random_range(1..=64);
        let (p, q) = (dirichlet(&mut rng, s), dirichlet(&mut rng, s));
        if q.as_slice().contains(&0.0) {
            continue;
        }
        let lhs = cross_entropy(&p, &q, &exact).unwrap() - shannon_entropy(&p, &exact);
        max_kl_gap = max_kl_gap.max((lhs - kl_divergence(&p, &q, &exact).unwrap()).abs());
    }

    let mut max_uniform_gap: f64 = 0.0;
    for s in 1..=64usize {
        let h = shannon_entropy(&ProbVector::uniform(s).unwrap(), &exact);
        max_uniform_gap = max_uniform_gap.max((h - (s as f64).log2()).abs());
    }

    let policy = NumericPolicy::default();
    let mut max_product_mi: f64 = 0.0;
    for _ in 0..2_000 {
        let (r, c) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let table = JointTable::product(&dirichlet(&mut rng, r), &dirichlet(&mut rng, c)).unwrap();
        max_product_mi = max_product_mi.max(mutual_information(&table, &policy).abs());
    }
    let diag = JointTable::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
    let diag_mi = mutual_information(&diag, &policy);

    let detail = format!(
        "max |H(P,Q)-H(P)-KL| {max_kl_gap:e}; max |H(U_s)-log2 s| {max_uniform_gap:e}; max |MI(product)| {max_product_mi:e}; MI(diagonal) {diag_mi}"
    );
    if max_kl_gap <= 1e-9
        && max_uniform_gap <= IDENTITY_TOL
        && max_product_mi <= IDENTITY_TOL
        && (diag_mi - 1.0).abs() <= IDENTITY_TOL
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let (p, q) = (pv(&[1.0, 0.0]), pv(&[0.0, 1.0]));
    let exact = NumericPolicy::new(0.0, 2.0, 1e-12).unwrap();
    let smoothed = NumericPolicy::default();
    let kl_exact = kl_divergence(&p, &q, &exact).unwrap();
    let kl_smooth = kl_divergence(&p, &q, &smoothed).unwrap();
    let expected_smooth = smoothed.log(1.0 / smoothed.epsilon());

    let mut gre_exact = true;
    for k in KS {
        let params = GreParams::new(k, smoothed).unwrap();
        gre_exact &= gre_distance(&p, &q, &params).unwrap() == gre_upper_bound(&params);
    }

    let (a, b) = (pv(&[0.5, 0.5]), pv(&[0.01, 0.99]));
    let asym = kl_divergence(&a, &b, &exact).unwrap() - kl_divergence(&b, &a, &exact).unwrap();

    let detail = format!(
        "KL(eps=0) {kl_exact}; KL(eps=1e-12) {kl_smooth} vs log2(1/eps) {expected_smooth}; d = 4L exactly for all k: {gre_exact}; |KL(p,q)-KL(q,p)| = {:.4}",
        asym.abs()
    );
    if kl_exact == f64::INFINITY
        && (kl_smooth - expected_smooth).abs() <= 1e-9
        && gre_exact
        && asym.abs() > 0.1
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scan(items: &[(u32, ProbVector)], params: &GreParams, q: &ProbVector) -> Vec<(f64, u32)> {
    let mut all: Vec<(f64, u32)> = items.iter().map(|(id, v)| (params.distance(q, v), *id)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

fn same(got: &[gre_core::NeighborResult<u32>], want: &[(f64, u32)]) -> bool {
    let mut got_ids: Vec<u32> = got.iter().map(|g| g.id).collect();
    let mut want_ids: Vec<u32> = want.iter().map(|w| w.1).collect();
    got_ids.sort_unstable();
    want_ids.sort_unstable();
    got_ids == want_ids
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| (g.distance - w.0).abs() <= INDEX_TOL)
}

fn criterion_7() -> Outcome {
    const INSTANCES: usize = 100;
    const ITEMS: u32 = 1000;
    const S: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut mismatches, mut roundtrip_failures, mut visited, mut queries) = (0, 0, 0usize, 0usize);
    for i in 0..INSTANCES {
        let k = [1.5, 2.0, 10.0][i % 3];
        let params = GreParams::new(k, NumericPolicy::default()).unwrap();
        let l = params.half_gap();
        let mut items: Vec<(u32, ProbVector)> = (0..ITEMS).map(|id| (id, dirichlet(&mut rng, S))).collect();
        // a duplicate vector under a second id
        items.push((ITEMS, items[0].1.clone()));
        let index = MetricIndex::build_seeded(items.clone(), params, rng.random()).unwrap();
        let restored = MetricIndex::<u32>::from_json(&index.to_json().unwrap()).unwrap();
        for _ in 0..3 {
            let query = if rng.random_bool(0.25) {
                items[rng.random_range(0..items.len())].1.clone()
            } else {
                dirichlet(&mut rng, S)
            };
            let want = scan(&items, &params, &query);
            let n = [1, 10, 100][rng.random_range(0..3)];
            let (knn, stats) = index.knn_with_stats(&query, n).unwrap();
            visited += stats.visited_nodes;
            queries += 1;
            if !same(&knn, &want[..n]) {
                mismatches += 1;
            }
            let radius = 2.0 * l + rng.random::<f64>() * 2.0 * l;
            let range = index.range_query(&query, radius).unwrap();
            let cut = want.partition_point(|w| w.0 <= radius);
            if !same(&range, &want[..cut]) {
                mismatches += 1;
            }
            if restored.knn_with_stats(&query, n).unwrap() != (knn, stats)
                || restored.range_query(&query, radius).unwrap() != range
            {
                roundtrip_failures += 1;
            }
        }
    }
    let detail = format!(
        "{INSTANCES} instances x {} items (s={S}); oracle mismatches {mismatches}; snapshot round-trip differences {roundtrip_failures}; mean visited nodes per knn {:.0}",
        ITEMS + 1,
        visited as f64 / queries as f64
    );
    if mismatches == 0 && roundtrip_failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_gre"))
            .args(["selfcheck", "--seed", "42", "--trials", "100000"])
            .output()
            .expect("gre runs")
    };
    let (first, second) = (run(), run());
    let identical = first.stdout == second.stdout;
    let codes = (first.status.code(), second.status.code());
    let last = String::from_utf8_lossy(&first.stdout)
        .lines()
        .find(|l| l.starts_with("triangle"))
        .unwrap_or("")
        .split_whitespace()
        .last()
        .unwrap_or("")
        .to_owned();
    let detail = format!(
        "exit codes {codes:?}; byte-identical reports: {identical}; {last}"
    );
    if codes == (Some(0), Some(0)) && identical && !first.stdout.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let start = Instant::now();
    let sample = collect_sample();
    let sample_time = start.elapsed();
    let criteria: Vec<(&str, Check<'_>)> = vec![
        ("1 metric axioms", Box::new(|| criterion_1(&sample))),
        ("2 range {0} U (2L, 4L]", Box::new(|| criterion_2(&sample))),
        ("3 directional-sum bounds", Box::new(|| criterion_3(&sample))),
        ("4 k=2 Jensen-Shannon identity", Box::new(|| criterion_4(&sample))),
        ("5 classical entropy identities", Box::new(criterion_5)),
        ("6 KL defects vs bounded distance", Box::new(criterion_6)),
        ("7 index exactness and snapshot", Box::new(criterion_7)),
        ("8 selfcheck reproducibility", Box::new(criterion_8)),
    ];
    println!("shared random sample for criteria 1-4 drawn and evaluated in {sample_time:.1?}");
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = check();
        let elapsed = t.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} ({elapsed:.1?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} ({elapsed:.1?}): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
