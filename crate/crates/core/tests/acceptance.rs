//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::time::{Duration, Instant};

use mlclust::lattice::{
    coarsens, enumerate_partitions, is_modular, mobius_inversion_pf, mobius_partition,
    mobius_partition_recursive, separable_from, separating_variant, zeta_pf, PartitionCode,
    PartitionFunction,
};
use mlclust::oracle::{best_partition_bruteforce, random_cover, random_quadratic};
use mlclust::solve::TraceRecord;
use mlclust::{
    derivative, embed_partition, global_score, init_restricted, init_uniform, is_local_maximizer,
    local_search, mobius_transform, outlier_violations, reduced_score, round_up, zeta_transform,
    ClusterScore, Direction, FuzzyCover, InitMode, Partition, QuadraticScore, ScoreFunction,
    SimilarityMatrix, SolverOptions, Subset,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn example() -> ScoreFunction {
    ScoreFunction::from_values(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap()
}

fn random_set_function(n: usize, rng: &mut ChaCha8Rng) -> ScoreFunction {
    ScoreFunction::from_fn(n, |_| rng.random_range(-1.0..1.0)).unwrap()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{} ({:.3}s)", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took >= limit {
            out.passed = false;
            out.detail = format!("{}; exceeded {:.3}s", out.detail, limit.as_secs_f64());
        }
    }
    out
}

fn example_end_to_end() -> Outcome {
    let v = example();
    let cover = init_uniform(3).unwrap();
    let (p, trace) = local_search(&v, &cover, &SolverOptions::default()).unwrap();
    let w = p.value(&v);
    let want = Partition::new(3, vec![Subset::from_points([0, 1]), Subset::singleton(2)]).unwrap();
    let first = trace.selections().first().copied();
    let extract3 = trace
        .extractions()
        .iter()
        .any(|&(i, _, g)| i == 2 && (g - 0.3).abs() <= TOL);
    let ok = p == want
        && (w - 1.0).abs() <= TOL
        && first.is_some_and(|(a, s)| a == Subset::full(3) && (s - 0.775).abs() <= TOL)
        && extract3;
    Outcome::new(
        ok,
        format!(
            "partition {:?}, W = {w}, first selection {first:?}, extractions {:?}",
            p.blocks(),
            trace.extractions()
        ),
    )
}

fn clique(n: usize, a: usize) -> SimilarityMatrix {
    let entries = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j || (i < a && j < a) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    SimilarityMatrix::new(n, entries).unwrap()
}

fn clique_closed_form() -> Outcome {
    let expected = [0.5, 1.0, 2.25, 5.0, 10.0];
    let got: Vec<f64> = (1..=5)
        .map(|a| {
            let q = QuadraticScore::from_similarity(&clique(5, a)).unwrap();
            q.value(Subset::full(a))
        })
        .collect();
    let ok = got.iter().zip(expected).all(|(g, e)| (g - e).abs() <= TOL);
    Outcome::new(ok, format!("w(A) for |A| = 1..5: {got:?}"))
}

fn transform_roundtrips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = 1 + k % 12;
        let mut values: Vec<f64> = (0..1usize << n)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        values[0] = 0.0;
        let back = zeta_transform(&mobius_transform(&values).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&values) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut worst_pf: f64 = 0.0;
    for n in 1..=8 {
        let h = PartitionFunction::from_fn(n, |_| rng.random_range(-1.0..1.0)).unwrap();
        let back = zeta_pf(&mobius_inversion_pf(&h).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(h.values()) {
            worst_pf = worst_pf.max((a - b).abs());
        }
    }
    Outcome::new(
        worst <= TOL && worst_pf <= TOL,
        format!("subset lattice max error {worst:e}, partition lattice max error {worst_pf:e}"),
    )
}

// W from the definition: Σ_A Σ_{∅≠B⊆A} μ(B) Π_{j∈B} q_j^A over a dense
// membership table, with μ computed by the alternating-sign sum.
struct NaiveCover {
    n: usize,
    mobius: Vec<f64>,
    q: Vec<Vec<f64>>,
}

impl NaiveCover {
    fn new(v: &ScoreFunction, cover: &FuzzyCover) -> Self {
        let n = v.n();
        let mobius = (0..1u64 << n)
            .map(|b| {
                Subset(b)
                    .subsets()
                    .map(|c| {
                        let sign = if (b.count_ones() - c.len() as u32).is_multiple_of(2) {
                            1.0
                        } else {
                            -1.0
                        };
                        sign * v.value(c)
                    })
                    .sum()
            })
            .collect();
        let q = (0..n)
            .map(|i| (0..1u64 << n).map(|a| cover.mass(i, Subset(a))).collect())
            .collect();
        NaiveCover { n, mobius, q }
    }

    fn w(&self) -> f64 {
        let mut total = 0.0;
        for a in 1..1u64 << self.n {
            for b in Subset(a).subsets().skip(1) {
                let prod: f64 = b.iter().map(|j| self.q[j][a as usize]).product();
                total += self.mobius[b.mask() as usize] * prod;
            }
        }
        total
    }
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for k in 0..50 {
        let n = 2 + k % 7;
        let v = random_set_function(n, &mut rng);
        let (cover, _) = random_cover(n, rng.random(), None).unwrap();
        let mut naive = NaiveCover::new(&v, &cover);
        worst = worst.max((naive.w() - global_score(&v, &cover).unwrap()).abs());
        for i in 0..n {
            let reduced = reduced_score(&v, &cover, i).unwrap();
            for (&a, &r) in &reduced {
                let d = derivative(&v, &cover, i, a).unwrap();
                let saved = naive.q[i][a.mask() as usize];
                let mut at = [0.0; 3];
                for (slot, t) in at.iter_mut().zip([0.0, 0.5, 1.0]) {
                    naive.q[i][a.mask() as usize] = t;
                    *slot = naive.w();
                }
                naive.q[i][a.mask() as usize] = saved;
                let s1 = 2.0 * (at[1] - at[0]);
                let s2 = 2.0 * (at[2] - at[1]);
                worst = worst
                    .max((d - r).abs())
                    .max((s1 - r).abs())
                    .max((s2 - r).abs());
                checked += 1;
            }
        }
    }
    Outcome::new(
        worst <= TOL,
        format!("{checked} (i, A) pairs over 50 covers, max deviation {worst:e}"),
    )
}

fn roundup_guarantees() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = Vec::new();
    for k in 0..100 {
        let n = 2 + k % 7;
        let v = random_set_function(n, &mut rng);
        let (q, _) = random_cover(n, rng.random(), None).unwrap();
        let w = global_score(&v, &q).unwrap();
        let mut ends = [0.0; 2];
        for (slot, dir) in ends.iter_mut().zip([Direction::Max, Direction::Min]) {
            let (out, trace) = round_up(&v, &q, dir).unwrap();
            let mut prev = w;
            for r in trace.iter() {
                let g = r.global_score();
                let bad = match dir {
                    Direction::Max => g < prev - TOL,
                    Direction::Min => g > prev + TOL,
                };
                if bad {
                    violations.push(format!("instance {k} {dir:?}: step {prev} -> {g}"));
                }
                prev = g;
            }
            if !out.is_vertex_cover() {
                violations.push(format!("instance {k} {dir:?}: output not at a vertex"));
            }
            if trace.len() > n {
                violations.push(format!("instance {k} {dir:?}: {} steps", trace.len()));
            }
            *slot = global_score(&v, &out).unwrap();
        }
        let [hi, lo] = ends;
        if lo > w + TOL || w > hi + TOL {
            violations.push(format!("instance {k}: sandwich {lo} <= {w} <= {hi} fails"));
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "100 instances, {} violations {:?}",
            violations.len(),
            violations.first()
        ),
    )
}

fn corollary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    let mut samples = 0usize;
    for k in 0..20 {
        let q = random_quadratic(7, rng.random()).unwrap();
        let (_, best) = best_partition_bruteforce(&q).unwrap();
        for _ in 0..1000 {
            let (cover, _) = random_cover(7, rng.random(), None).unwrap();
            let w = global_score(&q, &cover).unwrap();
            let (up, _) = round_up(&q, &cover, Direction::Max).unwrap();
            let w_up = global_score(&q, &up).unwrap();
            samples += 1;
            if w > best + TOL || w_up > best + TOL {
                violations.push(format!(
                    "instance {k}: best {best}, sample {w}, rounded {w_up}"
                ));
            }
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "{samples} samples, {} violations {:?}",
            violations.len(),
            violations.first()
        ),
    )
}

fn certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for k in 0..100 {
        let n = 2 + k % 9;
        let q = random_quadratic(n, rng.random()).unwrap();
        let (p, _) =
            local_search(&q, &init_uniform(n).unwrap(), &SolverOptions::default()).unwrap();
        let local = is_local_maximizer(&q, &embed_partition(&p), TOL).unwrap();
        let outliers = outlier_violations(&q, &p, TOL).unwrap();
        if !local || !outliers.is_empty() {
            failures.push(format!(
                "instance {k} (n = {n}): local {local}, outliers {outliers:?}"
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "100 instances, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn appendix_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut issues = Vec::new();

    let parts: Vec<Partition> = enumerate_partitions(4)
        .unwrap()
        .iter()
        .map(PartitionCode::to_partition)
        .collect();
    let non_modular: Vec<&Partition> = parts.iter().filter(|p| !is_modular(p)).collect();
    if non_modular.len() != 3 {
        issues.push(format!(
            "{} non-modular partitions at n = 4",
            non_modular.len()
        ));
    }
    for s in 0..50 {
        let v = random_set_function(4, &mut rng);
        let mu = mobius_inversion_pf(&separable_from(&v).unwrap()).unwrap();
        for p in &parts {
            let big: Vec<Subset> = p.blocks().iter().copied().filter(|b| b.len() > 1).collect();
            let expected = match big.as_slice() {
                [] => (0..4).map(|i| v.value(Subset::singleton(i))).sum(),
                [a] => v.mobius_coeff(*a),
                _ => 0.0,
            };
            if (mu.get(p) - expected).abs() > TOL {
                issues.push(format!(
                    "sample {s}: mu^h({:?}) = {}, expected {expected}",
                    p.blocks(),
                    mu.get(p)
                ));
            }
        }
    }

    for n in 1..=8 {
        let count = enumerate_partitions(n)
            .unwrap()
            .iter()
            .filter(|c| is_modular(&c.to_partition()))
            .count();
        if count != (1 << n) - n {
            issues.push(format!("n = {n}: {count} modular partitions"));
        }
    }

    let mut pairs = 0usize;
    for n in 1..=5 {
        let rec = mobius_partition_recursive(n).unwrap();
        let parts: Vec<Partition> = enumerate_partitions(n)
            .unwrap()
            .iter()
            .map(PartitionCode::to_partition)
            .collect();
        for (y, q) in parts.iter().enumerate() {
            for (x, p) in parts.iter().enumerate() {
                if coarsens(p, q).unwrap() {
                    pairs += 1;
                }
                let closed = mobius_partition(q, p).unwrap();
                if closed != rec[y][x] {
                    issues.push(format!(
                        "mu({:?}, {:?}) = {closed}, recursion {}",
                        q.blocks(),
                        p.blocks(),
                        rec[y][x]
                    ));
                }
            }
        }
    }

    for n in 2..=8 {
        let v = random_set_function(n, &mut rng);
        let mut delta: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let rest: f64 = delta[1..].iter().sum();
        delta[0] = -rest;
        let w = separating_variant(&v, &delta).unwrap();
        let differs = w
            .values()
            .iter()
            .zip(v.values())
            .any(|(a, b)| (a - b).abs() > TOL);
        let hv = separable_from(&v).unwrap();
        let hw = separable_from(&w).unwrap();
        let worst = hv
            .values()
            .iter()
            .zip(hw.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !differs || worst > TOL {
            issues.push(format!(
                "n = {n}: w differs {differs}, max |h_w - h_v| = {worst:e}"
            ));
        }
    }
    Outcome::new(
        issues.is_empty(),
        format!(
            "{pairs} comparable pairs checked, {} issues {:?}",
            issues.len(),
            issues.first()
        ),
    )
}

fn scale_guard() -> (Outcome, Outcome) {
    let dense = timed(Some(Duration::from_secs(60)), || {
        let q = random_quadratic(16, 9).unwrap();
        let (p, trace) =
            local_search(&q, &init_uniform(16).unwrap(), &SolverOptions::default()).unwrap();
        Outcome::new(
            true,
            format!(
                "n = 16 dense: {} blocks, {} trace records",
                p.len(),
                trace.len()
            ),
        )
    });
    let restricted = timed(Some(Duration::from_secs(60)), || {
        let n = 40;
        let q = random_quadratic(n, 10).unwrap();
        let collection: Vec<Subset> = [0, 7, 14, 21, 28]
            .iter()
            .map(|&s| Subset::from_points(s..(s + 12).min(n)))
            .collect();
        let cover = init_restricted(&q, &collection, InitMode::Uniform).unwrap();
        let (p, trace) = local_search(&q, &cover, &SolverOptions::default()).unwrap();
        let selects = trace
            .iter()
            .filter(|r| matches!(r, TraceRecord::Select { .. }))
            .count();
        let certified = is_local_maximizer(&q, &embed_partition(&p), TOL).unwrap()
            && outlier_violations(&q, &p, TOL).unwrap().is_empty();
        Outcome::new(
            certified && p.blocks().iter().all(|b| b.len() <= 12),
            format!(
                "n = 40 restricted (blocks <= 12): {} blocks, {selects} selections, certified {certified}",
                p.len()
            ),
        )
    });
    (dense, restricted)
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Outcome)> = vec![
        (
            "1 example end-to-end",
            timed(Some(Duration::from_millis(10)), example_end_to_end),
        ),
        ("2 clique closed form", timed(None, clique_closed_form)),
        (
            "3 transform roundtrips",
            timed(Some(Duration::from_secs(5)), transform_roundtrips),
        ),
        ("4 gradient correctness", timed(None, gradient_correctness)),
        ("5 rounding guarantees", timed(None, roundup_guarantees)),
        (
            "6 partition dominance",
            timed(Some(Duration::from_secs(30)), corollary),
        ),
        (
            "7 local-maximizer certification",
            timed(None, certification),
        ),
        (
            "8 partition-lattice suite",
            timed(Some(Duration::from_secs(60)), appendix_suite),
        ),
    ];
    let (dense, restricted) = scale_guard();
    results.push((
        "9 scale guard",
        Outcome::new(
            dense.passed && restricted.passed,
            format!("{}; {}", dense.detail, restricted.detail),
        ),
    ));
    for (name, r) in &results {
        println!(
            "[{}] {name}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, r)| !r.passed)
        .map(|(name, _)| *name)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
