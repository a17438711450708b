//! Brute-force ground truth for small instances: exhaustive search over
//! partitions and uniform sampling of fuzzy covers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::cover::{global_score, normalize, support_condition, FuzzyCover, Partition};
use crate::error::{Error, Result};
use crate::lattice::enumerate_partitions;
use crate::score::{ClusterScore, QuadraticScore, SimilarityMatrix, EQ_TOL, ZERO_TOL};
use crate::solve::{
    init_uniform, local_search, restricted_supports, round_up, Direction, SolverOptions,
};
use crate::subset::Subset;

pub const BRUTE_FORCE_CAPACITY: usize = 10;
pub const SAMPLING_CAPACITY: usize = 16;
pub const CHECK_CAPACITY: usize = 8;

fn check_capacity(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Capacity { what, n, limit });
    }
    Ok(())
}

/// 1-based member lists, one per block.
pub fn block_lists(p: &Partition) -> Vec<Vec<usize>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|i| i + 1).collect())
        .collect()
}

/// The partition maximizing `Σ_{A ∈ P} w(A)`.
///
/// Among partitions within `1e-9` of the maximum the one latest in
/// lexicographic restricted-growth order wins, so an additive score yields
/// the finest partition.
pub fn best_partition_bruteforce<S: ClusterScore + ?Sized>(score: &S) -> Result<(Partition, f64)> {
    let n = score.n();
    check_capacity("brute-force partition search", n, BRUTE_FORCE_CAPACITY)?;
    let mut cache: BTreeMap<Subset, f64> = BTreeMap::new();
    let scored: Vec<(Partition, f64)> = enumerate_partitions(n)?
        .iter()
        .map(|c| {
            let p = c.to_partition();
            let v = p
                .blocks()
                .iter()
                .map(|&b| *cache.entry(b).or_insert_with(|| score.value(b)))
                .sum();
            (p, v)
        })
        .collect();
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .into_iter()
        .rev()
        .find(|s| s.1 >= max - EQ_TOL)
        .ok_or(Error::TooFewPoints { n, min: 1 })
}

/// A cover with each point's distribution drawn uniformly from its simplex
/// (normalized standard exponentials), over all subsets containing it or
/// only those inside some member of `collection`.
///
/// The flag is the support condition of the draw. Both support families
/// are closed under taking subsets, so it fails only if pruning drops a
/// mass.
pub fn random_cover(
    n: usize,
    seed: u64,
    collection: Option<&[Subset]>,
) -> Result<(FuzzyCover, bool)> {
    if n == 0 {
        return Err(Error::TooFewPoints { n, min: 1 });
    }
    let supports = match collection {
        Some(c) => restricted_supports(n, c)?,
        None => {
            check_capacity("dense random cover", n, SAMPLING_CAPACITY)?;
            (0..n)
                .map(|i| {
                    Subset::full(n)
                        .without(i)
                        .subsets()
                        .map(|b| b.with(i))
                        .collect()
                })
                .collect()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = supports
        .iter()
        .map(|support| {
            let mut map: BTreeMap<Subset, f64> = support
                .iter()
                .map(|&a| (a, rng.sample::<f64, _>(Exp1)))
                .collect();
            normalize(&mut map, ZERO_TOL);
            map
        })
        .collect();
    let cover = FuzzyCover::from_memberships(n, maps);
    let exact = support_condition(&cover);
    Ok((cover, exact))
}

/// Symmetric similarities uniform on `[0, 1]` with unit diagonal.
pub fn random_similarity(n: usize, seed: u64) -> Result<SimilarityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = rng.random();
            entries[i * n + j] = s;
            entries[j * n + i] = s;
        }
    }
    SimilarityMatrix::new(n, entries)
}

pub fn random_quadratic(n: usize, seed: u64) -> Result<QuadraticScore> {
    QuadraticScore::from_similarity(&random_similarity(n, seed)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub best_partition: Vec<Vec<usize>>,
    pub best_score: f64,
    pub samples_checked: usize,
    pub max_cover_score_sampled: f64,
    pub max_rounded_score: f64,
    /// Sampled or rounded covers scoring above the best partition.
    pub violations: Vec<String>,
    /// Samples breaking `W(min rounding) ≤ W(q) ≤ W(max rounding)`.
    pub sandwich_violations: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.sandwich_violations.is_empty()
    }
}

/// The brute-force optimum alone, with no samples (`n ≤ 10`).
pub fn brute_force_report<S: ClusterScore + ?Sized>(score: &S) -> Result<OracleReport> {
    let (best, best_score) = best_partition_bruteforce(score)?;
    Ok(OracleReport {
        n: score.n(),
        best_partition: block_lists(&best),
        best_score,
        samples_checked: 0,
        max_cover_score_sampled: f64::NEG_INFINITY,
        max_rounded_score: f64::NEG_INFINITY,
        violations: Vec::new(),
        sandwich_violations: Vec::new(),
    })
}

/// Checks that no sampled cover, nor its rounding, beats the best
/// partition, and that both roundings bracket each sample.
pub fn corollary_check<S: ClusterScore + ?Sized>(
    score: &S,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    let n = score.n();
    check_capacity("corollary check", n, CHECK_CAPACITY)?;
    let mut report = brute_force_report(score)?;
    let best_score = report.best_score;
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let (q, _) = random_cover(n, seeds.random(), None)?;
        let w = global_score(score, &q)?;
        let (hi, _) = round_up(score, &q, Direction::Max)?;
        let (lo, _) = round_up(score, &q, Direction::Min)?;
        let w_hi = global_score(score, &hi)?;
        let w_lo = global_score(score, &lo)?;
        report.samples_checked += 1;
        report.max_cover_score_sampled = report.max_cover_score_sampled.max(w);
        report.max_rounded_score = report.max_rounded_score.max(w_hi);
        if w > best_score + EQ_TOL {
            report.violations.push(format!(
                "sample {k}: W = {w} exceeds best partition {best_score}"
            ));
        }
        if w_hi > best_score + EQ_TOL {
            report.violations.push(format!(
                "sample {k}: rounded W = {w_hi} exceeds best partition {best_score}"
            ));
        }
        if w_lo > w + EQ_TOL || w > w_hi + EQ_TOL {
            report.sandwich_violations.push(format!(
                "sample {k}: min rounding {w_lo}, sample {w}, max rounding {w_hi}"
            ));
        }
    }
    Ok(report)
}

/// Local search against brute force over random quadratic instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSurvey {
    pub instances: usize,
    pub optimal: usize,
    /// `W(best) - W(local search)` per instance.
    pub gaps: Vec<f64>,
    /// Counts of gaps in `[0, 1e-9]`, `(1e-9, 0.01]`, `(0.01, 0.1]`, `(0.1, 1]`, `(1, ∞)`.
    pub histogram: [usize; 5],
    /// Instances where local search beat the brute-force optimum.
    pub violations: Vec<String>,
}

/// Runs local search from the uniform cover on `instances` random
/// quadratic scores with `n` drawn from `sizes`.
pub fn gap_survey(
    instances: usize,
    sizes: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<GapSurvey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut survey = GapSurvey {
        instances,
        optimal: 0,
        gaps: Vec::with_capacity(instances),
        histogram: [0; 5],
        violations: Vec::new(),
    };
    for k in 0..instances {
        let n = rng.random_range(sizes.clone());
        check_capacity("gap survey", n, CHECK_CAPACITY)?;
        let score = random_quadratic(n, rng.random())?;
        let (_, best) = best_partition_bruteforce(&score)?;
        let (p, _) = local_search(&score, &init_uniform(n)?, &SolverOptions::default())?;
        let gap = best - p.value(&score);
        if gap < -EQ_TOL {
            survey.violations.push(format!(
                "instance {k} (n = {n}): local search exceeds optimum by {}",
                -gap
            ));
        }
        let bin = match gap {
            g if g <= EQ_TOL => 0,
            g if g <= 0.01 => 1,
            g if g <= 0.1 => 2,
            g if g <= 1.0 => 3,
            _ => 4,
        };
        survey.histogram[bin] += 1;
        if bin == 0 {
            survey.optimal += 1;
        }
        survey.gaps.push(gap);
    }
    Ok(survey)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::ScoreFunction;

    fn example() -> ScoreFunction {
        ScoreFunction::from_values(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap()
    }

    #[test]
    fn example_best_partition() {
        let (p, v) = best_partition_bruteforce(&example()).unwrap();
        assert_eq!(block_lists(&p), vec![vec![1, 2], vec![3]]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_prefers_finest() {
        let c = [0.3, 0.1, 0.7, 0.2];
        let v = ScoreFunction::from_fn(4, |a| a.iter().map(|i| c[i]).sum()).unwrap();
        let (p, _) = best_partition_bruteforce(&v).unwrap();
        assert_eq!(p, Partition::finest(4));
    }

    #[test]
    fn clique_kept_together() {
        let a = Subset::from_points([0, 2, 4]);
        let s: Vec<f64> = (0..25)
            .map(|k| {
                let (i, j) = (k / 5, k % 5);
                f64::from(i == j || (a.contains(i) && a.contains(j)))
            })
            .collect();
        let q = QuadraticScore::from_similarity(&SimilarityMatrix::new(5, s).unwrap()).unwrap();
        let (p, _) = best_partition_bruteforce(&q).unwrap();
        assert!(p.blocks().iter().any(|b| a.is_subset_of(*b)), "{p:?}");
    }

    #[test]
    fn capacity_guards() {
        let q = random_quadratic(11, 1).unwrap();
        assert!(matches!(
            best_partition_bruteforce(&q),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            random_cover(17, 0, None),
            Err(Error::Capacity { .. })
        ));
        assert!(corollary_check(&random_quadratic(9, 1).unwrap(), 1, 0).is_err());
    }

    #[test]
    fn random_cover_is_deterministic_and_normalized() {
        let (a, _) = random_cover(5, 9, None).unwrap();
        let (b, _) = random_cover(5, 9, None).unwrap();
        assert_eq!(a, b);
        for i in 0..5 {
            let total: f64 = a.masses(i).values().sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(a.masses(i).keys().all(|s| s.contains(i)));
        }
        let (c, _) = random_cover(5, 10, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn restricted_random_cover() {
        let coll = [Subset::from_points([0, 1]), Subset::from_points([1, 2, 3])];
        let (q, exact) = random_cover(4, 3, Some(&coll)).unwrap();
        assert!(exact);
        for i in 0..4 {
            for s in q.masses(i).keys() {
                assert!(coll.iter().any(|c| s.is_subset_of(*c)));
            }
        }
    }

    #[test]
    fn example_samples_bounded() {
        let r = corollary_check(&example(), 1000, 5).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.samples_checked, 1000);
        assert!(r.max_cover_score_sampled < 1.0 + 1e-9);
    }

    #[test]
    fn two_points() {
        let v = ScoreFunction::from_values(2, vec![0.0, 0.4, 0.1, 0.3]).unwrap();
        let (p, best) = best_partition_bruteforce(&v).unwrap();
        assert_eq!(p, Partition::finest(2));
        assert!((best - 0.5).abs() < 1e-12);
        let w = ScoreFunction::from_values(2, vec![0.0, 0.4, 0.1, 0.9]).unwrap();
        assert_eq!(
            best_partition_bruteforce(&w).unwrap().0,
            Partition::coarsest(2)
        );
    }

    #[test]
    fn survey_never_beats_optimum() {
        let s = gap_survey(20, 3..=6, 11).unwrap();
        assert!(s.violations.is_empty());
        assert_eq!(s.histogram.iter().sum::<usize>(), 20);
    }
}
