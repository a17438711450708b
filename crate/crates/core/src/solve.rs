//! Rounding, local search and local-maximizer certification.
//!
//! [`round_up`] moves points one at a time to a best (or worst) extreme
//! point of their simplex, which never decreases (increases) the global
//! score. [`local_search`] grows a partition block by block from a fuzzy
//! cover and then splits off outliers; its output is a local maximizer in
//! the sense that no single point can gain by reallocating its membership.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cover::{
    columns, first_partial_support, global_score_raw, normalize, point_score_raw, reduced_raw,
    FuzzyCover, Memberships, Partition,
};
use crate::error::{Error, Result};
use crate::score::{check_dense, check_mask_width, ClusterScore, ZERO_TOL};
use crate::subset::Subset;

/// Upper bound on `Σ_k 2^{|A_k|}` for restricted initializers.
pub const RESTRICTED_CAPACITY: usize = 1 << 22;

/// Tie-breaking rule among equally good subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestMask,
}

/// Order in which outliers are extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionOrder {
    /// Largest gain first, ties to the lowest point index.
    #[default]
    BestGainFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub tie_break: TieBreak,
    pub loop2_order: ExtractionOrder,
    /// Defaults to `4n` when unset.
    pub max_iterations: Option<usize>,
    /// Keep every candidate block's score in selection records.
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-9,
            tie_break: TieBreak::LowestMask,
            loop2_order: ExtractionOrder::BestGainFirst,
            max_iterations: None,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn iteration_limit(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(4 * n)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Options(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.iteration_limit(n) < n {
            return Err(Error::Options(format!(
                "max_iterations {} is below n = {n}",
                self.iteration_limit(n)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceRecord {
    /// A rounding step: `point` moved all its mass onto `subset`.
    RoundUp {
        point: usize,
        subset: Subset,
        reduced_score: f64,
        global_score: f64,
    },
    /// A first-loop selection of block `subset`.
    Select {
        iteration: usize,
        subset: Subset,
        candidate_sum: f64,
        global_score: f64,
        /// Every fractional candidate with its score, when recorded.
        candidates: Option<Vec<(Subset, f64)>>,
    },
    /// A second-loop extraction of `point` from `block`.
    Extract {
        iteration: usize,
        point: usize,
        block: Subset,
        gain: f64,
        global_score: f64,
        /// All eligible `(point, block, gain)` triples at this step.
        eligible: Vec<(usize, Subset, f64)>,
    },
}

impl TraceRecord {
    pub fn global_score(&self) -> f64 {
        match *self {
            TraceRecord::RoundUp { global_score, .. }
            | TraceRecord::Select { global_score, .. }
            | TraceRecord::Extract { global_score, .. } => global_score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    pub records: Vec<TraceRecord>,
}

impl SearchTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TraceRecord> {
        self.records.iter()
    }

    /// Blocks chosen by the first loop, in order.
    pub fn selections(&self) -> Vec<(Subset, f64)> {
        self.records
            .iter()
            .filter_map(|r| match *r {
                TraceRecord::Select {
                    subset,
                    candidate_sum,
                    ..
                } => Some((subset, candidate_sum)),
                _ => None,
            })
            .collect()
    }

    /// Outlier extractions `(point, block, gain)`, in order.
    pub fn extractions(&self) -> Vec<(usize, Subset, f64)> {
        self.records
            .iter()
            .filter_map(|r| match *r {
                TraceRecord::Extract {
                    point, block, gain, ..
                } => Some((point, block, gain)),
                _ => None,
            })
            .collect()
    }
}

fn check_size<S: ClusterScore + ?Sized>(score: &S, n: usize) -> Result<()> {
    if score.n() != n {
        return Err(Error::SizeMismatch {
            left: score.n(),
            right: n,
        });
    }
    Ok(())
}

/// Every point spreads `2^{1-n}` over each subset containing it.
pub fn init_uniform(n: usize) -> Result<FuzzyCover> {
    if n < 2 {
        return Err(Error::TooFewPoints { n, min: 2 });
    }
    check_dense("uniform initializer", n)?;
    let mass = 2f64.powi(1 - n as i32);
    let maps = (0..n)
        .map(|i| {
            Subset::full(n)
                .without(i)
                .subsets()
                .map(|b| (b.with(i), mass))
                .collect()
        })
        .collect();
    Ok(FuzzyCover::from_memberships(n, maps))
}

/// `q_i^A = w(A) / Σ_{B ∋ i} w(B)`.
pub fn init_score_proportional<S: ClusterScore + ?Sized>(score: &S) -> Result<FuzzyCover> {
    let n = score.n();
    check_dense("score-proportional initializer", n)?;
    let supports: Vec<Vec<Subset>> = (0..n)
        .map(|i| {
            Subset::full(n)
                .without(i)
                .subsets()
                .map(|b| b.with(i))
                .collect()
        })
        .collect();
    proportional(score, n, &supports)
}

fn proportional<S: ClusterScore + ?Sized>(
    score: &S,
    n: usize,
    supports: &[Vec<Subset>],
) -> Result<FuzzyCover> {
    let mut cache: BTreeMap<Subset, f64> = BTreeMap::new();
    let mut maps: Memberships = Vec::with_capacity(n);
    for (i, support) in supports.iter().enumerate() {
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for &a in support {
            let v = *cache.entry(a).or_insert_with(|| score.value(a));
            if v < 0.0 {
                return Err(Error::NegativeScore {
                    subset: a.to_string(),
                    value: v,
                });
            }
            total += v;
            if v > 0.0 {
                map.insert(a, v);
            }
        }
        if total <= 0.0 {
            return Err(Error::ZeroNormalizer { point: i + 1 });
        }
        for m in map.values_mut() {
            *m /= total;
        }
        normalize(&mut map, ZERO_TOL);
        maps.push(map);
    }
    Ok(FuzzyCover::from_memberships(n, maps))
}

/// How a restricted initializer spreads mass over its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Uniform,
    ScoreProportional,
}

/// Initial cover supported only on subsets of the given maximal sets.
///
/// Point `j` gets mass on every `B ∋ j` contained in some `A_k`, spread
/// uniformly or in proportion to `w(B)`.
pub fn init_restricted<S: ClusterScore + ?Sized>(
    score: &S,
    collection: &[Subset],
    mode: InitMode,
) -> Result<FuzzyCover> {
    let n = score.n();
    let supports = restricted_supports(n, collection)?;
    match mode {
        InitMode::Uniform => {
            let maps = supports
                .iter()
                .map(|s| {
                    let mass = 1.0 / s.len() as f64;
                    s.iter().map(|&a| (a, mass)).collect()
                })
                .collect();
            Ok(FuzzyCover::from_memberships(n, maps))
        }
        InitMode::ScoreProportional => proportional(score, n, &supports),
    }
}

/// Per point, the subsets containing it that fit inside a collection member.
pub fn restricted_supports(n: usize, collection: &[Subset]) -> Result<Vec<Vec<Subset>>> {
    check_mask_width("restricted support", n)?;
    let mut covered = Subset::EMPTY;
    let mut total = 0usize;
    for &a in collection {
        if a.is_empty() || a.span() > n {
            return Err(Error::SubsetOutOfRange { mask: a.mask(), n });
        }
        if a.len() > 30 {
            return Err(Error::Capacity {
                what: "restricted support block",
                n: a.len(),
                limit: 30,
            });
        }
        total = total.saturating_add(1 << a.len());
        covered = covered.union(a);
    }
    if let Some(i) = (0..n).find(|&i| !covered.contains(i)) {
        return Err(Error::Uncovered(i + 1));
    }
    if total > RESTRICTED_CAPACITY {
        return Err(Error::Capacity {
            what: "restricted support size",
            n: total,
            limit: RESTRICTED_CAPACITY,
        });
    }
    Ok((0..n)
        .map(|i| {
            let mut set = BTreeSet::new();
            for &a in collection.iter().filter(|a| a.contains(i)) {
                for b in a.without(i).subsets() {
                    set.insert(b.with(i));
                }
            }
            set.into_iter().collect()
        })
        .collect())
}

/// Subsets `A ∋ i` whose reduced score can differ from `w({i})`: those where
/// some other point holds mass, plus `{i}` itself. Since `{i}` has the lowest
/// mask among all subsets containing `i`, scanning these with lowest-mask
/// tie-breaking matches a scan over all of `2^N_i`.
fn response_candidates(maps: &Memberships, i: usize) -> BTreeSet<Subset> {
    let mut out = BTreeSet::from([Subset::singleton(i)]);
    for (j, map) in maps.iter().enumerate() {
        if j != i {
            out.extend(map.keys().filter(|a| a.contains(i)));
        }
    }
    out
}

fn best_response_raw<S: ClusterScore + ?Sized>(
    score: &S,
    maps: &Memberships,
    i: usize,
    direction: Direction,
) -> (Subset, f64) {
    let mut best: Option<(Subset, f64)> = None;
    for a in response_candidates(maps, i) {
        let v = reduced_raw(score, maps, i, a);
        let better = match (best, direction) {
            (None, _) => true,
            (Some((_, b)), Direction::Max) => v > b + ZERO_TOL,
            (Some((_, b)), Direction::Min) => v < b - ZERO_TOL,
        };
        if better {
            best = Some((a, v));
        }
    }
    best.expect("candidate set always holds the singleton")
}

/// The subset maximizing (or minimizing) `i`'s reduced score, lowest mask
/// on ties, with its value.
pub fn best_response<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
    direction: Direction,
) -> Result<(Subset, f64)> {
    check_size(score, cover.n())?;
    if i >= cover.n() {
        return Err(Error::InvalidCover(format!("no point {}", i + 1)));
    }
    Ok(best_response_raw(score, cover.memberships(), i, direction))
}

/// Rounds every point to an extreme point of its simplex, lowest index
/// first, choosing the best (`Max`) or worst (`Min`) subset for its reduced
/// score. At most `n` steps; each step moves `W` monotonically.
pub fn round_up<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    direction: Direction,
) -> Result<(FuzzyCover, SearchTrace)> {
    let n = cover.n();
    check_size(score, n)?;
    let mut maps = cover.memberships().clone();
    let mut trace = SearchTrace::default();
    while let Some(i) = (0..n).find(|&i| crate::cover::vertex_of(&maps[i]).is_none()) {
        let (a, v) = best_response_raw(score, &maps, i, direction);
        maps[i] = BTreeMap::from([(a, 1.0)]);
        trace.records.push(TraceRecord::RoundUp {
            point: i,
            subset: a,
            reduced_score: v,
            global_score: global_score_raw(score, &maps),
        });
    }
    Ok((FuzzyCover::from_memberships(n, maps), trace))
}

/// Grows a partition from `cover`, then extracts outliers.
///
/// The first loop repeatedly picks, among blocks with fractional total
/// membership, the one maximizing the sum of its members' reduced scores;
/// locks its members on it; and has every other point move the mass it held
/// on subsets meeting the block onto its remaining subsets in proportion to
/// their (positive) scores. The second loop splits `i` off its block `A`
/// while `w(A) < w({i}) + w(A \ i)`, best gain first.
pub fn local_search<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    options: &SolverOptions,
) -> Result<(Partition, SearchTrace)> {
    let n = cover.n();
    check_size(score, n)?;
    options.check(n)?;
    if let Some(a) = first_partial_support(cover.memberships(), 0.0) {
        return Err(Error::SupportCondition(a.to_string()));
    }
    let limit = options.iteration_limit(n);
    let tol = options.tolerance;
    let mut maps = cover.memberships().clone();
    let mut trace = SearchTrace::default();
    let mut iteration = 0usize;

    loop {
        let cols = columns(&maps);
        let mut best: Option<(Subset, f64)> = None;
        let mut recorded = options.record_trace.then(Vec::new);
        for (&a, coords) in &cols {
            let total: f64 = coords.iter().map(|&(_, m)| m).sum();
            if !(total > tol && total < a.len() as f64 - tol) {
                continue;
            }
            let sum = candidate_sum(score, coords);
            if let Some(r) = recorded.as_mut() {
                r.push((a, sum));
            }
            if best.is_none_or(|(_, b)| sum > b + ZERO_TOL) {
                best = Some((a, sum));
            }
        }
        let Some((chosen, sum)) = best else { break };
        iteration += 1;
        if iteration > limit {
            return Err(Error::IterationGuard { limit });
        }
        lock_block(score, &mut maps, chosen);
        debug_assert!(first_partial_support(&maps, 0.0).is_none());
        trace.records.push(TraceRecord::Select {
            iteration,
            subset: chosen,
            candidate_sum: sum,
            global_score: global_score_raw(score, &maps),
            candidates: recorded,
        });
    }

    let mut partition = settle(n, &maps)?;

    loop {
        let eligible = extraction_gains(score, &partition, tol);
        let pick = eligible
            .iter()
            .fold(None::<&(usize, Subset, f64)>, |acc, e| match acc {
                Some(b) if b.2 >= e.2 => Some(b),
                _ => Some(e),
            });
        let Some(&(point, block, gain)) = pick else {
            break;
        };
        iteration += 1;
        if iteration > limit {
            return Err(Error::IterationGuard { limit });
        }
        let mut blocks: Vec<Subset> = partition
            .blocks()
            .iter()
            .copied()
            .filter(|&b| b != block)
            .collect();
        blocks.push(Subset::singleton(point));
        blocks.push(block.without(point));
        partition = Partition::new(n, blocks)?;
        trace.records.push(TraceRecord::Extract {
            iteration,
            point,
            block,
            gain,
            global_score: partition.value(score),
            eligible,
        });
    }
    Ok((partition, trace))
}

fn candidate_sum<S: ClusterScore + ?Sized>(score: &S, coords: &[(usize, f64)]) -> f64 {
    let mut others = Vec::with_capacity(coords.len());
    coords
        .iter()
        .map(|&(i, _)| {
            others.clear();
            others.extend(coords.iter().copied().filter(|&(j, _)| j != i));
            score.reduced_sparse(i, &others)
        })
        .sum()
}

// Locks the members of `block` on it and moves every other point's mass off
// subsets meeting `block`.
fn lock_block<S: ClusterScore + ?Sized>(score: &S, maps: &mut Memberships, block: Subset) {
    for i in block.iter() {
        maps[i] = BTreeMap::from([(block, 1.0)]);
    }
    for (j, map) in maps.iter_mut().enumerate() {
        if block.contains(j) {
            continue;
        }
        let freed: f64 = map
            .iter()
            .filter(|(a, _)| a.intersects(block))
            .map(|(_, &m)| m)
            .sum();
        if freed <= 0.0 {
            continue;
        }
        map.retain(|a, _| !a.intersects(block));
        let weights: Vec<(Subset, f64)> = map
            .keys()
            .map(|&a| (a, score.value(a)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let denom: f64 = weights.iter().map(|&(_, w)| w).sum();
        if denom > 0.0 {
            for (a, w) in weights {
                *map.get_mut(&a).expect("weight keys come from map") += freed * w / denom;
            }
        } else {
            *map.entry(Subset::singleton(j)).or_insert(0.0) += freed;
        }
        normalize(map, ZERO_TOL);
    }
}

// Reads the partition off a cover whose blocks are all complete.
fn settle(n: usize, maps: &Memberships) -> Result<Partition> {
    let mut blocks = BTreeSet::new();
    for map in maps {
        let (&a, _) = map
            .iter()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(x.0)))
            .ok_or_else(|| Error::InvalidCover("point without mass".into()))?;
        blocks.insert(a);
    }
    Partition::new(n, blocks.into_iter().collect())
}

fn extraction_gains<S: ClusterScore + ?Sized>(
    score: &S,
    partition: &Partition,
    tol: f64,
) -> Vec<(usize, Subset, f64)> {
    let mut out = Vec::new();
    for &a in partition.blocks().iter().filter(|b| b.len() > 1) {
        let whole = score.value(a);
        for i in a.iter() {
            let gain = score.singleton(i) + score.value(a.without(i)) - whole;
            if gain > tol {
                out.push((i, a, gain));
            }
        }
    }
    out.sort_by_key(|&(i, _, _)| i);
    out
}

/// Pairs `(i, A)` with `i ∈ A ∈ P`, `|A| > 1`, where splitting `i` off
/// gains more than `tol`.
pub fn outlier_violations<S: ClusterScore + ?Sized>(
    score: &S,
    partition: &Partition,
    tol: f64,
) -> Result<Vec<(usize, Subset)>> {
    check_size(score, partition.n())?;
    Ok(extraction_gains(score, partition, tol)
        .into_iter()
        .map(|(i, a, _)| (i, a))
        .collect())
}

/// True iff no point can raise `W` by more than `tol` by reallocating its
/// own membership. `W_i` is linear in `q_i`, so comparing against the best
/// extreme point suffices.
pub fn is_local_maximizer<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    tol: f64,
) -> Result<bool> {
    Ok(local_slack(score, cover)?.iter().all(|&gap| gap <= tol))
}

/// Per point, `max_A w_{q_{-i}}(A) - W_i(q_i | q_{-i})` (non-negative up to
/// rounding).
pub fn local_slack<S: ClusterScore + ?Sized>(score: &S, cover: &FuzzyCover) -> Result<Vec<f64>> {
    check_size(score, cover.n())?;
    let maps = cover.memberships();
    Ok((0..cover.n())
        .map(|i| {
            let (_, best) = best_response_raw(score, maps, i, Direction::Max);
            best - point_score_raw(score, maps, i)
        })
        .collect())
}
