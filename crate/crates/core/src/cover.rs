//! Fuzzy covers: one membership distribution per point over the subsets that
//! contain it, and the global score they induce.
//!
//! A cover `q` assigns each point `i` a distribution `q_i` over the subsets
//! `A ∋ i`. Collecting the memberships `q^A = (q_i^A)_i` subset by subset gives
//! one point of the hypercube per subset, and the global score is
//! `W(q) = Σ_A f(q^A)` with `f` the multilinear extension of the score.
//!
//! Memberships are stored sparsely, so covers over restricted supports work
//! beyond the dense capacity.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::score::{check_dense, check_mask_width, ClusterScore, EQ_TOL, ZERO_TOL};
use crate::subset::Subset;

pub(crate) type Memberships = Vec<BTreeMap<Subset, f64>>;

/// A family of disjoint non-empty blocks covering `{0, .., n-1}`, kept sorted
/// by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Subset>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Subset>) -> Result<Self> {
        check_mask_width("partition", n)?;
        let mut seen = Subset::EMPTY;
        for &b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if b.span() > n {
                return Err(Error::InvalidPartition(format!(
                    "block {b} has points beyond n = {n}"
                )));
            }
            if b.intersects(seen) {
                return Err(Error::InvalidPartition(format!(
                    "block {b} overlaps another block"
                )));
            }
            seen = seen.union(b);
        }
        if seen != Subset::full(n) {
            let missing = (0..n).find(|&i| !seen.contains(i)).unwrap_or(0);
            return Err(Error::InvalidPartition(format!(
                "point {} is not covered",
                missing + 1
            )));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(Partition { n, blocks })
    }

    /// All singletons.
    pub fn finest(n: usize) -> Self {
        Partition {
            n,
            blocks: (0..n).map(Subset::singleton).collect(),
        }
    }

    /// The single block `{0, .., n-1}`.
    pub fn coarsest(n: usize) -> Self {
        let blocks = if n == 0 {
            vec![]
        } else {
            vec![Subset::full(n)]
        };
        Partition { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, i: usize) -> Subset {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(i))
            .expect("partition covers every point")
    }

    /// `Σ_{A ∈ P} w(A)`.
    pub fn value<S: ClusterScore + ?Sized>(&self, score: &S) -> f64 {
        self.blocks.iter().map(|&b| score.value(b)).sum()
    }
}

/// Unvalidated memberships, as read from a file or assembled by hand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoverDraft {
    pub n: usize,
    /// `memberships[i]` lists `(A, q_i^A)` pairs for point `i`.
    pub memberships: Vec<Vec<(Subset, f64)>>,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub valid: bool,
    pub simplex_sums: Vec<f64>,
    /// Entries `(i, A)` with `i ∉ A`.
    pub locality_violations: Vec<(usize, Subset)>,
    /// Entries with a negative, non-finite or oversized mass.
    pub bad_masses: Vec<(usize, Subset, f64)>,
    /// Entries whose subset reaches beyond `n`.
    pub out_of_range: Vec<(usize, Subset)>,
    /// Support condition on the raw masses (positive means `> 0`).
    pub support_exact_raw: bool,
    /// Support condition after pruning below `ε` and renormalizing; `None`
    /// when the draft is invalid.
    pub support_exact_pruned: Option<bool>,
    pub issues: Vec<String>,
}

/// Checks the simplex and locality constraints and reports the support
/// condition before and after pruning.
pub fn validate(draft: &CoverDraft) -> Diagnostics {
    let mut d = Diagnostics::default();
    let n = draft.n;
    if n == 0 {
        d.issues.push("empty cover".into());
    }
    if n > crate::subset::MAX_POINTS {
        d.issues.push(format!("n = {n} exceeds mask width"));
    }
    if draft.memberships.len() != n {
        d.issues.push(format!(
            "expected {n} membership lists, got {}",
            draft.memberships.len()
        ));
    }
    for (i, list) in draft.memberships.iter().enumerate() {
        let mut sum = 0.0;
        for &(a, mass) in list {
            if a.span() > n || a.is_empty() {
                d.out_of_range.push((i, a));
                d.issues
                    .push(format!("point {}: subset {a} is out of range", i + 1));
                continue;
            }
            if !a.contains(i) {
                d.locality_violations.push((i, a));
                if mass != 0.0 {
                    d.issues.push(format!(
                        "point {}: mass {mass} on subset {a} not containing it",
                        i + 1
                    ));
                }
            }
            if !(0.0..=1.0 + EQ_TOL).contains(&mass) {
                d.bad_masses.push((i, a, mass));
                d.issues
                    .push(format!("point {}: invalid mass {mass} on {a}", i + 1));
            }
            sum += mass;
        }
        if (sum - 1.0).abs() > EQ_TOL {
            d.issues
                .push(format!("point {}: simplex sum {sum} != 1", i + 1));
        }
        d.simplex_sums.push(sum);
    }
    let nonzero_locality = draft
        .memberships
        .iter()
        .enumerate()
        .any(|(i, list)| list.iter().any(|&(a, m)| !a.contains(i) && m != 0.0));
    d.valid = d.issues.is_empty() && !nonzero_locality;

    let raw: Vec<Vec<(Subset, f64)>> = draft.memberships.clone();
    d.support_exact_raw = support_exact_lists(&raw, 0.0);
    if d.valid {
        let maps = prune(draft, ZERO_TOL);
        d.support_exact_pruned = Some(support_exact_maps(&maps, 0.0));
    }
    d
}

fn prune(draft: &CoverDraft, eps: f64) -> Memberships {
    draft
        .memberships
        .iter()
        .map(|list| {
            let mut map = BTreeMap::new();
            for &(a, m) in list {
                *map.entry(a).or_insert(0.0) += m;
            }
            normalize(&mut map, eps);
            map
        })
        .collect()
}

pub(crate) fn normalize(map: &mut BTreeMap<Subset, f64>, eps: f64) {
    map.retain(|_, m| *m > eps);
    let total: f64 = map.values().sum();
    if total > 0.0 && total != 1.0 {
        for m in map.values_mut() {
            *m /= total;
        }
    }
}

fn support_exact_lists(lists: &[Vec<(Subset, f64)>], eps: f64) -> bool {
    let mut positive: BTreeMap<Subset, BTreeSet<usize>> = BTreeMap::new();
    for (i, list) in lists.iter().enumerate() {
        for &(a, m) in list {
            if m > eps && a.contains(i) {
                positive.entry(a).or_default().insert(i);
            }
        }
    }
    positive.iter().all(|(a, s)| s.len() == a.len())
}

fn support_exact_maps(maps: &Memberships, eps: f64) -> bool {
    first_partial_support(maps, eps).is_none()
}

pub(crate) fn first_partial_support(maps: &Memberships, eps: f64) -> Option<Subset> {
    let mut count: BTreeMap<Subset, usize> = BTreeMap::new();
    for map in maps {
        for (&a, &m) in map {
            if m > eps {
                *count.entry(a).or_insert(0) += 1;
            }
        }
    }
    count
        .into_iter()
        .find(|&(a, c)| c != a.len())
        .map(|(a, _)| a)
}

/// A validated fuzzy cover: every point's masses are local, at least `ε`,
/// and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyCover {
    n: usize,
    memberships: Memberships,
}

impl FuzzyCover {
    /// Validates the draft, prunes masses below `ε = 1e-12` and renormalizes.
    pub fn new(draft: &CoverDraft) -> Result<Self> {
        let d = validate(draft);
        if !d.valid {
            let msg = d
                .issues
                .first()
                .cloned()
                .unwrap_or_else(|| "locality violated".into());
            return Err(Error::InvalidCover(msg));
        }
        Ok(FuzzyCover {
            n: draft.n,
            memberships: prune(draft, ZERO_TOL),
        })
    }

    pub(crate) fn from_memberships(n: usize, memberships: Memberships) -> Self {
        debug_assert_eq!(memberships.len(), n);
        FuzzyCover { n, memberships }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Point `i`'s non-zero masses, ordered by subset mask.
    pub fn masses(&self, i: usize) -> &BTreeMap<Subset, f64> {
        &self.memberships[i]
    }

    pub fn mass(&self, i: usize, set: Subset) -> f64 {
        self.memberships[i].get(&set).copied().unwrap_or(0.0)
    }

    pub(crate) fn memberships(&self) -> &Memberships {
        &self.memberships
    }

    /// The subset carrying all of `i`'s mass, if `q_i` is an extreme point.
    pub fn vertex_of(&self, i: usize) -> Option<Subset> {
        vertex_of(&self.memberships[i])
    }

    pub fn is_vertex_cover(&self) -> bool {
        (0..self.n).all(|i| self.vertex_of(i).is_some())
    }

    /// Union of the supports of all points.
    pub fn support(&self) -> BTreeSet<Subset> {
        self.memberships
            .iter()
            .flat_map(|m| m.keys().copied())
            .collect()
    }

    /// The partition this cover sits on, if it is a partition vertex.
    pub fn to_partition(&self) -> Option<Partition> {
        let mut blocks = Vec::new();
        for i in 0..self.n {
            let a = self.vertex_of(i)?;
            if a.first() == Some(i) {
                blocks.push(a);
            }
        }
        let p = Partition::new(self.n, blocks).ok()?;
        (0..self.n)
            .all(|i| self.vertex_of(i) == Some(p.block_of(i)))
            .then_some(p)
    }

    /// Copy with point `i`'s distribution replaced.
    pub fn with_point(&self, i: usize, distribution: Vec<(Subset, f64)>) -> Result<Self> {
        let mut draft = self.to_draft();
        if i >= self.n {
            return Err(Error::InvalidCover(format!("no point {}", i + 1)));
        }
        draft.memberships[i] = distribution;
        FuzzyCover::new(&draft)
    }

    pub fn to_draft(&self) -> CoverDraft {
        CoverDraft {
            n: self.n,
            memberships: self
                .memberships
                .iter()
                .map(|m| m.iter().map(|(&a, &x)| (a, x)).collect())
                .collect(),
        }
    }
}

pub(crate) fn vertex_of(map: &BTreeMap<Subset, f64>) -> Option<Subset> {
    match map.iter().next() {
        Some((&a, &m)) if map.len() == 1 && (m - 1.0).abs() <= EQ_TOL => Some(a),
        _ => None,
    }
}

/// For every subset with positive mass, its members' `(point, mass)` pairs.
pub(crate) fn columns(maps: &Memberships) -> BTreeMap<Subset, Vec<(usize, f64)>> {
    let mut cols: BTreeMap<Subset, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, map) in maps.iter().enumerate() {
        for (&a, &m) in map {
            cols.entry(a).or_default().push((i, m));
        }
    }
    cols
}

pub(crate) fn global_score_raw<S: ClusterScore + ?Sized>(score: &S, maps: &Memberships) -> f64 {
    columns(maps)
        .values()
        .map(|coords| score.mle_sparse(coords))
        .sum()
}

/// `w_{q_{-i}}(A)` read off the memberships of the other members of `A`.
pub(crate) fn reduced_raw<S: ClusterScore + ?Sized>(
    score: &S,
    maps: &Memberships,
    i: usize,
    set: Subset,
) -> f64 {
    let others: Vec<(usize, f64)> = set
        .without(i)
        .iter()
        .filter_map(|j| maps[j].get(&set).map(|&m| (j, m)))
        .collect();
    score.reduced_sparse(i, &others)
}

fn check_score<S: ClusterScore + ?Sized>(score: &S, cover: &FuzzyCover) -> Result<()> {
    if score.n() != cover.n() {
        return Err(Error::SizeMismatch {
            left: score.n(),
            right: cover.n(),
        });
    }
    Ok(())
}

fn check_point(cover: &FuzzyCover, i: usize) -> Result<()> {
    if i >= cover.n() {
        return Err(Error::InvalidCover(format!(
            "point index {} out of range",
            i + 1
        )));
    }
    Ok(())
}

/// `W(q) = Σ_A f(q^A)`.
pub fn global_score<S: ClusterScore + ?Sized>(score: &S, cover: &FuzzyCover) -> Result<f64> {
    check_score(score, cover)?;
    Ok(global_score_raw(score, &cover.memberships))
}

/// Per-subset terms `f(q^A)` of the global score, for subsets with mass.
pub fn score_contributions<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
) -> Result<Vec<(Subset, f64)>> {
    check_score(score, cover)?;
    Ok(columns(&cover.memberships)
        .into_iter()
        .map(|(a, coords)| (a, score.mle_sparse(&coords)))
        .collect())
}

/// The reduced score `w_{q_{-i}}` on every subset containing `i` (dense,
/// `n ≤ 20`). This is also the `i`-gradient of `W`.
pub fn reduced_score<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
) -> Result<BTreeMap<Subset, f64>> {
    check_score(score, cover)?;
    check_point(cover, i)?;
    check_dense("reduced score", cover.n())?;
    let rest = Subset::full(cover.n()).without(i);
    Ok(rest
        .subsets()
        .map(|b| {
            let a = b.with(i);
            (a, reduced_raw(score, &cover.memberships, i, a))
        })
        .collect())
}

/// A single entry `w_{q_{-i}}(A)` of the reduced score.
pub fn reduced_value<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
    set: Subset,
) -> Result<f64> {
    check_score(score, cover)?;
    check_member(cover.n(), i, set)?;
    Ok(reduced_raw(score, &cover.memberships, i, set))
}

fn check_member(n: usize, i: usize, set: Subset) -> Result<()> {
    if set.span() > n {
        return Err(Error::SubsetOutOfRange {
            mask: set.mask(),
            n,
        });
    }
    if !set.contains(i) {
        return Err(Error::NotMember {
            point: i + 1,
            subset: set.to_string(),
        });
    }
    Ok(())
}

/// `W_i(q_i | q_{-i}) = ⟨q_i, w_{q_{-i}}⟩`.
pub fn point_score<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
) -> Result<f64> {
    check_score(score, cover)?;
    check_point(cover, i)?;
    Ok(point_score_raw(score, &cover.memberships, i))
}

pub(crate) fn point_score_raw<S: ClusterScore + ?Sized>(
    score: &S,
    maps: &Memberships,
    i: usize,
) -> f64 {
    maps[i]
        .iter()
        .map(|(&a, &m)| m * reduced_raw(score, maps, i, a))
        .sum()
}

/// `W_{-i}(q_{-i})`: the global score with `i`'s distribution nulled.
pub fn complement_score<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
) -> Result<f64> {
    check_score(score, cover)?;
    check_point(cover, i)?;
    let mut maps = cover.memberships.clone();
    maps[i].clear();
    Ok(global_score_raw(score, &maps))
}

/// The `(i, A)`-derivative: `W` with all of `i`'s mass on `A`, minus `W` with
/// `i`'s distribution nulled.
pub fn derivative<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    i: usize,
    set: Subset,
) -> Result<f64> {
    check_score(score, cover)?;
    check_member(cover.n(), i, set)?;
    let mut maps = cover.memberships.clone();
    maps[i] = BTreeMap::from([(set, 1.0)]);
    let upper = global_score_raw(score, &maps);
    maps[i].clear();
    let lower = global_score_raw(score, &maps);
    Ok(upper - lower)
}

/// Every `(i, A)`-derivative. Without `support`, all `n 2^{n-1}` entries are
/// produced (`n ≤ 20`); with it, only entries for the listed subsets.
pub fn full_gradient<S: ClusterScore + ?Sized>(
    score: &S,
    cover: &FuzzyCover,
    support: Option<&[Subset]>,
) -> Result<BTreeMap<(usize, Subset), f64>> {
    check_score(score, cover)?;
    let n = cover.n();
    let mut out = BTreeMap::new();
    match support {
        None => {
            check_dense("full gradient", n)?;
            for i in 0..n {
                for (a, v) in reduced_score(score, cover, i)? {
                    out.insert((i, a), v);
                }
            }
        }
        Some(sets) => {
            for &a in sets {
                if a.span() > n || a.is_empty() {
                    return Err(Error::SubsetOutOfRange { mask: a.mask(), n });
                }
                for i in a.iter() {
                    out.insert((i, a), reduced_raw(score, &cover.memberships, i, a));
                }
            }
        }
    }
    Ok(out)
}

/// The vertex cover `p_i^A = 1` for the block `A ∋ i`.
pub fn embed_partition(partition: &Partition) -> FuzzyCover {
    let n = partition.n();
    let mut maps: Memberships = vec![BTreeMap::new(); n];
    for &b in partition.blocks() {
        for i in b.iter() {
            maps[i].insert(b, 1.0);
        }
    }
    FuzzyCover::from_memberships(n, maps)
}

/// True iff every subset's positive-mass members are none or all of it.
pub fn support_condition(cover: &FuzzyCover) -> bool {
    support_exact_maps(&cover.memberships, 0.0)
}
