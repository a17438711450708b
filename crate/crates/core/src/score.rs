//! Cluster-score set functions, their Möbius inversions and multilinear
//! extensions.
//!
//! A cluster score `w` assigns a worth to every non-empty subset of the
//! points. Its Möbius inversion `μ` is the unique coefficient family with
//! `w(B) = Σ_{A ⊆ B} μ(A)`, and the multilinear extension
//! `f(q) = Σ_A μ(A) Π_{i ∈ A} q_i` interpolates `w` over the unit hypercube.
//!
//! Two representations are provided. [`ScoreFunction`] stores all `2^n`
//! values and coefficients densely and is capped at [`DENSE_CAPACITY`]
//! points. [`QuadraticScore`] stores only singleton and pair coefficients and
//! is what a similarity matrix turns into.

use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_POINTS};

/// Largest `n` for which `2^n` tables are materialized.
pub const DENSE_CAPACITY: usize = 20;

/// Default tolerance for equality comparisons.
pub const EQ_TOL: f64 = 1e-9;

/// Masses and coefficients below this magnitude count as zero.
pub const ZERO_TOL: f64 = 1e-12;

pub(crate) fn check_dense(what: &'static str, n: usize) -> Result<()> {
    if n > DENSE_CAPACITY {
        return Err(Error::Capacity {
            what,
            n,
            limit: DENSE_CAPACITY,
        });
    }
    Ok(())
}

pub(crate) fn check_mask_width(what: &'static str, n: usize) -> Result<()> {
    if n > MAX_POINTS {
        return Err(Error::Capacity {
            what,
            n,
            limit: MAX_POINTS,
        });
    }
    Ok(())
}

/// Symmetric matrix of pairwise similarities in `[0, 1]` with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from row-major entries, checking symmetry, range and
    /// the unit diagonal.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        row: i,
                        col: j,
                        value: v,
                        range: "[0, 1]",
                    });
                }
            }
        }
        for i in 0..n {
            let d = entries[i * n + i];
            if (d - 1.0).abs() > ZERO_TOL {
                return Err(Error::Diagonal {
                    index: i,
                    value: d,
                    expected: 1.0,
                });
            }
            for j in i + 1..n {
                let (upper, lower) = (entries[i * n + j], entries[j * n + i]);
                if (upper - lower).abs() > ZERO_TOL {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        upper,
                        lower,
                    });
                }
            }
        }
        Ok(SimilarityMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = square_size(rows)?;
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }
}

fn square_size(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
    }
    Ok(n)
}

/// How raw distances are mapped into `[0, 1]` before taking `1 - d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the largest distance.
    MaxNormalize,
    /// Distances are already in `[0, 1]`.
    AlreadyNormalized,
}

/// Converts a distance matrix into similarities `S_ij = 1 - d(i, j)`.
pub fn similarity_from_distances(
    distances: &[Vec<f64>],
    mode: Normalization,
) -> Result<SimilarityMatrix> {
    let n = square_size(distances)?;
    let mut d_max = 0.0f64;
    for (i, row) in distances.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::OutOfRange {
                    row: i,
                    col: j,
                    value: d,
                    range: "[0, inf)",
                });
            }
            if mode == Normalization::AlreadyNormalized && d > 1.0 {
                return Err(Error::OutOfRange {
                    row: i,
                    col: j,
                    value: d,
                    range: "[0, 1]",
                });
            }
            d_max = d_max.max(d);
        }
    }
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        if distances[i][i].abs() > ZERO_TOL {
            return Err(Error::Diagonal {
                index: i,
                value: distances[i][i],
                expected: 0.0,
            });
        }
        for j in i + 1..n {
            let (upper, lower) = (distances[i][j], distances[j][i]);
            if (upper - lower).abs() > ZERO_TOL {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    upper,
                    lower,
                });
            }
        }
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                1.0
            } else {
                match mode {
                    Normalization::MaxNormalize if d_max == 0.0 => 1.0,
                    Normalization::MaxNormalize => 1.0 - distances[i][j] / d_max,
                    Normalization::AlreadyNormalized => 1.0 - distances[i][j],
                }
            };
        }
    }
    // symmetrize exactly
    for i in 0..n {
        for j in i + 1..n {
            entries[j * n + i] = entries[i * n + j];
        }
    }
    SimilarityMatrix::new(n, entries)
}

/// Evaluation interface shared by every score representation.
///
/// Sparse points of the hypercube are passed as `(point, coordinate)` lists
/// holding the non-zero coordinates only, each point at most once.
pub trait ClusterScore {
    fn n(&self) -> usize;

    /// `w(A)`; the caller guarantees `A ⊆ {0, .., n-1}`.
    fn value(&self, set: Subset) -> f64;

    /// Multilinear extension at the sparse point `coords`.
    fn mle_sparse(&self, coords: &[(usize, f64)]) -> f64;

    /// `Σ_{B ⊆ others} μ(B ∪ {i}) Π_{j ∈ B} x_j`, with `i` not in `others`.
    fn reduced_sparse(&self, i: usize, others: &[(usize, f64)]) -> f64;

    fn singleton(&self, i: usize) -> f64 {
        self.value(Subset::singleton(i))
    }
}

impl<T: ClusterScore + ?Sized> ClusterScore for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn value(&self, set: Subset) -> f64 {
        (**self).value(set)
    }
    fn mle_sparse(&self, coords: &[(usize, f64)]) -> f64 {
        (**self).mle_sparse(coords)
    }
    fn reduced_sparse(&self, i: usize, others: &[(usize, f64)]) -> f64 {
        (**self).reduced_sparse(i, others)
    }
    fn singleton(&self, i: usize) -> f64 {
        (**self).singleton(i)
    }
}

/// `w(A)` with a range check on the mask.
pub fn evaluate<S: ClusterScore + ?Sized>(score: &S, set: Subset) -> Result<f64> {
    let n = score.n();
    if set.span() > n {
        return Err(Error::SubsetOutOfRange {
            mask: set.mask(),
            n,
        });
    }
    Ok(if set.is_empty() {
        0.0
    } else {
        score.value(set)
    })
}

/// Multilinear extension at a dense point `q ∈ [0, 1]^n`.
pub fn mle_evaluate<S: ClusterScore + ?Sized>(score: &S, q: &[f64]) -> Result<f64> {
    if q.len() != score.n() {
        return Err(Error::LengthMismatch {
            expected: score.n(),
            got: q.len(),
        });
    }
    let mut coords = Vec::new();
    for (index, &value) in q.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Coordinate { index, value });
        }
        if value != 0.0 {
            coords.push((index, value));
        }
    }
    Ok(score.mle_sparse(&coords))
}

/// In-place fast Möbius transform over the subset lattice:
/// `μ(A) = Σ_{B ⊆ A} (-1)^{|A \ B|} w(B)`.
pub fn mobius_transform(values: &[f64]) -> Result<Vec<f64>> {
    let n = table_width(values.len())?;
    let mut out = values.to_vec();
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..out.len() {
            if mask & step != 0 {
                out[mask] -= out[mask ^ step];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`mobius_transform`]: `w(B) = Σ_{A ⊆ B} μ(A)`.
pub fn zeta_transform(mobius: &[f64]) -> Result<Vec<f64>> {
    let n = table_width(mobius.len())?;
    let mut out = mobius.to_vec();
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..out.len() {
            if mask & step != 0 {
                out[mask] += out[mask ^ step];
            }
        }
    }
    Ok(out)
}

fn table_width(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::Parse(format!(
            "set-function table length {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    check_dense("dense set function", n)?;
    Ok(n)
}

/// Dense set function with its Möbius inversion, `n ≤ 20`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFunction {
    n: usize,
    values: Vec<f64>,
    mobius: Vec<f64>,
    degree: usize,
}

impl ScoreFunction {
    /// From the `2^n` values indexed by mask; `values[0]` must be zero.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_dense("dense score function", n)?;
        if values.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                got: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::NonZeroEmpty(values[0]));
        }
        let mobius = mobius_transform(&values)?;
        Ok(Self::assemble(n, values, mobius))
    }

    /// From the `2^n` Möbius coefficients; `mobius[0]` must be zero.
    pub fn from_mobius(n: usize, mobius: Vec<f64>) -> Result<Self> {
        check_dense("dense score function", n)?;
        if mobius.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                got: mobius.len(),
            });
        }
        if mobius[0] != 0.0 {
            return Err(Error::NonZeroEmpty(mobius[0]));
        }
        let values = zeta_transform(&mobius)?;
        Ok(Self::assemble(n, values, mobius))
    }

    /// Tabulates `f` on every non-empty subset.
    pub fn from_fn(n: usize, mut f: impl FnMut(Subset) -> f64) -> Result<Self> {
        check_dense("dense score function", n)?;
        let values = (0..1u64 << n)
            .map(|m| if m == 0 { 0.0 } else { f(Subset(m)) })
            .collect();
        Self::from_values(n, values)
    }

    fn assemble(n: usize, mut values: Vec<f64>, mut mobius: Vec<f64>) -> Self {
        values[0] = 0.0;
        mobius[0] = 0.0;
        let degree = mobius
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > ZERO_TOL)
            .map(|(m, _)| m.count_ones() as usize)
            .max()
            .unwrap_or(0);
        ScoreFunction {
            n,
            values,
            mobius,
            degree,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mobius(&self) -> &[f64] {
        &self.mobius
    }

    pub fn mobius_coeff(&self, set: Subset) -> f64 {
        self.mobius[set.mask() as usize]
    }

    /// Largest subset size carrying a non-zero coefficient.
    pub fn degree(&self) -> usize {
        self.degree
    }
}

impl ClusterScore for ScoreFunction {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn value(&self, set: Subset) -> f64 {
        self.values[set.mask() as usize]
    }

    fn mle_sparse(&self, coords: &[(usize, f64)]) -> f64 {
        let mut acc = 0.0;
        product_walk(&self.mobius, coords, 0, 0, 1.0, &mut acc);
        acc
    }

    fn reduced_sparse(&self, i: usize, others: &[(usize, f64)]) -> f64 {
        let base = 1u64 << i;
        let mut acc = self.mobius[base as usize];
        product_walk(&self.mobius, others, 0, base, 1.0, &mut acc);
        acc
    }
}

// Accumulates μ(B ∪ base) Π x_j over the non-empty B drawn from coords[k..].
fn product_walk(
    mobius: &[f64],
    coords: &[(usize, f64)],
    k: usize,
    mask: u64,
    prod: f64,
    acc: &mut f64,
) {
    for (off, &(j, x)) in coords[k..].iter().enumerate() {
        let m = mask | 1u64 << j;
        let p = prod * x;
        *acc += p * mobius[m as usize];
        product_walk(mobius, coords, k + off + 1, m, p, acc);
    }
}

/// Score whose Möbius inversion vanishes beyond pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticScore {
    n: usize,
    singletons: Vec<f64>,
    pairs: Vec<f64>,
}

#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

impl QuadraticScore {
    /// `pairs` lists `μ({i,j})` for `i < j` in row-major upper-triangular order.
    pub fn from_coefficients(n: usize, singletons: Vec<f64>, pairs: Vec<f64>) -> Result<Self> {
        if singletons.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: singletons.len(),
            });
        }
        let expected = n * n.saturating_sub(1) / 2;
        if pairs.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: pairs.len(),
            });
        }
        Ok(QuadraticScore {
            n,
            singletons,
            pairs,
        })
    }

    /// The quadratic cluster score induced by a similarity matrix.
    ///
    /// Pairs score their similarity, `w({i,j}) = S_ij`, and each singleton
    /// collects half of the average dissimilarity to every other point,
    /// `w({i}) = Σ_{l ≠ i} (1 - S_il) / (2(n-1))`.
    pub fn from_similarity(s: &SimilarityMatrix) -> Result<Self> {
        let n = s.n();
        if n < 2 {
            return Err(Error::TooFewPoints { n, min: 2 });
        }
        let denom = 2.0 * (n - 1) as f64;
        let singletons: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&l| l != i)
                    .map(|l| (1.0 - s.get(i, l)) / denom)
                    .sum()
            })
            .collect();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push(s.get(i, j) - singletons[i] - singletons[j]);
            }
        }
        Ok(QuadraticScore {
            n,
            singletons,
            pairs,
        })
    }

    pub fn singleton_coeff(&self, i: usize) -> f64 {
        self.singletons[i]
    }

    pub fn pair_coeff(&self, i: usize, j: usize) -> f64 {
        self.pairs[pair_index(self.n, i, j)]
    }

    pub fn singleton_coeffs(&self) -> &[f64] {
        &self.singletons
    }

    pub fn pair_coeffs(&self) -> &[f64] {
        &self.pairs
    }

    /// Dense equivalent, `n ≤ 20`.
    pub fn to_dense(&self) -> Result<ScoreFunction> {
        check_dense("dense score function", self.n)?;
        let mut mobius = vec![0.0; 1 << self.n];
        for i in 0..self.n {
            mobius[1 << i] = self.singletons[i];
            for j in i + 1..self.n {
                mobius[1 << i | 1 << j] = self.pair_coeff(i, j);
            }
        }
        ScoreFunction::from_mobius(self.n, mobius)
    }
}

impl ClusterScore for QuadraticScore {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, set: Subset) -> f64 {
        let members: Vec<usize> = set.iter().collect();
        let mut acc = 0.0;
        for (k, &i) in members.iter().enumerate() {
            acc += self.singletons[i];
            for &j in &members[k + 1..] {
                acc += self.pair_coeff(i, j);
            }
        }
        acc
    }

    fn mle_sparse(&self, coords: &[(usize, f64)]) -> f64 {
        let mut acc = 0.0;
        for (k, &(i, x)) in coords.iter().enumerate() {
            acc += x * self.singletons[i];
            for &(j, y) in &coords[k + 1..] {
                acc += x * y * self.pair_coeff(i, j);
            }
        }
        acc
    }

    fn reduced_sparse(&self, i: usize, others: &[(usize, f64)]) -> f64 {
        others.iter().fold(self.singletons[i], |acc, &(j, x)| {
            acc + x * self.pair_coeff(i, j)
        })
    }

    fn singleton(&self, i: usize) -> f64 {
        self.singletons[i]
    }
}

/// Either score representation, for callers that pick one at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum Score {
    Dense(ScoreFunction),
    Quadratic(QuadraticScore),
}

impl From<ScoreFunction> for Score {
    fn from(s: ScoreFunction) -> Self {
        Score::Dense(s)
    }
}

impl From<QuadraticScore> for Score {
    fn from(s: QuadraticScore) -> Self {
        Score::Quadratic(s)
    }
}

impl ClusterScore for Score {
    fn n(&self) -> usize {
        match self {
            Score::Dense(s) => s.n(),
            Score::Quadratic(s) => s.n(),
        }
    }
    fn value(&self, set: Subset) -> f64 {
        match self {
            Score::Dense(s) => s.value(set),
            Score::Quadratic(s) => s.value(set),
        }
    }
    fn mle_sparse(&self, coords: &[(usize, f64)]) -> f64 {
        match self {
            Score::Dense(s) => s.mle_sparse(coords),
            Score::Quadratic(s) => s.mle_sparse(coords),
        }
    }
    fn reduced_sparse(&self, i: usize, others: &[(usize, f64)]) -> f64 {
        match self {
            Score::Dense(s) => s.reduced_sparse(i, others),
            Score::Quadratic(s) => s.reduced_sparse(i, others),
        }
    }
    fn singleton(&self, i: usize) -> f64 {
        match self {
            Score::Dense(s) => s.singleton(i),
            Score::Quadratic(s) => s.singleton(i),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Example set function on three points used throughout the tests.
    pub(crate) fn example_values() -> Vec<f64> {
        vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]
    }

    fn example() -> ScoreFunction {
        ScoreFunction::from_values(3, example_values()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn distances_max_normalize() {
        let s = similarity_from_distances(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            Normalization::MaxNormalize,
        )
        .unwrap();
        assert_eq!(s.rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let s = similarity_from_distances(
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            Normalization::MaxNormalize,
        )
        .unwrap();
        assert_eq!(s.rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn distances_already_normalized() {
        let d = vec![
            vec![0.0, 0.5, 1.0],
            vec![0.5, 0.0, 0.5],
            vec![1.0, 0.5, 0.0],
        ];
        let s = similarity_from_distances(&d, Normalization::AlreadyNormalized).unwrap();
        assert_eq!(
            s.rows(),
            vec![
                vec![1.0, 0.5, 0.0],
                vec![0.5, 1.0, 0.5],
                vec![0.0, 0.5, 1.0]
            ]
        );
    }

    #[test]
    fn distance_errors() {
        let asym = vec![vec![0.0, 0.3], vec![0.2, 0.0]];
        assert!(matches!(
            similarity_from_distances(&asym, Normalization::MaxNormalize),
            Err(Error::Asymmetric { row: 0, col: 1, .. })
        ));
        let neg = vec![vec![0.0, -0.3], vec![-0.3, 0.0]];
        assert!(matches!(
            similarity_from_distances(&neg, Normalization::MaxNormalize),
            Err(Error::OutOfRange { .. })
        ));
        let big = vec![vec![0.0, 1.5], vec![1.5, 0.0]];
        assert!(matches!(
            similarity_from_distances(&big, Normalization::AlreadyNormalized),
            Err(Error::OutOfRange { value, .. }) if value == 1.5
        ));
        assert!(similarity_from_distances(&big, Normalization::MaxNormalize).is_ok());
    }

    #[test]
    fn similarity_validation() {
        assert!(matches!(
            SimilarityMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]),
            Err(Error::Asymmetric { .. })
        ));
        assert!(matches!(
            SimilarityMatrix::new(2, vec![0.9, 0.5, 0.5, 1.0]),
            Err(Error::Diagonal { index: 0, .. })
        ));
        assert!(matches!(
            SimilarityMatrix::new(2, vec![1.0, 1.5, 1.5, 1.0]),
            Err(Error::OutOfRange { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn quadratic_two_points() {
        let s = 0.3;
        let sm = SimilarityMatrix::new(2, vec![1.0, s, s, 1.0]).unwrap();
        let q = QuadraticScore::from_similarity(&sm).unwrap();
        assert!(close(q.singleton_coeff(0), (1.0 - s) / 2.0));
        assert!(close(q.singleton_coeff(1), (1.0 - s) / 2.0));
        assert!(close(q.pair_coeff(0, 1), 2.0 * s - 1.0));
        assert!(close(q.value(Subset(0b11)), s));
    }

    #[test]
    fn quadratic_requires_two_points() {
        let sm = SimilarityMatrix::new(1, vec![1.0]).unwrap();
        assert_eq!(
            QuadraticScore::from_similarity(&sm),
            Err(Error::TooFewPoints { n: 1, min: 2 })
        );
    }

    #[test]
    fn quadratic_fully_similar_point_has_zero_singleton() {
        let sm =
            SimilarityMatrix::new(3, vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 1.0, 0.2, 1.0]).unwrap();
        let q = QuadraticScore::from_similarity(&sm).unwrap();
        assert_eq!(q.singleton_coeff(0), 0.0);
        assert!(q.singleton_coeff(1) > 0.0);
    }

    #[test]
    fn quadratic_pair_matches_closed_form() {
        // μ({i,j}) = (n S_ij - 1)/(n-1) - Σ_{l ∉ {i,j}} (2 - S_il - S_jl) / (2(n-1))
        let rows = vec![
            vec![1.0, 0.7, 0.1, 0.4],
            vec![0.7, 1.0, 0.3, 0.9],
            vec![0.1, 0.3, 1.0, 0.5],
            vec![0.4, 0.9, 0.5, 1.0],
        ];
        let sm = SimilarityMatrix::from_rows(&rows).unwrap();
        let q = QuadraticScore::from_similarity(&sm).unwrap();
        let n = 4.0;
        for i in 0..4 {
            for j in i + 1..4 {
                let rest: f64 = (0..4)
                    .filter(|&l| l != i && l != j)
                    .map(|l| (2.0 - rows[i][l] - rows[j][l]) / (2.0 * (n - 1.0)))
                    .sum();
                let expected = (n * rows[i][j] - 1.0) / (n - 1.0) - rest;
                assert!(close(q.pair_coeff(i, j), expected));
            }
        }
    }

    #[test]
    fn example_values_and_mobius() {
        let w = example();
        assert!(close(evaluate(&w, Subset(0b011)).unwrap(), 0.8));
        assert!(close(evaluate(&w, Subset(0b111)).unwrap(), 0.7));
        assert_eq!(evaluate(&w, Subset::EMPTY).unwrap(), 0.0);
        assert!(matches!(
            evaluate(&w, Subset(0b1000)),
            Err(Error::SubsetOutOfRange { .. })
        ));

        let mu = w.mobius();
        for i in 0..3 {
            assert!(close(mu[1 << i], 0.2));
        }
        assert!(close(mu[0b011], 0.4));
        assert!(close(mu[0b101], -0.1));
        assert!(close(mu[0b110], 0.2));
        assert!(close(mu[0b111], -0.4));
        assert_eq!(w.degree(), 3);
    }

    #[test]
    fn transforms_trivial_cases() {
        assert_eq!(mobius_transform(&[0.0; 8]).unwrap(), vec![0.0; 8]);
        assert_eq!(zeta_transform(&[0.0; 8]).unwrap(), vec![0.0; 8]);

        let mut mu = vec![0.0; 16];
        for i in 0..4 {
            mu[1 << i] = 1.0;
        }
        let w = zeta_transform(&mu).unwrap();
        for (m, v) in w.iter().enumerate() {
            assert_eq!(*v, (m as u64).count_ones() as f64);
        }

        let c = [0.3, -1.2, 2.5, 0.7];
        let additive: Vec<f64> = (0..16u64)
            .map(|m| Subset(m).iter().map(|i| c[i]).sum())
            .collect();
        let mu = mobius_transform(&additive).unwrap();
        for (m, v) in mu.iter().enumerate() {
            if m.count_ones() >= 2 {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_roundtrip_example() {
        let mu = mobius_transform(&example_values()).unwrap();
        let back = zeta_transform(&mu).unwrap();
        for (a, b) in back.iter().zip(example_values()) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn transform_capacity_guard() {
        assert!(matches!(
            mobius_transform(&vec![0.0; 1 << 21]),
            Err(Error::Capacity { n: 21, .. })
        ));
        assert!(matches!(
            ScoreFunction::from_values(21, vec![]),
            Err(Error::Capacity { .. })
        ));
        assert!(mobius_transform(&[0.0; 6]).is_err());
    }

    #[test]
    fn mle_examples() {
        let w = example();
        assert!(close(mle_evaluate(&w, &[1.0, 1.0, 0.0]).unwrap(), 0.8));
        assert!(close(mle_evaluate(&w, &[0.5, 0.5, 0.5]).unwrap(), 0.375));
        assert_eq!(mle_evaluate(&w, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            mle_evaluate(&w, &[0.5, 1.2, 0.0]),
            Err(Error::Coordinate { index: 1, .. })
        ));
        assert!(mle_evaluate(&w, &[0.5, -0.1, 0.0]).is_err());
    }

    #[test]
    fn reduced_sparse_dense_vs_quadratic() {
        let rows = vec![
            vec![1.0, 0.7, 0.1, 0.4],
            vec![0.7, 1.0, 0.3, 0.9],
            vec![0.1, 0.3, 1.0, 0.5],
            vec![0.4, 0.9, 0.5, 1.0],
        ];
        let q =
            QuadraticScore::from_similarity(&SimilarityMatrix::from_rows(&rows).unwrap()).unwrap();
        let d = q.to_dense().unwrap();
        let others = [(0, 0.3), (2, 0.8), (3, 0.5)];
        assert!(close(
            q.reduced_sparse(1, &others),
            d.reduced_sparse(1, &others)
        ));
        let coords = [(0, 0.3), (1, 0.9), (3, 0.5)];
        assert!(close(q.mle_sparse(&coords), d.mle_sparse(&coords)));
    }
}
