//! The partition lattice ordered by coarsening, its Möbius function, and
//! Möbius inversion of additively separable partition functions.
//!
//! Partitions are encoded as restricted-growth strings: entry `i` is the
//! index of the block holding point `i`, with blocks numbered by first
//! occurrence. Dense partition functions are indexed by the rank of that
//! string in lexicographic order.

use serde::Serialize;

use crate::cover::Partition;
use crate::error::{Error, Result};
use crate::score::{ClusterScore, ScoreFunction, ZERO_TOL};
use crate::subset::Subset;

/// Largest `n` for which all partitions are enumerated (Bell(10) = 115975).
pub const PARTITION_CAPACITY: usize = 10;

/// Largest `n` for double enumeration over comparable pairs.
pub const INVERSION_CAPACITY: usize = 8;

fn check_capacity(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Capacity { what, n, limit });
    }
    Ok(())
}

/// Bell numbers: the number of partitions of an `n`-set.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("rows are non-empty"));
        for &x in &row {
            let last = *next.last().expect("just pushed");
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Restricted-growth string of a partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionCode(Vec<u8>);

impl PartitionCode {
    pub fn new(rgs: Vec<u8>) -> Result<Self> {
        let mut next = 0u8;
        for (i, &b) in rgs.iter().enumerate() {
            if b > next {
                return Err(Error::InvalidPartition(format!(
                    "entry {i} = {b} skips ahead of {next}"
                )));
            }
            if b == next {
                next += 1;
            }
        }
        Ok(PartitionCode(rgs))
    }

    pub fn from_partition(p: &Partition) -> Self {
        let mut rgs = vec![0u8; p.n()];
        for (k, b) in p.blocks().iter().enumerate() {
            for i in b.iter() {
                rgs[i] = k as u8;
            }
        }
        PartitionCode(rgs)
    }

    pub fn to_partition(&self) -> Partition {
        let n = self.0.len();
        let k = self.0.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
        let mut blocks = vec![Subset::EMPTY; k];
        for (i, &b) in self.0.iter().enumerate() {
            blocks[b as usize] = blocks[b as usize].with(i);
        }
        Partition::new(n, blocks).expect("restricted-growth strings encode partitions")
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

/// All partitions of `{0, .., n-1}` in lexicographic restricted-growth order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<PartitionCode>> {
    check_capacity("partition enumeration", n, PARTITION_CAPACITY)?;
    let mut out = Vec::with_capacity(bell(n) as usize);
    let mut rgs = vec![0u8; n];
    loop {
        out.push(PartitionCode(rgs.clone()));
        // prefix maxima
        let mut max = vec![0u8; n];
        for i in 1..n {
            max[i] = max[i - 1].max(rgs[i - 1]);
        }
        let Some(i) = (1..n).rev().find(|&i| rgs[i] <= max[i]) else {
            break;
        };
        rgs[i] += 1;
        for x in &mut rgs[i + 1..] {
            *x = 0;
        }
    }
    Ok(out)
}

/// Ranks restricted-growth strings of a fixed length in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    // completions[r][k]: strings of r more entries given k blocks so far
    completions: Vec<Vec<u64>>,
}

impl RankTable {
    pub fn new(n: usize) -> Self {
        let mut completions = vec![vec![1u64; n + 2]];
        for r in 1..=n {
            let prev = &completions[r - 1];
            let row = (0..n + 2)
                .map(|k| {
                    let stay = k as u64 * prev[k];
                    let open = if k + 1 < n + 2 { prev[k + 1] } else { 0 };
                    stay + open
                })
                .collect();
            completions.push(row);
        }
        RankTable { n, completions }
    }

    pub fn rank(&self, code: &PartitionCode) -> usize {
        debug_assert_eq!(code.n(), self.n);
        let rgs = code.as_slice();
        let mut rank = 0u64;
        let mut blocks = usize::from(self.n > 0);
        for (i, &b) in rgs.iter().enumerate().skip(1) {
            let rest = self.n - i - 1;
            for v in 0..b as usize {
                rank += self.completions[rest][blocks.max(v + 1)];
            }
            blocks = blocks.max(b as usize + 1);
        }
        rank as usize
    }

    pub fn rank_partition(&self, p: &Partition) -> usize {
        self.rank(&PartitionCode::from_partition(p))
    }
}

fn check_same(p: &Partition, q: &Partition) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(())
}

/// True iff `p` is coarser than or equal to `q`: every block of `q` lies
/// inside a block of `p`.
pub fn coarsens(p: &Partition, q: &Partition) -> Result<bool> {
    check_same(p, q)?;
    Ok(coarsens_unchecked(p, q))
}

fn coarsens_unchecked(p: &Partition, q: &Partition) -> bool {
    q.blocks()
        .iter()
        .all(|&b| p.blocks().iter().any(|&a| b.is_subset_of(a)))
}

/// Möbius function of the partition lattice, `μ(Q, P)`, in closed form.
///
/// The interval `[Q, P]` is a product of partition lattices, one per block
/// of `P`, of rank `k_A` = number of blocks of `Q` inside `A`. With
/// `m_k = |{A : k_A = k}|` and `|Q|` blocks below,
/// `μ(Q, P) = (-1)^{|P| - |Q|} Π_{1<k<|Q|} (k!)^{m_{k+1}}`. Zero unless
/// `Q ≤ P`.
pub fn mobius_partition(q: &Partition, p: &Partition) -> Result<i64> {
    check_same(p, q)?;
    if !coarsens_unchecked(p, q) {
        return Ok(0);
    }
    let atoms = q.len();
    let mut m = vec![0usize; atoms + 2];
    for &a in p.blocks() {
        let k = q.blocks().iter().filter(|b| b.is_subset_of(a)).count();
        m[k] += 1;
    }
    let exponent: usize = m.iter().sum::<usize>() + atoms;
    let sign = if exponent.is_multiple_of(2) { 1 } else { -1 };
    let mut factorial = 1i64;
    let mut product = 1i64;
    for k in 2..atoms {
        factorial *= k as i64;
        product *= factorial.pow(m[k + 1] as u32);
    }
    Ok(sign * product)
}

/// Partitions finer than or equal to `p`.
pub fn refinements(p: &Partition) -> Vec<Partition> {
    let mut acc: Vec<Vec<Subset>> = vec![Vec::new()];
    for &a in p.blocks() {
        let members = a.to_vec();
        let local = enumerate_small(members.len());
        let mut next = Vec::with_capacity(acc.len() * local.len());
        for prefix in &acc {
            for rgs in &local {
                let k = rgs.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
                let mut parts = vec![Subset::EMPTY; k];
                for (t, &b) in rgs.iter().enumerate() {
                    parts[b as usize] = parts[b as usize].with(members[t]);
                }
                let mut blocks = prefix.clone();
                blocks.extend(parts);
                next.push(blocks);
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|b| Partition::new(p.n(), b).expect("refinement blocks partition the set"))
        .collect()
}

fn enumerate_small(k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut rgs = vec![0u8; k];
    loop {
        out.push(rgs.clone());
        let mut max = vec![0u8; k];
        for i in 1..k {
            max[i] = max[i - 1].max(rgs[i - 1]);
        }
        let Some(i) = (1..k).rev().find(|&i| rgs[i] <= max[i]) else {
            break;
        };
        rgs[i] += 1;
        for x in &mut rgs[i + 1..] {
            *x = 0;
        }
    }
    out
}

/// A real value on every partition of `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFunction {
    n: usize,
    codes: Vec<PartitionCode>,
    values: Vec<f64>,
    ranks: RankTable,
}

impl PartitionFunction {
    /// Tabulates `f` over all partitions (`n ≤ 10`).
    pub fn from_fn(n: usize, mut f: impl FnMut(&Partition) -> f64) -> Result<Self> {
        let codes = enumerate_partitions(n)?;
        let values = codes.iter().map(|c| f(&c.to_partition())).collect();
        Ok(PartitionFunction {
            n,
            codes,
            values,
            ranks: RankTable::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn codes(&self) -> &[PartitionCode] {
        &self.codes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, p: &Partition) -> f64 {
        self.values[self.ranks.rank_partition(p)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartitionCode, f64)> + '_ {
        self.codes.iter().zip(self.values.iter().copied())
    }
}

/// `h_v(P) = Σ_{A ∈ P} v(A)`.
pub fn separable_from<S: ClusterScore + ?Sized>(v: &S) -> Result<PartitionFunction> {
    PartitionFunction::from_fn(v.n(), |p| p.value(v))
}

/// `μ^h(P) = Σ_{Q ≤ P} μ(Q, P) h(Q)` (`n ≤ 8`).
pub fn mobius_inversion_pf(h: &PartitionFunction) -> Result<PartitionFunction> {
    check_capacity("partition-lattice inversion", h.n(), INVERSION_CAPACITY)?;
    let mut err = None;
    let out = PartitionFunction::from_fn(h.n(), |p| {
        refinements(p)
            .iter()
            .map(|q| match mobius_partition(q, p) {
                Ok(mu) => mu as f64 * h.get(q),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            })
            .sum()
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `h(P) = Σ_{Q ≤ P} μ^h(Q)`, inverse of [`mobius_inversion_pf`].
pub fn zeta_pf(mu: &PartitionFunction) -> Result<PartitionFunction> {
    check_capacity("partition-lattice zeta", mu.n(), INVERSION_CAPACITY)?;
    PartitionFunction::from_fn(mu.n(), |p| refinements(p).iter().map(|q| mu.get(q)).sum())
}

/// At most one block has more than one point.
pub fn is_modular(p: &Partition) -> bool {
    p.blocks().iter().filter(|b| b.len() > 1).count() <= 1
}

/// Shifts singleton scores by `delta` (summing to zero) and every larger
/// subset by the sum of its members' shifts. The result differs from `v`
/// but induces the same partition function.
pub fn separating_variant(v: &ScoreFunction, delta: &[f64]) -> Result<ScoreFunction> {
    let n = v.n();
    if delta.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: delta.len(),
        });
    }
    let total: f64 = delta.iter().sum();
    if total.abs() > ZERO_TOL {
        return Err(Error::Shift(format!("shifts sum to {total}, not 0")));
    }
    if delta.iter().all(|d| d.abs() <= ZERO_TOL) {
        return Err(Error::Shift("all shifts are zero".into()));
    }
    ScoreFunction::from_fn(n, |a| v.value(a) + a.iter().map(|i| delta[i]).sum::<f64>())
}

/// Summary of an exhaustive lattice verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeReport {
    pub n: usize,
    pub partitions: usize,
    pub modular: usize,
    pub expected_modular: usize,
    /// Non-modular partitions on which `μ^{h_v}` vanished for every sample.
    pub non_modular_zeros_verified: usize,
    pub samples: usize,
    /// `μ(P_⊥, P^⊤)`.
    pub bottom_top_mobius: i64,
    /// Comparable pairs cross-checked against the recursive definition.
    pub mobius_pairs_checked: usize,
    pub mobius_mismatches: Vec<String>,
    pub modular_support_failures: Vec<String>,
    pub separation_failures: Vec<String>,
    pub max_roundtrip_error: f64,
    pub passed: bool,
}

/// `μ(y, x)` for every pair of partitions of an `n`-set, by the recursion
/// `μ(y, y) = 1`, `μ(y, x) = -Σ_{y ≤ z < x} μ(y, z)`. Indexed by
/// enumeration rank; `n ≤ 6`.
pub fn mobius_partition_recursive(n: usize) -> Result<Vec<Vec<i64>>> {
    check_capacity("recursive partition Möbius", n, 6)?;
    let all: Vec<Partition> = enumerate_partitions(n)?
        .iter()
        .map(PartitionCode::to_partition)
        .collect();
    let len = all.len();
    let mut mu = vec![vec![0i64; len]; len];
    // finer partitions first
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(all[i].len()));
    for y in 0..len {
        let above: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&x| coarsens_unchecked(&all[x], &all[y]))
            .collect();
        for &x in &above {
            mu[y][x] = if x == y {
                1
            } else {
                -above
                    .iter()
                    .filter(|&&z| z != x && coarsens_unchecked(&all[x], &all[z]))
                    .map(|&z| mu[y][z])
                    .sum::<i64>()
            };
        }
    }
    Ok(mu)
}

/// Runs the lattice verification suite for one `n` (`n ≤ 8`), with the
/// full Möbius cross-check for `n ≤ 5`.
pub fn lattice_check(n: usize, samples: usize, seed: u64) -> Result<LatticeReport> {
    use rand::{Rng, SeedableRng};
    check_capacity("lattice check", n, INVERSION_CAPACITY)?;
    let codes = enumerate_partitions(n)?;
    let parts: Vec<Partition> = codes.iter().map(PartitionCode::to_partition).collect();
    let modular = parts.iter().filter(|p| is_modular(p)).count();
    let expected_modular = if n == 0 { 1 } else { (1usize << n) - n };
    let bottom = Partition::finest(n);
    let top = Partition::coarsest(n);
    let bottom_top_mobius = mobius_partition(&bottom, &top)?;

    let mut report = LatticeReport {
        n,
        partitions: parts.len(),
        modular,
        expected_modular,
        non_modular_zeros_verified: 0,
        samples,
        bottom_top_mobius,
        mobius_pairs_checked: 0,
        mobius_mismatches: Vec::new(),
        modular_support_failures: Vec::new(),
        separation_failures: Vec::new(),
        max_roundtrip_error: 0.0,
        passed: false,
    };

    if n <= 5 {
        let rec = mobius_partition_recursive(n)?;
        for (y, q) in parts.iter().enumerate() {
            for (x, p) in parts.iter().enumerate() {
                if !coarsens_unchecked(p, q) {
                    continue;
                }
                report.mobius_pairs_checked += 1;
                let closed = mobius_partition(q, p)?;
                if closed != rec[y][x] {
                    report.mobius_mismatches.push(format!(
                        "mu({:?}, {:?}): closed form {closed}, recursion {}",
                        q.blocks(),
                        p.blocks(),
                        rec[y][x]
                    ));
                }
            }
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-9;
    let mut nonzero = vec![false; parts.len()];
    for sample in 0..samples {
        let v = ScoreFunction::from_fn(n, |_| rng.random_range(-1.0..1.0))?;
        let h = separable_from(&v)?;
        let mu = mobius_inversion_pf(&h)?;
        for (k, p) in parts.iter().enumerate() {
            let got = mu.get(p);
            let big: Vec<Subset> = p.blocks().iter().copied().filter(|b| b.len() > 1).collect();
            let expected = match big.as_slice() {
                [] => Some((0..n).map(|i| v.value(Subset::singleton(i))).sum()),
                [a] => Some(v.mobius_coeff(*a)),
                _ => None,
            };
            match expected {
                Some(e) if (got - e).abs() > tol => report.modular_support_failures.push(format!(
                    "sample {sample}: mu^h({:?}) = {got}, expected {e}",
                    p.blocks()
                )),
                None if got.abs() > tol => {
                    nonzero[k] = true;
                    report.modular_support_failures.push(format!(
                        "sample {sample}: mu^h({:?}) = {got} on a non-modular partition",
                        p.blocks()
                    ))
                }
                _ => {}
            }
        }
        let back = zeta_pf(&mu)?;
        for (a, b) in back.values().iter().zip(h.values()) {
            report.max_roundtrip_error = report.max_roundtrip_error.max((a - b).abs());
        }
        if n >= 2 {
            let mut delta: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            let mean = delta.iter().sum::<f64>() / n as f64;
            delta.iter_mut().for_each(|d| *d -= mean);
            let fix: f64 = delta[1..].iter().sum();
            delta[0] = -fix;
            let w = separating_variant(&v, &delta)?;
            let hw = separable_from(&w)?;
            let differs = w
                .values()
                .iter()
                .zip(v.values())
                .any(|(a, b)| (a - b).abs() > tol);
            let worst = hw
                .values()
                .iter()
                .zip(h.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if !differs || worst > tol {
                report.separation_failures.push(format!(
                    "sample {sample}: differs = {differs}, max |h_w - h_v| = {worst}"
                ));
            }
        }
    }
    if samples > 0 {
        report.non_modular_zeros_verified = parts
            .iter()
            .zip(&nonzero)
            .filter(|(p, &bad)| !is_modular(p) && !bad)
            .count();
    }
    report.passed = report.modular == report.expected_modular
        && report.mobius_mismatches.is_empty()
        && report.modular_support_failures.is_empty()
        && report.separation_failures.is_empty()
        && report.max_roundtrip_error <= tol;
    Ok(report)
}
