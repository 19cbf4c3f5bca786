//! The level-n measures `ν_{β,n}` on the sum sets
//! `D_n = { Σ_{i<=n} x_i β^{-i} }`, their Shannon entropy and how the points
//! of `D_n` cluster.
//!
//! Sums are produced by a meet-in-the-middle merge: the first `k` digits and
//! the remaining `n - k` digits are enumerated separately, and the `|D_k|`
//! sorted lists `a + β^{-k} D_{n-k}` are merged through a heap. The merged
//! stream arrives in increasing order, so coincident sums are adjacent and
//! entropy can be accumulated without materializing `D_n`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::counting::normalized_count;
use crate::density::{normalize_grid, PiecewiseConstant};
use crate::error::{Error, Result};
use crate::numeric::{sort_and_merge, Backend, Limits};

/// Finitely many atoms with masses `weight / denominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<N> {
    atoms: Vec<N>,
    weights: Vec<u64>,
    denominator: u64,
    near_tie: bool,
}

impl<N: Clone> DiscreteMeasure<N> {
    /// Atoms must be strictly increasing and weights positive, summing to
    /// `denominator`.
    pub fn new<B>(beta: &B, atoms: Vec<N>, weights: Vec<u64>, denominator: u64) -> Result<Self>
    where
        B: Backend<Num = N>,
    {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidParams("atoms and weights must be non-empty and parallel".into()));
        }
        if weights.contains(&0) || weights.iter().sum::<u64>() != denominator {
            return Err(Error::InvalidParams("weights must be positive and sum to the denominator".into()));
        }
        if atoms.windows(2).any(|w| beta.cmp(&w[0], &w[1]) != Ordering::Less) {
            return Err(Error::InvalidParams("atoms must be strictly increasing".into()));
        }
        Ok(DiscreteMeasure { atoms, weights, denominator, near_tie: false })
    }

    pub fn atoms(&self) -> &[N] {
        &self.atoms
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when a float merge joined two sums whose gap was within
    /// `[tol/10, tol]`, i.e. the coincidence may be spurious.
    pub fn near_tie(&self) -> bool {
        self.near_tie
    }

    pub fn mass(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.weights[i]), BigInt::from(self.denominator))
    }

    pub fn masses(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.mass(i)).collect()
    }

    /// Exact mass of the closed window `[lo, hi]`.
    pub fn mass_in<B>(&self, beta: &B, lo: &N, hi: &N) -> BigRational
    where
        B: Backend<Num = N>,
    {
        let total: u64 = self
            .atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| beta.in_closed(a, lo, hi))
            .map(|(_, w)| w)
            .sum();
        BigRational::new(BigInt::from(total), BigInt::from(self.denominator))
    }
}

/// Shannon entropy in nats, `-Σ m_i ln m_i`.
pub fn entropy<N>(m: &DiscreteMeasure<N>) -> f64 {
    entropy_from_weights(m.weights.iter().copied(), m.denominator)
}

fn entropy_from_weights(weights: impl Iterator<Item = u64>, denominator: u64) -> f64 {
    let d = denominator as f64;
    let sum_w_ln_w: f64 = weights.map(|w| if w > 1 { w as f64 * (w as f64).ln() } else { 0.0 }).sum();
    d.ln() - sum_w_ln_w / d
}

/// Entropy as an exact combination `Σ c_p ln p` over primes `p`.
pub fn exact_entropy<N>(m: &DiscreteMeasure<N>) -> BTreeMap<u64, BigRational> {
    let mut out: BTreeMap<u64, BigRational> = BTreeMap::new();
    let d = BigInt::from(m.denominator);
    let mut add = |value: u64, coeff: BigRational| {
        for (p, e) in factorize(value) {
            *out.entry(p).or_insert_with(BigRational::zero) += &coeff * BigInt::from(e);
        }
    };
    add(m.denominator, BigRational::from_integer(1.into()));
    for &w in &m.weights {
        add(w, -BigRational::new(BigInt::from(w), d.clone()));
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn factorize(mut v: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= v {
        let mut e = 0;
        while v.is_multiple_of(p) {
            v /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if v > 1 {
        out.push((v, 1));
    }
    out
}

/// Distinct sums of all words of length `k` with multiplicities, sorted.
fn word_sums<B: Backend>(beta: &B, k: usize) -> Vec<(B::Num, u64)> {
    let powers: Vec<B::Num> = (1..=k).map(|i| beta.beta_pow_neg(i)).collect();
    let mut level = vec![(beta.zero(), 1u64)];
    for p in &powers {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (s, w) in level {
            next.push((beta.add(&s, p), w));
            next.push((s, w));
        }
        level = sort_and_merge(beta, next, |acc, w| *acc += w);
    }
    level
}

struct HeapItem<'a, B: Backend> {
    beta: &'a B,
    value: B::Num,
    weight: u64,
    list: usize,
    pos: usize,
}

impl<B: Backend> PartialEq for HeapItem<'_, B> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<B: Backend> Eq for HeapItem<'_, B> {}

impl<B: Backend> PartialOrd for HeapItem<'_, B> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<B: Backend> Ord for HeapItem<'_, B> {
    // Reversed: BinaryHeap is a max-heap and we want the smallest sum first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.beta
            .total_cmp(&other.value, &self.value)
            .then_with(|| other.list.cmp(&self.list))
    }
}

/// Stream the merged atoms of `ν_{β,n}` in increasing order to `emit`,
/// returning whether any float merge was a near tie.
fn stream_level<B, F>(beta: &B, n: usize, mut emit: F) -> bool
where
    B: Backend,
    F: FnMut(B::Num, u64),
{
    let k = n / 2;
    let left = word_sums(beta, k);
    let scale = beta.beta_pow_neg(k);
    let right: Vec<(B::Num, u64)> =
        word_sums(beta, n - k).into_iter().map(|(b, w)| (beta.mul(&scale, &b), w)).collect();

    let mut heap = BinaryHeap::with_capacity(left.len());
    for (list, (a, wa)) in left.iter().enumerate() {
        let (b, wb) = &right[0];
        heap.push(HeapItem { beta, value: beta.add(a, b), weight: wa * wb, list, pos: 0 });
    }

    let tol = beta.tolerance();
    let mut near_tie = false;
    let mut run: Option<(B::Num, B::Num, u64)> = None; // (representative, last, weight)
    while let Some(item) = heap.pop() {
        let HeapItem { value, weight, list, pos, .. } = item;
        if pos + 1 < right.len() {
            let (b, wb) = &right[pos + 1];
            let (a, wa) = &left[list];
            heap.push(HeapItem { beta, value: beta.add(a, b), weight: wa * wb, list, pos: pos + 1 });
        }
        match run.as_mut() {
            Some((_, last, w)) if beta.cmp(last, &value) == Ordering::Equal => {
                if !beta.is_exact() && (beta.to_f64(&value) - beta.to_f64(last)).abs() >= tol / 10.0 {
                    near_tie = true;
                }
                *w += weight;
                *last = value;
            }
            _ => {
                if let Some((rep, _, w)) = run.take() {
                    emit(rep, w);
                }
                run = Some((value.clone(), value, weight));
            }
        }
    }
    if let Some((rep, _, w)) = run {
        emit(rep, w);
    }
    near_tie
}

fn check_measure_depth(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.max_measure_depth || n > 62 {
        return Err(Error::DepthExceeded { n, max: limits.max_measure_depth.min(62) });
    }
    Ok(())
}

/// `ν_{β,n}`: uniform mass `2^{-n}` on the sums of all `2^n` words, with
/// coincident sums merged.
pub fn build_nu_n<B: Backend>(beta: &B, n: usize, limits: &Limits) -> Result<DiscreteMeasure<B::Num>> {
    check_measure_depth(n, limits)?;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let near_tie = stream_level(beta, n, |a, w| {
        atoms.push(a);
        weights.push(w);
    });
    Ok(DiscreteMeasure { atoms, weights, denominator: 1u64 << n, near_tie })
}

/// Entropy of `ν_{β,n}` and `|D_n|` without storing `D_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEntropy {
    pub n: usize,
    pub entropy: f64,
    pub distinct_atoms: u64,
    pub near_tie: bool,
}

pub fn level_entropy<B: Backend>(beta: &B, n: usize, limits: &Limits) -> Result<LevelEntropy> {
    check_measure_depth(n, limits)?;
    let mut distinct = 0u64;
    let mut sum_w_ln_w = 0.0;
    let near_tie = stream_level(beta, n, |_, w| {
        distinct += 1;
        if w > 1 {
            sum_w_ln_w += w as f64 * (w as f64).ln();
        }
    });
    let d = (1u64 << n) as f64;
    Ok(LevelEntropy { n, entropy: d.ln() - sum_w_ln_w / d, distinct_atoms: distinct, near_tie })
}

/// One row of the Garsia entropy table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarsiaRow {
    pub n: usize,
    pub entropy: f64,
    /// `H(ν_{β,n}) / n`.
    pub ratio: f64,
    pub distinct_atoms: u64,
}

/// `H(ν_{β,n})/n` for `n = 1..=n_max` against the singularity threshold `ln β`.
#[derive(Debug, Clone, PartialEq)]
pub struct GarsiaTable {
    pub rows: Vec<GarsiaRow>,
    pub ln_beta: f64,
    /// Number of `n` with `ratio(n+1) > ratio(n)`.
    pub increases: usize,
    /// `ratio(n_max) - ln β`.
    pub final_gap: f64,
}

pub fn garsia_ratio<B: Backend>(beta: &B, n_max: usize, limits: &Limits) -> Result<GarsiaTable> {
    check_measure_depth(n_max, limits)?;
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let level = level_entropy(beta, n, limits)?;
            Ok(GarsiaRow {
                n,
                entropy: level.entropy,
                ratio: level.entropy / n as f64,
                distinct_atoms: level.distinct_atoms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ln_beta = beta.beta_f64().ln();
    let increases = rows.windows(2).filter(|w| w[1].ratio > w[0].ratio).count();
    let final_gap = rows[rows.len() - 1].ratio - ln_beta;
    Ok(GarsiaTable { rows, ln_beta, increases, final_gap })
}

/// Counts of sum-set points in one window of `I_β`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCount {
    pub left: f64,
    pub right: f64,
    pub distinct: u64,
    /// Points counted with their multiplicity (number of words).
    pub with_multiplicity: u64,
    /// `mass / width`, comparable to a density on `I_β`.
    pub normalized: f64,
}

/// Histogram of a measure over equal windows of `I_β`. The dispersion
/// statistics compare window counts (with multiplicity) to their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringProfile {
    pub windows: Vec<WindowCount>,
    pub total_distinct: u64,
    pub total_with_multiplicity: u64,
    pub max_over_mean: f64,
    pub min_over_mean: f64,
    /// `max / min`; infinite when some window is empty.
    pub dispersion: f64,
}

pub fn clustering_of<B: Backend>(
    m: &DiscreteMeasure<B::Num>,
    beta: &B,
    window_count: usize,
) -> Result<ClusteringProfile> {
    if window_count == 0 {
        return Err(Error::InvalidParams("window_count must be positive".into()));
    }
    let right = beta.i_beta_right();
    // boundaries[i] = i/W · 1/(β-1)
    let boundaries: Vec<B::Num> = (0..=window_count)
        .map(|i| {
            let frac = BigRational::new(BigInt::from(i), BigInt::from(window_count));
            beta.mul(&beta.from_rational(&frac), &right)
        })
        .collect();
    let mut distinct = vec![0u64; window_count];
    let mut mult = vec![0u64; window_count];
    for (a, &w) in m.atoms.iter().zip(&m.weights) {
        // left-closed windows, the last one closed on the right
        let above = boundaries[1..window_count].partition_point(|b| beta.le(b, a));
        distinct[above] += 1;
        mult[above] += w;
    }
    let width = beta.to_f64(&right) / window_count as f64;
    let windows: Vec<WindowCount> = (0..window_count)
        .map(|i| WindowCount {
            left: beta.to_f64(&boundaries[i]),
            right: beta.to_f64(&boundaries[i + 1]),
            distinct: distinct[i],
            with_multiplicity: mult[i],
            normalized: mult[i] as f64 / m.denominator as f64 / width,
        })
        .collect();
    let total: u64 = mult.iter().sum();
    let mean = total as f64 / window_count as f64;
    let max = *mult.iter().max().expect("non-empty") as f64;
    let min = *mult.iter().min().expect("non-empty") as f64;
    Ok(ClusteringProfile {
        windows,
        total_distinct: distinct.iter().sum(),
        total_with_multiplicity: total,
        max_over_mean: max / mean,
        min_over_mean: min / mean,
        dispersion: if min > 0.0 { max / min } else { f64::INFINITY },
    })
}

pub fn clustering_profile<B: Backend>(
    beta: &B,
    n: usize,
    window_count: usize,
    limits: &Limits,
) -> Result<ClusteringProfile> {
    let m = build_nu_n(beta, n, limits)?;
    clustering_of(&m, beta, window_count)
}

/// `f_n` built directly from `D_n`: `f_n(x)` is `(β-1)(β/2)^n` times the
/// number of words whose sum lies in `[x - ℓ_n, x]`, so its breakpoints are
/// among `{d, d + ℓ_n : d ∈ D_n}`.
pub fn f_n_from_sum_set<B: Backend>(
    beta: &B,
    n: usize,
    limits: &Limits,
) -> Result<PiecewiseConstant<B::Num>> {
    let m = build_nu_n(beta, n, limits)?;
    let ell = beta.prefix_window(n);
    let mut candidates = vec![beta.zero(), beta.i_beta_right()];
    for d in &m.atoms {
        for p in [d.clone(), beta.add(d, &ell)] {
            if beta.in_i_beta(&p) {
                candidates.push(p);
            }
        }
    }
    let grid = normalize_grid(beta, candidates);
    if grid.len() - 1 > limits.piece_budget {
        return Err(Error::PieceBudgetExceeded { pieces: grid.len() - 1, budget: limits.piece_budget });
    }
    let prefix: Vec<u64> = std::iter::once(0)
        .chain(m.weights.iter().scan(0u64, |acc, &w| {
            *acc += w;
            Some(*acc)
        }))
        .collect();
    // Number of atoms strictly below / at most y.
    let below = |y: &B::Num| m.atoms.partition_point(|a| beta.lt(a, y));
    let at_most = |y: &B::Num| m.atoms.partition_point(|a| beta.le(a, y));
    let values = grid
        .windows(2)
        .map(|w| {
            let mid = beta.half(&beta.add(&w[0], &w[1]));
            let lo = beta.sub(&mid, &ell);
            let count = prefix[at_most(&mid)] - prefix[below(&lo)];
            normalized_count(beta, n, &count.into())
        })
        .collect();
    PiecewiseConstant::new(beta, grid, values)
}
