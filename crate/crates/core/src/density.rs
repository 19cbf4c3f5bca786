//! Piecewise-constant densities on `I_β` and the operator
//! `P f(x) = (β/2)(f(βx) + f(βx - 1))`.
//!
//! `f_n = P^n((β-1)·χ_{I_β})` is a finite count function, so the
//! representation here is lossless: breakpoints are exact points of the
//! backend and each piece carries one value. Values at the breakpoints
//! themselves are never used; every evaluation happens at piece midpoints.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::counting::{growth_sequence, tail_bounds};
use crate::error::{Error, Result};
use crate::numeric::{sort_and_merge, Backend, Limits};

/// Pieces beyond which `apply_p` evaluates values in parallel.
const PARALLEL_PIECES: usize = 512;

/// A function on `I_β` that is constant on each `(b_{i-1}, b_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant<N> {
    breakpoints: Vec<N>,
    values: Vec<N>,
}

impl<N: Clone> PiecewiseConstant<N> {
    /// Validates `0 = b_0 < b_1 < … < b_k = 1/(β-1)` and `k` values.
    pub fn new<B>(beta: &B, breakpoints: Vec<N>, values: Vec<N>) -> Result<Self>
    where
        B: Backend<Num = N>,
    {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::SupportViolation(format!(
                "{} breakpoints cannot carry {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if !beta.is_zero(&breakpoints[0])
            || beta.cmp(&breakpoints[breakpoints.len() - 1], &beta.i_beta_right()) != Ordering::Equal
        {
            return Err(Error::SupportViolation("breakpoints must start at 0 and end at 1/(β-1)".into()));
        }
        if breakpoints.windows(2).any(|w| beta.cmp(&w[0], &w[1]) != Ordering::Less) {
            return Err(Error::SupportViolation("breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewiseConstant { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[N] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[N] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// `(left, right, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&N, &N, &N)> {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, v)| (&w[0], &w[1], v))
    }

    /// Value at `x`; zero outside `I_β`. At a breakpoint the piece to the
    /// right is used.
    pub fn evaluate<B>(&self, beta: &B, x: &N) -> N
    where
        B: Backend<Num = N>,
    {
        let i = self.breakpoints.partition_point(|b| beta.total_cmp(b, x) != Ordering::Greater);
        if i == 0 || i == self.breakpoints.len() {
            beta.zero()
        } else {
            self.values[i - 1].clone()
        }
    }

    /// `k·f`.
    pub fn scale<B>(&self, beta: &B, k: &N) -> Self
    where
        B: Backend<Num = N>,
    {
        PiecewiseConstant {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| beta.mul(v, k)).collect(),
        }
    }

    /// Drop breakpoints between pieces with equal values.
    pub fn simplify<B>(&self, beta: &B) -> Self
    where
        B: Backend<Num = N>,
    {
        let mut breakpoints = vec![self.breakpoints[0].clone()];
        let mut values: Vec<N> = Vec::new();
        for (_, right, v) in self.pieces() {
            match values.last() {
                Some(last) if beta.cmp(last, v) == Ordering::Equal => {
                    *breakpoints.last_mut().expect("non-empty") = right.clone();
                }
                _ => {
                    values.push(v.clone());
                    breakpoints.push(right.clone());
                }
            }
        }
        PiecewiseConstant { breakpoints, values }
    }
}

/// `(β-1)·χ_{I_β}`, the density of normalized Lebesgue measure on `I_β`.
pub fn indicator_density<B: Backend>(beta: &B) -> PiecewiseConstant<B::Num> {
    PiecewiseConstant {
        breakpoints: vec![beta.zero(), beta.i_beta_right()],
        values: vec![beta.sub(&beta.beta(), &beta.one())],
    }
}

/// Midpoints of consecutive grid points.
fn midpoints<B: Backend>(beta: &B, grid: &[B::Num]) -> Vec<B::Num> {
    grid.windows(2).map(|w| beta.half(&beta.add(&w[0], &w[1]))).collect()
}

/// Sort, merge equal points and pin the ends to exactly `0` and `1/(β-1)`.
pub(crate) fn normalize_grid<B: Backend>(beta: &B, points: Vec<B::Num>) -> Vec<B::Num> {
    let merged = sort_and_merge(beta, points.into_iter().map(|p| (p, ())).collect(), |_, _| {});
    let mut grid: Vec<B::Num> = merged.into_iter().map(|(p, _)| p).collect();
    if let Some(first) = grid.first_mut() {
        *first = beta.zero();
    }
    if let Some(last) = grid.last_mut() {
        *last = beta.i_beta_right();
    }
    grid
}

fn map_pieces<N, F>(mids: &[N], f: F) -> Vec<N>
where
    N: Send + Sync,
    F: Fn(&N) -> N + Sync + Send,
{
    if mids.len() >= PARALLEL_PIECES {
        mids.par_iter().map(&f).collect()
    } else {
        mids.iter().map(f).collect()
    }
}

/// `P f`.
pub fn apply_p<B: Backend>(
    f: &PiecewiseConstant<B::Num>,
    beta: &B,
    limits: &Limits,
) -> Result<PiecewiseConstant<B::Num>> {
    let one = beta.one();
    let candidates: Vec<B::Num> = f
        .breakpoints
        .iter()
        .flat_map(|b| [beta.div_beta(b), beta.div_beta(&beta.add(b, &one))])
        .filter(|p| beta.in_i_beta(p))
        .collect();
    let grid = normalize_grid(beta, candidates);
    if grid.len() < 2 {
        return Err(Error::SupportViolation("image grid collapsed".into()));
    }
    if grid.len() - 1 > limits.piece_budget {
        return Err(Error::PieceBudgetExceeded { pieces: grid.len() - 1, budget: limits.piece_budget });
    }
    let mids = midpoints(beta, &grid);
    let values = map_pieces(&mids, |m| {
        let t0 = beta.apply_t(0, m);
        let t1 = beta.apply_t(1, m);
        let sum = beta.add(&f.evaluate(beta, &t0), &f.evaluate(beta, &t1));
        beta.half(&beta.mul_beta(&sum))
    });
    Ok(PiecewiseConstant { breakpoints: grid, values })
}

/// `f_n = P^n((β-1)χ_{I_β})`.
pub fn iterate_f_n<B: Backend>(beta: &B, n: usize, limits: &Limits) -> Result<PiecewiseConstant<B::Num>> {
    let mut f = indicator_density(beta);
    for _ in 0..n {
        f = apply_p(&f, beta, limits)?;
    }
    Ok(f)
}

/// `∫ f = Σ v_i (b_i - b_{i-1})`.
pub fn integral<B: Backend>(f: &PiecewiseConstant<B::Num>, beta: &B) -> B::Num {
    f.pieces()
        .fold(beta.zero(), |acc, (l, r, v)| beta.add(&acc, &beta.mul(v, &beta.sub(r, l))))
}

/// `∫ |f - g|` over the common refinement of both grids.
pub fn l1_distance<B: Backend>(
    f: &PiecewiseConstant<B::Num>,
    g: &PiecewiseConstant<B::Num>,
    beta: &B,
    limits: &Limits,
) -> Result<B::Num> {
    let grid = normalize_grid(beta, f.breakpoints.iter().chain(&g.breakpoints).cloned().collect());
    if grid.len() - 1 > limits.piece_budget {
        return Err(Error::PieceBudgetExceeded { pieces: grid.len() - 1, budget: limits.piece_budget });
    }
    let mids = midpoints(beta, &grid);
    Ok(grid.windows(2).zip(&mids).fold(beta.zero(), |acc, (w, m)| {
        let diff = beta.abs(&beta.sub(&f.evaluate(beta, m), &g.evaluate(beta, m)));
        beta.add(&acc, &beta.mul(&diff, &beta.sub(&w[1], &w[0])))
    }))
}

/// `f_n / ∫ f_n`, the level-n estimate of the Bernoulli convolution density.
pub fn density_estimate<B: Backend>(beta: &B, n: usize, limits: &Limits) -> Result<PiecewiseConstant<B::Num>> {
    let f = iterate_f_n(beta, n, limits)?;
    let total = integral(&f, beta);
    let inv = beta
        .div(&beta.one(), &total)
        .ok_or_else(|| Error::SupportViolation("f_n has zero integral".into()))?;
    Ok(f.scale(beta, &inv))
}

/// Tail maxima and minima of `f_k(x)`, finite-n stand-ins for the upper and
/// lower limits of `f_n(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnvelope {
    pub upper: f64,
    pub lower: f64,
    /// First n of the tail window.
    pub start: usize,
}

/// Envelope of `f_k(x)` over `k ∈ [⌈(1 - window)·n_max⌉, n_max]`; `window = 0.5`
/// gives the default tail `[⌈n_max/2⌉, n_max]`.
pub fn tail_envelope<B: Backend>(
    x: &B::Num,
    beta: &B,
    n_max: usize,
    window: f64,
    limits: &Limits,
) -> Result<TailEnvelope> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParams(format!("window {window} must be in (0, 1]")));
    }
    let report = growth_sequence(x, beta, n_max, limits)?;
    let start = (((1.0 - window) * n_max as f64).ceil() as usize).max(1);
    let (lower, upper) = tail_bounds(&report.results, start);
    Ok(TailEnvelope { upper, lower, start })
}

/// Per-sample trace of `f_n(x)` for the convergence diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    pub x: f64,
    /// `f_1(x), …, f_{n_max}(x)`.
    pub f_n: Vec<f64>,
    pub tail_min: f64,
    pub tail_max: f64,
    /// `tail_max - tail_min`.
    pub oscillation: f64,
}

/// Exploratory report on whether `f_n(x)` settles down as `n` grows. Nothing
/// here is a pass/fail criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_max: usize,
    pub tail_start: usize,
    pub samples: Vec<SampleTrace>,
    pub median_oscillation: f64,
    pub mean_oscillation: f64,
    pub max_oscillation: f64,
}

pub fn convergence_diagnostic<B: Backend>(
    beta: &B,
    x_samples: &[B::Num],
    n_max: usize,
    limits: &Limits,
) -> Result<ConvergenceReport> {
    if x_samples.is_empty() {
        return Err(Error::InvalidParams("no sample points".into()));
    }
    let samples = x_samples
        .par_iter()
        .map(|x| {
            let report = growth_sequence(x, beta, n_max, limits)?;
            Ok(SampleTrace {
                x: beta.to_f64(x),
                f_n: report.results.iter().map(|r| r.f_n_value).collect(),
                tail_min: report.tail_min_f_n,
                tail_max: report.tail_max_f_n,
                oscillation: report.tail_max_f_n - report.tail_min_f_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut osc: Vec<f64> = samples.iter().map(|s| s.oscillation).collect();
    osc.sort_by(f64::total_cmp);
    let len = osc.len();
    let median_oscillation =
        if len % 2 == 1 { osc[len / 2] } else { 0.5 * (osc[len / 2 - 1] + osc[len / 2]) };
    Ok(ConvergenceReport {
        n_max,
        tail_start: n_max.div_ceil(2).max(1),
        median_oscillation,
        mean_oscillation: osc.iter().sum::<f64>() / len as f64,
        max_oscillation: osc[len - 1],
        samples,
    })
}
