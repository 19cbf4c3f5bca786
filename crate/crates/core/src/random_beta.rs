//! The random β-transformation `K_β(ω, x)`.
//!
//! Below the switch region `S = [1/β, 1/(β(β-1))]` the orbit applies `T_0`,
//! above it `T_1`; inside `S` the next bit of `ω` chooses the map and `ω` is
//! shifted. The number of visits to `S` in `n` steps is the hitting number
//! `h(ω, x, n)`, and `N_n(x; β) = ∫ 2^{h(ω,x,n)} dm(ω)`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::counting::{check_in_interval, count_prefixes};
use crate::error::{Error, Result};
use crate::numeric::{uniform_point, Backend, DigitWord, FloatBeta, Limits, DEFAULT_TOLERANCE};

/// Stream used for sampling the starting points in [`bound_check`].
const BOUND_SAMPLE_STREAM: u64 = u64::MAX;

/// Fair bits from ChaCha8 keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct SeededBits {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    buffer: u64,
    available: u32,
}

impl SeededBits {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SeededBits { seed, stream, rng, buffer: 0, available: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    fn next_bit(&mut self) -> u8 {
        if self.available == 0 {
            self.buffer = self.rng.next_u64();
            self.available = 64;
        }
        let bit = (self.buffer & 1) as u8;
        self.buffer >>= 1;
        self.available -= 1;
        bit
    }
}

/// The coin sequence `ω`. Bits are consumed only at switch-region visits.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum OmegaSource {
    Explicit { bits: Vec<u8>, cursor: usize },
    Seeded(SeededBits),
}

impl OmegaSource {
    pub fn explicit(word: &DigitWord) -> Self {
        OmegaSource::Explicit { bits: word.digits().to_vec(), cursor: 0 }
    }

    pub fn seeded(seed: u64, stream: u64) -> Self {
        OmegaSource::Seeded(SeededBits::new(seed, stream))
    }

    /// Consume one bit (the shift `σ`).
    pub fn next_bit(&mut self) -> Result<u8> {
        match self {
            OmegaSource::Explicit { bits, cursor } => {
                let bit = *bits.get(*cursor).ok_or(Error::OmegaExhausted { consumed: *cursor })?;
                *cursor += 1;
                Ok(bit)
            }
            OmegaSource::Seeded(s) => Ok(s.next_bit()),
        }
    }
}

/// `(ω, x)` together with step and hit counters.
#[derive(Debug, Clone)]
pub struct OrbitState<N> {
    pub x: N,
    pub omega: OmegaSource,
    pub step_count: usize,
    pub hit_count: usize,
    pub digit_log: Option<Vec<u8>>,
}

impl<N: Clone> OrbitState<N> {
    pub fn new(x: N, omega: OmegaSource) -> Self {
        OrbitState { x, omega, step_count: 0, hit_count: 0, digit_log: None }
    }

    /// Record the emitted digits.
    pub fn with_log(mut self) -> Self {
        self.digit_log = Some(Vec::new());
        self
    }

    /// Apply `K_β` in place and return the emitted digit.
    pub fn step<B: Backend<Num = N>>(&mut self, beta: &B) -> Result<u8> {
        let digit = match beta.allowed_digits(&self.x) {
            (true, false) => 0,
            (false, true) => 1,
            (true, true) => {
                self.hit_count += 1;
                self.omega.next_bit()?
            }
            (false, false) => {
                check_in_interval(beta, &self.x)?;
                // T_0(x) and T_1(x) both leave I_β only when x does.
                unreachable!("x in I_β always has an admissible digit");
            }
        };
        self.x = beta.orbit_step(digit, &self.x);
        self.step_count += 1;
        if let Some(log) = self.digit_log.as_mut() {
            log.push(digit);
        }
        Ok(digit)
    }
}

/// One application of `K_β`, returning the new state and the emitted digit.
pub fn k_step<B: Backend>(state: &OrbitState<B::Num>, beta: &B) -> Result<(OrbitState<B::Num>, u8)> {
    let mut next = state.clone();
    let digit = next.step(beta)?;
    Ok((next, digit))
}

/// `h(ω, x, n)`: visits to the switch region among the first `n` steps.
pub fn hitting_number<B: Backend>(x: &B::Num, omega: OmegaSource, n: usize, beta: &B) -> Result<usize> {
    check_in_interval(beta, x)?;
    let mut state = OrbitState::new(x.clone(), omega);
    for _ in 0..n {
        state.step(beta)?;
    }
    Ok(state.hit_count)
}

/// Leaves of the `K_β` choice tree to depth `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceTree {
    /// `leaves_by_hits[h]` leaves were reached through exactly `h` switch visits.
    pub leaves_by_hits: Vec<BigUint>,
    /// `∫ 2^h dm = Σ_h 2^h · m{h(ω) = h}`, with `m{h(ω) = h} = leaves_by_hits[h] · 2^{-h}`.
    pub integral: BigRational,
}

impl ChoiceTree {
    pub fn leaf_count(&self) -> BigUint {
        self.leaves_by_hits.iter().sum()
    }
}

fn check_tree_depth(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.max_oracle_depth {
        return Err(Error::DepthExceeded { n, max: limits.max_oracle_depth });
    }
    Ok(())
}

/// Walk every branch of `K_β` from `x`, splitting on both bits at each
/// switch visit.
pub fn choice_tree<B: Backend>(x: &B::Num, n: usize, beta: &B, limits: &Limits) -> Result<ChoiceTree> {
    check_tree_depth(n, limits)?;
    check_in_interval(beta, x)?;
    let mut leaves_by_hits = vec![BigUint::zero(); n + 1];
    let mut stack = vec![(x.clone(), 0usize, 0usize)];
    while let Some((y, depth, hits)) = stack.pop() {
        if depth == n {
            leaves_by_hits[hits] += 1u32;
            continue;
        }
        match beta.allowed_digits(&y) {
            (true, true) => {
                stack.push((beta.orbit_step(1, &y), depth + 1, hits + 1));
                stack.push((beta.orbit_step(0, &y), depth + 1, hits + 1));
            }
            (true, false) => stack.push((beta.orbit_step(0, &y), depth + 1, hits)),
            (false, true) => stack.push((beta.orbit_step(1, &y), depth + 1, hits)),
            (false, false) => {}
        }
    }
    let integral = leaves_by_hits.iter().enumerate().fold(BigRational::zero(), |acc, (h, leaves)| {
        let two_h = BigUint::one() << h;
        let cylinder_mass = BigRational::new(leaves.clone().into(), two_h.clone().into());
        acc + cylinder_mass * BigRational::from_integer(two_h.into())
    });
    Ok(ChoiceTree { leaves_by_hits, integral })
}

/// `N_n(x; β)` as `∫ 2^{h(ω,x,n)} dm`, evaluated as a finite sum over the
/// choice tree.
pub fn choice_tree_count<B: Backend>(x: &B::Num, n: usize, beta: &B, limits: &Limits) -> Result<BigUint> {
    let tree = choice_tree(x, n, beta, limits)?;
    debug_assert!(tree.integral.denom().is_one());
    let (numer, denom) = (tree.integral.numer(), tree.integral.denom());
    let (q, r) = numer.div_rem(denom);
    assert!(r.is_zero(), "the integral of 2^h is a whole number of leaves");
    Ok(q.to_biguint().expect("non-negative"))
}

/// Each leaf as `(ω_1…ω_h, x_1…x_n)`: the coin word consumed and the digits
/// emitted along the way.
pub fn choice_tree_leaves<B: Backend>(
    x: &B::Num,
    n: usize,
    beta: &B,
    limits: &Limits,
) -> Result<Vec<(DigitWord, DigitWord)>> {
    check_tree_depth(n, limits)?;
    check_in_interval(beta, x)?;
    let mut out = Vec::new();
    let mut stack = vec![(x.clone(), Vec::<u8>::new(), Vec::<u8>::new())];
    while let Some((y, omega, digits)) = stack.pop() {
        if digits.len() == n {
            out.push((DigitWord::from_digits_unchecked(omega), DigitWord::from_digits_unchecked(digits)));
            continue;
        }
        let (zero, one) = beta.allowed_digits(&y);
        for d in [1u8, 0] {
            if (d == 0 && zero) || (d == 1 && one) {
                let mut o = omega.clone();
                if zero && one {
                    o.push(d);
                }
                let mut w = digits.clone();
                w.push(d);
                stack.push((beta.orbit_step(d, &y), o, w));
            }
        }
    }
    Ok(out)
}

/// Monte-Carlo settings for the switch-region frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McParams {
    pub orbits: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl McParams {
    /// `burn_in` defaults to 10% of `steps`.
    pub fn new(orbits: usize, steps: usize, seed: u64) -> Self {
        McParams { orbits, steps, burn_in: steps / 10, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.orbits < 2 {
            return Err(Error::InvalidParams("at least two orbits are needed".into()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::InvalidParams(format!(
                "steps ({}) must exceed burn_in ({})",
                self.steps, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Statistics of one simulated orbit after burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSummary {
    pub orbit: usize,
    pub seed: u64,
    pub x0: f64,
    /// Steps counted (after burn-in).
    pub steps: usize,
    /// Switch visits among the counted steps.
    pub hits: usize,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub orbits: Vec<OrbitSummary>,
}

/// Streams for orbit `i`: `2i` draws the starting point, `2i + 1` feeds `ω`.
fn simulate_orbit(beta: &FloatBeta, params: &McParams, orbit: usize) -> OrbitSummary {
    let mut start_rng = ChaCha8Rng::seed_from_u64(params.seed);
    start_rng.set_stream(2 * orbit as u64);
    let right = beta.i_beta_right();
    let x0 = start_rng.random::<f64>() * right;
    let mut state = OrbitState::new(x0, OmegaSource::seeded(params.seed, 2 * orbit as u64 + 1));
    let mut hits_at_burn_in = 0;
    for step in 0..params.steps {
        if step == params.burn_in {
            hits_at_burn_in = state.hit_count;
        }
        // rounding can push the orbit a hair outside I_β
        state.x = state.x.clamp(0.0, right);
        state.step(beta).expect("clamped orbit stays in I_β and ω is unbounded");
    }
    let counted = params.steps - params.burn_in;
    let hits = state.hit_count - hits_at_burn_in;
    OrbitSummary { orbit, seed: params.seed, x0, steps: counted, hits, hit_rate: hits as f64 / counted as f64 }
}

/// Estimate `μ_β(S)` as the mean post-burn-in switch frequency over
/// independent orbits started uniformly on `I_β`. The simulation always runs
/// in `f64`; exact backends use the default tolerance. Output is identical
/// for any thread count.
pub fn estimate_mu_s<B: Backend>(beta: &B, params: &McParams) -> Result<McEstimate> {
    params.validate()?;
    let tol = if beta.is_exact() { DEFAULT_TOLERANCE } else { beta.tolerance() };
    let fb = FloatBeta::with_tolerance(beta.beta_f64(), tol)?;
    let orbits: Vec<OrbitSummary> =
        (0..params.orbits).into_par_iter().map(|i| simulate_orbit(&fb, params, i)).collect();
    let (mean, std_error) = mean_and_std_error(orbits.iter().map(|o| o.hit_rate));
    Ok(McEstimate { estimate: mean, std_error, orbits })
}

/// Mean and standard error with Neumaier-compensated sums, in input order.
fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = compensated_sum(values.clone()) / n;
    let var = compensated_sum(values.map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `c(β) = ln 2 · μ_β(S)` with its propagated standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct CBeta {
    pub value: f64,
    pub std_error: f64,
    pub mu: McEstimate,
}

pub fn c_beta<B: Backend>(beta: &B, params: &McParams) -> Result<CBeta> {
    let mu = estimate_mu_s(beta, params)?;
    let ln2 = std::f64::consts::LN_2;
    Ok(CBeta { value: ln2 * mu.estimate, std_error: ln2 * mu.std_error, mu })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub x: f64,
    /// `ln(N_n(x; β))/n`.
    pub log_rate: f64,
    /// `log_rate - (c(β) - slack)`.
    pub margin: f64,
    pub satisfied: bool,
}

/// How many sampled points satisfy `ln(N_n(x))/n >= c(β) - slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub c_beta: f64,
    pub c_beta_std_error: f64,
    pub slack: f64,
    pub samples: Vec<BoundSample>,
    pub fraction: f64,
}

/// Check the growth lower bound at given points against a known `c(β)`.
pub fn bound_check_points<B: Backend>(
    beta: &B,
    xs: &[B::Num],
    n: usize,
    c: &CBeta,
    slack: f64,
    limits: &Limits,
) -> Result<BoundReport> {
    if n == 0 || xs.is_empty() {
        return Err(Error::InvalidParams("need n >= 1 and at least one point".into()));
    }
    let threshold = c.value - slack;
    let samples = xs
        .par_iter()
        .map(|x| {
            let count = count_prefixes(x, n, beta, limits)?.count;
            let log_rate = count.to_f64().unwrap_or(f64::INFINITY).ln() / n as f64;
            Ok(BoundSample {
                x: beta.to_f64(x),
                log_rate,
                margin: log_rate - threshold,
                satisfied: log_rate >= threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fraction = samples.iter().filter(|s| s.satisfied).count() as f64 / samples.len() as f64;
    Ok(BoundReport { n, c_beta: c.value, c_beta_std_error: c.std_error, slack, samples, fraction })
}

/// Estimate `c(β)`, sample `x_sample_count` uniform points (seeded from
/// `params.seed`) and check the growth bound at each.
pub fn bound_check<B: Backend>(
    beta: &B,
    x_sample_count: usize,
    n: usize,
    params: &McParams,
    slack: f64,
    limits: &Limits,
) -> Result<BoundReport> {
    limits.check_depth(n)?;
    let c = c_beta(beta, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(BOUND_SAMPLE_STREAM);
    let xs: Vec<B::Num> = (0..x_sample_count).map(|_| uniform_point(beta, &mut rng)).collect();
    bound_check_points(beta, &xs, n, &c, slack, limits)
}
