//! Counting length-n prefixes of β-expansions.
//!
//! A word `w_1 … w_n` is a prefix of some expansion of `x` exactly when every
//! partial orbit `T_{w_k} ∘ … ∘ T_{w_1}(x)` stays in `I_β`. The counter walks
//! this tree breadth-first and merges orbit points that compare equal, keeping
//! multiplicities; for Pisot β the frontier stays bounded.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::numeric::{sort_and_merge, Backend, DigitWord, Limits};

/// `N_n(x; β)` together with its two standard normalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub n: usize,
    pub count: BigUint,
    /// `(β-1)(β/2)^n N_n`.
    pub f_n_value: f64,
    /// `(β/2)^n N_n`.
    pub garsia_erdos: f64,
    /// `ln(N_n)/n`; `None` for `n = 0`.
    pub log_rate: Option<f64>,
    /// Set when some branch decision was within the float tolerance of a
    /// boundary of `I_β`, so the count depends on the tolerance.
    pub near_boundary: bool,
}

impl CountResult {
    fn new<B: Backend>(beta: &B, n: usize, count: BigUint, near_boundary: bool) -> Self {
        let c = count.to_f64().unwrap_or(f64::INFINITY);
        let b = beta.beta_f64();
        let garsia_erdos = (b / 2.0).powi(n as i32) * c;
        CountResult {
            n,
            f_n_value: (b - 1.0) * garsia_erdos,
            garsia_erdos,
            log_rate: (n > 0).then(|| c.ln() / n as f64),
            near_boundary,
            count,
        }
    }
}

/// Orbit points reached after some number of steps, with how many words
/// lead to each.
#[derive(Debug, Clone)]
pub struct Frontier<B: Backend> {
    depth: usize,
    points: Vec<(B::Num, BigUint)>,
    near_boundary: bool,
}

impl<B: Backend> Frontier<B> {
    pub fn start(beta: &B, x: &B::Num) -> Result<Self> {
        check_in_interval(beta, x)?;
        Ok(Frontier { depth: 0, points: vec![(x.clone(), BigUint::one())], near_boundary: false })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of distinct orbit points.
    pub fn width(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[(B::Num, BigUint)] {
        &self.points
    }

    pub fn count(&self) -> BigUint {
        self.points.iter().map(|(_, m)| m).sum()
    }

    pub fn near_boundary(&self) -> bool {
        self.near_boundary
    }

    /// Extend every surviving word by one digit.
    pub fn advance(&mut self, beta: &B) {
        let mut next = Vec::with_capacity(self.points.len() * 2);
        for (y, mult) in self.points.drain(..) {
            self.near_boundary |= beta.near_boundary(&y);
            let (zero, one) = beta.allowed_digits(&y);
            match (zero, one) {
                (true, true) => {
                    next.push((beta.orbit_step(0, &y), mult.clone()));
                    next.push((beta.orbit_step(1, &y), mult));
                }
                (true, false) => next.push((beta.orbit_step(0, &y), mult)),
                (false, true) => next.push((beta.orbit_step(1, &y), mult)),
                (false, false) => {}
            }
        }
        self.points = sort_and_merge(beta, next, |acc, m| *acc += m);
        self.depth += 1;
    }

    pub fn result(&self, beta: &B) -> CountResult {
        CountResult::new(beta, self.depth, self.count(), self.near_boundary)
    }
}

pub(crate) fn check_in_interval<B: Backend>(beta: &B, x: &B::Num) -> Result<()> {
    if !beta.in_i_beta(x) {
        return Err(Error::PointOutsideInterval {
            x: beta.to_f64(x),
            right: beta.to_f64(&beta.i_beta_right()),
        });
    }
    Ok(())
}

/// `N_n(x; β)`.
pub fn count_prefixes<B: Backend>(
    x: &B::Num,
    n: usize,
    beta: &B,
    limits: &Limits,
) -> Result<CountResult> {
    limits.check_depth(n)?;
    let mut frontier = Frontier::start(beta, x)?;
    for _ in 0..n {
        frontier.advance(beta);
    }
    Ok(frontier.result(beta))
}

/// `f_n(x) = (β-1)(β/2)^n N_n(x; β)` in the backend's arithmetic.
pub fn f_n_at<B: Backend>(x: &B::Num, n: usize, beta: &B, limits: &Limits) -> Result<B::Num> {
    let result = count_prefixes(x, n, beta, limits)?;
    Ok(normalized_count(beta, n, &result.count))
}

/// `(β-1)(β/2)^n · count`.
pub fn normalized_count<B: Backend>(beta: &B, n: usize, count: &BigUint) -> B::Num {
    let mut scale = beta.sub(&beta.beta(), &beta.one());
    for _ in 0..n {
        scale = beta.half(&beta.mul_beta(&scale));
    }
    beta.mul(&scale, &beta.from_biguint(count))
}

/// The lexicographically sorted list of length-n prefixes of expansions of `x`.
pub fn enumerate_prefixes<B: Backend>(
    x: &B::Num,
    n: usize,
    beta: &B,
    limits: &Limits,
) -> Result<Vec<DigitWord>> {
    let count = count_prefixes(x, n, beta, limits)?.count;
    if count > BigUint::from(limits.max_enumeration) {
        return Err(Error::OutputTooLarge { count: count.to_string(), cap: limits.max_enumeration });
    }
    let mut words = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut prefix = Vec::with_capacity(n);
    enumerate_rec(beta, x, n, &mut prefix, &mut words);
    Ok(words)
}

fn enumerate_rec<B: Backend>(
    beta: &B,
    y: &B::Num,
    remaining: usize,
    prefix: &mut Vec<u8>,
    out: &mut Vec<DigitWord>,
) {
    if remaining == 0 {
        out.push(DigitWord::from_digits_unchecked(prefix.clone()));
        return;
    }
    let (zero, one) = beta.allowed_digits(y);
    for (digit, allowed) in [(0u8, zero), (1u8, one)] {
        if allowed {
            prefix.push(digit);
            enumerate_rec(beta, &beta.orbit_step(digit, y), remaining - 1, prefix, out);
            prefix.pop();
        }
    }
}

/// Result of the brute-force interval test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCount {
    pub count: u64,
    /// Some word sum lies within the float tolerance of a window endpoint.
    pub near_boundary: bool,
}

/// Brute-force count of words whose sum `Σ w_i β^{-i}` lies in the closed
/// window `[x - ℓ_n, x]`, over all `2^n` words.
pub fn count_by_interval_oracle<B: Backend>(
    x: &B::Num,
    n: usize,
    beta: &B,
    limits: &Limits,
) -> Result<OracleCount> {
    if n > limits.max_oracle_depth {
        return Err(Error::DepthExceeded { n, max: limits.max_oracle_depth });
    }
    check_in_interval(beta, x)?;
    let lo = beta.sub(x, &beta.prefix_window(n));
    let powers: Vec<B::Num> = (1..=n).map(|k| beta.beta_pow_neg(k)).collect();
    let tol = beta.tolerance();
    let (lo_f, hi_f) = (beta.to_f64(&lo), beta.to_f64(x));

    let mut out = OracleCount { count: 0, near_boundary: false };
    // Depth-first over the digit tree so each level costs one addition.
    let mut stack = vec![(beta.zero(), 0usize)];
    while let Some((sum, depth)) = stack.pop() {
        if depth == n {
            if beta.in_closed(&sum, &lo, x) {
                out.count += 1;
            }
            if !beta.is_exact() {
                let s = beta.to_f64(&sum);
                out.near_boundary |= (s - lo_f).abs() <= tol || (s - hi_f).abs() <= tol;
            }
            continue;
        }
        stack.push((beta.add(&sum, &powers[depth]), depth + 1));
        stack.push((sum, depth + 1));
    }
    Ok(out)
}

/// `CountResult` for every `n = 1..=n_max` plus running and tail statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub results: Vec<CountResult>,
    /// `max_{k <= n} (β/2)^k N_k`, one entry per result.
    pub running_max_garsia_erdos: Vec<f64>,
    /// First n of the tail window `[⌈n_max/2⌉, n_max]`.
    pub tail_start: usize,
    pub tail_min_f_n: f64,
    pub tail_max_f_n: f64,
}

/// Counts for `n = 1..=n_max`, extending one frontier incrementally.
pub fn growth_sequence<B: Backend>(
    x: &B::Num,
    beta: &B,
    n_max: usize,
    limits: &Limits,
) -> Result<GrowthReport> {
    limits.check_depth(n_max)?;
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    let mut frontier = Frontier::start(beta, x)?;
    let mut results = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        frontier.advance(beta);
        results.push(frontier.result(beta));
    }
    let running_max_garsia_erdos = results
        .iter()
        .scan(f64::NEG_INFINITY, |acc, r| {
            *acc = acc.max(r.garsia_erdos);
            Some(*acc)
        })
        .collect();
    let tail_start = n_max.div_ceil(2).max(1);
    let (tail_min_f_n, tail_max_f_n) = tail_bounds(&results, tail_start);
    Ok(GrowthReport { results, running_max_garsia_erdos, tail_start, tail_min_f_n, tail_max_f_n })
}

pub(crate) fn tail_bounds(results: &[CountResult], start: usize) -> (f64, f64) {
    results
        .iter()
        .filter(|r| r.n >= start)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.f_n_value), hi.max(r.f_n_value))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{FloatBeta, QuadBeta, QuadNum};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Count words whose *final* orbit point is in `I_β`, ignoring the
    /// intermediate points.
    fn count_by_final_orbit<B: Backend>(beta: &B, x: &B::Num, n: usize) -> u64 {
        (0u64..1 << n)
            .filter(|bits| {
                let y = (0..n).fold(x.clone(), |y, i| beta.apply_t(((bits >> (n - 1 - i)) & 1) as u8, &y));
                beta.in_i_beta(&y)
            })
            .count() as u64
    }

    fn random_quad_point(g: &QuadBeta, rng: &mut ChaCha8Rng) -> QuadNum {
        let u = rat(rng.random_range(0..1i64 << 20), 1 << 20);
        g.mul(&g.from_rational(&u), &g.i_beta_right())
    }

    #[test]
    fn endpoints_have_one_prefix() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        for n in [0, 1, 5, 25] {
            let r = count_prefixes(&g.zero(), n, &g, &limits).unwrap();
            assert_eq!(r.count, BigUint::from(1u32));
            let r = count_prefixes(&g.i_beta_right(), n, &g, &limits).unwrap();
            assert_eq!(r.count, BigUint::from(1u32));
        }
        let f = FloatBeta::new(1.37).unwrap();
        for n in [1, 10, 25] {
            assert_eq!(count_prefixes(&0.0, n, &f, &limits).unwrap().count, BigUint::from(1u32));
            let right = f.i_beta_right();
            assert_eq!(count_prefixes(&right, n, &f, &limits).unwrap().count, BigUint::from(1u32));
        }
    }

    #[test]
    fn golden_fixture_at_one() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        let r = count_prefixes(&g.one(), 2, &g, &limits).unwrap();
        assert_eq!(r.count, BigUint::from(3u32));
        let words = enumerate_prefixes(&g.one(), 2, &g, &limits).unwrap();
        let words: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["01", "10", "11"]);
        let oracle = count_by_interval_oracle(&g.one(), 2, &g, &limits).unwrap();
        assert_eq!(oracle.count, 3);
        assert!(!oracle.near_boundary);
    }

    #[test]
    fn enumerate_small_cases() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        let words = enumerate_prefixes(&g.zero(), 3, &g, &limits).unwrap();
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].to_string(), "000");
        let inv_phi = g.div_beta(&g.one());
        let words = enumerate_prefixes(&inv_phi, 1, &g, &limits).unwrap();
        let words: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["0", "1"]);
        assert_eq!(count_by_interval_oracle(&g.zero(), 5, &g, &limits).unwrap().count, 1);
    }

    #[test]
    fn errors() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        let outside = g.from_int(2);
        assert_eq!(count_prefixes(&outside, 3, &g, &limits).unwrap_err().name(), "PointOutsideInterval");
        assert_eq!(count_prefixes(&g.one(), 31, &g, &limits).unwrap_err().name(), "DepthExceeded");
        assert_eq!(
            count_by_interval_oracle(&g.one(), 23, &g, &limits).unwrap_err().name(),
            "DepthExceeded"
        );
        let tight = Limits { max_enumeration: 2, ..limits };
        assert_eq!(enumerate_prefixes(&g.one(), 2, &g, &tight).unwrap_err().name(), "OutputTooLarge");
    }

    #[test]
    fn partial_and_final_orbit_tests_agree() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = random_quad_point(&g, &mut rng);
            let n = rng.random_range(1..=10);
            let direct = count_prefixes(&x, n, &g, &limits).unwrap().count;
            assert_eq!(direct, BigUint::from(count_by_final_orbit(&g, &x, n)));
        }
    }

    #[test]
    fn branching_is_monotone() {
        let limits = Limits::default();
        let f = FloatBeta::new(1.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = rng.random::<f64>() * f.i_beta_right();
            let g = growth_sequence(&x, &f, 16, &limits).unwrap();
            let mut prev = BigUint::one();
            for r in &g.results {
                assert!(r.count >= prev && r.count <= &prev * 2u32);
                prev = r.count.clone();
            }
        }
    }

    #[test]
    fn digit_allowance_trichotomy() {
        let g = QuadBeta::golden();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (lo, hi) = (g.switch_lo(), g.switch_hi());
        let mut points: Vec<QuadNum> = (0..10_000).map(|_| random_quad_point(&g, &mut rng)).collect();
        points.extend([lo.clone(), hi.clone(), g.zero(), g.i_beta_right()]);
        for y in &points {
            let expected = if g.lt(y, &lo) {
                (true, false)
            } else if g.le(y, &hi) {
                (true, true)
            } else {
                (false, true)
            };
            assert_eq!(g.allowed_digits(y), expected, "at {y:?}");
        }
        let f = FloatBeta::new(1.45).unwrap();
        for _ in 0..10_000 {
            let y = rng.random::<f64>() * f.i_beta_right();
            let expected = (y <= f.switch_hi(), y >= f.switch_lo());
            if (y - f.switch_hi()).abs() > 1e-9 && (y - f.switch_lo()).abs() > 1e-9 {
                assert_eq!(f.allowed_digits(&y), expected);
            }
        }
    }

    #[test]
    fn growth_matches_direct_counts() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        let x = g.from_rational(&rat(3, 7));
        let report = growth_sequence(&x, &g, 12, &limits).unwrap();
        for r in &report.results {
            assert_eq!(r.count, count_prefixes(&x, r.n, &g, &limits).unwrap().count);
            assert!((r.f_n_value - (g.beta_f64() - 1.0) * r.garsia_erdos).abs() < 1e-12);
        }
        assert_eq!(report.tail_start, 6);
        assert!(report.tail_min_f_n <= report.tail_max_f_n);
        for w in report.running_max_garsia_erdos.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let zero = growth_sequence(&g.zero(), &g, 5, &limits).unwrap();
        assert!(zero.results.iter().all(|r| r.log_rate == Some(0.0)));
    }

    #[test]
    fn f_n_at_is_exact() {
        let limits = Limits::default();
        let g = QuadBeta::golden();
        // N_1(1) = 2, f_1 = (φ-1)φ/2 · 2 = 1
        assert_eq!(f_n_at(&g.one(), 1, &g, &limits).unwrap(), g.one());
    }
}
