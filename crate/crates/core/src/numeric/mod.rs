//! Numeric backends for the base β.
//!
//! Every algorithm in the crate is generic over [`Backend`], which bundles the
//! base β with the arithmetic of the field its points live in:
//!
//! * [`FloatBeta`]: `f64` values; comparisons treat `|u - v| <= tol` as equal
//!   and closed intervals are widened by `tol` on both sides.
//! * [`QuadBeta`]: exact arithmetic in `Q(β)` where `β^2 = aβ + b`; points are
//!   `p + qβ` with arbitrary-precision rationals `p`, `q`.
//!
//! [`BetaParam`] and [`Point`] are the type-erased forms used by the CLI and
//! the C ABI.

mod float;
mod quadratic;

pub use float::FloatBeta;
pub use quadratic::{QuadBeta, QuadNum};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Default comparison tolerance of the float backend.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Arithmetic in the field generated by β, plus the base itself.
#[allow(clippy::wrong_self_convention)]
pub trait Backend: Clone + fmt::Debug + Send + Sync {
    type Num: Clone + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Num;
    fn from_int(&self, value: i64) -> Self::Num;
    fn from_rational(&self, value: &BigRational) -> Self::Num;
    fn from_biguint(&self, value: &BigUint) -> Self::Num;
    fn beta(&self) -> Self::Num;
    /// `1/(β-1)`, the right end of `I_β`.
    fn i_beta_right(&self) -> Self::Num;

    fn add(&self, u: &Self::Num, v: &Self::Num) -> Self::Num;
    fn sub(&self, u: &Self::Num, v: &Self::Num) -> Self::Num;
    fn mul(&self, u: &Self::Num, v: &Self::Num) -> Self::Num;
    fn mul_beta(&self, u: &Self::Num) -> Self::Num;
    fn div_beta(&self, u: &Self::Num) -> Self::Num;
    fn half(&self, u: &Self::Num) -> Self::Num;
    /// `u / v`, or `None` when `v` is zero.
    fn div(&self, u: &Self::Num, v: &Self::Num) -> Option<Self::Num>;

    /// Ordering with the backend's notion of equality (tolerance-aware for
    /// floats, exact otherwise).
    fn cmp(&self, u: &Self::Num, v: &Self::Num) -> Ordering;
    /// A strict total order used for sorting. Exact backends return the same
    /// as [`Backend::cmp`].
    fn total_cmp(&self, u: &Self::Num, v: &Self::Num) -> Ordering;

    fn to_f64(&self, u: &Self::Num) -> f64;
    /// `(p, q)` with `u = p + qβ`, when the backend is exact.
    fn exact_parts(&self, u: &Self::Num) -> Option<(BigRational, BigRational)>;

    fn beta_f64(&self) -> f64;
    fn tolerance(&self) -> f64;
    fn is_exact(&self) -> bool;

    // Derived operations.

    fn one(&self) -> Self::Num {
        self.from_int(1)
    }

    fn scale_int(&self, u: &Self::Num, k: i64) -> Self::Num {
        self.mul(u, &self.from_int(k))
    }

    /// `T_d(x) = βx - d`.
    fn apply_t(&self, digit: u8, x: &Self::Num) -> Self::Num {
        let bx = self.mul_beta(x);
        if digit == 0 {
            bx
        } else {
            self.sub(&bx, &self.from_int(digit as i64))
        }
    }

    /// One step of an orbit under `T_d`. The float backend snaps results
    /// within the tolerance of `0` or `1/(β-1)` onto the endpoint: both are
    /// fixed points, and without snapping the rounding error grows by a
    /// factor β per step until the orbit falls out of `I_β`.
    fn orbit_step(&self, digit: u8, x: &Self::Num) -> Self::Num {
        self.apply_t(digit, x)
    }

    fn lt(&self, u: &Self::Num, v: &Self::Num) -> bool {
        self.cmp(u, v) == Ordering::Less
    }

    fn le(&self, u: &Self::Num, v: &Self::Num) -> bool {
        self.cmp(u, v) != Ordering::Greater
    }

    fn is_zero(&self, u: &Self::Num) -> bool {
        self.cmp(u, &self.zero()) == Ordering::Equal
    }

    fn abs(&self, u: &Self::Num) -> Self::Num {
        if self.total_cmp(u, &self.zero()) == Ordering::Less {
            self.sub(&self.zero(), u)
        } else {
            u.clone()
        }
    }

    /// Closed membership `lo <= x <= hi` under [`Backend::cmp`].
    fn in_closed(&self, x: &Self::Num, lo: &Self::Num, hi: &Self::Num) -> bool {
        self.le(lo, x) && self.le(x, hi)
    }

    fn in_i_beta(&self, x: &Self::Num) -> bool {
        self.in_closed(x, &self.zero(), &self.i_beta_right())
    }

    /// `β^{-k}`.
    fn beta_pow_neg(&self, k: usize) -> Self::Num {
        (0..k).fold(self.one(), |acc, _| self.div_beta(&acc))
    }

    /// `ℓ_n = 1/((β-1)β^n)`, the length of the interval of points whose
    /// expansions share a given length-n prefix.
    fn prefix_window(&self, n: usize) -> Self::Num {
        (0..n).fold(self.i_beta_right(), |acc, _| self.div_beta(&acc))
    }

    /// `Σ w_i β^{-i}` by Horner's rule.
    fn word_sum(&self, digits: &[u8]) -> Self::Num {
        digits.iter().rev().fold(self.zero(), |acc, &d| {
            self.div_beta(&self.add(&acc, &self.from_int(d as i64)))
        })
    }

    /// Which digits keep the orbit of `y` inside `I_β`: `(T_0(y) ∈ I_β, T_1(y) ∈ I_β)`.
    /// Both counting and the random β-transformation branch on this.
    fn allowed_digits(&self, y: &Self::Num) -> (bool, bool) {
        (
            self.in_i_beta(&self.apply_t(0, y)),
            self.in_i_beta(&self.apply_t(1, y)),
        )
    }

    /// True when some decision `T_d(y) ∈ I_β` was within `tol` of a boundary.
    /// Always false for exact backends.
    fn near_boundary(&self, y: &Self::Num) -> bool {
        if self.is_exact() {
            return false;
        }
        let tol = self.tolerance();
        let right = self.to_f64(&self.i_beta_right());
        [0u8, 1].iter().any(|&d| {
            let t = self.to_f64(&self.apply_t(d, y));
            (t.abs() <= tol) || ((t - right).abs() <= tol)
        })
    }

    /// Left end of the switch region, `1/β`.
    fn switch_lo(&self) -> Self::Num {
        self.div_beta(&self.one())
    }

    /// Right end of the switch region, `1/(β(β-1))`.
    fn switch_hi(&self) -> Self::Num {
        self.div_beta(&self.i_beta_right())
    }
}

/// Depth, size and budget caps shared by all operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest prefix length accepted by the counting operations.
    pub max_depth: usize,
    /// Largest number of words `enumerate_prefixes` will materialize.
    pub max_enumeration: usize,
    /// Largest n for the brute-force interval oracle.
    pub max_oracle_depth: usize,
    /// Largest n for building `ν_{β,n}`.
    pub max_measure_depth: usize,
    /// Largest number of pieces a piecewise-constant density may have.
    pub piece_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: 30,
            max_enumeration: 1_000_000,
            max_oracle_depth: 22,
            max_measure_depth: 24,
            piece_budget: 2_000_000,
        }
    }
}

impl Limits {
    pub(crate) fn check_depth(&self, n: usize) -> Result<()> {
        if n > self.max_depth {
            return Err(Error::DepthExceeded { n, max: self.max_depth });
        }
        Ok(())
    }
}

/// A finite word over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DigitWord(Vec<u8>);

impl DigitWord {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d > 1) {
            return Err(Error::InvalidParams(format!("digit {d} is not 0 or 1")));
        }
        Ok(DigitWord(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ w_i β^{-i}`.
    pub fn value<B: Backend>(&self, beta: &B) -> B::Num {
        beta.word_sum(&self.0)
    }

    pub(crate) fn from_digits_unchecked(digits: Vec<u8>) -> Self {
        DigitWord(digits)
    }
}

impl std::str::FromStr for DigitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParams(format!("'{other}' is not a binary digit"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(DigitWord)
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// How the user specifies β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Float { value: f64, tolerance: f64 },
    Quadratic { a: i64, b: i64 },
}

/// A validated base β with its backend, type-erased.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum BetaParam {
    Float(FloatBeta),
    Quadratic(QuadBeta),
}

/// A number in one of the two backends.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Float(f64),
    Quad(QuadNum),
}

pub fn make_beta(spec: BetaSpec) -> Result<BetaParam> {
    match spec {
        BetaSpec::Float { value, tolerance } => {
            FloatBeta::with_tolerance(value, tolerance).map(BetaParam::Float)
        }
        BetaSpec::Quadratic { a, b } => QuadBeta::new(a, b).map(BetaParam::Quadratic),
    }
}

impl BetaParam {
    pub fn value(&self) -> f64 {
        match self {
            BetaParam::Float(b) => b.beta_f64(),
            BetaParam::Quadratic(b) => b.beta_f64(),
        }
    }

    pub fn i_beta_right(&self) -> Point {
        match self {
            BetaParam::Float(b) => Point::Float(b.i_beta_right()),
            BetaParam::Quadratic(b) => Point::Quad(b.i_beta_right()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BetaParam::Quadratic(_))
    }

    /// The rational `value` as a point of this backend.
    pub fn point_from_rational(&self, value: &BigRational) -> Point {
        match self {
            BetaParam::Float(b) => Point::Float(b.from_rational(value)),
            BetaParam::Quadratic(b) => Point::Quad(b.from_rational(value)),
        }
    }

    /// `p + qβ`. In the float backend this is evaluated in `f64`.
    pub fn point_from_parts(&self, p: &BigRational, q: &BigRational) -> Point {
        match self {
            BetaParam::Float(b) => {
                let pf = b.from_rational(p);
                let qf = b.from_rational(q);
                Point::Float(pf + qf * b.beta_f64())
            }
            BetaParam::Quadratic(b) => Point::Quad(b.num(p.clone(), q.clone())),
        }
    }

    pub fn apply_t(&self, digit: u8, x: &Point) -> Result<Point> {
        match (self, x) {
            (BetaParam::Float(b), Point::Float(v)) => Ok(Point::Float(b.apply_t(digit, v))),
            (BetaParam::Quadratic(b), Point::Quad(v)) => Ok(Point::Quad(b.apply_t(digit, v))),
            _ => Err(Error::BackendMismatch),
        }
    }
}

impl Point {
    pub fn to_f64(&self) -> f64 {
        match self {
            Point::Float(v) => *v,
            Point::Quad(q) => q.approx(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Float(v) => write!(f, "{v}"),
            Point::Quad(q) => write!(f, "{q}"),
        }
    }
}

/// Exact (quadratic) or tolerance-aware (float) comparison of two points.
pub fn cmp_points(u: &Point, v: &Point, beta: &BetaParam) -> Result<Ordering> {
    match (beta, u, v) {
        (BetaParam::Float(b), Point::Float(x), Point::Float(y)) => Ok(b.cmp(x, y)),
        (BetaParam::Quadratic(b), Point::Quad(x), Point::Quad(y)) => Ok(b.cmp(x, y)),
        _ => Err(Error::BackendMismatch),
    }
}

/// Uniform random point of `I_β` on the grid `k·2^{-40}·(1/(β-1))`. In the
/// exact backend the point is an exact element of `Q(β)`.
pub fn uniform_point<B: Backend, R: rand::Rng + ?Sized>(beta: &B, rng: &mut R) -> B::Num {
    const BITS: u32 = 40;
    let k: u64 = rng.random_range(0..=1u64 << BITS);
    let u = BigRational::new(k.into(), (1u64 << BITS).into());
    beta.mul(&beta.from_rational(&u), &beta.i_beta_right())
}

/// Sort with the strict order, then collapse runs whose consecutive members
/// compare equal, summing their weights. The first member of a run is kept.
pub(crate) fn sort_and_merge<B, W>(
    beta: &B,
    mut items: Vec<(B::Num, W)>,
    mut combine: impl FnMut(&mut W, W),
) -> Vec<(B::Num, W)>
where
    B: Backend,
{
    items.sort_by(|x, y| beta.total_cmp(&x.0, &y.0));
    let mut out: Vec<(B::Num, W)> = Vec::with_capacity(items.len());
    let mut last: Option<B::Num> = None;
    for (value, weight) in items {
        match (&last, out.last_mut()) {
            (Some(prev), Some(top)) if beta.cmp(prev, &value) == Ordering::Equal => {
                combine(&mut top.1, weight);
                last = Some(value);
            }
            _ => {
                last = Some(value.clone());
                out.push((value, weight));
            }
        }
    }
    out
}
