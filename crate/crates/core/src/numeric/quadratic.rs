use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::Backend;
use crate::error::{Error, Result};

/// `p + qβ` with rational coordinates.
///
/// A cached `f64` approximation short-circuits comparisons whose outcome is
/// clear at double precision; the exact test runs otherwise.
#[derive(Clone)]
pub struct QuadNum {
    p: BigRational,
    q: BigRational,
    approx: f64,
    magnitude: f64,
}

impl QuadNum {
    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    /// Double-precision value of `p + qβ`.
    pub fn approx(&self) -> f64 {
        self.approx
    }
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q
    }
}

impl Eq for QuadNum {}

impl Hash for QuadNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.q.hash(state);
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadNum({} + {}β ≈ {})", self.p, self.q, self.approx)
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}β", self.p, self.q)
    }
}

/// The real root in (1, 2) of `x^2 = a x + b`, with exact arithmetic in `Q(β)`.
#[derive(Debug, Clone)]
pub struct QuadBeta {
    a: i64,
    b: i64,
    a_rat: BigRational,
    b_rat: BigRational,
    disc: BigRational,
    beta: f64,
    right: QuadNum,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl QuadBeta {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        // f(x) = x^2 - a x - b; the larger root lies in (1, 2) iff f(1) < 0 < f(2)
        // (f is convex and f(1) < 0 puts 1 strictly between the roots).
        if a < 1 || b < 1 || 1 - a - b >= 0 || 4 - 2 * a - b <= 0 {
            return Err(Error::InvalidPolynomial { a, b });
        }
        let beta = (a as f64 + ((a * a + 4 * b) as f64).sqrt()) / 2.0;
        let mut out = QuadBeta {
            a,
            b,
            a_rat: int(a),
            b_rat: int(b),
            disc: int(a * a + 4 * b),
            beta,
            right: QuadNum {
                p: BigRational::zero(),
                q: BigRational::zero(),
                approx: 0.0,
                magnitude: 0.0,
            },
        };
        let beta_minus_one = out.num(int(-1), int(1));
        out.right = out
            .div(&out.one(), &beta_minus_one)
            .expect("β - 1 is non-zero");
        Ok(out)
    }

    /// The golden ratio, `x^2 = x + 1`.
    pub fn golden() -> Self {
        Self::new(1, 1).expect("(1, 1) is valid")
    }

    pub fn coefficients(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn num(&self, p: BigRational, q: BigRational) -> QuadNum {
        let pf = p.to_f64().unwrap_or(f64::NAN);
        let qf = q.to_f64().unwrap_or(f64::NAN);
        QuadNum {
            approx: pf + qf * self.beta,
            magnitude: pf.abs() + qf.abs() * self.beta,
            p,
            q,
        }
    }

    fn exact_sign(&self, u: &QuadNum) -> Ordering {
        // p + qβ = (r + s√D)/2 with r = 2p + qa, s = q, D = a^2 + 4b.
        let r = &u.p * int(2) + &u.q * &self.a_rat;
        let s = &u.q;
        let sign = |x: &BigRational| match x.numer().sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        };
        match (sign(&r), sign(s)) {
            (Ordering::Equal, t) | (t, Ordering::Equal) => t,
            (x, y) if x == y => x,
            (Ordering::Greater, _) => (&r * &r).cmp(&(s * s * &self.disc)),
            (_, _) => (s * s * &self.disc).cmp(&(&r * &r)),
        }
    }
}

impl Backend for QuadBeta {
    type Num = QuadNum;

    fn zero(&self) -> QuadNum {
        self.num(BigRational::zero(), BigRational::zero())
    }

    fn from_int(&self, value: i64) -> QuadNum {
        self.num(int(value), BigRational::zero())
    }

    fn from_rational(&self, value: &BigRational) -> QuadNum {
        self.num(value.clone(), BigRational::zero())
    }

    fn from_biguint(&self, value: &BigUint) -> QuadNum {
        let v = BigRational::from_integer(BigInt::from(value.clone()));
        self.num(v, BigRational::zero())
    }

    fn beta(&self) -> QuadNum {
        self.num(BigRational::zero(), int(1))
    }

    fn i_beta_right(&self) -> QuadNum {
        self.right.clone()
    }

    fn add(&self, u: &QuadNum, v: &QuadNum) -> QuadNum {
        self.num(&u.p + &v.p, &u.q + &v.q)
    }

    fn sub(&self, u: &QuadNum, v: &QuadNum) -> QuadNum {
        self.num(&u.p - &v.p, &u.q - &v.q)
    }

    fn mul(&self, u: &QuadNum, v: &QuadNum) -> QuadNum {
        // β^2 = aβ + b
        let qq = &u.q * &v.q;
        let p = &u.p * &v.p + &qq * &self.b_rat;
        let q = &u.p * &v.q + &u.q * &v.p + &qq * &self.a_rat;
        self.num(p, q)
    }

    fn mul_beta(&self, u: &QuadNum) -> QuadNum {
        // β(p + qβ) = qb + (p + qa)β
        self.num(&u.q * &self.b_rat, &u.p + &u.q * &self.a_rat)
    }

    fn div_beta(&self, u: &QuadNum) -> QuadNum {
        // 1/β = (β - a)/b
        let p_over_b = &u.p / &self.b_rat;
        self.num(&u.q - &p_over_b * &self.a_rat, p_over_b)
    }

    fn half(&self, u: &QuadNum) -> QuadNum {
        let two = int(2);
        self.num(&u.p / &two, &u.q / &two)
    }

    fn div(&self, u: &QuadNum, v: &QuadNum) -> Option<QuadNum> {
        // (p + qβ)(p + qa - qβ) = p^2 + apq - bq^2
        let norm = &v.p * &v.p + &self.a_rat * &v.p * &v.q - &self.b_rat * &v.q * &v.q;
        if norm.is_zero() {
            return None;
        }
        let conj = self.num((&v.p + &v.q * &self.a_rat) / &norm, -&v.q / &norm);
        Some(self.mul(u, &conj))
    }

    fn cmp(&self, u: &QuadNum, v: &QuadNum) -> Ordering {
        let gap = u.approx - v.approx;
        let slack = 1e-12 * (1.0 + u.magnitude + v.magnitude);
        if gap.is_finite() && slack.is_finite() && gap.abs() > slack {
            return if gap > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        self.exact_sign(&self.sub(u, v))
    }

    fn total_cmp(&self, u: &QuadNum, v: &QuadNum) -> Ordering {
        self.cmp(u, v)
    }

    fn to_f64(&self, u: &QuadNum) -> f64 {
        u.approx
    }

    fn exact_parts(&self, u: &QuadNum) -> Option<(BigRational, BigRational)> {
        Some((u.p.clone(), u.q.clone()))
    }

    fn beta_f64(&self) -> f64 {
        self.beta
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn abs(&self, u: &QuadNum) -> QuadNum {
        if self.exact_sign(u) == Ordering::Less {
            self.num(-&u.p, -&u.q)
        } else {
            u.clone()
        }
    }
}

/// Exact sign helper exposed for tests of the comparison routine.
#[cfg(test)]
pub(crate) fn sign_of(beta: &QuadBeta, u: &QuadNum) -> Ordering {
    beta.exact_sign(u)
}
