use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Backend, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};

/// β as an `f64` with a comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatBeta {
    beta: f64,
    right: f64,
    tol: f64,
}

impl FloatBeta {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_tolerance(beta, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(beta: f64, tol: f64) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::OutOfRange(beta));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tolerance {tol} must be finite and >= 0")));
        }
        Ok(FloatBeta { beta, right: 1.0 / (beta - 1.0), tol })
    }
}

impl Backend for FloatBeta {
    type Num = f64;

    fn orbit_step(&self, digit: u8, x: &f64) -> f64 {
        let y = self.beta * x - digit as f64;
        if y.abs() <= self.tol {
            0.0
        } else if (y - self.right).abs() <= self.tol {
            self.right
        } else {
            y
        }
    }

    fn zero(&self) -> f64 {
        0.0
    }

    fn from_int(&self, value: i64) -> f64 {
        value as f64
    }

    fn from_rational(&self, value: &BigRational) -> f64 {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn from_biguint(&self, value: &BigUint) -> f64 {
        value.to_f64().unwrap_or(f64::INFINITY)
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn i_beta_right(&self) -> f64 {
        self.right
    }

    fn add(&self, u: &f64, v: &f64) -> f64 {
        u + v
    }

    fn sub(&self, u: &f64, v: &f64) -> f64 {
        u - v
    }

    fn mul(&self, u: &f64, v: &f64) -> f64 {
        u * v
    }

    fn mul_beta(&self, u: &f64) -> f64 {
        self.beta * u
    }

    fn div_beta(&self, u: &f64) -> f64 {
        u / self.beta
    }

    fn half(&self, u: &f64) -> f64 {
        0.5 * u
    }

    fn div(&self, u: &f64, v: &f64) -> Option<f64> {
        (*v != 0.0).then(|| u / v)
    }

    fn cmp(&self, u: &f64, v: &f64) -> Ordering {
        if (u - v).abs() <= self.tol {
            Ordering::Equal
        } else {
            u.total_cmp(v)
        }
    }

    fn total_cmp(&self, u: &f64, v: &f64) -> Ordering {
        u.total_cmp(v)
    }

    fn to_f64(&self, u: &f64) -> f64 {
        *u
    }

    fn exact_parts(&self, _u: &f64) -> Option<(BigRational, BigRational)> {
        None
    }

    fn beta_f64(&self) -> f64 {
        self.beta
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn is_exact(&self) -> bool {
        false
    }
}
