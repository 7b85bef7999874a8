//! ε-complex numbers `a + i_ε b` with `i_ε² = ε ∈ {−1, +1}`.
//!
//! `ε = −1` gives the ordinary complex numbers, `ε = +1` the para-complex
//! (split-complex) numbers. The components may be plain `f64` or [`Jet`]s,
//! which is how ε-holomorphic prepotentials are differentiated.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::error::{Error, Result};

/// Threshold on `|z|²` below which division is refused.
pub const ZERO_DIVISOR_TOL: f64 = 1e-14;

/// A sign `±1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct Sign(i8);

impl Sign {
    pub const MINUS: Sign = Sign(-1);
    pub const PLUS: Sign = Sign(1);

    pub fn new(s: i8) -> Result<Sign> {
        match s {
            1 => Ok(Sign::PLUS),
            -1 => Ok(Sign::MINUS),
            _ => Err(Error::Config(format!("sign must be +1 or -1, got {s}"))),
        }
    }

    /// Sign of a nonzero real number.
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::MINUS
        } else {
            Sign::PLUS
        }
    }

    pub fn f(self) -> f64 {
        self.0 as f64
    }

    pub fn i(self) -> i8 {
        self.0
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign(self.0 * rhs.0)
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign(-self.0)
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Sign> {
        Sign::new(v)
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.0
    }
}

impl fmt::Debug for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// Scalars that ε-complex arithmetic can be built on.
pub trait Real:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// Value at the base point (the number itself for `f64`).
    fn value(&self) -> f64;
    /// A constant of the same shape as `self`.
    fn lift(&self, v: f64) -> Self;
    fn recip(&self) -> Self;
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, v: f64) -> f64 {
        v
    }
    fn recip(&self) -> f64 {
        1.0 / self
    }
}

impl Real for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, v: f64) -> Jet {
        self.constant_like(v)
    }
    fn recip(&self) -> Jet {
        Jet::recip(self)
    }
}

/// An ε-complex number `re + i_ε im`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsComplex<T = f64> {
    pub re: T,
    pub im: T,
    pub eps: Sign,
}

impl<T: Real> EpsComplex<T> {
    pub fn new(re: T, im: T, eps: Sign) -> Self {
        EpsComplex { re, im, eps }
    }

    pub fn real(re: T, eps: Sign) -> Self {
        let im = re.lift(0.0);
        EpsComplex { re, im, eps }
    }

    /// The unit `i_ε` shaped like `like`.
    pub fn unit(like: &T, eps: Sign) -> Self {
        EpsComplex {
            re: like.lift(0.0),
            im: like.lift(1.0),
            eps,
        }
    }

    pub fn conj(&self) -> Self {
        EpsComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
            eps: self.eps,
        }
    }

    /// `z z̄ = re² − ε im²`; indefinite when `ε = +1`.
    pub fn norm_sqr(&self) -> T {
        self.re.clone() * self.re.clone() - self.im.clone() * self.im.clone() * self.eps.f()
    }

    pub fn scale(&self, s: f64) -> Self {
        EpsComplex {
            re: self.re.clone() * s,
            im: self.im.clone() * s,
            eps: self.eps,
        }
    }

    pub fn scale_real(&self, s: &T) -> Self {
        EpsComplex {
            re: self.re.clone() * s.clone(),
            im: self.im.clone() * s.clone(),
            eps: self.eps,
        }
    }

    /// Multiplication that reports mismatched units instead of panicking.
    pub fn try_mul(&self, b: &Self) -> Result<Self> {
        if self.eps != b.eps {
            return Err(Error::usage(format!(
                "cannot multiply eps = {} by eps = {}",
                self.eps, b.eps
            )));
        }
        let e = self.eps.f();
        Ok(EpsComplex {
            re: self.re.clone() * b.re.clone() + self.im.clone() * b.im.clone() * e,
            im: self.re.clone() * b.im.clone() + self.im.clone() * b.re.clone(),
            eps: self.eps,
        })
    }

    /// Multiplicative inverse; refuses (near-)zero divisors.
    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.value().abs() < ZERO_DIVISOR_TOL {
            return Err(Error::domain(format!(
                "eps-complex division by a zero divisor (|z|^2 = {:e})",
                n.value()
            )));
        }
        let r = n.recip();
        Ok(self.conj().scale_real(&r))
    }

    pub fn try_div(&self, b: &Self) -> Result<Self> {
        self.try_mul(&b.inv()?)
    }

    pub fn try_add(&self, b: &Self) -> Result<Self> {
        if self.eps != b.eps {
            return Err(Error::usage("cannot add numbers with different eps"));
        }
        Ok(self.clone() + b.clone())
    }
}

/// Product of two ε-complex numbers.
pub fn eps_mul<T: Real>(a: &EpsComplex<T>, b: &EpsComplex<T>) -> Result<EpsComplex<T>> {
    a.try_mul(b)
}

impl<T: Real> Add for EpsComplex<T> {
    type Output = EpsComplex<T>;
    fn add(self, b: Self) -> Self {
        assert_eq!(self.eps, b.eps, "mismatched eps in addition");
        EpsComplex {
            re: self.re + b.re,
            im: self.im + b.im,
            eps: self.eps,
        }
    }
}

impl<T: Real> Sub for EpsComplex<T> {
    type Output = EpsComplex<T>;
    fn sub(self, b: Self) -> Self {
        assert_eq!(self.eps, b.eps, "mismatched eps in subtraction");
        EpsComplex {
            re: self.re - b.re,
            im: self.im - b.im,
            eps: self.eps,
        }
    }
}

impl<T: Real> Mul for EpsComplex<T> {
    type Output = EpsComplex<T>;
    fn mul(self, b: Self) -> Self {
        self.try_mul(&b).expect("mismatched eps in multiplication")
    }
}

impl<T: Real> Neg for EpsComplex<T> {
    type Output = EpsComplex<T>;
    fn neg(self) -> Self {
        EpsComplex {
            re: -self.re,
            im: -self.im,
            eps: self.eps,
        }
    }
}

impl EpsComplex<Jet> {
    /// Componentwise partial derivative.
    pub fn d(&self, var: usize) -> Self {
        EpsComplex {
            re: self.re.d(var),
            im: self.im.d(var),
            eps: self.eps,
        }
    }

    pub fn value(&self) -> EpsComplex<f64> {
        EpsComplex {
            re: self.re.value(),
            im: self.im.value(),
            eps: self.eps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64, e: Sign) -> EpsComplex {
        EpsComplex::new(re, im, e)
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let i = c(0.0, 1.0, Sign::MINUS);
        assert_eq!(eps_mul(&i, &i).unwrap(), c(-1.0, 0.0, Sign::MINUS));
    }

    #[test]
    fn para_unit_squares_to_plus_one() {
        let e = c(0.0, 1.0, Sign::PLUS);
        assert_eq!(eps_mul(&e, &e).unwrap(), c(1.0, 0.0, Sign::PLUS));
    }

    #[test]
    fn para_zero_divisor() {
        let a = c(1.0, 1.0, Sign::PLUS);
        let b = c(1.0, -1.0, Sign::PLUS);
        assert_eq!(eps_mul(&a, &b).unwrap(), c(0.0, 0.0, Sign::PLUS));
        assert!(matches!(a.inv(), Err(Error::Domain(_))));
    }

    #[test]
    fn mismatched_units_are_usage_errors() {
        let a = c(1.0, 2.0, Sign::PLUS);
        let b = c(1.0, 2.0, Sign::MINUS);
        assert!(matches!(eps_mul(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn sign_parsing() {
        assert!(Sign::new(0).is_err());
        assert_eq!(Sign::new(-1).unwrap() * Sign::MINUS, Sign::PLUS);
    }
}
