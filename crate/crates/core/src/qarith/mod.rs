//! Exact coefficient arithmetic: `ℤ[v, v⁻¹]`, `ℚ(v)`, specialization rings,
//! and quantum integers, factorials and Gaussian binomials.

mod laurent;
mod poly;
mod ratfunc;
mod ringpoint;
mod text;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use laurent::LaurentPoly;
pub use ratfunc::RatFunc;
pub use ringpoint::{cyclotomic_polynomial, RingElem, RingKind, RingPoint};
pub use text::{parse_laurent, parse_ratfunc, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QArithError {
    #[error("denominator {denominator} vanishes at ξ (offending factor {factor})")]
    Pole { denominator: String, factor: String },
    #[error("{0} is not invertible")]
    NotInvertible(String),
    #[error("cyclotomic order must be at least 1, got {0}")]
    BadCyclotomicOrder(u32),
}

/// Exact scalar arithmetic used by the linear algebra layer.
///
/// Implementors are ring *contexts*: elements carry no ring information, every
/// operation goes through the context. All implementors are fields.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` exactly for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of an element of `𝒜`.
    fn from_laurent(&self, p: &LaurentPoly) -> Self::Elem;
    fn render(&self, a: &Self::Elem) -> String;

    /// Image of an element of `ℚ(v)`, or `None` at a pole.
    fn from_ratfunc(&self, f: &RatFunc) -> Option<Self::Elem> {
        let num = self.from_laurent(f.numerator());
        let den = self.from_laurent(f.denominator());
        self.inv(&den).map(|d| self.mul(&num, &d))
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b).expect("division by zero"))
    }
}

/// The rational function field `ℚ(v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FunctionField;

impl Field for FunctionField {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        RatFunc::zero()
    }
    fn one(&self) -> RatFunc {
        RatFunc::one()
    }
    fn is_zero(&self, a: &RatFunc) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a + b
    }
    fn neg(&self, a: &RatFunc) -> RatFunc {
        -a
    }
    fn sub(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a - b
    }
    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a * b
    }
    fn inv(&self, a: &RatFunc) -> Option<RatFunc> {
        a.inv()
    }
    fn from_laurent(&self, p: &LaurentPoly) -> RatFunc {
        RatFunc::from(p)
    }
    fn from_ratfunc(&self, f: &RatFunc) -> Option<RatFunc> {
        Some(f.clone())
    }
    fn render(&self, a: &RatFunc) -> String {
        a.to_string()
    }
}

/// The field `ℚ`, used for exact weight-lattice computations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn from_laurent(&self, p: &LaurentPoly) -> BigRational {
        // v ↦ 1
        BigRational::from_integer(p.terms().map(|(_, c)| c.clone()).sum())
    }
    fn render(&self, a: &BigRational) -> String {
        a.to_string()
    }
}

/// Quantum integer `[n]` with `v` replaced by `v^d`:
/// `(v^{dn} - v^{-dn}) / (v^d - v^{-d})`.
pub fn qint(n: i64, d: u32) -> LaurentPoly {
    let d = d as i64;
    // [n] = v^{d(n-1)} + v^{d(n-3)} + … + v^{-d(n-1)}, antisymmetric in n
    let (sign, n) = if n < 0 { (-1, -n) } else { (1, n) };
    LaurentPoly::from_terms((0..n).map(|k| (d * (n - 1 - 2 * k), sign)))
}

/// Quantum factorial `[n]^! = [1][2]⋯[n]` in `v^d`.
pub fn qfact(n: u32, d: u32) -> LaurentPoly {
    (1..=n as i64).fold(LaurentPoly::one(), |acc, k| &acc * &qint(k, d))
}

/// Gaussian binomial `[a; t]` in `v^d` via the product formula, reduced into
/// `𝒜`. Valid for every integer `a`.
pub fn qbinom(a: i64, t: u32, d: u32) -> LaurentPoly {
    let mut num = LaurentPoly::one();
    let mut den = LaurentPoly::one();
    for s in 1..=t as i64 {
        let e = a - s + 1;
        num = &num * &LaurentPoly::from_terms([(e, 1), (-e, -1)]);
        den = &den * &LaurentPoly::from_terms([(s, 1), (-s, -1)]);
    }
    let q = RatFunc::new(num, den)
        .to_laurent()
        .expect("Gaussian binomials lie in ℤ[v, v⁻¹]");
    q.dilate(d)
}

/// Membership test for `𝒜` inside `ℚ(v)`.
pub fn is_integral(f: &RatFunc) -> Option<LaurentPoly> {
    f.to_laurent()
}
