use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly;

/// An element of `𝒜 = ℤ[v, v⁻¹]`.
///
/// Stored densely: `coeffs[k]` is the coefficient of `v^(low + k)`. The zero
/// polynomial has no coefficients and `low == 0`; otherwise the first and last
/// stored coefficients are nonzero, so the representation is canonical and the
/// derived equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { low: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0)
    }

    /// `c · v^e`.
    pub fn monomial(c: impl Into<BigInt>, e: i64) -> Self {
        Self::from_coeffs(e, vec![c.into()])
    }

    /// `v^e`.
    pub fn v_pow(e: i64) -> Self {
        Self::monomial(1, e)
    }

    /// Builds `Σ coeffs[k] v^(low+k)` and brings it into canonical form.
    pub fn from_coeffs(low: i64, mut coeffs: Vec<BigInt>) -> Self {
        poly::trim(&mut coeffs);
        let lead_zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros == coeffs.len() {
            return Self::zero();
        }
        coeffs.drain(..lead_zeros);
        LaurentPoly { low: low + lead_zeros as i64, coeffs }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let terms: Vec<(i64, BigInt)> = terms.into_iter().map(|(e, c)| (e, c.into())).collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Self::zero();
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize] += c;
        }
        Self::from_coeffs(lo, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Lowest exponent with a nonzero coefficient (0 for the zero polynomial).
    pub fn low_degree(&self) -> i64 {
        self.low
    }

    /// Highest exponent with a nonzero coefficient (`low_degree - 1` for zero).
    pub fn high_degree(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        let k = e - self.low;
        if k < 0 || k >= self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[k as usize].clone()
        }
    }

    pub(crate) fn raw_coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Nonzero terms `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (self.low + k as i64, c))
    }

    /// Leading (highest-degree) coefficient.
    pub fn leading_coeff(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Multiplication by `v^e`.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LaurentPoly { low: self.low + e, coeffs: self.coeffs.clone() }
    }

    /// Substitution `v ↦ v^d` for `d ≥ 1`.
    pub fn dilate(&self, d: u32) -> Self {
        assert!(d >= 1, "dilation factor must be positive");
        if d == 1 || self.is_zero() {
            return self.clone();
        }
        Self::from_terms(self.terms().map(|(e, c)| (e * d as i64, c.clone())))
    }

    /// Substitution `v ↦ v⁻¹`.
    pub fn bar(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        LaurentPoly { low: -self.high_degree(), coeffs }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Units of `𝒜` are exactly `±v^k`.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].abs().is_one()
    }

    /// Exact quotient in `𝒜`, if `divisor` divides `self`.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Option<LaurentPoly> {
        assert!(!divisor.is_zero(), "division by zero in ℤ[v, v⁻¹]");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let q = poly::div_exact(&self.coeffs, &divisor.coeffs)?;
        Some(Self::from_coeffs(self.low - divisor.low, q))
    }

    /// Evaluates with a caller-supplied arithmetic: `pow(e)` must return the
    /// image of `v^e`.
    pub fn eval_with<T, P, S, A>(&self, zero: T, mut pow: P, scale: S, add: A) -> T
    where
        P: FnMut(i64) -> T,
        S: Fn(&BigInt, T) -> T,
        A: Fn(T, T) -> T,
    {
        let mut acc = zero;
        for (e, c) in self.terms() {
            acc = add(acc, scale(c, pow(e)));
        }
        acc
    }
}

impl Default for LaurentPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for LaurentPoly {
    fn from(c: i64) -> Self {
        Self::constant(c)
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.low.min(rhs.low);
        let hi = self.high_degree().max(rhs.high_degree());
        let mut coeffs = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.low - lo) as usize + k] += c;
        }
        for (k, c) in rhs.coeffs.iter().enumerate() {
            coeffs[(rhs.low - lo) as usize + k] += c;
        }
        LaurentPoly::from_coeffs(lo, coeffs)
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly::from_coeffs(self.low + rhs.low, poly::mul(&self.coeffs, &rhs.coeffs))
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Canonical text form, highest exponent first: `v^2 - 3 + 2*v^-1`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<(i64, &BigInt)> = self.terms().collect();
        for (n, (e, c)) in terms.into_iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            match e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if e == 1 {
                        f.write_str("v")?;
                    } else {
                        write!(f, "v^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}
