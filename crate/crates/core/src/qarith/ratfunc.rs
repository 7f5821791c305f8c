use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Signed;

use super::laurent::LaurentPoly;
use super::poly;

/// An element of `ℚ(v)` in canonical reduced form.
///
/// The pair `(num, den)` is coprime in `ℤ[v]`, `den` has lowest exponent 0 and
/// a positive leading coefficient. Two rational functions are equal exactly when
/// their fields are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: LaurentPoly::zero(), den: LaurentPoly::one() }
    }

    pub fn one() -> Self {
        Self::from(LaurentPoly::one())
    }

    pub fn v_pow(e: i64) -> Self {
        Self::from(LaurentPoly::v_pow(e))
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from(LaurentPoly::constant(c))
    }

    /// `num / den`, reduced. Panics if `den` is zero.
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_unit() {
            // ±v^k: fold straight into the numerator
            let sign = den.leading_coeff().unwrap().clone();
            let num = num.shift(-den.low_degree()).scale(&sign);
            return RatFunc { num, den: LaurentPoly::one() };
        }
        // v is a unit, so only the ℤ[v]-shapes of the coefficient vectors matter
        let g = poly::gcd(num.raw_coeffs(), den.raw_coeffs());
        let n = poly::div_exact(num.raw_coeffs(), &g).expect("gcd divides numerator");
        let mut d = poly::div_exact(den.raw_coeffs(), &g).expect("gcd divides denominator");
        let mut n = LaurentPoly::from_coeffs(num.low_degree() - den.low_degree(), n);
        if d.last().is_some_and(|c| c.is_negative()) {
            for c in d.iter_mut() {
                *c = -&*c;
            }
            n = -n;
        }
        RatFunc { num: n, den: LaurentPoly::from_coeffs(0, d) }
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn denominator(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Membership in `𝒜`: the Laurent polynomial equal to `self`, if any.
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            None
        } else {
            Some(RatFunc::new(self.den.clone(), self.num.clone()))
        }
    }

    pub fn pow(&self, n: u32) -> RatFunc {
        RatFunc::new(self.num.pow(n), self.den.pow(n))
    }

    /// Substitution `v ↦ v^d`.
    pub fn dilate(&self, d: u32) -> RatFunc {
        RatFunc::new(self.num.dilate(d), self.den.dilate(d))
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<LaurentPoly> for RatFunc {
    fn from(num: LaurentPoly) -> Self {
        RatFunc { num, den: LaurentPoly::one() }
    }
}

impl From<&LaurentPoly> for RatFunc {
    fn from(num: &LaurentPoly) -> Self {
        RatFunc { num: num.clone(), den: LaurentPoly::one() }
    }
}

impl From<i64> for RatFunc {
    fn from(c: i64) -> Self {
        Self::constant(c)
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFunc::from(num);
            }
            return RatFunc::new(num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::new(num, &self.den * &rhs.den)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from(&self.num * &rhs.num);
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        assert!(!rhs.is_zero(), "division by zero in ℚ(v)");
        RatFunc::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -self.num, den: self.den }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Canonical text: `p` when the denominator is 1, otherwise `(p)/(q)`.
impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    #[test]
    fn reduces_to_lowest_terms() {
        // (v^2 - v^-2) / (v - v^-1) = v + v^-1
        let f = RatFunc::new(lp(&[(2, 1), (-2, -1)]), lp(&[(1, 1), (-1, -1)]));
        assert_eq!(f, RatFunc::from(lp(&[(1, 1), (-1, 1)])));
    }

    #[test]
    fn denominator_normalized() {
        // 1 / (-2v^3 + 2v^2) -> -1 / (2v^2 (v - 1)) -> (-v^-2)/(2v - 2)
        let f = RatFunc::new(LaurentPoly::one(), lp(&[(3, -2), (2, 2)]));
        assert_eq!(f.denominator(), &lp(&[(0, -2), (1, 2)]));
        assert_eq!(f.numerator(), &lp(&[(-2, -1)]));
    }

    #[test]
    fn scalar_content_reduced() {
        let f = RatFunc::new(LaurentPoly::constant(4), LaurentPoly::constant(6));
        assert_eq!(f.numerator(), &LaurentPoly::constant(2));
        assert_eq!(f.denominator(), &LaurentPoly::constant(3));
    }
}
