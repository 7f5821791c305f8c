use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::laurent::LaurentPoly;
use super::poly;
use super::ratfunc::RatFunc;
use super::{Field, QArithError};

/// Target ring of a specialization `v ↦ ξ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RingKind {
    /// `ℚ`.
    Rational,
    /// `ℚ[z]/Φ_n(z)`, the `n`-th cyclotomic field.
    Cyclotomic { order: u32 },
}

/// An element of a [`RingPoint`]'s ring: coefficients of `1, z, z², …` below
/// the degree of the modulus, without trailing zeros. Over `ℚ` only the
/// constant term is used.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RingElem(Vec<BigRational>);

impl RingElem {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    fn trimmed(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        RingElem(c)
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElem({self})")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        f.write_str("z")?;
                    } else {
                        write!(f, "z^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A commutative ring `R` together with the invertible image `ξ` of `v`.
///
/// Both supported rings are fields, so the same value also serves as the
/// scalar field for linear algebra over `R`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RingPoint {
    kind: RingKind,
    /// Monic modulus, lowest degree first. `[0, 1]` (the polynomial `z`) is
    /// never used; over `ℚ` the modulus is empty and elements are constants.
    modulus: Vec<BigInt>,
    xi: RingElem,
    xi_inv: RingElem,
}

impl RingPoint {
    /// `ℚ` with `ξ = num/den`.
    pub fn rational(num: i64, den: i64) -> Result<Self, QArithError> {
        if num == 0 || den == 0 {
            return Err(QArithError::NotInvertible(format!("{num}/{den}")));
        }
        let xi = BigRational::new(num.into(), den.into());
        let xi_inv = xi.recip();
        Ok(RingPoint {
            kind: RingKind::Rational,
            modulus: Vec::new(),
            xi: RingElem(vec![xi]),
            xi_inv: RingElem(vec![xi_inv]),
        })
    }

    /// `ℚ(ζ_n)` with `ξ = ζ_n` a primitive `n`-th root of unity.
    pub fn cyclotomic(order: u32) -> Result<Self, QArithError> {
        if order == 0 {
            return Err(QArithError::BadCyclotomicOrder(order));
        }
        let modulus = cyclotomic_polynomial(order);
        let mut point = RingPoint {
            kind: RingKind::Cyclotomic { order },
            modulus,
            xi: RingElem::default(),
            xi_inv: RingElem::default(),
        };
        let z = point.reduce(vec![BigRational::zero(), BigRational::one()]);
        // ζ^{-1} = ζ^{n-1}
        let z_inv = point.power(&z, order as u64 - 1);
        point.xi = z;
        point.xi_inv = z_inv;
        Ok(point)
    }

    pub fn kind(&self) -> &RingKind {
        &self.kind
    }

    pub fn xi(&self) -> &RingElem {
        &self.xi
    }

    /// Degree of the ring over `ℚ`.
    pub fn degree(&self) -> usize {
        match self.kind {
            RingKind::Rational => 1,
            RingKind::Cyclotomic { .. } => self.modulus.len() - 1,
        }
    }

    pub fn from_rational(&self, q: BigRational) -> RingElem {
        RingElem::trimmed(vec![q])
    }

    pub fn from_integer(&self, c: &BigInt) -> RingElem {
        self.from_rational(BigRational::from_integer(c.clone()))
    }

    /// `ξ^e` for any integer `e`.
    pub fn xi_pow(&self, e: i64) -> RingElem {
        if e >= 0 {
            self.power(&self.xi, e as u64)
        } else {
            self.power(&self.xi_inv, e.unsigned_abs())
        }
    }

    fn power(&self, base: &RingElem, mut e: u64) -> RingElem {
        let mut acc = self.one();
        let mut b = base.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn reduce(&self, mut c: Vec<BigRational>) -> RingElem {
        if let RingKind::Cyclotomic { .. } = self.kind {
            let deg = self.modulus.len() - 1;
            while c.len() > deg {
                let top = c.pop().unwrap();
                if top.is_zero() {
                    continue;
                }
                let shift = c.len() - deg;
                for (k, m) in self.modulus[..deg].iter().enumerate() {
                    c[shift + k] -= &top * BigRational::from_integer(m.clone());
                }
            }
        }
        RingElem::trimmed(c)
    }

    /// Image of a Laurent polynomial under `v ↦ ξ`.
    pub fn eval_laurent(&self, p: &LaurentPoly) -> RingElem {
        let mut acc = self.zero();
        for (e, c) in p.terms() {
            let term = self.mul(&self.from_integer(c), &self.xi_pow(e));
            acc = self.add(&acc, &term);
        }
        acc
    }

    /// Image of a rational function under `v ↦ ξ`.
    pub fn evaluate(&self, f: &RatFunc) -> Result<RingElem, QArithError> {
        let den = self.eval_laurent(f.denominator());
        let Some(den_inv) = self.inv(&den) else {
            return Err(QArithError::Pole {
                denominator: f.denominator().to_string(),
                factor: self.vanishing_factor(),
            });
        };
        Ok(self.mul(&self.eval_laurent(f.numerator()), &den_inv))
    }

    /// The irreducible factor over `ℚ` that vanishes at `ξ`.
    fn vanishing_factor(&self) -> String {
        match self.kind {
            RingKind::Rational => {
                let xi = &self.xi.0[0];
                format!("{}*v - {}", xi.denom(), xi.numer())
            }
            RingKind::Cyclotomic { order } => {
                let lp = LaurentPoly::from_coeffs(0, self.modulus.clone());
                format!("Φ_{order}(v) = {lp}")
            }
        }
    }
}

impl fmt::Display for RingPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::Rational => write!(f, "rational xi={}", self.xi.0[0]),
            RingKind::Cyclotomic { order } => write!(f, "cyclotomic {order}"),
        }
    }
}

impl Field for RingPoint {
    type Elem = RingElem;

    fn zero(&self) -> RingElem {
        RingElem::default()
    }

    fn one(&self) -> RingElem {
        RingElem(vec![BigRational::one()])
    }

    fn is_zero(&self, a: &RingElem) -> bool {
        a.0.is_empty()
    }

    fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let n = a.0.len().max(b.0.len());
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            let x = match (a.0.get(k), b.0.get(k)) {
                (Some(x), Some(y)) => x + y,
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => unreachable!(),
            };
            c.push(x);
        }
        RingElem::trimmed(c)
    }

    fn neg(&self, a: &RingElem) -> RingElem {
        RingElem(a.0.iter().map(|x| -x).collect())
    }

    fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        if a.0.is_empty() || b.0.is_empty() {
            return RingElem::default();
        }
        let mut c = vec![BigRational::zero(); a.0.len() + b.0.len() - 1];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        self.reduce(c)
    }

    fn inv(&self, a: &RingElem) -> Option<RingElem> {
        if a.0.is_empty() {
            return None;
        }
        match self.kind {
            RingKind::Rational => Some(RingElem(vec![a.0[0].recip()])),
            RingKind::Cyclotomic { .. } => {
                let m: Vec<BigRational> =
                    self.modulus.iter().map(|c| BigRational::from_integer(c.clone())).collect();
                let s = qpoly_inverse_mod(&a.0, &m)?;
                Some(self.reduce(s))
            }
        }
    }

    fn from_laurent(&self, p: &LaurentPoly) -> RingElem {
        self.eval_laurent(p)
    }

    fn render(&self, a: &RingElem) -> String {
        a.to_string()
    }
}

/// The `n`-th cyclotomic polynomial over `ℤ`, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    // x^n - 1 divided by Φ_d for every proper divisor d of n
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = BigInt::from(-1);
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            p = poly::div_exact(&p, &cyclotomic_polynomial(d)).expect("Φ_d divides x^n - 1");
        }
    }
    p
}

fn qtrim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// `(q, r)` with `a = q·b + r` over `ℚ[z]`.
fn qdivrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    qtrim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead = &b[db];
    while r.len() > db {
        let dr = r.len() - 1;
        let t = &r[dr] / lead;
        let shift = dr - db;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] -= &t * bk;
        }
        q[shift] = t;
        r.pop();
        qtrim(&mut r);
    }
    qtrim(&mut q);
    (q, r)
}

fn qmul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    qtrim(&mut c);
    c
}

fn qsub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut c = vec![BigRational::zero(); n];
    for (k, x) in a.iter().enumerate() {
        c[k] += x;
    }
    for (k, x) in b.iter().enumerate() {
        c[k] -= x;
    }
    qtrim(&mut c);
    c
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
fn qpoly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    qtrim(&mut r1);
    let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (Vec::new(), vec![BigRational::one()]);
    while !r1.is_empty() {
        let (q, r) = qdivrem(&r0, &r1);
        let s = qsub(&s0, &qmul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r0 is the gcd; invertible iff it is a nonzero constant
    if r0.len() != 1 {
        return None;
    }
    let c = r0[0].recip();
    Some(s0.into_iter().map(|x| x * &c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        let to_i = |p: Vec<BigInt>| p.into_iter().map(|c| i64::try_from(c).unwrap()).collect::<Vec<_>>();
        assert_eq!(to_i(cyclotomic_polynomial(1)), vec![-1, 1]);
        assert_eq!(to_i(cyclotomic_polynomial(2)), vec![1, 1]);
        assert_eq!(to_i(cyclotomic_polynomial(4)), vec![1, 0, 1]);
        assert_eq!(to_i(cyclotomic_polynomial(6)), vec![1, -1, 1]);
        assert_eq!(to_i(cyclotomic_polynomial(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn root_of_unity_has_exact_order() {
        let r = RingPoint::cyclotomic(6).unwrap();
        assert_eq!(r.xi_pow(6), r.one());
        assert_ne!(r.xi_pow(3), r.one());
        assert_eq!(r.mul(&r.xi_pow(-1), r.xi()), r.one());
    }

    #[test]
    fn inverses_in_cyclotomic_field() {
        let r = RingPoint::cyclotomic(5).unwrap();
        let a = r.add(&r.one(), &r.xi_pow(2));
        let b = r.inv(&a).unwrap();
        assert_eq!(r.mul(&a, &b), r.one());
    }
}
