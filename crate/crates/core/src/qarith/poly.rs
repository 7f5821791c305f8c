//! Dense integer polynomials in `ℤ[v]`, lowest degree first.
//!
//! These are the helpers behind Laurent-polynomial division and the gcd used
//! to keep rational functions reduced. A polynomial is a `Vec<BigInt>` with no
//! trailing zeros; the empty vector is zero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) fn trim(p: &mut Vec<BigInt>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) fn content(p: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for c in p {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

pub(crate) fn scale_div(p: &[BigInt], c: &BigInt) -> Vec<BigInt> {
    p.iter().map(|x| x / c).collect()
}

fn primitive_part(p: &[BigInt]) -> Vec<BigInt> {
    let c = content(p);
    if c.is_zero() || c.is_one() {
        p.to_vec()
    } else {
        scale_div(p, &c)
    }
}

pub(crate) fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) · a mod b`.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lead = &b[db];
    let mut r = a.to_vec();
    while r.len() > db {
        let dr = r.len() - 1;
        let top = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lead;
        }
        let shift = dr - db;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] -= &top * bk;
        }
        trim(&mut r);
    }
    r
}

/// Exact quotient `a / b` in `ℤ[v]`, or `None` when `b` does not divide `a`.
pub(crate) fn div_exact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert!(!b.is_empty(), "division by the zero polynomial");
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let db = b.len() - 1;
    let lead = &b[db];
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    while r.len() > db {
        let dr = r.len() - 1;
        let (quot, rem) = r[dr].div_rem(lead);
        if !rem.is_zero() {
            return None;
        }
        let shift = dr - db;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] -= &quot * bk;
        }
        q[shift] = quot;
        trim(&mut r);
    }
    if r.is_empty() {
        trim(&mut q);
        Some(q)
    } else {
        None
    }
}

/// Greatest common divisor in `ℤ[v]` with positive leading coefficient.
///
/// Content and primitive part are handled separately; the primitive parts go
/// through a primitive pseudo-remainder sequence.
pub(crate) fn gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() {
        return normalize_sign(b.to_vec());
    }
    if b.is_empty() {
        return normalize_sign(a.to_vec());
    }
    let c = content(a).gcd(&content(b));
    let (mut x, mut y) = if a.len() >= b.len() {
        (primitive_part(a), primitive_part(b))
    } else {
        (primitive_part(b), primitive_part(a))
    };
    while !y.is_empty() {
        if y.len() == 1 {
            // a nonzero constant: the primitive gcd is 1
            x = vec![BigInt::one()];
            break;
        }
        let r = pseudo_rem(&x, &y);
        x = y;
        y = primitive_part(&r);
    }
    let mut g = primitive_part(&x);
    for coeff in g.iter_mut() {
        *coeff *= &c;
    }
    normalize_sign(g)
}

fn normalize_sign(mut p: Vec<BigInt>) -> Vec<BigInt> {
    if p.last().is_some_and(|c| c.is_negative()) {
        for c in p.iter_mut() {
            *c = -&*c;
        }
    }
    p
}
