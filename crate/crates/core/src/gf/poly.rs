//! Dense polynomials over F_q, little-endian coefficient vectors.
//!
//! Only what the tower construction needs: reduction, gcd, modular
//! powering and the Ben-Or irreducibility test.

use super::{BaseField, Fq};

pub(crate) fn trim(p: &mut Vec<Fq>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub(crate) fn degree(p: &[Fq]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub(crate) fn add(a: &[Fq], b: &[Fq]) -> Vec<Fq> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] ^= c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] ^= c;
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(f: &BaseField, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= f.mul(x, y);
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder of `a / d`; `d` must be nonzero.
pub(crate) fn divrem(f: &BaseField, a: &[Fq], d: &[Fq]) -> (Vec<Fq>, Vec<Fq>) {
    let dd = degree(d).expect("division by the zero polynomial");
    let lead_inv = f.inv(d[dd]).expect("nonzero leading coefficient");
    let mut rem = a.to_vec();
    trim(&mut rem);
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        let factor = f.mul(c, lead_inv);
        quot[i - dd] = factor;
        for j in 0..=dd {
            rem[i - dd + j] ^= f.mul(factor, d[j]);
        }
    }
    trim(&mut rem);
    trim(&mut quot);
    (quot, rem)
}

pub(crate) fn rem(f: &BaseField, a: &[Fq], d: &[Fq]) -> Vec<Fq> {
    divrem(f, a, d).1
}

pub(crate) fn gcd(f: &BaseField, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// `h^q mod modulus`, computed as `b` successive squarings.
fn frobenius(f: &BaseField, h: &[Fq], modulus: &[Fq]) -> Vec<Fq> {
    let mut acc = h.to_vec();
    for _ in 0..f.bits() {
        acc = rem(f, &mul(f, &acc, &acc), modulus);
    }
    acc
}

/// Ben-Or test: a degree-d polynomial is irreducible iff
/// gcd(p, x^{q^i} - x) = 1 for all 1 <= i <= d/2.
pub(crate) fn is_irreducible(f: &BaseField, p: &[Fq]) -> bool {
    let d = match degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    if p[0] == 0 {
        return false;
    }
    let x = vec![0, 1];
    let mut h = x.clone();
    for _ in 1..=d / 2 {
        h = frobenius(f, &h, p);
        let g = gcd(f, p, &add(&h, &x));
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Inverse of `a` modulo `modulus` by the extended Euclidean algorithm.
pub(crate) fn inv_mod(f: &BaseField, a: &[Fq], modulus: &[Fq]) -> Option<Vec<Fq>> {
    let mut r0 = modulus.to_vec();
    let mut r1 = rem(f, a, modulus);
    let mut t0: Vec<Fq> = Vec::new();
    let mut t1: Vec<Fq> = vec![1];
    trim(&mut r0);
    if r1.is_empty() {
        return None;
    }
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let t = add(&t0, &mul(f, &q, &t1));
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t;
    }
    // r0 is a nonzero constant when gcd = 1
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = f.inv(r0[0]).ok()?;
    let mut out: Vec<Fq> = t0.iter().map(|&t| f.mul(t, c)).collect();
    trim(&mut out);
    Some(out)
}

/// Polynomials over F_2 packed into a u32 (bit i = coefficient of x^i).
pub(crate) mod gf2 {
    pub fn degree(p: u32) -> Option<u32> {
        (p != 0).then(|| 31 - p.leading_zeros())
    }

    pub fn rem(mut a: u32, d: u32) -> u32 {
        let dd = degree(d).expect("nonzero divisor");
        while let Some(da) = degree(a) {
            if da < dd {
                break;
            }
            a ^= d << (da - dd);
        }
        a
    }

    /// Trial division by every polynomial of degree 1..=deg/2.
    pub fn is_irreducible(p: u32) -> bool {
        let d = match degree(p) {
            Some(d) if d >= 1 => d,
            _ => return false,
        };
        for dd in 1..=d / 2 {
            for low in 0..(1u32 << dd) {
                if rem(p, (1 << dd) | low) == 0 {
                    return false;
                }
            }
        }
        true
    }
}
