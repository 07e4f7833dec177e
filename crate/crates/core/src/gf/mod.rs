//! The field tower F_2 ⊆ F_q ⊆ F_{q^s} with q = 2^b.
//!
//! F_q elements are `u16` values in the polynomial basis of the base
//! modulus. F_{q^s} elements are length-`s` vectors of F_q coordinates in
//! the power basis of the extension modulus, so F_q-linear maps on
//! F_{q^s} are plain `s x s` matrices over F_q.

mod basis;
pub(crate) mod poly;

use std::fmt;
use std::sync::Arc;

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use basis::BasisGamma;

/// An element of F_q, low `b` bits significant.
pub type Fq = u16;

/// Largest supported base-field degree.
pub const MAX_BASE_BITS: u32 = 16;

const SEARCH_CAP: usize = 10_000;

/// F_q = F_2[x]/(base_modulus) with log/exp tables.
#[derive(Clone)]
pub struct BaseField {
    inner: Arc<BaseInner>,
}

struct BaseInner {
    bits: u32,
    modulus: u32,
    exp: Vec<Fq>,
    log: Vec<u32>,
}

fn clmul_mod(mut a: u32, mut b: u32, modulus: u32, bits: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> bits & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

impl BaseField {
    pub fn new(bits: u32, modulus: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BASE_BITS {
            return Err(Error::InvalidParams(format!(
                "base degree b must be in 1..={MAX_BASE_BITS}, got {bits}"
            )));
        }
        if poly::gf2::degree(modulus) != Some(bits) {
            return Err(Error::InvalidParams(format!(
                "base modulus 0x{modulus:x} does not have degree {bits}"
            )));
        }
        if !poly::gf2::is_irreducible(modulus) {
            return Err(Error::NotIrreducible("base modulus over F_2"));
        }
        let order = 1usize << bits;
        let group = order - 1;
        // find an element of multiplicative order q-1
        let gen = (1..order as u32)
            .find(|&g| {
                let mut x = 1u32;
                for i in 1..=group {
                    x = clmul_mod(x, g, modulus, bits);
                    if x == 1 {
                        return i == group;
                    }
                }
                false
            })
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0 as Fq; 2 * group];
        let mut log = vec![0u32; order];
        let mut x = 1u32;
        for i in 0..group {
            exp[i] = x as Fq;
            exp[i + group] = x as Fq;
            log[x as usize] = i as u32;
            x = clmul_mod(x, gen, modulus, bits);
        }
        Ok(Self {
            inner: Arc::new(BaseInner {
                bits,
                modulus,
                exp,
                log,
            }),
        })
    }

    pub fn bits(&self) -> u32 {
        self.inner.bits
    }

    pub fn modulus(&self) -> u32 {
        self.inner.modulus
    }

    /// q = 2^b.
    pub fn order(&self) -> usize {
        1 << self.inner.bits
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let i = &self.inner;
        i.exp[(i.log[a as usize] + i.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Fq) -> Result<Fq> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let i = &self.inner;
        let group = self.order() as u32 - 1;
        Ok(i.exp[((group - i.log[a as usize]) % group) as usize])
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        rng.gen_range(0..self.order()) as Fq
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        rng.gen_range(1..self.order()) as Fq
    }

    /// All nonzero elements in ascending integer order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fq> {
        (1..self.order()).map(|x| x as Fq)
    }
}

impl PartialEq for BaseField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.bits() == other.bits() && self.modulus() == other.modulus())
    }
}

impl Eq for BaseField {}

impl fmt::Debug for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod 0x{:x}", self.bits(), self.modulus())
    }
}

/// F_{q^s} = F_q[x]/(ext_modulus) over a base field F_q.
#[derive(Clone)]
pub struct FieldTower {
    inner: Arc<TowerInner>,
}

struct TowerInner {
    base: BaseField,
    ext_modulus: Vec<Fq>,
}

/// An element of F_{q^s}: its `s` power-basis coordinates over F_q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqsElem(Vec<Fq>);

impl FqsElem {
    pub fn coords(&self) -> &[Fq] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Fq> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl FieldTower {
    /// Builds a tower with moduli drawn by a seeded search over random
    /// monic candidates, keeping the first irreducible ones found.
    pub fn new(b: u32, s: usize, seed: u64) -> Result<Self> {
        if b == 0 || b > MAX_BASE_BITS {
            return Err(Error::InvalidParams(format!(
                "base degree b must be in 1..={MAX_BASE_BITS}, got {b}"
            )));
        }
        if s < 2 {
            return Err(Error::InvalidParams(format!(
                "extension degree s must be at least 2, got {s}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base_modulus = (0..SEARCH_CAP)
            .map(|_| (1u32 << b) | (rng.gen::<u32>() & ((1 << b) - 1)) | 1)
            .find(|&p| poly::gf2::is_irreducible(p))
            .ok_or(Error::NoIrreducible {
                degree: b as usize,
                attempts: SEARCH_CAP,
            })?;
        let base = BaseField::new(b, base_modulus)?;
        for _ in 0..SEARCH_CAP {
            let mut cand: Vec<Fq> = (0..s).map(|_| base.random(&mut rng)).collect();
            if cand[0] == 0 {
                continue;
            }
            cand.push(1);
            if poly::is_irreducible(&base, &cand) {
                return Self::from_parts(base, cand);
            }
        }
        Err(Error::NoIrreducible {
            degree: s,
            attempts: SEARCH_CAP,
        })
    }

    /// Rebuilds a tower from explicit moduli, verifying irreducibility.
    /// `ext_modulus` holds the `s + 1` coefficients, constant term first.
    pub fn from_moduli(b: u32, base_modulus: u32, ext_modulus: &[Fq]) -> Result<Self> {
        let base = BaseField::new(b, base_modulus)?;
        Self::from_parts(base, ext_modulus.to_vec())
    }

    fn from_parts(base: BaseField, ext_modulus: Vec<Fq>) -> Result<Self> {
        let s = ext_modulus.len().saturating_sub(1);
        if s < 2 || ext_modulus[s] != 1 {
            return Err(Error::InvalidParams(
                "extension modulus must be monic of degree at least 2".into(),
            ));
        }
        if ext_modulus.iter().any(|&c| c as usize >= base.order()) {
            return Err(Error::InvalidParams(
                "extension modulus coefficient outside F_q".into(),
            ));
        }
        if !poly::is_irreducible(&base, &ext_modulus) {
            return Err(Error::NotIrreducible("extension modulus over F_q"));
        }
        Ok(Self {
            inner: Arc::new(TowerInner { base, ext_modulus }),
        })
    }

    pub fn base(&self) -> &BaseField {
        &self.inner.base
    }

    pub fn b(&self) -> u32 {
        self.inner.base.bits()
    }

    pub fn q(&self) -> usize {
        self.inner.base.order()
    }

    pub fn s(&self) -> usize {
        self.inner.ext_modulus.len() - 1
    }

    pub fn base_modulus(&self) -> u32 {
        self.inner.base.modulus()
    }

    pub fn ext_modulus(&self) -> &[Fq] {
        &self.inner.ext_modulus
    }

    pub fn zero(&self) -> FqsElem {
        FqsElem(vec![0; self.s()])
    }

    pub fn one(&self) -> FqsElem {
        self.from_fq(1)
    }

    /// Embeds c ∈ F_q as a constant polynomial.
    pub fn from_fq(&self, c: Fq) -> FqsElem {
        let mut v = vec![0; self.s()];
        v[0] = c;
        FqsElem(v)
    }

    /// The class of x, i.e. power-basis element 1 (0-indexed).
    pub fn generator(&self) -> FqsElem {
        let mut v = vec![0; self.s()];
        v[1] = 1;
        FqsElem(v)
    }

    pub fn elem(&self, coords: Vec<Fq>) -> Result<FqsElem> {
        if coords.len() != self.s() {
            return Err(Error::Dimension(format!(
                "element needs {} coordinates, got {}",
                self.s(),
                coords.len()
            )));
        }
        if coords.iter().any(|&c| c as usize >= self.q()) {
            return Err(Error::Format("coordinate outside F_q".into()));
        }
        Ok(FqsElem(coords))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FqsElem {
        FqsElem((0..self.s()).map(|_| self.base().random(rng)).collect())
    }

    pub fn add(&self, a: &FqsElem, c: &FqsElem) -> FqsElem {
        FqsElem(a.0.iter().zip(&c.0).map(|(x, y)| x ^ y).collect())
    }

    pub fn mul(&self, a: &FqsElem, c: &FqsElem) -> FqsElem {
        let mut out = vec![0; self.s()];
        self.mul_into(&a.0, &c.0, &mut out);
        FqsElem(out)
    }

    pub fn inv(&self, a: &FqsElem) -> Result<FqsElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let mut r = poly::inv_mod(self.base(), &a.0, &self.inner.ext_modulus)
            .ok_or(Error::ZeroInverse)?;
        r.resize(self.s(), 0);
        Ok(FqsElem(r))
    }

    /// Multiplies by an F_q scalar (coordinate-wise).
    pub fn scale(&self, c: Fq, a: &FqsElem) -> FqsElem {
        FqsElem(a.0.iter().map(|&x| self.base().mul(c, x)).collect())
    }

    /// Slice-level product used by the matrix kernels: `out = a * c`.
    pub fn mul_into(&self, a: &[Fq], c: &[Fq], out: &mut [Fq]) {
        let s = self.s();
        let f = self.base();
        let mut prod = vec![0 as Fq; 2 * s - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in c.iter().enumerate() {
                prod[i + j] ^= f.mul(x, y);
            }
        }
        let m = &self.inner.ext_modulus;
        for i in (s..2 * s - 1).rev() {
            let t = prod[i];
            if t == 0 {
                continue;
            }
            for j in 0..s {
                prod[i - s + j] ^= f.mul(t, m[j]);
            }
        }
        out.copy_from_slice(&prod[..s]);
    }

    /// `out += a * c`.
    pub fn mul_acc(&self, a: &[Fq], c: &[Fq], out: &mut [Fq]) {
        let mut tmp = vec![0; self.s()];
        self.mul_into(a, c, &mut tmp);
        for (o, t) in out.iter_mut().zip(tmp) {
            *o ^= t;
        }
    }

    /// Packs an element as `s` little-endian `b`-bit blocks, zero-padded
    /// to a whole byte.
    pub fn encode_elem(&self, a: &FqsElem) -> Vec<u8> {
        let b = self.b() as usize;
        let mut bits: BitVec<u8, Lsb0> = BitVec::with_capacity(self.s() * b);
        for &c in &a.0 {
            bits.extend_from_bitslice(&c.view_bits::<Lsb0>()[..b]);
        }
        bits.into_vec()
    }

    pub fn decode_elem(&self, bytes: &[u8]) -> Result<FqsElem> {
        let b = self.b() as usize;
        let need = (self.s() * b).div_ceil(8);
        if bytes.len() != need {
            return Err(Error::Truncated {
                needed: need,
                have: bytes.len(),
            });
        }
        let bits = bytes.view_bits::<Lsb0>();
        if bits[self.s() * b..].any() {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok(FqsElem(
            bits[..self.s() * b]
                .chunks(b)
                .map(|ch| ch.load_le::<Fq>())
                .collect(),
        ))
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.base == other.inner.base
                && self.inner.ext_modulus == other.inner.ext_modulus)
    }
}

impl Eq for FieldTower {}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FieldTower {{ base: {:?}, s: {}, ext: {:?} }}",
            self.base(),
            self.s(),
            self.ext_modulus()
        )
    }
}
