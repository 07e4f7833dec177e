//! Random linear codes over F_{q^s} with a designated information set.

use rand::seq::index;
use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::gf::{BasisGamma, FieldTower, Fq};
use crate::matfq::{MatFq, MatFqs};

/// An `[n, k]` code given by a generator `G` whose columns at the
/// information set `I` form an invertible matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    generator: MatFqs,
    info_set: Vec<usize>,
    info_complement: Vec<usize>,
    info_inverse: MatFqs,
}

impl LinearCode {
    /// Draws `I` uniformly among `k`-subsets, `G_I` uniformly among
    /// invertible matrices and the other columns uniformly.
    pub fn sample<R: Rng + ?Sized>(tower: &FieldTower, n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParams(format!(
                "code dimension must satisfy 0 < k < n, got n = {n}, k = {k}"
            )));
        }
        let mut info_set = index::sample(rng, n, k).into_vec();
        info_set.sort_unstable();
        let g_info = MatFqs::random_invertible(tower, k, rng);
        let mut generator = MatFqs::random(tower, k, n, rng);
        for r in 0..k {
            for (j, &c) in info_set.iter().enumerate() {
                generator.entry_mut(r, c).copy_from_slice(g_info.entry(r, j));
            }
        }
        Self::from_generator(generator, info_set)
    }

    pub fn from_generator(generator: MatFqs, mut info_set: Vec<usize>) -> Result<Self> {
        let (k, n) = (generator.rows(), generator.cols());
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.len() != k || info_set.iter().any(|&i| i >= n) {
            return Err(Error::InvalidParams(
                "information set must be k distinct indices below n".into(),
            ));
        }
        let info_inverse = generator.select_cols(&info_set).invert()?;
        let info_complement = (0..n).filter(|i| !info_set.contains(i)).collect();
        Ok(Self {
            generator,
            info_set,
            info_complement,
            info_inverse,
        })
    }

    pub fn tower(&self) -> &FieldTower {
        self.generator.tower()
    }

    pub fn n(&self) -> usize {
        self.generator.cols()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &MatFqs {
        &self.generator
    }

    /// I, ascending.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Ī = [n] \ I, ascending.
    pub fn info_complement(&self) -> &[usize] {
        &self.info_complement
    }

    pub fn info_inverse(&self) -> &MatFqs {
        &self.info_inverse
    }

    /// Each row of `messages` (r x k) times G.
    pub fn encode_rows(&self, messages: &MatFqs) -> Result<MatFqs> {
        if messages.cols() != self.k() {
            return Err(dim_err(format!(
                "messages have {} columns, code dimension is {}",
                messages.cols(),
                self.k()
            )));
        }
        messages.mul(&self.generator)
    }

    /// Splits each received row into codeword + error, assuming the error
    /// vanishes on I. The error part is exact by construction
    /// (`codeword + error == received`); its support is not checked here.
    pub fn erasure_decode_rows(&self, received: &MatFqs) -> Result<(MatFqs, MatFqs)> {
        if received.cols() != self.n() {
            return Err(dim_err(format!(
                "received words have length {}, code length is {}",
                received.cols(),
                self.n()
            )));
        }
        let msgs = received.select_cols(&self.info_set).mul(&self.info_inverse)?;
        let codewords = msgs.mul(&self.generator)?;
        let errors = received.sub(&codewords)?;
        Ok((codewords, errors))
    }

    /// First (row, column) where `errors` is nonzero on I, if any.
    pub fn support_violation(&self, errors: &MatFqs) -> Option<(usize, usize)> {
        (0..errors.rows()).find_map(|r| {
            self.info_set
                .iter()
                .find(|&&c| errors.entry(r, c).iter().any(|&x| x != 0))
                .map(|&c| (r, c))
        })
    }

    /// φ_Ī: places the columns of `e0` (r x (n-k)) at the positions of Ī.
    pub fn embed_complement(&self, e0: &MatFqs) -> Result<MatFqs> {
        if e0.cols() != self.info_complement.len() {
            return Err(dim_err("error block must have n - k columns"));
        }
        let mut out = MatFqs::zeros(self.tower(), e0.rows(), self.n());
        for r in 0..e0.rows() {
            for (j, &c) in self.info_complement.iter().enumerate() {
                out.entry_mut(r, c).copy_from_slice(e0.entry(r, j));
            }
        }
        Ok(out)
    }

    /// F_q-basis of F_{q^s}^n adapted to C ⊕ φ_Ī(V^{n-k}) ⊕ φ_Ī(W^{n-k}),
    /// as the rows of an `ns x ns` matrix of power-basis coordinates.
    /// Rows come in that order: `ks` for C, then `(n-k)v`, then `(n-k)(s-v)`.
    pub fn direct_sum_basis(&self, basis: &BasisGamma) -> MatFq {
        let t = self.tower();
        let (n, k, s, v) = (self.n(), self.k(), t.s(), basis.v());
        let mut out = MatFq::zeros(t.base(), n * s, n * s);
        let mut row = 0;
        let mut tmp = vec![0; s];
        let mut alpha = vec![0 as Fq; s];
        for g in 0..k {
            for p in 0..s {
                alpha.iter_mut().for_each(|x| *x = 0);
                alpha[p] = 1;
                for c in 0..n {
                    t.mul_into(&alpha, self.generator.entry(g, c), &mut tmp);
                    out.row_mut(row)[c * s..(c + 1) * s].copy_from_slice(&tmp);
                }
                row += 1;
            }
        }
        for range in [0..v, v..s] {
            for &c in &self.info_complement {
                for j in range.clone() {
                    let gamma = basis.gamma(j);
                    out.row_mut(row)[c * s..(c + 1) * s].copy_from_slice(gamma.coords());
                    row += 1;
                }
            }
        }
        debug_assert_eq!(row, n * s);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tiny_code_has_nonzero_pivot() {
        let t = FieldTower::new(1, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = LinearCode::sample(&t, 2, 1, &mut rng).unwrap();
            let i = c.info_set()[0];
            assert!(c.generator().entry(0, i).iter().any(|&x| x != 0));
        }
    }

    #[test]
    fn info_set_invertible_over_many_samples() {
        let t = FieldTower::new(1, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let c = LinearCode::sample(&t, 6, 3, &mut rng).unwrap();
            assert_eq!(c.generator().rank(), 3);
            let gi = c.generator().select_cols(c.info_set());
            assert_eq!(c.info_inverse().mul(&gi).unwrap(), MatFqs::identity(&t, 3));
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        let t = FieldTower::new(1, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(LinearCode::sample(&t, 4, 4, &mut rng).is_err());
        assert!(LinearCode::sample(&t, 4, 0, &mut rng).is_err());
    }

    #[test]
    fn encode_units_and_zero() {
        let t = FieldTower::new(2, 3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = LinearCode::sample(&t, 5, 2, &mut rng).unwrap();
        assert!(c.encode_rows(&MatFqs::zeros(&t, 1, 2)).unwrap().is_zero());
        let units = c.encode_rows(&MatFqs::identity(&t, 2)).unwrap();
        assert_eq!(&units, c.generator());
        assert!(c.encode_rows(&MatFqs::zeros(&t, 1, 3)).is_err());
    }

    #[test]
    fn decode_splits_codeword_and_error() {
        let t = FieldTower::new(2, 4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let c = LinearCode::sample(&t, 6, 3, &mut rng).unwrap();
            let msgs = MatFqs::random(&t, 2, 3, &mut rng);
            let cw = c.encode_rows(&msgs).unwrap();
            let e = c.embed_complement(&MatFqs::random(&t, 2, 3, &mut rng)).unwrap();
            let (dc, de) = c.erasure_decode_rows(&cw.add(&e).unwrap()).unwrap();
            assert_eq!(dc, cw);
            assert_eq!(de, e);
            assert_eq!(c.support_violation(&de), None);

            let (dc, de) = c.erasure_decode_rows(&cw).unwrap();
            assert_eq!(dc, cw);
            assert!(de.is_zero());

            let (dc, de) = c.erasure_decode_rows(&e).unwrap();
            assert!(dc.is_zero());
            assert_eq!(de, e);
        }
    }

    #[test]
    fn support_violation_detected() {
        let t = FieldTower::new(1, 3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = LinearCode::sample(&t, 5, 2, &mut rng).unwrap();
        let mut e = MatFqs::zeros(&t, 1, 5);
        let i = c.info_set()[1];
        e.entry_mut(0, i)[0] = 1;
        assert_eq!(c.support_violation(&e), Some((0, i)));
    }

    #[test]
    fn complement_embedding_order() {
        let t = FieldTower::new(1, 2, 0).unwrap();
        let g = MatFqs::identity(&t, 2);
        let mut full = MatFqs::zeros(&t, 2, 5);
        for r in 0..2 {
            for c in 0..2 {
                full.entry_mut(r, [1, 3][c]).copy_from_slice(g.entry(r, c));
            }
        }
        let code = LinearCode::from_generator(full, vec![3, 1]).unwrap();
        assert_eq!(code.info_complement(), &[0, 2, 4]);
        let mut e0 = MatFqs::zeros(&t, 1, 3);
        e0.entry_mut(0, 1)[1] = 1;
        let e = code.embed_complement(&e0).unwrap();
        assert_eq!(e.entry(0, 2), &[0, 1]);
    }
}
