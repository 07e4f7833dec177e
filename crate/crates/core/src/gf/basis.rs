use rand::Rng;

use super::{FieldTower, Fq, FqsElem};
use crate::error::{Error, Result};
use crate::matfq::MatFq;

/// A basis Γ = {γ_1, …, γ_s} of F_{q^s} over F_q split as V ⊕ W at `v`.
///
/// `to_gamma` maps power-basis coordinate columns to Γ-coordinate
/// columns; `from_gamma` is its inverse, whose column j holds γ_{j+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisGamma {
    tower: FieldTower,
    to_gamma: MatFq,
    from_gamma: MatFq,
    v: usize,
}

impl BasisGamma {
    /// Uniformly random basis by rejection sampling on invertibility.
    pub fn sample<R: Rng + ?Sized>(tower: &FieldTower, v: usize, rng: &mut R) -> Result<Self> {
        check_split(tower, v)?;
        loop {
            let m = MatFq::random(tower.base(), tower.s(), tower.s(), rng);
            if let Ok(inv) = m.invert() {
                return Ok(Self {
                    tower: tower.clone(),
                    to_gamma: m,
                    from_gamma: inv,
                    v,
                });
            }
        }
    }

    /// Γ equal to the power basis 1, x, …, x^{s-1}.
    pub fn power(tower: &FieldTower, v: usize) -> Result<Self> {
        check_split(tower, v)?;
        let id = MatFq::identity(tower.base(), tower.s());
        Ok(Self {
            tower: tower.clone(),
            to_gamma: id.clone(),
            from_gamma: id,
            v,
        })
    }

    pub fn from_change_of_basis(tower: &FieldTower, to_gamma: MatFq, v: usize) -> Result<Self> {
        check_split(tower, v)?;
        if to_gamma.rows() != tower.s() || to_gamma.cols() != tower.s() {
            return Err(Error::Dimension("change of basis must be s x s".into()));
        }
        let from_gamma = to_gamma.invert()?;
        Ok(Self {
            tower: tower.clone(),
            to_gamma,
            from_gamma,
            v,
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn change_of_basis(&self) -> &MatFq {
        &self.to_gamma
    }

    /// γ_{j+1} for 0-indexed `j`.
    pub fn gamma(&self, j: usize) -> FqsElem {
        FqsElem(
            (0..self.tower.s())
                .map(|r| self.from_gamma.get(r, j))
                .collect(),
        )
    }

    /// Γ-coordinates of a power-basis coordinate slice.
    pub fn coords_of(&self, x: &[Fq], out: &mut [Fq]) {
        self.to_gamma.mul_vec_into(x, out);
    }

    /// Power-basis coordinates from Γ-coordinates.
    pub fn elem_of(&self, gamma_coords: &[Fq], out: &mut [Fq]) {
        self.from_gamma.mul_vec_into(gamma_coords, out);
    }

    pub fn coords(&self, x: &FqsElem) -> Vec<Fq> {
        let mut out = vec![0; self.tower.s()];
        self.coords_of(&x.0, &mut out);
        out
    }

    pub fn from_coords(&self, gamma_coords: &[Fq]) -> FqsElem {
        let mut out = vec![0; self.tower.s()];
        self.elem_of(gamma_coords, &mut out);
        FqsElem(out)
    }

    /// ψ_V: keeps the first `v` Γ-coordinates.
    pub fn project_v(&self, x: &FqsElem) -> FqsElem {
        let mut c = self.coords(x);
        c[self.v..].iter_mut().for_each(|t| *t = 0);
        self.from_coords(&c)
    }

    /// ψ_W: keeps the last `s - v` Γ-coordinates.
    pub fn project_w(&self, x: &FqsElem) -> FqsElem {
        let mut c = self.coords(x);
        c[..self.v].iter_mut().for_each(|t| *t = 0);
        self.from_coords(&c)
    }

    /// Uniform element of V.
    pub fn random_in_v<R: Rng + ?Sized>(&self, rng: &mut R) -> FqsElem {
        let mut c = vec![0; self.tower.s()];
        for t in &mut c[..self.v] {
            *t = self.tower.base().random(rng);
        }
        self.from_coords(&c)
    }

    /// Element of W with the given `s - v` W-coordinates.
    pub fn w_elem(&self, w_coords: &[Fq]) -> FqsElem {
        let mut c = vec![0; self.tower.s()];
        c[self.v..].copy_from_slice(w_coords);
        self.from_coords(&c)
    }
}

fn check_split(tower: &FieldTower, v: usize) -> Result<()> {
    if v == 0 || v >= tower.s() {
        return Err(Error::InvalidParams(format!(
            "split index v must satisfy 0 < v < s = {}, got {v}",
            tower.s()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (FieldTower, BasisGamma, ChaCha8Rng) {
        let t = FieldTower::new(2, 4, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = BasisGamma::sample(&t, 2, &mut rng).unwrap();
        (t, g, rng)
    }

    #[test]
    fn power_basis_v1_spans_constants() {
        let t = FieldTower::new(1, 4, 0).unwrap();
        let g = BasisGamma::power(&t, 1).unwrap();
        assert_eq!(g.gamma(0), t.one());
        assert_eq!(g.project_w(&t.one()), t.zero());
        assert_eq!(g.project_v(&t.generator()), t.zero());
    }

    #[test]
    fn sampled_change_of_basis_is_invertible() {
        let (t, g, _) = setup();
        assert_eq!(g.change_of_basis().rank(), t.s());
    }

    #[test]
    fn projections_split_and_are_idempotent() {
        let (t, g, mut rng) = setup();
        for _ in 0..100 {
            let x = t.random(&mut rng);
            let pv = g.project_v(&x);
            let pw = g.project_w(&x);
            assert_eq!(t.add(&pv, &pw), x);
            assert_eq!(g.project_v(&pv), pv);
            assert_eq!(g.project_w(&pw), pw);
            assert_eq!(g.project_v(&pw), t.zero());
            assert_eq!(g.project_w(&pv), t.zero());
        }
    }

    #[test]
    fn basis_vectors_land_in_their_half() {
        let (t, g, mut rng) = setup();
        assert_eq!(g.project_w(&g.gamma(0)), t.zero());
        let last = g.gamma(t.s() - 1);
        assert_eq!(g.project_w(&last), last);
        for _ in 0..50 {
            let x = g.random_in_v(&mut rng);
            assert_eq!(g.project_w(&x), t.zero());
        }
    }

    #[test]
    fn projections_are_fq_linear() {
        let (t, g, mut rng) = setup();
        for _ in 0..100 {
            let x = t.random(&mut rng);
            let y = t.random(&mut rng);
            let c = t.base().random(&mut rng);
            assert_eq!(
                g.project_v(&t.add(&x, &y)),
                t.add(&g.project_v(&x), &g.project_v(&y))
            );
            assert_eq!(g.project_v(&t.scale(c, &x)), t.scale(c, &g.project_v(&x)));
        }
    }

    #[test]
    fn rejects_degenerate_split() {
        let t = FieldTower::new(1, 3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(BasisGamma::sample(&t, 0, &mut rng).is_err());
        assert!(BasisGamma::sample(&t, 3, &mut rng).is_err());
    }
}
