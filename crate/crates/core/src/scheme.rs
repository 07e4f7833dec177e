//! The PIR protocol: database layout, secret plans, query generation,
//! the server's response and the client's decoding and file recovery.
//!
//! A batch retrieving `f` files sends `f + 1` queries
//! `Q = D + E + Δ ⊗ w`, one for each row `w` of the combined matrix
//! `M = [M̃; 0 … 0 1] · [e^{j_1}; …; e^{j_f}; β]`. Every query has its own
//! code, basis, `D`, `E` and `Δ`. The original single-file query is the
//! special case `w = e^i`.

use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::gf::{BasisGamma, FieldTower, Fq};
use crate::lincode::LinearCode;
use crate::matfq::{kron_memo, MatFq, MatFqs};

/// Resampling cap for secret plans and invertible draws.
pub const PLAN_CAP: usize = 10_000;

/// Public protocol parameters. Indices are 0-based throughout the API.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    /// q = 2^b.
    pub b: u32,
    pub s: usize,
    pub v: usize,
    pub n: usize,
    pub k: usize,
    /// Number of files.
    pub m: usize,
    /// Rows per file.
    pub l: usize,
    /// Files per batch.
    pub f: usize,
    /// Minimum weight of each secret row m_i; `None` picks the largest
    /// weight the construction can always reach.
    pub weight_target: Option<usize>,
}

impl SchemeParams {
    pub fn q(&self) -> usize {
        1usize << self.b
    }

    /// δ = (n - k)(s - v).
    pub fn delta(&self) -> usize {
        self.n.saturating_sub(self.k) * self.s.saturating_sub(self.v)
    }

    pub fn ns(&self) -> usize {
        self.n * self.s
    }

    /// Full weight m when q > 2. Over F_2 the only admissible plan is
    /// M̃ = [1 1], β = 1, whose row has weight m - 1.
    pub fn default_weight_target(&self) -> usize {
        if self.q() == 2 {
            self.m - self.f
        } else {
            self.m
        }
    }

    pub fn effective_weight_target(&self) -> usize {
        self.weight_target.unwrap_or_else(|| self.default_weight_target())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.b == 0 || self.b > crate::gf::MAX_BASE_BITS {
            return bad(format!(
                "b must be in 1..={} (q = 2^b), got {}",
                crate::gf::MAX_BASE_BITS,
                self.b
            ));
        }
        if self.s < 2 {
            return bad(format!("s must be at least 2, got {}", self.s));
        }
        if self.v == 0 || self.v >= self.s {
            return bad(format!(
                "0 < v < s violated (v = {}, s = {}); delta = (n-k)(s-v) = {}",
                self.v,
                self.s,
                self.delta()
            ));
        }
        if self.k == 0 || self.k >= self.n {
            return bad(format!(
                "0 < k < n violated (k = {}, n = {}); delta = {}",
                self.k,
                self.n,
                self.delta()
            ));
        }
        if self.l == 0 {
            return bad("L >= 1 violated".into());
        }
        if self.f == 0 || self.f >= self.m {
            return bad(format!(
                "1 <= f < m violated (f = {}, m = {})",
                self.f, self.m
            ));
        }
        if self.f >= 2 && self.q() == 2 {
            return bad(format!(
                "M-tilde feasibility: f = {} >= 2 needs q >= 4, since a full-rank \
                 f x (f+1) matrix with all entries nonzero over F_2 exists only for f = 1",
                self.f
            ));
        }
        let t = self.effective_weight_target();
        if t > self.m || t + self.f < self.m {
            return bad(format!(
                "weight target {t} outside [m - f, m] = [{}, {}]",
                self.m - self.f,
                self.m
            ));
        }
        if self.q() == 2 && t > self.m - self.f {
            return bad(format!(
                "weight target {t} unreachable over F_2 (secret rows have weight m - 1)"
            ));
        }
        Ok(())
    }

    fn check_tower(&self, tower: &FieldTower) -> Result<()> {
        if tower.b() != self.b || tower.s() != self.s {
            return Err(Error::InvalidParams(format!(
                "tower (b = {}, s = {}) does not match params (b = {}, s = {})",
                tower.b(),
                tower.s(),
                self.b,
                self.s
            )));
        }
        Ok(())
    }
}

/// The server's content X: L x mδ over F_q; file j occupies columns
/// [jδ, (j + 1)δ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    params: SchemeParams,
    x: MatFq,
}

impl Database {
    pub fn new(params: &SchemeParams, x: MatFq) -> Result<Self> {
        params.validate()?;
        if x.rows() != params.l || x.cols() != params.m * params.delta() {
            return Err(dim_err(format!(
                "database must be {} x {}, got {} x {}",
                params.l,
                params.m * params.delta(),
                x.rows(),
                x.cols()
            )));
        }
        if x.field().bits() != params.b {
            return Err(Error::TowerMismatch);
        }
        Ok(Self {
            params: params.clone(),
            x,
        })
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, tower: &FieldTower, rng: &mut R) -> Result<Self> {
        params.validate()?;
        params.check_tower(tower)?;
        let x = MatFq::random(tower.base(), params.l, params.m * params.delta(), rng);
        Self::new(params, x)
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn matrix(&self) -> &MatFq {
        &self.x
    }

    /// X^j, an L x δ matrix.
    pub fn file(&self, j: usize) -> MatFq {
        let d = self.params.delta();
        let idx: Vec<usize> = (j * d..(j + 1) * d).collect();
        self.x.select_cols(&idx)
    }

    /// Σ_j w_j X^j computed directly on the plaintext.
    pub fn combination(&self, w: &[Fq]) -> MatFq {
        let mut acc = MatFq::zeros(self.x.field(), self.params.l, self.params.delta());
        for (j, &c) in w.iter().enumerate() {
            if c != 0 {
                acc = acc.add(&self.file(j).scale(c)).expect("same shape");
            }
        }
        acc
    }
}

/// The client's choice of files and the secret rows derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretPlan {
    indices: Vec<usize>,
    m_tilde: MatFq,
    beta: Vec<Fq>,
    rows: Vec<Vec<Fq>>,
}

pub fn weight(w: &[Fq]) -> usize {
    w.iter().filter(|&&c| c != 0).count()
}

impl SecretPlan {
    /// Samples M̃ (all entries nonzero, left f x f block invertible) and a
    /// full-weight β, resampling until every m_i reaches the weight target.
    pub fn build<R: Rng + ?Sized>(params: &SchemeParams, tower: &FieldTower, indices: &[usize], rng: &mut R) -> Result<Self> {
        Self::build_inner(params, tower, indices, None, rng)
    }

    /// As [`SecretPlan::build`] with a fixed β, so a stored β response can
    /// be reused.
    pub fn build_with_beta<R: Rng + ?Sized>(
        params: &SchemeParams,
        tower: &FieldTower,
        indices: &[usize],
        beta: &[Fq],
        rng: &mut R,
    ) -> Result<Self> {
        if beta.len() != params.m || beta.iter().any(|&c| c == 0 || c as usize >= params.q()) {
            return Err(Error::InvalidParams(
                "beta must have length m with all entries in F_q^x".into(),
            ));
        }
        Self::build_inner(params, tower, indices, Some(beta), rng)
    }

    fn build_inner<R: Rng + ?Sized>(
        params: &SchemeParams,
        tower: &FieldTower,
        indices: &[usize],
        fixed_beta: Option<&[Fq]>,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        params.check_tower(tower)?;
        let (m, f) = (params.m, params.f);
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if indices.len() != f || sorted.len() != f || sorted.iter().any(|&j| j >= m) {
            return Err(Error::InvalidParams(format!(
                "need {f} distinct file indices below {m}, got {indices:?}"
            )));
        }
        let field = tower.base();
        let target = params.effective_weight_target();
        for _ in 0..PLAN_CAP {
            let m_tilde = MatFq::from_vec(
                field,
                f,
                f + 1,
                (0..f * (f + 1)).map(|_| field.random_nonzero(rng)).collect(),
            )?;
            let left: Vec<usize> = (0..f).collect();
            if m_tilde.select_cols(&left).rank() < f {
                continue;
            }
            let beta: Vec<Fq> = match fixed_beta {
                Some(b) => b.to_vec(),
                None => (0..m).map(|_| field.random_nonzero(rng)).collect(),
            };
            let rows: Vec<Vec<Fq>> = (0..f)
                .map(|i| {
                    let last = m_tilde.get(i, f);
                    let mut row: Vec<Fq> = beta.iter().map(|&b| field.mul(last, b)).collect();
                    for (t, &j) in indices.iter().enumerate() {
                        row[j] ^= m_tilde.get(i, t);
                    }
                    row
                })
                .collect();
            if rows.iter().all(|r| weight(r) >= target) {
                return Ok(Self {
                    indices: indices.to_vec(),
                    m_tilde,
                    beta,
                    rows,
                });
            }
        }
        Err(Error::CapExceeded(PLAN_CAP))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn m_tilde(&self) -> &MatFq {
        &self.m_tilde
    }

    pub fn beta(&self) -> &[Fq] {
        &self.beta
    }

    /// m_1, …, m_f.
    pub fn rows(&self) -> &[Vec<Fq>] {
        &self.rows
    }

    /// m_1, …, m_f, β: the f + 1 secret rows of M.
    pub fn secret_rows(&self) -> Vec<Vec<Fq>> {
        let mut out = self.rows.clone();
        out.push(self.beta.clone());
        out
    }

    /// [M̃; 0 … 0 1], the (f+1) x (f+1) combining matrix.
    pub fn combining_matrix(&self) -> MatFq {
        let f = self.indices.len();
        let mut out = MatFq::zeros(self.m_tilde.field(), f + 1, f + 1);
        for r in 0..f {
            out.row_mut(r).copy_from_slice(self.m_tilde.row(r));
        }
        out.set(f, f, 1);
        out
    }
}

/// Everything the client keeps to decode one response. Never leaves
/// the client.
#[derive(Clone, Debug)]
pub struct QuerySecret {
    code: LinearCode,
    basis: BasisGamma,
    delta0: MatFqs,
    t_inverse: MatFq,
    secret_row: Vec<Fq>,
    unique_scalar_mults: usize,
}

impl QuerySecret {
    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn basis(&self) -> &BasisGamma {
        &self.basis
    }

    /// Δ₀ ∈ W^{δ x (n-k)}.
    pub fn delta0(&self) -> &MatFqs {
        &self.delta0
    }

    pub fn secret_row(&self) -> &[Fq] {
        &self.secret_row
    }

    /// Distinct scalar multiples c·Δ computed for the Kronecker step.
    pub fn unique_scalar_mults(&self) -> usize {
        self.unique_scalar_mults
    }
}

/// The mδ x n query over F_{q^s}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryMatrix(pub MatFqs);

/// The L x n response over F_{q^s}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseMatrix(pub MatFqs);

/// The summands of a query, for test harnesses that check structural
/// properties. An attacker never sees these.
#[derive(Clone, Debug)]
pub struct QueryTrace {
    pub d: MatFqs,
    pub e: MatFqs,
    /// Δ = φ_Ī(Δ₀), δ x n.
    pub delta: MatFqs,
    /// Δ ⊗ w in block-row layout.
    pub kron: MatFqs,
}

pub fn gen_query<R: Rng + ?Sized>(
    params: &SchemeParams,
    tower: &FieldTower,
    secret_row: &[Fq],
    rng: &mut R,
) -> Result<(QuerySecret, QueryMatrix)> {
    let (secret, q, _) = gen_query_traced(params, tower, secret_row, rng)?;
    Ok((secret, q))
}

/// The original single-file query Q^i = D + E + Δ ⊗ e^i.
pub fn gen_query_original<R: Rng + ?Sized>(
    params: &SchemeParams,
    tower: &FieldTower,
    index: usize,
    rng: &mut R,
) -> Result<(QuerySecret, QueryMatrix)> {
    if index >= params.m {
        return Err(Error::InvalidParams(format!(
            "file index {index} out of range for m = {}",
            params.m
        )));
    }
    let mut e = vec![0; params.m];
    e[index] = 1;
    gen_query(params, tower, &e, rng)
}

pub fn gen_query_traced<R: Rng + ?Sized>(
    params: &SchemeParams,
    tower: &FieldTower,
    secret_row: &[Fq],
    rng: &mut R,
) -> Result<(QuerySecret, QueryMatrix, QueryTrace)> {
    params.check_tower(tower)?;
    if secret_row.len() != params.m || secret_row.iter().any(|&c| c as usize >= params.q()) {
        return Err(Error::InvalidParams(format!(
            "secret row must have {} entries in F_q",
            params.m
        )));
    }
    let (n, k, delta) = (params.n, params.k, params.delta());
    let rows = params.m * delta;
    let field = tower.base();

    let code = LinearCode::sample(tower, n, k, rng)?;
    let basis = BasisGamma::sample(tower, params.v, rng)?;

    let d = code.encode_rows(&MatFqs::random(tower, rows, k, rng))?;

    let mut e0 = MatFqs::zeros(tower, rows, n - k);
    for r in 0..rows {
        for c in 0..n - k {
            let x = basis.random_in_v(rng);
            e0.set(r, c, &x)?;
        }
    }
    let e = code.embed_complement(&e0)?;

    // Δ₀ is determined by its flattening T; a uniform invertible T gives
    // a uniform full-rank Δ₀.
    let w_dim = params.s - params.v;
    let t = MatFq::random_invertible(field, delta, rng);
    let mut delta0 = MatFqs::zeros(tower, delta, n - k);
    for r in 0..delta {
        for c in 0..n - k {
            let x = basis.w_elem(&t.row(r)[c * w_dim..(c + 1) * w_dim]);
            delta0.set(r, c, &x)?;
        }
    }
    let t_inverse = t.invert()?;
    let delta_full = code.embed_complement(&delta0)?;

    let (kron, unique) = kron_memo(&delta_full, secret_row);
    let q = d.add(&e)?.add(&kron)?;

    let secret = QuerySecret {
        code,
        basis,
        delta0,
        t_inverse,
        secret_row: secret_row.to_vec(),
        unique_scalar_mults: unique,
    };
    let trace = QueryTrace {
        d,
        e,
        delta: delta_full,
        kron,
    };
    Ok((secret, QueryMatrix(q), trace))
}

/// A = X · Q.
pub fn server_respond(db: &Database, query: &QueryMatrix) -> Result<ResponseMatrix> {
    let p = db.params();
    let q = &query.0;
    if q.rows() != p.m * p.delta() || q.cols() != p.n || q.tower().s() != p.s {
        return Err(dim_err(format!(
            "query is {} x {}, database expects {} x {}",
            q.rows(),
            q.cols(),
            p.m * p.delta(),
            p.n
        )));
    }
    Ok(ResponseMatrix(q.left_mul_fq(db.matrix())?))
}

/// Recovers Σ_j w_j X^j (L x δ over F_q) for the query's secret row w.
pub fn decode_response(secret: &QuerySecret, response: &ResponseMatrix) -> Result<MatFq> {
    let code = &secret.code;
    let basis = &secret.basis;
    let tower = code.tower();
    let (s, v) = (tower.s(), basis.v());
    let w_dim = s - v;
    let (_, errors) = code.erasure_decode_rows(&response.0)?;
    if let Some((row, col)) = code.support_violation(&errors) {
        return Err(Error::SupportViolation { row, col });
    }
    let comp = code.info_complement();
    let delta = comp.len() * w_dim;
    let mut flat = MatFq::zeros(tower.base(), errors.rows(), delta);
    let mut coords = vec![0; s];
    for r in 0..errors.rows() {
        for (p, &c) in comp.iter().enumerate() {
            basis.coords_of(errors.entry(r, c), &mut coords);
            flat.row_mut(r)[p * w_dim..(p + 1) * w_dim].copy_from_slice(&coords[v..]);
        }
    }
    flat.mul(&secret.t_inverse)
}

/// Solves the combining system for X^{j_1}, …, X^{j_f}. `combos[r]` is the
/// decoded combination for secret row r (the last one for β).
pub fn recover_files(plan: &SecretPlan, combos: &[MatFq]) -> Result<Vec<MatFq>> {
    let f = plan.indices().len();
    if combos.len() != f + 1 {
        return Err(dim_err(format!(
            "need {} decoded combinations, got {}",
            f + 1,
            combos.len()
        )));
    }
    let inv = plan.combining_matrix().invert()?;
    let field = inv.field().clone();
    (0..f)
        .map(|t| {
            let mut acc = MatFq::zeros(&field, combos[0].rows(), combos[0].cols());
            for (r, combo) in combos.iter().enumerate() {
                let c = inv.get(t, r);
                if c != 0 {
                    acc = acc.add(&combo.scale(c))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Client state for one batch of f + 1 queries.
#[derive(Clone, Debug)]
pub struct Batch {
    plan: SecretPlan,
    secrets: Vec<QuerySecret>,
}

impl Batch {
    /// Builds the plan and all f + 1 queries (β query last).
    pub fn prepare<R: Rng + ?Sized>(
        params: &SchemeParams,
        tower: &FieldTower,
        indices: &[usize],
        rng: &mut R,
    ) -> Result<(Self, Vec<QueryMatrix>)> {
        let plan = SecretPlan::build(params, tower, indices, rng)?;
        Self::from_plan(params, tower, plan, true, rng)
    }

    /// Builds a batch sharing `beta` with an earlier one; only the f
    /// queries for m_1, …, m_f are generated.
    pub fn prepare_reusing_beta<R: Rng + ?Sized>(
        params: &SchemeParams,
        tower: &FieldTower,
        indices: &[usize],
        beta: &[Fq],
        rng: &mut R,
    ) -> Result<(Self, Vec<QueryMatrix>)> {
        let plan = SecretPlan::build_with_beta(params, tower, indices, beta, rng)?;
        Self::from_plan(params, tower, plan, false, rng)
    }

    fn from_plan<R: Rng + ?Sized>(
        params: &SchemeParams,
        tower: &FieldTower,
        plan: SecretPlan,
        with_beta: bool,
        rng: &mut R,
    ) -> Result<(Self, Vec<QueryMatrix>)> {
        let mut rows = plan.rows().to_vec();
        if with_beta {
            rows.push(plan.beta().to_vec());
        }
        let mut secrets = Vec::with_capacity(rows.len());
        let mut queries = Vec::with_capacity(rows.len());
        for w in &rows {
            let (s, q) = gen_query(params, tower, w, rng)?;
            secrets.push(s);
            queries.push(q);
        }
        Ok((Self { plan, secrets }, queries))
    }

    pub fn plan(&self) -> &SecretPlan {
        &self.plan
    }

    pub fn secrets(&self) -> &[QuerySecret] {
        &self.secrets
    }

    /// Decodes each response with its own secret.
    pub fn decode(&self, responses: &[ResponseMatrix]) -> Result<Vec<MatFq>> {
        if responses.len() != self.secrets.len() {
            return Err(dim_err(format!(
                "expected {} responses, got {}",
                self.secrets.len(),
                responses.len()
            )));
        }
        self.secrets
            .iter()
            .zip(responses)
            .map(|(s, a)| decode_response(s, a))
            .collect()
    }

    /// Decodes and recovers the requested files. For a batch built with
    /// [`Batch::prepare_reusing_beta`], pass the stored β combination.
    pub fn finish(&self, responses: &[ResponseMatrix], stored_beta: Option<&MatFq>) -> Result<Vec<MatFq>> {
        let mut combos = self.decode(responses)?;
        if let Some(b) = stored_beta {
            combos.push(b.clone());
        }
        recover_files(&self.plan, &combos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn desk(b: u32, f: usize) -> SchemeParams {
        SchemeParams {
            b,
            s: 4,
            v: 2,
            n: 6,
            k: 3,
            m: 8,
            l: 4,
            f,
            weight_target: None,
        }
    }

    #[test]
    fn delta_and_validation() {
        let p = desk(1, 1);
        assert_eq!(p.delta(), 6);
        p.validate().unwrap();
        let mut bad = desk(1, 2);
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("M-tilde feasibility"), "{err}");
        bad = desk(2, 1);
        bad.v = 4;
        assert!(bad.validate().unwrap_err().to_string().contains("delta"));
        bad = desk(2, 1);
        bad.f = 8;
        assert!(bad.validate().is_err());
        bad = desk(2, 2);
        bad.weight_target = Some(5);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn f2_plan_is_the_single_file_example() {
        let p = desk(1, 1);
        let t = FieldTower::new(1, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = SecretPlan::build(&p, &t, &[3], &mut rng).unwrap();
        assert_eq!(plan.m_tilde().data(), &[1, 1]);
        assert_eq!(plan.beta(), &[1; 8]);
        let mut expect = vec![1; 8];
        expect[3] = 0;
        assert_eq!(plan.rows()[0], expect);
    }

    #[test]
    fn plans_reach_full_weight_over_larger_fields() {
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [1, 2, 3] {
            let p = desk(2, f);
            for _ in 0..50 {
                let idx: Vec<usize> = (0..f).map(|i| 2 * i + 1).collect();
                let plan = SecretPlan::build(&p, &t, &idx, &mut rng).unwrap();
                for row in plan.rows() {
                    assert_eq!(weight(row), p.m);
                }
                assert!(plan.m_tilde().data().iter().all(|&c| c != 0));
                assert_eq!(plan.combining_matrix().rank(), f + 1);
            }
        }
    }

    #[test]
    fn plan_rejects_bad_indices() {
        let p = desk(2, 2);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(SecretPlan::build(&p, &t, &[1, 1], &mut rng).is_err());
        assert!(SecretPlan::build(&p, &t, &[1], &mut rng).is_err());
        assert!(SecretPlan::build(&p, &t, &[1, 8], &mut rng).is_err());
    }

    #[test]
    fn unit_secret_puts_delta_in_one_block() {
        let p = desk(2, 1);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut e = vec![0; 8];
        e[5] = 1;
        let (_, _, tr) = gen_query_traced(&p, &t, &e, &mut rng).unwrap();
        for j in 0..8 {
            let block = tr.kron.row_block(j, 6);
            if j == 5 {
                assert_eq!(block, tr.delta);
            } else {
                assert!(block.is_zero());
            }
        }
    }

    #[test]
    fn zero_secret_query_rows_decode_without_w_part() {
        let p = desk(2, 1);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (sec, q) = gen_query(&p, &t, &[0; 8], &mut rng).unwrap();
        let (_, err) = sec.code().erasure_decode_rows(&q.0).unwrap();
        for r in 0..err.rows() {
            for c in 0..err.cols() {
                let x = err.get(r, c);
                assert!(sec.basis().project_w(&x).is_zero());
            }
        }
        assert_eq!(sec.unique_scalar_mults(), 0);
    }

    #[test]
    fn memo_over_f2_has_one_entry() {
        let p = desk(1, 1);
        let t = FieldTower::new(1, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (sec, _) = gen_query(&p, &t, &[1; 8], &mut rng).unwrap();
        assert_eq!(sec.unique_scalar_mults(), 1);
    }

    #[test]
    fn respond_and_decode_original() {
        let p = desk(2, 1);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        for i in 0..p.m {
            let (sec, q) = gen_query_original(&p, &t, i, &mut rng).unwrap();
            let a = server_respond(&db, &q).unwrap();
            assert_eq!(decode_response(&sec, &a).unwrap(), db.file(i));
        }
    }

    #[test]
    fn zero_database_gives_zero() {
        let p = desk(2, 1);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let db = Database::new(&p, MatFq::zeros(t.base(), 4, 48)).unwrap();
        let (batch, qs) = Batch::prepare(&p, &t, &[2], &mut rng).unwrap();
        let resp: Vec<_> = qs.iter().map(|q| server_respond(&db, q).unwrap()).collect();
        assert!(resp.iter().all(|a| a.0.is_zero()));
        let files = batch.finish(&resp, None).unwrap();
        assert!(files[0].is_zero());
    }

    #[test]
    fn single_block_response() {
        let p = SchemeParams {
            m: 2,
            ..desk(2, 1)
        };
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        let (_, _, tr) = gen_query_traced(&p, &t, &[1, 0], &mut rng).unwrap();
        let a = server_respond(&db, &QueryMatrix(tr.kron.clone())).unwrap();
        let expect = tr.delta.left_mul_fq(&db.file(0)).unwrap();
        assert_eq!(a.0, expect);
    }

    #[test]
    fn tampered_response_still_decodes_with_clean_support() {
        // Information-set decoding forces the error part to vanish on I, so
        // tampering changes the decoded combination but never trips the
        // support check.
        let p = desk(2, 1);
        let t = FieldTower::new(2, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        let (sec, q) = gen_query_original(&p, &t, 0, &mut rng).unwrap();
        let mut a = server_respond(&db, &q).unwrap();
        let c = sec.code().info_complement()[0];
        a.0.entry_mut(0, c)[0] ^= 1;
        let (_, err) = sec.code().erasure_decode_rows(&a.0).unwrap();
        assert_eq!(sec.code().support_violation(&err), None);
        assert!(server_respond(&db, &QueryMatrix(MatFqs::zeros(&t, 3, 6))).is_err());
    }

    #[test]
    fn f2_recovery_is_sum_of_both_combinations() {
        let p = desk(1, 1);
        let t = FieldTower::new(1, 4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        let (batch, qs) = Batch::prepare(&p, &t, &[4], &mut rng).unwrap();
        let resp: Vec<_> = qs.iter().map(|q| server_respond(&db, q).unwrap()).collect();
        let combos = batch.decode(&resp).unwrap();
        assert_eq!(combos[0].add(&combos[1]).unwrap(), db.file(4));
        assert_eq!(batch.finish(&resp, None).unwrap(), vec![db.file(4)]);
    }

    #[test]
    fn retrieve_all_but_one_file() {
        let p = SchemeParams {
            m: 4,
            f: 3,
            ..desk(2, 1)
        };
        let t = FieldTower::new(2, 4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        let idx = [3, 0, 2];
        let (batch, qs) = Batch::prepare(&p, &t, &idx, &mut rng).unwrap();
        let resp: Vec<_> = qs.iter().map(|q| server_respond(&db, q).unwrap()).collect();
        let files = batch.finish(&resp, None).unwrap();
        for (f, &j) in files.iter().zip(&idx) {
            assert_eq!(f, &db.file(j));
        }
    }
}
