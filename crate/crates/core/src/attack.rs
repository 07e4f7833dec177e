//! The sub-query rank attack and its subset-enumeration extension.
//!
//! Everything here sees only public parameters and the query matrix.
//! Flattening uses the power basis; rank does not depend on the basis.

use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;

use crate::analysis::gaussian_binomial_logq;
use crate::error::{Error, Result};
use crate::scheme::{QueryMatrix, SchemeParams};

/// Default bound on the number of subsets `attack_modified` enumerates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    Original,
    Modified,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Original => "original",
            TargetKind::Modified => "modified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackReport {
    pub target_kind: TargetKind,
    /// (deleted blocks, ascending) → F_q-rank, in enumeration order.
    pub ranks: Vec<(Vec<usize>, usize)>,
    /// The inferred index (as a singleton) or support; `None` on a tie,
    /// or when the minimum fails the ns − δ test.
    pub inferred: Option<Vec<usize>>,
    /// Every deleted set attaining the minimum rank.
    pub candidates: Vec<Vec<usize>>,
    pub elimination_ops: u64,
    /// Set by [`AttackReport::judge`].
    pub success: Option<bool>,
}

impl AttackReport {
    fn empty(kind: TargetKind) -> Self {
        Self {
            target_kind: kind,
            ranks: Vec::new(),
            inferred: None,
            candidates: Vec::new(),
            elimination_ops: 0,
            success: None,
        }
    }

    /// Compares the inference with the true index set (the single index
    /// for the original scheme, supp(w) for the modified one).
    pub fn judge(&mut self, truth: &[usize]) -> bool {
        let mut t = truth.to_vec();
        t.sort_unstable();
        let ok = self.inferred.as_deref() == Some(&t[..]);
        self.success = Some(ok);
        ok
    }
}

fn deleted_rank(q: &QueryMatrix, delta: usize, deleted: &[usize]) -> (usize, u64) {
    let info = q.0.delete_row_blocks(delta, deleted).flatten_power().rank_info();
    (info.rank, info.ops)
}

fn check_shape(q: &QueryMatrix, p: &SchemeParams) -> Result<()> {
    if q.0.rows() != p.m * p.delta() || q.0.cols() != p.n || q.0.tower().s() != p.s {
        return Err(Error::Dimension(format!(
            "query is {} x {}, parameters expect {} x {}",
            q.0.rows(),
            q.0.cols(),
            p.m * p.delta(),
            p.n
        )));
    }
    Ok(())
}

/// rank[j] = F_q-rank of Q with row block j deleted.
pub fn subquery_ranks_single(q: &QueryMatrix, params: &SchemeParams) -> Result<Vec<usize>> {
    check_shape(q, params)?;
    let delta = params.delta();
    Ok((0..params.m)
        .into_par_iter()
        .map(|j| deleted_rank(q, delta, &[j]).0)
        .collect())
}

fn minimal(ranks: &[(Vec<usize>, usize)]) -> (Vec<Vec<usize>>, Option<usize>) {
    let Some(min) = ranks.iter().map(|r| r.1).min() else {
        return (Vec::new(), None);
    };
    let cands = ranks
        .iter()
        .filter(|r| r.1 == min)
        .map(|r| r.0.clone())
        .collect();
    (cands, Some(min))
}

/// Argmin over single-block deletions; a tie infers nothing.
pub fn attack_original(q: &QueryMatrix, params: &SchemeParams) -> Result<AttackReport> {
    check_shape(q, params)?;
    let delta = params.delta();
    let runs: Vec<(usize, u64)> = (0..params.m)
        .into_par_iter()
        .map(|j| deleted_rank(q, delta, &[j]))
        .collect();
    let mut report = AttackReport::empty(TargetKind::Original);
    report.elimination_ops = runs.iter().map(|r| r.1).sum();
    report.ranks = runs.iter().enumerate().map(|(j, r)| (vec![j], r.0)).collect();
    let (cands, _) = minimal(&report.ranks);
    if cands.len() == 1 {
        report.inferred = Some(cands[0].clone());
    }
    report.candidates = cands;
    Ok(report)
}

/// C(m, wt), saturating at `u128::MAX`.
pub fn subset_count(m: usize, wt: usize) -> u128 {
    if wt > m {
        return 0;
    }
    let wt = wt.min(m - wt);
    let mut c: u128 = 1;
    for i in 0..wt {
        // c * (m - i) / (i + 1) stays integral at every step
        match c.checked_mul((m - i) as u128) {
            Some(x) => c = x / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    c
}

/// Enumerates every `wt`-subset J of blocks, deletes it and ranks the
/// remainder. Infers J when it is the unique minimum and its rank is at
/// most ns − δ.
pub fn attack_modified(
    q: &QueryMatrix,
    params: &SchemeParams,
    wt: usize,
    cap: u128,
) -> Result<AttackReport> {
    check_shape(q, params)?;
    let mut report = AttackReport::empty(TargetKind::Modified);
    if wt >= params.m {
        return Ok(report);
    }
    let count = subset_count(params.m, wt);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let delta = params.delta();
    let subsets: Vec<Vec<usize>> = (0..params.m).combinations(wt).collect();
    let runs: Vec<(usize, u64)> = subsets
        .par_iter()
        .map(|j| deleted_rank(q, delta, j))
        .collect();
    report.elimination_ops = runs.iter().map(|r| r.1).sum();
    report.ranks = subsets.into_iter().zip(runs).map(|(j, r)| (j, r.0)).collect();
    let (cands, min) = minimal(&report.ranks);
    if cands.len() == 1 && min.is_some_and(|r| r <= params.ns() - delta) {
        report.inferred = Some(cands[0].clone());
    }
    report.candidates = cands;
    Ok(report)
}

/// Operation count predicted by C(m, wt)·(m − wt)·(ns)³.
pub fn model_ops(params: &SchemeParams, wt: usize) -> f64 {
    subset_count(params.m, wt) as f64 * (params.m - wt) as f64 * (params.ns() as f64).powi(3)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureBound {
    /// log_q([ns−δ choose ns−2δ]_q · q^{−δ²(m−wt)}).
    pub logq_tight: f64,
    /// (δ+1)(ns−2δ) − δ²(m−wt).
    pub logq_loose: i128,
}

/// Union bound on the probability that a wrong subset also reaches rank
/// at most ns − δ, in log_q.
pub fn failure_probability_bound(params: &SchemeParams, wt: usize) -> Result<FailureBound> {
    let (ns, delta, m) = (params.ns(), params.delta(), params.m);
    if delta == 0 || 2 * delta > ns {
        return Err(Error::InvalidParams(format!(
            "bound needs 0 < delta <= ns / 2, got delta = {delta}, ns = {ns}"
        )));
    }
    if wt > m {
        return Err(Error::InvalidParams(format!("weight {wt} exceeds m = {m}")));
    }
    let decay = (delta as i128).pow(2) * (m - wt) as i128;
    Ok(FailureBound {
        logq_tight: gaussian_binomial_logq(ns - delta, ns - 2 * delta, params.q()) - decay as f64,
        logq_loose: ((delta + 1) * (ns - 2 * delta)) as i128 - decay,
    })
}

fn join(idx: &[usize]) -> String {
    idx.iter().join(";")
}

/// One `rank` record per deleted set and one `summary` record per report.
pub fn write_reports_csv<W: Write>(out: W, reports: &[AttackReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["record", "trial", "kind", "subset", "rank", "inferred", "success", "ops"])?;
    for (t, r) in reports.iter().enumerate() {
        let (trial, kind) = (t.to_string(), r.target_kind.as_str());
        for (set, rank) in &r.ranks {
            w.write_record(["rank", &trial, kind, &join(set), &rank.to_string(), "", "", ""])?;
        }
        let inferred = r.inferred.as_deref().map(join).unwrap_or_else(|| "none".into());
        let success = r.success.map_or("unknown".into(), |s| s.to_string());
        w.write_record([
            "summary",
            &trial,
            kind,
            "",
            "",
            &inferred,
            &success,
            &r.elimination_ops.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
