//! Closed-form rates, weight thresholds, attack cost and the tables
//! behind them.
//!
//! Rates are exact rationals. Probabilities and operation counts that
//! outgrow machine range are reported as logarithms.

use std::io::Write;

use num::bigint::BigUint;
use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::scheme::SchemeParams;

/// Attacks above 2^100 operations count as infeasible.
pub const FEASIBILITY_LOG2: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateBreakdown {
    pub exact_rate: BigRational,
    /// L → ∞ limit.
    pub asymptotic_rate: BigRational,
    pub upload_bits: u128,
    pub download_bits: u128,
    pub payload_bits: u128,
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// fδ / ((f + 1) n s), valid for any code shape with 0 < δ.
pub fn asymptotic_rate(s: usize, v: usize, n: usize, k: usize, f: usize) -> BigRational {
    let delta = ((n - k) * (s - v)) as u128;
    ratio(f as u128 * delta, (f as u128 + 1) * (n * s) as u128)
}

/// Rate of the f-file batch (f + 1 queries and responses).
pub fn rate_exact(p: &SchemeParams) -> RateBreakdown {
    let (b, s, n, m, l, f) = (
        p.b as u128,
        p.s as u128,
        p.n as u128,
        p.m as u128,
        p.l as u128,
        p.f as u128,
    );
    let delta = p.delta() as u128;
    let upload = (f + 1) * m * delta * n * s * b;
    let download = (f + 1) * l * n * s * b;
    let payload = f * l * delta * b;
    let asym = asymptotic_rate(p.s, p.v, p.n, p.k, p.f);
    debug_assert_eq!(asym, cor2_rhs(p));
    RateBreakdown {
        exact_rate: ratio(payload, upload + download),
        asymptotic_rate: asym,
        upload_bits: upload,
        download_bits: download,
        payload_bits: payload,
    }
}

/// (f / (f + 1)) · (1 − (k + (v/s)(n − k)) / n).
fn cor2_rhs(p: &SchemeParams) -> BigRational {
    ratio(p.f as u128, p.f as u128 + 1) * original_asymptotic_alt(p)
}

/// 1 − (k + (v/s)(n − k)) / n.
fn original_asymptotic_alt(p: &SchemeParams) -> BigRational {
    let (s, v, n, k) = (p.s as u128, p.v as u128, p.n as u128, p.k as u128);
    let inner = ratio(k, 1) + ratio(v, s) * ratio(n - k, 1);
    BigRational::one() - inner / ratio(n, 1)
}

/// Rate of the original single-query scheme.
pub fn rate_original(p: &SchemeParams) -> RateBreakdown {
    let (b, s, n, m, l) = (
        p.b as u128,
        p.s as u128,
        p.n as u128,
        p.m as u128,
        p.l as u128,
    );
    let delta = p.delta() as u128;
    let upload = m * delta * n * s * b;
    let download = l * n * s * b;
    let payload = l * delta * b;
    let asym = ratio(delta, n * s);
    assert_eq!(asym, original_asymptotic_alt(p), "two forms of δ/(ns) disagree");
    RateBreakdown {
        exact_rate: ratio(payload, upload + download),
        asymptotic_rate: asym,
        upload_bits: upload,
        download_bits: download,
        payload_bits: payload,
    }
}

/// Smallest weight with (m − wt)δ < ns − δ, i.e. ⌈m + 1 − f/((f + 1)R)⌉
/// with R the asymptotic batch rate, where f/((f + 1)R) = ns/δ.
pub fn weight_threshold(p: &SchemeParams, m: usize) -> Result<i64> {
    let delta = p.delta();
    if delta == 0 || delta >= p.ns() {
        return Err(Error::InvalidParams(format!(
            "threshold needs 0 < delta < ns, got delta = {delta}, ns = {}",
            p.ns()
        )));
    }
    let rate = asymptotic_rate(p.s, p.v, p.n, p.k, p.f);
    let x = ratio(p.f as u128, p.f as u128 + 1) / rate;
    assert_eq!(x, ratio(p.ns() as u128, delta as u128));
    // ⌈m + 1 − x⌉ = m + 1 − ⌊x⌋
    let floor = x.floor().to_integer().to_i64().expect("small");
    Ok(m as i64 + 1 - floor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MZero {
    /// ⌈(δ + 1)(ns − 2δ) / δ²⌉, zero when ns ≤ 2δ.
    pub increment: usize,
    pub m0: usize,
}

pub fn m_zero(p: &SchemeParams, wt: usize) -> MZero {
    let (ns, delta) = (p.ns(), p.delta());
    let increment = if ns <= 2 * delta || delta == 0 {
        0
    } else {
        ((delta + 1) * (ns - 2 * delta)).div_ceil(delta * delta)
    };
    MZero {
        increment,
        m0: wt + increment,
    }
}

/// log_q of the failure probability q^{−(m − m₀)δ²} left by the subset
/// attack when m ≥ m₀; success is at least one minus this.
pub fn attack_failure_logq(p: &SchemeParams, m: usize, wt: usize) -> Option<i128> {
    let z = m_zero(p, wt);
    (m >= z.m0).then(|| -((m - z.m0) as i128) * (p.delta() as i128).pow(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Attack probable and within 2^100 operations.
    Red,
    /// Attack possible but above 2^100 operations.
    Gray,
    /// wt at or above the threshold: ranks indistinguishable.
    Green,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Red => "red",
            Region::Gray => "gray",
            Region::Green => "green",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityPoint {
    pub m: usize,
    pub wt: usize,
    /// log2 of C(m, wt)·(m − wt)·(ns)³; −∞ when wt = m.
    pub log2_cost: f64,
    pub region: Region,
}

pub fn attack_complexity(p: &SchemeParams, m: usize, wt: usize) -> Result<ComplexityPoint> {
    if wt > m {
        return Err(Error::InvalidParams(format!("weight {wt} exceeds m = {m}")));
    }
    let threshold = weight_threshold(p, m)?;
    let log2_cost = if wt == m {
        f64::NEG_INFINITY
    } else {
        ln_binomial(m as u64, wt as u64) / std::f64::consts::LN_2
            + ((m - wt) as f64).log2()
            + 3.0 * (p.ns() as f64).log2()
    };
    let region = if wt as i64 >= threshold {
        Region::Green
    } else if log2_cost > FEASIBILITY_LOG2 {
        Region::Gray
    } else {
        Region::Red
    };
    Ok(ComplexityPoint {
        m,
        wt,
        log2_cost,
        region,
    })
}

/// Distinct scalar multiples c·Δ needed for a weight-`wt` secret in the
/// worst case: one per distinct nonzero coefficient, at most q − 1.
pub fn query_gen_cost(p: &SchemeParams, wt: usize) -> usize {
    wt.min(p.q() - 1)
}

/// log_q of the Gaussian binomial [a choose b]_q, by the product formula
/// Π_{i<b} (q^{a−i} − 1) / (q^{i+1} − 1) evaluated term by term in logs.
pub fn gaussian_binomial_logq(a: usize, b: usize, q: usize) -> f64 {
    if b > a {
        return f64::NEG_INFINITY;
    }
    let b = b.min(a - b);
    let lnq = (q as f64).ln();
    // log_q(q^e − 1) = e + ln(1 − q^{−e}) / ln q
    let corr = |e: usize| (-(-(e as f64) * lnq).exp()).ln_1p() / lnq;
    let mut acc = (b * (a - b)) as f64;
    for i in 0..b {
        acc += corr(a - i) - corr(i + 1);
    }
    acc
}

/// Exact [a choose b]_q by the same product formula in big integers.
pub fn gaussian_binomial_exact(a: usize, b: usize, q: usize) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let q = BigUint::from(q);
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..b {
        num *= q.pow((a - i) as u32) - &one;
        den *= q.pow((i + 1) as u32) - &one;
    }
    num / den
}

/// Rows of the published rate table: (b, s, v, n, k, f).
pub const TABLE1: [(u32, usize, usize, usize, usize, usize); 12] = [
    (4, 32, 31, 100, 50, 1),
    (4, 32, 31, 100, 50, 4),
    (4, 32, 31, 100, 50, 32),
    (4, 32, 16, 100, 50, 1),
    (4, 32, 16, 100, 50, 4),
    (4, 32, 16, 100, 50, 32),
    (5, 32, 31, 100, 50, 1),
    (5, 32, 31, 100, 50, 64),
    (5, 32, 26, 100, 50, 1),
    (5, 32, 26, 100, 50, 32),
    (5, 32, 24, 100, 50, 1),
    (5, 32, 24, 100, 50, 8),
];

/// Example parameter set: q = 32, s = 32, v = 24, n = 100, k = 50, f = 1.
pub fn example_params(m: usize) -> SchemeParams {
    SchemeParams {
        b: 5,
        s: 32,
        v: 24,
        n: 100,
        k: 50,
        m,
        l: 1,
        f: 1,
        weight_target: None,
    }
}

pub fn write_rates_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "s", "v", "n", "k", "delta", "f", "rate_num", "rate_den"])?;
    for (b, s, v, n, k, f) in TABLE1 {
        let r = asymptotic_rate(s, v, n, k, f);
        w.write_record([
            (1usize << b).to_string(),
            s.to_string(),
            v.to_string(),
            n.to_string(),
            k.to_string(),
            ((n - k) * (s - v)).to_string(),
            f.to_string(),
            r.numer().to_string(),
            r.denom().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (m, wt) with wt in 0..=m.
pub fn write_fig3_csv<W: Write>(out: W, p: &SchemeParams, ms: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "wt", "log2_cost", "region"])?;
    for &m in ms {
        for wt in 0..=m {
            let c = attack_complexity(p, m, wt)?;
            let cost = if c.log2_cost.is_finite() {
                format!("{:.6}", c.log2_cost)
            } else {
                "-inf".into()
            };
            w.write_record([m.to_string(), wt.to_string(), cost, c.region.as_str().into()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Failure-probability bounds of the subset attack (log_q) per (m, wt).
pub fn write_bounds_csv<W: Write>(out: W, p: &SchemeParams, ms: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "wt", "logq_p_tight", "logq_p_loose"])?;
    for &m in ms {
        let pm = SchemeParams { m, ..p.clone() };
        for wt in 0..=m {
            let b = crate::attack::failure_probability_bound(&pm, wt)?;
            w.write_record([
                m.to_string(),
                wt.to_string(),
                format!("{:.6}", b.logq_tight),
                b.logq_loose.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
