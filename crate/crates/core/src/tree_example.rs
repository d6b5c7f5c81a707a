//! Explicit positive solution of Δu + u^σ ≤ 0 on a weighted homogeneous tree.
//!
//! Edges between D_n and D_{n+1} carry
//!   μ_n = (n+n₀)^{(σ+1)/(σ−1)} (ln(n+n₀))^{1/(σ−1)+ε} / (N−1)^n
//! and the solution is u_n = δ / ((n+n₀)^{2/(σ−1)} (ln(n+n₀))^{1/(σ−1)}).
//! Everything is computed through the reduced weights w_n = (N−1)^n μ_n,
//! which makes the layer inequalities independent of N.
//!
//! Writing p = 1/(σ−1) and m = n + n₀, the layer inequality at n ≥ 1 is
//! equivalent to δ^{σ−1} ≤ R(m), where R is the bracket evaluated in
//! [`crate::hp`]; R(m) → pε as m → ∞.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::RadialFunction;
use crate::hp::{bracket_hp, HpValue, Precision};
use crate::io::fmt_sig;

/// Digits used when rendering certificates.
pub const CERTIFICATE_DIGITS: usize = 25;

/// (σ, ε, N, n₀, δ) for the tree example.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleParams {
    pub sigma: f64,
    pub epsilon: f64,
    pub n_branch: usize,
    pub n0: u64,
    pub delta: f64,
}

fn check_sigma_epsilon(sigma: f64, epsilon: f64) -> Result<()> {
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} must exceed 1")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("{epsilon} must be positive")));
    }
    Ok(())
}

fn check_n0(n0: u64) -> Result<()> {
    if n0 < 2 {
        return Err(Error::param("n0", format!("{n0} < 2")));
    }
    Ok(())
}

impl ExampleParams {
    pub fn new(sigma: f64, epsilon: f64, n_branch: usize, n0: u64, delta: f64) -> Result<Self> {
        let p = Self {
            sigma,
            epsilon,
            n_branch,
            n0,
            delta,
        };
        p.validate_shape()?;
        Ok(p)
    }

    pub(crate) fn validate_shape(&self) -> Result<()> {
        check_sigma_epsilon(self.sigma, self.epsilon)?;
        if self.n_branch < 2 {
            return Err(Error::param("N", "branching degree must be at least 2"));
        }
        check_n0(self.n0)?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", format!("{} must be positive", self.delta)));
        }
        Ok(())
    }

    /// p = 1/(σ−1).
    pub fn p(&self) -> f64 {
        1.0 / (self.sigma - 1.0)
    }

    /// w_n = (n+n₀)^{2p+1} (ln(n+n₀))^{p+ε}.
    pub fn reduced_weight(&self, n: u64) -> f64 {
        reduced_weight(n + self.n0, self.p(), self.epsilon)
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            delta,
            ..self.clone()
        }
    }
}

fn reduced_weight(m: u64, p: f64, epsilon: f64) -> f64 {
    let l = (m as f64).ln();
    ((2.0 * p + 1.0) * l + (p + epsilon) * l.ln()).exp()
}

/// u_n = δ / ((n+n₀)^{2p} (ln(n+n₀))^p).
pub fn u_layer(n: u64, params: &ExampleParams) -> f64 {
    let p = params.p();
    let l = ((n + params.n0) as f64).ln();
    params.delta * (-(2.0 * p * l + p * l.ln())).exp()
}

pub fn radial_solution(params: &ExampleParams, depth: usize) -> RadialFunction {
    RadialFunction::from_fn(depth, |n| u_layer(n as u64, params))
}

/// Layer residual of the example: u₁ − u₀ + u₀^σ at n = 0 and
/// [w_n u_{n+1} + w_{n−1} u_{n−1}] / [w_n + w_{n−1}] − u_n + u_n^σ for n ≥ 1.
pub fn radial_residual(n: u64, params: &ExampleParams) -> f64 {
    let un = u_layer(n, params);
    let nonlinear = un.powf(params.sigma);
    if n == 0 {
        return u_layer(1, params) - un + nonlinear;
    }
    let wn = params.reduced_weight(n);
    let wp = params.reduced_weight(n - 1);
    let avg = (wn * u_layer(n + 1, params) + wp * u_layer(n - 1, params)) / (wn + wp);
    avg - un + nonlinear
}

/// Largest δ for which the root inequality holds:
/// δ₀ = a₀ ((a₁ − a₀)/a₁)^{1/(σ−1)} with a_k = (n₀+k)^{2p} (ln(n₀+k))^p.
pub fn delta0(sigma: f64, n0: u64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::param("sigma", format!("{sigma} must exceed 1")));
    }
    check_n0(n0)?;
    let p = 1.0 / (sigma - 1.0);
    let a = |m: u64| {
        let l = (m as f64).ln();
        (2.0 * p * l + p * l.ln()).exp()
    };
    let (a0, a1) = (a(n0), a(n0 + 1));
    Ok(a0 * ((a1 - a0) / a1).powf(p))
}

/// (pε/2)^{1/(σ−1)}: the exponent-corrected cap on δ.
pub fn delta_cap(sigma: f64, epsilon: f64) -> f64 {
    let p = 1.0 / (sigma - 1.0);
    (p * epsilon / 2.0).powf(p)
}

/// The limit value pε.
pub fn limit_target(sigma: f64, epsilon: f64) -> f64 {
    epsilon / (sigma - 1.0)
}

/// The bracket R(m) in double precision, rearranged so that no step cancels
/// catastrophically: with r± = u_{n±1}/u_n and ω = w_{n−1}/w_n,
///   R(m) = m² ln m · [(1 − r₊) + ω (1 − r₋)] / (1 + ω),
/// each 1 − r computed with `exp_m1` from `ln_1p` logarithms. The remaining
/// cancellation costs about log10(m ln m) digits.
pub fn bracket_f64(m: u64, sigma: f64, epsilon: f64) -> f64 {
    let p = 1.0 / (sigma - 1.0);
    let mf = m as f64;
    let l = mf.ln();
    let up = (1.0 / mf).ln_1p(); // ln((m+1)/m)
    let dn = (-1.0 / mf).ln_1p(); // ln((m−1)/m)
    let log_ratio_up = (up / l).ln_1p(); // ln(ln(m+1)/ln m)
    let log_ratio_dn = (dn / l).ln_1p(); // ln(ln(m−1)/ln m)
    let log_r_plus = -2.0 * p * up - p * log_ratio_up;
    let log_r_minus = -2.0 * p * dn - p * log_ratio_dn;
    let log_omega = (2.0 * p + 1.0) * dn + (p + epsilon) * log_ratio_dn;
    let one_minus_plus = -log_r_plus.exp_m1();
    let one_minus_minus = -log_r_minus.exp_m1();
    let omega = log_omega.exp();
    mf * mf * l * (one_minus_plus + omega * one_minus_minus) / (1.0 + omega)
}

/// Right-hand side R(n + n₀) of the δ-reformulation of the layer-n
/// inequality (n ≥ 1), in extended precision.
pub fn rhs_eqzdelta(n: u64, params: &ExampleParams, precision: Precision) -> Result<HpValue> {
    if n == 0 {
        return Err(Error::param("n", "the reformulation holds for n >= 1"));
    }
    bracket_hp(n + params.n0, params.sigma, params.epsilon, precision)
}

/// Double-precision companion of [`rhs_eqzdelta`]; its relative error grows
/// like 1e−16 · m ln m, reaching ~1e−8 at m = 10⁶.
pub fn rhs_eqzdelta_f64(n: u64, params: &ExampleParams) -> f64 {
    bracket_f64(n + params.n0, params.sigma, params.epsilon)
}

/// The expression whose limit as n → ∞ is pε, in extended precision.
pub fn limit_expression(n: u64, sigma: f64, epsilon: f64, precision: Precision) -> Result<HpValue> {
    check_sigma_epsilon(sigma, epsilon)?;
    bracket_hp(n, sigma, epsilon, precision)
}

/// Volume normalised by the growth rate: entry for n ≥ 2 is
/// μ(B(o,n)) / (n^{2σ/(σ−1)} (ln n)^{1/(σ−1)+ε}), with
/// μ(B(o,n)) = N (2 Σ_{k≤n} w_k − w_n). Returns `(n, ratio)` pairs.
pub fn volume_ratio_profile(params: &ExampleParams, n_max: u64) -> Result<Vec<(u64, f64)>> {
    if n_max < 2 {
        return Err(Error::param("n_max", "must be at least 2"));
    }
    let p = params.p();
    let nb = params.n_branch as f64;
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(n_max as usize - 1);
    for n in 0..=n_max {
        let w = params.reduced_weight(n);
        sum += w;
        if n >= 2 {
            let volume = nb * (2.0 * sum - w);
            let l = (n as f64).ln();
            let norm = ((2.0 * p + 2.0) * l + (p + params.epsilon) * l.ln()).exp();
            out.push((n, volume / norm));
        }
    }
    Ok(out)
}

/// Summary of a residual sweep over layers `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub horizon: u64,
    /// Largest residual seen (≤ 0 for a solution).
    pub max_residual: f64,
    pub argmax: u64,
    /// min over n of −residual(n) / u_n^σ.
    pub min_relative_margin: f64,
    pub positive_at: Option<u64>,
}

impl SweepSummary {
    pub fn all_nonpositive(&self) -> bool {
        self.positive_at.is_none()
    }
}

/// Evaluates `radial_residual` at every layer `0..=horizon`.
pub fn sweep_residuals(params: &ExampleParams, horizon: u64) -> SweepSummary {
    const CHUNK: u64 = 4096;
    let chunks: Vec<(f64, u64, f64, Option<u64>)> = (0..=horizon / CHUNK)
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, 0, f64::INFINITY, None);
            for n in c * CHUNK..((c + 1) * CHUNK).min(horizon + 1) {
                let r = radial_residual(n, params);
                if r > best.0 {
                    best.0 = r;
                    best.1 = n;
                }
                let scale = u_layer(n, params).powf(params.sigma);
                best.2 = best.2.min(-r / scale);
                if best.3.is_none() && !(r <= 0.0) {
                    best.3 = Some(n);
                }
            }
            best
        })
        .collect();
    let mut out = SweepSummary {
        horizon,
        max_residual: f64::NEG_INFINITY,
        argmax: 0,
        min_relative_margin: f64::INFINITY,
        positive_at: None,
    };
    for (mx, arg, rel, pos) in chunks {
        if mx > out.max_residual {
            out.max_residual = mx;
            out.argmax = arg;
        }
        out.min_relative_margin = out.min_relative_margin.min(rel);
        if out.positive_at.is_none() {
            out.positive_at = pos;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub horizon: u64,
    pub n0_cap: u64,
    /// Log-spaced layers at which the double-precision bracket is checked
    /// against the extended-precision one.
    pub spot_checks: usize,
    pub precision: Precision,
    /// Allowed relative disagreement at spot checks.
    pub spot_tolerance: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            horizon: 100_000,
            n0_cap: 1_000_000,
            spot_checks: 12,
            precision: Precision::default(),
            spot_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub params: ExampleParams,
    pub n0: u64,
    pub delta: f64,
    pub delta0: f64,
    pub delta1_cap: f64,
    pub target: f64,
    pub horizon_checked: u64,
    /// min over 1 ≤ n ≤ horizon of R(n + n₀), and where it is attained.
    pub rhs_min: f64,
    pub rhs_min_at: u64,
    pub rhs_min_hp: HpValue,
    pub rhs_at_horizon: HpValue,
    /// −max residual: the smallest gap between a residual and zero.
    pub min_margin: f64,
    pub min_relative_margin: f64,
    pub spot_max_gap: f64,
}

impl CalibrationResult {
    /// Structured text block, numbers at 25 significant digits.
    pub fn certificate(&self) -> String {
        let d = CERTIFICATE_DIGITS;
        let mut out = String::new();
        let p = &self.params;
        writeln!(out, "certificate: tree example").unwrap();
        writeln!(out, "sigma = {}", fmt_sig(p.sigma, d)).unwrap();
        writeln!(out, "epsilon = {}", fmt_sig(p.epsilon, d)).unwrap();
        writeln!(out, "N = {}", p.n_branch).unwrap();
        writeln!(out, "n0 = {}", self.n0).unwrap();
        writeln!(out, "delta = {}", fmt_sig(self.delta, d)).unwrap();
        writeln!(out, "delta0 = {}", fmt_sig(self.delta0, d)).unwrap();
        writeln!(out, "delta1_cap = {}", fmt_sig(self.delta1_cap, d)).unwrap();
        writeln!(out, "target = {}", fmt_sig(self.target, d)).unwrap();
        writeln!(out, "horizon_checked = {}", self.horizon_checked).unwrap();
        writeln!(out, "rhs_min = {}", self.rhs_min_hp.sig(d)).unwrap();
        writeln!(out, "rhs_min_at = {}", self.rhs_min_at).unwrap();
        writeln!(out, "rhs_at_horizon = {}", self.rhs_at_horizon.sig(d)).unwrap();
        writeln!(out, "min_margin = {}", fmt_sig(self.min_margin, d)).unwrap();
        writeln!(
            out,
            "min_relative_margin = {}",
            fmt_sig(self.min_relative_margin, d)
        )
        .unwrap();
        writeln!(out, "spot_check_max_gap = {}", fmt_sig(self.spot_max_gap, d)).unwrap();
        writeln!(
            out,
            "claim = residuals <= 0 for 0 <= n <= {} (finite horizon)",
            self.horizon_checked
        )
        .unwrap();
        out
    }
}

/// Searches n₀ upward from 2, sets δ = min(δ₀, (pε/2)^{1/(σ−1)}) and
/// verifies every layer residual through the horizon.
pub fn calibrate(sigma: f64, epsilon: f64, n_branch: usize, horizon: u64) -> Result<CalibrationResult> {
    calibrate_with(
        sigma,
        epsilon,
        n_branch,
        &CalibrationConfig {
            horizon,
            ..CalibrationConfig::default()
        },
    )
}

pub fn calibrate_with(
    sigma: f64,
    epsilon: f64,
    n_branch: usize,
    cfg: &CalibrationConfig,
) -> Result<CalibrationResult> {
    check_sigma_epsilon(sigma, epsilon)?;
    if n_branch < 2 {
        return Err(Error::param("N", "branching degree must be at least 2"));
    }
    if cfg.horizon < 1000 {
        return Err(Error::param("horizon", "must be at least 1000"));
    }
    cfg.precision.check()?;
    let target = limit_target(sigma, epsilon) / 2.0;
    let h = cfg.horizon;
    let r = |m: u64| bracket_f64(m, sigma, epsilon);

    // Sliding minimum of R over the window m ∈ [n0+1, n0+h].
    let mut window: VecDeque<(u64, f64)> = VecDeque::new();
    let push = |window: &mut VecDeque<(u64, f64)>, m: u64| {
        let v = r(m);
        while window.back().is_some_and(|&(_, b)| b >= v) {
            window.pop_back();
        }
        window.push_back((m, v));
    };
    for m in 3..=2 + h {
        push(&mut window, m);
    }
    let mut best = (2, f64::NEG_INFINITY);
    let mut chosen = None;
    for n0 in 2..=cfg.n0_cap {
        if n0 > 2 {
            push(&mut window, n0 + h);
            while window.front().is_some_and(|&(m, _)| m <= n0) {
                window.pop_front();
            }
        }
        let (arg, min) = *window.front().unwrap();
        if min > best.1 {
            best = (n0, min);
        }
        let rising = r(n0 + h) >= r(n0 + h - 1);
        if min >= target && rising {
            chosen = Some((n0, arg - n0, min));
            break;
        }
    }
    let Some((n0, rhs_min_at, rhs_min)) = chosen else {
        return Err(Error::CalibrationFailed {
            n0_cap: cfg.n0_cap,
            best_n0: best.0,
            best_minimum: best.1,
            target,
        });
    };

    let d0 = delta0(sigma, n0)?;
    let cap = delta_cap(sigma, epsilon);
    let delta = d0.min(cap);
    let params = ExampleParams::new(sigma, epsilon, n_branch, n0, delta)?;

    // Extended-precision spot checks of the double-precision search.
    let mut layers: Vec<u64> = (0..cfg.spot_checks)
        .map(|i| {
            let t = i as f64 / (cfg.spot_checks.max(2) - 1) as f64;
            (h as f64).powf(t).round() as u64
        })
        .chain([rhs_min_at, h])
        .map(|n| n.clamp(1, h))
        .collect();
    layers.sort_unstable();
    layers.dedup();
    let mut spot_max_gap: f64 = 0.0;
    let mut rhs_min_hp = None;
    let mut rhs_at_horizon = None;
    for &n in &layers {
        let hp = rhs_eqzdelta(n, &params, cfg.precision)?;
        let fast = rhs_eqzdelta_f64(n, &params);
        let gap = (hp.value - fast).abs() / hp.value.abs().max(1e-300);
        spot_max_gap = spot_max_gap.max(gap);
        if gap > cfg.spot_tolerance {
            return Err(Error::PrecisionGuard {
                n,
                detail: format!("double-precision bracket off by relative {gap:e}"),
            });
        }
        if n == rhs_min_at {
            rhs_min_hp = Some(hp.clone());
        }
        if n == h {
            rhs_at_horizon = Some(hp);
        }
    }

    let sweep = sweep_residuals(&params, h);
    if let Some(n) = sweep.positive_at {
        return Err(Error::CertificateRejected {
            n,
            residual: radial_residual(n, &params),
        });
    }
    Ok(CalibrationResult {
        params,
        n0,
        delta,
        delta0: d0,
        delta1_cap: cap,
        target,
        horizon_checked: h,
        rhs_min,
        rhs_min_at,
        rhs_min_hp: rhs_min_hp.expect("argmin is spot-checked"),
        rhs_at_horizon: rhs_at_horizon.expect("horizon is spot-checked"),
        min_margin: -sweep.max_residual,
        min_relative_margin: sweep.min_relative_margin,
        spot_max_gap,
    })
}

/// Re-verifies a certificate from scratch: the δ constraints and a fresh
/// residual sweep through the certified horizon.
pub fn verify_certificate(cert: &CalibrationResult) -> Result<SweepSummary> {
    let p = &cert.params;
    let d0 = delta0(p.sigma, p.n0)?;
    if p.delta > d0 {
        return Err(Error::param("delta", format!("{} exceeds delta0 = {d0}", p.delta)));
    }
    if p.delta.powf(p.sigma - 1.0) > limit_target(p.sigma, p.epsilon) / 2.0 * (1.0 + 1e-15) {
        return Err(Error::param("delta", "delta^(sigma-1) exceeds p*epsilon/2"));
    }
    let sweep = sweep_residuals(p, cert.horizon_checked);
    match sweep.positive_at {
        Some(n) => Err(Error::CertificateRejected {
            n,
            residual: radial_residual(n, p),
        }),
        None => Ok(sweep),
    }
}

/// Checks a user-supplied (n₀, δ) through the horizon without searching.
pub fn verify_params(params: &ExampleParams, horizon: u64) -> Result<SweepSummary> {
    params.validate_shape()?;
    Ok(sweep_residuals(params, horizon))
}
