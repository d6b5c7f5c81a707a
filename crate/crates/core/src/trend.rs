//! Partial sums of positive series and a divergence-trend diagnostic.
//!
//! No finite prefix decides convergence, so the diagnostic only describes
//! the tail: a log–log power fit `term ≈ C n^{−α}` and, when α is close to
//! 1, a Bertrand fit `term ≈ C / (n (ln n)^β)`.

use std::fmt;
use std::fmt::Write as _;

use crate::io::fmt17;
use crate::numeric::ls_slope;

/// α farther than this from 1 decides the trend on its own.
pub const POWER_MARGIN: f64 = 0.25;
/// Bertrand exponent above which a near-harmonic tail is called convergent.
pub const BERTRAND_THRESHOLD: f64 = 1.2;
const SAMPLES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Divergent,
    Convergent,
    Inconclusive,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Divergent => "divergent",
            Trend::Convergent => "convergent",
            Trend::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendDiagnostic {
    /// Decay exponent of the terms (negative when they grow).
    pub alpha: f64,
    /// Log exponent of the Bertrand fit with α pinned to 1.
    pub beta: f64,
    /// Range of n used by the fits.
    pub fit_from: u64,
    pub fit_to: u64,
    pub trend: Trend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub n: u64,
    pub term: f64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub rows: Vec<SeriesRow>,
    pub diagnostic: TrendDiagnostic,
}

impl SeriesReport {
    /// Builds rows from terms indexed from n = 1.
    pub fn from_terms(terms: &[f64]) -> Self {
        let mut acc = 0.0;
        let rows: Vec<SeriesRow> = terms
            .iter()
            .enumerate()
            .map(|(i, &term)| {
                acc += term;
                SeriesRow {
                    n: i as u64 + 1,
                    term,
                    partial_sum: acc,
                }
            })
            .collect();
        let diagnostic = diagnose(&rows);
        Self { rows, diagnostic }
    }

    pub fn last_partial_sum(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.partial_sum)
    }

    /// CSV with columns `<index>,term,partial_sum`.
    pub fn to_csv(&self, index: &str) -> String {
        let mut out = format!("{index},term,partial_sum\n");
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.n, fmt17(r.term), fmt17(r.partial_sum)).unwrap();
        }
        out
    }
}

/// Fits the tail `n ∈ [max(2, n_max/100), n_max]` at log-spaced points.
pub fn diagnose(rows: &[SeriesRow]) -> TrendDiagnostic {
    let n_max = rows.len() as u64;
    let from = (n_max / 100).max(2);
    let mut picks: Vec<u64> = (0..SAMPLES)
        .map(|j| {
            let t = j as f64 / (SAMPLES - 1) as f64;
            ((from as f64).ln() * (1.0 - t) + (n_max.max(1) as f64).ln() * t)
                .exp()
                .round() as u64
        })
        .filter(|&n| n >= from && n <= n_max)
        .collect();
    picks.dedup();
    let usable: Vec<(f64, f64)> = picks
        .iter()
        .map(|&n| (n as f64, rows[n as usize - 1].term))
        .filter(|(_, t)| *t > 0.0 && t.is_finite())
        .collect();
    let mut diag = TrendDiagnostic {
        alpha: f64::NAN,
        beta: f64::NAN,
        fit_from: from,
        fit_to: n_max,
        trend: Trend::Inconclusive,
    };
    if usable.len() < 4 {
        return diag;
    }
    let ln_n: Vec<f64> = usable.iter().map(|(n, _)| n.ln()).collect();
    let ln_t: Vec<f64> = usable.iter().map(|(_, t)| t.ln()).collect();
    diag.alpha = -ls_slope(&ln_n, &ln_t);
    let lnln: Vec<f64> = ln_n.iter().map(|l| l.ln()).collect();
    let scaled: Vec<f64> = ln_t.iter().zip(&ln_n).map(|(t, l)| t + l).collect();
    diag.beta = -ls_slope(&lnln, &scaled);
    diag.trend = if !diag.alpha.is_finite() {
        Trend::Inconclusive
    } else if diag.alpha < 1.0 - POWER_MARGIN {
        Trend::Divergent
    } else if diag.alpha > 1.0 + POWER_MARGIN || diag.beta > BERTRAND_THRESHOLD {
        Trend::Convergent
    } else {
        Trend::Divergent
    };
    diag
}
