//! Recurrence diagnostics for the walk P(x, y) = μ_xy / μ(x): the
//! Nash–Williams volume series and Monte-Carlo return estimates.
//!
//! Walk k draws from a ChaCha8 stream keyed by (seed, k), so results do not
//! depend on the number of threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::io::fmt17;
use crate::operators::InteriorMask;
use crate::trend::SeriesReport;

/// z-value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub root: usize,
    pub steps: u64,
    pub walks: u64,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        if self.walks == 0 {
            return Err(Error::param("walks", "must be at least 1"));
        }
        Ok(())
    }
}

/// Σ_{n=1}^{m} n / μ(B(o,n)) from a volume profile indexed by radius.
pub fn nash_williams_from_volumes(volumes: &[f64]) -> Result<SeriesReport> {
    let mut terms = Vec::with_capacity(volumes.len().saturating_sub(1));
    for (n, &v) in volumes.iter().enumerate().skip(1) {
        if !(v > 0.0) {
            return Err(Error::ZeroVolume { radius: n });
        }
        terms.push(n as f64 / v);
    }
    Ok(SeriesReport::from_terms(&terms))
}

pub fn nash_williams_partial(g: &WeightedGraph, o: usize, n_max: usize) -> Result<SeriesReport> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    nash_williams_from_volumes(&g.volume_profile(o, n_max)?)
}

/// Largest |Σ_y P(x, y) − 1| over vertices with at least one edge.
pub fn kernel_row_defect(g: &WeightedGraph) -> f64 {
    (0..g.num_vertices())
        .filter(|&x| g.degree(x) > 0)
        .map(|x| {
            let m = g.measure(x);
            (g.neighbor_weights(x).iter().map(|w| w / m).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkOutcome {
    /// First return to the root at this step.
    Returned(u64),
    /// Reached a boundary vertex at this step before returning.
    Censored(u64),
    /// Neither within the step budget.
    Survived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnEstimate {
    pub config: WalkConfig,
    pub outcomes: Vec<WalkOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonRow {
    pub horizon: u64,
    pub return_fraction: f64,
    pub halfwidth: f64,
    pub censored: u64,
}

impl ReturnEstimate {
    pub fn at_horizon(&self, horizon: u64) -> HorizonRow {
        let mut returned = 0u64;
        let mut censored = 0u64;
        for o in &self.outcomes {
            match *o {
                WalkOutcome::Returned(t) if t <= horizon => returned += 1,
                WalkOutcome::Censored(t) if t <= horizon => censored += 1,
                _ => {}
            }
        }
        let n = self.outcomes.len() as f64;
        let p = returned as f64 / n;
        HorizonRow {
            horizon,
            return_fraction: p,
            halfwidth: Z95 * (p * (1.0 - p) / n).sqrt(),
            censored,
        }
    }

    pub fn summary(&self) -> HorizonRow {
        self.at_horizon(self.config.steps)
    }

    pub fn return_fraction(&self) -> f64 {
        self.summary().return_fraction
    }

    pub fn halfwidth(&self) -> f64 {
        self.summary().halfwidth
    }

    pub fn censored(&self) -> u64 {
        self.summary().censored
    }

    /// Rows for each horizon (clamped to the step budget).
    pub fn ladder(&self, horizons: &[u64]) -> Vec<HorizonRow> {
        horizons
            .iter()
            .map(|&h| self.at_horizon(h.min(self.config.steps)))
            .collect()
    }
}

/// CSV with columns `horizon,return_fraction,halfwidth,censored`.
pub fn ladder_csv(rows: &[HorizonRow]) -> String {
    let mut out = String::from("horizon,return_fraction,halfwidth,censored\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.horizon,
            fmt17(r.return_fraction),
            fmt17(r.halfwidth),
            r.censored
        )
        .unwrap();
    }
    out
}

/// Horizons 10, 100, … below `steps`, then `steps` itself.
pub fn default_horizons(steps: u64) -> Vec<u64> {
    let mut hs: Vec<u64> = std::iter::successors(Some(10u64), |h| h.checked_mul(10))
        .take_while(|&h| h < steps)
        .collect();
    hs.push(steps);
    hs
}

fn walk(g: &WeightedGraph, cfg: &WalkConfig, mask: Option<&InteriorMask>, k: u64) -> WalkOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k);
    let mut x = cfg.root;
    for t in 1..=cfg.steps {
        let ws = g.neighbor_weights(x);
        let ids = g.neighbor_ids(x);
        let mut target = rng.random::<f64>() * g.measure(x);
        let mut next = ids[ids.len() - 1];
        for (&y, &w) in ids.iter().zip(ws) {
            if target < w {
                next = y;
                break;
            }
            target -= w;
        }
        x = next;
        if x == cfg.root {
            return WalkOutcome::Returned(t);
        }
        if mask.is_some_and(|m| !m.is_interior(x)) {
            return WalkOutcome::Censored(t);
        }
    }
    WalkOutcome::Survived
}

/// Runs `cfg.walks` independent walks from the root. With a mask, a walk
/// that reaches a boundary vertex is censored: it counts as not returned
/// and is reported separately.
pub fn simulate_return(
    g: &WeightedGraph,
    cfg: WalkConfig,
    mask: Option<&InteriorMask>,
) -> Result<ReturnEstimate> {
    cfg.validate()?;
    g.check_vertex(cfg.root)?;
    if let Some(m) = mask {
        m.check_domain(g)?;
    }
    if g.degree(cfg.root) == 0 {
        return Err(Error::param("root", "has no neighbours"));
    }
    if !g.is_connected() {
        return Err(Error::InvalidGraph(crate::graph::validate(g)));
    }
    let outcomes = (0..cfg.walks)
        .into_par_iter()
        .map(|k| walk(g, &cfg, mask, k))
        .collect();
    Ok(ReturnEstimate {
        config: cfg,
        outcomes,
    })
}
