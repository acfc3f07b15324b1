//! Monte Carlo estimation of the one-arm probability.
//!
//! Replica seeds derive from the master seed through tagged streams, and
//! per-cell hit counts are order-independent integer sums, so results are
//! bit-identical no matter how many worker threads run.

use crate::error::{Error, Result};
use crate::exploration::ArmScratch;
use crate::lattice::{LatticeSpec, Region};
use crate::model::Configuration;
use crate::rng::{tags, Prf};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// One Monte Carlo cell: replicas of the one-arm indicator at fixed (n, p).
#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    pub n: u32,
    pub p: f64,
    pub replicas: u64,
    pub hits: u64,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl ThetaEstimate {
    pub(crate) fn from_hits(n: u32, p: f64, replicas: u64, hits: u64, seed: u64) -> Self {
        let mean = hits as f64 / replicas as f64;
        let stderr = (mean * (1.0 - mean) / replicas as f64).sqrt();
        ThetaEstimate {
            n,
            p,
            replicas,
            hits,
            mean,
            stderr,
            seed,
        }
    }
}

/// A grid of estimates over one lattice.
#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub spec: LatticeSpec,
    pub rows: Vec<ThetaEstimate>,
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} must lie in [0, 1]")));
    }
    Ok(())
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))
}

/// Replica hit count for one cell; must run inside the intended pool. The
/// replica seeds depend only on `cell_seed`, so the sum is reproducible
/// across any work split.
pub(crate) fn cell_hits(
    region: &Arc<Region>,
    n: u32,
    p: f64,
    replicas: u64,
    cell_seed: u64,
) -> u64 {
    let rep = Prf::new(cell_seed).stream(tags::REPLICA);
    (0..replicas)
        .into_par_iter()
        .fold(
            || (ArmScratch::new(region.len()), 0u64),
            |(mut scratch, acc), r| {
                let cfg = Configuration::sample(region.clone(), p, rep.value(r))
                    .expect("p validated by caller");
                let hit = scratch.one_arm(&cfg, n).expect("n within region radius");
                (scratch, acc + hit as u64)
            },
        )
        .map(|(_, hits)| hits)
        .sum()
}

/// Estimate θ_n(p) from `replicas` independent configurations.
///
/// `threads` sets the worker count (0 picks the machine default); it affects
/// wall time only, never the estimate.
pub fn mc_theta(
    spec: LatticeSpec,
    n: u32,
    p: f64,
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<ThetaEstimate> {
    check_p(p)?;
    if replicas == 0 {
        return Err(Error::Parameter("replicas must be at least 1".into()));
    }
    let region = spec.ball(n);
    let pool = thread_pool(threads)?;
    let hits = pool.install(|| cell_hits(&region, n, p, replicas, seed));
    Ok(ThetaEstimate::from_hits(n, p, replicas, hits, seed))
}

/// Full factorial sweep over n_list × p_grid with independent per-cell
/// seeds derived from (master seed, n, p).
pub fn theta_sweep(
    spec: LatticeSpec,
    n_list: &[u32],
    p_grid: &[f64],
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<SweepResult> {
    if n_list.is_empty() || p_grid.is_empty() {
        return Err(Error::Parameter("sweep grid must be non-empty".into()));
    }
    if replicas == 0 {
        return Err(Error::Parameter("replicas must be at least 1".into()));
    }
    for &p in p_grid {
        check_p(p)?;
    }
    let cells = Prf::new(seed).stream(tags::CELL);
    let pool = thread_pool(threads)?;
    let mut rows = Vec::with_capacity(n_list.len() * p_grid.len());
    for &n in n_list {
        let region = spec.ball(n);
        for &p in p_grid {
            let cell_seed = cells.value2(n as u64, p.to_bits());
            let hits = pool.install(|| cell_hits(&region, n, p, replicas, cell_seed));
            rows.push(ThetaEstimate::from_hits(n, p, replicas, hits, cell_seed));
        }
    }
    Ok(SweepResult { spec, rows })
}

/// Rows of the sweep at one p (nearest grid value within 1e-9).
pub(crate) fn rows_at_p(sweep: &SweepResult, p: f64) -> Result<Vec<&ThetaEstimate>> {
    let best = sweep
        .rows
        .iter()
        .map(|r| r.p)
        .min_by(|a, b| {
            (a - p)
                .abs()
                .partial_cmp(&(b - p).abs())
                .expect("grid has no NaN")
        })
        .ok_or_else(|| Error::Parameter("sweep has no rows".into()))?;
    if (best - p).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "no sweep rows at p = {p}; nearest grid value is {best}"
        )));
    }
    Ok(sweep.rows.iter().filter(|r| r.p == best).collect())
}
