//! Diagnostics built on sweep data: cumulative sums, exponential-decay
//! fits, crossing-based threshold estimation, and the linear lower-bound
//! check above the threshold.

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::rng::{tags, Prf};
use serde::Serialize;

use super::mc::{cell_hits, rows_at_p, thread_pool, SweepResult};

/// Cumulative one-arm sums S_k = Σ_{j≤k} θ_j and two growth diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct SnSeries {
    pub p: f64,
    /// θ_1..θ_n as estimated (index k-1).
    pub theta: Vec<f64>,
    /// S_1..S_n (index k-1).
    pub s: Vec<f64>,
    /// ln S_k / ln k for k ≥ 2 (index k-2): the effective growth exponent.
    pub exponents: Vec<f64>,
    /// (1/ln k) Σ_{j≤k} θ_j / j for k ≥ 2 (index k-2).
    pub t: Vec<f64>,
}

/// Derive cumulative diagnostics from sweep rows at one p. Requires rows
/// for every n = 1..=max contiguously, since S_k sums all of them.
pub fn sn_series(sweep: &SweepResult, p: f64) -> Result<SnSeries> {
    let mut rows = rows_at_p(sweep, p)?;
    rows.sort_by_key(|r| r.n);
    rows.dedup_by_key(|r| r.n);
    let max_n = rows.last().expect("rows_at_p is non-empty").n;
    let have: Vec<u32> = rows.iter().map(|r| r.n).collect();
    let want: Vec<u32> = (1..=max_n).collect();
    if have != want {
        return Err(Error::Parameter(format!(
            "S_n needs rows for every n in 1..={max_n}, got {have:?}"
        )));
    }
    let theta: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let mut s = Vec::with_capacity(theta.len());
    let mut acc = 0.0;
    for &t in &theta {
        acc += t;
        s.push(acc);
    }
    let mut exponents = Vec::new();
    let mut t_values = Vec::new();
    let mut harmonic = theta[0]; // Σ_{j≤k} θ_j / j, started at j = 1
    for k in 2..=max_n as usize {
        harmonic += theta[k - 1] / k as f64;
        let ln_k = (k as f64).ln();
        exponents.push(s[k - 1].ln() / ln_k);
        t_values.push(harmonic / ln_k);
    }
    Ok(SnSeries {
        p: rows[0].p,
        theta,
        s,
        exponents,
        t: t_values,
    })
}

/// Least-squares fit of ln θ_n ≈ intercept − c·n over a window of n.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub p: f64,
    pub n_lo: u32,
    pub n_hi: u32,
    /// Decay rate: θ_n ≈ exp(intercept − c n).
    pub c: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of points entering the fit.
    pub points: usize,
}

/// Ordinary least squares for y ≈ a + b x, returning (b, a, r²).
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

fn fit_log_points(p: f64, usable: &[(u32, f64)], window: Option<(u32, u32)>) -> Result<DecayFit> {
    let in_window: Vec<(u32, f64)> = usable
        .iter()
        .copied()
        .filter(|&(n, _)| window.is_none_or(|(lo, hi)| (lo..=hi).contains(&n)))
        .collect();
    if in_window.len() < 4 {
        return Err(Error::FitInfeasible(format!(
            "decay fit needs at least 4 usable points, got {} (window {:?})",
            in_window.len(),
            window
        )));
    }
    let xs: Vec<f64> = in_window.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = in_window.iter().map(|&(_, t)| t.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(DecayFit {
        p,
        n_lo: in_window.first().unwrap().0,
        n_hi: in_window.last().unwrap().0,
        c: -slope,
        intercept,
        r_squared,
        points: in_window.len(),
    })
}

/// Fit exponential decay to sweep rows at one p. Rows with mean zero or
/// relative standard error above 25% are dropped before fitting; the
/// reported window is the n-range actually used.
pub fn decay_fit(sweep: &SweepResult, p: f64, window: Option<(u32, u32)>) -> Result<DecayFit> {
    let mut rows = rows_at_p(sweep, p)?;
    rows.sort_by_key(|r| r.n);
    let usable: Vec<(u32, f64)> = rows
        .iter()
        .filter(|r| r.mean > 0.0 && r.stderr < 0.25 * r.mean)
        .map(|r| (r.n, r.mean))
        .collect();
    fit_log_points(rows[0].p, &usable, window)
}

/// Decay fit on raw (n, θ_n) points, for data that did not come from a
/// sweep (no standard-error screen; zero values are still dropped).
pub fn decay_fit_points(
    p: f64,
    series: &[(u32, f64)],
    window: Option<(u32, u32)>,
) -> Result<DecayFit> {
    let mut usable: Vec<(u32, f64)> = series.iter().copied().filter(|&(_, t)| t > 0.0).collect();
    usable.sort_by_key(|&(n, _)| n);
    fit_log_points(p, &usable, window)
}

/// Threshold estimate from crossings of the empirical θ̂_n(p) curves.
#[derive(Clone, Debug, Serialize)]
pub struct PcEstimate {
    pub method: String,
    pub tau: f64,
    /// Crossing location at the largest n.
    pub value: f64,
    /// Crossings at the two largest n, as a stability bracket.
    pub bracket: (f64, f64),
    /// (n, crossing) for every requested n, ascending in n.
    pub crossings: Vec<(u32, f64)>,
    pub replicas: u64,
    pub seed: u64,
}

/// Bisect for the crossing of a nondecreasing function against `tau` on
/// [0, 1], assuming eval(0) < tau ≤ eval(1).
fn bisect_crossing<F: FnMut(f64) -> f64>(mut eval: F, tau: f64, iters: u32) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if eval(mid) >= tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimate the threshold as the p where θ̂_n(p) first reaches `tau`, for
/// each n in `n_list`; the largest n gives the headline value.
///
/// Every bisection probe at a given n reuses the same replica seeds, and
/// each replica's arm indicator is monotone in p under that coupling, so
/// the empirical curve is a genuine nondecreasing step function and
/// bisection resolves its crossing exactly (to 2^-iters).
pub fn pc_estimate(
    spec: LatticeSpec,
    n_list: &[u32],
    replicas: u64,
    seed: u64,
    tau: f64,
    iters: u32,
    threads: usize,
) -> Result<PcEstimate> {
    if n_list.is_empty() {
        return Err(Error::Parameter("pc estimate needs at least one n".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Parameter(format!("tau = {tau} must lie in (0, 1)")));
    }
    if replicas == 0 || iters == 0 {
        return Err(Error::Parameter(
            "replicas and iters must be positive".into(),
        ));
    }
    let mut ns: Vec<u32> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns[0] == 0 {
        return Err(Error::Parameter("radius 0 has no crossing: θ_0 = 1".into()));
    }
    let eval = Prf::new(seed).stream(tags::EVAL);
    let pool = thread_pool(threads)?;
    let mut crossings = Vec::with_capacity(ns.len());
    for &n in &ns {
        let region = spec.ball(n);
        let cell_seed = eval.value(n as u64);
        let theta_hat = |p: f64| {
            pool.install(|| cell_hits(&region, n, p, replicas, cell_seed)) as f64 / replicas as f64
        };
        let at_zero = theta_hat(0.0);
        if at_zero >= tau {
            return Err(Error::EstimationFailed(format!(
                "θ̂_{n}(0) = {at_zero} already ≥ tau = {tau}; no crossing in (0, 1]"
            )));
        }
        crossings.push((n, bisect_crossing(theta_hat, tau, iters)));
    }
    let value = crossings.last().unwrap().1;
    let bracket = if crossings.len() >= 2 {
        let a = crossings[crossings.len() - 2].1;
        (a.min(value), a.max(value))
    } else {
        (value, value)
    };
    Ok(PcEstimate {
        method: "monotone-coupling bisection".into(),
        tau,
        value,
        bracket,
        crossings,
        replicas,
        seed,
    })
}

/// Check of the linear lower bound θ_n(p) ≥ c (p − p_c) above the
/// threshold: c_fit is the smallest observed ratio over the window.
#[derive(Clone, Debug, Serialize)]
pub struct MeanFieldCheck {
    pub pc: f64,
    /// Radius the check ran at (largest n in the sweep).
    pub n: u32,
    /// p-range actually used.
    pub window: (f64, f64),
    /// min over the window of θ̂_n(p) / (p − p_c).
    pub c_fit: f64,
    pub points: usize,
    /// p values where θ̂_n(p) was zero (ratio not positive).
    pub violations: Vec<f64>,
}

/// Evaluate θ̂_n(p)/(p − pc) over sweep rows with p inside `window`,
/// at the largest n present in the sweep.
pub fn mean_field_check(
    sweep: &SweepResult,
    pc: f64,
    window: (f64, f64),
) -> Result<MeanFieldCheck> {
    let (lo, hi) = window;
    if !(lo > pc && lo <= hi && hi <= 1.0) {
        return Err(Error::Parameter(format!(
            "window ({lo}, {hi}) must satisfy pc < lo ≤ hi ≤ 1 with pc = {pc}"
        )));
    }
    let n = sweep
        .rows
        .iter()
        .map(|r| r.n)
        .max()
        .ok_or_else(|| Error::Parameter("sweep has no rows".into()))?;
    let mut rows: Vec<_> = sweep
        .rows
        .iter()
        .filter(|r| r.n == n && (lo..=hi).contains(&r.p))
        .collect();
    rows.sort_by(|a, b| a.p.partial_cmp(&b.p).expect("grid has no NaN"));
    if rows.is_empty() {
        return Err(Error::Parameter(format!(
            "no sweep rows with p in [{lo}, {hi}] at n = {n}"
        )));
    }
    let mut c_fit = f64::INFINITY;
    let mut violations = Vec::new();
    for r in &rows {
        if r.mean > 0.0 {
            c_fit = c_fit.min(r.mean / (r.p - pc));
        } else {
            violations.push(r.p);
        }
    }
    if !violations.is_empty() {
        c_fit = 0.0;
    }
    Ok(MeanFieldCheck {
        pc,
        n,
        window: (rows.first().unwrap().p, rows.last().unwrap().p),
        c_fit,
        points: rows.len(),
        violations,
    })
}
