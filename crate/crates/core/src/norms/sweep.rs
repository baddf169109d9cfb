//! Refinement sweeps: how a norm grows as the grid is refined, per order.
//!
//! A norm that is finite in the continuum settles under refinement; one that
//! is infinite keeps growing like a power of `1/h`. The growth exponent is
//! read off the successive increments of `N^p`, which isolates the singular
//! part from the finite background that would otherwise flatten a plain
//! log-log slope at desk-scale resolutions.

use serde::Serialize;

use crate::barenblatt::{barenblatt_trajectory, BarenblattParams};
use crate::error::{PmeError, Result};
use crate::grid::{Grid, SpaceTimeField, TimeSampling};
use crate::stats::fit_line;

use super::quadrature::Extension;
use super::spacetime::{spacetime_sobolev_norm, time_lp_sobolev_norm};

/// Slope above which a norm is read as divergent.
pub const DIVERGENCE_SLOPE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SweepMode {
    /// `L^p(0,T; W^{σ,p})`, swept over the spatial order.
    TimeLp,
    /// `W^{σ_t,p}(0,T; W^{σ,p})` at a fixed temporal order, swept over the spatial one.
    SpaceTime { sigma_t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub h: f64,
    pub dt: f64,
    pub norm: f64,
    /// Growth exponent fitted for this order (shared by all rows of the order).
    pub slope: f64,
    pub slope_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub detected: bool,
    pub estimate: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Sorted by order, then by decreasing `h`.
    pub rows: Vec<SweepRow>,
    pub threshold: Threshold,
    pub predicted: Option<f64>,
}

impl SweepResult {
    /// `(sigma, slope, slope_err)` once per order.
    pub fn slopes(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for r in &self.rows {
            if out.last().map_or(true, |l| l.0 != r.sigma) {
                out.push((r.sigma, r.slope, r.slope_err));
            }
        }
        out
    }
}

/// Exact Barenblatt samples `u^μ` at midpoint times over `(0, T]`, one trajectory per
/// spatial resolution. The time step shrinks like `h²` so the earliest sample moves
/// towards the singular initial time as the grid is refined; the coarsest
/// resolution gets `base_slices` samples.
pub fn barenblatt_family(
    params: &BarenblattParams,
    mu: f64,
    length: f64,
    t_final: f64,
    resolutions: &[usize],
    base_slices: usize,
) -> Result<Vec<SpaceTimeField>> {
    let n0 = *resolutions
        .iter()
        .min()
        .ok_or_else(|| PmeError::domain("no resolutions given"))?;
    resolutions
        .iter()
        .map(|&n| {
            let grid = Grid::new(params.d, length, n)?;
            let ratio = n as f64 / n0 as f64;
            let n_t = (base_slices as f64 * ratio * ratio).round() as usize;
            barenblatt_trajectory(params, &grid, 0.0, t_final / n_t as f64, n_t, TimeSampling::Midpoint, mu)
        })
        .collect()
}

/// Growth exponent of `N` in `1/h`, with its standard error. When the increments
/// of `N^p` between successive levels are all positive, the exponent is fitted to
/// them (and divided by `p`); otherwise it is the plain log-log slope of `N`.
pub fn growth_exponent(h: &[f64], norms: &[f64], p: f64) -> Option<(f64, f64)> {
    if norms.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let pw: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
    let inc: Vec<f64> = pw.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.len() >= 2 && inc.iter().all(|d| *d > 0.0) {
        // increments between consecutive levels, placed at the finer level
        let x: Vec<f64> = h[1..].iter().map(|v| -v.ln()).collect();
        let y: Vec<f64> = inc.iter().map(|v| v.ln()).collect();
        let fit = fit_line(&x, &y)?;
        return Some((fit.slope / p, fit.slope_err / p));
    }
    let x: Vec<f64> = h.iter().map(|v| -v.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&x, &y)?;
    Some((fit.slope, fit.slope_err))
}

/// First order where the curve rises through the divergence level, linearly
/// interpolated; `None` if it never does or if it comes back down afterwards.
fn crossing(sigmas: &[f64], slopes: &[f64]) -> std::result::Result<Option<f64>, ()> {
    let above: Vec<bool> = slopes.iter().map(|s| *s >= DIVERGENCE_SLOPE).collect();
    let Some(first) = above.iter().position(|a| *a) else {
        return Ok(None);
    };
    if above[first..].iter().any(|a| !a) {
        return Err(());
    }
    if first == 0 {
        return Ok(Some(sigmas[0]));
    }
    let (s0, s1) = (sigmas[first - 1], sigmas[first]);
    let (y0, y1) = (slopes[first - 1], slopes[first]);
    Ok(Some(s0 + (DIVERGENCE_SLOPE - y0) / (y1 - y0) * (s1 - s0)))
}

fn detect(sigmas: &[f64], slopes: &[f64], errs: &[f64]) -> Threshold {
    let none = |note: &str| Threshold {
        detected: false,
        estimate: None,
        ci_lo: None,
        ci_hi: None,
        note: note.to_string(),
    };
    let estimate = match crossing(sigmas, slopes) {
        Err(()) => return none("not detected: slopes fall back below the divergence level"),
        Ok(None) => return none("not detected: no order shows growth under refinement"),
        Ok(Some(s)) if s == sigmas[0] => {
            return none("not detected: already growing at the smallest order swept")
        }
        Ok(Some(s)) => s,
    };
    let shifted = |sign: f64| -> Vec<f64> { slopes.iter().zip(errs).map(|(s, e)| s + sign * e).collect() };
    let lo = match crossing(sigmas, &shifted(1.0)) {
        Ok(Some(s)) => s,
        _ => sigmas[0],
    };
    let hi = match crossing(sigmas, &shifted(-1.0)) {
        Ok(Some(s)) => s,
        _ => *sigmas.last().unwrap(),
    };
    Threshold {
        detected: true,
        estimate: Some(estimate),
        ci_lo: Some(lo.min(estimate)),
        ci_hi: Some(hi.max(estimate)),
        note: String::new(),
    }
}

/// Evaluates the chosen norm on every member of a refinement family for every
/// order and locates the order where growth sets in.
pub fn norm_sweep(
    family: &[SpaceTimeField],
    sigmas: &[f64],
    p: f64,
    mode: SweepMode,
    ext: Extension,
    predicted: Option<f64>,
) -> Result<SweepResult> {
    if family.len() < 3 {
        return Err(PmeError::domain("a sweep needs at least three resolutions"));
    }
    if sigmas.len() < 5 {
        return Err(PmeError::domain("a sweep needs at least five orders"));
    }
    let mut family: Vec<&SpaceTimeField> = family.iter().collect();
    family.sort_by(|a, b| b.grid.h().total_cmp(&a.grid.h()));
    if family.windows(2).any(|w| w[0].grid.h() == w[1].grid.h()) {
        return Err(PmeError::domain("resolutions in a sweep must be distinct"));
    }
    let mut sigmas = sigmas.to_vec();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();

    let h: Vec<f64> = family.iter().map(|f| f.grid.h()).collect();
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut errs = Vec::new();
    for &sigma in &sigmas {
        let norms = family
            .iter()
            .map(|st| {
                Ok(match mode {
                    SweepMode::TimeLp => time_lp_sobolev_norm(st, sigma, p, ext)?.value,
                    SweepMode::SpaceTime { sigma_t } => spacetime_sobolev_norm(st, sigma_t, sigma, p, ext)?.value,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let (slope, err) = growth_exponent(&h, &norms, p).unwrap_or((0.0, f64::INFINITY));
        log::debug!("sweep σ = {sigma}: norms {norms:?}, slope {slope:.4} ± {err:.4}");
        for (st, norm) in family.iter().zip(&norms) {
            rows.push(SweepRow {
                sigma,
                h: st.grid.h(),
                dt: st.dt,
                norm: *norm,
                slope,
                slope_err: err,
            });
        }
        slopes.push(slope);
        errs.push(err);
    }
    Ok(SweepResult {
        rows,
        threshold: detect(&sigmas, &slopes, &errs),
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates() {
        let s = [0.6, 0.8, 1.0, 1.2];
        assert_eq!(crossing(&s, &[-0.2, -0.1, 0.0, 0.1]).unwrap(), Some(1.1));
        assert_eq!(crossing(&s, &[-0.2, -0.1, 0.0, 0.01]).unwrap(), None);
        assert!(crossing(&s, &[-0.2, 0.1, 0.0, 0.1]).is_err());
    }

    #[test]
    fn growth_of_a_power_law() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        // N^2 = 3 + h^{-0.4}: increments grow like h^{-0.4}, so the exponent is 0.2
        let n: Vec<f64> = h.iter().map(|v: &f64| (3.0 + v.powf(-0.4)).sqrt()).collect();
        let (s, e) = growth_exponent(&h, &n, 2.0).unwrap();
        assert!((s - 0.2).abs() < 1e-10 && e < 1e-10);
    }

    #[test]
    fn smooth_bump_shows_no_threshold() {
        let fam: Vec<SpaceTimeField> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::line(4.0, n).unwrap();
                SpaceTimeField::from_fn(g, 0.0, 0.1, 8, TimeSampling::Midpoint, |t, x, _| {
                    (1.0 + t) * (-(x * x) * 2.0).exp()
                })
                .unwrap()
            })
            .collect();
        let r = norm_sweep(&fam, &[0.2, 0.4, 0.6, 0.8, 0.9], 2.0, SweepMode::TimeLp, Extension::Zero, None)
            .unwrap();
        assert!(!r.threshold.detected, "{:?}", r.slopes());
        assert!(r.slopes().iter().all(|s| s.1 < DIVERGENCE_SLOPE));
        assert_eq!(r.rows.len(), 15);
    }
}
