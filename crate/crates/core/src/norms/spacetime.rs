//! Vector-valued Sobolev norms of trajectories: a spatial norm per slice,
//! then a temporal Gagliardo double sum over the sample times.
//!
//! The time integrals run over the sampled interval itself, with the
//! trajectory's own quadrature weights. No cutoff is applied, so the value is
//! that of the interval and is not affected by any window.

use rayon::prelude::*;

use crate::error::{PmeError, Result};
use crate::grid::SpaceTimeField;

use super::quadrature::{Extension, Samples};
use super::{check_order, check_p, full_pow, homogeneous_pow, Diagnostics, NormMethod, NormReport};

const MIN_SLICES: usize = 8;

type SpatialPow = fn(&Samples, f64, f64) -> f64;

fn slice_samples(st: &SpaceTimeField, n: usize, ext: Extension) -> Samples {
    let g = st.grid;
    Samples::new(st.slice(n).to_vec(), g.n(), g.dim(), g.h(), ext)
}

fn diff_samples(st: &SpaceTimeField, a: usize, b: usize, ext: Extension) -> Samples {
    let g = st.grid;
    let values = st.slice(a).iter().zip(st.slice(b)).map(|(x, y)| x - y).collect();
    Samples::new(values, g.n(), g.dim(), g.h(), ext)
}

/// `Σ_n w_n ‖u_n‖^p`
fn lp_in_time(st: &SpaceTimeField, sigma_x: f64, p: f64, ext: Extension, pow: SpatialPow) -> f64 {
    let w = st.time_weights();
    let parts: Vec<f64> = (0..st.n_t())
        .into_par_iter()
        .map(|n| w[n] * pow(&slice_samples(st, n, ext), sigma_x, p))
        .collect();
    parts.iter().sum()
}

/// `Σ_{a≠b} w_a w_b ‖u_a − u_b‖^p / |t_a − t_b|^{1+σ_t p}`
fn temporal_pairs(
    st: &SpaceTimeField,
    sigma_t: f64,
    sigma_x: f64,
    p: f64,
    ext: Extension,
    pow: SpatialPow,
) -> f64 {
    let w = st.time_weights();
    let n_t = st.n_t();
    let e = -1.0 - sigma_t * p;
    let rows: Vec<f64> = (0..n_t)
        .into_par_iter()
        .map(|a| {
            let mut s = 0.0;
            for b in a + 1..n_t {
                let gap = (st.time(b) - st.time(a)).abs();
                let d = pow(&diff_samples(st, a, b, ext), sigma_x, p);
                s += w[a] * w[b] * d * gap.powf(e);
            }
            s
        })
        .collect();
    2.0 * rows.iter().sum::<f64>()
}

fn check(st: &SpaceTimeField, sigma_t: f64, sigma_x: f64, p: f64) -> Result<()> {
    check_p(p)?;
    check_order(sigma_x)?;
    if !(0.0..1.0).contains(&sigma_t) {
        return Err(PmeError::domain(format!("temporal order {sigma_t} must lie in [0, 1)")));
    }
    if st.n_t() < MIN_SLICES {
        return Err(PmeError::domain(format!(
            "{} time slices; at least {MIN_SLICES} are needed",
            st.n_t()
        )));
    }
    Ok(())
}

fn report(st: &SpaceTimeField, value: f64, sigma_t: f64, sigma_x: f64, p: f64) -> NormReport {
    NormReport {
        value,
        method: NormMethod::Quadrature,
        sigma: sigma_x,
        sigma_t: Some(sigma_t),
        p,
        h: st.grid.h(),
        dt: Some(st.dt),
        diagnostics: Diagnostics::default(),
    }
}

/// `‖u‖_{W^{σ_t,p}(0,T; W^{σ_x,p})}`: the `L^p(0,T; W^{σ_x,p})` part plus, for
/// `σ_t > 0`, the temporal Gagliardo seminorm with slice differences measured in
/// `W^{σ_x,p}`.
pub fn spacetime_sobolev_norm(
    st: &SpaceTimeField,
    sigma_t: f64,
    sigma_x: f64,
    p: f64,
    ext: Extension,
) -> Result<NormReport> {
    check(st, sigma_t, sigma_x, p)?;
    let mut total = lp_in_time(st, sigma_x, p, ext, full_pow);
    if sigma_t > 0.0 {
        total += temporal_pairs(st, sigma_t, sigma_x, p, ext, full_pow);
    }
    Ok(report(st, total.powf(1.0 / p), sigma_t, sigma_x, p))
}

/// Homogeneous counterpart: the temporal Gagliardo seminorm with slice differences
/// in `Ẇ^{σ_x,p}`, or `L^p(0,T; Ẇ^{σ_x,p})` when `σ_t = 0`.
pub fn spacetime_seminorm(
    st: &SpaceTimeField,
    sigma_t: f64,
    sigma_x: f64,
    p: f64,
    ext: Extension,
) -> Result<NormReport> {
    check(st, sigma_t, sigma_x, p)?;
    let total = if sigma_t > 0.0 {
        temporal_pairs(st, sigma_t, sigma_x, p, ext, homogeneous_pow)
    } else {
        lp_in_time(st, sigma_x, p, ext, homogeneous_pow)
    };
    Ok(report(st, total.powf(1.0 / p), sigma_t, sigma_x, p))
}

/// `‖u‖_{L^p(0,T; W^{σ,p})}` for any spatial order `σ ≥ 0`.
pub fn time_lp_sobolev_norm(st: &SpaceTimeField, sigma: f64, p: f64, ext: Extension) -> Result<NormReport> {
    check_p(p)?;
    check_order(sigma)?;
    let total = lp_in_time(st, sigma, p, ext, full_pow);
    Ok(report(st, total.powf(1.0 / p), 0.0, sigma, p))
}
