//! Fractional Sobolev, Besov and mixed space-time norms of sampled fields.

mod besov;
pub(crate) mod quadrature;
mod spacetime;
mod sweep;

use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::Field;

pub use besov::{besov_space_norm, mixed_besov_norm};
pub use quadrature::Extension;
use quadrature::Samples;
pub use spacetime::{spacetime_seminorm, spacetime_sobolev_norm, time_lp_sobolev_norm};
pub use sweep::{barenblatt_family, growth_exponent, norm_sweep, DIVERGENCE_SLOPE, SweepMode, SweepResult, SweepRow, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Quadrature,
    Spectral,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Share of the field's `L^p` norm left in the residual (non-block) part.
    pub residual_share: Option<f64>,
    /// Relative change against the same computation on a twice coarser grid.
    pub refinement_delta: Option<f64>,
    /// Relative `L^p` change caused by the temporal cutoff window.
    pub cutoff_share: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub method: NormMethod,
    /// Spatial order.
    pub sigma: f64,
    /// Temporal order for space-time norms.
    pub sigma_t: Option<f64>,
    pub p: f64,
    pub h: f64,
    pub dt: Option<f64>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(PmeError::domain(format!("p = {p} must be a finite number ≥ 1")))
    }
}

pub(crate) fn check_order(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(PmeError::domain(format!("order {sigma} must be finite and ≥ 0")))
    }
}

pub(crate) fn samples(field: &Field, ext: Extension) -> Samples {
    let g = field.grid;
    Samples::new(field.values.clone(), g.n(), g.dim(), g.h(), ext)
}

/// `(k, r)` with `σ = k + r`, `r ∈ [0, 1)`.
fn split_order(sigma: f64) -> (usize, f64) {
    let k = sigma.floor();
    let r = sigma - k;
    // treat round-off just below an integer as the integer
    if 1.0 - r < 1e-12 {
        (k as usize + 1, 0.0)
    } else {
        (k as usize, r)
    }
}

/// `p`-th power of the homogeneous seminorm of order `σ ≥ 0`: the `r`-seminorm of
/// every order-`k` difference quotient, or their `L^p` norms when `r = 0`.
pub(crate) fn homogeneous_pow(s: &Samples, sigma: f64, p: f64) -> f64 {
    let (k, r) = split_order(sigma);
    s.derivatives(k)
        .iter()
        .map(|d| if r > 0.0 { d.seminorm_pow(r, p) } else { d.lp_pow(p) })
        .sum()
}

/// `p`-th power of the full norm: `L^p` of all difference quotients up to order `k`
/// plus the `r`-seminorm of the top-order ones.
pub(crate) fn full_pow(s: &Samples, sigma: f64, p: f64) -> f64 {
    let (k, r) = split_order(sigma);
    let mut total = 0.0;
    let mut level = vec![s.clone()];
    for order in 0..=k {
        if order > 0 {
            level = s.derivatives(order);
        }
        total += level.iter().map(|d| d.lp_pow(p)).sum::<f64>();
    }
    if r > 0.0 {
        total += level.iter().map(|d| d.seminorm_pow(r, p)).sum::<f64>();
    }
    total
}

/// Twice coarser copy (pairwise cell averages), if the grid allows it.
pub(crate) fn coarsened(field: &Field) -> Option<Field> {
    let g = field.grid;
    if g.n() < 16 || g.n() % 2 != 0 {
        return None;
    }
    let coarse = crate::grid::Grid::new(g.dim(), g.length(), g.n() / 2).ok()?;
    let n = g.n();
    let values = if g.dim() == 1 {
        field.values.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    } else {
        let nc = n / 2;
        let mut out = vec![0.0; nc * nc];
        for i in 0..nc {
            for j in 0..nc {
                let v = &field.values;
                out[i * nc + j] = 0.25
                    * (v[2 * i * n + 2 * j]
                        + v[2 * i * n + 2 * j + 1]
                        + v[(2 * i + 1) * n + 2 * j]
                        + v[(2 * i + 1) * n + 2 * j + 1]);
            }
        }
        out
    };
    Field::new(coarse, values).ok()
}

/// Heuristic: the largest neighbour jump holds a quarter of the field's range.
fn looks_discontinuous(field: &Field) -> bool {
    let v = &field.values;
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let range = hi - lo;
    if range <= 0.0 {
        return false;
    }
    let n = field.grid.n();
    let jump = if field.grid.dim() == 1 {
        v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    } else {
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = v[i * n + j];
                if i + 1 < n {
                    m = m.max((v[(i + 1) * n + j] - a).abs());
                }
                if j + 1 < n {
                    m = m.max((v[i * n + j + 1] - a).abs());
                }
            }
        }
        m
    };
    jump > 0.25 * range
}

fn report(field: &Field, value: f64, sigma: f64, p: f64, diagnostics: Diagnostics) -> NormReport {
    NormReport {
        value,
        method: NormMethod::Quadrature,
        sigma,
        sigma_t: None,
        p,
        h: field.grid.h(),
        dt: None,
        diagnostics,
    }
}

fn spatial_norm(
    field: &Field,
    sigma: f64,
    p: f64,
    ext: Extension,
    pow: fn(&Samples, f64, f64) -> f64,
) -> NormReport {
    let value = pow(&samples(field, ext), sigma, p).powf(1.0 / p);
    let mut diagnostics = Diagnostics::default();
    if let Some(c) = coarsened(field) {
        let coarse = pow(&samples(&c, ext), sigma, p).powf(1.0 / p);
        diagnostics.refinement_delta = Some(if value > 0.0 {
            (value - coarse).abs() / value
        } else {
            coarse
        });
    }
    if sigma.fract() * p >= 1.0 && looks_discontinuous(field) {
        diagnostics.warnings.push(format!(
            "σp = {} ≥ 1 on a field with a jump; the value grows under refinement",
            sigma.fract() * p
        ));
    }
    report(field, value, sigma, p, diagnostics)
}

/// Gagliardo seminorm `(∬ |f(x) − f(y)|^p / |x − y|^{σp+d})^{1/p}` of order `σ ∈ (0, 1)`.
pub fn slobodeckii_seminorm(field: &Field, sigma: f64, p: f64, ext: Extension) -> Result<NormReport> {
    check_p(p)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(PmeError::domain(format!("seminorm order {sigma} must lie in (0, 1)")));
    }
    Ok(spatial_norm(field, sigma, p, ext, Samples::seminorm_pow_dyn))
}

/// Homogeneous seminorm of any order `σ = k + r ≥ 0`: the `r`-seminorm of the
/// order-`k` difference quotients (their `L^p` norm when `r = 0`).
pub fn homogeneous_seminorm(field: &Field, sigma: f64, p: f64, ext: Extension) -> Result<NormReport> {
    check_p(p)?;
    check_order(sigma)?;
    Ok(spatial_norm(field, sigma, p, ext, homogeneous_pow))
}

/// Full `W^{σ,p}` norm for `σ = k + r ≥ 0`.
pub fn sobolev_norm(field: &Field, sigma: f64, p: f64, ext: Extension) -> Result<NormReport> {
    check_p(p)?;
    check_order(sigma)?;
    Ok(spatial_norm(field, sigma, p, ext, full_pow))
}

impl Samples {
    fn seminorm_pow_dyn(s: &Samples, sigma: f64, p: f64) -> f64 {
        s.seminorm_pow(sigma, p)
    }
}
