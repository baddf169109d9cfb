//! The self-similar source-type solution
//! `u(t,x) = t^{−α} (C − k|x|² t^{−2β})_+^{1/(m−1)}`.

use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::{Field, Grid, SpaceTimeField, TimeSampling};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarenblattParams {
    pub m: f64,
    pub d: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
}

/// Exponents and profile constant for nonlinearity `m` in dimension `d`.
pub fn barenblatt_params(m: f64, d: usize, c: f64) -> Result<BarenblattParams> {
    if !(m.is_finite() && m > 1.0) {
        return Err(PmeError::domain("nonlinearity must exceed 1"));
    }
    if d != 1 && d != 2 {
        return Err(PmeError::domain(format!("unsupported dimension {d}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(PmeError::domain("profile constant must be positive"));
    }
    let df = d as f64;
    let alpha = df / (df * (m - 1.0) + 2.0);
    Ok(BarenblattParams {
        m,
        d,
        c,
        alpha,
        beta: alpha / df,
        k: alpha * (m - 1.0) / (2.0 * m * df),
    })
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(PmeError::domain(format!("time must be positive, got {t}")))
    }
}

impl BarenblattParams {
    /// `u(t,x)^μ` for `|x|² = r2`; `t` must be positive (not checked).
    #[inline]
    pub fn value_r2(&self, t: f64, r2: f64, mu: f64) -> f64 {
        let inner = self.c - self.k * r2 * t.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            return 0.0;
        }
        let u = t.powf(-self.alpha) * inner.powf(1.0 / (self.m - 1.0));
        if mu == 1.0 {
            u
        } else {
            u.powf(mu)
        }
    }

    /// Radial derivative of `u^μ` with respect to `r = |x|` (zero outside the support).
    pub fn radial_derivative(&self, t: f64, r: f64, mu: f64) -> f64 {
        let tb = t.powf(-2.0 * self.beta);
        let inner = self.c - self.k * r * r * tb;
        if inner <= 0.0 {
            return 0.0;
        }
        let e = mu / (self.m - 1.0);
        // d/dr [t^{−αμ} inner^e] = t^{−αμ} e inner^{e−1} (−2 k r t^{−2β})
        t.powf(-self.alpha * mu) * e * inner.powf(e - 1.0) * (-2.0 * self.k * r * tb)
    }

    /// Total mass `∫ u(t,x) dx`, which does not depend on `t`.
    pub fn mass(&self) -> f64 {
        let a = 1.0 / (self.m - 1.0);
        let unit = match self.d {
            1 => std::f64::consts::PI.sqrt() * libm::tgamma(a + 1.0) / libm::tgamma(a + 1.5),
            _ => std::f64::consts::PI / (a + 1.0),
        };
        let half_d = self.d as f64 / 2.0;
        self.c.powf(a + half_d) * self.k.powf(-half_d) * unit
    }

    /// Same exponents with the profile constant chosen to carry `mass`.
    pub fn with_mass(&self, mass: f64) -> Result<BarenblattParams> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(PmeError::domain("mass must be positive"));
        }
        let unit = BarenblattParams { c: 1.0, ..*self }.mass();
        let e = 1.0 / (self.m - 1.0) + self.d as f64 / 2.0;
        barenblatt_params(self.m, self.d, (mass / unit).powf(1.0 / e))
    }
}

/// `u(t,x)^μ`; `x` holds `d` coordinates.
pub fn barenblatt_eval(params: &BarenblattParams, t: f64, x: &[f64], mu: f64) -> Result<f64> {
    check_time(t)?;
    if x.len() != params.d {
        return Err(PmeError::domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            params.d
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(params.value_r2(t, r2, mu))
}

/// `√(C/k) t^β`.
pub fn barenblatt_support_radius(params: &BarenblattParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((params.c / params.k).sqrt() * t.powf(params.beta))
}

/// Spatial order `2μ/m` beyond which `u^[μ]` leaves `L^{m/μ}_t Ẇ^{s,m/μ}_x`.
pub fn barenblatt_threshold(m: f64, mu: f64) -> Result<f64> {
    if !(m > 1.0) {
        return Err(PmeError::domain("nonlinearity must exceed 1"));
    }
    if !(1.0..=m).contains(&mu) {
        return Err(PmeError::domain(format!("mu = {mu} must lie in [1, m]")));
    }
    Ok(2.0 * mu / m)
}

/// Largest spatial order `σ` for which `u^[μ]` on `(0, T)` has finite
/// `W^{σ_t,p}_t W^{σ,p}_x` norm. Two limits compete: integrability of the
/// self-similar blow-up at `t = 0`, which needs `αμp + β(σp − d) + σ_t p < 1`,
/// and the profile's edge singularity `(·)_+^{μ/(m−1)}`, which allows
/// `σ < μ/(m−1) + 1/p`. With `σ_t = 0` and `p = m/μ` this is `2μ/m`.
pub fn barenblatt_order_limit(params: &BarenblattParams, mu: f64, p: f64, sigma_t: f64) -> Result<f64> {
    if !(mu > 0.0 && p >= 1.0 && sigma_t >= 0.0) {
        return Err(PmeError::domain("need mu > 0, p ≥ 1 and sigma_t ≥ 0"));
    }
    let d = params.d as f64;
    let blow_up = (1.0 - params.alpha * mu * p + params.beta * d - sigma_t * p) / (params.beta * p);
    let edge = mu / (params.m - 1.0) + 1.0 / p;
    Ok(blow_up.min(edge))
}

/// Whether the support at time `t` stays strictly inside the grid box.
pub fn support_fits(params: &BarenblattParams, grid: &Grid, t: f64) -> Result<bool> {
    Ok(barenblatt_support_radius(params, t)? < 0.5 * grid.length())
}

/// Cell-centre samples of `u(t,·)^μ`.
pub fn barenblatt_sample(params: &BarenblattParams, grid: &Grid, t: f64, mu: f64) -> Result<Field> {
    check_time(t)?;
    if grid.dim() != params.d {
        return Err(PmeError::mismatch("grid and profile dimensions differ"));
    }
    if !support_fits(params, grid, t)? {
        log::warn!("Barenblatt support at t = {t} reaches the edge of the grid box");
    }
    Ok(Field::from_fn(*grid, |x, y| {
        params.value_r2(t, x * x + y * y, mu)
    }))
}

/// Samples `u^μ` on a uniform time grid; all sample times must be positive.
pub fn barenblatt_trajectory(
    params: &BarenblattParams,
    grid: &Grid,
    t_start: f64,
    dt: f64,
    n_t: usize,
    sampling: TimeSampling,
    mu: f64,
) -> Result<SpaceTimeField> {
    if grid.dim() != params.d {
        return Err(PmeError::mismatch("grid and profile dimensions differ"));
    }
    let first = match sampling {
        TimeSampling::Nodal => t_start,
        TimeSampling::Midpoint => t_start + 0.5 * dt,
    };
    check_time(first)?;
    let last = first + (n_t.max(1) - 1) as f64 * dt;
    if !support_fits(params, grid, last)? {
        log::warn!("Barenblatt support at t = {last} reaches the edge of the grid box");
    }
    SpaceTimeField::from_fn(*grid, t_start, dt, n_t, sampling, |t, x, y| {
        params.value_r2(t, x * x + y * y, mu)
    })
}
