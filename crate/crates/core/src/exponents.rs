//! Closed-form regularity exponents for the porous medium equation.
//!
//! Every function here is pure. Open-interval suprema are returned as the
//! bound itself; callers subtract a margin when they need an attained order.

use serde::Serialize;

use crate::error::{PmeError, Result};

/// Tolerance used when testing closed interval endpoints.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Which estimate an exponent triple comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentSource {
    /// Global estimate for data in L¹, integrability `p ∈ (1, m]`.
    Thm1Global,
    /// Interpolated local estimate parametrised by `s ∈ [0, 1]`.
    Thm1Local,
    /// Powers `u^[μ]` for data in L¹ ∩ L^ρ.
    Thm2Power,
    /// Mixed space-time estimate for data in L¹ ∩ L^ρ.
    Thm2Mixed,
    /// Space-time velocity averaging constants.
    AvLemma,
    /// Time-only velocity averaging constants.
    AvLemmaTime,
    /// Averaging constants with the integrability prescribed up front.
    PrescribedP,
}

/// A `(p, κ_t, κ_x)` triple together with its origin and validity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSet {
    pub p: f64,
    pub kappa_t: f64,
    /// `None` when the estimate carries no spatial order (time-only averaging).
    pub kappa_x: Option<f64>,
    pub source: ExponentSource,
    pub valid: bool,
    pub reason: Option<String>,
}

impl ExponentSet {
    fn new(p: f64, kappa_t: f64, kappa_x: Option<f64>, source: ExponentSource) -> Self {
        ExponentSet {
            p,
            kappa_t,
            kappa_x,
            source,
            valid: true,
            reason: None,
        }
    }

    fn invalidate(mut self, reason: impl Into<String>) -> Self {
        if self.valid {
            self.valid = false;
            self.reason = Some(reason.into());
        }
        self
    }

    fn require(self, cond: bool, reason: &str) -> Self {
        if cond {
            self
        } else {
            self.invalidate(reason)
        }
    }
}

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m > 1.0 {
        Ok(())
    } else {
        Err(PmeError::domain("nonlinearity must exceed 1"))
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + BOUNDARY_TOL
}

fn lt(a: f64, b: f64) -> bool {
    a < b - BOUNDARY_TOL
}

/// Global exponents for `u₀ ∈ L¹`: `κ_t = (m−p)/(p(m−1))`, `κ_x = 2(p−1)/(p(m−1))`.
pub fn thm1_exponents(m: f64, p: f64) -> Result<ExponentSet> {
    check_m(m)?;
    let kt = (m - p) / p / (m - 1.0);
    let kx = (p - 1.0) / p * 2.0 / (m - 1.0);
    Ok(ExponentSet::new(p, kt, Some(kx), ExponentSource::Thm1Global)
        .require(lt(1.0, p) && le(p, m), "p must lie in (1, m]"))
}

/// Local exponents along the interpolation line `p = s(m−1)+1`.
pub fn thm1_local_exponents(m: f64, s: f64) -> Result<ExponentSet> {
    check_m(m)?;
    if !(-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&s) {
        return Err(PmeError::domain(format!("s = {s} must lie in [0, 1]")));
    }
    let p = s * (m - 1.0) + 1.0;
    Ok(ExponentSet::new(
        p,
        (1.0 - s) / p,
        Some(2.0 * s / p),
        ExponentSource::Thm1Local,
    ))
}

/// Variant for data in `L¹ ∩ L^ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thm2Kind {
    /// Spatial regularity of `u^[μ]`; no time order is asserted (`κ_t = 0`).
    Power { mu: f64 },
    Mixed,
}

pub fn thm2_exponents(m: f64, rho: f64, p: f64, kind: Thm2Kind) -> Result<ExponentSet> {
    check_m(m)?;
    let set = match kind {
        Thm2Kind::Power { mu } => {
            let kx = (mu * p - 1.0) / p * 2.0 / (m - 2.0 + rho);
            ExponentSet::new(p, 0.0, Some(kx), ExponentSource::Thm2Power)
                .require(lt(1.0, rho), "rho must exceed 1")
                .require(le(1.0, mu) && le(mu, m), "mu must lie in [1, m]")
                .require(
                    lt(1.0, p) && lt(p, (m - 1.0 + rho) / mu),
                    "p must lie in (1, (m-1+rho)/mu)",
                )
        }
        Thm2Kind::Mixed => {
            let kt = (m - 1.0 + rho - p) / p / (m - 1.0);
            let kx = (p - rho) / p * 2.0 / (m - 1.0);
            ExponentSet::new(p, kt, Some(kx), ExponentSource::Thm2Mixed)
                .require(lt(1.0, rho), "rho must exceed 1")
                .require(
                    lt(rho, p) && lt(p, m - 1.0 + rho),
                    "p must lie in (rho, m-1+rho)",
                )
        }
    };
    Ok(set)
}

/// Local regularity of powers: returns `(σ_x supremum, largest time integrability) = (2μ/m, m/μ)`.
pub fn cor_power_local(m: f64, mu: f64) -> Result<(f64, f64)> {
    check_m(m)?;
    if !(le(1.0, mu) && le(mu, m)) {
        return Err(PmeError::domain(format!("mu = {mu} must lie in [1, m]")));
    }
    Ok((2.0 * mu / m, m / mu))
}

/// Velocity averaging constants.
///
/// With `time_only = false` the space-time constants are returned and `s`
/// must lie in `((μ−2+γ)/(m−1), 1] ∩ [0, 1]`. With `time_only = true` the
/// argument `s` is ignored. `ρ = 1` is accepted as the continuous limit of
/// the open range `ρ ∈ (0, 1)`.
pub fn averaging_constants(
    m: f64,
    gamma: f64,
    mu: f64,
    rho: f64,
    s: f64,
    time_only: bool,
) -> Result<ExponentSet> {
    check_m(m)?;
    if time_only {
        let base = 1.0 - gamma;
        let p = (base + rho) / (rho * mu + (1.0 - rho) * base);
        let kt = (mu - 1.0 + rho) / (base + rho);
        return Ok(ExponentSet::new(p, kt, None, ExponentSource::AvLemmaTime)
            .require(lt(gamma, 1.0), "gamma must be below 1")
            .require(le(1.0, mu) && lt(mu, 2.0 - gamma), "mu must lie in [1, 2-gamma)")
            .require(lt(0.0, rho) && le(rho, 1.0), "rho must lie in (0, 1]"));
    }
    let a = s * (m - 1.0) + 1.0 - gamma;
    let p = (a + rho) / (rho * mu + (1.0 - rho) * a);
    let kt = (1.0 - s) * (mu - 1.0 + rho) / (a + rho);
    let kx = 2.0 * s * (mu - 1.0 + rho) / (a + rho);
    let s_lo = ((mu - 2.0 + gamma) / (m - 1.0)).max(0.0);
    let s_ok = if (mu - 2.0 + gamma) / (m - 1.0) >= 0.0 {
        lt(s_lo, s)
    } else {
        le(0.0, s)
    };
    Ok(ExponentSet::new(p, kt, Some(kx), ExponentSource::AvLemma)
        .require(lt(gamma, m), "gamma must be below m")
        .require(le(1.0, mu) && lt(mu, m + 1.0 - gamma), "mu must lie in [1, m+1-gamma)")
        .require(lt(0.0, rho) && le(rho, 1.0), "rho must lie in (0, 1]")
        .require(s_ok && le(s, 1.0), "s must lie in ((mu-2+gamma)/(m-1), 1] and in [0, 1]"))
}

/// Averaging exponents with the integrability `p̃` prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrescribedExponents {
    pub s: f64,
    pub kappa_t: f64,
    pub kappa_x: f64,
}

/// Admissible interval `[lo, hi]` for the prescribed integrability.
pub fn prescribed_p_interval(m: f64, gamma: f64, mu: f64, rho: f64) -> (f64, f64) {
    let lo = (1.0 - gamma + rho) / (rho * mu + (1.0 - rho) * (1.0 - gamma));
    let hi = (m + 1.0 - gamma) / mu;
    (lo, hi)
}

/// Inverts the averaging `p` formula for `s` and evaluates the orders there.
pub fn prescribed_p_exponents(
    m: f64,
    gamma: f64,
    mu: f64,
    rho: f64,
    p_tilde: f64,
) -> Result<PrescribedExponents> {
    check_m(m)?;
    if !lt(gamma, m) {
        return Err(PmeError::domain("gamma must be below m"));
    }
    if !le(1.0, mu) {
        return Err(PmeError::domain("mu must be at least 1"));
    }
    let rho_lo = (m + 1.0 - gamma - mu) / (m + 1.0 - gamma);
    if !(lt(rho_lo, rho) && le(rho, 1.0)) {
        return Err(PmeError::domain(format!(
            "rho = {rho} must lie in ({rho_lo}, 1)"
        )));
    }
    let (lo, hi) = prescribed_p_interval(m, gamma, mu, rho);
    if !(le(lo, p_tilde) && lt(1.0, p_tilde) && le(p_tilde, hi)) {
        return Err(PmeError::domain(format!(
            "prescribed p = {p_tilde} outside the admissible interval [{lo}, {hi}] ∩ (1, {hi}]"
        )));
    }
    let denom = (m - 1.0) * (1.0 - p_tilde * (1.0 - rho));
    if denom <= 0.0 {
        return Err(PmeError::domain("(m-1)(1 - p(1-rho)) must be positive"));
    }
    let core = mu * p_tilde * rho + p_tilde * (1.0 - rho) * (1.0 - gamma) - 1.0 + gamma - rho;
    let s = core / denom;
    let kappa_t = (m + rho - gamma - mu * p_tilde * rho + p_tilde * (1.0 - rho) * (gamma - m))
        / (p_tilde * rho * (m - 1.0));
    let kappa_x = core / (p_tilde * rho) * 2.0 / (m - 1.0);
    Ok(PrescribedExponents {
        s,
        kappa_t,
        kappa_x,
    })
}

/// Constraint of the dimensional-analysis test that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingConstraint {
    /// `p ≤ m/(μ + (m−1)σ_t)`
    Integrability,
    /// `σ_t ≤ (m − μp)/(p(m−1))`
    TimeOrder,
    /// `σ_x = (μp−1)/p · 2/(m−1)`
    SpaceOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingVerdict {
    Admissible,
    Violated(ScalingConstraint),
}

/// Whether an estimate of `u^[μ]` in `W^{σ_t,p}(W^{σ_x,p})` by the L¹ data is
/// compatible with both rescalings of the equation.
pub fn scaling_admissible(
    m: f64,
    mu: f64,
    p: f64,
    sigma_t: f64,
    sigma_x: f64,
) -> Result<ScalingVerdict> {
    check_m(m)?;
    if !(le(1.0, mu) && le(mu, m)) {
        return Err(PmeError::domain("mu must lie in [1, m]"));
    }
    if !le(1.0, p) {
        return Err(PmeError::domain("p must be at least 1"));
    }
    if sigma_t < 0.0 || sigma_x < 0.0 {
        return Err(PmeError::domain("orders must be nonnegative"));
    }
    if !le(p, m / (mu + (m - 1.0) * sigma_t)) {
        return Ok(ScalingVerdict::Violated(ScalingConstraint::Integrability));
    }
    if !le(sigma_t, (m - mu * p) / (p * (m - 1.0))) {
        return Ok(ScalingVerdict::Violated(ScalingConstraint::TimeOrder));
    }
    let sx = (mu * p - 1.0) / p * 2.0 / (m - 1.0);
    if (sigma_x - sx).abs() > BOUNDARY_TOL {
        return Ok(ScalingVerdict::Violated(ScalingConstraint::SpaceOrder));
    }
    Ok(ScalingVerdict::Admissible)
}
