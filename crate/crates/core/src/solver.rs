//! Backward Euler with centred differences for `∂t u − Δ(u^[m]) = S` on a periodic grid.
//!
//! Each step solves `u − dt Δ_h(u^[m]) = u_n + dt S_n` by damped Newton
//! iteration. The initial guess `u_n + dt S_n` already carries the exact
//! discrete mass and every Newton correction has zero sum, so the cell sum is
//! conserved up to round-off regardless of how many iterations are taken.

use serde::Serialize;

use crate::barenblatt::{barenblatt_params, barenblatt_support_radius};
use crate::error::{PmeError, Result};
use crate::grid::{Field, Grid, SpaceTimeField, TimeSampling};
use crate::signed_pow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub dt: f64,
    /// Tolerance on the sup norm of the nonlinear residual, relative to `max(1, |rhs|_∞)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Shift in the Jacobian entry `m(|u| + eps)^{m−1}`.
    pub eps: f64,
}

impl SolverOptions {
    pub fn with_dt(dt: f64) -> Self {
        SolverOptions {
            dt,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(PmeError::domain("dt must be positive"));
        }
        if !(self.eps >= 0.0) {
            return Err(PmeError::domain("eps must be nonnegative"));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(PmeError::domain("Newton tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dt: 1e-3,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            eps: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Field,
    pub iterations: usize,
    pub residual: f64,
}

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m > 1.0 {
        Ok(())
    } else {
        Err(PmeError::domain("nonlinearity must exceed 1"))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Residual `w − dt Δ_h(w^[m]) − rhs`.
fn nonlinear_residual(grid: &Grid, w: &[f64], rhs: &[f64], m: f64, dt: f64, out: &mut [f64]) {
    let flux: Vec<f64> = w.iter().map(|&v| signed_pow(v, m)).collect();
    let lap = Field::laplacian_of(grid, &flux);
    for i in 0..w.len() {
        out[i] = w[i] - dt * lap[i] - rhs[i];
    }
}

/// One implicit step from `u_n` with source `s_n` (zero when `None`).
pub fn step(u_n: &Field, s_n: Option<&Field>, m: f64, opts: &SolverOptions) -> Result<StepOutcome> {
    check_m(m)?;
    opts.validate()?;
    let grid = u_n.grid;
    let dt = opts.dt;
    let mut rhs = u_n.values.clone();
    if let Some(s) = s_n {
        grid.ensure_same(&s.grid)?;
        for (r, sv) in rhs.iter_mut().zip(&s.values) {
            *r += dt * sv;
        }
    }
    let scale = sup(&rhs).max(1.0);
    let tol = opts.newton_tol * scale;

    let mut w = rhs.clone();
    let mut res = vec![0.0; w.len()];
    nonlinear_residual(&grid, &w, &rhs, m, dt, &mut res);
    let mut r_norm = sup(&res);
    let mut trial = vec![0.0; w.len()];
    let mut trial_res = vec![0.0; w.len()];

    for iter in 0..opts.newton_max_iter {
        if r_norm <= tol {
            return Ok(StepOutcome {
                u: Field { grid, values: w },
                iterations: iter,
                residual: r_norm,
            });
        }
        let diag: Vec<f64> = w
            .iter()
            .map(|&v| m * (v.abs() + opts.eps).powf(m - 1.0))
            .collect();
        let rhs_lin: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = solve_jacobian(&grid, &diag, dt, &rhs_lin)?;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..w.len() {
                trial[i] = w[i] + lambda * delta[i];
            }
            nonlinear_residual(&grid, &trial, &rhs, m, dt, &mut trial_res);
            let t_norm = sup(&trial_res);
            if t_norm.is_finite() && (t_norm < r_norm || t_norm <= tol) {
                std::mem::swap(&mut w, &mut trial);
                std::mem::swap(&mut res, &mut trial_res);
                r_norm = t_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(PmeError::NewtonDiverged {
                iterations: iter + 1,
                residual: r_norm,
            });
        }
    }
    if r_norm <= tol {
        return Ok(StepOutcome {
            u: Field { grid, values: w },
            iterations: opts.newton_max_iter,
            residual: r_norm,
        });
    }
    Err(PmeError::NewtonDiverged {
        iterations: opts.newton_max_iter,
        residual: r_norm,
    })
}

/// Solves `(I − dt Δ_h diag(d)) x = b`.
fn solve_jacobian(grid: &Grid, d: &[f64], dt: f64, b: &[f64]) -> Result<Vec<f64>> {
    let c = dt / (grid.h() * grid.h());
    if grid.dim() == 1 {
        let n = d.len();
        let lower: Vec<f64> = (0..n).map(|i| -c * d[(i + n - 1) % n]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * c * d[i]).collect();
        let upper: Vec<f64> = (0..n).map(|i| -c * d[(i + 1) % n]).collect();
        cyclic_tridiagonal(&lower, &diag, &upper, b)
    } else {
        jacobian_pcg(grid, d, c, b)
    }
}

/// Thomas algorithm; `lower[0]` and `upper[n−1]` are ignored.
fn tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(PmeError::LinearSolve("zero pivot".into()));
    }
    cp[0] = upper[0] / piv;
    x[0] = b[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * cp[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(PmeError::LinearSolve("zero pivot".into()));
        }
        cp[i] = upper[i] / piv;
        x[i] = (b[i] - lower[i] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Periodic tridiagonal system via Sherman–Morrison. Row `i` reads
/// `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = b[i]` with indices mod n.
pub(crate) fn cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    b: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let top_right = lower[0];
    let bottom_left = upper[n - 1];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= bottom_left * top_right / gamma;
    let x = tridiagonal(lower, &bb, upper, b)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = bottom_left;
    let z = tridiagonal(lower, &bb, upper, &u)?;
    let fact = (x[0] + top_right * x[n - 1] / gamma) / (1.0 + z[0] + top_right * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

/// 2-d Jacobian solve through the symmetric form `(D⁻¹ − cΔ) y = b`, `x = D⁻¹ y`,
/// using Jacobi-preconditioned conjugate gradients.
fn jacobian_pcg(grid: &Grid, d: &[f64], c: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let inv_d: Vec<f64> = d.iter().map(|&v| 1.0 / v.max(1e-300)).collect();
    let apply = |y: &[f64]| -> Vec<f64> {
        let lap = Field::laplacian_of(grid, y);
        (0..y.len())
            .map(|i| inv_d[i] * y[i] - c * h2 * lap[i])
            .collect()
    };
    let precond: Vec<f64> = inv_d.iter().map(|v| 1.0 / (v + 4.0 * c)).collect();
    let mut y = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(y);
    }
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, p)| a * p).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 20 * n * n;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(PmeError::LinearSolve("matrix not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..y.len() {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= 1e-14 * b_norm {
            return Ok(y.iter().zip(&inv_d).map(|(a, b)| a * b).collect());
        }
        for i in 0..z.len() {
            z[i] = r[i] * precond[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(PmeError::LinearSolve("conjugate gradients did not converge".into()))
}

/// A computed trajectory together with the source that drove it.
#[derive(Debug, Clone)]
pub struct Run {
    pub u: SpaceTimeField,
    /// Source at every time node (the last slice is never used by the scheme).
    pub source: Option<SpaceTimeField>,
    pub m: f64,
    pub newton_iterations: Vec<usize>,
    /// Largest per-step relative defect of the discrete mass balance.
    pub max_mass_defect: f64,
    pub min_value: f64,
    pub warnings: Vec<String>,
}

impl Run {
    /// Source slice `n`, zero when no source was given.
    pub fn source_slice(&self, n: usize) -> Option<&[f64]> {
        self.source.as_ref().map(|s| s.slice(n))
    }
}

/// Integrates from `u0` at time `t0` over `[t0, t0 + T]`.
///
/// The step count is `round(T/dt)` and the step is adjusted to land on `T`.
/// A sampled source must use nodal sampling on the same grid with at least
/// as many slices as steps.
pub fn solve(
    u0: &Field,
    t0: f64,
    source: Option<&SpaceTimeField>,
    t_final: f64,
    m: f64,
    opts: &SolverOptions,
) -> Result<Run> {
    check_m(m)?;
    opts.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(PmeError::domain("final time must be positive"));
    }
    let steps = ((t_final / opts.dt).round() as usize).max(1);
    let dt = t_final / steps as f64;
    let opts = SolverOptions { dt, ..*opts };
    let grid = u0.grid;

    let source = match source {
        None => None,
        Some(s) => {
            grid.ensure_same(&s.grid)?;
            if s.sampling != TimeSampling::Nodal || s.n_t() < steps {
                return Err(PmeError::mismatch(format!(
                    "source needs at least {steps} nodal slices, got {}",
                    s.n_t()
                )));
            }
            if (s.dt - dt).abs() > 1e-9 * dt {
                return Err(PmeError::mismatch("source time step differs from the solver step"));
            }
            let mut values = s.values[..steps * grid.cells()].to_vec();
            values.extend_from_slice(s.slice(steps - 1));
            Some(SpaceTimeField::new(grid, t0, dt, TimeSampling::Nodal, values)?)
        }
    };

    let mut warnings = Vec::new();
    if let Some(w) = support_warning(u0, source.as_ref(), m, t_final)? {
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut values = Vec::with_capacity((steps + 1) * grid.cells());
    values.extend_from_slice(&u0.values);
    let mut current = u0.clone();
    let mut iterations = Vec::with_capacity(steps);
    let mut max_defect: f64 = 0.0;
    let mut min_value = current.values.iter().cloned().fold(f64::INFINITY, f64::min);
    for n in 0..steps {
        let s_n = source.as_ref().map(|s| s.field(n));
        let out = step(&current, s_n.as_ref(), m, &opts)?;
        let before: f64 = current.values.iter().sum();
        let after: f64 = out.u.values.iter().sum();
        let (added, scale_s) = match &s_n {
            Some(s) => (
                dt * s.values.iter().sum::<f64>(),
                dt * s.values.iter().map(|v| v.abs()).sum::<f64>(),
            ),
            None => (0.0, 0.0),
        };
        let scale = current.values.iter().map(|v| v.abs()).sum::<f64>() + scale_s;
        if scale > 0.0 {
            max_defect = max_defect.max((after - before - added).abs() / scale);
        }
        min_value = out.u.values.iter().cloned().fold(min_value, f64::min);
        iterations.push(out.iterations);
        values.extend_from_slice(&out.u.values);
        current = out.u;
    }
    Ok(Run {
        u: SpaceTimeField::new(grid, t0, dt, TimeSampling::Nodal, values)?,
        source,
        m,
        newton_iterations: iterations,
        max_mass_defect: max_defect,
        min_value,
        warnings,
    })
}

/// Heuristic spreading check: initial support extent plus the radius a
/// source-type solution of the same total mass reaches by `t_final`.
fn support_warning(
    u0: &Field,
    source: Option<&SpaceTimeField>,
    m: f64,
    t_final: f64,
) -> Result<Option<String>> {
    let grid = u0.grid;
    let mut mass = u0.l1();
    let mut extent: f64 = 0.0;
    let mut track = |vals: &[f64]| {
        for (i, v) in vals.iter().enumerate() {
            if *v != 0.0 {
                let [x, y] = grid.point(i);
                extent = extent.max(x.abs().max(y.abs()));
            }
        }
    };
    track(&u0.values);
    if let Some(s) = source {
        let w = s.time_weights();
        for n in 0..s.n_t() {
            let sl = s.slice(n);
            mass += w[n] * sl.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
            track(sl);
        }
    }
    if mass == 0.0 {
        return Ok(None);
    }
    let profile = barenblatt_params(m, grid.dim(), 1.0)?.with_mass(mass)?;
    let reach = extent + barenblatt_support_radius(&profile, t_final)?;
    if reach >= 0.5 * grid.length() {
        Ok(Some(format!(
            "support may reach the periodic boundary: estimated extent {reach:.3} vs half-box {:.3}",
            0.5 * grid.length()
        )))
    } else {
        Ok(None)
    }
}

/// Sup-in-time weak residual against a fixed family of smooth test functions
/// `ψ(t) e(x)`: bumps `ψ` compactly supported inside the time interval and
/// low Fourier modes `e` of the periodic box.
pub fn residual(field: &SpaceTimeField, m: f64, source: Option<&SpaceTimeField>) -> Result<f64> {
    check_m(m)?;
    if field.n_t() < 3 {
        return Err(PmeError::domain("residual needs at least three time slices"));
    }
    if let Some(s) = source {
        field.ensure_same_layout(s)?;
    }
    let grid = field.grid;
    let (ta, tb) = (field.t_start, field.t_start + field.duration());
    let mid = 0.5 * (ta + tb);
    let windows = [(ta, tb), (ta, mid), (mid, tb)];
    let modes = spatial_modes(&grid, 3);
    let weights = field.time_weights();
    let vol = grid.cell_volume();

    let powered: Vec<f64> = field.values.iter().map(|&v| signed_pow(v, m)).collect();
    let cells = grid.cells();
    let mut worst: f64 = 0.0;
    for (phi, lap_factor) in &modes {
        // spatial projections per slice
        let mut pu = vec![0.0; field.n_t()];
        let mut pf = vec![0.0; field.n_t()];
        let mut ps = vec![0.0; field.n_t()];
        for n in 0..field.n_t() {
            let u = field.slice(n);
            let f = &powered[n * cells..(n + 1) * cells];
            let mut a = 0.0;
            let mut b = 0.0;
            let mut c = 0.0;
            for i in 0..cells {
                a += u[i] * phi[i];
                b += f[i] * phi[i];
            }
            if let Some(s) = source {
                for (sv, ph) in s.slice(n).iter().zip(phi) {
                    c += sv * ph;
                }
            }
            pu[n] = a * vol;
            pf[n] = b * vol;
            ps[n] = c * vol;
        }
        for &(t_lo, t_hi) in &windows {
            let psi: Vec<f64> = (0..field.n_t())
                .map(|n| time_bump(field.time(n), t_lo, t_hi))
                .collect();
            let mut total = 0.0;
            // −∫u ∂tψ in summation-by-parts form, exact on constants
            match field.sampling {
                TimeSampling::Nodal => {
                    for n in 0..field.n_t() - 1 {
                        total -= 0.5 * (pu[n] + pu[n + 1]) * (psi[n + 1] - psi[n]);
                    }
                }
                TimeSampling::Midpoint => {
                    for n in 0..field.n_t() {
                        let t = field.time(n);
                        let up = time_bump(t + 0.5 * field.dt, t_lo, t_hi);
                        let down = time_bump(t - 0.5 * field.dt, t_lo, t_hi);
                        total -= pu[n] * (up - down);
                    }
                }
            }
            for n in 0..field.n_t() {
                total += weights[n] * (lap_factor * pf[n] - ps[n]) * psi[n];
            }
            worst = worst.max(total.abs());
        }
    }
    Ok(worst)
}

/// Smooth bump on `(a, b)` with peak 1.
fn time_bump(t: f64, a: f64, b: f64) -> f64 {
    let s = (t - a) / (b - a);
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    (4.0 - 1.0 / (s * (1.0 - s))).exp()
}

/// Trigonometric test modes and their Laplacian eigenvalue magnitudes
/// (`Δe = −λ e`, stored as `λ`).
fn spatial_modes(grid: &Grid, kmax: usize) -> Vec<(Vec<f64>, f64)> {
    let two_pi_l = 2.0 * std::f64::consts::PI / grid.length();
    let mut one_d: Vec<(Box<dyn Fn(f64) -> f64>, f64)> = vec![(Box::new(|_| 1.0), 0.0)];
    for k in 1..=kmax {
        let w = two_pi_l * k as f64;
        one_d.push((Box::new(move |x: f64| (w * x).cos()), w * w));
        one_d.push((Box::new(move |x: f64| (w * x).sin()), w * w));
    }
    let mut out = Vec::new();
    if grid.dim() == 1 {
        for (f, lam) in &one_d {
            out.push(((0..grid.cells()).map(|i| f(grid.coord(i))).collect(), *lam));
        }
    } else {
        for (fx, lx) in &one_d[..3] {
            for (fy, ly) in &one_d[..3] {
                let vals = (0..grid.cells())
                    .map(|i| {
                        let [x, y] = grid.point(i);
                        fx(x) * fy(y)
                    })
                    .collect();
                out.push((vals, lx + ly));
            }
        }
    }
    out
}

/// Outcome of the discrete L¹ contraction test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    /// `max_n ‖u¹_n − u²_n‖_{L¹}`
    pub lhs: f64,
    /// `‖u¹_0 − u²_0‖_{L¹} + Σ_n dt ‖S¹_n − S²_n‖_{L¹}`
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_contraction(run1: &Run, run2: &Run) -> Result<ContractionReport> {
    run1.u.ensure_same_layout(&run2.u)?;
    if run1.m != run2.m {
        return Err(PmeError::mismatch("runs use different nonlinearities"));
    }
    let grid = run1.u.grid;
    let vol = grid.cell_volume();
    let l1_diff = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * vol
    };
    let n_t = run1.u.n_t();
    let lhs = (0..n_t)
        .map(|n| l1_diff(run1.u.slice(n), run2.u.slice(n)))
        .fold(0.0, f64::max);
    let mut rhs = l1_diff(run1.u.slice(0), run2.u.slice(0));
    let zero = vec![0.0; grid.cells()];
    for n in 0..n_t - 1 {
        let a = run1.source_slice(n).unwrap_or(&zero);
        let b = run2.source_slice(n).unwrap_or(&zero);
        rhs += run1.u.dt * l1_diff(a, b);
    }
    let holds = lhs <= rhs + 1e-8 * (rhs + 1.0);
    Ok(ContractionReport { lhs, rhs, holds })
}
