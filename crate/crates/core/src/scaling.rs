//! The two amplitude/dilation rescalings that map solutions of the porous
//! medium equation to solutions, and checks of how norms transform under them.
//!
//! Time kind: `ũ(t,x) = η u(γt, x)` with `γ = η^{m−1}`, source `η^m S(γt, x)`.
//! Space kind: `ũ(t,x) = η u(t, γx)` with `γ² = η^{1−m}`, source `η S(t, γx)`.

use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::{Grid, SpaceTimeField, TimeSampling};
use crate::norms::{spacetime_seminorm, Extension};
use crate::signed_pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingKind {
    Time,
    Space,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingTransform {
    pub kind: ScalingKind,
    pub eta: f64,
    /// Dilation factor tied to `eta` and `m`.
    pub gamma_scale: f64,
    pub m: f64,
}

impl ScalingTransform {
    pub fn new(kind: ScalingKind, m: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(PmeError::domain(format!("amplitude factor {eta} must be positive")));
        }
        if !(m >= 1.0) {
            return Err(PmeError::domain(format!("m = {m} must be at least 1")));
        }
        let gamma_scale = match kind {
            ScalingKind::Time => eta.powf(m - 1.0),
            ScalingKind::Space => eta.powf(0.5 * (1.0 - m)),
        };
        Ok(ScalingTransform {
            kind,
            eta,
            gamma_scale,
            m,
        })
    }

    /// Amplitude applied to the source term.
    pub fn source_amplitude(&self) -> f64 {
        match self.kind {
            ScalingKind::Time => self.eta.powf(self.m),
            ScalingKind::Space => self.eta,
        }
    }

    pub fn apply(&self, st: &SpaceTimeField) -> Result<SpaceTimeField> {
        match self.kind {
            ScalingKind::Time => resample_time(st, self.gamma_scale, self.eta),
            ScalingKind::Space => resample_space(st, self.gamma_scale, self.eta),
        }
    }

    pub fn apply_to_source(&self, source: &SpaceTimeField) -> Result<SpaceTimeField> {
        match self.kind {
            ScalingKind::Time => resample_time(source, self.gamma_scale, self.source_amplitude()),
            ScalingKind::Space => resample_space(source, self.gamma_scale, self.source_amplitude()),
        }
    }
}

/// `η u(γt, x)` on the original time step over the rescaled interval.
pub fn time_rescale(st: &SpaceTimeField, m: f64, eta: f64) -> Result<SpaceTimeField> {
    ScalingTransform::new(ScalingKind::Time, m, eta)?.apply(st)
}

/// `η u(t, γx)` on the original grid, by cubic interpolation.
pub fn space_rescale(st: &SpaceTimeField, m: f64, eta: f64) -> Result<SpaceTimeField> {
    ScalingTransform::new(ScalingKind::Space, m, eta)?.apply(st)
}

fn resample_time(st: &SpaceTimeField, gamma: f64, amp: f64) -> Result<SpaceTimeField> {
    let t0 = st.t_start / gamma;
    let span = st.duration() / gamma;
    let steps = (span / st.dt * (1.0 + 1e-12)).floor() as usize;
    let n_t = match st.sampling {
        TimeSampling::Nodal => steps + 1,
        TimeSampling::Midpoint => steps,
    };
    if n_t < 2 {
        return Err(PmeError::domain(format!(
            "the rescaled interval holds {n_t} samples at the original time step"
        )));
    }
    let cells = st.grid.cells();
    let last = st.n_t() - 1;
    // fractional sample index of a source time
    let offset = match st.sampling {
        TimeSampling::Nodal => 0.0,
        TimeSampling::Midpoint => 0.5,
    };
    let mut values = Vec::with_capacity(n_t * cells);
    for k in 0..n_t {
        let t = t0 + (k as f64 + offset) * st.dt;
        let s = ((gamma * t - st.t_start) / st.dt - offset).clamp(0.0, last as f64);
        let i0 = (s.floor() as usize).min(last.saturating_sub(1));
        let w = s - i0 as f64;
        let (a, b) = (st.slice(i0), st.slice((i0 + 1).min(last)));
        values.extend(a.iter().zip(b).map(|(x, y)| amp * ((1.0 - w) * x + w * y)));
    }
    SpaceTimeField::new(st.grid, t0, st.dt, st.sampling, values)
}

/// Four-point Lagrange weights at fractional position `t ∈ [0, 1)` between nodes 0 and 1.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Per output coordinate: the four source indices (or `None` outside the box) and weights.
fn stencil(grid: &Grid, gamma: f64) -> Vec<([Option<usize>; 4], [f64; 4])> {
    let n = grid.n();
    (0..n)
        .map(|i| {
            let y = gamma * grid.coord(i);
            let s = (y + 0.5 * grid.length()) / grid.h() - 0.5;
            let base = s.floor();
            let w = cubic_weights(s - base);
            let mut idx = [None; 4];
            for (k, slot) in idx.iter_mut().enumerate() {
                let j = base as i64 - 1 + k as i64;
                if (0..n as i64).contains(&j) {
                    *slot = Some(j as usize);
                }
            }
            (idx, w)
        })
        .collect()
}

/// Largest `|x|` (or `max(|x|, |y|)`) of a cell centre holding a non-negligible value.
fn support_extent(st: &SpaceTimeField) -> f64 {
    let g = st.grid;
    let cells = g.cells();
    let floor = 1e-12 * st.max_abs();
    let mut ext: f64 = 0.0;
    for (k, v) in st.values.iter().enumerate() {
        if v.abs() > floor {
            let p = g.point(k % cells);
            ext = ext.max(p[0].abs()).max(p[1].abs());
        }
    }
    ext
}

fn resample_space(st: &SpaceTimeField, gamma: f64, amp: f64) -> Result<SpaceTimeField> {
    let g = st.grid;
    let extent = support_extent(st);
    if extent / gamma > 0.5 * (g.length() - g.h()) * (1.0 + 1e-12) {
        return Err(PmeError::domain(format!(
            "rescaled support reaches |x| = {:.4}, beyond the box half-width {:.4}",
            extent / gamma,
            0.5 * g.length()
        )));
    }
    let sten = stencil(&g, gamma);
    let n = g.n();
    let cells = g.cells();
    let mut values = Vec::with_capacity(st.values.len());
    for t in 0..st.n_t() {
        let slice = st.slice(t);
        if g.dim() == 1 {
            for (idx, w) in &sten {
                let mut acc = 0.0;
                for k in 0..4 {
                    if let Some(j) = idx[k] {
                        acc += w[k] * slice[j];
                    }
                }
                values.push(amp * acc);
            }
        } else {
            let mut out = vec![0.0; cells];
            for (i, (ix, wx)) in sten.iter().enumerate() {
                for (j, (iy, wy)) in sten.iter().enumerate() {
                    let mut acc = 0.0;
                    for a in 0..4 {
                        let Some(ra) = ix[a] else { continue };
                        for b in 0..4 {
                            if let Some(cb) = iy[b] {
                                acc += wx[a] * wy[b] * slice[ra * n + cb];
                            }
                        }
                    }
                    out[i * n + j] = amp * acc;
                }
            }
            values.extend(out);
        }
    }
    SpaceTimeField::new(g, st.t_start, st.dt, st.sampling, values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub transform: ScalingTransform,
    pub mu: f64,
    pub p: f64,
    pub sigma_t: f64,
    pub sigma_x: f64,
    /// `‖ũ^[μ]‖^p / ‖u^[μ]‖^p` in `Ẇ^{σ_t,p}(Ẇ^{σ_x,p})`.
    pub measured: f64,
    /// `η^{μp} γ^{σ_t p − 1}` (time) or `η^{μp} γ^{σ_x p − d}` (space).
    pub predicted: f64,
    pub ratio: f64,
    pub pass: bool,
    /// Both norms vanish, so no ratio can be formed.
    pub inconclusive: bool,
}

/// Relative tolerance on `measured / predicted`.
pub const SCALING_TOLERANCE: f64 = 0.05;

/// Compares the homogeneous space-time seminorm of `u^[μ]` before and after a
/// rescaling with the exact transformation law.
#[allow(clippy::too_many_arguments)]
pub fn verify_norm_scaling(
    st: &SpaceTimeField,
    m: f64,
    mu: f64,
    p: f64,
    sigma_t: f64,
    sigma_x: f64,
    eta: f64,
    kind: ScalingKind,
    ext: Extension,
) -> Result<ScalingCheck> {
    let tr = ScalingTransform::new(kind, m, eta)?;
    let rescaled = tr.apply(st)?;
    let power = |f: &SpaceTimeField| -> Result<f64> {
        let fm = f.map(|v| signed_pow(v, mu));
        Ok(spacetime_seminorm(&fm, sigma_t, sigma_x, p, ext)?.value.powf(p))
    };
    let before = power(st)?;
    let after = power(&rescaled)?;
    let g = tr.gamma_scale;
    let predicted = eta.powf(mu * p)
        * match kind {
            ScalingKind::Time => g.powf(sigma_t * p - 1.0),
            ScalingKind::Space => g.powf(sigma_x * p - st.grid.dim() as f64),
        };
    let tiny = f64::MIN_POSITIVE * 1e10;
    let inconclusive = before <= tiny && after <= tiny;
    let measured = if before > 0.0 { after / before } else { f64::NAN };
    let ratio = measured / predicted;
    Ok(ScalingCheck {
        transform: tr,
        mu,
        p,
        sigma_t,
        sigma_x,
        measured,
        predicted,
        ratio,
        pass: !inconclusive && (ratio - 1.0).abs() <= SCALING_TOLERANCE,
        inconclusive,
    })
}

/// Relative tolerance on the L¹ transformation identities.
pub const L1_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Identity {
    /// `initial` for the first slice, `trajectory` for the space-time integral.
    pub quantity: String,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn l1_slice(st: &SpaceTimeField, n: usize) -> f64 {
    st.slice(n).iter().map(|v| v.abs()).sum::<f64>() * st.grid.cell_volume()
}

fn l1_total(st: &SpaceTimeField) -> f64 {
    st.time_weights()
        .iter()
        .enumerate()
        .map(|(n, w)| w * l1_slice(st, n))
        .sum()
}

/// `∫|u|` over `[t_start, t_start + span]`, with the slice masses linear in time
/// between nodes (nodal) or constant over each step (midpoint), as the time
/// weights assume.
fn l1_up_to(st: &SpaceTimeField, span: f64) -> f64 {
    let dt = st.dt;
    let masses: Vec<f64> = (0..st.n_t()).map(|n| l1_slice(st, n)).collect();
    let mut total = 0.0;
    match st.sampling {
        TimeSampling::Nodal => {
            for n in 0..st.n_t() - 1 {
                let len = (span - n as f64 * dt).clamp(0.0, dt);
                if len == 0.0 {
                    break;
                }
                let (a, b) = (masses[n], masses[n + 1]);
                // ∫_0^len a + (b − a) s/dt ds
                total += a * len + (b - a) * len * len / (2.0 * dt);
            }
        }
        TimeSampling::Midpoint => {
            for (n, mass) in masses.iter().enumerate() {
                total += mass * (span - n as f64 * dt).clamp(0.0, dt);
            }
        }
    }
    total
}

/// L¹ mass of the first slice and of the whole trajectory before and after a
/// rescaling, against the exact factors. Applied to a source the same factors
/// hold with `η` replaced by the source amplitude. The time kind resamples onto
/// whole steps, so the trajectory is compared over the stretch that was covered.
pub fn verify_l1_scaling(st: &SpaceTimeField, tr: &ScalingTransform, amplitude: f64) -> Result<Vec<L1Identity>> {
    let rescaled = match tr.kind {
        ScalingKind::Time => resample_time(st, tr.gamma_scale, amplitude)?,
        ScalingKind::Space => resample_space(st, tr.gamma_scale, amplitude)?,
    };
    let g = tr.gamma_scale;
    let (slice_factor, total_factor) = match tr.kind {
        ScalingKind::Time => (amplitude, amplitude / g),
        ScalingKind::Space => {
            let f = amplitude * g.powi(-(st.grid.dim() as i32));
            (f, f)
        }
    };
    let entry = |quantity: &str, before: f64, after: f64, predicted: f64| {
        let measured = after / before;
        let ratio = measured / predicted;
        L1Identity {
            quantity: quantity.to_string(),
            measured,
            predicted,
            ratio,
            pass: (ratio - 1.0).abs() <= L1_TOLERANCE,
        }
    };
    let first = l1_slice(st, 0);
    let total = match tr.kind {
        ScalingKind::Time => l1_up_to(st, g * rescaled.duration()),
        ScalingKind::Space => l1_total(st),
    };
    if !(first > 0.0 && total > 0.0) {
        return Err(PmeError::domain("L¹ identities need a nonzero trajectory"));
    }
    Ok(vec![
        entry("initial", first, l1_slice(&rescaled, 0), slice_factor),
        entry("trajectory", total, l1_total(&rescaled), total_factor),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barenblatt::{barenblatt_params, barenblatt_trajectory};

    fn smooth() -> SpaceTimeField {
        let g = Grid::line(6.0, 96).unwrap();
        SpaceTimeField::from_fn(g, 1.0, 0.01, 101, TimeSampling::Nodal, |t, x, _| {
            (1.0 + 0.3 * t) * (-(x * x)).exp()
        })
        .unwrap()
    }

    #[test]
    fn coupling() {
        let t = ScalingTransform::new(ScalingKind::Time, 3.0, 2.0).unwrap();
        assert_eq!(t.gamma_scale, 4.0);
        let s = ScalingTransform::new(ScalingKind::Space, 3.0, 0.25).unwrap();
        assert!((s.gamma_scale * s.gamma_scale - 0.25f64.powf(-2.0)).abs() < 1e-12);
        assert!(ScalingTransform::new(ScalingKind::Time, 2.0, 0.0).is_err());
    }

    #[test]
    fn unit_factor_is_identity() {
        let st = smooth();
        let tr = time_rescale(&st, 2.0, 1.0).unwrap();
        assert_eq!(tr.n_t(), st.n_t());
        let err = tr.values.iter().zip(&st.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14);
        let sp = space_rescale(&st, 2.0, 1.0).unwrap();
        let err = sp.values.iter().zip(&st.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn constants_scale_by_eta() {
        let g = Grid::line(1.0, 8).unwrap();
        let st = SpaceTimeField::from_fn(g, 0.0, 0.1, 11, TimeSampling::Nodal, |_, _, _| 1.5).unwrap();
        let r = time_rescale(&st, 3.0, 0.8).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.2).abs() < 1e-14));
    }

    #[test]
    fn time_group_property() {
        let st = smooth();
        let a = time_rescale(&time_rescale(&st, 2.0, 1.5).unwrap(), 2.0, 1.2).unwrap();
        let b = time_rescale(&st, 2.0, 1.8).unwrap();
        let n = a.n_t().min(b.n_t());
        let scale = b.max_abs();
        for k in 0..n {
            for (x, y) in a.slice(k).iter().zip(b.slice(k)) {
                assert!((x - y).abs() <= 1e-3 * scale);
            }
        }
    }

    #[test]
    fn barenblatt_self_similarity() {
        // time by γ_t = η_t^{m−1}, then space by γ_s with η_s^{1−m} = γ_s², chosen so the
        // pair is λ^α u(λt, λ^β x)
        let m = 2.0;
        let pr = barenblatt_params(m, 1, 0.5).unwrap();
        let g = Grid::line(8.0, 512).unwrap();
        let lambda: f64 = 1.5;
        let st = barenblatt_trajectory(&pr, &g, 1.0, 0.01, 151, TimeSampling::Nodal, 1.0).unwrap();
        let eta_t = lambda.powf(1.0 / (m - 1.0));
        let eta_s = lambda.powf(pr.alpha) / eta_t;
        let tr = time_rescale(&st, m, eta_t).unwrap();
        let sp = space_rescale(&tr, m, eta_s).unwrap();
        let gs = ScalingTransform::new(ScalingKind::Space, m, eta_s).unwrap().gamma_scale;
        assert!((gs - lambda.powf(pr.beta)).abs() < 1e-12);
        let scale = st.max_abs();
        for k in 0..sp.n_t() {
            let t = sp.time(k);
            let exact: Vec<f64> = (0..g.n()).map(|i| pr.value_r2(t, g.coord(i).powi(2), 1.0)).collect();
            let err = sp.slice(k).iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 5e-3 * scale, "t = {t}: {err}");
        }
    }

    #[test]
    fn support_overflow() {
        let st = smooth();
        assert!(space_rescale(&st, 2.0, 4.0).is_err());
    }

    #[test]
    fn unit_factor_ratio_is_one() {
        let st = smooth();
        for kind in [ScalingKind::Time, ScalingKind::Space] {
            let c = verify_norm_scaling(&st, 2.0, 1.0, 2.0, 0.2, 0.4, 1.0, kind, Extension::Zero).unwrap();
            assert!((c.ratio - 1.0).abs() < 1e-12 && c.pass);
        }
    }

    #[test]
    fn zero_field_is_inconclusive() {
        let g = Grid::line(1.0, 16).unwrap();
        let st = SpaceTimeField::from_fn(g, 0.5, 0.05, 20, TimeSampling::Nodal, |_, _, _| 0.0).unwrap();
        let c = verify_norm_scaling(&st, 2.0, 1.0, 2.0, 0.2, 0.4, 1.5, ScalingKind::Time, Extension::Zero).unwrap();
        assert!(c.inconclusive && !c.pass);
    }

    #[test]
    fn l1_identities_on_barenblatt() {
        let params = barenblatt_params(2.0, 1, 0.25).unwrap();
        let g = Grid::line(8.0, 256).unwrap();
        let st = barenblatt_trajectory(&params, &g, 1.0, 0.02, 51, TimeSampling::Nodal, 1.0).unwrap();
        for (kind, eta) in [(ScalingKind::Time, 2.0), (ScalingKind::Space, 0.5), (ScalingKind::Space, 1.5)] {
            let tr = ScalingTransform::new(kind, 2.0, eta).unwrap();
            for id in verify_l1_scaling(&st, &tr, eta).unwrap() {
                assert!(id.pass, "{kind:?} {eta}: {id:?}");
            }
            let src = verify_l1_scaling(&st, &tr, tr.source_amplitude()).unwrap();
            assert!(src.iter().all(|i| i.pass), "{src:?}");
        }
    }
}
