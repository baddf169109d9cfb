//! Kinetic formulation: the sign function `f(t,x,v)` of a trajectory and the
//! defect measure `q` that closes the kinetic equation.
//!
//! `q` is obtained by integrating the kinetic equation in `v` from the far end,
//! which turns it into entropy residuals of the trajectory itself. For `v ≥ 0`
//!
//! `q = −∂_t (u − v)_+ + Δ (u^[m] − v^[m])_+ + S·1{u > v}`
//!
//! and for `v < 0`
//!
//! `q = −∂_t (v − u)_+ + Δ (v^[m] − u^[m])_+ − S·1{u < v}`.
//!
//! With the backward Euler time difference, the Laplacian and the indicator at
//! the new level and the source at the old one, these residuals are the
//! discrete entropy defects of the implicit scheme and are nonnegative up to
//! the Newton tolerance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::{Field, Grid, SpaceTimeField};
use crate::signed_pow;

const MIN_BINS: usize = 64;

/// Uniform velocity bins over `[−V, V]`; `v = 0` is always a bin edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityGrid {
    pub v_max: f64,
    pub n_v: usize,
}

impl VelocityGrid {
    pub fn new(v_max: f64, n_v: usize) -> Result<Self> {
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(PmeError::domain("velocity range must be positive"));
        }
        if n_v < 2 || n_v % 2 != 0 {
            return Err(PmeError::domain("the number of velocity bins must be even"));
        }
        Ok(VelocityGrid { v_max, n_v })
    }

    /// Bins covering `1.1·max|u| + Δv` with at least 64 bins.
    pub fn for_field(st: &SpaceTimeField, n_v: usize) -> Result<Self> {
        let n_v = n_v.max(MIN_BINS);
        let n_v = n_v + n_v % 2;
        let top = st.max_abs();
        let top = if top > 0.0 { top } else { 1.0 };
        // V = 1.1 top + 2V/n_v
        VelocityGrid::new(1.1 * top / (1.0 - 2.0 / n_v as f64), n_v)
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5 - (self.n_v / 2) as f64) * self.dv()
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        // measured from the middle so the edge at zero is exact
        let a = (k as f64 - (self.n_v / 2) as f64) * self.dv();
        (a, a + self.dv())
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_v).map(|k| self.center(k)).collect()
    }
}

/// `f = 1{v < u} − 1{v < 0}` at bin centres, stored `[time][cell][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField {
    pub velocities: VelocityGrid,
    pub grid: Grid,
    pub n_t: usize,
    pub values: Vec<i8>,
}

impl KineticField {
    pub fn get(&self, n: usize, i: usize, k: usize) -> i8 {
        self.values[(n * self.grid.cells() + i) * self.velocities.n_v + k]
    }

    /// `Σ_k f Δv` at one space-time point.
    pub fn marginal(&self, n: usize, i: usize) -> f64 {
        let dv = self.velocities.dv();
        (0..self.velocities.n_v).map(|k| self.get(n, i, k) as f64 * dv).sum()
    }
}

pub fn kinetic_sign(u: f64, v: f64) -> i8 {
    if 0.0 <= v && v < u {
        1
    } else if u <= v && v < 0.0 {
        -1
    } else {
        0
    }
}

pub fn kinetic_function(st: &SpaceTimeField, velocities: &VelocityGrid) -> Result<KineticField> {
    if st.max_abs() > velocities.v_max {
        return Err(PmeError::domain(format!(
            "velocity range {} does not cover max|u| = {}",
            velocities.v_max,
            st.max_abs()
        )));
    }
    let centers = velocities.centers();
    let values = st
        .values
        .iter()
        .flat_map(|&u| centers.iter().map(move |&v| kinetic_sign(u, v)))
        .collect();
    Ok(KineticField {
        velocities: *velocities,
        grid: st.grid,
        n_t: st.n_t(),
        values,
    })
}

/// Sampled defect measure on the time intervals of a trajectory, stored
/// `[interval][bin][cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticMeasure {
    pub velocities: VelocityGrid,
    pub grid: Grid,
    pub dt: f64,
    pub intervals: usize,
    pub values: Vec<f64>,
    /// `Σ q⁺ Δt h^d Δv`
    pub positive_mass: f64,
    /// `Σ q⁻ Δt h^d Δv`, the part removed by clipping.
    pub negative_mass: f64,
    /// `Σ_{t,x} q Δt h^d Δv` per bin.
    pub bin_mass: Vec<f64>,
    /// `∫|u₀|`
    pub initial_l1: f64,
    /// `Σ Δt ∫|S|` over the intervals used.
    pub source_l1: f64,
}

impl KineticMeasure {
    fn slab(&self, n: usize, k: usize) -> &[f64] {
        let c = self.grid.cells();
        let start = (n * self.velocities.n_v + k) * c;
        &self.values[start..start + c]
    }

    /// Share of the defect removed by clipping.
    pub fn clipped_fraction(&self) -> f64 {
        let total = self.positive_mass + self.negative_mass;
        if total > 0.0 {
            self.negative_mass / total
        } else {
            0.0
        }
    }

    /// `Σ q Δt h^d Δv` without clipping.
    pub fn total_mass(&self) -> f64 {
        self.positive_mass - self.negative_mass
    }

    /// `Σ_{t,x} q⁺ Δt h^d` in bin `k`.
    fn clipped_level(&self, k: usize) -> f64 {
        let w = self.dt * self.grid.cell_volume();
        (0..self.intervals)
            .map(|n| self.slab(n, k).iter().map(|q| q.max(0.0)).sum::<f64>() * w)
            .sum()
    }
}

/// Entropy defect of a nodal trajectory with an optional nodal source (only
/// slices `0..n_t−1` of the source are used).
pub fn defect_measure(
    st: &SpaceTimeField,
    m: f64,
    source: Option<&SpaceTimeField>,
    velocities: &VelocityGrid,
) -> Result<KineticMeasure> {
    let n_t = st.n_t();
    if n_t < 3 {
        return Err(PmeError::domain("the defect measure needs at least three time slices"));
    }
    if !(m >= 1.0) {
        return Err(PmeError::domain(format!("m = {m} must be at least 1")));
    }
    if let Some(s) = source {
        st.grid.ensure_same(&s.grid)?;
        if s.n_t() < n_t - 1 {
            return Err(PmeError::mismatch("source has fewer slices than the trajectory has steps"));
        }
    }
    let grid = st.grid;
    let cells = grid.cells();
    let n_v = velocities.n_v;
    let dt = st.dt;
    let centers = velocities.centers();
    let powers: Vec<f64> = st.values.iter().map(|&u| signed_pow(u, m)).collect();

    let values: Vec<f64> = (0..n_t - 1)
        .into_par_iter()
        .flat_map_iter(|n| {
            let old = st.slice(n);
            let new = st.slice(n + 1);
            let flux_new = &powers[(n + 1) * cells..(n + 2) * cells];
            let s_old = source.map(|s| s.slice(n));
            let mut out = Vec::with_capacity(n_v * cells);
            let mut pot = vec![0.0; cells];
            for &v in &centers {
                let vm = signed_pow(v, m);
                let upper = v >= 0.0;
                for i in 0..cells {
                    pot[i] = if upper {
                        (flux_new[i] - vm).max(0.0)
                    } else {
                        (vm - flux_new[i]).max(0.0)
                    };
                }
                let lap = Field::laplacian_of(&grid, &pot);
                for i in 0..cells {
                    let (e_old, e_new, active) = if upper {
                        ((old[i] - v).max(0.0), (new[i] - v).max(0.0), new[i] > v)
                    } else {
                        ((v - old[i]).max(0.0), (v - new[i]).max(0.0), new[i] < v)
                    };
                    let mut q = -(e_new - e_old) / dt + lap[i];
                    if let (Some(s), true) = (s_old, active) {
                        q += if upper { s[i] } else { -s[i] };
                    }
                    out.push(q);
                }
            }
            out
        })
        .collect();

    let w = dt * grid.cell_volume() * velocities.dv();
    let mut positive = 0.0;
    let mut negative = 0.0;
    let mut bin_mass = vec![0.0; n_v];
    for (chunk_idx, chunk) in values.chunks(cells).enumerate() {
        let k = chunk_idx % n_v;
        for q in chunk {
            if *q >= 0.0 {
                positive += q * w;
            } else {
                negative -= q * w;
            }
            bin_mass[k] += q * w;
        }
    }
    let initial_l1 = st.field(0).l1();
    let source_l1 = source.map_or(0.0, |s| {
        (0..n_t - 1).map(|n| dt * s.field(n).l1()).sum()
    });
    Ok(KineticMeasure {
        velocities: *velocities,
        grid,
        dt,
        intervals: n_t - 1,
        values,
        positive_mass: positive,
        negative_mass: negative,
        bin_mass,
        initial_l1,
        source_l1,
    })
}

/// Average of `|v|^{−γ}` over the bin `[a, b]`.
fn bin_weight(a: f64, b: f64, gamma: f64) -> f64 {
    let e = 1.0 - gamma;
    // antiderivative sgn(v)|v|^{1−γ}/(1−γ)
    let prim = |v: f64| v.signum() * v.abs().powf(e) / e;
    (prim(b) - prim(a)) / (b - a)
}

/// `(1 − γ) ∫∫∫ |v|^{−γ} q⁺` with the exact bin averages of `|v|^{−γ}`.
pub fn singular_moment(qm: &KineticMeasure, gamma: f64) -> Result<f64> {
    if !(gamma < 1.0) {
        return Err(PmeError::domain(format!("moment exponent {gamma} must be below 1")));
    }
    let dv = qm.velocities.dv();
    let total: f64 = (0..qm.velocities.n_v)
        .map(|k| {
            let (a, b) = qm.velocities.edges(k);
            bin_weight(a, b, gamma) * qm.clipped_level(k) * dv
        })
        .sum();
    Ok((1.0 - gamma) * total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMass {
    pub v0: f64,
    /// `∫∫ q⁺(t, x, v₀) dx dt`, linear in `v` between bin centres.
    pub value: f64,
    /// `∫|u₀| + ∫∫|S|`
    pub bound: f64,
    /// Allowance for discretisation: `1e−6` plus the clipped mass per unit velocity.
    pub slack: f64,
    pub holds: bool,
}

pub fn level_mass(qm: &KineticMeasure, v0: f64) -> Result<LevelMass> {
    let vg = qm.velocities;
    if !(v0.abs() <= vg.v_max) {
        return Err(PmeError::domain(format!("level {v0} lies outside the velocity grid")));
    }
    let pos = ((v0 + vg.v_max) / vg.dv() - 0.5).clamp(0.0, (vg.n_v - 1) as f64);
    let k0 = pos.floor() as usize;
    let k1 = (k0 + 1).min(vg.n_v - 1);
    let frac = pos - k0 as f64;
    let value = (1.0 - frac) * qm.clipped_level(k0) + frac * qm.clipped_level(k1);
    let bound = qm.initial_l1 + qm.source_l1;
    let slack = 1e-6 + qm.negative_mass / vg.dv();
    Ok(LevelMass {
        v0,
        value,
        bound,
        slack,
        holds: value <= bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeSampling;
    use crate::solver::{solve, SolverOptions};

    fn constant(c: f64) -> SpaceTimeField {
        let g = Grid::line(1.0, 16).unwrap();
        SpaceTimeField::from_fn(g, 0.0, 0.1, 5, TimeSampling::Nodal, |_, _, _| c).unwrap()
    }

    #[test]
    fn sign_pattern() {
        for c in [2.0, -1.0, 0.0] {
            let st = constant(c);
            let vg = VelocityGrid::new(2.5, 100).unwrap();
            let kf = kinetic_function(&st, &vg).unwrap();
            for k in 0..100 {
                let v = vg.center(k);
                let f = kf.get(2, 3, k);
                let expect = if c > 0.0 && (0.0..c).contains(&v) {
                    1
                } else if c < 0.0 && (c..0.0).contains(&v) {
                    -1
                } else {
                    0
                };
                assert_eq!(f, expect);
                assert!(f as f64 * v.signum() >= 0.0);
            }
            assert!((kf.marginal(1, 5) - c).abs() <= vg.dv());
        }
    }

    #[test]
    fn range_must_cover_the_field() {
        let st = constant(3.0);
        assert!(kinetic_function(&st, &VelocityGrid::new(2.0, 64).unwrap()).is_err());
        let vg = VelocityGrid::for_field(&st, 10).unwrap();
        assert_eq!(vg.n_v, 64);
        assert!((vg.v_max - 1.1 * 3.0 - vg.dv()).abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_defect() {
        let st = constant(0.7);
        let vg = VelocityGrid::for_field(&st, 64).unwrap();
        let q = defect_measure(&st, 2.0, None, &vg).unwrap();
        assert!(q.values.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(singular_moment(&q, 0.5).unwrap(), 0.0);
        let lm = level_mass(&q, 0.3).unwrap();
        assert_eq!(lm.value, 0.0);
        assert!(lm.holds);
    }

    #[test]
    fn solver_defect_is_nonnegative_and_telescopes() {
        let g = Grid::line(4.0, 64).unwrap();
        let u0 = Field::from_fn(g, |x, _| (1.0 - x * x).max(0.0) - 0.3 * (-(x - 1.2f64).powi(2) * 8.0).exp());
        let run = solve(&u0, 0.0, None, 0.2, 2.0, &SolverOptions::with_dt(0.01)).unwrap();
        let vg = VelocityGrid::for_field(&run.u, 64).unwrap();
        let q = defect_measure(&run.u, 2.0, None, &vg).unwrap();
        assert!(q.negative_mass < 1e-8 * q.positive_mass, "{}", q.negative_mass);
        // level mass at v: ∫(u₀ − v)_+ − ∫(u_T − v)_+ exactly
        let k = 40;
        let v = vg.center(k);
        let n = run.u.n_t() - 1;
        let drop: f64 = (0..g.cells())
            .map(|i| (run.u.slice(0)[i] - v).max(0.0) - (run.u.slice(n)[i] - v).max(0.0))
            .sum::<f64>()
            * g.h();
        let lvl = q.bin_mass[k] / vg.dv();
        assert!((lvl - drop).abs() < 1e-8, "{lvl} {drop}");
        let lm = level_mass(&q, v).unwrap();
        assert!(lm.holds);
        // above the range of u nothing happens
        let top = level_mass(&q, vg.v_max * 0.99).unwrap();
        assert!(top.value < 1e-12);
    }

    #[test]
    fn moment_weights() {
        let st = constant(1.0);
        let vg = VelocityGrid::for_field(&st, 64).unwrap();
        let mut q = defect_measure(&st, 2.0, None, &vg).unwrap();
        for v in q.values.iter_mut() {
            *v = 1.0;
        }
        let total = q.values.len() as f64 * q.dt * q.grid.cell_volume() * vg.dv();
        assert!((singular_moment(&q, 0.0).unwrap() - total).abs() < 1e-12 * total);
        // bin averages of |v|^{-1/2} integrate to ∫_{-V}^{V} |v|^{-1/2} = 4√V
        let half = singular_moment(&q, 0.5).unwrap();
        let slab = q.intervals as f64 * q.dt * q.grid.length();
        assert!((half - 0.5 * slab * 4.0 * vg.v_max.sqrt()).abs() < 1e-10 * half, "{half} {}", 0.5 * slab * 4.0 * vg.v_max.sqrt());
        assert!(singular_moment(&q, 1.0).is_err());
        assert!(level_mass(&q, 2.0 * vg.v_max).is_err());
    }
}
