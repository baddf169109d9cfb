//! Uniform cell-centred grids on a periodic box and the fields that live on them.

use serde::Serialize;

use crate::error::{PmeError, Result};

/// Square periodic box `[−L/2, L/2)^d` split into `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    length: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, length: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(PmeError::domain(format!("unsupported dimension {dim}")));
        }
        if n < 4 {
            return Err(PmeError::domain("grid needs at least 4 cells per axis"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(PmeError::domain("grid extent must be positive"));
        }
        Ok(Grid { dim, length, n })
    }

    pub fn line(length: f64, n: usize) -> Result<Self> {
        Grid::new(1, length, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extent of one axis.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Cell centre along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + (i as f64 + 0.5) * self.h()
    }

    /// Cell centre of flat index `idx` (row-major, last axis fastest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        if self.dim == 1 {
            [self.coord(idx), 0.0]
        } else {
            [self.coord(idx / self.n), self.coord(idx % self.n)]
        }
    }

    /// Same grid refined by an integer factor.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            n: self.n * factor,
            ..*self
        }
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.dim == other.dim && self.n == other.n && self.length == other.length {
            Ok(())
        } else {
            Err(PmeError::mismatch(format!(
                "grids differ: {self:?} vs {other:?}"
            )))
        }
    }
}

fn ensure_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(PmeError::domain(format!("non-finite sample at index {i}"))),
    }
}

/// Cell values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(PmeError::mismatch(format!(
                "expected {} samples, got {}",
                grid.cells(),
                values.len()
            )));
        }
        ensure_finite(&values)?;
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.cells()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.cells()],
        }
    }

    /// Samples `f` at the cell centres. In one dimension the second
    /// coordinate passed to `f` is zero.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.cells())
            .map(|i| {
                let [x, y] = grid.point(i);
                f(x, y)
            })
            .collect();
        Field { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Riemann sum `Σ u_i h^d`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l1(&self) -> f64 {
        self.lp(1.0)
    }

    pub fn lp(&self, p: f64) -> f64 {
        lp_norm(&self.values, p, self.grid.cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Centred periodic Laplacian of `values` (one sample per cell).
    pub fn laplacian_of(grid: &Grid, values: &[f64]) -> Vec<f64> {
        let n = grid.n();
        let inv = 1.0 / (grid.h() * grid.h());
        let mut out = vec![0.0; values.len()];
        if grid.dim() == 1 {
            for i in 0..n {
                let l = values[(i + n - 1) % n];
                let r = values[(i + 1) % n];
                out[i] = (l - 2.0 * values[i] + r) * inv;
            }
        } else {
            for i in 0..n {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                for j in 0..n {
                    let jm = (j + n - 1) % n;
                    let jp = (j + 1) % n;
                    let c = values[i * n + j];
                    out[i * n + j] = (values[im * n + j]
                        + values[ip * n + j]
                        + values[i * n + jm]
                        + values[i * n + jp]
                        - 4.0 * c)
                        * inv;
                }
            }
        }
        out
    }
}

/// Discrete `L^p` norm of samples with quadrature weight `w` per sample.
/// `p = ∞` gives the maximum modulus.
pub fn lp_norm(values: &[f64], p: f64, w: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    let s: f64 = if p == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    (s * w).powf(1.0 / p)
}

/// How the time samples of a trajectory relate to the time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeSampling {
    /// Samples at `t_start + nΔt`, `n = 0..n_t`; integrals use the trapezoid rule.
    Nodal,
    /// Samples at cell midpoints `t_start + (n+½)Δt`; each sample carries weight `Δt`.
    Midpoint,
}

/// Samples on a uniform space-time grid, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Grid,
    pub t_start: f64,
    pub dt: f64,
    pub sampling: TimeSampling,
    pub values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn new(
        grid: Grid,
        t_start: f64,
        dt: f64,
        sampling: TimeSampling,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PmeError::domain("time step must be positive"));
        }
        let cells = grid.cells();
        if values.len() % cells != 0 || values.len() / cells < 2 {
            return Err(PmeError::mismatch(format!(
                "{} samples do not form at least two slices of {cells} cells",
                values.len()
            )));
        }
        ensure_finite(&values)?;
        Ok(SpaceTimeField {
            grid,
            t_start,
            dt,
            sampling,
            values,
        })
    }

    /// Stacks equally spaced slices.
    pub fn from_slices(
        grid: Grid,
        t_start: f64,
        dt: f64,
        sampling: TimeSampling,
        slices: &[Field],
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(slices.len() * grid.cells());
        for s in slices {
            grid.ensure_same(&s.grid)?;
            values.extend_from_slice(&s.values);
        }
        SpaceTimeField::new(grid, t_start, dt, sampling, values)
    }

    /// Samples `f(t, x, y)` at every space-time node.
    pub fn from_fn(
        grid: Grid,
        t_start: f64,
        dt: f64,
        n_t: usize,
        sampling: TimeSampling,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(n_t * grid.cells());
        let probe = SpaceTimeField {
            grid,
            t_start,
            dt,
            sampling,
            values: Vec::new(),
        };
        for n in 0..n_t {
            let t = probe.time(n);
            for i in 0..grid.cells() {
                let [x, y] = grid.point(i);
                values.push(f(t, x, y));
            }
        }
        SpaceTimeField::new(grid, t_start, dt, sampling, values)
    }

    pub fn zeros_like(&self) -> SpaceTimeField {
        SpaceTimeField {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn n_t(&self) -> usize {
        self.values.len() / self.grid.cells()
    }

    pub fn time(&self, n: usize) -> f64 {
        match self.sampling {
            TimeSampling::Nodal => self.t_start + n as f64 * self.dt,
            TimeSampling::Midpoint => self.t_start + (n as f64 + 0.5) * self.dt,
        }
    }

    /// Length of the covered time interval.
    pub fn duration(&self) -> f64 {
        match self.sampling {
            TimeSampling::Nodal => (self.n_t() - 1) as f64 * self.dt,
            TimeSampling::Midpoint => self.n_t() as f64 * self.dt,
        }
    }

    /// Time quadrature weight of each slice.
    pub fn time_weights(&self) -> Vec<f64> {
        let n_t = self.n_t();
        let mut w = vec![self.dt; n_t];
        if self.sampling == TimeSampling::Nodal {
            w[0] *= 0.5;
            w[n_t - 1] *= 0.5;
        }
        w
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let c = self.grid.cells();
        &self.values[n * c..(n + 1) * c]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let c = self.grid.cells();
        &mut self.values[n * c..(n + 1) * c]
    }

    pub fn field(&self, n: usize) -> Field {
        Field {
            grid: self.grid,
            values: self.slice(n).to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpaceTimeField {
        SpaceTimeField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub(crate) fn ensure_same_layout(&self, other: &SpaceTimeField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.n_t() != other.n_t()
            || (self.dt - other.dt).abs() > 1e-12 * self.dt
            || (self.t_start - other.t_start).abs() > 1e-12 * self.dt.max(self.t_start.abs())
            || self.sampling != other.sampling
        {
            return Err(PmeError::mismatch("time discretizations differ"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centres() {
        let g = Grid::line(2.0, 4).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coord(0), -0.75);
        assert_eq!(g.coord(3), 0.75);
        assert!(Grid::line(1.0, 3).is_err());
        assert!(Grid::new(3, 1.0, 8).is_err());
    }

    #[test]
    fn laplacian_sums_to_zero() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let f = Field::from_fn(g, |x, y| (x * 3.0).sin() + y * y);
        let lap = Field::laplacian_of(&g, &f.values);
        assert!(lap.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn trapezoid_weights() {
        let g = Grid::line(1.0, 4).unwrap();
        let st = SpaceTimeField::new(g, 0.0, 0.5, TimeSampling::Nodal, vec![1.0; 12]).unwrap();
        assert_eq!(st.n_t(), 3);
        assert_eq!(st.time_weights(), vec![0.25, 0.5, 0.25]);
        assert_eq!(st.duration(), 1.0);
        assert!(SpaceTimeField::new(g, 0.0, 0.5, TimeSampling::Nodal, vec![1.0; 4]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::line(1.0, 4).unwrap();
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
