//! Compactly supported test data built from smooth bumps.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Field, Grid, SpaceTimeField, TimeSampling};

/// `amplitude · (1 − r²)³₊` with `r = |x − center| / width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, x: f64, y: f64, dim: usize) -> f64 {
        let dx = x - self.center[0];
        let dy = if dim == 2 { y - self.center[1] } else { 0.0 };
        let r2 = (dx * dx + dy * dy) / (self.width * self.width);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - r2).powi(3)
        }
    }
}

pub fn bumps_field(grid: Grid, bumps: &[Bump]) -> Field {
    let dim = grid.dim();
    Field::from_fn(grid, |x, y| bumps.iter().map(|b| b.eval(x, y, dim)).sum())
}

/// A source made of bumps whose amplitudes oscillate in time:
/// `Σ_k b_k(x) cos(ω_k t)`, sampled at nodal times.
pub fn oscillating_source(
    grid: Grid,
    t_start: f64,
    dt: f64,
    n_t: usize,
    terms: &[(Bump, f64)],
) -> Result<SpaceTimeField> {
    let dim = grid.dim();
    SpaceTimeField::from_fn(grid, t_start, dt, n_t, TimeSampling::Nodal, |t, x, y| {
        terms.iter().map(|(b, w)| b.eval(x, y, dim) * (w * t).cos()).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_peak() {
        let b = Bump {
            center: [0.5, 0.0],
            width: 0.25,
            amplitude: -2.0,
        };
        assert_eq!(b.eval(0.5, 0.0, 1), -2.0);
        assert_eq!(b.eval(0.75, 0.0, 1), 0.0);
        assert_eq!(b.eval(0.5, 0.3, 2), 0.0);
        let g = Grid::line(2.0, 64).unwrap();
        let f = bumps_field(g, &[b]);
        // ∫(1 − r²)³ over [−1, 1] is 32/35
        assert!((f.integral() + 2.0 * 0.25 * 32.0 / 35.0).abs() < 1e-3);
    }
}
