//! Smooth dyadic partitions of unity in frequency.

use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::Grid;

use super::transform::radial_magnitudes;

/// `e^{−1/s} / (e^{−1/s} + e^{−1/(1−s)})`, clamped to 0 below `s = 0` and 1 above `s = 1`.
pub fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Radial cutoff: 1 on `r ≤ 1`, 0 on `r ≥ 2`.
pub fn cutoff(r: f64) -> f64 {
    transition(2.0 - r)
}

/// `χ(2^{−j} r) − χ(2^{1−j} r)`, supported in `2^{j−1} ≤ r ≤ 2^{j+1}`.
pub fn annulus(j: i32, r: f64) -> f64 {
    cutoff(r * 2f64.powi(-j)) - cutoff(r * 2f64.powi(1 - j))
}

/// Sum of three neighbouring annuli `j−1, j, j+1`.
pub fn widened_annulus(j: i32, r: f64) -> f64 {
    cutoff(r * 2f64.powi(-j - 1)) - cutoff(r * 2f64.powi(2 - j))
}

/// Smooth time window on `[a, b]`: rises over the first eighth, falls over the last.
pub fn time_window(t: f64, a: f64, b: f64) -> f64 {
    let s = (t - a) / (b - a);
    let ramp = 0.125;
    transition(s / ramp) * transition((1.0 - s) / ramp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartitionMode {
    /// Annuli `j_min ≤ j ≤ j_max` covering every nonzero frequency; the mean is the residual.
    Homogeneous,
    /// Low block `χ(|ξ|)` (index 0) plus annuli `1 ≤ j ≤ j_max`; no residual.
    Inhomogeneous,
}

/// A partition of unity tabulated against the frequencies of one transform axis group.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition {
    pub mode: PartitionMode,
    pub j_min: i32,
    pub j_max: i32,
    /// Frequency magnitude of every DFT coefficient, in FFT order.
    pub magnitudes: Vec<f64>,
}

impl DyadicPartition {
    pub fn from_magnitudes(magnitudes: Vec<f64>, mode: PartitionMode) -> Result<Self> {
        let nonzero = magnitudes.iter().cloned().filter(|&r| r > 0.0);
        let lo = nonzero.clone().fold(f64::INFINITY, f64::min);
        let hi = nonzero.fold(0.0, f64::max);
        if !lo.is_finite() || hi <= 0.0 {
            return Err(PmeError::domain("no nonzero frequencies"));
        }
        let j_max = hi.log2().ceil() as i32;
        let (j_min, j_max) = match mode {
            PartitionMode::Homogeneous => (lo.log2().floor() as i32, j_max),
            PartitionMode::Inhomogeneous => (0, j_max.max(1)),
        };
        Ok(DyadicPartition {
            mode,
            j_min,
            j_max,
            magnitudes,
        })
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Weight of block `j` at frequency magnitude `r`.
    pub fn weight(&self, j: i32, r: f64) -> f64 {
        if self.mode == PartitionMode::Inhomogeneous && j == 0 {
            cutoff(r)
        } else {
            annulus(j, r)
        }
    }

    /// Part of the unit mass not carried by any block.
    pub fn residual_weight(&self, r: f64) -> f64 {
        match self.mode {
            PartitionMode::Homogeneous => {
                cutoff(r * 2f64.powi(1 - self.j_min)) + (1.0 - cutoff(r * 2f64.powi(-self.j_max)))
            }
            PartitionMode::Inhomogeneous => 1.0 - cutoff(r * 2f64.powi(-self.j_max)),
        }
    }

    /// Block `j` weights at every tabulated frequency.
    pub fn tabulate(&self, j: i32) -> Vec<f64> {
        self.magnitudes.iter().map(|&r| self.weight(j, r)).collect()
    }

    pub fn tabulate_residual(&self) -> Vec<f64> {
        self.magnitudes.iter().map(|&r| self.residual_weight(r)).collect()
    }

    /// Largest deviation of `Σ_j φ_j + residual` from 1 over the tabulated frequencies.
    pub fn unity_defect(&self) -> f64 {
        self.magnitudes
            .iter()
            .map(|&r| {
                let s: f64 = self.indices().map(|j| self.weight(j, r)).sum();
                (s + self.residual_weight(r) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Spatial partition for a grid (radial in two dimensions).
pub fn build_partition(grid: &Grid, mode: PartitionMode) -> Result<DyadicPartition> {
    if grid.n() < 8 {
        return Err(PmeError::domain("partition needs at least 8 cells per axis"));
    }
    DyadicPartition::from_magnitudes(radial_magnitudes(grid.n(), grid.dim(), grid.h()), mode)
}

/// Temporal partition for `n_t` samples spaced `dt`.
pub fn build_time_partition(n_t: usize, dt: f64, mode: PartitionMode) -> Result<DyadicPartition> {
    if n_t < 8 {
        return Err(PmeError::domain("partition needs at least 8 time samples"));
    }
    DyadicPartition::from_magnitudes(radial_magnitudes(n_t, 1, dt), mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.0), 1.0);
        assert_eq!(cutoff(2.0), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let c = cutoff(1.0 + i as f64 / 100.0);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn annuli_vanish_outside_support() {
        for j in -3..4 {
            let lo = 2f64.powi(j - 1);
            let hi = 2f64.powi(j + 1);
            assert_eq!(annulus(j, lo * 0.999), 0.0);
            assert_eq!(annulus(j, lo), 0.0);
            assert_eq!(annulus(j, hi), 0.0);
            assert_eq!(annulus(j, hi * 1.001), 0.0);
            assert!(annulus(j, 2f64.powi(j)) > 0.0);
        }
    }

    #[test]
    fn unity_on_grids() {
        for &(n, l) in &[(8usize, 1.0), (64, 8.0), (256, 2.0)] {
            let g = Grid::line(l, n).unwrap();
            for mode in [PartitionMode::Homogeneous, PartitionMode::Inhomogeneous] {
                let p = build_partition(&g, mode).unwrap();
                assert!(p.unity_defect() < 1e-12);
            }
        }
        let g = Grid::new(2, 3.0, 16).unwrap();
        let p = build_partition(&g, PartitionMode::Homogeneous).unwrap();
        assert!(p.unity_defect() < 1e-12);
    }

    #[test]
    fn homogeneous_residual_is_the_mean() {
        let g = Grid::line(8.0, 64).unwrap();
        let p = build_partition(&g, PartitionMode::Homogeneous).unwrap();
        let res = p.tabulate_residual();
        assert_eq!(res[0], 1.0);
        assert!(res[1..].iter().all(|&w| w == 0.0));
        let q = build_partition(&g, PartitionMode::Inhomogeneous).unwrap();
        assert_eq!(q.weight(0, 0.0), 1.0);
    }

    #[test]
    fn widened_is_sum_of_three() {
        for &r in &[0.1, 0.3, 0.9, 1.7, 3.9] {
            let s = annulus(-1, r) + annulus(0, r) + annulus(1, r);
            assert!((widened_annulus(0, r) - s).abs() < 1e-15);
        }
    }

    #[test]
    fn small_grid_rejected() {
        let g = Grid::line(1.0, 4).unwrap();
        assert!(build_partition(&g, PartitionMode::Homogeneous).is_err());
    }
}
