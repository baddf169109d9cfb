//! Besov and dominating-mixed Besov norms from dyadic blocks.

use crate::error::{PmeError, Result};
use crate::fourier::decompose::windowed;
use crate::fourier::{decompose_field, decompose_spacetime, Axis, BlockIndex, DyadicPartition};
use crate::grid::{lp_norm, Field, SpaceTimeField};

use super::{Diagnostics, NormMethod, NormReport};

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(PmeError::domain(format!("p = {p} must be ≥ 1")))
    }
}

fn share(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        part / whole
    } else {
        0.0
    }
}

/// `sup_j 2^{σ j} ‖Δ_j f‖_p` over the partition's blocks. The residual (the mean
/// in homogeneous mode) is excluded from the sup and reported as a share.
pub fn besov_space_norm(field: &Field, sigma_x: f64, p: f64, partition: &DyadicPartition) -> Result<NormReport> {
    check_p(p)?;
    let w = field.grid.cell_volume();
    let dec = decompose_field(field, partition)?;
    let value = dec
        .blocks
        .iter()
        .map(|b| match b.index {
            BlockIndex::Space(j) => 2f64.powf(sigma_x * j as f64) * lp_norm(&b.values, p, w),
            _ => 0.0,
        })
        .fold(0.0, f64::max);
    let diagnostics = Diagnostics {
        residual_share: Some(share(lp_norm(&dec.residual, p, w), lp_norm(&field.values, p, w))),
        ..Diagnostics::default()
    };
    Ok(NormReport {
        value,
        method: NormMethod::Spectral,
        sigma: sigma_x,
        sigma_t: None,
        p,
        h: field.grid.h(),
        dt: None,
        diagnostics,
    })
}

/// `sup_{l,j} 2^{σ_t l} 2^{σ_x j} ‖Δ_l Δ_j u‖_{L^p_{t,x}}` over the double array of
/// blocks. The trajectory is windowed in time first; the window's effect is
/// reported as `cutoff_share`.
pub fn mixed_besov_norm(
    st: &SpaceTimeField,
    sigma_t: f64,
    sigma_x: f64,
    p: f64,
    space: &DyadicPartition,
    time: &DyadicPartition,
) -> Result<NormReport> {
    check_p(p)?;
    let w = st.grid.cell_volume() * st.dt;
    let dec = decompose_spacetime(st, space, time, Axis::Mixed)?;
    let value = dec
        .blocks
        .iter()
        .map(|b| match b.index {
            BlockIndex::Mixed(l, j) => {
                2f64.powf(sigma_t * l as f64 + sigma_x * j as f64) * lp_norm(&b.values, p, w)
            }
            _ => 0.0,
        })
        .fold(0.0, f64::max);
    let whole = lp_norm(&st.values, p, w);
    let cut: Vec<f64> = st.values.iter().zip(windowed(st)).map(|(a, b)| a - b).collect();
    let diagnostics = Diagnostics {
        residual_share: Some(share(lp_norm(&dec.residual, p, w), lp_norm(&dec.source, p, w))),
        cutoff_share: Some(share(lp_norm(&cut, p, w), whole)),
        ..Diagnostics::default()
    };
    Ok(NormReport {
        value,
        method: NormMethod::Spectral,
        sigma: sigma_x,
        sigma_t: Some(sigma_t),
        p,
        h: st.grid.h(),
        dt: Some(st.dt),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{build_partition, build_time_partition, PartitionMode};
    use crate::grid::{Grid, TimeSampling};
    use std::f64::consts::PI;

    #[test]
    fn zero_field() {
        let g = Grid::line(1.0, 32).unwrap();
        let part = build_partition(&g, PartitionMode::Homogeneous).unwrap();
        let r = besov_space_norm(&Field::zeros(g), 0.5, 2.0, &part).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.diagnostics.residual_share, Some(0.0));
    }

    #[test]
    fn single_mode_sup_sits_near_its_frequency() {
        let g = Grid::line(1.0, 128).unwrap();
        let part = build_partition(&g, PartitionMode::Homogeneous).unwrap();
        let k = 9.0;
        let w = 2.0 * PI * k;
        let f = Field::from_fn(g, |x, _| (w * x).cos());
        let sigma = 0.7;
        let r = besov_space_norm(&f, sigma, 2.0, &part).unwrap();
        let dec = decompose_field(&f, &part).unwrap();
        let j0 = w.log2().round() as i32;
        let best = (j0 - 1..=j0 + 1)
            .filter_map(|j| dec.block(BlockIndex::Space(j)))
            .map(|b| match b.index {
                BlockIndex::Space(j) => 2f64.powf(sigma * j as f64) * lp_norm(&b.values, 2.0, g.h()),
                _ => 0.0,
            })
            .fold(0.0, f64::max);
        assert!((r.value - best).abs() <= 1e-12 * r.value);
    }

    #[test]
    fn mixed_pure_mode_reports_window_share() {
        let g = Grid::line(1.0, 32).unwrap();
        let st = SpaceTimeField::from_fn(g, 0.0, 1.0 / 64.0, 64, TimeSampling::Nodal, |t, x, _| {
            (2.0 * PI * (5.0 * t + 3.0 * x)).cos()
        })
        .unwrap();
        let ps = build_partition(&g, PartitionMode::Inhomogeneous).unwrap();
        let pt = build_time_partition(64, 1.0 / 64.0, PartitionMode::Inhomogeneous).unwrap();
        let r = mixed_besov_norm(&st, 0.2, 0.3, 2.0, &ps, &pt).unwrap();
        assert!(r.value > 0.0);
        assert!(r.diagnostics.cutoff_share.unwrap() > 0.0);
    }
}
