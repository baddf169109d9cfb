use std::f64::consts::PI;

use num_complex::Complex64;
use pme_lab::fourier::transform::{angular_frequencies, fft_nd, to_complex};
use pme_lab::fourier::{build_partition, PartitionMode};
use pme_lab::norms::{
    besov_space_norm, homogeneous_seminorm, slobodeckii_seminorm, sobolev_norm, spacetime_sobolev_norm, Extension,
};
use pme_lab::{Field, Grid, SpaceTimeField, TimeSampling};
use proptest::prelude::*;

fn bump(x: f64, y: f64, r: f64) -> f64 {
    let s = (x * x + y * y) / (r * r);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s).powi(3)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_homogeneous(
        lambda in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        sigma in 0.1f64..1.9,
        p in 1.0f64..3.0,
        periodic in any::<bool>(),
    ) {
        let ext = if periodic { Extension::Periodic } else { Extension::Zero };
        let g = Grid::line(4.0, 128).unwrap();
        let f = Field::from_fn(g, |x, _| bump(x - 0.3, 0.0, 1.2) + 0.3 * bump(x + 0.8, 0.0, 0.5));
        let fl = f.map(|v| lambda * v);
        let a = sobolev_norm(&f, sigma, p, ext).unwrap().value;
        let b = sobolev_norm(&fl, sigma, p, ext).unwrap().value;
        prop_assert!(rel(lambda.abs() * a, b) < 1e-12);
        let a = homogeneous_seminorm(&f, sigma, p, ext).unwrap().value;
        let b = homogeneous_seminorm(&fl, sigma, p, ext).unwrap().value;
        prop_assert!(rel(lambda.abs() * a, b) < 1e-12);
        let part = build_partition(&g, PartitionMode::Inhomogeneous).unwrap();
        let a = besov_space_norm(&f, sigma, p, &part).unwrap().value;
        let b = besov_space_norm(&fl, sigma, p, &part).unwrap().value;
        prop_assert!(rel(lambda.abs() * a, b) < 1e-12);
    }

    #[test]
    fn cyclic_shifts_leave_norms_unchanged(shift in 1usize..64, sigma in 0.05f64..0.95, p in 1.0f64..3.0) {
        let n = 64;
        let g = Grid::line(2.0, n).unwrap();
        let f = Field::from_fn(g, |x, _| (PI * x).sin() + 0.5 * (3.0 * PI * x).cos() + bump(x, 0.0, 0.4));
        let mut shifted = f.values.clone();
        shifted.rotate_left(shift);
        let fs = Field::new(g, shifted).unwrap();
        let a = slobodeckii_seminorm(&f, sigma, p, Extension::Periodic).unwrap().value;
        let b = slobodeckii_seminorm(&fs, sigma, p, Extension::Periodic).unwrap().value;
        prop_assert!(rel(a, b) <= 1e-12, "{} vs {}", a, b);
        let part = build_partition(&g, PartitionMode::Homogeneous).unwrap();
        let a = besov_space_norm(&f, sigma, p, &part).unwrap().value;
        let b = besov_space_norm(&fs, sigma, p, &part).unwrap().value;
        prop_assert!(rel(a, b) <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn dilation_law_on_nested_grids(sigma in 0.05f64..0.95, p in 1.0f64..3.0, two_d in any::<bool>()) {
        // f(2·) sampled on the half-size box has the same samples as f on the full box
        let (d, n) = if two_d { (2, 24) } else { (1, 128) };
        let g = Grid::new(d, 4.0, n).unwrap();
        let half = Grid::new(d, 2.0, n).unwrap();
        let f = Field::from_fn(g, |x, y| bump(x - 0.2, y, 1.3));
        let f2 = Field::from_fn(half, |x, y| bump(2.0 * x - 0.2, 2.0 * y, 1.3));
        let a = slobodeckii_seminorm(&f, sigma, p, Extension::Zero).unwrap().value;
        let b = slobodeckii_seminorm(&f2, sigma, p, Extension::Zero).unwrap().value;
        let law = 2f64.powf(sigma - d as f64 / p);
        prop_assert!(rel(b, law * a) < 0.01, "{} vs {}", b, law * a);
    }
}

fn resampled_dilation_error(n: usize, sigma: f64, p: f64) -> f64 {
    // same box and grid, the dilated function sampled afresh
    let g = Grid::line(8.0, n).unwrap();
    let f = Field::from_fn(g, |x, _| (-(x * x)).exp());
    let f2 = Field::from_fn(g, |x, _| (-(4.0 * x * x)).exp());
    let a = slobodeckii_seminorm(&f, sigma, p, Extension::Zero).unwrap().value;
    let b = slobodeckii_seminorm(&f2, sigma, p, Extension::Zero).unwrap().value;
    rel(b, 2f64.powf(sigma - 1.0 / p) * a)
}

#[test]
fn dilation_law_under_resampling() {
    for &(sigma, p) in &[(0.3, 1.0), (0.5, 2.0), (0.7, 3.0)] {
        let err = resampled_dilation_error(2048, sigma, p);
        assert!(err < 0.01, "σ={sigma} p={p}: {err}");
    }
    // near-diagonal error decays like h^{p(1−σ)}, slowly here
    let errs: Vec<f64> = [1024, 2048, 4096].iter().map(|&n| resampled_dilation_error(n, 0.8, 1.5)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 0.03, "{errs:?}");
}

#[test]
fn constants_and_zero() {
    let g = Grid::line(3.0, 64).unwrap();
    let c = Field::constant(g, 2.5);
    for sigma in [0.3, 0.7, 1.4] {
        assert_eq!(homogeneous_seminorm(&c, sigma, 2.0, Extension::Periodic).unwrap().value, 0.0);
        assert_eq!(sobolev_norm(&Field::zeros(g), sigma, 1.5, Extension::Zero).unwrap().value, 0.0);
    }
    let st = SpaceTimeField::from_fn(g, 0.0, 0.1, 10, TimeSampling::Midpoint, |_, _, _| 0.0).unwrap();
    assert_eq!(spacetime_sobolev_norm(&st, 0.3, 0.5, 2.0, Extension::Zero).unwrap().value, 0.0);
}

/// `Σ |ξ|^{2σ} |f̂(ξ)|²` with the Parseval normalisation.
fn spectral_seminorm_sq(f: &Field, sigma: f64) -> f64 {
    let n = f.grid.n();
    let mut spec: Vec<Complex64> = to_complex(&f.values);
    fft_nd(&mut spec, &[n], false);
    let xi = angular_frequencies(n, f.grid.h());
    spec.iter()
        .zip(&xi)
        .map(|(c, k)| k.abs().powf(2.0 * sigma) * c.norm_sqr())
        .sum::<f64>()
        * f.grid.h()
        / n as f64
}

#[test]
fn quadrature_and_spectral_agree_up_to_one_constant() {
    let g = Grid::line(2.0 * PI, 4096).unwrap();
    for sigma in [0.3, 0.5, 0.7] {
        let ratios: Vec<f64> = (1..=8)
            .map(|k| {
                let f = Field::from_fn(g, |x, _| (k as f64 * x).cos());
                let q = slobodeckii_seminorm(&f, sigma, 2.0, Extension::Periodic).unwrap().value;
                q * q / spectral_seminorm_sq(&f, sigma)
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!(rel(*r, mean) < 0.02, "σ={sigma}: {ratios:?}");
        }
    }
}
