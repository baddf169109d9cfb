use std::f64::consts::PI;

use num_complex::Complex64;
use pme_lab::fourier::transform::{fft_nd, to_complex};
use pme_lab::fourier::{build_partition, decompose_field, spectral_energy, BlockIndex, PartitionMode};
use pme_lab::grid::lp_norm;
use pme_lab::{Field, Grid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::new(grid, (0..grid.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(seed in any::<u64>(), two_d in any::<bool>(), log_n in 4u32..8) {
        let n = 1usize << log_n;
        let g = if two_d { Grid::new(2, 3.0, n.min(64)).unwrap() } else { Grid::line(3.0, n).unwrap() };
        let f = random_field(g, seed);
        let e = f.values.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        prop_assert!((spectral_energy(&f) - e).abs() <= 1e-10 * e);
    }
}

#[test]
fn blocks_two_apart_do_not_overlap() {
    for mode in [PartitionMode::Homogeneous, PartitionMode::Inhomogeneous] {
        let g = Grid::line(2.0 * PI, 256).unwrap();
        let part = build_partition(&g, mode).unwrap();
        let f = random_field(g, 11);
        let dec = decompose_field(&f, &part).unwrap();
        let spectra: Vec<Vec<Complex64>> = dec
            .blocks
            .iter()
            .map(|b| {
                let mut s = to_complex(&b.values);
                fft_nd(&mut s, &[256], false);
                s
            })
            .collect();
        let js: Vec<i32> = part.indices().collect();
        for a in 0..js.len() {
            for b in 0..js.len() {
                if (js[a] - js[b]).abs() < 2 {
                    continue;
                }
                // the weight tables have disjoint support
                let wa = part.tabulate(js[a]);
                let wb = part.tabulate(js[b]);
                assert!(wa.iter().zip(&wb).all(|(x, y)| x * y == 0.0));
                let inner: Complex64 = spectra[a].iter().zip(&spectra[b]).map(|(x, y)| x.conj() * y).sum();
                let scale = spectra[a].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
                    * spectra[b].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!(inner.norm() <= 1e-12 * scale.max(1e-300), "{mode:?} {} {}", js[a], js[b]);
            }
        }
    }
}

#[test]
fn bernstein_constant_does_not_grow_with_the_block_index() {
    let g = Grid::line(2.0 * PI, 1024).unwrap();
    let part = build_partition(&g, PartitionMode::Homogeneous).unwrap();
    let mut per_block = vec![0.0f64; (part.j_max - part.j_min + 1) as usize];
    for seed in 0..20 {
        let f = random_field(g, seed);
        let dec = decompose_field(&f, &part).unwrap();
        for b in &dec.blocks {
            let BlockIndex::Space(j) = b.index else { unreachable!() };
            let l1 = lp_norm(&b.values, 1.0, g.h());
            if l1 == 0.0 {
                continue;
            }
            let sup = b.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let c = sup / (2f64.powi(j) * l1);
            let k = (j - part.j_min) as usize;
            per_block[k] = per_block[k].max(c);
        }
    }
    // white noise sits well inside the bound at every index
    assert!(per_block.iter().all(|c| *c < 1.0), "{per_block:?}");

    // a point mass is extremal: its blocks saturate the bound at every index
    let mut delta = vec![0.0; g.cells()];
    delta[g.cells() / 2] = 1.0 / g.h();
    let dec = decompose_field(&Field::new(g, delta).unwrap(), &part).unwrap();
    let sharp: Vec<f64> = dec
        .blocks
        .iter()
        .filter_map(|b| {
            let BlockIndex::Space(j) = b.index else { unreachable!() };
            // skip the coarsest blocks, which wrap around the period, and the
            // finest, which the grid truncates
            if j < part.j_min + 3 || j > part.j_max - 2 {
                return None;
            }
            let sup = b.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Some(sup / (2f64.powi(j) * lp_norm(&b.values, 1.0, g.h())))
        })
        .collect();
    let top = sharp.iter().cloned().fold(0.0, f64::max);
    let low = sharp.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(top / low < 1.05, "{sharp:?}");
    // one constant serves every index; the coarsest blocks hold a single mode
    let c = per_block.iter().chain(&sharp).cloned().fold(0.0, f64::max);
    assert!(c <= 0.25 + 1e-5, "{per_block:?} {sharp:?}");
}

#[test]
fn dilating_by_two_shifts_blocks_by_one() {
    let n = 256;
    let g = Grid::line(2.0 * PI, n).unwrap();
    let part = build_partition(&g, PartitionMode::Homogeneous).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let modes: Vec<(f64, f64, f64)> = (1..n / 4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let eval = |x: f64| modes.iter().map(|(k, a, b)| a * (k * x).cos() + b * (k * x).sin()).sum::<f64>();
    let f = Field::from_fn(g, |x, _| eval(x));
    let f2 = Field::from_fn(g, |x, _| eval(2.0 * x));
    let df = decompose_field(&f, &part).unwrap();
    let df2 = decompose_field(&f2, &part).unwrap();
    let norm = |d: &pme_lab::fourier::DyadicDecomposition, j: i32| {
        d.block(BlockIndex::Space(j)).map_or(0.0, |b| lp_norm(&b.values, 2.0, g.h()))
    };
    for j in part.j_min..part.j_max {
        let a = norm(&df, j);
        let b = norm(&df2, j + 1);
        assert!((a - b).abs() <= 1e-10 * (1.0 + a), "j = {j}: {a} vs {b}");
    }
}
