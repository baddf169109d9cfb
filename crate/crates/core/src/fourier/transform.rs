//! Multi-dimensional FFT helpers on row-major arrays.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed angular frequencies `2πk/(n·spacing)` in FFT order.
pub fn angular_frequencies(n: usize, spacing: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as isize } else { k as isize - n as isize };
            kk as f64 * scale
        })
        .collect()
}

/// In-place FFT along every axis of a row-major array. The inverse is normalised.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "shape does not match data length");
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft = if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            };
            if stride == 1 {
                fft.process(data);
            } else {
                let block = n * stride;
                let mut line = vec![Complex64::new(0.0, 0.0); n];
                for outer in 0..total / block {
                    let base = outer * block;
                    for inner in 0..stride {
                        for k in 0..n {
                            line[k] = data[base + k * stride + inner];
                        }
                        fft.process(&mut line);
                        for k in 0..n {
                            data[base + k * stride + inner] = line[k];
                        }
                    }
                }
            }
        }
        stride *= n;
    }
    if inverse {
        let s = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Euclidean frequency magnitudes for a row-major array whose trailing
/// `dims` axes each have `n` points with spacing `spacing`.
pub fn radial_magnitudes(n: usize, dims: usize, spacing: f64) -> Vec<f64> {
    let f = angular_frequencies(n, spacing);
    match dims {
        1 => f.iter().map(|v| v.abs()).collect(),
        _ => {
            let mut out = Vec::with_capacity(n * n);
            for a in &f {
                for b in &f {
                    out.push((a * a + b * b).sqrt());
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let shape = [4, 6];
        let orig: Vec<Complex64> = (0..24).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut d = orig.clone();
        fft_nd(&mut d, &shape, false);
        fft_nd(&mut d, &shape, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_on_its_bin() {
        let n = 8;
        let mut d: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((2.0 * std::f64::consts::PI * 3.0 * i as f64 / n as f64).cos(), 0.0))
            .collect();
        fft_nd(&mut d, &[n], false);
        assert!((d[3].re - 4.0).abs() < 1e-12 && (d[5].re - 4.0).abs() < 1e-12);
        let f = angular_frequencies(8, 1.0);
        assert!((f[5] + f[3]).abs() < 1e-15);
    }
}
