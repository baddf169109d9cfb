//! Pair-sum quadrature for Sobolev–Slobodeckiĭ norms on uniform grids.
//!
//! Cells contribute through their centres; the diagonal `x = y` is omitted.
//! Sums are organised by offset `d` between cells, `D(d) = Σ_i |f_i − f_{i+d}|^p`,
//! so the expensive part does not depend on the order `σ` and is shared
//! across orders. For `p = 2` the offset sums come from an FFT
//! autocorrelation instead of the direct double loop.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::fourier::transform::fft_nd;

/// How a field on the finite box is continued outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extension {
    /// The field is continued periodically; one point ranges over a single
    /// period and the other over the whole space, so the kernel is summed
    /// over all periodic images.
    Periodic,
    /// The field vanishes outside the box, which sits in the whole space.
    /// Pairs with one point outside the box are integrated in closed form.
    Zero,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Power {
    One,
    Two,
    ThreeHalves,
    General(f64),
}

impl Power {
    pub(crate) fn new(p: f64) -> Self {
        if p == 1.0 {
            Power::One
        } else if p == 2.0 {
            Power::Two
        } else if p == 1.5 {
            Power::ThreeHalves
        } else {
            Power::General(p)
        }
    }

    #[inline]
    pub(crate) fn of(self, a: f64) -> f64 {
        match self {
            Power::One => a,
            Power::Two => a * a,
            Power::ThreeHalves => a * a.sqrt(),
            Power::General(p) => a.powf(p),
        }
    }

    fn value(self) -> f64 {
        match self {
            Power::One => 1.0,
            Power::Two => 2.0,
            Power::ThreeHalves => 1.5,
            Power::General(p) => p,
        }
    }
}

/// Samples on an `nx × ny` block of square cells of side `h` (`ny = 1` in one dimension).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Samples {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub dim: usize,
    pub ext: Extension,
}

impl Samples {
    pub(crate) fn new(values: Vec<f64>, n: usize, dim: usize, h: f64, ext: Extension) -> Self {
        let (nx, ny) = if dim == 1 { (n, 1) } else { (n, n) };
        Samples {
            values,
            nx,
            ny,
            h,
            dim,
            ext,
        }
    }

    fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// `Σ |f|^p h^d`
    pub(crate) fn lp_pow(&self, p: f64) -> f64 {
        let pw = Power::new(p);
        self.values.iter().map(|v| pw.of(v.abs())).sum::<f64>() * self.cell_volume()
    }

    /// Forward difference quotient along `axis` (0 is the slow index).
    /// Zero extension appends one cell so the outermost jumps are kept.
    pub(crate) fn difference(&self, axis: usize) -> Samples {
        let (nx, ny) = (self.nx, self.ny);
        let inv = 1.0 / self.h;
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                0.0
            } else {
                self.values[i as usize * ny + j as usize]
            }
        };
        match self.ext {
            Extension::Periodic => {
                let mut out = vec![0.0; nx * ny];
                for i in 0..nx {
                    for j in 0..ny {
                        let (ni, nj) = if axis == 0 {
                            ((i + 1) % nx, j)
                        } else {
                            (i, (j + 1) % ny)
                        };
                        out[i * ny + j] = (self.values[ni * ny + nj] - self.values[i * ny + j]) * inv;
                    }
                }
                Samples {
                    values: out,
                    ..self.clone()
                }
            }
            Extension::Zero => {
                let (mx, my) = if axis == 0 { (nx + 1, ny) } else { (nx, ny + 1) };
                let mut out = vec![0.0; mx * my];
                for i in 0..mx {
                    for j in 0..my {
                        let (ii, jj) = (i as isize, j as isize);
                        let v = if axis == 0 {
                            at(ii, jj) - at(ii - 1, jj)
                        } else {
                            at(ii, jj) - at(ii, jj - 1)
                        };
                        out[i * my + j] = v * inv;
                    }
                }
                Samples {
                    values: out,
                    nx: mx,
                    ny: my,
                    ..self.clone()
                }
            }
        }
    }

    /// All partial difference quotients of order `k`.
    pub(crate) fn derivatives(&self, k: usize) -> Vec<Samples> {
        if k == 0 {
            return vec![self.clone()];
        }
        if self.dim == 1 {
            let mut s = self.clone();
            for _ in 0..k {
                s = s.difference(0);
            }
            return vec![s];
        }
        (0..=k)
            .map(|a| {
                let mut s = self.clone();
                for _ in 0..a {
                    s = s.difference(0);
                }
                for _ in 0..k - a {
                    s = s.difference(1);
                }
                s
            })
            .collect()
    }

    /// `|f|^p` of the Slobodeckiĭ seminorm of order `sigma ∈ (0, 1)`.
    pub(crate) fn seminorm_pow(&self, sigma: f64, p: f64) -> f64 {
        if self.dim == 1 {
            OffsetProfile::new(&self.values, self.h, p, self.ext).pth_power(sigma)
        } else {
            seminorm_pow_2d(self, sigma, p)
        }
    }
}

/// `Σ_{i=0}^{n−1−d} |g_i − g_{i+d}|^p` for every `d`, or the cyclic version.
fn offset_sums(g: &[f64], pw: Power, cyclic: bool) -> Vec<f64> {
    let n = g.len();
    if n < 2 {
        return vec![0.0; n.max(1)];
    }
    if matches!(pw, Power::Two) && n >= 64 {
        return offset_sums_fft(g, cyclic);
    }
    let dmax = if cyclic { n / 2 } else { n - 1 };
    let mut d: Vec<f64> = (0..=dmax)
        .into_par_iter()
        .map(|d| {
            if d == 0 {
                return 0.0;
            }
            if cyclic {
                let (head, tail) = g.split_at(d);
                let mut s = 0.0;
                for (a, b) in g[..n - d].iter().zip(tail) {
                    s += pw.of((a - b).abs());
                }
                for (a, b) in g[n - d..].iter().zip(head) {
                    s += pw.of((a - b).abs());
                }
                s
            } else {
                let mut s = 0.0;
                for (a, b) in g[..n - d].iter().zip(&g[d..]) {
                    s += pw.of((a - b).abs());
                }
                s
            }
        })
        .collect();
    if cyclic {
        d.resize(n, 0.0);
        for k in dmax + 1..n {
            d[k] = d[n - k];
        }
    }
    d
}

fn offset_sums_fft(g: &[f64], cyclic: bool) -> Vec<f64> {
    let n = g.len();
    let size = if cyclic { n } else { (2 * n).next_power_of_two() };
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (b, v) in buf.iter_mut().zip(g) {
        b.re = *v;
    }
    fft_nd(&mut buf, &[size], false);
    for b in buf.iter_mut() {
        *b = Complex64::new(b.norm_sqr(), 0.0);
    }
    fft_nd(&mut buf, &[size], true);
    // buf[d] = Σ_i g_i g_{i+d} (cyclic or zero padded)
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + g[i] * g[i];
    }
    (0..n)
        .map(|d| {
            if d == 0 {
                return 0.0;
            }
            let sq = if cyclic {
                2.0 * prefix[n]
            } else {
                prefix[n - d] + (prefix[n] - prefix[d])
            };
            (sq - 2.0 * buf[d].re).max(0.0)
        })
        .collect()
}

/// Offset sums of a 1-d array with what is needed to evaluate any order.
pub(crate) struct OffsetProfile {
    ext: Extension,
    h: f64,
    /// Cells in the box.
    n: usize,
    /// First cell of the trimmed support (zero extension).
    lo: usize,
    sums: Vec<f64>,
    /// `|f_i|^p` on the trimmed support.
    mass: Vec<f64>,
    power: Power,
}

impl OffsetProfile {
    pub(crate) fn new(values: &[f64], h: f64, p: f64, ext: Extension) -> Self {
        let pw = Power::new(p);
        let n = values.len();
        match ext {
            Extension::Periodic => OffsetProfile {
                ext,
                h,
                n,
                lo: 0,
                sums: offset_sums(values, pw, true),
                mass: Vec::new(),
                power: pw,
            },
            Extension::Zero => {
                let lo = values.iter().position(|v| *v != 0.0);
                let (lo, hi) = match lo {
                    None => (0, 0),
                    Some(lo) => (lo, n - 1 - values.iter().rev().position(|v| *v != 0.0).unwrap()),
                };
                let support = if values.iter().all(|v| *v == 0.0) {
                    &values[0..0]
                } else {
                    &values[lo..=hi]
                };
                OffsetProfile {
                    ext,
                    h,
                    n,
                    lo,
                    sums: offset_sums(support, pw, false),
                    mass: support.iter().map(|v| pw.of(v.abs())).collect(),
                    power: pw,
                }
            }
        }
    }

    /// `|f|^p_{Ẇ^{σ,p}}` for `σ ∈ (0, 1)`.
    pub(crate) fn pth_power(&self, sigma: f64) -> f64 {
        let p = self.power.value();
        let sp = sigma * p;
        let e = -1.0 - sp;
        let scale = self.h.powf(1.0 - sp);
        match self.ext {
            Extension::Periodic => {
                let n = self.n;
                let nf = n as f64;
                let mut s = 0.0;
                for d in 1..n {
                    // Σ_m |d + m n|^{e}
                    let a = d as f64 / nf;
                    let w = nf.powf(e) * (hurwitz_zeta(-e, a) + hurwitz_zeta(-e, 1.0 - a));
                    s += self.sums[d] * w;
                }
                s * scale
            }
            Extension::Zero => {
                if self.mass.is_empty() {
                    return 0.0;
                }
                let n = self.n;
                let mut inner = 0.0;
                for d in 1..self.sums.len() {
                    inner += self.sums[d] * (d as f64).powf(e);
                }
                // cumulative kernel Wc(k) = Σ_{d=1}^{k} d^{e}
                let mut wc = vec![0.0; n];
                for d in 1..n {
                    wc[d] = wc[d - 1] + (d as f64).powf(e);
                }
                let len = n as f64 * self.h;
                let hi = self.lo + self.mass.len() - 1;
                let mut cross = 0.0;
                let mut outside = 0.0;
                for (k, m) in self.mass.iter().enumerate() {
                    if *m == 0.0 {
                        continue;
                    }
                    let i = self.lo + k;
                    let left = wc[i] - wc[i - self.lo];
                    let right = wc[n - 1 - i] - wc[hi - i];
                    cross += m * (left + right);
                    let x = (i as f64 + 0.5) * self.h;
                    outside += m * (x.powf(-sp) + (len - x).powf(-sp)) / sp;
                }
                2.0 * (inner + cross) * scale + 2.0 * outside * self.h
            }
        }
    }
}

/// `Σ_{k≥0} (a + k)^{−s}` for `s > 1`, `a > 0`, by Euler–Maclaurin summation.
pub(crate) fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const N: usize = 12;
    // B_{2j} / (2j)!
    const COEF: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum: f64 = (0..N).map(|k| (a + k as f64).powf(-s)).sum();
    let x = a + N as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) … (s+2j−2) times x^{−s−2j+1}
    let mut rising = s;
    let mut xp = x.powf(-s - 1.0);
    for (j, c) in COEF.iter().enumerate() {
        sum += c * rising * xp;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        xp /= x * x;
    }
    sum
}

/// Periodised kernel `Σ_{a,b} |(ox + a nx, oy + b ny)|^{−2−s}` in cell units for
/// every cyclic offset, stored `[ox][oy]`. Images beyond a few periods are
/// replaced by the integral over the exterior of the block they tile.
fn periodic_kernel_2d(nx: usize, ny: usize, s: f64) -> Vec<f64> {
    const IMAGES: isize = 8;
    let e = -0.5 * (2.0 + s);
    let (fx, fy) = (nx as f64, ny as f64);
    let half = IMAGES as f64 + 0.5;
    (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (ox, oy) = ((idx / ny) as f64, (idx % ny) as f64);
            let mut w = 0.0;
            for a in -IMAGES..=IMAGES {
                for b in -IMAGES..=IMAGES {
                    let x = ox + a as f64 * fx;
                    let y = oy + b as f64 * fy;
                    let r2 = x * x + y * y;
                    if r2 > 0.0 {
                        w += r2.powf(e);
                    }
                }
            }
            let tail = exterior_2d(half * fx - ox, half * fy - oy, 2.0 * half * fx, 2.0 * half * fy, s);
            w + tail / (fx * fy)
        })
        .collect()
}

/// Exterior kernel mass `∫_{y ∉ box} |x − y|^{−2−s} dy` for a point in a rectangle,
/// by angular quadrature of `r(θ)^{−s}/s`.
fn exterior_2d(x: f64, y: f64, wx: f64, wy: f64, s: f64) -> f64 {
    const ANGLES: usize = 512;
    let mut total = 0.0;
    for k in 0..ANGLES {
        let th = (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / ANGLES as f64;
        let (c, sn) = (th.cos(), th.sin());
        let rx = if c > 0.0 {
            (wx - x) / c
        } else if c < 0.0 {
            -x / c
        } else {
            f64::INFINITY
        };
        let ry = if sn > 0.0 {
            (wy - y) / sn
        } else if sn < 0.0 {
            -y / sn
        } else {
            f64::INFINITY
        };
        total += rx.min(ry).powf(-s);
    }
    total * 2.0 * std::f64::consts::PI / ANGLES as f64 / s
}

fn seminorm_pow_2d(f: &Samples, sigma: f64, p: f64) -> f64 {
    let pw = Power::new(p);
    let (nx, ny, h) = (f.nx, f.ny, f.h);
    let sp = sigma * p;
    let e = -0.5 * (2.0 + sp);
    let v = &f.values;
    let periodic = f.ext == Extension::Periodic;
    let kernel = periodic.then(|| periodic_kernel_2d(nx, ny, sp));
    // offsets (ox, oy) with ox ≥ 0; ox = 0 uses oy > 0; each counted for both orders
    let rows: Vec<f64> = (0..nx)
        .into_par_iter()
        .map(|ox| {
            let mut acc = 0.0;
            let oy_range: Vec<isize> = if periodic {
                (0..ny as isize).collect()
            } else {
                (-(ny as isize) + 1..ny as isize).collect()
            };
            for oy in oy_range {
                if ox == 0 && oy <= 0 {
                    continue;
                }
                let mut s = 0.0;
                for i in 0..nx {
                    let i2 = i + ox;
                    let i2 = if periodic {
                        i2 % nx
                    } else if i2 >= nx {
                        break;
                    } else {
                        i2
                    };
                    for j in 0..ny {
                        let j2 = j as isize + oy;
                        let j2 = if periodic {
                            j2.rem_euclid(ny as isize) as usize
                        } else if j2 < 0 || j2 >= ny as isize {
                            continue;
                        } else {
                            j2 as usize
                        };
                        s += pw.of((v[i * ny + j] - v[i2 * ny + j2]).abs());
                    }
                }
                acc += s * match &kernel {
                    Some(k) => k[ox * ny + oy as usize],
                    None => ((ox * ox) as f64 + (oy * oy) as f64).powf(e),
                };
            }
            acc
        })
        .collect();
    let pairs = rows.iter().sum::<f64>() * h.powf(2.0 - sp);
    if periodic {
        // every nonzero cyclic offset was visited once, which already covers ordered pairs
        return pairs;
    }
    let mut total = 2.0 * pairs;
    let (wx, wy) = (nx as f64 * h, ny as f64 * h);
    let mut outside = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let m = pw.of(v[i * ny + j].abs());
            if m != 0.0 {
                let x = (i as f64 + 0.5) * h;
                let y = (j as f64 + 0.5) * h;
                outside += m * exterior_2d(x, y, wx, wy, sp);
            }
        }
    }
    total += 2.0 * outside * h * h;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hurwitz_zeta_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        // ζ(2, 1/2) = π²/2
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        // slowly decaying case against a long direct sum with an integral tail
        let (s, a) = (1.05, 0.3);
        let m = 200_000;
        let direct: f64 = (0..m).map(|k| (a + k as f64).powf(-s)).sum::<f64>()
            + (a + m as f64 - 0.5).powf(1.0 - s) / (s - 1.0);
        assert!((hurwitz_zeta(s, a) - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn periodic_kernel_matches_long_image_sum() {
        let (nx, ny, s) = (6, 4, 1.2);
        let k = periodic_kernel_2d(nx, ny, s);
        let e = -0.5 * (2.0 + s);
        let r = 200isize;
        for (ox, oy) in [(1usize, 0usize), (0, 1), (3, 2), (5, 3)] {
            let mut w = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    let x = ox as f64 + (a * nx as isize) as f64;
                    let y = oy as f64 + (b * ny as isize) as f64;
                    w += (x * x + y * y).powf(e);
                }
            }
            let half = r as f64 + 0.5;
            let (fx, fy) = (nx as f64, ny as f64);
            w += exterior_2d(half * fx - ox as f64, half * fy - oy as f64, 2.0 * half * fx, 2.0 * half * fy, s)
                / (fx * fy);
            let got = k[ox * ny + oy];
            assert!((got - w).abs() < 1e-4 * got, "{ox},{oy}: {got} vs {w}");
        }
    }
}
