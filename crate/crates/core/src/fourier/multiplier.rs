//! Numerical checks on the kinetic symbol `L(iτ, iξ, v) = iτ + |v|^{m−1}|ξ|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PmeError, Result};

use super::partition::widened_annulus;
use super::transform::{angular_frequencies, fft_nd};

/// Derivative orders in `τ` and in each component of `ξ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiIndex {
    pub tau: u32,
    pub xi: Vec<u32>,
}

impl MultiIndex {
    pub fn new(tau: u32, xi: &[u32]) -> Self {
        MultiIndex {
            tau,
            xi: xi.to_vec(),
        }
    }

    pub fn order(&self) -> u32 {
        self.tau + self.xi.iter().sum::<u32>()
    }
}

/// Sample points `(τ, ξ, v)`; every combination is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSpec {
    pub taus: Vec<f64>,
    pub xis: Vec<Vec<f64>>,
    pub vs: Vec<f64>,
}

fn log_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let s = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            10f64.powf(lo + s * (hi - lo))
        })
        .collect()
}

impl SampleSpec {
    /// Log-spaced magnitudes `10^{−decades}..10^{decades}` with `per_decade` points
    /// per decade, both signs of `τ`, and several `ξ` directions in two dimensions.
    pub fn log_grid(dim: usize, decades: f64, per_decade: usize, vs: &[f64]) -> Self {
        let count = (2.0 * decades * per_decade as f64).round() as usize + 1;
        let mags = log_points(-decades, decades, count);
        let mut taus: Vec<f64> = mags.iter().map(|t| -t).collect();
        taus.extend(&mags);
        let xis = if dim == 1 {
            mags.iter().map(|&r| vec![r]).collect()
        } else {
            let mut out = Vec::new();
            for &r in &mags {
                for k in 0..5 {
                    let a = std::f64::consts::FRAC_PI_2 * k as f64 / 4.0 + 0.1;
                    out.push(vec![r * a.cos(), r * a.sin()]);
                }
            }
            out
        };
        SampleSpec {
            taus,
            xis,
            vs: vs.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierEstimate {
    /// Largest `|∂^α(1/L)|·|L|·|τ|^{α_τ}|ξ|^{|α_ξ|}` over the samples.
    pub max_constant: f64,
    pub argmax: (f64, Vec<f64>, f64),
    pub samples: usize,
}

fn inv_symbol(m: f64, tau: f64, xi: &[f64], v: f64) -> Complex64 {
    let r2: f64 = xi.iter().map(|x| x * x).sum();
    Complex64::new(v.abs().powf(m - 1.0) * r2, tau).inv()
}

/// Second-order central stencil for the `k`-th derivative: (offset, weight).
fn stencil(k: u32) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
    }
}

/// Tensor-product central difference of `1/L` with relative step `rel`.
fn difference(m: f64, alpha: &MultiIndex, tau: f64, xi: &[f64], v: f64, rel: f64) -> Complex64 {
    let ht = rel * tau.abs();
    let hx = rel * xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    let st = stencil(alpha.tau);
    let sx: Vec<&[(i32, f64)]> = alpha.xi.iter().map(|&k| stencil(k)).collect();
    let mut idx = vec![0usize; sx.len()];
    let mut point = xi.to_vec();
    loop {
        let mut w_x = 1.0;
        for (c, &i) in idx.iter().enumerate() {
            let (off, w) = sx[c][i];
            point[c] = xi[c] + off as f64 * hx;
            w_x *= w;
        }
        for &(off, w) in st {
            total += inv_symbol(m, tau + off as f64 * ht, &point, v) * (w * w_x);
        }
        // advance the mixed-radix counter over ξ stencils
        let mut c = 0;
        loop {
            if c == idx.len() {
                let scale = ht.powi(alpha.tau as i32)
                    * alpha.xi.iter().map(|&k| hx.powi(k as i32)).product::<f64>();
                return total / scale;
            }
            idx[c] += 1;
            if idx[c] < sx[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Richardson-validated derivative of `1/L`.
fn derivative(m: f64, alpha: &MultiIndex, tau: f64, xi: &[f64], v: f64) -> Result<Complex64> {
    if alpha.order() == 0 {
        return Ok(inv_symbol(m, tau, xi, v));
    }
    let r = 0.04;
    let d1 = difference(m, alpha, tau, xi, v, r);
    let d2 = difference(m, alpha, tau, xi, v, r / 2.0);
    let d3 = difference(m, alpha, tau, xi, v, r / 4.0);
    let e1 = (d1 - d2).norm();
    let e2 = (d2 - d3).norm();
    let xi_norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = inv_symbol(m, tau, xi, v).norm()
        * tau.abs().powi(-(alpha.tau as i32))
        * xi_norm.powi(-(alpha.xi.iter().sum::<u32>() as i32));
    if e1 > 1e-7 * scale {
        let ratio = e1 / e2;
        if !(3.6..=4.4).contains(&ratio) {
            return Err(PmeError::FiniteDifference(format!(
                "Richardson ratio {ratio:.3} at tau={tau:e}, |xi|={xi_norm:e}, v={v}"
            )));
        }
    }
    Ok(d3 + (d3 - d2) / 3.0)
}

/// Largest normalised derivative of `1/L` over the samples.
pub fn verify_multiplier_bound(
    m: f64,
    alpha: &MultiIndex,
    samples: &SampleSpec,
) -> Result<MultiplierEstimate> {
    if !(m > 1.0) {
        return Err(PmeError::domain("nonlinearity must exceed 1"));
    }
    if alpha.order() > 4 || alpha.xi.is_empty() || alpha.xi.len() > 2 {
        return Err(PmeError::domain("multi-index must have order at most 4 in 1 or 2 space dims"));
    }
    let mut best = MultiplierEstimate {
        max_constant: 0.0,
        argmax: (0.0, vec![], 0.0),
        samples: 0,
    };
    for &tau in &samples.taus {
        for xi in &samples.xis {
            if xi.len() != alpha.xi.len() {
                return Err(PmeError::mismatch("sample dimension differs from the multi-index"));
            }
            let xi_norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            if tau == 0.0 || xi_norm == 0.0 {
                return Err(PmeError::domain("samples must avoid tau = 0 and xi = 0"));
            }
            for &v in &samples.vs {
                let d = derivative(m, alpha, tau, xi, v)?;
                let l = inv_symbol(m, tau, xi, v).inv();
                let c = d.norm()
                    * l.norm()
                    * tau.abs().powi(alpha.tau as i32)
                    * xi_norm.powi(alpha.xi.iter().sum::<u32>() as i32);
                if !c.is_finite() {
                    return Err(PmeError::FiniteDifference("non-finite estimate".into()));
                }
                best.samples += 1;
                if c > best.max_constant {
                    best.max_constant = c;
                    best.argmax = (tau, xi.clone(), v);
                }
            }
        }
    }
    Ok(best)
}

/// Multipliers whose localised kernels are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Symbol {
    Zero,
    One,
    /// `1/L(iτ, iξ, v)`; with `normalized` each block is multiplied by
    /// `|L|` at the block centre `(2^l, 2^j)`, making it an order-zero symbol.
    InvL { m: f64, v: f64, normalized: bool },
}

impl Symbol {
    fn eval(&self, tau: f64, xi: f64) -> Complex64 {
        match *self {
            Symbol::Zero => Complex64::new(0.0, 0.0),
            Symbol::One => Complex64::new(1.0, 0.0),
            Symbol::InvL { m, v, .. } => inv_symbol(m, tau, &[xi], v),
        }
    }

    fn block_scale(&self, l: i32, j: i32) -> f64 {
        match *self {
            Symbol::InvL {
                m,
                v,
                normalized: true,
            } => inv_symbol(m, 2f64.powi(l), &[2f64.powi(j)], v).inv().norm(),
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEntry {
    pub l: i32,
    pub j: i32,
    pub l1_norm: f64,
    pub edge_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformTable {
    pub entries: Vec<KernelEntry>,
    /// max/min of the kernel norms (1 when all are zero).
    pub ratio: f64,
}

/// Resolution of the padded frequency grid used for kernel norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelGrid {
    /// Points per axis.
    pub points: usize,
    /// Half-width of the frequency box.
    pub omega: f64,
}

impl Default for KernelGrid {
    fn default() -> Self {
        KernelGrid {
            points: 1024,
            omega: 4.5,
        }
    }
}

/// L¹ norms of `F⁻¹[η̃_l φ̃_j m]` in one space dimension.
///
/// Each block is evaluated after the dilation `(τ, ξ) → (2^l τ, 2^j ξ)`,
/// which leaves kernel L¹ norms unchanged, so every block uses the same
/// padded grid. Kernel mass beyond 40% of the half-period in either
/// direction above 1% of the total is reported as aliasing.
pub fn verify_uniform_multiplier(
    symbol: Symbol,
    l_range: std::ops::RangeInclusive<i32>,
    j_range: std::ops::RangeInclusive<i32>,
    grid: KernelGrid,
) -> Result<UniformTable> {
    let n = grid.points;
    if n < 32 || !n.is_power_of_two() {
        return Err(PmeError::domain("kernel grid needs a power of two of at least 32 points"));
    }
    let dw = 2.0 * grid.omega / n as f64;
    let freqs = angular_frequencies(n, 2.0 * std::f64::consts::PI / (n as f64 * dw));
    let dx = 2.0 * std::f64::consts::PI / (n as f64 * dw);
    let eta: Vec<f64> = freqs.iter().map(|&t| widened_annulus(0, t.abs())).collect();
    let norm_factor = (dw / (2.0 * std::f64::consts::PI)).powi(2) * (n * n) as f64;

    let mut entries = Vec::new();
    for l in l_range {
        for j in j_range.clone() {
            let sl = 2f64.powi(l);
            let sj = 2f64.powi(j);
            let scale = symbol.block_scale(l, j);
            let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
            for a in 0..n {
                if eta[a] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    if eta[b] == 0.0 {
                        continue;
                    }
                    buf[a * n + b] = symbol.eval(sl * freqs[a], sj * freqs[b]) * (eta[a] * eta[b] * scale);
                }
            }
            fft_nd(&mut buf, &[n, n], true);
            let mut total = 0.0;
            let mut edge = 0.0;
            let cut = (0.4 * n as f64 / 2.0) as usize;
            for a in 0..n {
                let da = a.min(n - a);
                for b in 0..n {
                    let db = b.min(n - b);
                    let v = buf[a * n + b].norm();
                    total += v;
                    if da > cut || db > cut {
                        edge += v;
                    }
                }
            }
            let l1 = total * norm_factor * dx * dx;
            let edge_share = if total > 0.0 { edge / total } else { 0.0 };
            if edge_share > 0.01 {
                return Err(PmeError::Aliasing { edge_share });
            }
            entries.push(KernelEntry {
                l,
                j,
                l1_norm: l1,
                edge_share,
            });
        }
    }
    let max = entries.iter().map(|e| e.l1_norm).fold(0.0, f64::max);
    let min = entries.iter().map(|e| e.l1_norm).fold(f64::INFINITY, f64::min);
    let ratio = if max == 0.0 { 1.0 } else { max / min };
    Ok(UniformTable { entries, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_exactly_one() {
        let s = SampleSpec::log_grid(1, 2.0, 2, &[0.5, 1.0, 2.0]);
        let e = verify_multiplier_bound(2.0, &MultiIndex::new(0, &[0]), &s).unwrap();
        assert!((e.max_constant - 1.0).abs() < 1e-14);
    }

    #[test]
    fn time_derivative_is_bounded_by_one() {
        let s = SampleSpec::log_grid(1, 2.0, 3, &[0.0, 0.5, 1.0, 2.0]);
        let e = verify_multiplier_bound(3.0, &MultiIndex::new(1, &[0]), &s).unwrap();
        assert!(e.max_constant <= 1.0 + 1e-6 && e.max_constant > 0.9);
    }

    #[test]
    fn second_space_derivative_matches_closed_form() {
        let (m, tau, xi, v): (f64, f64, f64, f64) = (2.0, 0.7, 1.3, 1.1);
        let a = v.powf(m - 1.0);
        let l = Complex64::new(a * xi * xi, tau);
        let exact = -2.0 * a / (l * l) + 8.0 * a * a * xi * xi / (l * l * l);
        let d = derivative(m, &MultiIndex::new(0, &[2]), tau, &[xi], v).unwrap();
        let rel = (d - exact).norm() / exact.norm();
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn zero_symbol_has_zero_kernels() {
        let t = verify_uniform_multiplier(Symbol::Zero, -1..=1, -1..=1, KernelGrid { points: 64, omega: 4.5 })
            .unwrap();
        assert!(t.entries.iter().all(|e| e.l1_norm == 0.0));
        assert_eq!(t.ratio, 1.0);
    }
}
