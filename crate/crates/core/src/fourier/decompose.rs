//! Littlewood–Paley block filtering of fields and trajectories.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PmeError, Result};
use crate::grid::{Field, SpaceTimeField};

use super::partition::{time_window, DyadicPartition};
use super::transform::{fft_nd, to_complex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Space,
    Time,
    Mixed,
}

/// Block label: spatial index `j`, temporal index `l`, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockIndex {
    Space(i32),
    Time(i32),
    Mixed(i32, i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub index: BlockIndex,
    pub values: Vec<f64>,
}

/// Filtered pieces of a source array. `Σ blocks + residual` reproduces the
/// source (after the temporal window, for time and mixed axes).
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub axis: Axis,
    pub blocks: Vec<Block>,
    pub residual: Vec<f64>,
    /// The array that was decomposed.
    pub source: Vec<f64>,
}

impl DyadicDecomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for b in &self.blocks {
            for (o, v) in out.iter_mut().zip(&b.values) {
                *o += v;
            }
        }
        out
    }

    /// `‖Σ blocks + residual − source‖₂ / ‖source‖₂` (zero for a zero source).
    pub fn reconstruction_error(&self) -> f64 {
        let rec = self.reconstruct();
        let num: f64 = rec.iter().zip(&self.source).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = self.source.iter().map(|v| v * v).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    pub fn block(&self, index: BlockIndex) -> Option<&Block> {
        self.blocks.iter().find(|b| b.index == index)
    }
}

fn filter(spectrum: &[Complex64], weights: &[f64], shape: &[usize]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = spectrum.iter().zip(weights).map(|(c, w)| c * *w).collect();
    fft_nd(&mut buf, shape, true);
    buf.iter().map(|c| c.re).collect()
}

fn space_shape(field_dim: usize, n: usize) -> Vec<usize> {
    vec![n; field_dim]
}

/// Spatial blocks of a field.
pub fn decompose_field(field: &Field, partition: &DyadicPartition) -> Result<DyadicDecomposition> {
    if partition.magnitudes.len() != field.values.len() {
        return Err(PmeError::mismatch("partition was built for a different grid"));
    }
    let shape = space_shape(field.grid.dim(), field.grid.n());
    let mut spec = to_complex(&field.values);
    fft_nd(&mut spec, &shape, false);
    let blocks = partition
        .indices()
        .map(|j| Block {
            index: BlockIndex::Space(j),
            values: filter(&spec, &partition.tabulate(j), &shape),
        })
        .collect();
    Ok(DyadicDecomposition {
        axis: Axis::Space,
        blocks,
        residual: filter(&spec, &partition.tabulate_residual(), &shape),
        source: field.values.clone(),
    })
}

/// Trajectory multiplied by the smooth temporal window vanishing at both ends.
pub fn windowed(field: &SpaceTimeField) -> Vec<f64> {
    let a = field.t_start;
    let b = field.t_start + field.duration();
    let cells = field.grid.cells();
    let mut out = field.values.clone();
    for n in 0..field.n_t() {
        let w = time_window(field.time(n), a, b);
        for v in &mut out[n * cells..(n + 1) * cells] {
            *v *= w;
        }
    }
    out
}

/// Blocks of a trajectory along space (slice by slice), time, or both.
///
/// Time and mixed axes first apply the temporal window and treat the result
/// as periodic in time; the decomposition's `source` is the windowed array.
pub fn decompose_spacetime(
    field: &SpaceTimeField,
    space: &DyadicPartition,
    time: &DyadicPartition,
    axis: Axis,
) -> Result<DyadicDecomposition> {
    let cells = field.grid.cells();
    let n_t = field.n_t();
    if space.magnitudes.len() != cells {
        return Err(PmeError::mismatch("spatial partition was built for a different grid"));
    }
    if time.magnitudes.len() != n_t && axis != Axis::Space {
        return Err(PmeError::mismatch("temporal partition was built for a different length"));
    }
    let mut shape = vec![n_t];
    shape.extend(space_shape(field.grid.dim(), field.grid.n()));

    let source = if axis == Axis::Space {
        field.values.clone()
    } else {
        windowed(field)
    };
    let mut spec = to_complex(&source);
    match axis {
        Axis::Space => {
            // spatial transform only: treat each slice independently
            for n in 0..n_t {
                fft_nd(&mut spec[n * cells..(n + 1) * cells], &shape[1..], false);
            }
        }
        _ => fft_nd(&mut spec, &shape, false),
    }

    let spatial_w = |j: i32| space.tabulate(j);
    let temporal_w = |l: i32| time.tabulate(l);
    let expand = |wt: &[f64], wx: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(n_t * cells);
        for n in 0..n_t {
            for i in 0..cells {
                out.push(wt[n] * wx[i]);
            }
        }
        out
    };
    let ones_t = vec![1.0; n_t];
    let ones_x = vec![1.0; cells];

    let inverse = |weights: &[f64]| -> Vec<f64> {
        let mut buf: Vec<Complex64> = spec.iter().zip(weights).map(|(c, w)| c * *w).collect();
        match axis {
            Axis::Space => {
                for n in 0..n_t {
                    fft_nd(&mut buf[n * cells..(n + 1) * cells], &shape[1..], true);
                }
            }
            _ => fft_nd(&mut buf, &shape, true),
        }
        buf.iter().map(|c| c.re).collect()
    };

    let mut blocks = Vec::new();
    let residual_weights: Vec<f64>;
    match axis {
        Axis::Space => {
            for j in space.indices() {
                blocks.push(Block {
                    index: BlockIndex::Space(j),
                    values: inverse(&expand(&ones_t, &spatial_w(j))),
                });
            }
            residual_weights = expand(&ones_t, &space.tabulate_residual());
        }
        Axis::Time => {
            for l in time.indices() {
                blocks.push(Block {
                    index: BlockIndex::Time(l),
                    values: inverse(&expand(&temporal_w(l), &ones_x)),
                });
            }
            residual_weights = expand(&time.tabulate_residual(), &ones_x);
        }
        Axis::Mixed => {
            let wx: Vec<(i32, Vec<f64>)> = space.indices().map(|j| (j, spatial_w(j))).collect();
            for l in time.indices() {
                let wt = temporal_w(l);
                for (j, w) in &wx {
                    blocks.push(Block {
                        index: BlockIndex::Mixed(l, *j),
                        values: inverse(&expand(&wt, w)),
                    });
                }
            }
            let rt = time.tabulate_residual();
            let rx = space.tabulate_residual();
            residual_weights = (0..n_t * cells)
                .map(|k| {
                    let a = 1.0 - rt[k / cells];
                    let b = 1.0 - rx[k % cells];
                    1.0 - a * b
                })
                .collect();
        }
    }
    let residual = inverse(&residual_weights);
    Ok(DyadicDecomposition {
        axis,
        blocks,
        residual,
        source,
    })
}

/// Frequency-domain energy `(h^d/N) Σ |f̂_k|²`, equal to `‖f‖₂²` by Parseval.
pub fn spectral_energy(field: &Field) -> f64 {
    let shape = space_shape(field.grid.dim(), field.grid.n());
    let mut spec = to_complex(&field.values);
    fft_nd(&mut spec, &shape, false);
    spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * field.grid.cell_volume()
        / field.values.len() as f64
}
