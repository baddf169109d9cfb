//! Numerical laboratory for the porous medium equation
//! `∂t u − Δ(|u|^{m−1}u) = S`.
//!
//! The crate is organised by task:
//!
//! * [`exponents`]: closed-form regularity exponents and scaling admissibility.
//! * [`barenblatt`]: the self-similar source-type solution.
//! * [`grid`], [`solver`]: periodic grids, fields and an implicit conservative scheme.
//! * [`fourier`]: dyadic partitions of unity, block filtering, multiplier checks.
//! * [`norms`]: fractional Sobolev, Besov and space-time norms, refinement sweeps.
//! * [`kinetic`]: kinetic function and entropy defect measure.
//! * [`scaling`]: amplitude/time and amplitude/space rescalings.
//! * [`container`]: binary trajectory container.
//! * [`data`]: bump-shaped initial data and sources for experiments.

pub mod barenblatt;
pub mod container;
pub mod data;
pub mod error;
pub mod exponents;
pub mod fourier;
pub mod grid;
pub mod kinetic;
pub mod norms;
pub mod scaling;
pub mod solver;
pub mod stats;

pub use error::{PmeError, Result};
pub use grid::{Field, Grid, SpaceTimeField, TimeSampling};

/// Signed power `|u|^{m−1} u`.
#[inline]
pub fn signed_pow(u: f64, m: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(m)
    }
}
