//! Discrete Fourier machinery: dyadic partitions of unity, Littlewood–Paley
//! blocks in space, time and space-time, and checks on the kinetic symbol.

pub mod decompose;
pub mod multiplier;
pub mod partition;
pub mod transform;

pub use decompose::{
    decompose_field, decompose_spacetime, spectral_energy, Axis, Block, BlockIndex,
    DyadicDecomposition,
};
pub use multiplier::{
    verify_multiplier_bound, verify_uniform_multiplier, KernelGrid, MultiIndex,
    MultiplierEstimate, SampleSpec, Symbol, UniformTable,
};
pub use partition::{build_partition, build_time_partition, DyadicPartition, PartitionMode};
