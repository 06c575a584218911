//! Fourier-Bessel functions as the evolution `exp(-i t J) e_0`, their time
//! averages and position moments.

mod average;
mod bessel;
mod direct;
mod propagate;

pub use average::{
    gaussian_average, gaussian_sweep, sample_grid, truncated_moments, truncated_rows, AverageMode, SweepResult, TruncatedRow,
};
pub use bessel::{bessel_coefficients, bessel_j_sequence};
pub use direct::{fb_direct, DirectAmplitudes};
pub use propagate::{
    initial_truncation, position_moments, propagate, PropagationParams, Propagator, WavePacket,
};
