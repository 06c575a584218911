//! Scaling exponents and the experiments built on them.

mod experiments;
mod exponents;
mod fit;
mod source;

pub use experiments::{
    barrier_experiment, class_member, equivalence_class_experiment, three_map, three_map_counterexample,
    verify_julia_relation, barrier_bound, class_dimension, BarrierResult, BarrierRow, ClassResult, JuliaRow, ThreeMapResult,
};
pub use exponents::{
    d2_decay_check, fit_beta, fit_ketzmerick_gamma, fit_wavefront, front_position, order_decay, reference_dimension,
    Averaging, BetaCurve, D2Decay, FrontTrace, KetzmerickFit, OrderDecay, SurfacePoint, Wavefront,
    DEFAULT_FRONT_EPSILON, MASK_CEILING, MASK_FLOOR, REFERENCE_LEVELS,
};
pub use fit::{fit_power_law, linear_fit, plane_fit, FitWindow, LineFit, ScalingFit};
pub use source::{run_packets, run_sweep, Operator, PacketSeries, SweepOptions};
