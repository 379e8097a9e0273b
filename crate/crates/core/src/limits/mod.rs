//! Limit curves through generator-based parametrizations, and empirical
//! cross-checks of certified regularity.

mod empirical;
mod generator;
mod sampling;

pub use empirical::{derivative_floor, empirical_holder, empirical_kappa_decay, HolderEstimate, KappaDecay};
pub use generator::{BSpline, Generator, Hat};
pub use sampling::{eval_curve, limit_samples, min_level, parameter_interval, svg_polylines, SampledCurve};
