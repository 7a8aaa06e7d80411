//! Numerical thresholds shared across the crate.

/// Margin by which every metric positivity constraint must hold.
pub const EPS_PD: f64 = 1e-8;

/// Solution threshold on each of the three residual blocks.
pub const TOL_SOL: f64 = 1e-9;

/// Threshold on `max |Ric_0|` for calling a metric Einstein.
pub const TOL_EINSTEIN: f64 = 1e-9;

/// Threshold on `|F|_g` for calling a 2-form trivial.
pub const TOL_TRIVIAL_F: f64 = 1e-9;

/// Tolerance for `J^2 = -1` and `g(J., J.) = g`.
pub const TOL_COMPAT: f64 = 1e-10;

/// Max-norm distance below which two solutions are the same point.
pub const DEDUP: f64 = 1e-4;

/// A "no solution found" verdict needs the best residual above this many `TOL_SOL`.
pub const NONEXIST_FACTOR: f64 = 100.0;
