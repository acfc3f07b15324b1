//! Monte Carlo estimation and statistical post-processing.
//!
//! Everything here is deterministic given (lattice, parameters, seed):
//! replica randomness comes from counter-based streams keyed off the
//! master seed, and parallel reductions are integer sums, so the thread
//! count never changes a result.

mod bounds;
mod fit;
mod io;
mod mc;

pub use bounds::{bound_constants, construction_check, BoundConstants, ConstructionCheck};
pub use fit::{
    decay_fit, decay_fit_points, mean_field_check, pc_estimate, sn_series, DecayFit,
    MeanFieldCheck, PcEstimate, SnSeries,
};
pub use io::{read_sweep_csv, sweep_to_csv, to_compact_json, to_json_string, write_sweep_csv};
pub use mc::{mc_theta, theta_sweep, SweepResult, ThetaEstimate};
