//! Corrupted compass percolation.
//!
//! Each lattice vertex draws an independent uniform mark and a compass
//! pointing at one of its incident edges. Vertices with mark below the
//! corruption parameter p open every incident edge; the others open only the
//! compass edge. This crate provides the sampler, cluster exploration (direct
//! breadth-first search and the sphere-seeded decision tree), an exact
//! enumeration oracle with rational arithmetic for small balls, and Monte
//! Carlo analysis tools for locating and characterizing the phase transition.

pub mod error;
pub mod rng;

pub mod analysis;
pub mod exploration;
pub mod lattice;
pub mod model;
pub mod oracle;

pub use analysis::{
    bound_constants, construction_check, decay_fit, mc_theta, mean_field_check, pc_estimate,
    sn_series, theta_sweep, DecayFit, MeanFieldCheck, PcEstimate, SnSeries, SweepResult,
    ThetaEstimate,
};
pub use error::{Error, Result};
pub use exploration::{cluster_of, one_arm_direct, run_decision_tree, ArmResult, RevealLog};
pub use lattice::{EdgeId, LatticeSpec, Region, VertexId};
pub use model::{CompassState, CompassVariable, Configuration, ExplicitState};
pub use oracle::{exact_theta, AuditReport, AuditSuite, ExactEngine, ThetaPolynomial};
