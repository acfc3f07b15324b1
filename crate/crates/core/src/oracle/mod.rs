//! Ground truth on small balls by exhaustive enumeration.
//!
//! On balls small enough that every (corruption, compass) assignment can be
//! visited, the one-arm probability, influences, revealments, and pivotal
//! probabilities are computed exactly in rational arithmetic. These values
//! back-stop the Monte Carlo estimators and turn the percolation
//! inequalities into zero-tolerance assertions.

mod audit;
mod engine;
mod poly;

pub use audit::{
    diff_ineq_audit, influence_pivotal_audit, osss_audit, revealment_sum_audit, russo_audit,
    AuditContext, AuditReport, AuditSuite,
};
pub use engine::{ExactEngine, DEFAULT_ENUMERATION_BITS, MAX_ENUMERATION_BITS};
pub use poly::{parse_rational, ThetaPolynomial};

use crate::error::Result;
use crate::lattice::{LatticeSpec, VertexId};
use num::BigRational;

/// One-arm probability on Λ_n as an exact polynomial in p.
pub fn exact_theta(spec: LatticeSpec, n: u32) -> Result<ThetaPolynomial> {
    Ok(ExactEngine::new(spec, n)?.theta_polynomial().clone())
}

/// Probability that independently resampling X_v changes the one-arm
/// indicator.
pub fn exact_influence(
    spec: LatticeSpec,
    n: u32,
    v: &VertexId,
    p: &BigRational,
) -> Result<BigRational> {
    ExactEngine::new(spec, n)?.influence(v, p)
}

/// Probability that the tree seeded at ∂Λ_k reveals X_v.
pub fn exact_revealment(
    spec: LatticeSpec,
    n: u32,
    k: u32,
    v: &VertexId,
    p: &BigRational,
) -> Result<BigRational> {
    ExactEngine::new(spec, n)?.revealment(k, v, p)
}

/// Probability that flipping v's corruption status changes the one-arm
/// indicator.
pub fn exact_pivotal(
    spec: LatticeSpec,
    n: u32,
    v: &VertexId,
    p: &BigRational,
) -> Result<BigRational> {
    ExactEngine::new(spec, n)?.pivotal(v, p)
}
