//! Exact audits of the identities and inequalities behind the sharp
//! threshold argument: the variance bound against revealment-weighted
//! influences, the derivative identity for pivotal flips, the cumulative
//! revealment bound, and the differential inequality they combine into.
//! Every quantity is an exact rational; `holds` is decided with zero
//! tolerance, so any violation is an implementation bug by construction.

use crate::error::Result;
use crate::lattice::{LatticeSpec, VertexId};
use crate::oracle::engine::ExactEngine;
use crate::oracle::poly::{check_probability, ThetaPolynomial};
use num::BigRational;
use serde_json::json;

#[derive(Clone, Debug)]
pub struct AuditContext {
    pub spec: LatticeSpec,
    pub n: u32,
    pub k: Option<u32>,
    pub p: BigRational,
    pub v: Option<VertexId>,
}

/// One audited identity or inequality, stated as lhs ≤ rhs (equalities
/// report slack exactly zero).
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub name: String,
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
    pub slack: BigRational,
    pub context: AuditContext,
}

impl AuditReport {
    fn equality(name: &str, context: AuditContext, lhs: BigRational, rhs: BigRational) -> Self {
        let holds = lhs == rhs;
        let slack = &rhs - &lhs;
        AuditReport {
            name: name.into(),
            lhs,
            rhs,
            holds,
            slack,
            context,
        }
    }

    fn at_most(name: &str, context: AuditContext, lhs: BigRational, rhs: BigRational) -> Self {
        let holds = lhs <= rhs;
        let slack = &rhs - &lhs;
        AuditReport {
            name: name.into(),
            lhs,
            rhs,
            holds,
            slack,
            context,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "name": self.name,
            "lhs": self.lhs.to_string(),
            "rhs": self.rhs.to_string(),
            "holds": self.holds,
            "slack": self.slack.to_string(),
            "context": {
                "spec": serde_json::to_value(self.context.spec).expect("spec serializes"),
                "n": self.context.n,
                "k": self.context.k,
                "p": self.context.p.to_string(),
                "v": self.context.v.as_ref().map(|v| v.coords().to_vec()),
            },
        })
    }
}

/// Shared engine state for auditing one (lattice, n): the radius-n engine
/// plus exact one-arm polynomials for every k ≤ n (the cumulative sum S_n).
pub struct AuditSuite {
    engine: ExactEngine,
    thetas: Vec<ThetaPolynomial>,
}

impl AuditSuite {
    pub fn new(spec: LatticeSpec, n: u32) -> Result<Self> {
        Self::with_budget(spec, n, super::engine::DEFAULT_ENUMERATION_BITS)
    }

    pub fn with_budget(spec: LatticeSpec, n: u32, max_bits: f64) -> Result<Self> {
        let engine = ExactEngine::with_budget(spec, n, max_bits)?;
        let mut thetas = Vec::with_capacity(n as usize);
        for k in 1..=n {
            // Each θ_k lives on its own radius-k ball; these are strictly
            // smaller enumerations than the radius-n one just admitted.
            let sub = ExactEngine::with_budget(spec, k, max_bits)?;
            thetas.push(sub.theta_polynomial().clone());
        }
        Ok(AuditSuite { engine, thetas })
    }

    pub fn engine(&self) -> &ExactEngine {
        &self.engine
    }

    fn context(&self, k: Option<u32>, p: &BigRational, v: Option<VertexId>) -> AuditContext {
        AuditContext {
            spec: self.engine.region().spec(),
            n: self.engine.radius(),
            k,
            p: p.clone(),
            v,
        }
    }

    /// Σ_{k=1..n} θ_k(p), exact.
    pub fn cumulative_theta(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::from_integer(0.into());
        for poly in &self.thetas {
            acc += poly.evaluate(p);
        }
        acc
    }

    /// Derivative identity: θ_n'(p) equals the total probability of a
    /// corruption-flip being pivotal. Exact equality, slack zero.
    pub fn russo(&self, p: &BigRational) -> Result<AuditReport> {
        check_probability(p)?;
        let lhs = self.engine.theta_derivative_at(p)?;
        let rhs = self.engine.sum_pivotal(p)?;
        Ok(AuditReport::equality(
            "russo",
            self.context(None, p, None),
            lhs,
            rhs,
        ))
    }

    /// Variance bound: θ_n(1-θ_n) ≤ Σ_v Rev_v(T_k) · Inf_v.
    pub fn osss(&self, k: u32, p: &BigRational) -> Result<AuditReport> {
        check_probability(p)?;
        let theta = self.engine.theta_at(p)?;
        let lhs = &theta * (BigRational::from_integer(1.into()) - &theta);
        let rhs = self.engine.revealment_influence_sum(k, p)?;
        Ok(AuditReport::at_most(
            "osss",
            self.context(Some(k), p, None),
            lhs,
            rhs,
        ))
    }

    /// Cumulative revealment bound: Σ_{k=1..n} Rev_v(T_k) ≤ 2d Σ_{k≤n} θ_k.
    pub fn revealment_sum(&self, v: &VertexId, p: &BigRational) -> Result<AuditReport> {
        check_probability(p)?;
        let n = self.engine.radius();
        let mut lhs = BigRational::from_integer(0.into());
        for k in 1..=n {
            lhs += self.engine.revealment(k, v, p)?;
        }
        let two_d = BigRational::from_integer((2 * self.engine.region().degree()).into());
        let rhs = two_d * self.cumulative_theta(p);
        Ok(AuditReport::at_most(
            "revealment_sum",
            self.context(None, p, Some(v.clone())),
            lhs,
            rhs,
        ))
    }

    /// Influence-to-pivotality bound: (1/2) Σ_v Inf_v ≤ θ_n'(p).
    pub fn influence_pivotal(&self, p: &BigRational) -> Result<AuditReport> {
        check_probability(p)?;
        let half = BigRational::new(1.into(), 2.into());
        let lhs = half * self.engine.sum_influence(p)?;
        let rhs = self.engine.theta_derivative_at(p)?;
        Ok(AuditReport::at_most(
            "influence_pivotal",
            self.context(None, p, None),
            lhs,
            rhs,
        ))
    }

    /// Differential inequality: θ_n' ≥ (n / (4 d S_n)) θ_n (1 - θ_n).
    pub fn diff_inequality(&self, p: &BigRational) -> Result<AuditReport> {
        check_probability(p)?;
        let n = self.engine.radius();
        let d = self.engine.region().degree();
        let s_n = self.cumulative_theta(p);
        let theta = self.engine.theta_at(p)?;
        let factor = BigRational::new(n.into(), (4 * d).into()) / s_n;
        let lhs = factor * &theta * (BigRational::from_integer(1.into()) - &theta);
        let rhs = self.engine.theta_derivative_at(p)?;
        Ok(AuditReport::at_most(
            "diff_inequality",
            self.context(None, p, None),
            lhs,
            rhs,
        ))
    }

    /// Every audit at one p: the derivative identity, the variance bound for
    /// each k, the cumulative revealment bound for each vertex, and the two
    /// influence bounds.
    pub fn all(&self, p: &BigRational) -> Result<Vec<AuditReport>> {
        let n = self.engine.radius();
        let mut out = Vec::new();
        out.push(self.russo(p)?);
        for k in 1..=n {
            out.push(self.osss(k, p)?);
        }
        for v in self.engine.region().vertices().to_vec() {
            out.push(self.revealment_sum(&v, p)?);
        }
        out.push(self.influence_pivotal(p)?);
        out.push(self.diff_inequality(p)?);
        Ok(out)
    }
}

pub fn russo_audit(spec: LatticeSpec, n: u32, p: &BigRational) -> Result<AuditReport> {
    AuditSuite::new(spec, n)?.russo(p)
}

pub fn osss_audit(spec: LatticeSpec, n: u32, k: u32, p: &BigRational) -> Result<AuditReport> {
    AuditSuite::new(spec, n)?.osss(k, p)
}

pub fn revealment_sum_audit(
    spec: LatticeSpec,
    n: u32,
    v: &VertexId,
    p: &BigRational,
) -> Result<AuditReport> {
    AuditSuite::new(spec, n)?.revealment_sum(v, p)
}

pub fn influence_pivotal_audit(spec: LatticeSpec, n: u32, p: &BigRational) -> Result<AuditReport> {
    AuditSuite::new(spec, n)?.influence_pivotal(p)
}

pub fn diff_ineq_audit(spec: LatticeSpec, n: u32, p: &BigRational) -> Result<AuditReport> {
    AuditSuite::new(spec, n)?.diff_inequality(p)
}
