//! The corrupted compass measure on a finite region.
//!
//! Every vertex v carries X_v = (U_v, A_v): U_v uniform on [0,1) and A_v a
//! uniform slot among its d incident edges, all independent. At parameter p
//! the corrupted set is K = {v : U_v < p}. An edge is open when either
//! endpoint is corrupted or either endpoint's compass points along it.
//!
//! A [`Configuration`] never materializes its variables: X_v is a pure
//! function of (seed, vertex index) through the counter-based generator, so
//! revealing is lazy and large regions stay cheap. [`ExplicitState`] holds
//! concrete corruption bits and compasses instead; the exact oracle mutates
//! one in place while enumerating.

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, Region, VertexId, NO_NEIGHBOR};
use crate::rng::{tags, Prf};
use std::sync::Arc;

/// One vertex's randomness: uniform mark and compass slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompassVariable {
    pub u: f64,
    pub a: u8,
}

/// Anything that exposes per-vertex corruption and compass over a region.
pub trait CompassState {
    fn region(&self) -> &Region;
    fn corrupted(&self, idx: usize) -> bool;
    fn compass(&self, idx: usize) -> u8;
}

/// Open/closed state of the edge at slot `j` of vertex `idx`; `None` when the
/// other endpoint is outside the region.
#[inline]
pub fn edge_open_by_slot<S: CompassState + ?Sized>(
    state: &S,
    idx: usize,
    j: usize,
) -> Option<bool> {
    let region = state.region();
    let w = region.neighbor(idx, j);
    if w == NO_NEIGHBOR {
        return None;
    }
    let w = w as usize;
    Some(
        state.corrupted(idx)
            || state.corrupted(w)
            || state.compass(idx) as usize == j
            || state.compass(w) == region.opposite(j),
    )
}

/// A sampled configuration: region, corruption parameter, seed. Variables are
/// derived on demand; identical (region, p, seed) always reproduce the same
/// configuration bit for bit.
#[derive(Clone)]
pub struct Configuration {
    region: Arc<Region>,
    p: f64,
    seed: u64,
    u_prf: Prf,
    a_prf: Prf,
    degree: u8,
}

impl Configuration {
    pub fn sample(region: Arc<Region>, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("p = {p} must lie in [0, 1]")));
        }
        let prf = Prf::new(seed);
        let degree = region.degree() as u8;
        Ok(Configuration {
            region,
            p,
            seed,
            u_prf: prf.stream(tags::UNIFORM),
            a_prf: prf.stream(tags::COMPASS),
            degree,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region_arc(&self) -> &Arc<Region> {
        &self.region
    }

    /// X_v for the vertex at `idx`.
    #[inline]
    pub fn var(&self, idx: usize) -> CompassVariable {
        CompassVariable {
            u: self.u_prf.unit_f64(idx as u64),
            a: self.a_prf.below(idx as u64, self.degree),
        }
    }

    pub fn var_of(&self, v: &VertexId) -> Result<CompassVariable> {
        let idx = self
            .region
            .index_of(v)
            .ok_or_else(|| Error::OutOfRegion(v.to_string()))?;
        Ok(self.var(idx))
    }

    /// Same variables, different corruption parameter. Since corruption is
    /// the event U_v < p, the open edge set is monotone in p under this
    /// coupling.
    pub fn with_parameter(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("p = {p} must lie in [0, 1]")));
        }
        let mut c = self.clone();
        c.p = p;
        Ok(c)
    }

    /// Vertices with U_v < p, in region order.
    pub fn corrupted_set(&self) -> Vec<VertexId> {
        (0..self.region.len())
            .filter(|&i| self.corrupted(i))
            .map(|i| self.region.vertex(i).clone())
            .collect()
    }

    pub fn edge_state(&self, e: &EdgeId) -> Result<bool> {
        EdgeStateView::new(self).open(e)
    }

    pub fn open_edges(&self) -> Vec<EdgeId> {
        EdgeStateView::new(self).open_edges()
    }
}

impl CompassState for Configuration {
    #[inline]
    fn region(&self) -> &Region {
        &self.region
    }

    #[inline]
    fn corrupted(&self, idx: usize) -> bool {
        self.u_prf.unit_f64(idx as u64) < self.p
    }

    #[inline]
    fn compass(&self, idx: usize) -> u8 {
        self.a_prf.below(idx as u64, self.degree)
    }
}

/// Concrete per-vertex state; used by the exact oracle, pinned-construction
/// checks and tests.
#[derive(Clone)]
pub struct ExplicitState {
    region: Arc<Region>,
    pub(crate) corrupted: Vec<bool>,
    pub(crate) compass: Vec<u8>,
}

impl ExplicitState {
    /// All vertices uncorrupted, all compasses at slot 0.
    pub fn new(region: Arc<Region>) -> Self {
        let n = region.len();
        ExplicitState {
            region,
            corrupted: vec![false; n],
            compass: vec![0; n],
        }
    }

    pub fn from_parts(region: Arc<Region>, corrupted: Vec<bool>, compass: Vec<u8>) -> Result<Self> {
        if corrupted.len() != region.len() || compass.len() != region.len() {
            return Err(Error::Parameter(format!(
                "state arrays must have {} entries",
                region.len()
            )));
        }
        let d = region.degree() as u8;
        if let Some(bad) = compass.iter().position(|&a| a >= d) {
            return Err(Error::Parameter(format!(
                "compass {} at vertex {} exceeds degree {}",
                compass[bad], bad, d
            )));
        }
        Ok(ExplicitState {
            region,
            corrupted,
            compass,
        })
    }

    pub fn region_arc(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn set_corrupted(&mut self, idx: usize, value: bool) {
        self.corrupted[idx] = value;
    }

    pub fn set_compass(&mut self, idx: usize, a: u8) {
        debug_assert!((a as usize) < self.region.degree());
        self.compass[idx] = a;
    }

    pub fn open_edges(&self) -> Vec<EdgeId> {
        EdgeStateView::new(self).open_edges()
    }
}

impl CompassState for ExplicitState {
    #[inline]
    fn region(&self) -> &Region {
        &self.region
    }

    #[inline]
    fn corrupted(&self, idx: usize) -> bool {
        self.corrupted[idx]
    }

    #[inline]
    fn compass(&self, idx: usize) -> u8 {
        self.compass[idx]
    }
}

/// Derived open/closed view over the edges internal to a region.
pub struct EdgeStateView<'a, S: CompassState + ?Sized> {
    state: &'a S,
}

impl<'a, S: CompassState + ?Sized> EdgeStateView<'a, S> {
    pub fn new(state: &'a S) -> Self {
        EdgeStateView { state }
    }

    /// Open/closed for an edge with both endpoints in the region.
    pub fn open(&self, e: &EdgeId) -> Result<bool> {
        let region = self.state.region();
        let ai = region
            .index_of(&e.a)
            .ok_or_else(|| Error::OutOfRegion(e.a.to_string()))?;
        let bi = region
            .index_of(&e.b)
            .ok_or_else(|| Error::OutOfRegion(e.b.to_string()))?;
        let d = region.degree();
        for j in 0..d {
            if region.neighbor(ai, j) == bi as u32 {
                return Ok(edge_open_by_slot(self.state, ai, j).expect("endpoint checked"));
            }
        }
        Err(Error::InvalidVertex(format!("{e} is not a lattice edge")))
    }

    /// Every open edge with both endpoints in the region, in canonical order.
    pub fn open_edges(&self) -> Vec<EdgeId> {
        let region = self.state.region();
        let mut out = Vec::new();
        for (v, j, w) in region.internal_edges() {
            if edge_open_by_slot(self.state, v, j).expect("internal edge") {
                out.push(EdgeId::new(
                    region.vertex(v).clone(),
                    region.vertex(w).clone(),
                ));
            }
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    #[test]
    fn p_must_be_a_probability() {
        let r = LatticeSpec::Hypercubic(1).ball(2);
        assert!(Configuration::sample(r.clone(), -0.1, 0).is_err());
        assert!(Configuration::sample(r.clone(), 1.1, 0).is_err());
        assert!(Configuration::sample(r.clone(), f64::NAN, 0).is_err());
        assert!(Configuration::sample(r, 1.0, 0).is_ok());
    }

    #[test]
    fn sampling_is_reproducible_and_seed_sensitive() {
        let r = LatticeSpec::Hypercubic(2).ball(4);
        let a = Configuration::sample(r.clone(), 0.3, 99).unwrap();
        let b = Configuration::sample(r.clone(), 0.3, 99).unwrap();
        for i in 0..r.len() {
            assert_eq!(a.var(i), b.var(i));
        }
        let c = Configuration::sample(r.clone(), 0.3, 100).unwrap();
        assert!((0..r.len()).any(|i| a.var(i) != c.var(i)));
    }

    #[test]
    fn with_parameter_keeps_variables_and_couples_monotonely() {
        let r = LatticeSpec::Hypercubic(2).ball(4);
        let lo = Configuration::sample(r.clone(), 0.2, 7).unwrap();
        let hi = lo.with_parameter(0.6).unwrap();
        for i in 0..r.len() {
            assert_eq!(lo.var(i), hi.var(i));
            if lo.corrupted(i) {
                assert!(hi.corrupted(i));
            }
        }
        let open_lo = lo.open_edges();
        let open_hi = hi.open_edges();
        for e in &open_lo {
            assert!(open_hi.contains(e), "{e} open at p=0.2 but closed at p=0.6");
        }
    }

    #[test]
    fn extreme_parameters() {
        let r = LatticeSpec::Hypercubic(2).ball(3);
        let all = Configuration::sample(r.clone(), 1.0, 3).unwrap();
        assert_eq!(all.corrupted_set().len(), r.len());
        assert_eq!(all.open_edges().len(), r.internal_edges().len());

        let none = Configuration::sample(r.clone(), 0.0, 3).unwrap();
        assert!(none.corrupted_set().is_empty());
    }

    /// With no corruption the open set is exactly the set of compass edges.
    #[test]
    fn compass_only_open_set() {
        for spec in [LatticeSpec::Hypercubic(2), LatticeSpec::Triangular] {
            let r = spec.ball(3);
            let cfg = Configuration::sample(r.clone(), 0.0, 11).unwrap();
            let mut expect: Vec<EdgeId> = Vec::new();
            for i in 0..r.len() {
                let a = cfg.var(i).a as usize;
                let w = r.neighbor(i, a);
                if w != NO_NEIGHBOR {
                    expect.push(EdgeId::new(
                        r.vertex(i).clone(),
                        r.vertex(w as usize).clone(),
                    ));
                }
            }
            expect.sort();
            expect.dedup();
            assert_eq!(cfg.open_edges(), expect);
        }
    }

    /// Both compasses miss the edge in exactly one of the four compass
    /// assignments on Z, so the p = 0 edge marginal is 3/4.
    #[test]
    fn edge_marginal_on_z_at_p_zero() {
        let r = LatticeSpec::Hypercubic(1).ball(1);
        let e = EdgeId::new(VertexId(vec![0]), VertexId(vec![1]));
        let i0 = r.index_of(&VertexId(vec![0])).unwrap();
        let i1 = r.index_of(&VertexId(vec![1])).unwrap();
        let mut open_count = 0;
        for a0 in 0..2u8 {
            for a1 in 0..2u8 {
                let mut st = ExplicitState::new(r.clone());
                st.set_compass(i0, a0);
                st.set_compass(i1, a1);
                if EdgeStateView::new(&st).open(&e).unwrap() {
                    open_count += 1;
                }
            }
        }
        assert_eq!(open_count, 3);
    }

    #[test]
    fn corrupted_fraction_concentrates_near_p() {
        let r = LatticeSpec::Hypercubic(2).ball(3);
        let p = 0.37;
        let samples = 2_000u64;
        let mut total = 0u64;
        for s in 0..samples {
            let cfg = Configuration::sample(r.clone(), p, s).unwrap();
            total += cfg.corrupted_set().len() as u64;
        }
        let trials = samples * r.len() as u64;
        let mean = total as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (mean - p).abs() <= 4.0 * sigma,
            "corrupted fraction {mean} vs p {p} (4 sigma = {})",
            4.0 * sigma
        );
    }

    #[test]
    fn edge_state_agrees_with_open_edge_list() {
        let r = LatticeSpec::Triangular.ball(2);
        let cfg = Configuration::sample(r.clone(), 0.3, 5).unwrap();
        let open = cfg.open_edges();
        for (v, _, w) in r.internal_edges() {
            let e = EdgeId::new(r.vertex(v).clone(), r.vertex(w).clone());
            assert_eq!(cfg.edge_state(&e).unwrap(), open.contains(&e));
        }
    }

    #[test]
    fn edge_state_errors() {
        let r = LatticeSpec::Hypercubic(2).ball(2);
        let cfg = Configuration::sample(r.clone(), 0.5, 1).unwrap();
        let outside = EdgeId::new(VertexId(vec![9, 9]), VertexId(vec![9, 10]));
        assert!(matches!(
            cfg.edge_state(&outside),
            Err(Error::OutOfRegion(_))
        ));
        let not_edge = EdgeId::new(VertexId(vec![0, 0]), VertexId(vec![1, 1]));
        assert!(cfg.edge_state(&not_edge).is_err());
    }

    #[test]
    fn explicit_state_validation() {
        let r = LatticeSpec::Hypercubic(1).ball(1);
        assert!(ExplicitState::from_parts(r.clone(), vec![false; 3], vec![0; 3]).is_ok());
        assert!(ExplicitState::from_parts(r.clone(), vec![false; 2], vec![0; 3]).is_err());
        assert!(ExplicitState::from_parts(r, vec![false; 3], vec![2, 0, 0]).is_err());
    }
}
