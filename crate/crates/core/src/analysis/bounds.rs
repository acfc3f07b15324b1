//! Closed-form constants for the high-corruption blocking bound, and a
//! Monte Carlo check of the two-vertex blocking construction that the
//! bound is built from.

use crate::error::{Error, Result};
use crate::exploration::ArmScratch;
use crate::lattice::{LatticeSpec, NO_NEIGHBOR};
use crate::model::ExplicitState;
use crate::rng::{tags, Prf};
use serde::Serialize;

/// Constants in the lower bound P(0 ↮ ∂Λ_n) ≥ C₀ for p ≥ δ, and the
/// derived linear-response constant C₁ = C₀ / (4d).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundConstants {
    pub d: u32,
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
}

/// C₀ = (1−δ)^{2d} · (1/d) · ((d−2)/d)^{2d−2}, requiring degree ≥ 3.
pub fn bound_constants(d: u32, delta: f64) -> Result<BoundConstants> {
    if d < 3 {
        return Err(Error::Parameter(format!(
            "blocking bound needs degree ≥ 3, got {d}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    let df = d as f64;
    let c0 =
        (1.0 - delta).powi(2 * d as i32) * (1.0 / df) * ((df - 2.0) / df).powi(2 * d as i32 - 2);
    Ok(BoundConstants {
        d,
        delta,
        c0,
        c1: c0 / (4.0 * df),
    })
}

/// Outcome of the blocking-construction check on the triangular lattice.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionCheck {
    pub delta: f64,
    pub replicas: u64,
    /// Replicas in which the origin failed to reach ∂Λ_2.
    pub blocked: u64,
    pub blocked_fraction: f64,
    /// Exact probability of the pinned local pattern.
    pub construction_probability: f64,
    /// construction_probability × blocked_fraction: a valid lower bound
    /// on P(0 ↮ ∂Λ_2) whenever blocked_fraction = 1.
    pub lower_bound: f64,
    pub c0: f64,
    /// Whether lower_bound ≥ C₀.
    pub holds: bool,
    pub seed: u64,
}

/// Verify by conditioned Monte Carlo that the two-vertex construction
/// blocks the arm on the triangular lattice at corruption level `delta`.
///
/// The pinned pattern: origin 0 and one neighbor v point at each other,
/// every vertex of {0, v} and of its outer neighborhood B is uncorrupted,
/// and each b ∈ B has its compass away from {0, v}. Every remaining
/// vertex is resampled freely per replica; the pattern's probability is
/// computed exactly from the local geometry, so
/// construction_probability × blocked_fraction lower-bounds the
/// unconditional blocking probability.
pub fn construction_check(delta: f64, replicas: u64, seed: u64) -> Result<ConstructionCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    if replicas == 0 {
        return Err(Error::Parameter("replicas must be at least 1".into()));
    }
    let region = LatticeSpec::Triangular.ball(2);
    let d = region.degree();
    let origin = 0usize;
    let slot_to_v = 0usize;
    let v = region.neighbor(origin, slot_to_v) as usize;

    // B: vertices adjacent to the pair but not in it, with the compass
    // slots that do NOT point back at the pair.
    let mut pinned = vec![false; region.len()];
    pinned[origin] = true;
    pinned[v] = true;
    let mut blockers: Vec<(usize, Vec<u8>)> = Vec::new();
    for &w in [origin, v].iter() {
        for j in 0..d {
            let b = region.neighbor(w, j);
            let b = if b == NO_NEIGHBOR {
                continue;
            } else {
                b as usize
            };
            if pinned[b] || blockers.iter().any(|&(x, _)| x == b) {
                continue;
            }
            let allowed: Vec<u8> = (0..d)
                .filter(|&j| {
                    let t = region.neighbor(b, j);
                    t != origin as u32 && t != v as u32
                })
                .map(|j| j as u8)
                .collect();
            blockers.push((b, allowed));
        }
    }

    // Probability of the pinned pattern: all of {0, v} ∪ B uncorrupted,
    // both pair compasses fixed, each blocker compass in its allowed set.
    let mut probability = (1.0 - delta).powi((2 + blockers.len()) as i32) / (d as f64).powi(2);
    for (_, allowed) in &blockers {
        probability *= allowed.len() as f64 / d as f64;
    }

    let free: Vec<usize> = (0..region.len())
        .filter(|&i| !pinned[i] && blockers.iter().all(|&(b, _)| b != i))
        .collect();

    let mut state = ExplicitState::new(region.clone());
    state.set_compass(origin, slot_to_v as u8);
    state.set_compass(v, region.opposite(slot_to_v));
    // Pair and blockers stay uncorrupted; only free vertices and blocker
    // compasses are rewritten per replica.
    let corr = Prf::new(seed).stream(tags::UNIFORM);
    let comp = Prf::new(seed).stream(tags::COMPASS);
    let slot = Prf::new(seed).stream(tags::FREE);
    let mut scratch = ArmScratch::new(region.len());
    let mut blocked = 0u64;
    for r in 0..replicas {
        for &i in &free {
            state.set_corrupted(i, corr.unit2(r, i as u64) < delta);
            state.set_compass(i, comp.below2(r, i as u64, d as u8));
        }
        for (b, allowed) in &blockers {
            let pick = slot.below2(r, *b as u64, allowed.len() as u8) as usize;
            state.set_compass(*b, allowed[pick]);
        }
        if !scratch.one_arm(&state, 2)? {
            blocked += 1;
        }
    }

    let blocked_fraction = blocked as f64 / replicas as f64;
    let lower_bound = probability * blocked_fraction;
    let c0 = bound_constants(d as u32, delta)?.c0;
    Ok(ConstructionCheck {
        delta,
        replicas,
        blocked,
        blocked_fraction,
        construction_probability: probability,
        lower_bound,
        c0,
        holds: lower_bound >= c0,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_the_closed_form() {
        let b = bound_constants(6, 0.9).unwrap();
        // (0.1)^12 · (1/6) · (2/3)^10, frozen by hand.
        assert!(
            (b.c0 / 2.8902549859721016e-15 - 1.0).abs() < 1e-12,
            "c0 = {}",
            b.c0
        );
        assert!((b.c1 / (b.c0 / 24.0) - 1.0).abs() < 1e-15);
        // Cross-check through logarithms.
        let log_c0 = 12.0 * 0.1f64.ln() - 6.0f64.ln() + 10.0 * (2.0f64 / 3.0).ln();
        assert!((b.c0 / log_c0.exp() - 1.0).abs() < 1e-12);

        let b3 = bound_constants(3, 0.5).unwrap();
        assert!((b3.c0 / (0.5f64.powi(6) / 243.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constants_reject_bad_parameters() {
        assert!(bound_constants(2, 0.5).is_err());
        assert!(bound_constants(6, 0.0).is_err());
        assert!(bound_constants(6, 1.0).is_err());
    }

    #[test]
    fn construction_always_blocks() {
        let check = construction_check(0.9, 20_000, 424_242).unwrap();
        assert_eq!(check.blocked, check.replicas);
        assert_eq!(check.blocked_fraction, 1.0);
        assert!(
            check.holds,
            "lower bound {} vs c0 {}",
            check.lower_bound, check.c0
        );
        // Pattern probability from the local geometry, by hand: the pair
        // has 8 outer neighbors, two adjacent to both pinned vertices
        // (4 allowed slots) and six adjacent to one (5 allowed slots).
        let by_hand = 0.1f64.powi(10) * (1.0 / 36.0) * (4.0f64 / 9.0) * (15625.0 / 46656.0);
        assert!(
            (check.construction_probability / by_hand - 1.0).abs() < 1e-12,
            "pattern probability {}",
            check.construction_probability
        );
        assert!(check.lower_bound >= check.c0);
    }

    #[test]
    fn construction_check_is_reproducible() {
        let a = construction_check(0.7, 5_000, 9).unwrap();
        let b = construction_check(0.7, 5_000, 9).unwrap();
        assert_eq!(a.blocked, b.blocked);
        // Lower corruption still blocks: the pattern itself closes every
        // boundary edge of the pair regardless of the free vertices.
        assert_eq!(a.blocked_fraction, 1.0);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(construction_check(0.0, 10, 0).is_err());
        assert!(construction_check(1.0, 10, 0).is_err());
        assert!(construction_check(0.5, 0, 0).is_err());
    }
}
