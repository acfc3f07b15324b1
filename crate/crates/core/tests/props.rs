//! Property tests over randomized lattices, radii, parameters, and seeds.

use corrupted_compass::oracle::ExactEngine;
use corrupted_compass::{
    cluster_of, one_arm_direct, run_decision_tree, Configuration, LatticeSpec, VertexId,
};
use num::BigRational;
use proptest::prelude::*;
use std::collections::HashSet;

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    prop_oneof![
        Just(LatticeSpec::Hypercubic(1)),
        Just(LatticeSpec::Hypercubic(2)),
        Just(LatticeSpec::Hypercubic(3)),
        Just(LatticeSpec::Triangular),
    ]
}

fn dim(spec: LatticeSpec) -> usize {
    spec.dim_label() as usize
}

/// A lattice together with a few vertices of matching dimension.
fn spec_and_points(count: usize) -> impl Strategy<Value = (LatticeSpec, Vec<VertexId>)> {
    lattice().prop_flat_map(move |spec| {
        prop::collection::vec(
            prop::collection::vec(-6..=6i32, dim(spec)).prop_map(VertexId),
            count,
        )
        .prop_map(move |vs| (spec, vs))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_translation_invariant_metric(
        (spec, pts) in spec_and_points(3),
    ) {
        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        let d = |x: &VertexId, y: &VertexId| spec.distance(x, y).unwrap();
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert_eq!(d(a, a), 0);
        prop_assert_eq!(d(a, b) == 0, a == b);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        // Translating both endpoints by c's coordinates changes nothing.
        let shift = |x: &VertexId| {
            VertexId(x.coords().iter().zip(c.coords()).map(|(u, v)| u + v).collect())
        };
        prop_assert_eq!(d(&shift(a), &shift(b)), d(a, b));
        // Each neighbor offset is one step.
        for off in spec.offsets() {
            let nb = VertexId(a.coords().iter().zip(&off).map(|(u, v)| u + v).collect());
            prop_assert_eq!(d(a, &nb), 1);
        }
    }

    #[test]
    fn open_edges_grow_with_the_parameter(
        spec in lattice(),
        n in 1u32..=4,
        seed in any::<u64>(),
        p1 in 0.0..=1.0f64,
        p2 in 0.0..=1.0f64,
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let low = Configuration::sample(spec.ball(n), lo, seed).unwrap();
        let high = low.with_parameter(hi).unwrap();
        let high_edges: HashSet<_> = high.open_edges().into_iter().collect();
        for e in low.open_edges() {
            prop_assert!(high_edges.contains(&e), "edge {e} closed at higher p");
        }
    }

    #[test]
    fn decision_tree_agrees_with_direct_search(
        spec in lattice(),
        n in 1u32..=5,
        seed in any::<u64>(),
        p in 0.0..=1.0f64,
    ) {
        let cfg = Configuration::sample(spec.ball(n), p, seed).unwrap();
        let direct = one_arm_direct(&cfg, n).unwrap();
        for k in 1..=n {
            let arm = run_decision_tree(&cfg, n, k).unwrap();
            prop_assert_eq!(arm.connected, direct, "k = {}", k);
        }
    }

    #[test]
    fn cluster_decides_the_arm_event(
        spec in lattice(),
        n in 1u32..=4,
        seed in any::<u64>(),
        p in 0.0..=1.0f64,
    ) {
        let region = spec.ball(n);
        let origin = region.vertex(0).clone();
        let cfg = Configuration::sample(region, p, seed).unwrap();
        let cluster = cluster_of(&cfg, &origin).unwrap();
        prop_assert!(cluster.contains(&origin));
        let reaches = cluster
            .iter()
            .any(|v| spec.distance(&origin, v).unwrap() == n as u64);
        prop_assert_eq!(reaches, one_arm_direct(&cfg, n).unwrap());
    }

    #[test]
    fn exact_polynomial_is_monotone_and_normalized(
        n in 1u32..=3,
        num1 in 0u32..=16,
        num2 in 0u32..=16,
        den in 16u32..=32,
    ) {
        let engine = ExactEngine::new(LatticeSpec::Hypercubic(1), n).unwrap();
        let (a, b) = (num1.min(num2), num1.max(num2));
        let pa = BigRational::new(a.into(), den.into());
        let pb = BigRational::new(b.into(), den.into());
        let ta = engine.theta_at(&pa).unwrap();
        let tb = engine.theta_at(&pb).unwrap();
        prop_assert!(ta <= tb, "θ must be nondecreasing: θ({pa}) = {ta} > θ({pb}) = {tb}");
        let one = BigRational::from_integer(1.into());
        prop_assert!(ta >= BigRational::from_integer(0.into()) && tb <= one);
        prop_assert_eq!(engine.theta_at(&one).unwrap(), BigRational::from_integer(1.into()));
    }
}
