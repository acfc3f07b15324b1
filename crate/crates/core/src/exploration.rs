//! Cluster exploration: the one-arm event and the sphere-seeded decision
//! tree.
//!
//! The one-arm event for radius n asks whether the origin reaches ∂Λ_n
//! through open edges lying entirely inside Λ_n. [`one_arm_direct`] answers
//! it by plain breadth-first search. [`run_decision_tree`] answers it the
//! indirect way that the revealment analysis is built on: seed a FIFO queue
//! with ∂Λ_k, determine every queued vertex (reveal it and its in-range
//! neighbors), enqueue each newly discovered vertex reached through an open
//! edge, and keep going until the entire open cluster of ∂Λ_k inside Λ_n is
//! determined — deliberately no early exit once the answer is decidable.
//!
//! Any open path from the origin to ∂Λ_n moves through vertices whose
//! distance changes by at most one per step, so it passes through ∂Λ_k for
//! every k ≤ n. The whole path therefore lies in the explored cluster, and
//! connectivity can be read off a union-find built over the probed open
//! edges: the origin must share a component with some ∂Λ_n vertex. (Plain
//! "origin in cluster AND cluster touches ∂Λ_n" is NOT enough — those two
//! can sit in different components of the ∂Λ_k cluster.)

use crate::error::{Error, Result};
use crate::lattice::{Region, VertexId, NO_NEIGHBOR};
use crate::model::{edge_open_by_slot, CompassState};
use std::collections::VecDeque;
use std::sync::Arc;

/// Status of one probed incident edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeStatus {
    Open,
    Closed,
    /// The far endpoint lies outside the explored ball; nothing is revealed.
    OutsideRegion,
}

/// One incident-edge probe made by `determine`, in slot order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeProbe {
    pub slot: u8,
    pub neighbor: VertexId,
    pub status: EdgeStatus,
}

/// Ordered record of which vertices had their variables revealed.
#[derive(Clone)]
pub struct RevealLog {
    region: Arc<Region>,
    member: Vec<bool>,
    order: Vec<u32>,
}

impl RevealLog {
    pub fn new(region: Arc<Region>) -> Self {
        let len = region.len();
        RevealLog {
            region,
            member: vec![false; len],
            order: Vec::new(),
        }
    }

    fn insert(&mut self, idx: usize) -> bool {
        if self.member[idx] {
            return false;
        }
        self.member[idx] = true;
        self.order.push(idx as u32);
        true
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.region.index_of(v).is_some_and(|i| self.member[i])
    }

    /// Region indices in the order they were revealed.
    pub fn order_indices(&self) -> &[u32] {
        &self.order
    }

    pub fn reveal_order(&self) -> Vec<VertexId> {
        self.order
            .iter()
            .map(|&i| self.region.vertex(i as usize).clone())
            .collect()
    }
}

/// Outcome of a decision-tree run.
pub struct ArmResult {
    /// Value of the one-arm indicator.
    pub connected: bool,
    /// Open cluster of ∂Λ_k inside Λ_n, ascending region indices.
    cluster: Vec<u32>,
    pub log: RevealLog,
}

impl ArmResult {
    pub fn cluster_indices(&self) -> &[u32] {
        &self.cluster
    }

    pub fn cluster_vertices(&self) -> Vec<VertexId> {
        self.cluster
            .iter()
            .map(|&i| self.log.region().vertex(i as usize).clone())
            .collect()
    }

    pub fn cluster_contains(&self, v: &VertexId) -> bool {
        self.log
            .region()
            .index_of(v)
            .is_some_and(|i| self.cluster.binary_search(&(i as u32)).is_ok())
    }
}

/// Reveal X_v and all in-region neighbor variables, reporting the status of
/// every incident edge in slot order. Edges leaving the region are reported
/// `OutsideRegion` and reveal nothing. Idempotent on the log.
pub fn determine<S: CompassState + ?Sized>(
    state: &S,
    v: &VertexId,
    log: &mut RevealLog,
) -> Result<Vec<EdgeProbe>> {
    let region = state.region();
    if log.region.len() != region.len() || log.region.spec() != region.spec() {
        return Err(Error::Parameter(
            "reveal log was built for a different region".into(),
        ));
    }
    let idx = region
        .index_of(v)
        .ok_or_else(|| Error::OutOfRegion(v.to_string()))?;
    log.insert(idx);
    let offsets = region.spec().offsets();
    let d = region.degree();
    let mut probes = Vec::with_capacity(d);
    for (j, off) in offsets.iter().enumerate().take(d) {
        let w = region.neighbor(idx, j);
        let neighbor = VertexId(v.coords().iter().zip(off).map(|(a, b)| a + b).collect());
        let status = if w == NO_NEIGHBOR {
            EdgeStatus::OutsideRegion
        } else {
            log.insert(w as usize);
            if edge_open_by_slot(state, idx, j).expect("in-region neighbor") {
                EdgeStatus::Open
            } else {
                EdgeStatus::Closed
            }
        };
        probes.push(EdgeProbe {
            slot: j as u8,
            neighbor,
            status,
        });
    }
    Ok(probes)
}

/// Union-find whose state resets in O(1) between runs via epoch stamps.
struct EpochUf {
    parent: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl EpochUf {
    fn new(len: usize) -> Self {
        EpochUf {
            parent: vec![0; len],
            stamp: vec![0; len],
            epoch: 0,
        }
    }

    fn reset(&mut self) {
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    #[inline]
    fn find(&mut self, mut i: u32) -> u32 {
        if self.stamp[i as usize] != self.epoch {
            self.stamp[i as usize] = self.epoch;
            self.parent[i as usize] = i;
            return i;
        }
        // Path halving.
        while self.parent[i as usize] != i {
            let p = self.parent[i as usize];
            let gp = if self.stamp[p as usize] == self.epoch {
                self.parent[p as usize]
            } else {
                self.stamp[p as usize] = self.epoch;
                self.parent[p as usize] = p;
                p
            };
            self.parent[i as usize] = gp;
            i = gp;
        }
        i
    }

    #[inline]
    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Reusable buffers for decision-tree runs; cleared in O(1) per run, so the
/// exact audits can sweep tens of millions of configurations through it.
pub(crate) struct TreeScratch {
    epoch: u32,
    enqueued: Vec<u32>,
    in_cluster: Vec<u32>,
    revealed_stamp: Vec<u32>,
    revealed: Vec<u32>,
    cluster: Vec<u32>,
    queue: VecDeque<u32>,
    uf: EpochUf,
}

impl TreeScratch {
    pub(crate) fn new(len: usize) -> Self {
        TreeScratch {
            epoch: 0,
            enqueued: vec![0; len],
            in_cluster: vec![0; len],
            revealed_stamp: vec![0; len],
            revealed: Vec::new(),
            cluster: Vec::new(),
            queue: VecDeque::new(),
            uf: EpochUf::new(len),
        }
    }

    fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.enqueued.fill(0);
            self.in_cluster.fill(0);
            self.revealed_stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.uf.reset();
        self.revealed.clear();
        self.cluster.clear();
        self.queue.clear();
    }

    #[inline]
    fn reveal(&mut self, idx: u32) {
        if self.revealed_stamp[idx as usize] != self.epoch {
            self.revealed_stamp[idx as usize] = self.epoch;
            self.revealed.push(idx);
        }
    }

    /// Runs T_k on the ball Λ_n. Returns the one-arm indicator; the revealed
    /// set and the ∂Λ_k cluster stay valid until the next run.
    pub(crate) fn run<S: CompassState + ?Sized>(
        &mut self,
        state: &S,
        n: u32,
        k: u32,
    ) -> Result<bool> {
        let region = state.region();
        if k < 1 || k > n {
            return Err(Error::Parameter(format!(
                "tree seeding radius k = {k} must satisfy 1 <= k <= n = {n}"
            )));
        }
        let limit = region.ball_len(n)? as u32;
        self.next_epoch();

        for idx in region.sphere_range(k).expect("k <= n <= radius") {
            self.enqueued[idx] = self.epoch;
            self.queue.push_back(idx as u32);
        }

        let d = region.degree();
        while let Some(v) = self.queue.pop_front() {
            // Popped vertices are exactly the ∂Λ_k seeds plus vertices first
            // reached through an open probed edge, i.e. the cluster of ∂Λ_k.
            self.in_cluster[v as usize] = self.epoch;
            self.cluster.push(v);
            self.reveal(v);
            for j in 0..d {
                let w = region.neighbor(v as usize, j);
                if w == NO_NEIGHBOR || w >= limit {
                    continue;
                }
                self.reveal(w);
                if edge_open_by_slot(state, v as usize, j).expect("in-range neighbor") {
                    self.uf.union(v, w);
                    if self.enqueued[w as usize] != self.epoch {
                        self.enqueued[w as usize] = self.epoch;
                        self.queue.push_back(w);
                    }
                }
            }
        }

        let connected = if self.in_cluster[0] == self.epoch {
            let root = self.uf.find(0);
            region
                .sphere_range(n)
                .expect("n <= radius")
                .any(|b| self.in_cluster[b] == self.epoch && self.uf.find(b as u32) == root)
        } else {
            false
        };
        Ok(connected)
    }

    pub(crate) fn revealed(&self) -> &[u32] {
        &self.revealed
    }

    pub(crate) fn cluster(&self) -> &[u32] {
        &self.cluster
    }
}

/// Explore the open cluster of ∂Λ_k inside Λ_n and decide the one-arm event.
///
/// Seeds are the ∂Λ_k vertices in canonical order; exploration is FIFO and
/// runs to full-cluster exhaustion. The result's log lists every vertex
/// whose variables were revealed, in reveal order.
pub fn run_decision_tree<S: CompassState + ?Sized>(state: &S, n: u32, k: u32) -> Result<ArmResult> {
    let region = state.region();
    let mut scratch = TreeScratch::new(region.len());
    let connected = scratch.run(state, n, k)?;

    let region_arc = region_handle(state);
    let mut log = RevealLog::new(region_arc);
    for &idx in scratch.revealed() {
        log.insert(idx as usize);
    }
    let mut cluster = scratch.cluster().to_vec();
    cluster.sort_unstable();
    Ok(ArmResult {
        connected,
        cluster,
        log,
    })
}

/// Recover an owning handle on the state's region. States hand out `&Region`
/// to keep the trait object-safe; rebuilding a ball is cheap and hits the
/// same vertex ordering, so logs stay index-compatible.
fn region_handle<S: CompassState + ?Sized>(state: &S) -> Arc<Region> {
    state.region().spec().ball(state.region().radius())
}

/// Reusable buffers for direct one-arm searches, with per-run caching of the
/// sampled variables so each vertex is derived at most once per replica.
pub(crate) struct ArmScratch {
    epoch: u32,
    var_stamp: Vec<u32>,
    corrupted: Vec<bool>,
    compass: Vec<u8>,
    visited: Vec<u32>,
    queue: VecDeque<u32>,
}

impl ArmScratch {
    pub(crate) fn new(len: usize) -> Self {
        ArmScratch {
            epoch: 0,
            var_stamp: vec![0; len],
            corrupted: vec![false; len],
            compass: vec![0; len],
            visited: vec![0; len],
            queue: VecDeque::new(),
        }
    }

    #[inline]
    fn vars<S: CompassState + ?Sized>(&mut self, state: &S, idx: u32) -> (bool, u8) {
        let i = idx as usize;
        if self.var_stamp[i] != self.epoch {
            self.var_stamp[i] = self.epoch;
            self.corrupted[i] = state.corrupted(i);
            self.compass[i] = state.compass(i);
        }
        (self.corrupted[i], self.compass[i])
    }

    /// Breadth-first search from the origin over open edges inside Λ_n, with
    /// early exit on first contact with ∂Λ_n.
    pub(crate) fn one_arm<S: CompassState + ?Sized>(&mut self, state: &S, n: u32) -> Result<bool> {
        let region = state.region();
        let limit = region.ball_len(n)? as u32;
        if n == 0 {
            return Ok(true);
        }
        let target_start = region.sphere_range(n).expect("n <= radius").start as u32;

        if self.epoch == u32::MAX {
            self.var_stamp.fill(0);
            self.visited.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.queue.clear();

        let d = region.degree();
        self.visited[0] = self.epoch;
        self.queue.push_back(0);
        while let Some(v) = self.queue.pop_front() {
            if v >= target_start {
                return Ok(true);
            }
            let (v_corr, v_comp) = self.vars(state, v);
            for j in 0..d {
                let w = region.neighbor(v as usize, j);
                if w == NO_NEIGHBOR || w >= limit || self.visited[w as usize] == self.epoch {
                    continue;
                }
                let (w_corr, w_comp) = self.vars(state, w);
                let open = v_corr || w_corr || v_comp as usize == j || w_comp == region.opposite(j);
                if open {
                    self.visited[w as usize] = self.epoch;
                    self.queue.push_back(w);
                }
            }
        }
        Ok(false)
    }
}

/// Whether the origin reaches ∂Λ_n through open edges inside Λ_n.
pub fn one_arm_direct<S: CompassState + ?Sized>(state: &S, n: u32) -> Result<bool> {
    ArmScratch::new(state.region().len()).one_arm(state, n)
}

/// Open-edge component of `v` inside the whole region, in canonical order.
pub fn cluster_of<S: CompassState + ?Sized>(state: &S, v: &VertexId) -> Result<Vec<VertexId>> {
    let region = state.region();
    let start = region
        .index_of(v)
        .ok_or_else(|| Error::OutOfRegion(v.to_string()))?;
    let d = region.degree();
    let mut visited = vec![false; region.len()];
    let mut queue = VecDeque::new();
    visited[start] = true;
    queue.push_back(start);
    let mut members = vec![start];
    while let Some(x) = queue.pop_front() {
        for j in 0..d {
            let w = region.neighbor(x, j);
            if w == NO_NEIGHBOR || visited[w as usize] {
                continue;
            }
            if edge_open_by_slot(state, x, j).expect("in-region neighbor") {
                visited[w as usize] = true;
                members.push(w as usize);
                queue.push_back(w as usize);
            }
        }
    }
    members.sort_unstable();
    Ok(members
        .into_iter()
        .map(|i| region.vertex(i).clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::model::{Configuration, ExplicitState};
    use crate::rng::Prf;

    /// Test-local connectivity oracle: multi-source BFS straight over the
    /// open-edge list, no shared code with the tree.
    fn reaches(state: &impl CompassState, n: u32, seeds: &[usize]) -> Vec<usize> {
        let region = state.region();
        let limit = region.ball_len(n).unwrap();
        let mut adj = vec![Vec::new(); limit];
        for (v, j, w) in region.internal_edges() {
            if v < limit && w < limit && edge_open_by_slot(state, v, j).unwrap() {
                adj[v].push(w);
                adj[w].push(v);
            }
        }
        let mut seen = vec![false; limit];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..limit).filter(|&i| seen[i]).collect()
    }

    fn arm_oracle(state: &impl CompassState, n: u32) -> bool {
        let region = state.region();
        let cluster = reaches(state, n, &[0]);
        let sphere = region.sphere_range(n).unwrap();
        cluster.into_iter().any(|i| sphere.contains(&i))
    }

    /// Five-vertex line where two inward compasses and two outward ones trap
    /// the origin's cluster at {-1, 0, +1}.
    #[test]
    fn line_blocking_construction() {
        let r = LatticeSpec::Hypercubic(1).ball(2);
        // Slot 0 points to -1, slot 1 to +1.
        let at = |x: i32| r.index_of(&VertexId(vec![x])).unwrap();
        for a0 in 0..2u8 {
            let mut st = ExplicitState::new(r.clone());
            st.set_compass(at(-2), 0);
            st.set_compass(at(-1), 1);
            st.set_compass(at(0), a0);
            st.set_compass(at(1), 0);
            st.set_compass(at(2), 1);
            assert!(!one_arm_direct(&st, 2).unwrap());
            assert!(!run_decision_tree(&st, 2, 1).unwrap().connected);
            assert!(!run_decision_tree(&st, 2, 2).unwrap().connected);
            // Canonical order: origin first, then the distance-1 shell.
            assert_eq!(
                cluster_of(&st, &VertexId(vec![0])).unwrap(),
                vec![VertexId(vec![0]), VertexId(vec![-1]), VertexId(vec![1])]
            );

            // Turning +1's compass outward opens (+1,+2) and frees the arm
            // when the origin points right.
            let mut open = st.clone();
            open.set_compass(at(1), 1);
            let expect = a0 == 1;
            assert_eq!(one_arm_direct(&open, 2).unwrap(), expect);
            assert_eq!(run_decision_tree(&open, 2, 1).unwrap().connected, expect);
        }
    }

    #[test]
    fn tree_matches_direct_search_across_lattices() {
        let cases = [
            (LatticeSpec::Hypercubic(1), 4u32),
            (LatticeSpec::Hypercubic(2), 3u32),
            (LatticeSpec::Triangular, 2u32),
        ];
        for (spec, radius) in cases {
            let region = spec.ball(radius);
            for seed in 0..150u64 {
                for p in [0.05, 0.3, 0.6, 0.9] {
                    let cfg = Configuration::sample(region.clone(), p, seed).unwrap();
                    for n in 1..=radius {
                        let direct = one_arm_direct(&cfg, n).unwrap();
                        assert_eq!(direct, arm_oracle(&cfg, n));
                        for k in 1..=n {
                            let arm = run_decision_tree(&cfg, n, k).unwrap();
                            assert_eq!(
                                arm.connected, direct,
                                "{spec} seed {seed} p {p} n {n} k {k}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cluster_is_exactly_the_boundary_cluster() {
        let region = LatticeSpec::Hypercubic(2).ball(3);
        for seed in 0..60u64 {
            let cfg = Configuration::sample(region.clone(), 0.25, seed).unwrap();
            for (n, k) in [(3u32, 1u32), (3, 2), (3, 3), (2, 1), (2, 2)] {
                let arm = run_decision_tree(&cfg, n, k).unwrap();
                let seeds: Vec<usize> = region.sphere_range(k).unwrap().collect();
                let expect = reaches(&cfg, n, &seeds);
                let got: Vec<usize> = arm.cluster_indices().iter().map(|&i| i as usize).collect();
                assert_eq!(got, expect);
            }
        }
    }

    /// The revealed set is the cluster plus its in-range neighborhood: every
    /// revealed vertex has the cluster within distance one, and everything
    /// within distance one of the cluster is revealed.
    #[test]
    fn revealment_characterization() {
        let region = LatticeSpec::Triangular.ball(2);
        let d = region.degree();
        for seed in 0..60u64 {
            let cfg = Configuration::sample(region.clone(), 0.2, seed).unwrap();
            for (n, k) in [(2u32, 1u32), (2, 2), (1, 1)] {
                let arm = run_decision_tree(&cfg, n, k).unwrap();
                let limit = region.ball_len(n).unwrap();
                let in_cluster: std::collections::HashSet<u32> =
                    arm.cluster_indices().iter().copied().collect();
                let mut expect: std::collections::HashSet<u32> = in_cluster.clone();
                for &c in &in_cluster {
                    for j in 0..d {
                        let w = region.neighbor(c as usize, j);
                        if w != NO_NEIGHBOR && (w as usize) < limit {
                            expect.insert(w);
                        }
                    }
                }
                let got: std::collections::HashSet<u32> =
                    arm.log.order_indices().iter().copied().collect();
                assert_eq!(got, expect);
                assert_eq!(arm.log.len(), arm.log.order_indices().len());
            }
        }
    }

    #[test]
    fn radius_one_arm_is_certain() {
        for spec in [
            LatticeSpec::Hypercubic(1),
            LatticeSpec::Hypercubic(2),
            LatticeSpec::Triangular,
        ] {
            let region = spec.ball(2);
            for seed in 0..100u64 {
                let cfg = Configuration::sample(region.clone(), 0.0, seed).unwrap();
                assert!(one_arm_direct(&cfg, 1).unwrap());
                assert!(run_decision_tree(&cfg, 1, 1).unwrap().connected);
            }
        }
    }

    #[test]
    fn full_corruption_explores_everything() {
        let region = LatticeSpec::Hypercubic(2).ball(3);
        let cfg = Configuration::sample(region.clone(), 1.0, 0).unwrap();
        let arm = run_decision_tree(&cfg, 3, 1).unwrap();
        assert!(arm.connected);
        assert_eq!(arm.cluster_indices().len(), region.len());
        assert_eq!(arm.log.len(), region.len());
        assert_eq!(
            cluster_of(&cfg, &region.spec().origin()).unwrap().len(),
            region.len()
        );
    }

    #[test]
    fn determine_contract() {
        let region = LatticeSpec::Hypercubic(1).ball(2);
        let cfg = Configuration::sample(region.clone(), 0.5, 9).unwrap();
        let mut log = RevealLog::new(region.clone());
        let origin = VertexId(vec![0]);
        let probes = determine(&cfg, &origin, &mut log).unwrap();
        assert_eq!(probes.len(), 2);
        assert_eq!(probes[0].neighbor, VertexId(vec![-1]));
        assert_eq!(probes[1].neighbor, VertexId(vec![1]));
        assert_eq!(log.len(), 3);
        assert!(log.contains(&origin));

        let before: Vec<u32> = log.order_indices().to_vec();
        let again = determine(&cfg, &origin, &mut log).unwrap();
        assert_eq!(again, probes);
        assert_eq!(log.order_indices(), &before[..]);

        // Boundary vertex: one probe leaves the region.
        let edge_probe = determine(&cfg, &VertexId(vec![2]), &mut log).unwrap();
        assert_eq!(edge_probe[1].status, EdgeStatus::OutsideRegion);
        assert_eq!(edge_probe[1].neighbor, VertexId(vec![3]));

        assert!(determine(&cfg, &VertexId(vec![7]), &mut log).is_err());
    }

    #[test]
    fn determine_on_corrupted_vertex_opens_all_probes() {
        let region = LatticeSpec::Triangular.ball(1);
        let mut st = ExplicitState::new(region.clone());
        st.set_corrupted(0, true);
        let mut log = RevealLog::new(region.clone());
        let probes = determine(&st, &region.spec().origin(), &mut log).unwrap();
        assert!(probes.iter().all(|p| p.status == EdgeStatus::Open));
    }

    #[test]
    fn tree_rejects_bad_radii() {
        let region = LatticeSpec::Hypercubic(2).ball(2);
        let cfg = Configuration::sample(region, 0.5, 0).unwrap();
        assert!(run_decision_tree(&cfg, 2, 0).is_err());
        assert!(run_decision_tree(&cfg, 1, 2).is_err());
        assert!(run_decision_tree(&cfg, 3, 1).is_err());
        assert!(one_arm_direct(&cfg, 3).is_err());
    }

    #[test]
    fn interior_clusters_never_degenerate() {
        // Interior vertices always own at least one in-region open edge (the
        // compass edge at worst), so their clusters have two or more
        // vertices. Boundary vertices may point outward and end up isolated
        // within the region; they are excluded on purpose.
        let region = LatticeSpec::Hypercubic(2).ball(3);
        let interior = region.ball_len(2).unwrap();
        for seed in 0..40u64 {
            let cfg = Configuration::sample(region.clone(), 0.15, seed).unwrap();
            for idx in 0..interior {
                let c = cluster_of(&cfg, &region.vertex(idx).clone()).unwrap();
                assert!(
                    c.len() >= 2,
                    "interior vertex {} isolated",
                    region.vertex(idx)
                );
            }
        }
    }

    #[test]
    fn cluster_sizes_match_union_find_oracle() {
        // Independent oracle: union-find over the open-edge list.
        let region = LatticeSpec::Triangular.ball(2);
        for seed in 0..40u64 {
            let cfg = Configuration::sample(region.clone(), 0.3, seed).unwrap();
            let mut parent: Vec<usize> = (0..region.len()).collect();
            fn find(parent: &mut [usize], mut i: usize) -> usize {
                while parent[i] != i {
                    parent[i] = parent[parent[i]];
                    i = parent[i];
                }
                i
            }
            for (v, j, w) in region.internal_edges() {
                if edge_open_by_slot(&cfg, v, j).unwrap() {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, w));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
            for idx in 0..region.len() {
                let got = cluster_of(&cfg, &region.vertex(idx).clone()).unwrap();
                let root = find(&mut parent, idx);
                let expect: Vec<VertexId> = (0..region.len())
                    .filter(|&i| find(&mut parent, i) == root)
                    .map(|i| region.vertex(i).clone())
                    .collect();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn one_arm_is_monotone_under_the_coupling() {
        let region = LatticeSpec::Hypercubic(2).ball(3);
        let prf = Prf::new(0xfeed);
        for s in 0..80u64 {
            let seed = prf.value(s);
            let lo = Configuration::sample(region.clone(), 0.2, seed).unwrap();
            let hi = lo.with_parameter(0.55).unwrap();
            for n in 1..=3u32 {
                if one_arm_direct(&lo, n).unwrap() {
                    assert!(one_arm_direct(&hi, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn scratch_reuse_is_stateless_across_runs() {
        let region = LatticeSpec::Hypercubic(2).ball(3);
        let mut tree = TreeScratch::new(region.len());
        let mut arm = ArmScratch::new(region.len());
        for seed in 0..50u64 {
            let cfg = Configuration::sample(region.clone(), 0.35, seed).unwrap();
            for n in 1..=3u32 {
                let fresh = one_arm_direct(&cfg, n).unwrap();
                assert_eq!(arm.one_arm(&cfg, n).unwrap(), fresh);
                assert_eq!(tree.run(&cfg, n, 1).unwrap(), fresh);
            }
        }
    }
}
