//! Vertex-transitive lattices and finite balls around the origin.
//!
//! Two families: the hypercubic lattice Z^D (degree 2D) and the triangular
//! lattice in axial coordinates (degree 6). A [`Region`] is the graph-metric
//! ball of a given radius with a deterministic vertex ordering (distance,
//! then lexicographic coordinates) and a precomputed adjacency table, so all
//! hot loops run on dense vertex indices.

use crate::error::{Error, Result};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Neighbor slot marking an edge that leaves the region.
pub const NO_NEIGHBOR: u32 = u32::MAX;

/// Lattice family. `Hypercubic(d)` is Z^d; `Triangular` uses axial
/// coordinates with unit generators (1,0), (0,1), (1,-1) and their negatives.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LatticeSpec {
    Hypercubic(u32),
    Triangular,
}

impl LatticeSpec {
    /// Vertex degree: 2D for hypercubic, 6 for triangular.
    pub fn degree(&self) -> usize {
        match self {
            LatticeSpec::Hypercubic(d) => 2 * *d as usize,
            LatticeSpec::Triangular => 6,
        }
    }

    /// Number of coordinates in a vertex id.
    pub fn arity(&self) -> usize {
        match self {
            LatticeSpec::Hypercubic(d) => *d as usize,
            LatticeSpec::Triangular => 2,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            LatticeSpec::Hypercubic(_) => "hypercubic",
            LatticeSpec::Triangular => "triangular",
        }
    }

    /// Dimension column used in tabular outputs (axial arity for triangular).
    pub fn dim_label(&self) -> u32 {
        match self {
            LatticeSpec::Hypercubic(d) => *d,
            LatticeSpec::Triangular => 2,
        }
    }

    /// Generator steps in lexicographic order. The slot order of every
    /// adjacency list, and therefore the meaning of a compass value, is the
    /// index into this list.
    pub fn offsets(&self) -> Vec<Vec<i32>> {
        let mut offs: Vec<Vec<i32>> = match self {
            LatticeSpec::Hypercubic(d) => {
                let d = *d as usize;
                let mut v = Vec::with_capacity(2 * d);
                for i in 0..d {
                    let mut plus = vec![0i32; d];
                    plus[i] = 1;
                    let mut minus = vec![0i32; d];
                    minus[i] = -1;
                    v.push(plus);
                    v.push(minus);
                }
                v
            }
            LatticeSpec::Triangular => vec![
                vec![1, 0],
                vec![-1, 0],
                vec![0, 1],
                vec![0, -1],
                vec![1, -1],
                vec![-1, 1],
            ],
        };
        offs.sort();
        offs
    }

    /// For each slot, the slot of the reversed generator.
    pub fn opposite_slots(&self) -> Vec<u8> {
        let offs = self.offsets();
        offs.iter()
            .map(|o| {
                let neg: Vec<i32> = o.iter().map(|x| -x).collect();
                offs.iter()
                    .position(|q| *q == neg)
                    .expect("generators closed under negation") as u8
            })
            .collect()
    }

    pub fn origin(&self) -> VertexId {
        VertexId(vec![0; self.arity()])
    }

    fn check_vertex(&self, v: &VertexId) -> Result<()> {
        if v.0.len() != self.arity() {
            return Err(Error::InvalidVertex(format!(
                "{} has {} coordinates, {} expects {}",
                v,
                v.0.len(),
                self.family_name(),
                self.arity()
            )));
        }
        Ok(())
    }

    /// Neighbors of `v` in slot order.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(self
            .offsets()
            .iter()
            .map(|o| VertexId(v.0.iter().zip(o).map(|(a, b)| a + b).collect()))
            .collect())
    }

    /// Graph distance, closed form.
    pub fn distance(&self, v: &VertexId, w: &VertexId) -> Result<u64> {
        self.check_vertex(v)?;
        self.check_vertex(w)?;
        match self {
            LatticeSpec::Hypercubic(_) => Ok(v
                .0
                .iter()
                .zip(&w.0)
                .map(|(a, b)| (*a as i64 - *b as i64).unsigned_abs())
                .sum()),
            LatticeSpec::Triangular => {
                let dx = w.0[0] as i64 - v.0[0] as i64;
                let dy = w.0[1] as i64 - v.0[1] as i64;
                if dx.signum() * dy.signum() >= 0 {
                    Ok((dx + dy).unsigned_abs())
                } else {
                    Ok(dx.unsigned_abs().max(dy.unsigned_abs()))
                }
            }
        }
    }

    /// Edges incident to `v`, in slot order.
    pub fn incident_edges(&self, v: &VertexId) -> Result<Vec<EdgeId>> {
        Ok(self
            .neighbors(v)?
            .into_iter()
            .map(|w| EdgeId::new(v.clone(), w))
            .collect())
    }

    /// Ball of radius `n` around the origin.
    pub fn ball(&self, n: u32) -> Arc<Region> {
        Region::build(*self, n)
    }
}

impl Serialize for LatticeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("LatticeSpec", 3)?;
        s.serialize_field("family", self.family_name())?;
        s.serialize_field("D", &self.dim_label())?;
        s.serialize_field("degree", &self.degree())?;
        s.end()
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSpec::Hypercubic(d) => write!(f, "hypercubic(D={d})"),
            LatticeSpec::Triangular => write!(f, "triangular"),
        }
    }
}

/// Integer coordinates of a lattice vertex. Ordering is lexicographic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct VertexId(pub Vec<i32>);

impl VertexId {
    pub fn coords(&self) -> &[i32] {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Unordered pair of adjacent vertices, stored with endpoints in
/// lexicographic order so equal edges compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct EdgeId {
    pub a: VertexId,
    pub b: VertexId,
}

impl EdgeId {
    pub fn new(x: VertexId, y: VertexId) -> Self {
        if x <= y {
            EdgeId { a: x, b: y }
        } else {
            EdgeId { a: y, b: x }
        }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Ball of radius `n`: vertex list sorted by (distance, coordinates), a
/// vertex index, per-sphere ranges, and a dense adjacency table.
pub struct Region {
    spec: LatticeSpec,
    radius: u32,
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, u32>,
    dist: Vec<u32>,
    /// `sphere_start[k]..sphere_start[k+1]` indexes sphere k; len radius+2.
    sphere_start: Vec<u32>,
    /// Neighbor indices, stride = degree; NO_NEIGHBOR if outside the ball.
    adj: Vec<u32>,
    opposite: Vec<u8>,
}

impl Region {
    pub fn build(spec: LatticeSpec, radius: u32) -> Arc<Region> {
        let offsets = spec.offsets();
        let degree = offsets.len();

        // Breadth-first enumeration from the origin gives graph distances.
        let mut dist_map: HashMap<VertexId, u32> = HashMap::new();
        let origin = spec.origin();
        dist_map.insert(origin.clone(), 0);
        let mut frontier = vec![origin];
        for layer in 1..=radius {
            let mut next = Vec::new();
            for v in &frontier {
                for off in &offsets {
                    let w = VertexId(v.0.iter().zip(off).map(|(a, b)| a + b).collect());
                    if !dist_map.contains_key(&w) {
                        dist_map.insert(w.clone(), layer);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }

        let mut order: Vec<(u32, VertexId)> =
            dist_map.iter().map(|(v, d)| (*d, v.clone())).collect();
        order.sort();

        let vertices: Vec<VertexId> = order.into_iter().map(|(_, v)| v).collect();
        let dist: Vec<u32> = vertices.iter().map(|v| dist_map[v]).collect();
        let index: HashMap<VertexId, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();

        let mut sphere_start = vec![0u32; radius as usize + 2];
        for (i, d) in dist.iter().enumerate() {
            sphere_start[*d as usize + 1] = i as u32 + 1;
        }
        for k in 1..sphere_start.len() {
            if sphere_start[k] == 0 {
                sphere_start[k] = sphere_start[k - 1];
            }
        }

        let mut adj = vec![NO_NEIGHBOR; vertices.len() * degree];
        for (i, v) in vertices.iter().enumerate() {
            for (j, off) in offsets.iter().enumerate() {
                let w = VertexId(v.0.iter().zip(off).map(|(a, b)| a + b).collect());
                if let Some(&wi) = index.get(&w) {
                    adj[i * degree + j] = wi;
                }
            }
        }

        Arc::new(Region {
            spec,
            radius,
            vertices,
            index,
            dist,
            sphere_start,
            adj,
            opposite: spec.opposite_slots(),
        })
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.spec.degree()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex(&self, idx: usize) -> &VertexId {
        &self.vertices[idx]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).map(|&i| i as usize)
    }

    /// Distance from the origin of the vertex at `idx`.
    pub fn dist_of(&self, idx: usize) -> u32 {
        self.dist[idx]
    }

    /// Vertices at distance exactly `k`.
    pub fn sphere(&self, k: u32) -> Result<&[VertexId]> {
        let r = self.sphere_range(k)?;
        Ok(&self.vertices[r])
    }

    /// Index range of sphere `k`; spheres are contiguous in the ordering.
    pub fn sphere_range(&self, k: u32) -> Result<std::ops::Range<usize>> {
        if k > self.radius {
            return Err(Error::Parameter(format!(
                "sphere radius {k} exceeds region radius {}",
                self.radius
            )));
        }
        Ok(self.sphere_start[k as usize] as usize..self.sphere_start[k as usize + 1] as usize)
    }

    /// Number of vertices within distance `k`.
    pub fn ball_len(&self, k: u32) -> Result<usize> {
        Ok(self.sphere_range(k)?.end)
    }

    /// Neighbor index of `idx` in slot `j`, if inside the region.
    #[inline]
    pub fn neighbor(&self, idx: usize, j: usize) -> u32 {
        self.adj[idx * self.opposite.len() + j]
    }

    /// Slot of the generator pointing back along slot `j`.
    #[inline]
    pub fn opposite(&self, j: usize) -> u8 {
        self.opposite[j]
    }

    #[inline]
    pub(crate) fn adj_table(&self) -> &[u32] {
        &self.adj
    }

    #[inline]
    pub(crate) fn opposite_table(&self) -> &[u8] {
        &self.opposite
    }

    /// All edges with both endpoints in the region, each listed once.
    pub fn internal_edges(&self) -> Vec<(usize, usize, usize)> {
        // (v_idx, slot, w_idx) with v_idx < w_idx
        let d = self.degree();
        let mut out = Vec::new();
        for v in 0..self.len() {
            for j in 0..d {
                let w = self.neighbor(v, j);
                if w != NO_NEIGHBOR && (w as usize) > v {
                    out.push((v, j, w as usize));
                }
            }
        }
        out
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Region({}, radius {}, {} vertices)",
            self.spec,
            self.radius,
            self.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Prf;

    #[test]
    fn hypercubic_d1_sizes() {
        for n in 0..=6u32 {
            let r = LatticeSpec::Hypercubic(1).ball(n);
            assert_eq!(r.len(), 2 * n as usize + 1);
            let boundary = r.sphere(n).unwrap().len();
            assert_eq!(boundary, if n == 0 { 1 } else { 2 });
        }
    }

    #[test]
    fn hypercubic_d2_sizes() {
        let r = LatticeSpec::Hypercubic(2).ball(5);
        assert_eq!(r.len(), 61);
        assert_eq!(r.sphere(5).unwrap().len(), 20);
        for k in 1..=5 {
            assert_eq!(r.sphere(k).unwrap().len(), 4 * k as usize);
        }
    }

    #[test]
    fn triangular_sphere_sizes() {
        let r = LatticeSpec::Triangular.ball(6);
        assert_eq!(r.sphere(0).unwrap().len(), 1);
        for k in 1..=6 {
            assert_eq!(r.sphere(k).unwrap().len(), 6 * k as usize, "sphere {k}");
        }
    }

    #[test]
    fn triangular_distance_example() {
        let spec = LatticeSpec::Triangular;
        let d = spec
            .distance(&VertexId(vec![0, 0]), &VertexId(vec![2, -1]))
            .unwrap();
        assert_eq!(d, 2);
        assert_eq!(
            spec.distance(&VertexId(vec![0, 0]), &VertexId(vec![1, 1]))
                .unwrap(),
            2
        );
    }

    #[test]
    fn d1_neighbor_order() {
        let spec = LatticeSpec::Hypercubic(1);
        let nbrs = spec.neighbors(&VertexId(vec![0])).unwrap();
        assert_eq!(nbrs, vec![VertexId(vec![-1]), VertexId(vec![1])]);
    }

    #[test]
    fn offsets_are_sorted_and_closed_under_negation() {
        for spec in [
            LatticeSpec::Hypercubic(1),
            LatticeSpec::Hypercubic(2),
            LatticeSpec::Hypercubic(3),
            LatticeSpec::Triangular,
        ] {
            let offs = spec.offsets();
            assert_eq!(offs.len(), spec.degree());
            let mut sorted = offs.clone();
            sorted.sort();
            assert_eq!(offs, sorted);
            let opp = spec.opposite_slots();
            for (j, o) in offs.iter().enumerate() {
                let neg: Vec<i32> = o.iter().map(|x| -x).collect();
                assert_eq!(offs[opp[j] as usize], neg);
                assert_eq!(opp[opp[j] as usize] as usize, j);
            }
        }
    }

    #[test]
    fn neighbor_symmetry_and_unit_distance() {
        for spec in [
            LatticeSpec::Hypercubic(2),
            LatticeSpec::Hypercubic(3),
            LatticeSpec::Triangular,
        ] {
            let prf = Prf::new(7);
            for t in 0..200u64 {
                let arity = spec.arity();
                let coords: Vec<i32> = (0..arity)
                    .map(|i| (prf.value2(t, i as u64) % 17) as i32 - 8)
                    .collect();
                let v = VertexId(coords);
                let nbrs = spec.neighbors(&v).unwrap();
                assert_eq!(nbrs.len(), spec.degree());
                for w in &nbrs {
                    assert_eq!(spec.distance(&v, w).unwrap(), 1);
                    assert!(spec.neighbors(w).unwrap().contains(&v));
                }
            }
        }
    }

    /// Breadth-first distances from scratch, used as the reference for the
    /// closed-form metric.
    fn bfs_distances(spec: LatticeSpec, radius: u32) -> HashMap<VertexId, u32> {
        let mut dist = HashMap::new();
        dist.insert(spec.origin(), 0);
        let mut frontier = vec![spec.origin()];
        for layer in 1..=radius {
            let mut next = Vec::new();
            for v in &frontier {
                for w in spec.neighbors(v).unwrap() {
                    if !dist.contains_key(&w) {
                        dist.insert(w.clone(), layer);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    #[test]
    fn closed_form_distance_matches_bfs() {
        let cases = [
            (LatticeSpec::Hypercubic(1), 20u32),
            (LatticeSpec::Hypercubic(2), 20),
            (LatticeSpec::Hypercubic(3), 10),
            (LatticeSpec::Triangular, 20),
        ];
        for (spec, radius) in cases {
            let dist = bfs_distances(spec, radius);
            let all: Vec<&VertexId> = dist.keys().collect();
            let prf = Prf::new(1234);
            for i in 0..1000u64 {
                let v = all[(prf.value2(i, 0) % all.len() as u64) as usize];
                let w = all[(prf.value2(i, 1) % all.len() as u64) as usize];
                // Translate so the pair becomes (origin, w - v); the BFS table
                // is rooted at the origin.
                let expect = spec.distance(v, w).unwrap();
                let shifted = VertexId(
                    w.0.iter()
                        .zip(&v.0)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<i32>>(),
                );
                if let Some(&d) = dist.get(&shifted) {
                    assert_eq!(expect, d as u64, "{spec} {v} {w}");
                }
            }
        }
    }

    #[test]
    fn region_ordering_is_distance_then_lex() {
        for spec in [LatticeSpec::Hypercubic(2), LatticeSpec::Triangular] {
            let r = spec.ball(4);
            for i in 1..r.len() {
                let key_prev = (r.dist_of(i - 1), r.vertex(i - 1));
                let key_here = (r.dist_of(i), r.vertex(i));
                assert!(key_prev < key_here);
            }
            assert_eq!(r.vertex(0), &spec.origin());
            for (i, v) in r.vertices().iter().enumerate() {
                assert_eq!(r.index_of(v), Some(i));
                assert_eq!(
                    r.dist_of(i) as u64,
                    spec.distance(&spec.origin(), v).unwrap()
                );
            }
        }
    }

    #[test]
    fn adjacency_table_matches_neighbors() {
        let spec = LatticeSpec::Triangular;
        let r = spec.ball(3);
        for (i, v) in r.vertices().iter().enumerate() {
            let nbrs = spec.neighbors(v).unwrap();
            for (j, w) in nbrs.iter().enumerate() {
                match r.index_of(w) {
                    Some(wi) => {
                        assert_eq!(r.neighbor(i, j), wi as u32);
                        let back = r.opposite(j) as usize;
                        assert_eq!(r.neighbor(wi, back), i as u32);
                    }
                    None => assert_eq!(r.neighbor(i, j), NO_NEIGHBOR),
                }
            }
        }
    }

    #[test]
    fn sphere_out_of_range_errors() {
        let r = LatticeSpec::Hypercubic(2).ball(3);
        assert!(r.sphere(3).is_ok());
        assert!(matches!(r.sphere(4), Err(Error::Parameter(_))));
    }

    #[test]
    fn arity_mismatch_rejected() {
        let spec = LatticeSpec::Hypercubic(2);
        assert!(matches!(
            spec.neighbors(&VertexId(vec![0])),
            Err(Error::InvalidVertex(_))
        ));
        assert!(matches!(
            spec.distance(&VertexId(vec![0, 0]), &VertexId(vec![0])),
            Err(Error::InvalidVertex(_))
        ));
    }

    #[test]
    fn edge_canonical_order() {
        let x = VertexId(vec![1, 0]);
        let y = VertexId(vec![0, 1]);
        let e1 = EdgeId::new(x.clone(), y.clone());
        let e2 = EdgeId::new(y.clone(), x.clone());
        assert_eq!(e1, e2);
        assert!(e1.a <= e1.b);
    }

    #[test]
    fn translation_invariance_of_neighbors() {
        for spec in [LatticeSpec::Hypercubic(2), LatticeSpec::Triangular] {
            let v = VertexId(vec![3, -2]);
            let t = [5i32, 7];
            let shifted = VertexId(v.0.iter().zip(t).map(|(a, b)| a + b).collect::<Vec<_>>());
            let n1: Vec<VertexId> = spec
                .neighbors(&v)
                .unwrap()
                .into_iter()
                .map(|w| VertexId(w.0.iter().zip(t).map(|(a, b)| a + b).collect::<Vec<_>>()))
                .collect();
            let n2 = spec.neighbors(&shifted).unwrap();
            assert_eq!(n1, n2);
        }
    }
}
