//! Exhaustive enumeration over (corruption bit, compass slot) assignments.
//!
//! The uniform mark U_v enters the one-arm indicator only through the bit
//! {U_v < p}, so the continuous configuration space collapses to (2d)^N
//! atoms on an N-vertex ball. Atoms are indexed mask * d^N + code, mask the
//! corruption bits and code the little-endian base-d compass digits. All
//! counts are bucketed by corruption mass, which keeps results polynomial in
//! p with exact rational coefficients.
//!
//! Everything heavy is computed once on demand and cached: the θ mass
//! counts, the per-vertex influence/pivotality tables (via a transient
//! bit-packed table of the indicator over all atoms), and per-k revealment
//! tables obtained by running the decision tree on every atom.

use crate::error::{Error, Result};
use crate::exploration::TreeScratch;
use crate::lattice::{LatticeSpec, Region, VertexId, NO_NEIGHBOR};
use crate::model::ExplicitState;
use crate::oracle::poly::{check_probability, mass_basis_value, ThetaPolynomial};
use num::{BigInt, BigRational};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Default ceiling on log2(#atoms); keeps default runs interactive.
pub const DEFAULT_ENUMERATION_BITS: f64 = 36.0;
/// Absolute ceiling even with the override; beyond this u64 indexing and any
/// realistic runtime are gone.
pub const MAX_ENUMERATION_BITS: f64 = 48.0;
/// Influence and pivotality build a bit table over all atoms; cap its size.
const TABLE_BITS_LIMIT: f64 = 33.0;

/// `table[v][m]` counts atoms with corruption weight m contributing to
/// vertex v's quantity; dividing by the relevant power of d and attaching
/// p^m (1-p)^(N-m) turns a row into an exact rational.
type MassTable = Vec<Vec<u64>>;

pub struct ExactEngine {
    region: Arc<Region>,
    n: u32,
    sites: usize,
    d: usize,
    /// d^sites.
    codes: u64,
    sphere_start: usize,
    theta_counts: OnceLock<Vec<u64>>,
    theta_poly: OnceLock<ThetaPolynomial>,
    /// Per-vertex (influence, pivotality) mass buckets.
    inf_piv: OnceLock<(MassTable, MassTable)>,
    /// k -> per-vertex revealment mass buckets.
    rev: Mutex<HashMap<u32, Arc<MassTable>>>,
}

impl ExactEngine {
    pub fn new(spec: LatticeSpec, n: u32) -> Result<Self> {
        Self::with_budget(spec, n, DEFAULT_ENUMERATION_BITS)
    }

    pub fn with_budget(spec: LatticeSpec, n: u32, max_bits: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Parameter(
                "exact enumeration needs radius n >= 1".into(),
            ));
        }
        let region = spec.ball(n);
        let sites = region.len();
        let d = region.degree();
        let bits = sites as f64 * ((2 * d) as f64).log2();
        let limit = max_bits.min(MAX_ENUMERATION_BITS);
        if bits > limit {
            return Err(Error::EnumerationTooLarge { bits, limit });
        }
        let codes = (d as u64).pow(sites as u32);
        let sphere_start = region.sphere_range(n).expect("n is the radius").start;
        Ok(ExactEngine {
            region,
            n,
            sites,
            d,
            codes,
            sphere_start,
            theta_counts: OnceLock::new(),
            theta_poly: OnceLock::new(),
            inf_piv: OnceLock::new(),
            rev: Mutex::new(HashMap::new()),
        })
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn radius(&self) -> u32 {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// log2 of the atom count.
    pub fn atom_bits(&self) -> f64 {
        self.sites as f64 * ((2 * self.d) as f64).log2()
    }

    fn vertex_index(&self, v: &VertexId) -> Result<usize> {
        self.region
            .index_of(v)
            .ok_or_else(|| Error::OutOfRegion(v.to_string()))
    }

    /// Breadth-first search over open edges with early exit at the boundary
    /// sphere. `mask` carries corruption bits, `comp` the compass slots.
    #[inline]
    fn connects(&self, mask: u64, comp: &[u8]) -> bool {
        let adj = self.region.adj_table();
        let opp = self.region.opposite_table();
        let d = self.d;
        let start = self.sphere_start;
        let mut visited: u64 = 1;
        let mut frontier: u64 = 1;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let v_corr = (mask >> v) & 1 != 0;
            let v_comp = comp[v];
            let row = &adj[v * d..(v + 1) * d];
            for (j, &w) in row.iter().enumerate() {
                if w == NO_NEIGHBOR {
                    continue;
                }
                let wu = w as usize;
                if (visited >> wu) & 1 != 0 {
                    continue;
                }
                let open =
                    v_corr || (mask >> wu) & 1 != 0 || v_comp as usize == j || comp[wu] == opp[j];
                if open {
                    if wu >= start {
                        return true;
                    }
                    visited |= 1 << wu;
                    frontier |= 1 << wu;
                }
            }
        }
        false
    }

    /// Like `connects` but restricted to edges opened by corruption alone.
    /// Those edges are open under every compass code, so a hit lets the
    /// caller account for all d^N codes of this mask at once.
    fn corruption_connects(&self, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        let adj = self.region.adj_table();
        let d = self.d;
        let start = self.sphere_start;
        let mut visited: u64 = 1;
        let mut frontier: u64 = 1;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let v_corr = (mask >> v) & 1 != 0;
            let row = &adj[v * d..(v + 1) * d];
            for &w in row {
                if w == NO_NEIGHBOR {
                    continue;
                }
                let wu = w as usize;
                if (visited >> wu) & 1 != 0 {
                    continue;
                }
                if v_corr || (mask >> wu) & 1 != 0 {
                    if wu >= start {
                        return true;
                    }
                    visited |= 1 << wu;
                    frontier |= 1 << wu;
                }
            }
        }
        false
    }

    /// Advance the little-endian base-d digit vector by one.
    #[inline]
    fn bump(comp: &mut [u8], d: u8) {
        for digit in comp.iter_mut() {
            *digit += 1;
            if *digit < d {
                return;
            }
            *digit = 0;
        }
    }

    fn theta_counts(&self) -> &[u64] {
        self.theta_counts.get_or_init(|| {
            let mut counts = vec![0u64; self.sites + 1];
            let mut comp = vec![0u8; self.sites];
            for mask in 0..(1u64 << self.sites) {
                let m = mask.count_ones() as usize;
                if self.corruption_connects(mask) {
                    counts[m] += self.codes;
                    continue;
                }
                comp.fill(0);
                let mut code = 0u64;
                loop {
                    if self.connects(mask, &comp) {
                        counts[m] += 1;
                    }
                    code += 1;
                    if code == self.codes {
                        break;
                    }
                    Self::bump(&mut comp, self.d as u8);
                }
            }
            counts
        })
    }

    pub fn theta_polynomial(&self) -> &ThetaPolynomial {
        self.theta_poly.get_or_init(|| {
            ThetaPolynomial::from_mass_counts(
                self.region.spec(),
                self.n,
                self.theta_counts(),
                self.sites,
                self.d,
            )
        })
    }

    pub fn theta_at(&self, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        Ok(self.theta_polynomial().evaluate(p))
    }

    pub fn theta_derivative_at(&self, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        Ok(self.theta_polynomial().derivative_at(p))
    }

    /// Indicator over every atom, bit-packed; transient input for the
    /// influence/pivotality tables.
    fn build_f_table(&self) -> Result<Vec<u64>> {
        let total = (1u128 << self.sites) * self.codes as u128;
        let bits = (total as f64).log2();
        if bits > TABLE_BITS_LIMIT {
            return Err(Error::EnumerationTooLarge {
                bits,
                limit: TABLE_BITS_LIMIT,
            });
        }
        let total = total as u64;
        let mut words = vec![0u64; total.div_ceil(64) as usize];
        let mut comp = vec![0u8; self.sites];
        for mask in 0..(1u64 << self.sites) {
            let base = mask * self.codes;
            if self.corruption_connects(mask) {
                fill_bits(&mut words, base, base + self.codes);
                continue;
            }
            comp.fill(0);
            let mut code = 0u64;
            loop {
                if self.connects(mask, &comp) {
                    let idx = base + code;
                    words[(idx >> 6) as usize] |= 1 << (idx & 63);
                }
                code += 1;
                if code == self.codes {
                    break;
                }
                Self::bump(&mut comp, self.d as u8);
            }
        }
        Ok(words)
    }

    /// Influence and pivotality mass buckets for every vertex.
    ///
    /// For vertex v and a fixed assignment of the other N-1 coordinates
    /// ("rest", corruption mass m) let c_b be the number of compass slots
    /// with indicator 1 when v's corruption bit is b. Resampling X_v
    /// independently disagrees with probability
    ///   [(1-p)^2 2c0(d-c0) + p(1-p) 2(d(c0+c1) - 2c0c1) + p^2 2c1(d-c1)]/d^2,
    /// so the three terms land in mass buckets m, m+1, m+2 over denominator
    /// d^(N+1). Flipping the corruption bit changes the indicator on exactly
    /// the slots where the two rows differ; those counts land in bucket m
    /// over denominator d^N.
    fn inf_piv_tables(&self) -> Result<&(MassTable, MassTable)> {
        if self.inf_piv.get().is_none() {
            let f = self.build_f_table()?;
            let nsites = self.sites;
            let d = self.d as u64;
            let mut inf = vec![vec![0u64; nsites + 2]; nsites];
            let mut piv = vec![vec![0u64; nsites]; nsites];
            let get = |idx: u64| -> u64 { (f[(idx >> 6) as usize] >> (idx & 63)) & 1 };
            for v in 0..nsites {
                let bit_stride = (1u64 << v) * self.codes;
                let slot_stride = d.pow(v as u32);
                let hi_count = self.codes / (slot_stride * d);
                let inf_v = &mut inf[v];
                let piv_v = &mut piv[v];
                for rest in 0..(1u64 << (nsites - 1)) {
                    let low = rest & ((1u64 << v) - 1);
                    let mask = ((rest >> v) << (v + 1)) | low;
                    let m = mask.count_ones() as usize;
                    let mask_base = mask * self.codes;
                    for hi in 0..hi_count {
                        let row = mask_base + hi * slot_stride * d;
                        for lo in 0..slot_stride {
                            let base = row + lo;
                            let mut c0 = 0u64;
                            let mut c1 = 0u64;
                            let mut diff = 0u64;
                            for a in 0..d {
                                let f0 = get(base + a * slot_stride);
                                let f1 = get(base + bit_stride + a * slot_stride);
                                c0 += f0;
                                c1 += f1;
                                diff += (f0 != f1) as u64;
                            }
                            inf_v[m] += 2 * c0 * (d - c0);
                            inf_v[m + 1] += 2 * (d * (c0 + c1) - 2 * c0 * c1);
                            inf_v[m + 2] += 2 * c1 * (d - c1);
                            piv_v[m] += diff;
                        }
                    }
                }
            }
            let _ = self.inf_piv.set((inf, piv));
        }
        Ok(self.inf_piv.get().expect("just initialized"))
    }

    pub fn influence_by_index(&self, idx: usize, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        self.region.vertex(idx); // panics on bad index like any slice
        let (inf, _) = self.inf_piv_tables()?;
        let den = BigInt::from(self.d).pow(self.sites as u32 + 1);
        Ok(mass_basis_value(&inf[idx], self.sites + 1, &den, p))
    }

    pub fn influence(&self, v: &VertexId, p: &BigRational) -> Result<BigRational> {
        self.influence_by_index(self.vertex_index(v)?, p)
    }

    pub fn pivotal_by_index(&self, idx: usize, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        self.region.vertex(idx);
        let (_, piv) = self.inf_piv_tables()?;
        let den = BigInt::from(self.d).pow(self.sites as u32);
        Ok(mass_basis_value(&piv[idx], self.sites - 1, &den, p))
    }

    pub fn pivotal(&self, v: &VertexId, p: &BigRational) -> Result<BigRational> {
        self.pivotal_by_index(self.vertex_index(v)?, p)
    }

    pub fn sum_influence(&self, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        let (inf, _) = self.inf_piv_tables()?;
        let den = BigInt::from(self.d).pow(self.sites as u32 + 1);
        let mut acc = BigRational::from_integer(0.into());
        for buckets in inf {
            acc += mass_basis_value(buckets, self.sites + 1, &den, p);
        }
        Ok(acc)
    }

    pub fn sum_pivotal(&self, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        let (_, piv) = self.inf_piv_tables()?;
        let den = BigInt::from(self.d).pow(self.sites as u32);
        let mut acc = BigRational::from_integer(0.into());
        for buckets in piv {
            acc += mass_basis_value(buckets, self.sites - 1, &den, p);
        }
        Ok(acc)
    }

    /// Revealment mass buckets for the tree seeded at ∂Λ_k: for every atom,
    /// run the tree and tally which vertices it revealed.
    fn rev_tables(&self, k: u32) -> Result<Arc<MassTable>> {
        if k < 1 || k > self.n {
            return Err(Error::Parameter(format!(
                "tree seeding radius k = {k} must satisfy 1 <= k <= n = {}",
                self.n
            )));
        }
        if let Some(t) = self.rev.lock().unwrap().get(&k) {
            return Ok(t.clone());
        }
        let mut tables = vec![vec![0u64; self.sites + 1]; self.sites];
        let mut state = ExplicitState::new(self.region.clone());
        let mut scratch = TreeScratch::new(self.sites);
        for mask in 0..(1u64 << self.sites) {
            let m = mask.count_ones() as usize;
            for i in 0..self.sites {
                state.corrupted[i] = (mask >> i) & 1 != 0;
            }
            state.compass.fill(0);
            let mut code = 0u64;
            loop {
                scratch.run(&state, self.n, k).expect("k validated");
                for &rv in scratch.revealed() {
                    tables[rv as usize][m] += 1;
                }
                code += 1;
                if code == self.codes {
                    break;
                }
                Self::bump(&mut state.compass, self.d as u8);
            }
        }
        let arc = Arc::new(tables);
        self.rev.lock().unwrap().insert(k, arc.clone());
        Ok(arc)
    }

    pub fn revealment_by_index(&self, k: u32, idx: usize, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        self.region.vertex(idx);
        let tables = self.rev_tables(k)?;
        let den = BigInt::from(self.d).pow(self.sites as u32);
        Ok(mass_basis_value(&tables[idx], self.sites, &den, p))
    }

    pub fn revealment(&self, k: u32, v: &VertexId, p: &BigRational) -> Result<BigRational> {
        self.revealment_by_index(k, self.vertex_index(v)?, p)
    }

    /// Σ_v Rev_v(T_k) · Inf_v, the right-hand side of the variance bound.
    pub fn revealment_influence_sum(&self, k: u32, p: &BigRational) -> Result<BigRational> {
        check_probability(p)?;
        let rev = self.rev_tables(k)?;
        let (inf, _) = self.inf_piv_tables()?;
        let rev_den = BigInt::from(self.d).pow(self.sites as u32);
        let inf_den = BigInt::from(self.d).pow(self.sites as u32 + 1);
        let mut acc = BigRational::from_integer(0.into());
        for v in 0..self.sites {
            let r = mass_basis_value(&rev[v], self.sites, &rev_den, p);
            let i = mass_basis_value(&inf[v], self.sites + 1, &inf_den, p);
            acc += r * i;
        }
        Ok(acc)
    }
}

/// Set bits [start, end) in a packed word array.
fn fill_bits(words: &mut [u64], start: u64, end: u64) {
    if start >= end {
        return;
    }
    let sw = (start >> 6) as usize;
    let sb = (start & 63) as u32;
    let ew = (end >> 6) as usize;
    let eb = (end & 63) as u32;
    if sw == ew {
        words[sw] |= ((1u64 << eb) - 1) ^ ((1u64 << sb) - 1);
        return;
    }
    words[sw] |= !0u64 << sb;
    for w in &mut words[sw + 1..ew] {
        *w = !0;
    }
    if eb > 0 {
        words[ew] |= (1u64 << eb) - 1;
    }
}
