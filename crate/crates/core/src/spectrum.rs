//! Exact Dirichlet spectrum of `Σᵢ(−∂ᵢ²)ˢ` on the open hypercube `(0, L)^d`.
//!
//! Eigenvalues are `ℰ_n = Σᵢ (nᵢπ/L)^{2s}` over the lattice `n ∈ ℤ₊^d`, so
//! every spectral question here is a lattice-point question inside a
//! 2s-deformed ball of radius `(L/π)ℰ^{1/2s}`:
//!
//! * [`counting_function`] slices the ball recursively along the coordinates
//!   and closes the last coordinate with a floor, so the work is proportional
//!   to the number of `(d−1)`-dimensional slices rather than to the volume.
//! * [`enumerate_smallest`] runs a best-first search over the lattice poset.
//!   A point enters the frontier once all of its predecessors `n − eᵢ` have
//!   been emitted, which yields exactly the `k` smallest values without
//!   scanning a box.
//! * [`enumerate_up_to`] collects every point below an energy cutoff.
//!
//! The brute-force box scans ([`brute_force_count`], [`brute_force_smallest`])
//! are kept alongside as the reference oracle.
//!
//! The outermost coordinate is distributed over the rayon pool and merged in
//! coordinate order, so results do not depend on the worker count.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{BoundReport, Direction, DomainSpec};
use crate::error::{domain, Error, Result};
use crate::specfun::check_order;

pub const MAX_DIM: usize = 10;
pub const DEFAULT_MAX_RECORDS: usize = 10_000_000;
pub const DEFAULT_MAX_FRONTIER: usize = 20_000_000;
/// Relative width of a multiplicity class.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Boundary slack, scaled by `max(1, E)`.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Which multi-indices label eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexSet {
    /// All `nᵢ ≥ 1` (the sine-product basis).
    Positive,
    /// All `nᵢ ≥ 0` except the origin; only for sensitivity studies.
    NonNegative,
}

impl IndexSet {
    fn lower(self) -> u32 {
        match self {
            IndexSet::Positive => 1,
            IndexSet::NonNegative => 0,
        }
    }
}

/// How lattice points on the ball boundary are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// `ℰ ≤ E + slack`.
    Inclusive,
    /// `ℰ < E − slack`.
    Exclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralParams {
    d: usize,
    s: f64,
    side: f64,
    unit: f64,
    strict: bool,
    index_set: IndexSet,
    boundary: Boundary,
    max_records: usize,
    max_frontier: usize,
}

impl SpectralParams {
    /// Dimension `1 ≤ d ≤ 10`, order `s ∈ (0, 1]`, side `L > 0`, `D_{2s} = 1`.
    pub fn new(d: usize, s: f64, side: f64) -> Result<Self> {
        Self::build(d, s, side, false)
    }

    /// As [`SpectralParams::new`] with `s` restricted to `(1/2, 1]`.
    pub fn strict(d: usize, s: f64, side: f64) -> Result<Self> {
        Self::build(d, s, side, true)
    }

    fn build(d: usize, s: f64, side: f64, strict: bool) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return domain(format!("dimension must be in 1..={MAX_DIM}, got {d}"));
        }
        check_order(s, strict)?;
        if !side.is_finite() || side <= 0.0 {
            return domain(format!("side length L must be finite and > 0, got {side}"));
        }
        Ok(Self {
            d,
            s,
            side,
            unit: 1.0,
            strict,
            index_set: IndexSet::Positive,
            boundary: Boundary::Inclusive,
            max_records: DEFAULT_MAX_RECORDS,
            max_frontier: DEFAULT_MAX_FRONTIER,
        })
    }

    pub fn with_unit(mut self, d2s: f64) -> Result<Self> {
        if !d2s.is_finite() || d2s <= 0.0 {
            return domain(format!("unit constant D_2s must be > 0, got {d2s}"));
        }
        self.unit = d2s;
        Ok(self)
    }

    pub fn with_index_set(mut self, set: IndexSet) -> Self {
        self.index_set = set;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_max_records(mut self, max: usize) -> Self {
        self.max_records = max;
        self
    }

    pub fn with_max_frontier(mut self, max: usize) -> Self {
        self.max_frontier = max;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn max_records(&self) -> usize {
        self.max_records
    }

    /// The cube as a tiling domain of volume `L^d`.
    pub fn domain(&self) -> DomainSpec {
        DomainSpec::hypercube(self.d, self.side).expect("validated parameters")
    }

    /// Converts a physical energy `E` into `ℰ = E/D_{2s}`.
    pub fn reduced_energy(&self, physical: f64) -> f64 {
        physical / self.unit
    }

    /// Converts `ℰ` back to the physical energy `E = D_{2s}ℰ`.
    pub fn physical_energy(&self, reduced: f64) -> f64 {
        reduced * self.unit
    }

    /// One-dimensional contribution `(nπ/L)^{2s}`.
    pub fn term(&self, n: u32) -> f64 {
        if n == 0 {
            0.0
        } else {
            (2.0 * self.s * (n as f64 * PI / self.side).ln()).exp()
        }
    }

    pub fn slack(&self, energy: f64) -> f64 {
        BOUNDARY_SLACK * energy.abs().max(1.0)
    }

    /// Whether a value lies inside the ball of energy `energy` under the
    /// configured boundary policy.
    pub fn admits(&self, value: f64, energy: f64) -> bool {
        let slack = self.slack(energy);
        match self.boundary {
            Boundary::Inclusive => value <= energy + slack,
            Boundary::Exclusive => value < energy - slack,
        }
    }

    /// Largest coordinate that can occur below `energy`.
    pub fn coordinate_bound(&self, energy: f64) -> u32 {
        let e = energy + self.slack(energy);
        if e <= 0.0 {
            return 0;
        }
        let r = self.side / PI * e.powf(1.0 / (2.0 * self.s));
        let mut m = r.floor().min(u32::MAX as f64 - 2.0) as u32;
        while self.term(m + 1) <= e {
            m += 1;
        }
        while m > 0 && self.term(m) > e {
            m -= 1;
        }
        m
    }

    /// Lowest eigenvalue `ℰ₁`.
    pub fn ground_energy(&self) -> f64 {
        match self.index_set {
            IndexSet::Positive => self.d as f64 * self.term(1),
            IndexSet::NonNegative => self.term(1),
        }
    }

    fn check_index(&self, n: &[u32]) -> Result<()> {
        if n.len() != self.d {
            return domain(format!("multi-index has {} components, expected {}", n.len(), self.d));
        }
        let lo = self.index_set.lower();
        if n.iter().any(|&c| c < lo) {
            return domain(format!("multi-index components must be >= {lo}: {n:?}"));
        }
        if n.iter().all(|&c| c == 0) {
            return domain("the all-zero multi-index carries no eigenfunction");
        }
        Ok(())
    }

    fn value_unchecked(&self, n: &[u32]) -> f64 {
        // Sum in sorted coordinate order so permuted indices agree bit for bit.
        let mut buf = [0u32; MAX_DIM];
        let buf = &mut buf[..n.len()];
        buf.copy_from_slice(n);
        buf.sort_unstable();
        buf.iter().map(|&c| self.term(c)).sum()
    }
}

/// One eigenvalue with its lattice label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    pub value: f64,
    pub index: Vec<u32>,
    /// Number of records in this slice sharing the value within
    /// [`TIE_TOLERANCE`].
    pub multiplicity: u32,
    /// 1-based ordinal of the multiplicity class inside the slice.
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Cutoff {
    Count(usize),
    Energy(f64),
}

/// An ordered run of the spectrum starting at `ℰ₁`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSlice {
    pub params: SpectralParams,
    pub records: Vec<EigenvalueRecord>,
    pub cutoff: Cutoff,
}

impl SpectrumSlice {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.value)
    }

    pub fn last(&self) -> Option<&EigenvalueRecord> {
        self.records.last()
    }

    /// Energy below which the slice provably holds every eigenvalue, together
    /// with whether the bound itself is covered.
    ///
    /// An energy slice is complete through its cutoff inclusively. A count
    /// slice is complete strictly below the multiplicity class of its last
    /// value, since further lattice points may tie with it.
    pub fn complete_through(&self) -> (f64, bool) {
        match self.cutoff {
            Cutoff::Energy(e) => (e, true),
            Cutoff::Count(_) => (self.records.last().map_or(0.0, |r| r.value * (1.0 - TIE_TOLERANCE)), false),
        }
    }

    /// True when every eigenvalue `≤ energy` is present.
    pub fn covers(&self, energy: f64) -> bool {
        let (through, inclusive) = self.complete_through();
        if inclusive {
            energy <= through
        } else {
            energy < through
        }
    }
}

/// `ℰ_n = Σᵢ |nᵢπ/L|^{2s}`.
pub fn eigenvalue(params: &SpectralParams, n: &[u32]) -> Result<f64> {
    params.check_index(n)?;
    Ok(params.value_unchecked(n))
}

struct Slicer<'a> {
    params: &'a SpectralParams,
    terms: Vec<f64>,
    lo: u32,
    slack: f64,
}

impl<'a> Slicer<'a> {
    fn new(params: &'a SpectralParams, energy: f64) -> Self {
        let top = params.coordinate_bound(energy) + 2;
        let terms = (0..=top).map(|n| params.term(n)).collect();
        Self { params, terms, lo: params.index_set.lower(), slack: params.slack(energy) }
    }

    fn fits(&self, value: f64, budget: f64) -> bool {
        match self.params.boundary {
            Boundary::Inclusive => value <= budget + self.slack,
            Boundary::Exclusive => value < budget - self.slack,
        }
    }

    /// Coordinates `m ≥ lo` admissible against `budget` in the last slot.
    fn last_dim(&self, budget: f64) -> u64 {
        let lo = self.lo as usize;
        if lo >= self.terms.len() || !self.fits(self.terms[lo], budget) {
            return 0;
        }
        let reach = (budget + self.slack).max(0.0);
        let guess = self.params.side / PI * reach.powf(1.0 / (2.0 * self.params.s));
        let mut m = (guess.floor() as usize).clamp(lo, self.terms.len() - 1);
        while m + 1 < self.terms.len() && self.fits(self.terms[m + 1], budget) {
            m += 1;
        }
        while m > lo && !self.fits(self.terms[m], budget) {
            m -= 1;
        }
        (m - lo + 1) as u64
    }

    fn count(&self, dims: usize, budget: f64) -> u64 {
        if dims == 1 {
            return self.last_dim(budget);
        }
        let rest_min = (dims - 1) as f64 * self.terms[self.lo as usize];
        let mut total = 0;
        let mut n = self.lo as usize;
        while n < self.terms.len() && self.terms[n] + rest_min <= budget + 2.0 * self.slack {
            total += self.count(dims - 1, budget - self.terms[n]);
            n += 1;
        }
        total
    }

    fn outer_range(&self, dims: usize, budget: f64) -> Vec<usize> {
        let rest_min = (dims - 1) as f64 * self.terms[self.lo as usize];
        (self.lo as usize..self.terms.len())
            .take_while(|&n| self.terms[n] + rest_min <= budget + 2.0 * self.slack)
            .collect()
    }

    fn collect(&self, dims: usize, budget: f64, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if dims == 1 {
            let count = self.last_dim(budget) as usize;
            for m in 0..count {
                let mut idx = prefix.clone();
                idx.push(self.lo + m as u32);
                out.push(idx);
            }
            return;
        }
        for n in self.outer_range(dims, budget) {
            prefix.push(n as u32);
            self.collect(dims - 1, budget - self.terms[n], prefix, out);
            prefix.pop();
        }
    }
}

/// Exact `N(E) = #{n : ℰ_n ≤ E}` (or `<` under [`Boundary::Exclusive`]).
pub fn counting_function(params: &SpectralParams, energy: f64) -> u64 {
    if !energy.is_finite() || energy < 0.0 {
        return 0;
    }
    let slicer = Slicer::new(params, energy);
    let d = params.d;
    let total: u64 = if d == 1 {
        slicer.last_dim(energy)
    } else {
        let outer = slicer.outer_range(d, energy);
        let parts: Vec<u64> = outer
            .par_iter()
            .map(|&n| slicer.count(d - 1, energy - slicer.terms[n]))
            .collect();
        parts.iter().sum()
    };
    let origin_counted = params.index_set == IndexSet::NonNegative && slicer.fits(0.0, energy);
    total - u64::from(origin_counted)
}

fn sort_records(params: &SpectralParams, indices: Vec<Vec<u32>>) -> Vec<EigenvalueRecord> {
    let mut recs: Vec<EigenvalueRecord> = indices
        .into_par_iter()
        .map(|index| EigenvalueRecord { value: params.value_unchecked(&index), index, multiplicity: 1, level: 0 })
        .collect();
    recs.par_sort_unstable_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.index.cmp(&b.index)));
    recs
}

fn assign_levels(records: &mut [EigenvalueRecord]) {
    let mut start = 0;
    let mut level = 0;
    while start < records.len() {
        let head = records[start].value;
        let mut end = start + 1;
        while end < records.len() && (records[end].value - head).abs() <= TIE_TOLERANCE * head.abs().max(f64::MIN_POSITIVE) {
            end += 1;
        }
        level += 1;
        let mult = (end - start) as u32;
        for r in &mut records[start..end] {
            r.multiplicity = mult;
            r.level = level;
        }
        start = end;
    }
}

/// Every eigenvalue `≤ E`, sorted by value then lexicographic index.
pub fn enumerate_up_to(params: &SpectralParams, energy: f64) -> Result<SpectrumSlice> {
    if !energy.is_finite() {
        return domain("energy cutoff must be finite");
    }
    let expected = counting_function(params, energy);
    if expected as usize > params.max_records {
        return Err(Error::ResourceLimit(format!(
            "{expected} eigenvalues below {energy} exceed the record budget {}",
            params.max_records
        )));
    }
    let mut indices = Vec::with_capacity(expected as usize);
    if energy >= 0.0 {
        let slicer = Slicer::new(params, energy);
        let d = params.d;
        if d == 1 {
            slicer.collect(1, energy, &mut Vec::new(), &mut indices);
        } else {
            let outer = slicer.outer_range(d, energy);
            let parts: Vec<Vec<Vec<u32>>> = outer
                .par_iter()
                .map(|&n| {
                    let mut out = Vec::new();
                    let mut prefix = vec![n as u32];
                    slicer.collect(d - 1, energy - slicer.terms[n], &mut prefix, &mut out);
                    out
                })
                .collect();
            indices.extend(parts.into_iter().flatten());
        }
    }
    indices.retain(|idx| idx.iter().any(|&c| c != 0));
    let mut records = sort_records(params, indices);
    assign_levels(&mut records);
    Ok(SpectrumSlice { params: params.clone(), records, cutoff: Cutoff::Energy(energy) })
}

#[derive(Debug, Clone, PartialEq)]
struct FrontierNode {
    value: f64,
    index: Box<[u32]>,
}

impl Eq for FrontierNode {}

impl PartialOrd for FrontierNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FrontierNode {
    // Reversed: BinaryHeap is a max-heap and we pop the smallest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.value.total_cmp(&self.value).then_with(|| other.index.cmp(&self.index))
    }
}

/// The `k` smallest eigenvalues with multiplicity, ties broken by
/// lexicographic multi-index.
pub fn enumerate_smallest(params: &SpectralParams, k: usize) -> Result<SpectrumSlice> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    if k > params.max_records {
        return Err(Error::ResourceLimit(format!("k = {k} exceeds the record budget {}", params.max_records)));
    }
    let d = params.d;
    let lo = params.index_set.lower();
    let mut records = Vec::with_capacity(k);

    let root: Box<[u32]> = vec![lo; d].into_boxed_slice();
    let mut heap = BinaryHeap::new();
    let mut pending: HashMap<Box<[u32]>, u8> = HashMap::new();
    heap.push(FrontierNode { value: params.value_unchecked(&root), index: root });

    while let Some(node) = heap.pop() {
        let emitted = node.index.iter().any(|&c| c != 0);
        if emitted {
            records.push(EigenvalueRecord { value: node.value, index: node.index.to_vec(), multiplicity: 1, level: 0 });
            if records.len() == k {
                break;
            }
        }
        for i in 0..d {
            let mut child = node.index.clone();
            child[i] += 1;
            let required = child.iter().filter(|&&c| c > lo).count() as u8;
            let ready = if required <= 1 {
                true
            } else {
                let seen = pending.entry(child.clone()).or_insert(0);
                *seen += 1;
                *seen == required
            };
            if ready {
                if required > 1 {
                    pending.remove(&child);
                }
                heap.push(FrontierNode { value: params.value_unchecked(&child), index: child });
            }
        }
        if heap.len() + pending.len() > params.max_frontier {
            return Err(Error::ResourceLimit(format!(
                "search frontier exceeded {} points after {} records",
                params.max_frontier,
                records.len()
            )));
        }
    }
    assign_levels(&mut records);
    Ok(SpectrumSlice { params: params.clone(), records, cutoff: Cutoff::Count(k) })
}

/// `S(N)`: sum of the `N` smallest eigenvalues in enumeration order.
pub fn eigenvalue_sum(params: &SpectralParams, n: usize) -> Result<f64> {
    let slice = enumerate_smallest(params, n)?;
    Ok(slice.values().sum())
}

/// Checks `ℰ_n(L) = λ^{2s}·ℰ_n(λL)` for `λ ∈ (0, 1)`.
pub fn scaled_eigenvalue_check(params: &SpectralParams, lambda: f64, n: &[u32]) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain(format!("scale factor must lie in (0, 1), got {lambda}"));
    }
    scaled_eigenvalue_check_inclusive(params, lambda, n)
}

/// As [`scaled_eigenvalue_check`], also admitting the identity `λ = 1`.
pub fn scaled_eigenvalue_check_inclusive(params: &SpectralParams, lambda: f64, n: &[u32]) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return domain(format!("scale factor must lie in (0, 1], got {lambda}"));
    }
    let big = eigenvalue(params, n)?;
    let mut shrunk = params.clone();
    shrunk.side = params.side * lambda;
    let small = eigenvalue(&shrunk, n)?;
    let rescaled = lambda.powf(2.0 * params.s) * small;
    Ok(BoundReport::new(
        "scaling",
        format!("lambda={lambda},n={n:?}"),
        big,
        rescaled,
        Direction::Equal,
        1e-12,
    ))
}

/// Exhaustive count over the box `[lo, M]^d`.
pub fn brute_force_count(params: &SpectralParams, energy: f64) -> u64 {
    if !energy.is_finite() || energy < 0.0 {
        return 0;
    }
    let top = params.coordinate_bound(energy);
    let lo = params.index_set.lower();
    let mut count = 0;
    for_each_in_box(params.d, lo, top, |idx| {
        if idx.iter().any(|&c| c != 0) && params.admits(params.value_unchecked(idx), energy) {
            count += 1;
        }
    });
    count
}

/// The `k` smallest eigenvalues by exhaustive box scan, grown until the
/// box provably contains them.
pub fn brute_force_smallest(params: &SpectralParams, k: usize) -> Result<Vec<EigenvalueRecord>> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    let lo = params.index_set.lower();
    let mut top = lo.max(1) + 1;
    loop {
        // Anything outside the box has a coordinate > top.
        let outside_min = params.term(top + 1) + (params.d - 1) as f64 * params.term(lo);
        let mut inside = Vec::new();
        for_each_in_box(params.d, lo, top, |idx| {
            if idx.iter().any(|&c| c != 0) {
                let v = params.value_unchecked(idx);
                if v < outside_min {
                    inside.push(idx.to_vec());
                }
            }
        });
        if inside.len() >= k {
            let mut recs = sort_records(params, inside);
            recs.truncate(k);
            assign_levels(&mut recs);
            return Ok(recs);
        }
        top = top.checked_mul(2).ok_or_else(|| Error::ResourceLimit("box overflow".into()))?;
        let volume = ((top - lo + 1) as f64).powi(params.d as i32);
        if volume > 1e9 {
            return Err(Error::ResourceLimit(format!("brute-force box of {volume:.2e} points")));
        }
    }
}

fn for_each_in_box(d: usize, lo: u32, top: u32, mut f: impl FnMut(&[u32])) {
    if top < lo {
        return;
    }
    let mut idx = vec![lo; d];
    loop {
        f(&idx);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < top {
                idx[i] += 1;
                for c in &mut idx[i + 1..] {
                    *c = lo;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(d: usize, s: f64, side: f64) -> SpectralParams {
        SpectralParams::new(d, s, side).unwrap()
    }

    // Independent oracle: nested loops with direct powf, no shared helpers.
    fn naive_values(d: usize, s: f64, side: f64, top: u32) -> Vec<f64> {
        let mut out = vec![0.0f64];
        for _ in 0..d {
            let mut next = Vec::new();
            for v in &out {
                for n in 1..=top {
                    next.push(v + (n as f64 * PI / side).powf(2.0 * s));
                }
            }
            out = next;
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn params_validation() {
        assert!(SpectralParams::new(0, 1.0, 1.0).is_err());
        assert!(SpectralParams::new(11, 1.0, 1.0).is_err());
        assert!(SpectralParams::new(2, 0.0, 1.0).is_err());
        assert!(SpectralParams::new(2, 1.2, 1.0).is_err());
        assert!(SpectralParams::new(2, 1.0, -1.0).is_err());
        assert!(SpectralParams::strict(2, 0.5, 1.0).is_err());
        assert!(SpectralParams::strict(2, 0.75, 1.0).is_ok());
        assert!(cube(2, 1.0, 1.0).with_unit(0.0).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        for d in 1..=5 {
            let p = cube(d, 0.7, PI);
            assert!((eigenvalue(&p, &vec![1; d]).unwrap() - d as f64).abs() < 1e-12);
        }
        assert!((eigenvalue(&cube(2, 1.0, PI), &[1, 2]).unwrap() - 5.0).abs() < 1e-12);
        let v = eigenvalue(&cube(1, 0.75, PI), &[2]).unwrap();
        assert!((v - 2f64.powf(1.5)).abs() < 1e-12);
        assert!((v - 2.828_427_1).abs() < 1e-7);
    }

    #[test]
    fn eigenvalue_rejects_bad_index() {
        let p = cube(2, 1.0, PI);
        assert!(matches!(eigenvalue(&p, &[0, 1]), Err(Error::Domain(_))));
        assert!(eigenvalue(&p, &[1]).is_err());
        let z = p.with_index_set(IndexSet::NonNegative);
        assert!((eigenvalue(&z, &[0, 1]).unwrap() - 1.0).abs() < 1e-12);
        assert!(eigenvalue(&z, &[0, 0]).is_err());
    }

    #[test]
    fn unit_conversion() {
        let p = cube(2, 1.0, PI).with_unit(2.5).unwrap();
        assert_eq!(p.reduced_energy(5.0), 2.0);
        assert_eq!(p.physical_energy(2.0), 5.0);
    }

    #[test]
    fn enumerate_examples() {
        let vals: Vec<f64> = enumerate_smallest(&cube(2, 1.0, PI), 5).unwrap().values().collect();
        let oracle = naive_values(2, 1.0, PI, 10);
        for (a, b) in vals.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(vals.iter().map(|v| v.round() as i64).collect::<Vec<_>>(), vec![2, 5, 5, 8, 10]);

        for s in [0.6, 0.8, 1.0] {
            let vals: Vec<f64> = enumerate_smallest(&cube(1, s, PI), 3).unwrap().values().collect();
            for (i, v) in vals.iter().enumerate() {
                let e = ((i + 1) as f64).powf(2.0 * s);
                assert!((v - e).abs() < 1e-12 * e);
            }
        }
        let one = enumerate_smallest(&cube(3, 1.0, PI), 1).unwrap();
        assert_eq!(one.records[0].index, vec![1, 1, 1]);
        assert!((one.records[0].value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn enumerate_ties_are_lexicographic_and_grouped() {
        let slice = enumerate_smallest(&cube(2, 1.0, PI), 5).unwrap();
        assert_eq!(slice.records[1].index, vec![1, 2]);
        assert_eq!(slice.records[2].index, vec![2, 1]);
        assert_eq!(slice.records[1].multiplicity, 2);
        assert_eq!(slice.records[1].level, 2);
        assert_eq!(slice.records[2].level, 2);
        assert_eq!(slice.records[3].level, 3);
    }

    #[test]
    fn counting_examples() {
        let p = cube(2, 1.0, PI);
        assert_eq!(counting_function(&p, 8.0), 4);
        assert_eq!(counting_function(&p, 1.999), 0);
        assert_eq!(counting_function(&p, -3.0), 0);
        // (1,1,1), (2,1,1)×3, (2,2,1)×3, (3,1,1)×3 and (2,2,2) = 12.
        assert_eq!(counting_function(&cube(3, 1.0, PI), 12.0), 11);
        assert_eq!(naive_values(3, 1.0, PI, 4).iter().filter(|&&v| v <= 12.0 + 1e-9).count(), 11);
        assert_eq!(counting_function(&p.clone().with_boundary(Boundary::Exclusive), 8.0), 3);
    }

    #[test]
    fn counting_matches_naive_small() {
        for d in 1..=3 {
            for s in [0.6, 0.75, 1.0] {
                for side in [1.0, PI] {
                    let p = cube(d, s, side);
                    let top = 12;
                    let all = naive_values(d, s, side, top);
                    // Energies well inside the box so the oracle is exhaustive.
                    let emax = p.term(top);
                    for frac in [0.1, 0.33, 0.5, 0.77, 1.0] {
                        let e = frac * emax;
                        let expect = all.iter().filter(|&&v| v <= e + 1e-12 * e.max(1.0)).count() as u64;
                        assert_eq!(counting_function(&p, e), expect, "d={d} s={s} L={side} E={e}");
                    }
                }
            }
        }
    }

    #[test]
    fn sum_examples() {
        let p = cube(3, 0.8, 2.0);
        assert!((eigenvalue_sum(&p, 1).unwrap() - p.ground_energy()).abs() < 1e-12);
        assert!((eigenvalue_sum(&cube(2, 1.0, PI), 5).unwrap() - 30.0).abs() < 1e-10);
        let s = eigenvalue_sum(&cube(1, 0.75, PI), 3).unwrap();
        let e = 1.0 + 2f64.powf(1.5) + 3f64.powf(1.5);
        assert!((s - e).abs() < 1e-12 * e);
        assert!((s - 9.0245).abs() < 1e-4);
    }

    #[test]
    fn scaling_examples() {
        let p = cube(2, 1.0, PI);
        let r = scaled_eigenvalue_check_inclusive(&p, 1.0, &[3, 4]).unwrap();
        assert_eq!(r.margin, 0.0);
        let r = scaled_eigenvalue_check(&p, 0.5, &[1, 1]).unwrap();
        assert!((r.exact - 2.0).abs() < 1e-12);
        assert!((r.bound - 2.0).abs() < 1e-12);
        assert!(r.satisfied);
        let r = scaled_eigenvalue_check(&cube(1, 0.6, 1.0), 0.3, &[2]).unwrap();
        assert!(r.margin.abs() <= 1e-12 * r.exact);
        assert!(scaled_eigenvalue_check(&p, 1.0, &[1, 1]).is_err());
        assert!(scaled_eigenvalue_check(&p, 0.0, &[1, 1]).is_err());
    }

    #[test]
    fn resource_limits() {
        let p = cube(2, 1.0, PI).with_max_records(10);
        assert!(matches!(enumerate_smallest(&p, 11), Err(Error::ResourceLimit(_))));
        assert!(matches!(enumerate_up_to(&p, 1e4), Err(Error::ResourceLimit(_))));
        let p = cube(3, 1.0, PI).with_max_frontier(5);
        assert!(matches!(enumerate_smallest(&p, 1000), Err(Error::ResourceLimit(_))));
        assert!(enumerate_smallest(&cube(2, 1.0, PI), 0).is_err());
    }

    #[test]
    fn energy_slice_agrees_with_count_slice() {
        let p = cube(3, 0.75, 1.3);
        let by_count = enumerate_smallest(&p, 500).unwrap();
        let e = by_count.last().unwrap().value;
        let by_energy = enumerate_up_to(&p, e).unwrap();
        assert!(by_energy.len() >= 500);
        for (a, b) in by_count.records.iter().zip(&by_energy.records) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn zero_component_index_set() {
        let p = cube(2, 1.0, PI).with_index_set(IndexSet::NonNegative);
        // (0,1),(1,0),(1,1),(0,2),(2,0) with values 1,1,2,4,4
        let vals: Vec<f64> = enumerate_smallest(&p, 5).unwrap().values().collect();
        let want = [1.0, 1.0, 2.0, 4.0, 4.0];
        for (a, b) in vals.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(counting_function(&p, 4.0), 5);
        assert_eq!(brute_force_count(&p, 4.0), 5);
        assert_eq!(enumerate_up_to(&p, 4.0).unwrap().len(), 5);
    }

    #[test]
    fn brute_force_smallest_matches_frontier() {
        for (d, s) in [(1, 0.6), (2, 1.0), (3, 0.75), (4, 0.9)] {
            let p = cube(d, s, 1.7);
            let a = enumerate_smallest(&p, 300).unwrap();
            let b = brute_force_smallest(&p, 300).unwrap();
            assert_eq!(a.records, b);
        }
    }

    #[test]
    fn coverage_rules() {
        let p = cube(2, 1.0, PI);
        let s = enumerate_smallest(&p, 5).unwrap();
        assert!(s.covers(9.99));
        assert!(!s.covers(10.0));
        let s = enumerate_up_to(&p, 10.0).unwrap();
        assert!(s.covers(10.0));
        assert_eq!(s.len(), 6);
    }
}
