//! Riesz means and the heat trace over an exact spectrum, their asymptotic
//! forms and upper bounds, and quadrature checks of the fractional-integral
//! and Laplace-transform identities that link them.
//!
//! All energies are reduced (`ℰ = E/D_{2s}`), matching [`crate::spectrum`].

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{counting_bound_coefficient, BoundReport, Direction, DomainSpec};
use crate::error::{domain, precondition, Error, Result};
use crate::quad::{integrate_graded, QuadratureConfig};
use crate::specfun::{beta, check_order, gamma, ln_upper_gamma_bound, log_beta, riesz_classical_constant};
use crate::spectrum::{enumerate_up_to, IndexSet, SpectralParams, SpectrumSlice, BOUNDARY_SLACK};

/// Required relative residual of [`riesz_iteration_check`].
pub const ITERATION_TOLERANCE: f64 = 1e-8;
/// Required relative residual of [`laplace_identity_check`].
pub const LAPLACE_TOLERANCE: f64 = 1e-6;
/// Default absolute truncation tolerance for the heat trace.
pub const DEFAULT_HEAT_TOLERANCE: f64 = 1e-10;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszQuery {
    pub rho: f64,
    pub energy: f64,
}

impl RieszQuery {
    pub fn new(rho: f64, energy: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return domain(format!("Riesz order rho must be finite and >= 0, got {rho}"));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return domain(format!("energy must be finite and > 0, got {energy}"));
        }
        Ok(Self { rho, energy })
    }
}

/// How `(E − ℰ)₊⁰` is read at `ℰ = E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ZeroOrder {
    /// `0⁰ = 0`: count `ℰ_j < E`.
    #[default]
    Strict,
    /// `0⁰ = 1`: count `ℰ_j ≤ E`.
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatQuery {
    pub t: f64,
    /// Absolute bound on the discarded tail.
    pub tolerance: f64,
}

impl HeatQuery {
    pub fn new(t: f64) -> Result<Self> {
        Self::with_tolerance(t, DEFAULT_HEAT_TOLERANCE)
    }

    pub fn with_tolerance(t: f64, tolerance: f64) -> Result<Self> {
        check_time(t)?;
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return domain(format!("tail tolerance must be > 0, got {tolerance}"));
        }
        Ok(Self { t, tolerance })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be finite and > 0, got {t}"));
    }
    Ok(())
}

/// What is known about the spectrum beyond the enumerated atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailModel {
    /// Every atom is present.
    Finite,
    /// `N(z) ≤ coefficient · z^exponent` for every `z ≥ 0`.
    PowerLaw { coefficient: f64, exponent: f64 },
    /// No usable bound.
    Unknown,
}

/// A weighted atomic spectrum, complete up to a known energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    values: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    through: f64,
    inclusive: bool,
    tail: TailModel,
}

impl SpectralMeasure {
    /// Unit-weight atoms of an enumerated hypercube spectrum. The tail is the
    /// counting upper bound for positive indices and unknown otherwise.
    pub fn from_slice(slice: &SpectrumSlice) -> Self {
        let (through, inclusive) = slice.complete_through();
        let p = &slice.params;
        let tail = match p.index_set() {
            IndexSet::Positive => TailModel::PowerLaw {
                coefficient: counting_bound_coefficient(&p.domain(), p.order()).expect("validated parameters"),
                exponent: p.dim() as f64 / (2.0 * p.order()),
            },
            IndexSet::NonNegative => TailModel::Unknown,
        };
        Self::build(slice.values().collect(), vec![1.0; slice.len()], through, inclusive, tail)
    }

    /// A finite toy spectrum of `(value, weight)` atoms.
    pub fn finite(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return domain("a finite spectrum needs at least one atom");
        }
        if atoms.iter().any(|&(v, w)| !(v.is_finite() && v >= 0.0 && w.is_finite() && w > 0.0)) {
            return domain("atoms need finite values >= 0 and weights > 0");
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, weights) = sorted.into_iter().unzip();
        Ok(Self::build(values, weights, f64::INFINITY, true, TailModel::Finite))
    }

    fn build(values: Vec<f64>, weights: Vec<f64>, through: f64, inclusive: bool, tail: TailModel) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { values, weights, cumulative, through, inclusive, tail }
    }

    /// Multiplies every weight (and the tail bound) by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return domain(format!("weight factor must be > 0, got {factor}"));
        }
        let tail = match self.tail {
            TailModel::PowerLaw { coefficient, exponent } => {
                TailModel::PowerLaw { coefficient: coefficient * factor, exponent }
            }
            other => other,
        };
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Ok(Self::build(self.values.clone(), weights, self.through, self.inclusive, tail))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `(E*, inclusive)`: every atom `≤ E*` (or `< E*`) is present.
    pub fn complete_through(&self) -> (f64, bool) {
        (self.through, self.inclusive)
    }

    pub fn covers(&self, energy: f64) -> bool {
        if self.inclusive {
            energy <= self.through
        } else {
            energy < self.through
        }
    }

    /// Number of atoms strictly below `e` (with slack) or up to `e`.
    fn rank(&self, e: f64, inclusive: bool) -> usize {
        let slack = BOUNDARY_SLACK * e.abs().max(1.0);
        if inclusive {
            self.values.partition_point(|&v| v <= e + slack)
        } else {
            self.values.partition_point(|&v| v < e - slack)
        }
    }

    /// `Σ w_j (E − ℰ_j)₊^ρ` without completeness checks.
    fn riesz_unchecked(&self, rho: f64, e: f64, zero: ZeroOrder) -> f64 {
        if rho == 0.0 {
            let k = self.rank(e, zero == ZeroOrder::Inclusive);
            return if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        }
        let k = self.values.partition_point(|&v| v < e);
        ordered_sum(k, |j| self.weights[j] * (e - self.values[j]).powf(rho))
    }

    /// `N(z) ≤ C z^a`, if a bound is known.
    fn counting_envelope(&self) -> Option<(f64, f64)> {
        match self.tail {
            TailModel::Finite => Some((self.total_weight(), 0.0)),
            TailModel::PowerLaw { coefficient, exponent } => Some((coefficient, exponent)),
            TailModel::Unknown => None,
        }
    }

    /// Bound on `Σ_{ℰ_j ≥ cut} w_j e^{−ℰ_j t}` from the counting envelope:
    /// `t∫_cut^∞ e^{−zt}N(z)dz ≤ C t^{−a} Γ(a+1, cut·t)`.
    fn heat_tail(&self, cut: f64, t: f64) -> f64 {
        if cut == f64::INFINITY {
            return 0.0;
        }
        match self.counting_envelope() {
            None => f64::INFINITY,
            Some((c, a)) => {
                if cut <= 0.0 {
                    return c * gamma(a + 1.0).unwrap_or(f64::INFINITY) * t.powf(-a);
                }
                (c.ln() - a * t.ln() + ln_upper_gamma_bound(a + 1.0, cut * t)).exp()
            }
        }
    }

    /// Bound on `∫_cut^∞ e^{−Et} R_ρ(E) dE` using
    /// `R_ρ(E) ≤ ρ C B(ρ, a+1) E^{ρ+a}`.
    fn laplace_tail(&self, rho: f64, cut: f64, t: f64) -> f64 {
        let Some((c, a)) = self.counting_envelope() else { return f64::INFINITY };
        let b = rho + a;
        let ln_k = c.ln() + rho.ln() + log_beta(rho, a + 1.0).unwrap_or(f64::INFINITY);
        (ln_k - (b + 1.0) * t.ln() + ln_upper_gamma_bound(b + 1.0, cut * t)).exp()
    }
}

impl From<&SpectrumSlice> for SpectralMeasure {
    fn from(slice: &SpectrumSlice) -> Self {
        Self::from_slice(slice)
    }
}

/// Neumaier-compensated sum of `f(0..n)` reduced in fixed-size chunks, so the
/// result does not depend on the thread count.
fn ordered_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    if n <= CHUNK {
        return compensated((0..n).map(f));
    }
    let parts: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| compensated((c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f)))
        .collect();
    compensated(parts.into_iter())
}

fn compensated(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `R_ρ(E) = Σ_j (E − ℰ_j)₊^ρ` with the strict reading of `0⁰`.
pub fn riesz_mean(m: &SpectralMeasure, q: &RieszQuery) -> Result<f64> {
    riesz_mean_with(m, q, ZeroOrder::Strict)
}

pub fn riesz_mean_with(m: &SpectralMeasure, q: &RieszQuery, zero: ZeroOrder) -> Result<f64> {
    if !m.covers(q.energy) {
        let (through, _) = m.complete_through();
        return Err(Error::IncompleteSpectrum(format!(
            "spectrum is complete through {through}, Riesz mean needs {}",
            q.energy
        )));
    }
    Ok(m.riesz_unchecked(q.rho, q.energy, zero))
}

/// `L^cl_{ρ,d,s} |Ω| E^{ρ+d/2s}`.
pub fn riesz_asymptote(dom: &DomainSpec, s: f64, q: &RieszQuery) -> Result<f64> {
    let c = riesz_classical_constant(q.rho, dom.d, s)?;
    Ok(c * dom.volume * q.energy.powf(q.rho + dom.d as f64 / (2.0 * s)))
}

/// `(2π)^{−d}((d+2s)/d)^{d/2s}(|A||Ω|/d) ρ B(ρ, 1+d/2s) E^{ρ+d/2s}`, for `ρ > 1`.
pub fn riesz_upper_bound(dom: &DomainSpec, s: f64, q: &RieszQuery) -> Result<f64> {
    if !(q.rho > 1.0) {
        return precondition(format!("the Riesz-mean upper bound is stated for rho > 1, got {}", q.rho));
    }
    let a = dom.d as f64 / (2.0 * s);
    let c = counting_bound_coefficient(dom, s)?;
    Ok(c * q.rho * beta(q.rho, 1.0 + a)? * q.energy.powf(q.rho + a))
}

/// A heat-trace value with the bound on what truncation discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Z(t) = Σ_j e^{−ℰ_j t}` with a certified truncation error.
pub fn partition_function(m: &SpectralMeasure, q: &HeatQuery) -> Result<f64> {
    Ok(partition_function_with_tail(m, q)?.value)
}

pub fn partition_function_with_tail(m: &SpectralMeasure, q: &HeatQuery) -> Result<TruncatedSum> {
    check_time(q.t)?;
    let (through, inclusive) = m.complete_through();
    let k = if through.is_infinite() { m.values.len() } else { m.rank(through, inclusive) };
    let tail = m.heat_tail(through, q.t);
    if !(tail <= q.tolerance) {
        return Err(Error::TailNotConvergent(format!(
            "heat-trace tail beyond {through} at t = {} is bounded by {tail:.3e}, above tolerance {:.3e}",
            q.t, q.tolerance
        )));
    }
    let value = ordered_sum(k, |j| m.weights[j] * (-m.values[j] * q.t).exp());
    Ok(TruncatedSum { value, tail_bound: tail })
}

/// Smallest reduced energy `E_c` (to bisection accuracy) at which the
/// certified heat-trace tail of the hypercube spectrum drops below
/// `q.tolerance`.
pub fn heat_cutoff(params: &SpectralParams, q: &HeatQuery) -> Result<f64> {
    check_time(q.t)?;
    if params.index_set() != IndexSet::Positive {
        return precondition("certified heat-trace truncation needs the positive index set");
    }
    let a = params.dim() as f64 / (2.0 * params.order());
    let c = counting_bound_coefficient(&params.domain(), params.order())?;
    let ln_target = q.tolerance.ln() - c.ln() + a * q.t.ln();
    let ok = |x: f64| ln_upper_gamma_bound(a + 1.0, x) <= ln_target;
    let mut hi = a + 2.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::TailNotConvergent(format!("no truncation reaches tolerance {:.3e}", q.tolerance)));
        }
    }
    let mut lo = a + 1.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi / q.t)
}

/// Enumerates just enough of the hypercube spectrum to certify `Z(t)`.
pub fn partition_function_auto(params: &SpectralParams, q: &HeatQuery) -> Result<TruncatedSum> {
    let cut = heat_cutoff(params, q)?;
    let slice = enumerate_up_to(params, cut).map_err(|e| match e {
        Error::ResourceLimit(msg) => {
            Error::TailNotConvergent(format!("t = {} is too small for the available spectrum: {msg}", q.t))
        }
        other => other,
    })?;
    partition_function_with_tail(&SpectralMeasure::from_slice(&slice), q)
}

/// `(2π)^{−d}|Ω|(2Γ(1+1/2s))^d t^{−d/2s}`.
pub fn heat_asymptote(dom: &DomainSpec, s: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    check_order(s, false)?;
    let d = dom.d as f64;
    let g = gamma(1.0 + 1.0 / (2.0 * s))?;
    Ok(dom.volume * (2.0 * g / (2.0 * PI)).powi(dom.d as i32) * t.powf(-d / (2.0 * s)))
}

/// `(2π)^{−d}((d+2s)/d)^{d/2s}(|A||Ω|/d) Γ(1+d/2s) t^{−d/2s}`.
pub fn heat_upper_bound(dom: &DomainSpec, s: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let a = dom.d as f64 / (2.0 * s);
    Ok(counting_bound_coefficient(dom, s)? * gamma(1.0 + a)? * t.powf(-a))
}

/// Breakpoints `0 = b₀ < … < E`: the distinct atoms inside `(0, E)`.
fn kinks(m: &SpectralMeasure, e: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for &v in &m.values[..m.values.partition_point(|&v| v < e)] {
        let last = *out.last().unwrap();
        if v > 0.0 && v - last > 1e-13 * v {
            out.push(v);
        }
    }
    if e - *out.last().unwrap() > 1e-13 * e {
        out.push(e);
    } else if out.len() == 1 {
        out.push(e);
    } else {
        *out.last_mut().unwrap() = e;
    }
    out
}

fn widened(cfg: &QuadratureConfig, pieces: usize) -> QuadratureConfig {
    QuadratureConfig {
        max_subdivisions: cfg.max_subdivisions.max(40 * pieces),
        max_evaluations: cfg.max_evaluations.max(2000 * pieces),
        ..cfg.clone()
    }
}

/// Compares `R_{ρ+δ}(E)` with `(1/B(1+ρ,δ)) ∫₀^E (E−t)^{δ−1} R_ρ(t) dt`.
///
/// For `δ < 1` the substitution `u = (E−t)^δ` removes the endpoint
/// singularity: the integral becomes `(1/δ)∫₀^{E^δ} R_ρ(E − u^{1/δ}) du`.
pub fn riesz_iteration_check(
    m: &SpectralMeasure,
    rho: f64,
    delta: f64,
    energy: f64,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    RieszQuery::new(rho, energy)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return domain(format!("delta must be finite and > 0, got {delta}"));
    }
    let exact = riesz_mean(m, &RieszQuery { rho: rho + delta, energy })?;
    let t_breaks = kinks(m, energy);
    let r = |t: f64| m.riesz_unchecked(rho, t, ZeroOrder::Strict);
    let cfg = widened(cfg, t_breaks.len());
    let integral = if delta < 1.0 {
        let inv = 1.0 / delta;
        let mut u_breaks: Vec<f64> = t_breaks.iter().rev().map(|&t| (energy - t).max(0.0).powf(delta)).collect();
        u_breaks[0] = 0.0;
        let est = integrate_graded(|u: f64| r(energy - u.powf(inv)), &u_breaks, &cfg)?;
        est.value * inv
    } else {
        let est = integrate_graded(|t: f64| (energy - t).max(0.0).powf(delta - 1.0) * r(t), &t_breaks, &cfg)?;
        est.value
    };
    let via_integral = integral / beta(1.0 + rho, delta)?;
    Ok(BoundReport::new(
        "riesz_iteration",
        format!("rho={rho},delta={delta},E={energy}"),
        exact,
        via_integral,
        Direction::Equal,
        ITERATION_TOLERANCE,
    ))
}

/// Compares `∫₀^∞ e^{−Et} R_ρ(E) dE` with `Γ(1+ρ) t^{−(1+ρ)} Z(t)`.
pub fn laplace_identity_check(
    m: &SpectralMeasure,
    rho: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    if !(rho > 1.0 && rho.is_finite()) {
        return precondition(format!("the Laplace identity check is stated for rho > 1, got {rho}"));
    }
    check_time(t)?;
    let (through, _) = m.complete_through();
    let tolerance = m.heat_tail(through, t).max(f64::MIN_POSITIVE);
    let z = partition_function_with_tail(m, &HeatQuery { t, tolerance })?;
    let transform = gamma(1.0 + rho)? * t.powf(-(1.0 + rho)) * z.value;
    if !(z.tail_bound <= 1e-9 * z.value) {
        return Err(Error::TailNotConvergent(format!(
            "heat-trace tail {:.3e} is not negligible against Z = {:.3e}",
            z.tail_bound, z.value
        )));
    }

    // Integrate up to where the certified tail is negligible, but never past
    // the complete part of the spectrum.
    let target = 1e-10 * transform;
    let last = m.values.last().copied().unwrap_or(0.0);
    let mut cut = (last.max(1.0 / t) * 2.0).min(through);
    while m.laplace_tail(rho, cut, t) > target && cut < through {
        cut = (cut * 1.5).min(through);
    }
    let tail = m.laplace_tail(rho, cut, t);
    if tail > target {
        return Err(Error::TailNotConvergent(format!(
            "Laplace-transform tail beyond {cut} is bounded by {tail:.3e}, above {target:.3e}"
        )));
    }
    let breaks = kinks(m, cut);
    let cfg = widened(cfg, breaks.len());
    let est = integrate_graded(|e: f64| (-e * t).exp() * m.riesz_unchecked(rho, e, ZeroOrder::Strict), &breaks, &cfg)?;
    Ok(BoundReport::new(
        "laplace_identity",
        format!("rho={rho},t={t}"),
        est.value,
        transform,
        Direction::Equal,
        LAPLACE_TOLERANCE,
    ))
}

/// One row of a heat-trace scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatRow {
    pub t: f64,
    pub z_exact: f64,
    pub z_asymptote: f64,
    pub z_bound: f64,
}

/// Exact, asymptotic and bounding heat traces over a grid of `t`, from one
/// enumeration sized for the smallest `t`.
pub fn heat_scan(params: &SpectralParams, times: &[f64], tolerance: f64) -> Result<Vec<HeatRow>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let mut cut = 0.0f64;
    for &t in times {
        cut = cut.max(heat_cutoff(params, &HeatQuery::with_tolerance(t, tolerance)?)?);
    }
    let slice = enumerate_up_to(params, cut)?;
    let m = SpectralMeasure::from_slice(&slice);
    let dom = params.domain();
    let s = params.order();
    times
        .par_iter()
        .map(|&t| {
            let q = HeatQuery::with_tolerance(t, tolerance)?;
            Ok(HeatRow {
                t,
                z_exact: partition_function(&m, &q)?,
                z_asymptote: heat_asymptote(&dom, s, t)?,
                z_bound: heat_upper_bound(&dom, s, t)?,
            })
        })
        .collect()
}

/// One row of a Riesz-mean scan; the bound is absent for `ρ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszRow {
    pub energy: f64,
    pub rho: f64,
    pub r_exact: f64,
    pub r_asymptote: f64,
    pub r_bound: Option<f64>,
}

pub fn riesz_scan(params: &SpectralParams, rho: f64, energies: &[f64]) -> Result<Vec<RieszRow>> {
    let Some(top) = energies.iter().copied().reduce(f64::max) else { return Ok(Vec::new()) };
    for &e in energies {
        RieszQuery::new(rho, e)?;
    }
    let slice = enumerate_up_to(params, top)?;
    let m = SpectralMeasure::from_slice(&slice);
    let dom = params.domain();
    let s = params.order();
    energies
        .par_iter()
        .map(|&e| {
            let q = RieszQuery::new(rho, e)?;
            Ok(RieszRow {
                energy: e,
                rho,
                r_exact: riesz_mean(&m, &q)?,
                r_asymptote: riesz_asymptote(&dom, s, &q)?,
                r_bound: if rho > 1.0 { Some(riesz_upper_bound(&dom, s, &q)?) } else { None },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::enumerate_smallest;

    fn cube(d: usize, s: f64, side: f64) -> SpectralParams {
        SpectralParams::new(d, s, side).unwrap()
    }

    fn measure(d: usize, s: f64, side: f64, e: f64) -> SpectralMeasure {
        SpectralMeasure::from_slice(&enumerate_up_to(&cube(d, s, side), e).unwrap())
    }

    // Naive reference: direct sum over a list of values.
    fn naive_riesz(values: &[f64], rho: f64, e: f64) -> f64 {
        values.iter().filter(|&&v| v < e).map(|&v| (e - v).powf(rho)).sum()
    }

    #[test]
    fn riesz_examples() {
        let m = measure(2, 1.0, PI, 9.0);
        let r = riesz_mean(&m, &RieszQuery::new(1.0, 9.0).unwrap()).unwrap();
        assert!((r - 16.0).abs() < 1e-12);
        assert_eq!(riesz_mean(&m, &RieszQuery::new(1.0, 2.0).unwrap()).unwrap(), 0.0);
        assert_eq!(riesz_mean(&m, &RieszQuery::new(2.5, 1.5).unwrap()).unwrap(), 0.0);
        let q = RieszQuery::new(0.0, 8.0).unwrap();
        assert_eq!(riesz_mean(&m, &q).unwrap(), 3.0);
        assert_eq!(riesz_mean_with(&m, &q, ZeroOrder::Inclusive).unwrap(), 4.0);
    }

    #[test]
    fn incomplete_spectrum_is_rejected() {
        let m = measure(2, 1.0, PI, 9.0);
        let err = riesz_mean(&m, &RieszQuery::new(1.0, 9.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::IncompleteSpectrum(_)));
        let m = SpectralMeasure::from_slice(&enumerate_smallest(&cube(2, 1.0, PI), 5).unwrap());
        assert!(riesz_mean(&m, &RieszQuery::new(1.0, 9.0).unwrap()).is_ok());
        assert!(riesz_mean(&m, &RieszQuery::new(1.0, 10.0).unwrap()).is_err());
    }

    #[test]
    fn riesz_asymptote_examples() {
        let dom = DomainSpec::hypercube(2, PI).unwrap();
        let a = riesz_asymptote(&dom, 1.0, &RieszQuery::new(1.0, 100.0).unwrap()).unwrap();
        assert!((a - 1e4 * PI / 8.0).abs() < 1e-9 * a);
        for &(d, s) in &[(1, 1.0), (2, 0.75), (3, 0.6)] {
            let dom = DomainSpec::hypercube(d, 2.0).unwrap();
            let a = riesz_asymptote(&dom, s, &RieszQuery::new(0.0, 37.0).unwrap()).unwrap();
            let w = crate::bounds::weyl_counting_estimate(&dom, s, 37.0).unwrap();
            assert!((a - w).abs() < 1e-13 * w);
        }
    }

    #[test]
    fn riesz_upper_bound_behaviour() {
        let dom = DomainSpec::hypercube(2, PI).unwrap();
        assert!(matches!(
            riesz_upper_bound(&dom, 1.0, &RieszQuery::new(1.0, 10.0).unwrap()),
            Err(Error::Precondition(_))
        ));
        let m = measure(2, 1.0, PI, 400.0);
        for &rho in &[1.5, 2.0, 3.0] {
            let mut ratio: Option<f64> = None;
            for &e in &[3.0, 10.0, 55.0, 200.0, 400.0] {
                let q = RieszQuery::new(rho, e).unwrap();
                let b = riesz_upper_bound(&dom, 1.0, &q).unwrap();
                assert!(riesz_mean(&m, &q).unwrap() <= b);
                let r = b / riesz_asymptote(&dom, 1.0, &q).unwrap();
                if let Some(prev) = ratio {
                    assert!(((r - prev) / prev).abs() < 1e-12);
                }
                ratio = Some(r);
            }
        }
        // d = 2, s = 1, ρ = 2: (1/4π²)·2·(π·π²/2)·2·B(2, 2) = π/6.
        let q = RieszQuery::new(2.0, 1.0).unwrap();
        let b = riesz_upper_bound(&dom, 1.0, &q).unwrap();
        assert!((b - PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn heat_examples() {
        let m = measure(1, 1.0, PI, 400.0);
        let z = partition_function(&m, &HeatQuery::new(1.0).unwrap()).unwrap();
        let direct: f64 = (1..=10).map(|n: i32| (-(n * n) as f64).exp()).sum();
        assert!((z - direct).abs() < 1e-12);
        assert!((z - 0.386_319).abs() < 1e-6);

        let p = cube(2, 1.0, PI);
        let q = HeatQuery::with_tolerance(0.5, 1e-15).unwrap();
        let z2 = partition_function_auto(&p, &q).unwrap().value;
        let z1: f64 = (1..60).map(|n: i32| (-((n * n) as f64) * 0.5).exp()).sum();
        assert!((z2 - z1 * z1).abs() < 1e-12 * z2);

        // Dominant term at large t: ℰ₁ = 2 is simple for d = 2.
        let m = measure(2, 1.0, PI, 200.0);
        let z = partition_function(&m, &HeatQuery::new(12.0).unwrap()).unwrap();
        assert!((z * (24.0f64).exp() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn heat_tail_is_enforced() {
        let m = measure(2, 1.0, PI, 20.0);
        let err = partition_function(&m, &HeatQuery::new(0.01).unwrap()).unwrap_err();
        assert!(matches!(err, Error::TailNotConvergent(_)));
        let p = cube(3, 1.0, PI).with_max_records(1000);
        let err = partition_function_auto(&p, &HeatQuery::new(0.001).unwrap()).unwrap_err();
        assert!(matches!(err, Error::TailNotConvergent(_)));
    }

    #[test]
    fn certified_tail_bounds_the_truth() {
        let p = cube(2, 0.75, 2.0);
        let big = SpectralMeasure::from_slice(&enumerate_up_to(&p, 3000.0).unwrap());
        let small = SpectralMeasure::from_slice(&enumerate_up_to(&p, 40.0).unwrap());
        for &t in &[0.05, 0.2, 1.0] {
            let truth = partition_function(&big, &HeatQuery::with_tolerance(t, 1.0).unwrap()).unwrap();
            let part = partition_function_with_tail(&small, &HeatQuery::with_tolerance(t, 1e9).unwrap()).unwrap();
            assert!(truth - part.value <= part.tail_bound);
        }
    }

    #[test]
    fn heat_asymptote_and_bound() {
        let dom = DomainSpec::hypercube(1, PI).unwrap();
        for &t in &[0.01, 0.3, 2.0] {
            let a = heat_asymptote(&dom, 1.0, t).unwrap();
            assert!((a - PI.sqrt() / 2.0 / t.sqrt()).abs() < 1e-13 * a);
        }
        assert!(heat_asymptote(&dom, 1.0, 0.0).is_err());
        for &(d, s) in &[(1, 1.0), (2, 0.75), (3, 0.55)] {
            let dom = DomainSpec::hypercube(d, PI).unwrap();
            let r1 = heat_upper_bound(&dom, s, 0.1).unwrap() / heat_asymptote(&dom, s, 0.1).unwrap();
            let r2 = heat_upper_bound(&dom, s, 3.0).unwrap() / heat_asymptote(&dom, s, 3.0).unwrap();
            let dd = d as f64;
            let expected = ((dd + 2.0 * s) / dd).powf(dd / (2.0 * s));
            assert!((r1 - expected).abs() < 1e-12 * expected);
            assert!((r2 - expected).abs() < 1e-12 * expected);
            assert!(expected > 1.0);
            let twice = DomainSpec::new(d, 2.0 * dom.volume, true).unwrap();
            let ratio = heat_asymptote(&twice, s, 0.4).unwrap() / heat_asymptote(&dom, s, 0.4).unwrap();
            assert!((ratio - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn iteration_examples() {
        let cfg = QuadratureConfig::default();
        let m = measure(2, 1.0, PI, 60.0);
        for &(rho, delta) in &[(0.0, 1.0), (1.0, 1.0), (1.0, 0.5), (0.5, 0.5), (0.3, 1.7)] {
            let rep = riesz_iteration_check(&m, rho, delta, 57.5, &cfg).unwrap();
            assert!(rep.relative_residual() <= ITERATION_TOLERANCE, "{rho} {delta} {rep:?}");
        }
        let rep = riesz_iteration_check(&m, 1.0, 1.0, 1.5, &cfg).unwrap();
        assert_eq!(rep.exact, 0.0);
        assert_eq!(rep.bound, 0.0);
    }

    #[test]
    fn iteration_matches_piecewise_polynomial_oracle() {
        // 2∫₀^E R₁ = Σ (E−ℰ)² exactly; ∫₀^E N = Σ (E−ℰ).
        let vals = [2.0, 5.0, 5.0, 8.0, 10.0, 10.0];
        let m = SpectralMeasure::finite(&vals.map(|v| (v, 1.0))).unwrap();
        let cfg = QuadratureConfig::default();
        let e = 11.3;
        let rep = riesz_iteration_check(&m, 1.0, 1.0, e, &cfg).unwrap();
        assert!((rep.bound - naive_riesz(&vals, 2.0, e)).abs() < 1e-10);
        let rep = riesz_iteration_check(&m, 0.0, 1.0, e, &cfg).unwrap();
        assert!((rep.bound - naive_riesz(&vals, 1.0, e)).abs() < 1e-10);
    }

    #[test]
    fn laplace_examples() {
        let cfg = QuadratureConfig::default();
        let toy = SpectralMeasure::finite(&[(1.7, 1.0)]).unwrap();
        let rep = laplace_identity_check(&toy, 2.0, 0.8, &cfg).unwrap();
        let closed = gamma(3.0).unwrap() * 0.8f64.powf(-3.0) * (-1.7f64 * 0.8).exp();
        assert!((rep.bound - closed).abs() < 1e-13 * closed);
        assert!(rep.relative_residual() <= 1e-9);

        let m = measure(1, 1.0, PI, 200.0);
        let rep = laplace_identity_check(&m, 2.0, 1.0, &cfg).unwrap();
        assert!(rep.relative_residual() <= LAPLACE_TOLERANCE, "{rep:?}");

        let toy = SpectralMeasure::finite(&[(0.5, 1.0), (2.0, 3.0), (2.5, 1.0)]).unwrap();
        let a = laplace_identity_check(&toy, 1.5, 0.7, &cfg).unwrap();
        let b = laplace_identity_check(&toy.scaled(2.0).unwrap(), 1.5, 0.7, &cfg).unwrap();
        assert!((b.exact / a.exact - 2.0).abs() < 1e-10);
        assert!((b.bound / a.bound - 2.0).abs() < 1e-13);
        assert!(matches!(laplace_identity_check(&toy, 1.0, 0.7, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn derivative_of_first_mean_is_counting() {
        let m = measure(2, 0.75, PI, 80.0);
        let v = m.values().to_vec();
        for w in v.windows(2).filter(|w| w[1] - w[0] > 1e-3 * w[1]).step_by(7) {
            let e = 0.5 * (w[0] + w[1]);
            let h = 1e-4 * e;
            if e + h >= w[1] {
                continue;
            }
            let up = riesz_mean(&m, &RieszQuery::new(1.0, e + h).unwrap()).unwrap();
            let dn = riesz_mean(&m, &RieszQuery::new(1.0, e - h).unwrap()).unwrap();
            let n = riesz_mean(&m, &RieszQuery::new(0.0, e).unwrap()).unwrap();
            assert!(((up - dn) / (2.0 * h) - n).abs() < 1e-6 * n.max(1.0));
        }
    }

    #[test]
    fn scans_have_expected_shape() {
        let p = cube(2, 1.0, PI);
        let rows = heat_scan(&p, &[0.1, 0.5, 2.0], 1e-10).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.z_exact <= r.z_bound);
        }
        let rows = riesz_scan(&p, 1.0, &[10.0, 50.0]).unwrap();
        assert!(rows.iter().all(|r| r.r_bound.is_none()));
        let rows = riesz_scan(&p, 2.0, &[10.0, 50.0]).unwrap();
        assert!(rows.iter().all(|r| r.r_exact <= r.r_bound.unwrap()));
    }
}
