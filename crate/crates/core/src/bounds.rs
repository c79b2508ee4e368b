//! Weyl asymptotics, Pólya and Berezin–Li–Yau-type inequalities, and a
//! violation scan against the exact hypercube spectrum.
//!
//! Every formula depends on the domain only through its volume `|Ω|`, so a
//! [`DomainSpec`] is a volume plus a tiling flag rather than a geometry.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, precondition, Result};
use crate::specfun::{check_order, log_gamma_unchecked, DeformedBall};
use crate::spectrum::{counting_function, enumerate_smallest, SpectralParams};

/// Relative slack before a scan flags a bound as violated.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub d: usize,
    pub volume: f64,
    pub tiling: bool,
}

impl DomainSpec {
    pub fn new(d: usize, volume: f64, tiling: bool) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !volume.is_finite() || volume <= 0.0 {
            return domain(format!("domain volume must be finite and > 0, got {volume}"));
        }
        Ok(Self { d, volume, tiling })
    }

    /// `(0, L)^d`, volume `L^d`, tiling.
    pub fn hypercube(d: usize, side: f64) -> Result<Self> {
        if !side.is_finite() || side <= 0.0 {
            return domain(format!("side length must be > 0, got {side}"));
        }
        Self::new(d, side.powi(d as i32), true)
    }

    /// The subdomain `Ω'` with `|Ω'| = λ^d |Ω|`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("scale factor must be > 0, got {lambda}"));
        }
        Self::new(self.d, self.volume * lambda.powi(self.d as i32), self.tiling)
    }
}

/// Under `|Ω'| = λ^d|Ω|`, eigenvalues satisfy `ℰ_n(Ω) = λ^{2s} ℰ_n(Ω')`.
/// Returns `ℰ_n(Ω')` given `ℰ_n(Ω)`.
pub fn eigenvalue_on_scaled_domain(value: f64, lambda: f64, s: f64) -> f64 {
    value / lambda.powf(2.0 * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// The exact value must not fall below the bound.
    ExactAtLeast,
    /// The exact value must not exceed the bound.
    ExactAtMost,
    /// Two routes to the same quantity.
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub quantity: String,
    pub param_point: String,
    pub exact: f64,
    pub bound: f64,
    /// Positive when the inequality holds with room; for `Equal`, the signed
    /// residual `exact − bound`.
    pub margin: f64,
    pub satisfied: bool,
    pub direction: Direction,
    pub tolerance: f64,
}

impl BoundReport {
    pub fn new(
        quantity: impl Into<String>,
        param_point: impl Into<String>,
        exact: f64,
        bound: f64,
        direction: Direction,
        tolerance: f64,
    ) -> Self {
        let margin = match direction {
            Direction::ExactAtLeast | Direction::Equal => exact - bound,
            Direction::ExactAtMost => bound - exact,
        };
        let scale = exact.abs().max(bound.abs()).max(f64::MIN_POSITIVE);
        let satisfied = match direction {
            Direction::Equal => margin.abs() <= tolerance * scale,
            _ => margin >= -tolerance * scale,
        } && exact.is_finite()
            && bound.is_finite();
        Self {
            quantity: quantity.into(),
            param_point: param_point.into(),
            exact,
            bound,
            margin,
            satisfied,
            direction,
            tolerance,
        }
    }

    /// `|margin| / max(|exact|, |bound|)`, zero when both sides vanish.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.exact.abs().max(self.bound.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.margin.abs() / scale
        }
    }
}

fn check(dom: &DomainSpec, s: f64) -> Result<DeformedBall> {
    check_order(s, false)?;
    DeformedBall::new(dom.d, s)
}

/// `(2π)^{−d}|Ω||A_{d−1,2s}|/d`, the Weyl coefficient of `E^{d/2s}`.
pub fn weyl_coefficient(dom: &DomainSpec, s: f64) -> Result<f64> {
    let ball = check(dom, s)?;
    Ok(dom.volume * ball.sphere_volume() / dom.d as f64 / (2.0 * PI).powi(dom.d as i32))
}

/// Leading Weyl term `(2π)^{−d}|Ω||A|/d · E^{d/2s}`.
pub fn weyl_counting_estimate(dom: &DomainSpec, s: f64, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return domain(format!("energy must be >= 0, got {energy}"));
    }
    let c = weyl_coefficient(dom, s)?;
    Ok(c * energy.powf(dom.d as f64 / (2.0 * s)))
}

/// Inverse Weyl law `(2π)^{2s}(n d / (|A||Ω|))^{2s/d}`.
pub fn asymptotic_eigenvalue(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return domain(format!("eigenvalue index must be >= 1, got {n}"));
    }
    inverse_weyl(dom, s, n)
}

fn inverse_weyl(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    let ball = check(dom, s)?;
    let d = dom.d as f64;
    Ok((2.0 * PI).powf(2.0 * s) * (n * d / (ball.sphere_volume() * dom.volume)).powf(2.0 * s / d))
}

/// `(2π)^{2s}·d/(d+2s)·(d/(|A||Ω|))^{2s/d}·N^{1+2s/d}`.
pub fn asymptotic_sum(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return domain(format!("N must be >= 1, got {n}"));
    }
    asymptotic_sum_unchecked(dom, s, n)
}

/// As [`asymptotic_sum`] but accepting any `N ≥ 0`.
pub fn asymptotic_sum_unchecked(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return domain(format!("N must be >= 0, got {n}"));
    }
    let ball = check(dom, s)?;
    let d = dom.d as f64;
    Ok((2.0 * PI).powf(2.0 * s) * d / (d + 2.0 * s)
        * (d / (ball.sphere_volume() * dom.volume)).powf(2.0 * s / d)
        * n.powf(1.0 + 2.0 * s / d))
}

/// Pólya lower bound on `ℰ_n`; requires a tiling domain.
pub fn polya_lower_bound(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    if !dom.tiling {
        return precondition("the Pólya bound is only established for tiling domains");
    }
    asymptotic_eigenvalue(dom, s, n)
}

/// Lower bound on `S(N)` for bounded domains.
pub fn bly_sum_lower_bound(dom: &DomainSpec, s: f64, n: f64) -> Result<f64> {
    asymptotic_sum(dom, s, n)
}

/// `(2π)^{−d}((d+2s)/d)^{d/2s}(|A||Ω|/d) z^{d/2s}`.
pub fn counting_upper_bound(dom: &DomainSpec, s: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return domain(format!("z must be >= 0, got {z}"));
    }
    Ok(counting_bound_coefficient(dom, s)? * z.powf(dom.d as f64 / (2.0 * s)))
}

/// Coefficient of `z^{d/2s}` in [`counting_upper_bound`].
pub fn counting_bound_coefficient(dom: &DomainSpec, s: f64) -> Result<f64> {
    let d = dom.d as f64;
    Ok(((d + 2.0 * s) / d).powf(d / (2.0 * s)) * weyl_coefficient(dom, s)?)
}

/// Li–Yau sum bound for the Dirichlet Laplacian,
/// `d/(d+2)·4π²/(|B_d||Ω|)^{2/d}·k^{1+2/d}` with the Euclidean ball volume.
pub fn li_yau_sum_bound(d: usize, volume: f64, k: f64) -> Result<f64> {
    let dd = d as f64;
    let ball = crate::specfun::euclidean_sphere_surface(d)? / dd;
    Ok(dd / (dd + 2.0) * 4.0 * PI * PI / (ball * volume).powf(2.0 / dd) * k.powf(1.0 + 2.0 / dd))
}

/// Euclidean counting bound `(4π)^{−d/2}((d+2)/d)^{d/2}|Ω|/Γ(1+d/2) z^{d/2}`.
pub fn euclidean_counting_upper_bound(d: usize, volume: f64, z: f64) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let dd = d as f64;
    let ln = -dd / 2.0 * (4.0 * PI).ln() + dd / 2.0 * ((dd + 2.0) / dd).ln() + volume.ln()
        - log_gamma_unchecked(1.0 + dd / 2.0)
        + dd / 2.0 * z.ln();
    Ok(if z == 0.0 { 0.0 } else { ln.exp() })
}

/// Euclidean Weyl eigenvalue asymptote obtained by inverting
/// `N = |Ω| ℰ^{d/2} / ((4π)^{d/2} Γ(1+d/2))`.
pub fn euclidean_weyl_eigenvalue(d: usize, volume: f64, n: f64) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let dd = d as f64;
    Ok(4.0 * PI * (n * log_gamma_unchecked(1.0 + dd / 2.0).exp() / volume).powf(2.0 / dd))
}

/// Runs every bound against the exact hypercube spectrum.
///
/// Per index `n ≤ n_max` this emits a Pólya report and a sum-bound report;
/// per energy in `energies` a counting-bound report and a Weyl-ratio report
/// (for tiling domains `N(E)` never exceeds the Weyl term).
pub fn scan_bounds(params: &SpectralParams, n_max: usize, energies: &[f64]) -> Result<Vec<BoundReport>> {
    let dom = params.domain();
    let s = params.order();
    let mut reports = Vec::with_capacity(2 * n_max + 2 * energies.len());
    if n_max > 0 {
        let slice = enumerate_smallest(params, n_max)?;
        let mut partial = 0.0;
        for (i, rec) in slice.records.iter().enumerate() {
            let n = (i + 1) as f64;
            partial += rec.value;
            let point = format!("d={};s={};L={};n={}", dom.d, s, params.side(), i + 1);
            reports.push(BoundReport::new(
                "polya",
                point.clone(),
                rec.value,
                polya_lower_bound(&dom, s, n)?,
                Direction::ExactAtLeast,
                VIOLATION_TOLERANCE,
            ));
            reports.push(BoundReport::new(
                "bly_sum",
                point,
                partial,
                bly_sum_lower_bound(&dom, s, n)?,
                Direction::ExactAtLeast,
                VIOLATION_TOLERANCE,
            ));
        }
    }
    for e in energies {
        if !(e.is_finite() && *e >= 0.0) {
            return domain(format!("energy grid values must be finite and >= 0, got {e}"));
        }
    }
    let per_energy: Vec<Result<[BoundReport; 2]>> = energies
        .par_iter()
        .map(|&e| {
            let count = counting_function(params, e) as f64;
            let point = format!("d={};s={};L={};E={}", dom.d, s, params.side(), e);
            Ok([
                BoundReport::new(
                    "counting_upper",
                    point.clone(),
                    count,
                    counting_upper_bound(&dom, s, e)?,
                    Direction::ExactAtMost,
                    VIOLATION_TOLERANCE,
                ),
                BoundReport::new(
                    "weyl_ratio",
                    point,
                    count,
                    weyl_counting_estimate(&dom, s, e)?,
                    Direction::ExactAtMost,
                    VIOLATION_TOLERANCE,
                ),
            ])
        })
        .collect();
    for r in per_energy {
        reports.extend(r?);
    }
    Ok(reports)
}
