//! Special-function kernels and the closed-form geometric constants of the
//! 2s-deformed unit ball.
//!
//! Everything is evaluated in the log domain and exponentiated once at the
//! end, so ratios such as `Γ(1+1/2s)^d / Γ(1+d/2s)` stay finite for `d/2s`
//! in the hundreds. All constants are in units where `D_{2s} = 1`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LN_SQRT_2PI_SCALE: f64 = 2.506_628_274_631_000_5;

// Lanczos series, g = 671/128, fourteen terms.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// Validates a fractional order. The library accepts `s ∈ (0, 1]`; strict
/// mode narrows this to `s ∈ (1/2, 1]`.
pub fn check_order(s: f64, strict: bool) -> Result<()> {
    if !s.is_finite() || s <= 0.0 || s > 1.0 {
        return domain(format!("order s must lie in (0, 1], got {s}"));
    }
    if strict && s <= 0.5 {
        return domain(format!("strict mode requires s in (1/2, 1], got {s}"));
    }
    Ok(())
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return domain("dimension d must be at least 1");
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return domain(format!("{name} must be a finite value >= 0, got {v}"));
    }
    Ok(())
}

/// Natural logarithm of Γ(x) for real `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let tmp = x + LANCZOS_G;
    let lead = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        ser += c / y;
    }
    lead + (LN_SQRT_2PI_SCALE * ser / x).ln()
}

/// Γ(x) for `x > 0`. Overflows to `+inf` past x ≈ 171.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

/// ln B(x, y).
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return domain(format!("beta requires x, y > 0, got ({x}, {y})"));
    }
    Ok(log_gamma_unchecked(x) + log_gamma_unchecked(y) - log_gamma_unchecked(x + y))
}

/// B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_beta(x, y)?.exp())
}

/// The unit ball of `‖x‖ = (Σ|xᵢ|^{2s})^{1/2s}` in `d` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedBall {
    d: usize,
    s: f64,
}

impl DeformedBall {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        check_dim(d)?;
        check_order(s, false)?;
        Ok(Self { d, s })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    /// ln |B_{d,2s}| = d·ln(2Γ(1+1/2s)) − ln Γ(1+d/2s).
    pub fn log_volume(&self) -> f64 {
        let d = self.d as f64;
        let inv = 1.0 / (2.0 * self.s);
        d * (2.0f64.ln() + log_gamma_unchecked(1.0 + inv)) - log_gamma_unchecked(1.0 + d * inv)
    }

    pub fn volume(&self) -> f64 {
        self.log_volume().exp()
    }

    /// Surface constant |A_{d−1,2s}| = d·|B_{d,2s}|.
    pub fn sphere_volume(&self) -> f64 {
        self.d as f64 * self.volume()
    }
}

/// |B_{d,2s}| = (2Γ(1+1/2s))^d / Γ(1+d/2s).
pub fn ball_volume(d: usize, s: f64) -> Result<f64> {
    Ok(DeformedBall::new(d, s)?.volume())
}

/// |A_{d−1,2s}| = d·|B_{d,2s}|.
pub fn sphere_volume(d: usize, s: f64) -> Result<f64> {
    Ok(DeformedBall::new(d, s)?.sphere_volume())
}

/// Euclidean sphere surface |S_{d−1}| = 2π^{d/2}/Γ(d/2).
pub fn euclidean_sphere_surface(d: usize) -> Result<f64> {
    check_dim(d)?;
    let h = d as f64 / 2.0;
    Ok(2.0 * (h * PI.ln() - log_gamma_unchecked(h)).exp())
}

/// Classical Riesz-mean constant
/// `π^{−d} Γ(1+1/2s)^d Γ(1+ρ) / Γ(1+ρ+d/2s)`.
pub fn riesz_classical_constant(rho: f64, d: usize, s: f64) -> Result<f64> {
    check_nonneg("rho", rho)?;
    check_dim(d)?;
    check_order(s, false)?;
    let dd = d as f64;
    let a = dd / (2.0 * s);
    let ln = -dd * PI.ln() + dd * log_gamma_unchecked(1.0 + 1.0 / (2.0 * s))
        + log_gamma_unchecked(1.0 + rho)
        - log_gamma_unchecked(1.0 + rho + a);
    Ok(ln.exp())
}

/// Classical phase-space constant of the bound-state moment sum,
/// `(2π)^{−d} (2Γ(1+1/2s))^d Γ(1+γ) / Γ(1+γ+d/2s)`.
pub fn lieb_thirring_classical_constant(gamma_exp: f64, d: usize, s: f64) -> Result<f64> {
    check_nonneg("gamma", gamma_exp)?;
    check_dim(d)?;
    check_order(s, false)?;
    let dd = d as f64;
    let a = dd / (2.0 * s);
    let ln = -dd * (2.0 * PI).ln()
        + dd * (2.0f64.ln() + log_gamma_unchecked(1.0 + 1.0 / (2.0 * s)))
        + log_gamma_unchecked(1.0 + gamma_exp)
        - log_gamma_unchecked(1.0 + gamma_exp + a);
    Ok(ln.exp())
}

/// Upper bound on `ln Γ(b, x)`, the log of the upper incomplete gamma
/// function. Uses `ln u ≤ ln x + (u−x)/x`, giving
/// `Γ(b, x) ≤ x^{b−1} e^{−x} · x/(x − (b−1))` for `b > 1`, `x > b − 1`, and
/// `Γ(b, x) ≤ x^{b−1} e^{−x}` for `b ≤ 1`. Returns `+∞` where neither applies.
pub fn ln_upper_gamma_bound(b: f64, x: f64) -> f64 {
    if !(x > 0.0) || !b.is_finite() {
        return f64::INFINITY;
    }
    let base = (b - 1.0) * x.ln() - x;
    if b <= 1.0 {
        base
    } else if x > b - 1.0 {
        base - (1.0 - (b - 1.0) / x).ln()
    } else {
        f64::INFINITY
    }
}
