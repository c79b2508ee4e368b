//! Coherent states `G_{y,p}` built on the profile `e^{−‖x‖^{2s}/2ħ^s}`,
//! their kinetic expectation through a discretised unitary ħ-Fourier
//! transform, the `ħ → 0` limit, potential expectations and the Parseval
//! property of the coherent-state transform.
//!
//! `‖x‖^{2s}` is the deformed norm `Σ|x_i|^{2s}`, so every state factorises
//! over coordinates.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_graded, QuadratureConfig};
use crate::semiclassical::PotentialSpec;
use crate::specfun::{check_order, gamma};

/// Density ratio, relative to the peak, below which a grid edge counts as
/// empty in either position or momentum space.
pub const EDGE_DENSITY: f64 = 1e-12;
/// Allowed deviation of the discretised mass from one.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Largest one-dimensional FFT length tried before giving up.
pub const MAX_FFT_LEN: usize = 1 << 22;
/// Largest side of the full two-dimensional grid.
pub const MAX_FFT_SIDE_2D: usize = 2048;

// exp(−36.8) ≈ 1e−16: position density cut relative to the peak.
const POSITION_CUT: f64 = 36.8;
// Zero padding in position space; sets the momentum spacing.
const PADDING: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentParams {
    pub d: usize,
    pub s: f64,
    pub hbar: f64,
    /// Momentum label; the momentum is `p = 2πk`.
    pub k: Vec<f64>,
    /// Centre.
    pub y: Vec<f64>,
}

impl CoherentParams {
    pub fn new(d: usize, s: f64, hbar: f64, k: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return domain(format!("coherent-state computations support d = 1 or 2, got {d}"));
        }
        check_order(s, false)?;
        if !(hbar > 0.0 && hbar.is_finite()) {
            return domain(format!("hbar must be finite and > 0, got {hbar}"));
        }
        if k.len() != d || y.len() != d {
            return domain(format!("k and y must have {d} components"));
        }
        if k.iter().chain(&y).any(|v| !v.is_finite()) {
            return domain("k and y must be finite");
        }
        Ok(Self { d, s, hbar, k, y })
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(self.d, self.s, hbar, self.k.clone(), self.y.clone())
    }

    /// `(2ħ^{1/2}Γ(1+1/2s))^{−d/2}`.
    pub fn prefactor(&self) -> f64 {
        axis_prefactor(self.s, self.hbar).powi(self.d as i32)
    }

    /// `‖2πk‖^{2s} = Σ|2πk_i|^{2s}`.
    pub fn classical_limit(&self) -> f64 {
        self.k.iter().map(|k| (2.0 * PI * k).abs().powf(2.0 * self.s)).sum()
    }

    /// Half-width beyond which `|G|²` is below `e^{−36.8}` of its peak.
    fn reach(&self) -> f64 {
        self.hbar.sqrt() * POSITION_CUT.powf(1.0 / (2.0 * self.s))
    }
}

fn axis_prefactor(s: f64, hbar: f64) -> f64 {
    let g = gamma(1.0 + 1.0 / (2.0 * s)).expect("s validated");
    (2.0 * hbar.sqrt() * g).powf(-0.5)
}

/// `G_{y,p}(x)`.
pub fn coherent_profile(c: &CoherentParams, x: &[f64]) -> Complex64 {
    let mut phase = 0.0;
    let mut norm = 0.0;
    for i in 0..c.d {
        let u = x[i] - c.y[i];
        phase += 2.0 * PI * c.k[i] * u / c.hbar;
        norm += u.abs().powf(2.0 * c.s);
    }
    Complex64::from_polar(c.prefactor() * (-norm / (2.0 * c.hbar.powf(c.s))).exp(), phase)
}

fn collect_failure<T>(slot: &Mutex<Option<Error>>, r: Result<T>, fallback: T) -> T {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.lock().unwrap().get_or_insert(e);
            fallback
        }
    }
}

/// `∫|G|² dx` by adaptive quadrature (nested for `d = 2`).
pub fn normalization_mass(c: &CoherentParams, cfg: &QuadratureConfig) -> Result<f64> {
    let x_reach = c.reach();
    let breaks0 = [c.y[0] - x_reach, c.y[0], c.y[0] + x_reach];
    match c.d {
        1 => Ok(integrate_graded(|x: f64| coherent_profile(c, &[x]).norm_sqr(), &breaks0, cfg)?.value),
        _ => {
            let y1 = c.y[1];
            let breaks1 = [y1 - x_reach, y1, y1 + x_reach];
            let failure = Mutex::new(None);
            let outer = |x0: f64| {
                let r = integrate_graded(|x1: f64| coherent_profile(c, &[x0, x1]).norm_sqr(), &breaks1, cfg);
                collect_failure(&failure, r.map(|e| e.value), f64::NAN)
            };
            let est = integrate_graded(outer, &breaks0, cfg);
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            Ok(est?.value)
        }
    }
}

/// Momentum-space density of one coordinate factor on an FFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpectrum {
    pub momenta: Vec<f64>,
    pub density: Vec<f64>,
    pub dp: f64,
    /// `Σ |g_j|² dx` on the position grid.
    pub position_mass: f64,
}

impl AxisSpectrum {
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.dp
    }

    /// `Σ |p|^{2s} ρ(p) dp`.
    pub fn moment(&self, two_s: f64) -> f64 {
        self.momenta.iter().zip(&self.density).map(|(p, r)| p.abs().powf(two_s) * r).sum::<f64>() * self.dp
    }

    fn edge_ratio(&self) -> f64 {
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        let n = self.density.len();
        let edge = self.density[0].max(self.density[1]).max(self.density[n - 1]).max(self.density[n - 2]);
        edge / peak
    }
}

/// Samples `g(x) = a e^{i p₀ x/ħ} e^{−|x|^{2s}/2ħ^s}` at
/// `x_j = (j − n/2) dx`, premultiplied by `(−1)^j` so that the DFT lands
/// on the centred momentum grid `p_m = (m − n/2) dp`, `dp = 2πħ/(n dx)`.
fn axis_samples(s: f64, hbar: f64, p0: f64, n: usize, dx: f64) -> Vec<Complex64> {
    let a = axis_prefactor(s, hbar);
    let hs = 2.0 * hbar.powf(s);
    (0..n)
        .map(|j| {
            let x = (j as f64 - (n / 2) as f64) * dx;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(sign * a * (-x.abs().powf(2.0 * s) / hs).exp(), p0 * x / hbar)
        })
        .collect()
}

/// Unitary ħ-Fourier transform of one coordinate factor, doubling the grid
/// until the momentum density at the edges drops below [`EDGE_DENSITY`] and
/// the discrete mass is within [`MASS_TOLERANCE`] of one. For `s < 1` the
/// profile has a cusp at the centre, which sets the second condition.
pub fn axis_spectrum(s: f64, hbar: f64, k: f64) -> Result<AxisSpectrum> {
    let p0 = 2.0 * PI * k;
    let half = PADDING * hbar.sqrt() * POSITION_CUT.powf(1.0 / (2.0 * s));
    let mut planner = FftPlanner::<f64>::new();
    let mut n = 256usize;
    loop {
        let dx = 2.0 * half / n as f64;
        let mut buf = axis_samples(s, hbar, p0, n, dx);
        let position_mass = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        planner.plan_fft_forward(n).process(&mut buf);
        let scale = dx * dx / (2.0 * PI * hbar);
        let dp = 2.0 * PI * hbar / (n as f64 * dx);
        let spec = AxisSpectrum {
            momenta: (0..n).map(|m| (m as f64 - (n / 2) as f64) * dp).collect(),
            density: buf.iter().map(|z| z.norm_sqr() * scale).collect(),
            dp,
            position_mass,
        };
        // The window must contain the peak, or aliasing can fake empty edges.
        let window = (n / 2) as f64 * dp;
        if window > 1.5 * p0.abs() && spec.edge_ratio() < EDGE_DENSITY && (position_mass - 1.0).abs() <= MASS_TOLERANCE {
            return Ok(spec);
        }
        n *= 2;
        if n > MAX_FFT_LEN {
            return Err(Error::Resolution(format!(
                "grid of {} points leaves edge density {:.3e} of peak and mass error {:.3e} (s={s}, hbar={hbar}, k={k})",
                n / 2,
                spec.edge_ratio(),
                position_mass - 1.0
            )));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticExpectation {
    pub hbar: f64,
    pub expectation: f64,
    /// `‖2πk‖^{2s}`.
    pub limit: f64,
    pub gap: f64,
    /// Momentum-space mass captured by the grid.
    pub mass: f64,
    pub grid_points: Vec<usize>,
}

/// `∫ ‖p‖^{2s} |Ĝ_{y,p}(p)|² dp`, in the `ℰ = E/D_{2s}` normalisation.
///
/// Since `|Ĝ|²` is a product of per-coordinate densities and `‖p‖^{2s}` a sum
/// of per-coordinate terms, `d = 2` combines two one-dimensional transforms.
pub fn kinetic_expectation(c: &CoherentParams) -> Result<KineticExpectation> {
    let two_s = 2.0 * c.s;
    let axes: Vec<AxisSpectrum> = c.k.iter().map(|&k| axis_spectrum(c.s, c.hbar, k)).collect::<Result<_>>()?;
    let masses: Vec<f64> = axes.iter().map(AxisSpectrum::mass).collect();
    let mass: f64 = masses.iter().product();
    if (mass - 1.0).abs() > 2.0 * MASS_TOLERANCE {
        return Err(Error::Resolution(format!("momentum grid captured mass {mass}, expected 1 within {MASS_TOLERANCE:e}")));
    }
    let mut expectation = 0.0;
    for (i, ax) in axes.iter().enumerate() {
        let others: f64 = masses.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| m).product();
        expectation += ax.moment(two_s) * others;
    }
    let limit = c.classical_limit();
    Ok(KineticExpectation {
        hbar: c.hbar,
        expectation,
        limit,
        gap: (expectation - limit).abs(),
        mass,
        grid_points: axes.iter().map(|a| a.density.len()).collect(),
    })
}

/// [`kinetic_expectation`] for `d = 2` through one two-dimensional FFT on the
/// full tensor grid, without using the factorisation.
pub fn kinetic_expectation_full_grid(c: &CoherentParams) -> Result<f64> {
    if c.d != 2 {
        return domain("the full-grid transform is for d = 2");
    }
    let n = c
        .k
        .iter()
        .map(|&k| axis_spectrum(c.s, c.hbar, k).map(|a| a.density.len()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap();
    if n > MAX_FFT_SIDE_2D {
        return Err(Error::Resolution(format!("a {n}x{n} grid exceeds the 2-D limit of {MAX_FFT_SIDE_2D}")));
    }
    let half = PADDING * c.hbar.sqrt() * POSITION_CUT.powf(1.0 / (2.0 * c.s));
    let dx = 2.0 * half / n as f64;
    let rows = axis_samples(c.s, c.hbar, 2.0 * PI * c.k[1], n, dx);
    let cols = axis_samples(c.s, c.hbar, 2.0 * PI * c.k[0], n, dx);
    let mut grid: Vec<Complex64> = cols.iter().flat_map(|a| rows.iter().map(move |b| a * b)).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    grid.par_chunks_mut(n).for_each(|row| fft.process(row));
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = grid[i * n + j];
        }
    }
    t.par_chunks_mut(n).for_each(|row| fft.process(row));
    let dp = 2.0 * PI * c.hbar / (n as f64 * dx);
    let scale = (dx * dx / (2.0 * PI * c.hbar)).powi(2);
    let two_s = 2.0 * c.s;
    let p = |m: usize| ((m as f64 - (n / 2) as f64) * dp).abs().powf(two_s);
    // After the transpose, t[j*n + i] holds momentum (p_i along axis 0, p_j along axis 1).
    let total: f64 = t
        .par_chunks(n)
        .enumerate()
        .map(|(j, row)| row.iter().enumerate().map(|(i, z)| (p(i) + p(j)) * z.norm_sqr()).sum::<f64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total * scale * dp * dp)
}

/// At `s = 1` the expectation is `‖2πk‖² + ħd/2` exactly.
pub fn gaussian_identity_value(c: &CoherentParams) -> Result<f64> {
    if c.s != 1.0 {
        return domain("the Gaussian identity holds at s = 1 only");
    }
    Ok(c.classical_limit() + c.hbar * c.d as f64 / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub rows: Vec<KineticExpectation>,
    pub strictly_decreasing: bool,
    /// `gap / ‖2πk‖^{2s}` at the smallest ħ.
    pub final_relative_gap: f64,
    /// Decreasing gaps ending below 5 %.
    pub converged: bool,
}

/// Kinetic expectations along a decreasing ħ grid. Non-convergence is
/// reported, not raised.
pub fn semiclassical_limit_check(base: &CoherentParams, hbars: &[f64]) -> Result<LimitReport> {
    if hbars.is_empty() {
        return domain("the hbar grid is empty");
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return domain("the hbar grid must be strictly decreasing");
    }
    let rows: Vec<KineticExpectation> = hbars
        .par_iter()
        .map(|&h| kinetic_expectation(&base.with_hbar(h)?))
        .collect::<Result<_>>()?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let last = rows.last().unwrap();
    let final_relative_gap = if last.limit > 0.0 { last.gap / last.limit } else { last.gap };
    Ok(LimitReport { strictly_decreasing, final_relative_gap, converged: strictly_decreasing && final_relative_gap < 0.05, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PotentialMode {
    /// The operator is multiplication by the constant `𝒱(y)`.
    Frozen,
    /// The operator is multiplication by `𝒱(x)`.
    Diagnostic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialExpectation {
    pub value: f64,
    /// `𝒱(y)`.
    pub frozen: f64,
    /// `|value − 𝒱(y)|`; zero in frozen mode.
    pub gap: f64,
}

/// `⟨G, 𝒱 G⟩` under the chosen reading of the potential.
pub fn potential_expectation(
    c: &CoherentParams,
    v: &PotentialSpec,
    mode: PotentialMode,
    cfg: &QuadratureConfig,
) -> Result<PotentialExpectation> {
    if v.d != c.d {
        return domain(format!("potential has d = {}, coherent state has d = {}", v.d, c.d));
    }
    let frozen = v.eval(&c.y);
    if mode == PotentialMode::Frozen {
        return Ok(PotentialExpectation { value: frozen, frozen, gap: 0.0 });
    }
    let reach = c.reach();
    let axis = |i: usize| -> Vec<f64> {
        let (lo, hi) = (c.y[i] - reach, c.y[i] + reach);
        let mut b = vec![lo, c.y[i], hi];
        b.extend(v.axis_breaks(1.0)[i].iter().copied().filter(|&x| x > lo && x < hi));
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    };
    let weight = |x: &[f64]| v.eval(x) * coherent_profile(c, x).norm_sqr();
    let value = match c.d {
        1 => integrate_graded(|x: f64| weight(&[x]), &axis(0), cfg)?.value,
        _ => {
            let b1 = axis(1);
            let failure = Mutex::new(None);
            let outer = |x0: f64| {
                let r = integrate_graded(|x1: f64| weight(&[x0, x1]), &b1, cfg).map(|e| e.value);
                collect_failure(&failure, r, f64::NAN)
            };
            let est = integrate_graded(outer, &axis(0), cfg);
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            est?.value
        }
    };
    Ok(PotentialExpectation { value, frozen, gap: (value - frozen).abs() })
}

/// Test functions for [`parseval_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    /// `(πσ²)^{−1/4} e^{−x²/2σ²}`.
    Gaussian { sigma: f64 },
    /// The coherent state `G_{0,k₀}` of the same order and ħ.
    Coherent { k0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub transform_mass: f64,
    pub residual: f64,
    pub y_points: usize,
    pub k_points: usize,
}

/// Compares `∫∫|⟨G_{y,k}, ψ⟩|² dk dy` with `‖ψ‖² = 1` for `d = 1`, where
/// `G_{y,k}(x) = e^{2πik(x−y)} f(x−y)` and `f` is the normalised profile.
/// The `(y, k)` window is `extent` times a default that captures all but
/// roughly `1e−7` of the mass.
pub fn parseval_check(c: &CoherentParams, psi: TestFunction, extent: f64) -> Result<ParsevalReport> {
    if c.d != 1 {
        return domain("the Parseval check is implemented for d = 1");
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return domain(format!("extent must be > 0, got {extent}"));
    }
    let (psi_fn, psi_width, psi_k): (Box<dyn Fn(f64) -> Complex64 + Sync>, f64, f64) = match psi {
        TestFunction::Gaussian { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return domain(format!("sigma must be > 0, got {sigma}"));
            }
            let a = (PI * sigma * sigma).powf(-0.25);
            (Box::new(move |x: f64| Complex64::new(a * (-x * x / (2.0 * sigma * sigma)).exp(), 0.0)), sigma, 0.0)
        }
        TestFunction::Coherent { k0 } => {
            let g = CoherentParams::new(1, c.s, c.hbar, vec![k0], vec![0.0])?;
            (Box::new(move |x: f64| coherent_profile(&g, &[x])), c.hbar.sqrt(), k0)
        }
    };
    let f_width = c.hbar.sqrt();
    let f_reach = c.reach();
    let a = axis_prefactor(c.s, c.hbar);
    let hs = 2.0 * c.hbar.powf(c.s);
    let f = |u: f64| a * (-u.abs().powf(2.0 * c.s) / hs).exp();

    let y_half = extent * 4.0 * (f_width + psi_width);
    let k_half = extent * 4.0 * (1.0 / f_width + 1.0 / psi_width) / (2.0 * PI);
    let fine = f_width.min(psi_width) / 10.0;
    let ny = ((2.0 * y_half / fine).ceil() as usize).max(16);
    // Each y-slice is supported on |x − y| ≤ f_reach; sampling k finer than
    // the reciprocal of that support makes the k-sum alias-free.
    let nk = ((2.0 * k_half * 5.0 * f_reach).ceil() as usize).max(16);
    let x_half = y_half + f_reach;
    let nx = ((2.0 * x_half / fine).ceil() as usize).max(16);
    if (ny as u64) * (nk as u64) * (nx as u64) > 4_000_000_000 {
        return Err(Error::Resolution(format!("Parseval grid {ny}x{nk}x{nx} is too large")));
    }
    let hy = 2.0 * y_half / ny as f64;
    let hk = 2.0 * k_half / nk as f64;
    let hx = 2.0 * x_half / nx as f64;
    let xs: Vec<f64> = (0..=nx).map(|i| -x_half + i as f64 * hx).collect();
    let psi_vals: Vec<Complex64> = xs.iter().map(|&x| psi_fn(x)).collect();
    let ks: Vec<f64> = (0..=nk).map(|i| psi_k - k_half + i as f64 * hk).collect();

    let total: f64 = (0..=ny)
        .into_par_iter()
        .map(|iy| {
            let y = -y_half + iy as f64 * hy;
            let h: Vec<(f64, Complex64)> = xs
                .iter()
                .zip(&psi_vals)
                .filter(|(x, _)| (*x - y).abs() <= f_reach)
                .map(|(&x, &pv)| (x, pv * f(x - y)))
                .collect();
            let mut acc = 0.0;
            for &k in &ks {
                let mut z = Complex64::new(0.0, 0.0);
                for &(x, hv) in &h {
                    z += hv * Complex64::from_polar(1.0, -2.0 * PI * k * (x - y));
                }
                acc += (z * hx).norm_sqr();
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let transform_mass = total * hy * hk;
    Ok(ParsevalReport { transform_mass, residual: (transform_mass - 1.0).abs(), y_points: ny + 1, k_points: nk + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub hbar: f64,
    pub expectation: f64,
    pub limit: f64,
    pub gap: f64,
}

impl From<&KineticExpectation> for LimitRow {
    fn from(k: &KineticExpectation) -> Self {
        Self { hbar: k.hbar, expectation: k.expectation, limit: k.limit, gap: k.gap }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiclassical::Profile;

    fn state(d: usize, s: f64, hbar: f64, k: f64) -> CoherentParams {
        CoherentParams::new(d, s, hbar, vec![k; d], vec![0.25; d]).unwrap()
    }

    #[test]
    fn profile_basics() {
        let c = state(1, 0.75, 0.3, 1.0);
        let peak = coherent_profile(&c, &[0.25]).norm();
        assert!((peak - c.prefactor()).abs() < 1e-15);
        let a = coherent_profile(&c, &[0.25 + 0.4]).norm();
        let b = coherent_profile(&c, &[0.25 - 0.4]).norm();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn normalization_is_exact() {
        let cfg = QuadratureConfig::default();
        for &(d, s, h) in &[(1, 1.0, 1.0), (1, 0.6, 0.05), (2, 0.75, 0.3), (2, 1.0, 0.02)] {
            let m = normalization_mass(&state(d, s, h, 1.0), &cfg).unwrap();
            assert!((m - 1.0).abs() < 1e-8, "{d} {s} {h}: {m}");
        }
    }

    #[test]
    fn gaussian_identity() {
        let c = state(1, 1.0, 0.1, 1.0);
        let k = kinetic_expectation(&c).unwrap();
        assert!((k.expectation - 39.5284).abs() < 1e-4);
        assert!((k.expectation - gaussian_identity_value(&c).unwrap()).abs() < 1e-6 * k.expectation);
        let c = state(2, 1.0, 0.2, 1.0);
        let k = kinetic_expectation(&c).unwrap();
        let exact = 2.0 * (2.0 * PI).powi(2) + 0.2;
        assert!((k.expectation - exact).abs() < 1e-6 * exact);
        assert!((k.expectation - 79.1568).abs() < 1e-4);
        let full = kinetic_expectation_full_grid(&c).unwrap();
        assert!((full - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn full_grid_agrees_with_factorised() {
        let c = CoherentParams::new(2, 0.9, 0.5, vec![1.0, -0.5], vec![0.0, 0.0]).unwrap();
        let a = kinetic_expectation(&c).unwrap().expectation;
        match kinetic_expectation_full_grid(&c) {
            Ok(b) => assert!((a - b).abs() < 1e-9 * a),
            Err(Error::Resolution(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn zero_momentum_vanishes_in_the_limit() {
        let mut last = f64::INFINITY;
        for &h in &[0.5, 0.1, 0.02] {
            let e = kinetic_expectation(&state(1, 0.75, h, 0.0)).unwrap().expectation;
            assert!(e < last);
            last = e;
        }
        assert!(last < 0.1);
    }

    #[test]
    fn translation_invariance() {
        let a = kinetic_expectation(&CoherentParams::new(1, 0.8, 0.2, vec![1.0], vec![0.0]).unwrap()).unwrap();
        let b = kinetic_expectation(&CoherentParams::new(1, 0.8, 0.2, vec![1.0], vec![13.7]).unwrap()).unwrap();
        assert!((a.expectation - b.expectation).abs() < 1e-10 * a.expectation);
    }

    #[test]
    fn momentum_centroid_follows_k() {
        for &k in &[0.5, 1.0, 2.0] {
            let ax = axis_spectrum(0.75, 0.1, k).unwrap();
            let centroid: f64 = ax.momenta.iter().zip(&ax.density).map(|(p, r)| p * r).sum::<f64>() * ax.dp;
            assert!((centroid - 2.0 * PI * k).abs() < ax.dp);
        }
    }

    #[test]
    fn semiclassical_limit() {
        let hbars = [0.5, 0.2, 0.1, 0.05, 0.02];
        for &s in &[0.6, 0.75, 0.9, 1.0] {
            let r = semiclassical_limit_check(&state(1, s, 1.0, 1.0), &hbars).unwrap();
            assert!(r.converged, "s={s}: {r:?}");
        }
        let r = semiclassical_limit_check(&state(1, 1.0, 1.0, 1.0), &hbars).unwrap();
        for row in &r.rows {
            assert!((row.gap - row.hbar / 2.0).abs() < 1e-6 * row.limit);
        }
        assert!(semiclassical_limit_check(&state(1, 1.0, 1.0, 1.0), &[0.1, 0.2]).is_err());
        let a = kinetic_expectation(&state(1, 0.7, 1e-4, 1.0)).unwrap();
        let b = kinetic_expectation(&state(1, 0.7, 1e-4, 3.0)).unwrap();
        assert!((b.limit / a.limit - 3f64.powf(1.4)).abs() < 1e-12);
    }

    #[test]
    fn potential_modes() {
        let cfg = QuadratureConfig::default();
        let c = state(1, 0.75, 0.1, 1.0);
        let flat = PotentialSpec::new(1, 0.75, 1.0, Profile::Box { depth: 2.5, lower: vec![-50.0], upper: vec![50.0] }).unwrap();
        for mode in [PotentialMode::Frozen, PotentialMode::Diagnostic] {
            let e = potential_expectation(&c, &flat, mode, &cfg).unwrap();
            assert!((e.value - 2.5).abs() < 1e-8);
        }
        let far = PotentialSpec::new(1, 0.75, 1.0, Profile::Box { depth: 2.5, lower: vec![3.0], upper: vec![4.0] }).unwrap();
        assert_eq!(potential_expectation(&c, &far, PotentialMode::Frozen, &cfg).unwrap().value, 0.0);

        let well = PotentialSpec::new(1, 0.75, 1.0, Profile::Gaussian { depth: 1.0, center: vec![0.0], width: 0.8 }).unwrap();
        let mut last = f64::INFINITY;
        for &h in &[0.5, 0.1, 0.02, 0.004] {
            let gap = potential_expectation(&state(1, 0.75, h, 1.0), &well, PotentialMode::Diagnostic, &cfg).unwrap().gap;
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-2);
        let c2 = state(2, 0.9, 0.05, 1.0);
        let w2 = PotentialSpec::new(2, 0.9, 1.0, Profile::Gaussian { depth: 1.0, center: vec![0.0, 0.0], width: 1.0 }).unwrap();
        let e = potential_expectation(&c2, &w2, PotentialMode::Diagnostic, &cfg).unwrap();
        assert!(e.gap < 0.05);
    }

    #[test]
    fn parseval() {
        let c = CoherentParams::new(1, 1.0, 1.0, vec![0.0], vec![0.0]).unwrap();
        let a = parseval_check(&c, TestFunction::Gaussian { sigma: 1.0 }, 1.0).unwrap();
        assert!(a.residual <= 1e-4, "{a:?}");
        let b = parseval_check(&c, TestFunction::Gaussian { sigma: 1.0 }, 2.0).unwrap();
        assert!(b.residual < a.residual, "{a:?} {b:?}");
        let g = parseval_check(&c, TestFunction::Coherent { k0: 0.7 }, 1.0).unwrap();
        assert!(g.residual <= 1e-4, "{g:?}");
    }
}
