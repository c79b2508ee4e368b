//! Worked examples through the public API. Closed forms are written out
//! here independently of the library.

use std::f64::consts::PI;

use fracspec::bounds::*;
use fracspec::coherent::{kinetic_expectation, CoherentParams};
use fracspec::semiclassical::{deformed_sphere_volume, gamma_one_report};
use fracspec::quad::QuadratureConfig;
use fracspec::smoothed::{riesz_mean, RieszQuery, SpectralMeasure};
use fracspec::specfun::*;
use fracspec::spectrum::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn square() -> DomainSpec {
    DomainSpec::hypercube(2, PI).unwrap()
}

#[test]
fn euclidean_volumes() {
    assert!(close(ball_volume(2, 1.0).unwrap(), PI, 1e-14));
    assert!(close(sphere_volume(2, 1.0).unwrap(), 2.0 * PI, 1e-14));
    assert!(close(sphere_volume(3, 1.0).unwrap(), 4.0 * PI, 1e-14));
    // Cross-polytope 2^d/d!.
    assert!(close(ball_volume(3, 0.5).unwrap(), 8.0 / 6.0, 1e-13));
    for s in [0.55, 0.8, 1.0] {
        assert!(close(ball_volume(1, s).unwrap(), 2.0, 1e-14));
    }
}

#[test]
fn two_dimensional_weyl_coefficient() {
    // N(E) ~ |Ω|E/4π in two dimensions.
    for vol in [1.0, PI * PI, 6.25] {
        let dom = DomainSpec::new(2, vol, false).unwrap();
        assert!(close(weyl_coefficient(&dom, 1.0).unwrap(), vol / (4.0 * PI), 1e-14));
    }
    assert!(close(riesz_classical_constant(0.0, 2, 1.0).unwrap(), 1.0 / (4.0 * PI), 1e-14));
    assert!(close(riesz_classical_constant(1.0, 2, 1.0).unwrap(), 1.0 / (8.0 * PI), 1e-14));
    assert!(close(weyl_counting_estimate(&square(), 1.0, 8.0).unwrap(), 2.0 * PI, 1e-14));
}

#[test]
fn square_spectrum_and_bounds() {
    let p = SpectralParams::new(2, 1.0, PI).unwrap();
    assert_eq!(counting_function(&p, 8.0), 4);
    let first: Vec<f64> = enumerate_smallest(&p, 5).unwrap().values().collect();
    for (got, want) in first.iter().zip([2.0, 5.0, 5.0, 8.0, 10.0]) {
        assert!(close(*got, want, 1e-14), "{first:?}");
    }
    assert!(close(eigenvalue_sum(&p, 5).unwrap(), 30.0, 1e-14));

    let dom = square();
    assert!(close(polya_lower_bound(&dom, 1.0, 1.0).unwrap(), 4.0 / PI, 1e-14));
    assert!(close(asymptotic_eigenvalue(&dom, 1.0, 1.0).unwrap(), 4.0 / PI, 1e-14));
    assert!(close(bly_sum_lower_bound(&dom, 1.0, 5.0).unwrap(), 50.0 / PI, 1e-14));
    assert!(close(counting_upper_bound(&dom, 1.0, 8.0).unwrap(), 4.0 * PI, 1e-14));
}

// Σ_{n≤k} ℰ_n ≥ d/(d+2) · 4π²/(|B_d||Ω|)^{2/d} · k^{1+2/d}.
#[test]
fn sum_bound_reduces_to_euclidean_form() {
    for d in 1..=6 {
        let dd = d as f64;
        let b_d = PI.powf(dd / 2.0) / gamma(1.0 + dd / 2.0).unwrap();
        for vol in [1.0, 3.3] {
            let dom = DomainSpec::new(d, vol, false).unwrap();
            for k in [1.0f64, 12.0, 1e5] {
                let expected = dd / (dd + 2.0) * 4.0 * PI * PI / (b_d * vol).powf(2.0 / dd) * k.powf(1.0 + 2.0 / dd);
                assert!(close(bly_sum_lower_bound(&dom, 1.0, k).unwrap(), expected, 1e-12));
            }
        }
    }
}

// N(z) ≤ (4π)^{−d/2} ((d+2)/d)^{d/2} |Ω|/Γ(1+d/2) · z^{d/2}.
#[test]
fn counting_bound_reduces_to_euclidean_form() {
    for d in 1..=6 {
        let dd = d as f64;
        for vol in [1.0, 7.0] {
            let dom = DomainSpec::new(d, vol, false).unwrap();
            for z in [0.3f64, 8.0, 1e4] {
                let expected = (4.0 * PI).powf(-dd / 2.0) * ((dd + 2.0) / dd).powf(dd / 2.0) * vol
                    / gamma(1.0 + dd / 2.0).unwrap()
                    * z.powf(dd / 2.0);
                assert!(close(counting_upper_bound(&dom, 1.0, z).unwrap(), expected, 1e-12));
            }
        }
    }
}

#[test]
fn first_riesz_mean_by_hand() {
    let p = SpectralParams::new(2, 1.0, PI).unwrap();
    let m = SpectralMeasure::from_slice(&enumerate_up_to(&p, 20.0).unwrap());
    // (10−2) + 2(10−5) + (10−8) = 20.
    assert!(close(riesz_mean(&m, &RieszQuery::new(1.0, 10.0).unwrap()).unwrap(), 20.0, 1e-14));
}

// ⟨G, −ħ²Δ G⟩ = ‖2πk‖² + ħd/2 for Gaussian coherent states.
#[test]
fn gaussian_coherent_state() {
    let c = CoherentParams::new(1, 1.0, 0.1, vec![1.0], vec![0.0]).unwrap();
    let got = kinetic_expectation(&c).unwrap().expectation;
    assert!(close(got, 4.0 * PI * PI + 0.05, 1e-6), "{got}");
    assert!((got - 39.5284).abs() < 1e-4);

    let c = CoherentParams::new(2, 1.0, 0.2, vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
    let got = kinetic_expectation(&c).unwrap().expectation;
    assert!(close(got, 8.0 * PI * PI + 0.2, 1e-6), "{got}");
}

#[test]
fn deformed_sphere_is_ball_volume() {
    for d in 1..=6 {
        for s in [0.55, 0.75, 1.0] {
            let v = deformed_sphere_volume(d, s, 1.7).unwrap();
            assert!(close(v, 1.7f64.powi(d as i32) * ball_volume(d, s).unwrap(), 1e-12));
        }
    }
}

#[test]
fn gamma_one_coefficient_in_two_dimensions() {
    let rep = gamma_one_report(2, 1.0, &QuadratureConfig::default()).unwrap();
    assert!(rep.resolved);
    assert!(close(rep.discrepancy_factor, 2.0, 1e-14));
    // (2π)^{−2} · 2π · 2/(2·4) = 1/(8π).
    assert!(close(rep.radial_coefficient, 1.0 / (8.0 * PI), 1e-13));
}
