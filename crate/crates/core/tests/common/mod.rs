#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risloc::geometry::{Point, ScenarioGeometry};
use risloc::linalg::CVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Any three distinct points and array sizes; used where the far-field and
/// grid conventions do not matter.
pub fn random_scene(rng: &mut ChaCha8Rng) -> ScenarioGeometry {
    let mut g = ScenarioGeometry::default();
    let mut p = || Point::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
    g.bs_position = p();
    g.ris_position = p();
    g.ms_position = p();
    g.ms_orientation = rng.random_range(-PI..PI);
    g.n_bs = rng.random_range(1..=64);
    g.n_ms = rng.random_range(2..=16);
    g.n_ris = rng.random_range(1..=16);
    g.n_rf = 1;
    g
}

/// MS placed in front of the RIS (distance 5..50 m, departure angle within
/// ±60°) with an orientation that keeps the arrival angle inside the
/// half-plane the default φ grid covers.
pub fn random_reference_placement(rng: &mut ChaCha8Rng) -> ScenarioGeometry {
    let mut g = ScenarioGeometry::default();
    let dist = rng.random_range(5.0..50.0);
    let theta: f64 = rng.random_range(-PI / 3.0..PI / 3.0);
    g.ms_position = Point::new(
        g.ris_position.x + dist * theta.cos(),
        g.ris_position.y + dist * theta.sin(),
    );
    g.ms_orientation = theta - rng.random_range(-PI / 3.0..PI / 3.0);
    g
}

pub fn random_complex_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_phase_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let m = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |_, _| Complex64::from_polar(m, rng.random_range(0.0..2.0 * PI)))
}

/// ULA response written out element by element.
pub fn ula(n: usize, angle: f64, ratio: f64) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * ratio * i as f64 * angle.sin()))
        .collect()
}

/// `Σ conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// First index of the strict maximum.
pub fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
