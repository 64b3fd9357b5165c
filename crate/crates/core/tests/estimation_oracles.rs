mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use risloc::channel::optimal_phase_profile;
use risloc::estimation::{estimate_phi_rm, estimate_tau_rm, estimate_theta_rm, EstimatorGrids, GridConfig};
use risloc::geometry::{derive_channel_params, ScenarioGeometry};
use risloc::linalg::wrap_angle;

fn grids(g: &ScenarioGeometry) -> EstimatorGrids {
    let p = derive_channel_params(g).unwrap();
    EstimatorGrids::new(&GridConfig::default(), g, p.tau_br).unwrap()
}

#[test]
fn theta_estimator_is_brute_force_argmax() {
    let g = ScenarioGeometry::default();
    let gr = grids(&g);
    let mut r = rng(21);
    for case in 0..1000 {
        let n = 16;
        let phi_br = r.random_range(-PI..PI);
        let profile = if case % 2 == 0 {
            random_phase_vector(&mut r, n)
        } else {
            optimal_phase_profile(r.random_range(-1.5..1.5), phi_br, &g)
        };
        let b = ula(n, phi_br, 0.5);
        let objective: Vec<f64> = gr
            .theta_grid
            .iter()
            .map(|&t| {
                let sig: Vec<Complex64> = ula(n, t, 0.5).iter().zip(&b).map(|(x, y)| x * y.conj()).collect();
                inner(&sig, profile.as_slice()).norm()
            })
            .collect();
        let want = gr.theta_grid[first_argmax(&objective)];
        assert_eq!(
            estimate_theta_rm(&profile, phi_br, &gr.theta_grid, 0.5).unwrap(),
            want,
            "case {case}"
        );
    }
}

#[test]
fn phi_estimator_is_brute_force_argmax() {
    let g = ScenarioGeometry::default();
    let gr = grids(&g);
    let mut r = rng(22);
    for case in 0..1000 {
        let w = random_complex_vector(&mut r, 16);
        let objective: Vec<f64> = gr
            .phi_grid
            .iter()
            .map(|&phi| inner(w.as_slice(), &ula(16, phi, 0.5)).norm())
            .collect();
        let want = wrap_angle(gr.phi_grid[first_argmax(&objective)]);
        assert_eq!(estimate_phi_rm(&w, &gr.phi_grid, 0.5).unwrap(), want, "case {case}");
    }
}

#[test]
fn tau_estimator_is_brute_force_argmax() {
    let g = ScenarioGeometry::default();
    let p = derive_channel_params(&g).unwrap();
    let gr = grids(&g);
    let mut r = rng(23);
    let spacing = g.bandwidth / g.num_subcarriers as f64;
    let half = (g.num_subcarriers as i64 - 1) / 2;
    for case in 0..1000 {
        let y: Vec<Complex64> = if case % 2 == 0 {
            random_complex_vector(&mut r, g.num_subcarriers).as_slice().to_vec()
        } else {
            let tau0 = p.tau_br + r.random_range(0.0..300e-9);
            (-half..=half)
                .map(|n| Complex64::from_polar(1.0, -2.0 * PI * tau0 * n as f64 * spacing))
                .collect()
        };
        let objective: Vec<f64> = gr
            .tau_grid
            .iter()
            .map(|&tau| {
                let t: Vec<Complex64> = (-half..=half)
                    .map(|n| Complex64::from_polar(1.0, -2.0 * PI * tau * n as f64 * spacing))
                    .collect();
                inner(&y, &t).norm()
            })
            .collect();
        let want = gr.tau_grid[first_argmax(&objective)] - p.tau_br;
        assert_eq!(
            estimate_tau_rm(&y, p.tau_br, &gr.tau_grid, &g).unwrap(),
            want,
            "case {case}"
        );
    }
}

#[test]
fn on_grid_delay_is_recovered_exactly() {
    let g = ScenarioGeometry::default();
    let p = derive_channel_params(&g).unwrap();
    let gr = grids(&g);
    let half = (g.num_subcarriers as i64 - 1) / 2;
    let spacing = g.bandwidth / g.num_subcarriers as f64;
    for k in [0, 17, 1667, gr.tau_grid.len() - 1] {
        let tau0 = gr.tau_grid[k];
        let y: Vec<Complex64> = (-half..=half)
            .map(|n| Complex64::from_polar(0.3, -2.0 * PI * tau0 * n as f64 * spacing))
            .collect();
        assert_eq!(
            estimate_tau_rm(&y, p.tau_br, &gr.tau_grid, &g).unwrap(),
            tau0 - p.tau_br
        );
    }
}
