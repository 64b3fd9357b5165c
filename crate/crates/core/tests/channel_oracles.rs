mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use risloc::channel::{beta, optimal_phase_profile, CascadedChannel, LinkChannel};
use risloc::estimation::{recover_orientation, recover_position};
use risloc::geometry::{derive_channel_params, far_field_bound, far_field_limit, Point, ScenarioGeometry};
use risloc::linalg::SPEED_OF_LIGHT;

#[test]
fn cascade_equals_closed_form_on_random_scenes() {
    let mut r = rng(11);
    for _ in 0..100 {
        let g = random_scene(&mut r);
        let p = derive_channel_params(&g).unwrap();
        let profile = random_phase_vector(&mut r, g.n_ris);
        let h = CascadedChannel::build(&g, &p, &profile).unwrap();
        for (n, hn) in g.subcarrier_indices().zip(&h.per_subcarrier) {
            let cf = h.closed_form(n, &g);
            let scale = cf.norm().max(hn.norm());
            assert!((hn - &cf).norm() <= 1e-10 * scale, "subcarrier {n}");
        }
        if g.n_ms > 1 && g.n_bs > 1 {
            assert!(h.rank_one_defect() < 1e-9);
        }
    }
}

#[test]
fn beta_never_exceeds_coherent_gain() {
    let mut r = rng(12);
    for _ in 0..200 {
        let g = random_scene(&mut r);
        let p = derive_channel_params(&g).unwrap();
        let bound = (g.n_ris as f64).sqrt();
        let b = beta(&random_phase_vector(&mut r, g.n_ris), &p, &g).norm();
        assert!(b <= bound + 1e-12);

        let opt = optimal_phase_profile(p.theta_rm, p.phi_br, &g);
        let rotated = &opt * Complex64::from_polar(1.0, r.random_range(0.0..6.0));
        assert!((beta(&rotated, &p, &g).norm() - bound).abs() < 1e-10);
    }
}

#[test]
fn beta_below_bound_away_from_optimum() {
    let g = ScenarioGeometry::default();
    let p = derive_channel_params(&g).unwrap();
    let mut opt = optimal_phase_profile(p.theta_rm, p.phi_br, &g);
    // flip one element: |β| drops by exactly 2/sqrt(N_R)
    opt[3] = -opt[3];
    let b = beta(&opt, &p, &g).norm();
    assert!((b - (4.0 - 2.0 / 4.0)).abs() < 1e-12, "{b}");
}

#[test]
fn matched_beams_reach_coherent_gain_on_random_scenes() {
    let mut r = rng(13);
    for _ in 0..100 {
        let g = random_scene(&mut r);
        let p = derive_channel_params(&g).unwrap();
        let link = LinkChannel::new(&g, &p).unwrap();
        let phi = optimal_phase_profile(p.theta_rm, p.phi_br, &g);
        let w: Vec<Complex64> = ula(g.n_ms, p.phi_rm, 0.5)
            .into_iter()
            .map(|z| z / (g.n_ms as f64).sqrt())
            .collect();
        let want = ((g.n_bs * g.n_ms * g.n_ris) as f64).sqrt() * p.rho_br * p.rho_rm;
        for h in link.response(&phi) {
            let got = inner(&w, h.as_slice()).norm();
            assert!(rel_err(got, want) < 1e-9, "{got} vs {want}");
        }
    }
}

#[test]
fn reference_parameters() {
    let g = ScenarioGeometry::default();
    let p = derive_channel_params(&g).unwrap();
    assert!((p.tau_br - 5200f64.sqrt() / SPEED_OF_LIGHT).abs() < 1e-18);
    assert!((p.tau_br * 1e9 - 240.54).abs() < 0.01);
    assert!((p.tau_rm * 1e9 - 83.39).abs() < 0.01);
    assert!((p.theta_rm - (-15f64).atan2(20.0)).abs() < 1e-15);
    assert!((p.phi_rm - 2.18394).abs() < 1e-5);
}

#[test]
fn geometry_round_trip_on_random_placements() {
    let mut r = rng(14);
    for _ in 0..200 {
        let g = random_scene(&mut r);
        let p = derive_channel_params(&g).unwrap();
        let m = recover_position(p.theta_rm, p.tau_rm, g.ris_position).unwrap();
        assert!(m.distance(&g.ms_position) < 1e-9);
        let a = recover_orientation(p.theta_rm, p.phi_rm);
        let d = risloc::linalg::wrap_angle(a - g.ms_orientation);
        assert!(d.abs() < 1e-12);
    }
}

#[test]
fn far_field_examples() {
    let g = ScenarioGeometry::default();
    assert_eq!(far_field_limit(&g), 100);
    let mut near = g.clone();
    near.ms_position = Point::new(g.ris_position.x + 4.0, g.ris_position.y);
    assert!((far_field_bound(&near) - 40.0).abs() < 0.02);
    assert_eq!(far_field_limit(&near), 40);
    let mut wide = g;
    wide.element_spacing *= 2.0;
    assert!((far_field_bound(&wide) * 2.0 - far_field_bound(&ScenarioGeometry::default())).abs() < 1e-9);
}
