//! Per-subcarrier two-hop channels and their cascade through the RIS.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{steering_vector_unchecked, ChannelParams, ScenarioGeometry};
use crate::linalg::{cis, singular_values, CMatrix, CVector};

/// Which of the two hops to synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    BsToRis,
    RisToMs,
}

fn check_subcarrier(n: i64, geom: &ScenarioGeometry) -> Result<()> {
    let (lo, hi) = geom.subcarrier_range();
    if n < lo || n > hi {
        return Err(Error::invalid(format!("subcarrier {n} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Delay phasor `exp(-j 2π τ n B / N)`.
pub fn delay_phasor(tau: f64, n: i64, geom: &ScenarioGeometry) -> Complex64 {
    cis(-2.0 * PI * tau * n as f64 * geom.bandwidth / geom.num_subcarriers as f64)
}

/// `ρ e^{-j2πτnB/N} α_r(φ) α_t(θ)^H` for the selected hop.
pub fn single_hop_channel(which: Hop, n: i64, params: &ChannelParams, geom: &ScenarioGeometry) -> Result<CMatrix> {
    check_subcarrier(n, geom)?;
    let ratio = geom.spacing_ratio();
    let (rows, cols, rho, tau, arrival, departure) = match which {
        Hop::BsToRis => (
            geom.n_ris,
            geom.n_bs,
            params.rho_br,
            params.tau_br,
            params.phi_br,
            params.theta_br,
        ),
        Hop::RisToMs => (
            geom.n_ms,
            geom.n_ris,
            params.rho_rm,
            params.tau_rm,
            params.phi_rm,
            params.theta_rm,
        ),
    };
    let a_r = steering_vector_unchecked(rows, arrival, ratio);
    let a_t = steering_vector_unchecked(cols, departure, ratio);
    let gain = delay_phasor(tau, n, geom) * rho;
    Ok((a_r * a_t.adjoint()) * gain)
}

/// Fails unless every entry of `profile` has modulus `1/sqrt(len)`.
pub fn check_phase_profile(profile: &CVector) -> Result<()> {
    if profile.is_empty() {
        return Err(Error::invalid("empty phase profile"));
    }
    let target = 1.0 / (profile.len() as f64).sqrt();
    for (i, z) in profile.iter().enumerate() {
        if (z.norm() - target).abs() > 1e-9 * target {
            return Err(Error::invalid(format!(
                "phase profile entry {i} has modulus {} instead of {target}",
                z.norm()
            )));
        }
    }
    Ok(())
}

/// `H_RM · diag(φ) · H_BR`.
pub fn cascade(h_rm: &CMatrix, phase_profile: &CVector, h_br: &CMatrix) -> Result<CMatrix> {
    if h_rm.ncols() != phase_profile.len() || h_br.nrows() != phase_profile.len() {
        return Err(Error::invalid(format!(
            "shape mismatch: H_RM is {}x{}, profile {}, H_BR is {}x{}",
            h_rm.nrows(),
            h_rm.ncols(),
            phase_profile.len(),
            h_br.nrows(),
            h_br.ncols()
        )));
    }
    check_phase_profile(phase_profile)?;
    let mut scaled = h_br.clone();
    for (mut row, phase) in scaled.row_iter_mut().zip(phase_profile.iter()) {
        row *= *phase;
    }
    Ok(h_rm * scaled)
}

/// The RIS-side combining vector `α_t(θ_RM) ⊙ α_r*(φ_BR)` whose inner
/// product with a profile gives `β`.
pub fn ris_signature(theta_rm: f64, phi_br: f64, n_ris: usize, spacing_ratio: f64) -> CVector {
    let a_t = steering_vector_unchecked(n_ris, theta_rm, spacing_ratio);
    let a_r = steering_vector_unchecked(n_ris, phi_br, spacing_ratio);
    a_t.component_mul(&a_r.map(|z| z.conj()))
}

/// `β(φ) = [α_t(θ_RM) ⊙ α_r*(φ_BR)]^H φ`.
pub fn beta(profile: &CVector, params: &ChannelParams, geom: &ScenarioGeometry) -> Complex64 {
    ris_signature(params.theta_rm, params.phi_br, geom.n_ris, geom.spacing_ratio()).dotc(profile)
}

/// Profile maximizing `|β|`, reaching `|β| = sqrt(N_R)`.
pub fn optimal_phase_profile(theta_rm: f64, phi_br: f64, geom: &ScenarioGeometry) -> CVector {
    let scale = 1.0 / (geom.n_ris as f64).sqrt();
    ris_signature(theta_rm, phi_br, geom.n_ris, geom.spacing_ratio()) * Complex64::new(scale, 0.0)
}

/// The full cascaded channel for one RIS configuration.
#[derive(Debug, Clone)]
pub struct CascadedChannel {
    /// `H[n]` in subcarrier order -(N-1)/2 ..= (N-1)/2.
    pub per_subcarrier: Vec<CMatrix>,
    pub beta: Complex64,
    pub params: ChannelParams,
    pub phase_profile: CVector,
}

impl CascadedChannel {
    pub fn build(geom: &ScenarioGeometry, params: &ChannelParams, phase_profile: &CVector) -> Result<Self> {
        if phase_profile.len() != geom.n_ris {
            return Err(Error::invalid(format!(
                "profile length {} does not match {} RIS elements",
                phase_profile.len(),
                geom.n_ris
            )));
        }
        let per_subcarrier = geom
            .subcarrier_indices()
            .map(|n| {
                let h_br = single_hop_channel(Hop::BsToRis, n, params, geom)?;
                let h_rm = single_hop_channel(Hop::RisToMs, n, params, geom)?;
                cascade(&h_rm, phase_profile, &h_br)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            per_subcarrier,
            beta: beta(phase_profile, params, geom),
            params: *params,
            phase_profile: phase_profile.clone(),
        })
    }

    /// Closed form `β ρ_BR ρ_RM e^{-j2π(τ_BR+τ_RM)nB/N} α_r(φ_RM) α_t(θ_BR)^H`.
    pub fn closed_form(&self, n: i64, geom: &ScenarioGeometry) -> CMatrix {
        let p = &self.params;
        let ratio = geom.spacing_ratio();
        let a_r = steering_vector_unchecked(geom.n_ms, p.phi_rm, ratio);
        let a_t = steering_vector_unchecked(geom.n_bs, p.theta_br, ratio);
        let gain = self.beta * p.rho_br * p.rho_rm * delay_phasor(p.tau_br + p.tau_rm, n, geom);
        (a_r * a_t.adjoint()) * gain
    }

    /// Ratio of the second to the first singular value, worst over subcarriers.
    pub fn rank_one_defect(&self) -> f64 {
        self.per_subcarrier
            .iter()
            .map(|h| {
                let s = singular_values(h);
                if s.len() < 2 || s[0] == 0.0 {
                    0.0
                } else {
                    s[1] / s[0]
                }
            })
            .fold(0.0, f64::max)
    }
}

/// The link as seen by the beam-training protocol: the BS beam `f` is fixed
/// toward the RIS, so each RIS profile maps to one `N_M`-vector `H[n] f` per
/// subcarrier. The hop products are cached so sweeping many profiles is
/// cheap.
#[derive(Debug, Clone)]
pub struct LinkChannel {
    pub params: ChannelParams,
    /// Unit-norm BS beamformer `α_t(θ_BR)/sqrt(N_B)`.
    pub bs_beam: CVector,
    /// `H_BR[n] f` per subcarrier (length `N_R`).
    incident: Vec<CVector>,
    /// `H_RM[n]` per subcarrier.
    h_rm: Vec<CMatrix>,
}

impl LinkChannel {
    pub fn new(geom: &ScenarioGeometry, params: &ChannelParams) -> Result<Self> {
        let bs_beam = steering_vector_unchecked(geom.n_bs, params.theta_br, geom.spacing_ratio())
            * Complex64::new(1.0 / (geom.n_bs as f64).sqrt(), 0.0);
        let mut incident = Vec::with_capacity(geom.num_subcarriers);
        let mut h_rm = Vec::with_capacity(geom.num_subcarriers);
        for n in geom.subcarrier_indices() {
            incident.push(single_hop_channel(Hop::BsToRis, n, params, geom)? * &bs_beam);
            h_rm.push(single_hop_channel(Hop::RisToMs, n, params, geom)?);
        }
        Ok(Self {
            params: *params,
            bs_beam,
            incident,
            h_rm,
        })
    }

    pub fn num_subcarriers(&self) -> usize {
        self.incident.len()
    }

    pub fn n_ms(&self) -> usize {
        self.h_rm.first().map_or(0, |h| h.nrows())
    }

    /// `H[n]|_φ f` for every subcarrier.
    pub fn response(&self, profile: &CVector) -> Vec<CVector> {
        self.incident
            .iter()
            .zip(&self.h_rm)
            .map(|(inc, h)| h * inc.component_mul(profile))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::derive_channel_params;
    use approx::assert_abs_diff_eq;

    fn reference() -> (ScenarioGeometry, ChannelParams) {
        let g = ScenarioGeometry::default();
        let p = derive_channel_params(&g).unwrap();
        (g, p)
    }

    #[test]
    fn hop_at_dc_has_no_delay_phase() {
        let (g, p) = reference();
        let h = single_hop_channel(Hop::BsToRis, 0, &p, &g).unwrap();
        assert_abs_diff_eq!(h[(0, 0)].re, p.rho_br, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 0)].im, 0.0, epsilon = 1e-15);
        let expect = p.rho_br * ((g.n_ris * g.n_bs) as f64).sqrt();
        assert_abs_diff_eq!(h.norm(), expect, epsilon = 1e-12 * expect);
    }

    #[test]
    fn hop_first_subcarrier_entry() {
        let (g, p) = reference();
        let h = single_hop_channel(Hop::BsToRis, 1, &p, &g).unwrap();
        let phase = -2.0 * PI * p.tau_br * 100e6 / 31.0;
        assert_abs_diff_eq!(h[(0, 0)].re, p.rho_br * phase.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 0)].im, p.rho_br * phase.sin(), epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_subcarrier_rejected() {
        let (g, p) = reference();
        assert!(single_hop_channel(Hop::RisToMs, 16, &p, &g).is_err());
        assert!(single_hop_channel(Hop::RisToMs, -15, &p, &g).is_ok());
    }

    #[test]
    fn uniform_profile_beta_is_direct_sum() {
        let (g, p) = reference();
        let nr = g.n_ris as f64;
        let profile = CVector::from_element(g.n_ris, Complex64::new(1.0 / nr.sqrt(), 0.0));
        let b = beta(&profile, &p, &g);
        let mut oracle = Complex64::new(0.0, 0.0);
        for i in 0..g.n_ris {
            oracle += cis(2.0 * PI * 0.5 * i as f64 * (p.phi_br.sin() - p.theta_rm.sin()));
        }
        oracle /= nr.sqrt();
        assert_abs_diff_eq!(b.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(b.im, oracle.im, epsilon = 1e-12);
    }

    #[test]
    fn optimal_profile_reaches_coherent_gain() {
        let (g, p) = reference();
        let phi = optimal_phase_profile(p.theta_rm, p.phi_br, &g);
        let c = CascadedChannel::build(&g, &p, &phi).unwrap();
        assert_abs_diff_eq!(c.beta.norm(), 4.0, epsilon = 1e-10);
        let expect = 4.0 * p.rho_br * p.rho_rm * ((g.n_ms * g.n_bs) as f64).sqrt();
        for h in &c.per_subcarrier {
            assert_abs_diff_eq!(h.norm(), expect, epsilon = 1e-10 * expect);
        }
        assert!(c.rank_one_defect() < 1e-9);
    }

    #[test]
    fn optimal_profile_flat_when_angles_match() {
        let g = ScenarioGeometry::default();
        let phi = optimal_phase_profile(0.3, 0.3, &g);
        for z in phi.iter() {
            assert_abs_diff_eq!(z.re, 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn subcarriers_differ_only_in_phase() {
        let (g, p) = reference();
        let phi = CVector::from_fn(g.n_ris, |i, _| cis(0.7 * i as f64 * i as f64) * 0.25);
        let c = CascadedChannel::build(&g, &p, &phi).unwrap();
        let (a, b) = (&c.per_subcarrier[0], &c.per_subcarrier[20]);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-15);
        }
    }

    #[test]
    fn cascade_rejects_non_constant_modulus() {
        let (g, p) = reference();
        let h_br = single_hop_channel(Hop::BsToRis, 0, &p, &g).unwrap();
        let h_rm = single_hop_channel(Hop::RisToMs, 0, &p, &g).unwrap();
        let mut phi = CVector::from_element(g.n_ris, Complex64::new(0.25, 0.0));
        phi[3] = Complex64::new(0.5, 0.0);
        assert!(matches!(cascade(&h_rm, &phi, &h_br), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn link_response_matches_full_cascade() {
        let (g, p) = reference();
        let phi = CVector::from_fn(g.n_ris, |i, _| cis(1.3 * i as f64) * 0.25);
        let link = LinkChannel::new(&g, &p).unwrap();
        let c = CascadedChannel::build(&g, &p, &phi).unwrap();
        for (h, r) in c.per_subcarrier.iter().zip(link.response(&phi)) {
            let direct = h * &link.bs_beam;
            assert_abs_diff_eq!((direct - r).norm(), 0.0, epsilon = 1e-16);
        }
    }
}
