//! Grid-search channel-parameter estimators, geometric recovery of MS
//! position and orientation, and the error and rate metrics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{delay_phasor, ris_signature, LinkChannel};
use crate::error::{Error, Result};
use crate::geometry::{steering_vector_unchecked, ChannelParams, Point, ScenarioGeometry};
use crate::linalg::{wrap_angle, CVector, SPEED_OF_LIGHT};

/// Resolution and extent of the estimator grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Points in each angle grid (π-wide, open interval, midpoint sampled).
    pub angle_points: usize,
    /// Center of the MS arrival-angle grid. A ULA cannot tell `φ` from
    /// `π - φ`, so the grid covers the half-plane the MS array faces the RIS
    /// from.
    pub phi_center: f64,
    /// Delay grid step, s.
    pub tau_step: f64,
    /// Largest RIS→MS delay searched, s. Capped at the unambiguous range
    /// N/B of the subcarrier spacing.
    pub tau_span: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            angle_points: 2048,
            phi_center: PI,
            tau_step: 0.05e-9,
            tau_span: 500e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorGrids {
    /// RIS departure angles, radians, strictly increasing in (-π/2, π/2).
    pub theta_grid: Vec<f64>,
    /// MS arrival angles, radians, strictly increasing (unwrapped).
    pub phi_grid: Vec<f64>,
    /// Total BS→RIS→MS delays, s, strictly increasing above τ_BR.
    pub tau_grid: Vec<f64>,
}

fn midpoint_grid(center: f64, width: f64, points: usize) -> Vec<f64> {
    let step = width / points as f64;
    (0..points)
        .map(|i| center - width / 2.0 + (i as f64 + 0.5) * step)
        .collect()
}

impl EstimatorGrids {
    pub fn new(config: &GridConfig, geom: &ScenarioGeometry, tau_br: f64) -> Result<Self> {
        if config.angle_points == 0 {
            return Err(Error::invalid("angle grids need at least one point"));
        }
        if !(config.tau_step > 0.0 && config.tau_span > 0.0) {
            return Err(Error::invalid("delay grid step and span must be positive"));
        }
        let unambiguous = geom.num_subcarriers as f64 / geom.bandwidth;
        let span = config.tau_span.min(unambiguous);
        let count = (span / config.tau_step + 1e-9).floor() as usize;
        if count == 0 {
            return Err(Error::invalid("delay grid is empty"));
        }
        Ok(Self {
            theta_grid: midpoint_grid(0.0, PI, config.angle_points),
            phi_grid: midpoint_grid(config.phi_center, PI, config.angle_points),
            tau_grid: (1..=count).map(|k| tau_br + k as f64 * config.tau_step).collect(),
        })
    }

    pub fn theta_step(&self) -> f64 {
        step_of(&self.theta_grid)
    }

    pub fn tau_step(&self) -> f64 {
        step_of(&self.tau_grid)
    }
}

fn step_of(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        0.0
    } else {
        grid[1] - grid[0]
    }
}

/// Index of the largest objective value; ties keep the lowest index.
fn grid_argmax(grid: &[f64], mut objective: impl FnMut(f64) -> f64) -> Result<usize> {
    if grid.is_empty() {
        return Err(Error::invalid("empty search grid"));
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let v = objective(x);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    Ok(best)
}

/// `argmax_θ |[α_t(θ) ⊙ α_r*(φ_BR)]^H φ_opt|`.
pub fn estimate_theta_rm(phi_opt: &CVector, phi_br: f64, grid: &[f64], spacing_ratio: f64) -> Result<f64> {
    let n = phi_opt.len();
    let i = grid_argmax(grid, |theta| {
        ris_signature(theta, phi_br, n, spacing_ratio).dotc(phi_opt).norm()
    })?;
    Ok(grid[i])
}

/// `argmax_φ |w_opt^H α(φ)|`, wrapped to (-π, π].
pub fn estimate_phi_rm(w_opt: &CVector, grid: &[f64], spacing_ratio: f64) -> Result<f64> {
    let n = w_opt.len();
    let i = grid_argmax(grid, |phi| {
        w_opt.dotc(&steering_vector_unchecked(n, phi, spacing_ratio)).norm()
    })?;
    Ok(wrap_angle(grid[i]))
}

/// Delay signature `t(τ)[n] = exp(-j2π τ n B/N)` over the channel's
/// symmetric subcarrier indices.
pub fn delay_signature(tau: f64, geom: &ScenarioGeometry) -> CVector {
    CVector::from_iterator(
        geom.num_subcarriers,
        geom.subcarrier_indices().map(|n| delay_phasor(tau, n, geom)),
    )
}

/// `argmax_τ |y^H t(τ)| - τ_BR` over a grid of total delays.
pub fn estimate_tau_rm(y_stacked: &[Complex64], tau_br: f64, grid: &[f64], geom: &ScenarioGeometry) -> Result<f64> {
    if y_stacked.len() != geom.num_subcarriers {
        return Err(Error::invalid(format!(
            "{} observations for {} subcarriers",
            y_stacked.len(),
            geom.num_subcarriers
        )));
    }
    let y = CVector::from_column_slice(y_stacked);
    let i = grid_argmax(grid, |tau| y.dotc(&delay_signature(tau, geom)).norm())?;
    Ok(grid[i] - tau_br)
}

/// `r + c τ [cos θ, sin θ]`.
pub fn recover_position(theta_hat: f64, tau_hat: f64, ris_position: Point) -> Result<Point> {
    if !(tau_hat > 0.0) {
        return Err(Error::invalid(format!("delay estimate {tau_hat} must be positive")));
    }
    let range = SPEED_OF_LIGHT * tau_hat;
    Ok(Point::new(
        ris_position.x + range * theta_hat.cos(),
        ris_position.y + range * theta_hat.sin(),
    ))
}

/// `π + θ - φ`, wrapped.
pub fn recover_orientation(theta_hat: f64, phi_hat: f64) -> f64 {
    wrap_angle(PI + theta_hat - phi_hat)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub m_hat: Point,
    pub alpha_hat: f64,
    pub theta_hat: f64,
    pub phi_hat: f64,
    /// RIS→MS delay estimate, s.
    pub tau_hat: f64,
}

/// Runs all three estimators on the final training outputs and recovers the
/// MS pose.
pub fn estimate_position(
    phi_opt: &CVector,
    w_opt: &CVector,
    y_stacked: &[Complex64],
    known: &ChannelParams,
    grids: &EstimatorGrids,
    geom: &ScenarioGeometry,
) -> Result<PositionEstimate> {
    let ratio = geom.spacing_ratio();
    let theta_hat = estimate_theta_rm(phi_opt, known.phi_br, &grids.theta_grid, ratio)?;
    let phi_hat = estimate_phi_rm(w_opt, &grids.phi_grid, ratio)?;
    let tau_hat = estimate_tau_rm(y_stacked, known.tau_br, &grids.tau_grid, geom)?;
    Ok(PositionEstimate {
        m_hat: recover_position(theta_hat, tau_hat, geom.ris_position)?,
        alpha_hat: recover_orientation(theta_hat, phi_hat),
        theta_hat,
        phi_hat,
        tau_hat,
    })
}

/// Squared position error (m²) and squared wrapped orientation error (rad²).
pub fn metrics(truth: &ScenarioGeometry, est: &PositionEstimate) -> (f64, f64) {
    let pe = truth.ms_position.distance_sq(&est.m_hat);
    let d = wrap_angle(truth.ms_orientation - est.alpha_hat);
    (pe, d * d)
}

/// `Σ_n log2(1 + P/σ² |w^H H[n]|_φ f|²)`, bits per OFDM symbol.
pub fn achievable_rate(
    w_opt: &CVector,
    phi_opt: &CVector,
    link: &LinkChannel,
    tx_power: f64,
    sigma_sq: f64,
) -> Result<f64> {
    if !(sigma_sq > 0.0) {
        return Err(Error::invalid("rate needs a positive noise power"));
    }
    let snr = tx_power / sigma_sq;
    Ok(link
        .response(phi_opt)
        .iter()
        .map(|h| (1.0 + snr * w_opt.dotc(h).norm_sqr()).log2())
        .sum())
}
