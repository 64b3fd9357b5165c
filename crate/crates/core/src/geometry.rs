//! Scene geometry, array steering vectors and the path parameters derived
//! from BS, RIS and MS positions.
//!
//! Angle conventions: all arrays are uniform linear arrays whose phase
//! progression is `sin(angle)`, i.e. angles are measured from broadside.
//! The BS→RIS departure angle is `arccos((r_x - b_x) / |b - r|)` and the RIS
//! sees that path arrive at `-π + θ_BR`. The RIS→MS departure angle is the
//! bearing `atan2(m_y - r_y, m_x - r_x)` and the MS, rotated by `α`, sees it
//! arrive at `π + θ_RM - α`. Stored angles are wrapped to (-π, π].

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::linalg::{cis, wrap_angle, CVector, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Everything needed to synthesize the BS→RIS→MS channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub bs_position: Point,
    pub ris_position: Point,
    pub ms_position: Point,
    /// MS array rotation, radians.
    pub ms_orientation: f64,
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    /// Number of OFDM subcarriers; odd.
    pub num_subcarriers: usize,
    /// Element spacing in meters, shared by all three arrays.
    pub element_spacing: f64,
    pub path_loss_exponent: f64,
    pub n_bs: usize,
    pub n_ms: usize,
    pub n_ris: usize,
    pub n_rf: usize,
}

impl Default for ScenarioGeometry {
    /// The reference deployment: BS at the origin, RIS at (40, 60) m, MS at
    /// (60, 45) m rotated by π/10, 60 GHz carrier with 100 MHz over 31
    /// subcarriers, 64/16/16 elements and 2 RF chains at the MS.
    fn default() -> Self {
        let carrier_frequency = 60e9;
        Self {
            bs_position: Point::new(0.0, 0.0),
            ris_position: Point::new(40.0, 60.0),
            ms_position: Point::new(60.0, 45.0),
            ms_orientation: PI / 10.0,
            carrier_frequency,
            bandwidth: 100e6,
            num_subcarriers: 31,
            element_spacing: half_wavelength(carrier_frequency),
            path_loss_exponent: 2.08,
            n_bs: 64,
            n_ms: 16,
            n_ris: 16,
            n_rf: 2,
        }
    }
}

pub fn half_wavelength(carrier_frequency: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_frequency / 2.0
}

impl ScenarioGeometry {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// d/λ, the only array parameter steering vectors depend on.
    pub fn spacing_ratio(&self) -> f64 {
        self.element_spacing / self.wavelength()
    }

    /// Symmetric subcarrier indices -(N-1)/2 ..= (N-1)/2.
    pub fn subcarrier_indices(&self) -> impl Iterator<Item = i64> + Clone {
        let half = (self.num_subcarriers as i64 - 1) / 2;
        -half..=half
    }

    pub fn subcarrier_range(&self) -> (i64, i64) {
        let half = (self.num_subcarriers as i64 - 1) / 2;
        (-half, half)
    }

    /// Checks every structural invariant, including the far-field condition.
    pub fn validate(&self) -> Result<()> {
        if self.num_subcarriers == 0 || self.num_subcarriers.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "number of subcarriers must be odd, got {}",
                self.num_subcarriers
            )));
        }
        if !(self.carrier_frequency > 0.0 && self.bandwidth > 0.0) {
            return Err(Error::invalid("carrier frequency and bandwidth must be positive"));
        }
        if self.bandwidth / self.carrier_frequency >= 0.05 {
            return Err(Error::invalid(format!(
                "bandwidth {} Hz is not small against carrier {} Hz",
                self.bandwidth, self.carrier_frequency
            )));
        }
        if self.n_bs == 0 || self.n_ms == 0 || self.n_ris == 0 || self.n_rf == 0 {
            return Err(Error::invalid("array sizes and RF chain count must be at least 1"));
        }
        if self.n_rf > self.n_ms {
            return Err(Error::invalid(format!(
                "{} RF chains exceed {} MS antennas",
                self.n_rf, self.n_ms
            )));
        }
        if !(self.element_spacing > 0.0) {
            return Err(Error::invalid("element spacing must be positive"));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::invalid("path loss exponent must be positive"));
        }
        check_distinct(&self.bs_position, &self.ris_position, "BS", "RIS")?;
        check_distinct(&self.ris_position, &self.ms_position, "RIS", "MS")?;
        let limit = far_field_limit(self);
        if self.n_ris > limit {
            return Err(Error::InvalidGeometry(format!(
                "{} RIS elements violate the far-field limit of {limit}",
                self.n_ris
            )));
        }
        Ok(())
    }

    /// Reads a scenario file (`key = value`, `#` comments). Keys absent from
    /// the file keep the reference-deployment values; unknown keys fail.
    pub fn load(path: &Path) -> Result<Self> {
        let kv = KvFile::read(path)?;
        kv.reject_unknown(SCENARIO_KEYS)?;
        let mut geom = Self::default();
        geom.apply_kv(&kv)?;
        geom.validate().map_err(|e| kv.err(0, e.to_string()))?;
        Ok(geom)
    }

    pub(crate) fn apply_kv(&mut self, kv: &KvFile) -> Result<()> {
        kv.set("bs_x", &mut self.bs_position.x)?;
        kv.set("bs_y", &mut self.bs_position.y)?;
        kv.set("ris_x", &mut self.ris_position.x)?;
        kv.set("ris_y", &mut self.ris_position.y)?;
        kv.set("ms_x", &mut self.ms_position.x)?;
        kv.set("ms_y", &mut self.ms_position.y)?;
        kv.set("alpha_rad", &mut self.ms_orientation)?;
        kv.set("fc_hz", &mut self.carrier_frequency)?;
        kv.set("bw_hz", &mut self.bandwidth)?;
        kv.set("n_subcarriers", &mut self.num_subcarriers)?;
        kv.set("n_bs", &mut self.n_bs)?;
        kv.set("n_ms", &mut self.n_ms)?;
        kv.set("n_ris", &mut self.n_ris)?;
        kv.set("n_rf", &mut self.n_rf)?;
        kv.set("mu", &mut self.path_loss_exponent)?;
        // spacing follows the carrier: half a wavelength
        self.element_spacing = half_wavelength(self.carrier_frequency);
        Ok(())
    }

    /// Renders the scenario in the file format [`ScenarioGeometry::load`] reads.
    pub fn to_kv_string(&self) -> String {
        format!(
            "bs_x = {}\nbs_y = {}\nris_x = {}\nris_y = {}\nms_x = {}\nms_y = {}\n\
             alpha_rad = {}\nfc_hz = {}\nbw_hz = {}\nn_subcarriers = {}\n\
             n_bs = {}\nn_ms = {}\nn_ris = {}\nn_rf = {}\nmu = {}\n",
            self.bs_position.x,
            self.bs_position.y,
            self.ris_position.x,
            self.ris_position.y,
            self.ms_position.x,
            self.ms_position.y,
            self.ms_orientation,
            self.carrier_frequency,
            self.bandwidth,
            self.num_subcarriers,
            self.n_bs,
            self.n_ms,
            self.n_ris,
            self.n_rf,
            self.path_loss_exponent,
        )
    }
}

pub(crate) const SCENARIO_KEYS: &[&str] = &[
    "bs_x",
    "bs_y",
    "ris_x",
    "ris_y",
    "ms_x",
    "ms_y",
    "alpha_rad",
    "fc_hz",
    "bw_hz",
    "n_subcarriers",
    "n_bs",
    "n_ms",
    "n_ris",
    "n_rf",
    "mu",
];

fn check_distinct(a: &Point, b: &Point, na: &str, nb: &str) -> Result<()> {
    if a.distance(b) == 0.0 {
        Err(Error::InvalidGeometry(format!("{na} and {nb} positions coincide")))
    } else {
        Ok(())
    }
}

/// Angles, delays and amplitude gains of the two hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Departure angle at the BS toward the RIS.
    pub theta_br: f64,
    /// Arrival angle at the RIS from the BS; always `-π + theta_br`.
    pub phi_br: f64,
    /// Departure angle at the RIS toward the MS.
    pub theta_rm: f64,
    /// Arrival angle at the (rotated) MS array.
    pub phi_rm: f64,
    pub tau_br: f64,
    pub tau_rm: f64,
    pub rho_br: f64,
    pub rho_rm: f64,
}

/// Array response of a uniform linear array: entry `i` (0-based) is
/// `exp(j 2π i (d/λ) sin(angle))`.
pub fn steering_vector(num_elements: usize, angle: f64, spacing_ratio: f64) -> Result<CVector> {
    if num_elements == 0 {
        return Err(Error::invalid("steering vector needs at least one element"));
    }
    Ok(steering_vector_unchecked(num_elements, angle, spacing_ratio))
}

pub(crate) fn steering_vector_unchecked(num_elements: usize, angle: f64, spacing_ratio: f64) -> CVector {
    let step = 2.0 * PI * spacing_ratio * angle.sin();
    CVector::from_fn(num_elements, |i, _| {
        if i == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            cis(step * i as f64)
        }
    })
}

/// Path parameters of the deployment, computed from the known positions.
pub fn derive_channel_params(geom: &ScenarioGeometry) -> Result<ChannelParams> {
    let b = geom.bs_position;
    let r = geom.ris_position;
    let m = geom.ms_position;
    check_distinct(&b, &r, "BS", "RIS")?;
    check_distinct(&r, &m, "RIS", "MS")?;
    let d_br = b.distance(&r);
    let d_rm = r.distance(&m);
    let theta_br = ((r.x - b.x) / d_br).clamp(-1.0, 1.0).acos();
    let theta_rm = (m.y - r.y).atan2(m.x - r.x);
    let half_mu = geom.path_loss_exponent / 2.0;
    Ok(ChannelParams {
        theta_br,
        phi_br: -PI + theta_br,
        theta_rm,
        phi_rm: wrap_angle(PI + theta_rm - geom.ms_orientation),
        tau_br: d_br / SPEED_OF_LIGHT,
        tau_rm: d_rm / SPEED_OF_LIGHT,
        rho_br: d_br.powf(-half_mu),
        rho_rm: d_rm.powf(-half_mu),
    })
}

/// Right-hand side of the far-field element-count condition
/// `N_R < sqrt(λ)/(sqrt(2) d) * min(sqrt|b - r|, sqrt|r - m|)`.
pub fn far_field_bound(geom: &ScenarioGeometry) -> f64 {
    let shortest = geom
        .bs_position
        .distance(&geom.ris_position)
        .min(geom.ris_position.distance(&geom.ms_position));
    geom.wavelength().sqrt() / (2.0_f64.sqrt() * geom.element_spacing) * shortest.sqrt()
}

/// Largest RIS element count that satisfies the far-field condition.
pub fn far_field_limit(geom: &ScenarioGeometry) -> usize {
    let bound = far_field_bound(geom);
    if !(bound > 0.0) || !bound.is_finite() {
        return 0;
    }
    // strict inequality: an integral bound is itself excluded
    (bound.ceil() - 1.0).max(0.0) as usize
}
