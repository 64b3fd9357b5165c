use crate::geometry::{ChannelParams, ScenarioGeometry};

/// Thermal noise floor, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Per-subcarrier noise power `-174 dBm + 10 log10(B/N)`, in dBm.
pub fn noise_power_dbm(bandwidth: f64, num_subcarriers: usize) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * (bandwidth / num_subcarriers as f64).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Noise power per subcarrier of the scenario, W.
pub fn noise_power_watts(geom: &ScenarioGeometry) -> f64 {
    dbm_to_watts(noise_power_dbm(geom.bandwidth, geom.num_subcarriers))
}

/// Transmit power giving `SNR = P ρ_BR² ρ_RM² / σ²`.
pub fn tx_power_from_snr(snr_db: f64, geom: &ScenarioGeometry, params: &ChannelParams) -> f64 {
    let path_gain = (params.rho_br * params.rho_rm).powi(2);
    10f64.powf(snr_db / 10.0) * noise_power_watts(geom) / path_gain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::derive_channel_params;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noise_floor_of_reference_band() {
        let dbm = noise_power_dbm(100e6, 31);
        assert_abs_diff_eq!(10.0 * (100e6f64 / 31.0).log10(), 65.09, epsilon = 0.005);
        assert_abs_diff_eq!(dbm, -108.9136, epsilon = 1e-4);
    }

    #[test]
    fn zero_db_power_is_noise_over_path_gain() {
        let g = ScenarioGeometry::default();
        let p = derive_channel_params(&g).unwrap();
        let power = tx_power_from_snr(0.0, &g, &p);
        let sigma = noise_power_watts(&g);
        assert_abs_diff_eq!(power, sigma / (p.rho_br * p.rho_rm).powi(2), epsilon = 1e-12 * power);
        // ρ_BR = √5200^-1.04, ρ_RM = 25^-1.04
        let rho_br = 5200f64.sqrt().powf(-1.04);
        let rho_rm = 25f64.powf(-1.04);
        let frozen = dbm_to_watts(-174.0 + 10.0 * (100e6f64 / 31.0).log10()) / (rho_br * rho_rm).powi(2);
        assert_abs_diff_eq!(power, frozen, epsilon = 1e-12 * frozen);
        assert_abs_diff_eq!(power, 7.603210276e-8, epsilon = 1e-16);
    }
}
