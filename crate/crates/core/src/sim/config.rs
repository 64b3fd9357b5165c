use std::path::{Path, PathBuf};

use crate::codebook::CodebookParams;
use crate::error::{Error, Result};
use crate::estimation::GridConfig;
use crate::geometry::{ScenarioGeometry, SCENARIO_KEYS};
use crate::kv::KvFile;
use crate::training::Scheme;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub geometry: ScenarioGeometry,
    pub codebook: CodebookParams,
    pub grids: GridConfig,
    /// Ascending, no duplicates.
    pub snr_list_db: Vec<f64>,
    pub trials_per_point: usize,
    pub base_seed: u64,
    /// In output order (proposed, exhaustive, random_phase, optimal).
    pub schemes: Vec<Scheme>,
    pub output_path: PathBuf,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            geometry: ScenarioGeometry::default(),
            codebook: CodebookParams::default(),
            grids: GridConfig::default(),
            snr_list_db: (-4..=4).map(|i| i as f64 * 5.0).collect(),
            trials_per_point: 500,
            base_seed: 2020,
            schemes: Scheme::ALL.to_vec(),
            output_path: PathBuf::from("results.csv"),
        }
    }
}

const SIM_KEYS: &[&str] = &[
    "levels",
    "branching",
    "m_levels",
    "gp_step",
    "gp_max_iters",
    "gp_tol",
    "altmin_max_iters",
    "altmin_tol",
    "angle_points",
    "phi_center_rad",
    "tau_step_ns",
    "tau_span_ns",
    "snr_db",
    "trials",
    "seed",
    "schemes",
    "output",
];

impl SimulationConfig {
    /// Reads a config file; absent keys keep their defaults, unknown keys
    /// and invariant violations are errors carrying the file path and line.
    pub fn load(path: &Path) -> Result<Self> {
        let kv = KvFile::read(path)?;
        let allowed: Vec<&str> = SCENARIO_KEYS.iter().chain(SIM_KEYS).copied().collect();
        kv.reject_unknown(&allowed)?;

        let mut cfg = Self::default();
        cfg.geometry.apply_kv(&kv)?;
        kv.set("levels", &mut cfg.codebook.levels)?;
        kv.set("branching", &mut cfg.codebook.branching)?;
        kv.set("m_levels", &mut cfg.codebook.m_levels)?;
        kv.set("gp_step", &mut cfg.codebook.projection.step)?;
        kv.set("gp_max_iters", &mut cfg.codebook.projection.max_iters)?;
        kv.set("gp_tol", &mut cfg.codebook.projection.tol)?;
        kv.set("altmin_max_iters", &mut cfg.codebook.altmin.max_iters)?;
        kv.set("altmin_tol", &mut cfg.codebook.altmin.tol)?;
        kv.set("angle_points", &mut cfg.grids.angle_points)?;
        kv.set("phi_center_rad", &mut cfg.grids.phi_center)?;
        if let Some(ns) = kv.get::<f64>("tau_step_ns")? {
            cfg.grids.tau_step = ns / 1e9;
        }
        if let Some(ns) = kv.get::<f64>("tau_span_ns")? {
            cfg.grids.tau_span = ns / 1e9;
        }
        if let Some(list) = kv.get_list::<f64>("snr_db")? {
            cfg.snr_list_db = list;
        }
        kv.set("trials", &mut cfg.trials_per_point)?;
        kv.set("seed", &mut cfg.base_seed)?;
        if let Some(list) = kv.get_list::<String>("schemes")? {
            cfg.schemes = list
                .iter()
                .map(|s| s.parse::<Scheme>())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| kv.err(kv.line_of("schemes"), e.to_string()))?;
        }
        if let Some(out) = kv.raw("output") {
            cfg.output_path = PathBuf::from(out);
        }

        cfg.normalize();
        cfg.validate().map_err(|e| match e {
            Error::InvalidArgument(msg) | Error::InvalidGeometry(msg) => kv.err(0, msg),
            other => other,
        })?;
        Ok(cfg)
    }

    /// Sorts SNRs and schemes into their canonical order and drops duplicates.
    pub fn normalize(&mut self) {
        self.snr_list_db.sort_by(f64::total_cmp);
        self.snr_list_db.dedup();
        self.schemes.sort();
        self.schemes.dedup();
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.codebook.validate()?;
        if !self.codebook.branching.is_multiple_of(self.geometry.n_rf) {
            return Err(Error::invalid(format!(
                "{} RF chains must divide the branching factor {}",
                self.geometry.n_rf, self.codebook.branching
            )));
        }
        if self.codebook.m_levels < self.geometry.n_ris.max(self.geometry.n_ms) {
            return Err(Error::invalid("m_levels must be at least the largest codebook array"));
        }
        if self.trials_per_point == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.snr_list_db.is_empty() {
            return Err(Error::invalid("SNR list is empty"));
        }
        if self.snr_list_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("SNR values must be finite"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("no schemes selected"));
        }
        if self.grids.angle_points == 0 || !(self.grids.tau_step > 0.0) || !(self.grids.tau_span > 0.0) {
            return Err(Error::invalid("estimator grids must be non-empty"));
        }
        Ok(())
    }

    /// Renders the config in the format [`SimulationConfig::load`] reads.
    pub fn to_kv_string(&self) -> String {
        let snr: Vec<String> = self.snr_list_db.iter().map(|s| s.to_string()).collect();
        let schemes: Vec<&str> = self.schemes.iter().map(|s| s.name()).collect();
        format!(
            "{}levels = {}\nbranching = {}\nm_levels = {}\ngp_step = {}\ngp_max_iters = {}\ngp_tol = {:e}\n\
             altmin_max_iters = {}\naltmin_tol = {:e}\nangle_points = {}\nphi_center_rad = {}\n\
             tau_step_ns = {}\ntau_span_ns = {}\nsnr_db = {}\ntrials = {}\nseed = {}\nschemes = {}\noutput = {}\n",
            self.geometry.to_kv_string(),
            self.codebook.levels,
            self.codebook.branching,
            self.codebook.m_levels,
            self.codebook.projection.step,
            self.codebook.projection.max_iters,
            self.codebook.projection.tol,
            self.codebook.altmin.max_iters,
            self.codebook.altmin.tol,
            self.grids.angle_points,
            self.grids.phi_center,
            self.grids.tau_step * 1e9,
            self.grids.tau_span * 1e9,
            snr.join(", "),
            self.trials_per_point,
            self.base_seed,
            schemes.join(", "),
            self.output_path.display(),
        )
    }
}

/// Same as [`SimulationConfig::load`].
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    SimulationConfig::load(path)
}
