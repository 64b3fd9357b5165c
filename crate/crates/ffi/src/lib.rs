//! C ABI over the `risloc` simulator.
//!
//! Every fallible function returns a [`RislocStatus`]; on failure the message
//! is kept per thread and can be copied out with
//! [`risloc_last_error_message`]. Handles are opaque and must be released
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use risloc::geometry::far_field_limit;
use risloc::sim::{emit_csv, noise_power_dbm};
use risloc::{Error, Scheme, SimulationConfig, Simulator};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RislocStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigError = 2,
    NumericalFailure = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RislocScheme {
    Proposed = 0,
    Exhaustive = 1,
    RandomPhase = 2,
    Optimal = 3,
}

impl From<RislocScheme> for Scheme {
    fn from(s: RislocScheme) -> Self {
        match s {
            RislocScheme::Proposed => Scheme::Proposed,
            RislocScheme::Exhaustive => Scheme::Exhaustive,
            RislocScheme::RandomPhase => Scheme::RandomPhase,
            RislocScheme::Optimal => Scheme::Optimal,
        }
    }
}

/// Outcome of one trial.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RislocTrialResult {
    /// Squared position error, m^2.
    pub pe: f64,
    /// Squared orientation error, rad^2.
    pub oe: f64,
    /// Achievable rate, bits per OFDM symbol.
    pub rate: f64,
    pub slots: usize,
    pub ms_x_hat: f64,
    pub ms_y_hat: f64,
    pub alpha_hat: f64,
}

/// Opaque simulation configuration.
pub struct RislocConfig {
    inner: SimulationConfig,
}

/// Opaque simulator: built codebooks, channel and estimator grids.
pub struct RislocSimulator {
    inner: Simulator,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> RislocStatus {
    if err.is_numerical() {
        return RislocStatus::NumericalFailure;
    }
    match err {
        Error::Config { .. } | Error::CodebookFormat { .. } => RislocStatus::ConfigError,
        Error::Io(_) => RislocStatus::Io,
        _ => RislocStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RislocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RislocStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            RislocStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Err(_) => {
            set_last_error("panic inside risloc".to_string());
            RislocStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument("path is not UTF-8".into())))?;
    Ok(PathBuf::from(s))
}

/// Copies the last error of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn risloc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Reference configuration.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_default(out: *mut *mut RislocConfig) -> RislocStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = Box::into_raw(Box::new(RislocConfig {
            inner: SimulationConfig::default(),
        }));
        Ok(())
    })
}

/// Loads a `key = value` configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_load(path: *const c_char, out: *mut *mut RislocConfig) -> RislocStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let path = path_arg(path)?;
        let inner = SimulationConfig::load(&path)?;
        *out = Box::into_raw(Box::new(RislocConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_free(config: *mut RislocConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_set_trials(config: *mut RislocConfig, trials: usize) -> RislocStatus {
    guard(|| {
        let cfg = deref_mut(config, "config")?;
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()).into());
        }
        cfg.inner.trials_per_point = trials;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_set_seed(config: *mut RislocConfig, seed: u64) -> RislocStatus {
    guard(|| {
        deref_mut(config, "config")?.inner.base_seed = seed;
        Ok(())
    })
}

/// Replaces the SNR list (dB); values are sorted and deduplicated.
///
/// # Safety
/// `config` must be a live handle and `snr_db` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risloc_config_set_snr_db(
    config: *mut RislocConfig,
    snr_db: *const f64,
    len: usize,
) -> RislocStatus {
    guard(|| {
        let cfg = deref_mut(config, "config")?;
        if snr_db.is_null() {
            return Err(Failure::Null("snr_db"));
        }
        let list = std::slice::from_raw_parts(snr_db, len).to_vec();
        let mut next = cfg.inner.clone();
        next.snr_list_db = list;
        next.normalize();
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// Largest RIS size for which the scene stays in the far field.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risloc_far_field_limit(config: *const RislocConfig, out: *mut usize) -> RislocStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        *deref_mut(out, "out")? = far_field_limit(&cfg.inner.geometry);
        Ok(())
    })
}

/// Per-subcarrier thermal noise power in dBm.
#[no_mangle]
pub extern "C" fn risloc_noise_power_dbm(bandwidth_hz: f64, num_subcarriers: usize) -> f64 {
    noise_power_dbm(bandwidth_hz, num_subcarriers)
}

/// Builds codebooks and grids for a configuration.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risloc_simulator_new(
    config: *const RislocConfig,
    out: *mut *mut RislocSimulator,
) -> RislocStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let out = deref_mut(out, "out")?;
        let inner = Simulator::new(cfg.inner.clone())?;
        *out = Box::into_raw(Box::new(RislocSimulator { inner }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risloc_simulator_free(sim: *mut RislocSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Training slots a scheme consumes.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risloc_slot_count(
    sim: *const RislocSimulator,
    scheme: RislocScheme,
    out: *mut usize,
) -> RislocStatus {
    guard(|| {
        let sim = deref(sim, "sim")?;
        *deref_mut(out, "out")? = sim.inner.slots_for(scheme.into())?;
        Ok(())
    })
}

/// Runs one seeded trial at the given SNR.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn risloc_run_trial(
    sim: *const RislocSimulator,
    scheme: RislocScheme,
    snr_db: f64,
    seed: u64,
    out: *mut RislocTrialResult,
) -> RislocStatus {
    guard(|| {
        let sim = deref(sim, "sim")?;
        let out = deref_mut(out, "out")?;
        if !snr_db.is_finite() {
            return Err(Error::InvalidArgument("SNR must be finite".into()).into());
        }
        let (record, detail) = sim.inner.run_trial(scheme.into(), snr_db, 0, seed)?;
        *out = RislocTrialResult {
            pe: record.pe,
            oe: record.oe,
            rate: record.rate,
            slots: record.slots,
            ms_x_hat: detail.estimate.m_hat.x,
            ms_y_hat: detail.estimate.m_hat.y,
            alpha_hat: detail.estimate.alpha_hat,
        };
        Ok(())
    })
}

/// Runs the configured sweep and writes the results CSV to `path`.
///
/// # Safety
/// `sim` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn risloc_run_sweep_csv(sim: *const RislocSimulator, path: *const c_char) -> RislocStatus {
    guard(|| {
        let sim = deref(sim, "sim")?;
        let path = path_arg(path)?;
        let records = sim.inner.run_sweep(None)?;
        emit_csv(&records, &path)?;
        Ok(())
    })
}
