//! Complex dense carriers and the handful of helpers the rest of the crate
//! shares: angle wrapping, pseudo-inverse with conditioning report, and
//! phase normalization.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Singular values below this fraction of the largest are treated as zero.
const PINV_RELATIVE_EPS: f64 = 1e-12;

/// Wraps an angle into (-π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.sin().atan2(angle.cos());
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// `e^{j phase}`.
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Moore-Penrose pseudo-inverse through the SVD, together with the
/// condition number of `m` (ratio of extreme nonzero singular values).
pub fn pseudo_inverse(m: &CMatrix) -> Result<(CMatrix, f64)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::invalid("pseudo-inverse of an empty matrix"));
    }
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    if !s_max.is_finite() {
        return Err(Error::numerical("non-finite singular value", None));
    }
    if s_max == 0.0 {
        return Err(Error::numerical("zero matrix has no useful pseudo-inverse", None));
    }
    let eps = s_max * PINV_RELATIVE_EPS;
    let s_min = svd
        .singular_values
        .iter()
        .copied()
        .filter(|s| *s > eps)
        .fold(f64::INFINITY, f64::min);
    let cond = s_max / s_min;
    let pinv = svd
        .pseudo_inverse(eps)
        .map_err(|e| Error::numerical(e.to_string(), Some(cond)))?;
    Ok((pinv, cond))
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Index of the first entry whose magnitude is within a relative 1e-9 of the
/// largest magnitude. Constant-modulus vectors therefore resolve to index 0
/// regardless of roundoff.
pub fn dominant_entry(v: &[Complex64]) -> Option<usize> {
    let max = v.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return None;
    }
    v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9))
}

/// Unit phasor that, multiplied into `v`, makes its dominant entry real and
/// positive. Returns 1 for the zero vector.
pub fn phase_alignment(v: &[Complex64]) -> Complex64 {
    match dominant_entry(v) {
        Some(i) => {
            let z = v[i];
            z.conj() / z.norm()
        }
        None => Complex64::new(1.0, 0.0),
    }
}

/// Squared Frobenius norm of `a - b`.
pub fn residual_sq(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm_squared()
}
