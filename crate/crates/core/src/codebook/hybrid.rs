//! Hybrid analog/digital factorization by alternating minimization with
//! phase extraction.
//!
//! Given targets `T` (`N_M x N_RF`) find an analog factor `F` with entries of
//! modulus `1/sqrt(N_M)` and a digital factor `B` (`N_RF x N_RF`) so that
//! `F B ≈ T`. The digital step is the least-squares solve for `B` given `F`.
//! The analog step extracts the phases of `T B^H`; when that does not
//! decrease the residual (it is only exact for `B B^H ∝ I`) a
//! majorize-minimize step `F ← P(F - (F B - T) B^H / λ_max(B B^H))` is taken
//! instead, which never increases it. Each effective column is finally scaled
//! to unit norm through `B`, giving `|F B|_F^2 = N_RF`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cis, pseudo_inverse, residual_sq, singular_values, CMatrix};

/// Analog factors conditioned worse than this count as singular.
const MAX_ANALOG_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltMinParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for AltMinParams {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridFactors {
    pub analog: CMatrix,
    pub digital: CMatrix,
    /// Residual `|T - F B|_F^2` after the initial digital solve and after
    /// every half-step of the alternation (before the final rescale).
    pub residual_history: Vec<f64>,
    /// Residual of the rescaled product actually returned.
    pub final_residual: f64,
    /// Whether the solver had to restart from the fallback initialization.
    pub restarted: bool,
}

impl HybridFactors {
    pub fn effective(&self) -> CMatrix {
        &self.analog * &self.digital
    }
}

fn phase_extract(m: &CMatrix, modulus: f64) -> CMatrix {
    m.map(|z| {
        let n = z.norm();
        if n == 0.0 {
            Complex64::new(modulus, 0.0)
        } else {
            z * (modulus / n)
        }
    })
}

fn digital_step(analog: &CMatrix, targets: &CMatrix) -> Option<CMatrix> {
    // the pseudo-inverse drops null directions, so rank loss is checked here
    let s = singular_values(analog);
    let (largest, smallest) = (s[0], s[s.len() - 1]);
    if !(smallest > 0.0) || largest / smallest > MAX_ANALOG_CONDITION {
        return None;
    }
    pseudo_inverse(analog).ok().map(|(pinv, _)| pinv * targets)
}

fn largest_eigenvalue_gram(digital: &CMatrix) -> f64 {
    // spectral norm squared of B
    let s = digital.clone().svd(false, false).singular_values.max();
    s * s
}

fn alternate(
    targets: &CMatrix,
    init: CMatrix,
    modulus: f64,
    params: &AltMinParams,
) -> Option<(CMatrix, CMatrix, Vec<f64>)> {
    let mut analog = init;
    let mut digital = digital_step(&analog, targets)?;
    let mut residual = residual_sq(targets, &(&analog * &digital));
    let mut history = vec![residual];
    for _ in 0..params.max_iters {
        let start = residual;
        let previous = analog.clone();

        // analog half-step
        let extracted = phase_extract(&(targets * digital.adjoint()), modulus);
        let r_extracted = residual_sq(targets, &(&extracted * &digital));
        if r_extracted <= residual {
            analog = extracted;
            residual = r_extracted;
        } else {
            let lambda = largest_eigenvalue_gram(&digital);
            if lambda > 0.0 {
                let grad = (&analog * &digital - targets) * digital.adjoint();
                let mm = phase_extract(&(&analog - grad / Complex64::new(lambda, 0.0)), modulus);
                let r_mm = residual_sq(targets, &(&mm * &digital));
                if r_mm <= residual {
                    analog = mm;
                    residual = r_mm;
                }
            }
        }
        history.push(residual);

        // digital half-step; an analog update that lost rank is undone
        let Some(next) = digital_step(&analog, targets) else {
            analog = previous;
            history.pop();
            break;
        };
        let r_next = residual_sq(targets, &(&analog * &next));
        if r_next <= residual {
            digital = next;
            residual = r_next;
        }
        history.push(residual);

        if start - residual < params.tol {
            break;
        }
    }
    Some((analog, digital, history))
}

/// Fallback start: DFT columns, always well conditioned.
fn dft_init(rows: usize, cols: usize, modulus: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| {
        cis(2.0 * std::f64::consts::PI * (i * j) as f64 / rows as f64) * modulus
    })
}

/// Factorizes `targets` (`N_M x n_rf`) into analog and digital parts.
pub fn hybrid_factorize(targets: &CMatrix, n_rf: usize, params: &AltMinParams) -> Result<HybridFactors> {
    let n_ms = targets.nrows();
    if n_rf == 0 || targets.ncols() != n_rf {
        return Err(Error::invalid(format!(
            "targets have {} columns, expected {n_rf}",
            targets.ncols()
        )));
    }
    if n_rf > n_ms {
        return Err(Error::invalid(format!("{n_rf} RF chains exceed {n_ms} antennas")));
    }
    let modulus = 1.0 / (n_ms as f64).sqrt();
    let primary = phase_extract(&targets.columns(0, n_rf).into_owned(), modulus);
    let (run, restarted) = match alternate(targets, primary, modulus, params) {
        Some(run) => (run, false),
        None => match alternate(targets, dft_init(n_ms, n_rf, modulus), modulus, params) {
            Some(run) => (run, true),
            None => return Err(Error::numerical("analog factor singular after restart", None)),
        },
    };
    let (analog, mut digital, residual_history) = run;

    let effective = &analog * &digital;
    for (j, col) in effective.column_iter().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::numerical(format!("effective column {j} vanished"), None));
        }
        let mut dcol = digital.column_mut(j);
        dcol /= Complex64::new(norm, 0.0);
    }
    let final_residual = residual_sq(targets, &(&analog * &digital));
    Ok(HybridFactors {
        analog,
        digital,
        residual_history,
        final_residual,
        restarted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::projection::project_entries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        let mut m = CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for mut c in m.column_iter_mut() {
            let n = c.norm();
            c /= Complex64::new(n, 0.0);
        }
        m
    }

    #[test]
    fn exactly_representable_target() {
        let n = 16;
        let t = CMatrix::from_fn(n, 2, |i, j| {
            cis(0.3 * (i * i) as f64 + j as f64 * 1.1 * i as f64) / (n as f64).sqrt()
        });
        let out = hybrid_factorize(&t, 2, &AltMinParams::default()).unwrap();
        assert!(out.final_residual < 1e-20, "{}", out.final_residual);
    }

    #[test]
    fn constraint_and_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = random_unit_columns(&mut rng, 16, 2);
            let out = hybrid_factorize(&t, 2, &AltMinParams::default()).unwrap();
            let frob = out.effective().norm_squared();
            assert!((frob - 2.0).abs() < 1e-10);
            for z in out.analog.iter() {
                assert!((z.norm() - 0.25).abs() < 1e-12);
            }
            for w in out.residual_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn never_worse_than_analog_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = random_unit_columns(&mut rng, 16, 2);
            let params = AltMinParams {
                max_iters: 50,
                tol: 1e-8,
            };
            let out = hybrid_factorize(&t, 2, &params).unwrap();
            let mut analog_only = 0.0;
            for c in t.column_iter() {
                let c = c.into_owned();
                analog_only += (&c - project_entries(&c, 0.25)).norm_squared();
            }
            assert!(
                out.final_residual <= analog_only + 1e-12,
                "{} > {}",
                out.final_residual,
                analog_only
            );
        }
    }

    #[test]
    fn collinear_targets_restart() {
        let col = CMatrix::from_fn(8, 1, |i, _| cis(0.4 * i as f64) / 8f64.sqrt());
        let t = CMatrix::from_fn(8, 2, |i, _| col[(i, 0)]);
        let out = hybrid_factorize(&t, 2, &AltMinParams::default()).unwrap();
        assert!(out.restarted);
        assert!((out.effective().norm_squared() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn shape_errors() {
        let t = CMatrix::zeros(4, 3);
        assert!(hybrid_factorize(&t, 2, &AltMinParams::default()).is_err());
        let t = CMatrix::zeros(2, 3);
        assert!(hybrid_factorize(&t, 3, &AltMinParams::default()).is_err());
    }
}
