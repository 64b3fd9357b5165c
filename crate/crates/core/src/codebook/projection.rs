//! Gradient projection onto the constant-modulus set.

use num_complex::Complex64;

use crate::linalg::CVector;

const MAX_BACKTRACKS: usize = 30;
const ROUNDOFF_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientProjection {
    pub step: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for GradientProjection {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iters: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub solution: CVector,
    /// Objective `|x - target|^2` at the start and after every accepted step.
    pub objective_history: Vec<f64>,
}

/// Entry-wise projection: `modulus * z/|z|`, phase 0 for exact zeros.
pub fn project_entries(v: &CVector, modulus: f64) -> CVector {
    v.map(|z| {
        let n = z.norm();
        if n == 0.0 {
            Complex64::new(modulus, 0.0)
        } else {
            z * (modulus / n)
        }
    })
}

impl GradientProjection {
    /// Minimizes `|x - target|^2` subject to `|x_i| = modulus`, starting from
    /// `init`. Each iteration takes a gradient step then projects; the step
    /// is halved until the objective strictly decreases.
    pub fn solve_from(&self, target: &CVector, modulus: f64, init: &CVector) -> ProjectionOutcome {
        let objective = |x: &CVector| (x - target).norm_squared();
        let mut x = project_entries(init, modulus);
        let mut f = objective(&x);
        let mut history = vec![f];
        for _ in 0..self.max_iters {
            let grad = (&x - target) * Complex64::new(2.0, 0.0);
            let mut step = self.step;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let candidate = project_entries(&(&x - &grad * Complex64::new(step, 0.0)), modulus);
                let fc = objective(&candidate);
                if fc < f {
                    accepted = Some((candidate, fc));
                    break;
                }
                step *= 0.5;
            }
            // no decreasing step left: stationary up to roundoff
            let Some((candidate, fc)) = accepted else {
                break;
            };
            let decrease = f - fc;
            x = candidate;
            f = fc;
            history.push(f);
            if decrease < self.tol {
                break;
            }
        }
        ProjectionOutcome {
            solution: x,
            objective_history: history,
        }
    }

    /// Any phase is optimal on a zero target entry, so entries that are zero
    /// up to roundoff are flushed first and get phase 0.
    pub fn solve(&self, target: &CVector, modulus: f64) -> ProjectionOutcome {
        let floor = ROUNDOFF_ZERO * target.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let init = target.map(|z| if z.norm() <= floor { Complex64::new(0.0, 0.0) } else { z });
        self.solve_from(target, modulus, &init)
    }
}

/// Constant-modulus approximation of `target` with the given solver limits.
pub fn project_constant_modulus(target: &CVector, modulus: f64, max_iters: usize, tol: f64) -> CVector {
    GradientProjection {
        max_iters,
        tol,
        ..Default::default()
    }
    .solve(target, modulus)
    .solution
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cis;
    use proptest::prelude::*;

    fn closed_form(target: &CVector, modulus: f64) -> CVector {
        target.map(|z| {
            if z == Complex64::new(0.0, 0.0) {
                Complex64::new(modulus, 0.0)
            } else {
                Complex64::from_polar(modulus, z.arg())
            }
        })
    }

    #[test]
    fn constant_modulus_target_is_fixed_point() {
        let t = CVector::from_fn(16, |i, _| cis(0.37 * i as f64) * 0.25);
        let out = GradientProjection::default().solve(&t, 0.25);
        assert!((out.solution - &t).norm() < 1e-15);
        assert!(out.objective_history[0] < 1e-28);
    }

    #[test]
    fn zero_entry_gets_phase_zero() {
        let mut t = CVector::from_fn(4, |i, _| cis(i as f64) * 0.3);
        t[2] = Complex64::new(0.0, 0.0);
        let x = project_constant_modulus(&t, 0.5, 500, 1e-8);
        assert_eq!(x[2], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn descent_from_poor_start_is_monotone() {
        let t = CVector::from_fn(16, |i, _| {
            Complex64::new((i as f64 * 0.9).sin() + 0.2, (i as f64 * 1.7).cos())
        });
        let start = CVector::from_element(16, Complex64::new(0.25, 0.0));
        let out = GradientProjection::default().solve_from(&t, 0.25, &start);
        assert!(out.objective_history.len() > 2);
        for w in out.objective_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    proptest! {
        #[test]
        fn matches_per_entry_closed_form(parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
            let t = CVector::from_iterator(parts.len(), parts.iter().map(|&(a, b)| Complex64::new(a, b)));
            prop_assume!(t.norm() > 1e-6);
            let modulus = 1.0 / (parts.len() as f64).sqrt();
            let out = GradientProjection::default().solve(&t, modulus);
            let oracle = closed_form(&t, modulus);
            prop_assert!((&out.solution - &oracle).norm() < 1e-10);
            for w in out.objective_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}
