use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cis, pseudo_inverse, CMatrix};

/// Condition numbers above this make the least-squares codewords meaningless.
const MAX_CONDITION: f64 = 1e10;

/// Steering vectors sampled on a uniform grid of `sin(angle)` values.
#[derive(Debug, Clone)]
pub struct AngleDictionary {
    /// `num_elements x M`, entry (n, m) = `exp(j 2π (d/λ) n u_m)` (0-based n).
    pub matrix: CMatrix,
    /// `u_m = -1 + (2m - 1)/M` for m = 1..M.
    pub grid: Vec<f64>,
}

impl AngleDictionary {
    pub fn num_elements(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m_levels(&self) -> usize {
        self.grid.len()
    }
}

pub fn build_angle_dictionary(num_elements: usize, m_levels: usize, spacing_ratio: f64) -> Result<AngleDictionary> {
    if num_elements == 0 {
        return Err(Error::invalid("dictionary needs at least one element"));
    }
    if m_levels < num_elements {
        return Err(Error::invalid(format!(
            "{m_levels} quantization levels are fewer than {num_elements} elements"
        )));
    }
    let m = m_levels as f64;
    let grid: Vec<f64> = (1..=m_levels).map(|k| -1.0 + (2 * k - 1) as f64 / m).collect();
    let two_pi_ratio = 2.0 * std::f64::consts::PI * spacing_ratio;
    let matrix = CMatrix::from_fn(num_elements, m_levels, |n, col| {
        cis(two_pi_ratio * n as f64 * grid[col])
    });
    Ok(AngleDictionary { matrix, grid })
}

/// Binary target pattern of one codebook level: column k marks the grid
/// points codeword k should illuminate.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMask {
    /// `M x K^s` with entries 0 or 1.
    pub matrix: DMatrix<f64>,
    pub level: usize,
}

impl TargetMask {
    pub fn num_codewords(&self) -> usize {
        self.matrix.ncols()
    }

    /// Rows (0-based) where column `k` is set.
    pub fn support(&self, k: usize) -> Vec<usize> {
        (0..self.matrix.nrows())
            .filter(|&r| self.matrix[(r, k)] != 0.0)
            .collect()
    }
}

/// Level-`level` mask: column 1 holds `M/K^s` leading ones, column k is
/// column 1 shifted down cyclically by `(k-1) M/K^s`.
pub fn build_target_mask(level: usize, branching: usize, m_levels: usize) -> Result<TargetMask> {
    if level == 0 || branching == 0 {
        return Err(Error::invalid("level and branching must be at least 1"));
    }
    let count = u32::try_from(level)
        .ok()
        .and_then(|s| branching.checked_pow(s))
        .ok_or_else(|| Error::invalid("K^s overflows"))?;
    if count > m_levels || !m_levels.is_multiple_of(count) {
        return Err(Error::invalid(format!("K^s = {count} does not divide M = {m_levels}")));
    }
    let width = m_levels / count;
    let matrix = DMatrix::from_fn(m_levels, count, |r, k| {
        let shifted = (r + m_levels - k * width) % m_levels;
        if shifted < width {
            1.0
        } else {
            0.0
        }
    });
    Ok(TargetMask { matrix, level })
}

/// Minimum-norm least-squares solution of `A^H C = G`, i.e. `(A^H)^† G`.
/// Columns are not normalized.
pub fn ls_codewords(dict: &AngleDictionary, mask: &TargetMask) -> Result<CMatrix> {
    if mask.matrix.nrows() != dict.m_levels() {
        return Err(Error::invalid(format!(
            "mask has {} rows, dictionary has {} grid points",
            mask.matrix.nrows(),
            dict.m_levels()
        )));
    }
    let (pinv, cond) = pseudo_inverse(&dict.matrix.adjoint())?;
    if cond > MAX_CONDITION {
        return Err(Error::numerical("dictionary is ill-conditioned", Some(cond)));
    }
    let g = mask.matrix.map(|v| Complex64::new(v, 0.0));
    Ok(pinv * g)
}

/// Scales each column to unit Euclidean norm; zero columns are left alone.
pub fn normalize_columns(c: &mut CMatrix) {
    for mut col in c.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn grid_values() {
        let d = build_angle_dictionary(16, 128, 0.5).unwrap();
        assert_eq!(d.grid[0], -0.9921875);
        assert_abs_diff_eq!(d.grid[63] + d.grid[64], 0.0, epsilon = 1e-15);
        assert!(d.grid.windows(2).all(|w| w[0] < w[1]));
        assert!(d.matrix.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dictionary_entry() {
        let d = build_angle_dictionary(4, 8, 0.5).unwrap();
        assert_eq!(d.grid[4], 0.125);
        let z = d.matrix[(2, 4)];
        assert_abs_diff_eq!(z.re, (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, (PI / 4.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn too_few_levels_rejected() {
        assert!(matches!(
            build_angle_dictionary(16, 8, 0.5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn first_level_mask() {
        let g = build_target_mask(1, 2, 128).unwrap();
        assert_eq!(g.num_codewords(), 2);
        assert_eq!(g.support(0), (0..64).collect::<Vec<_>>());
        assert_eq!(g.support(1), (64..128).collect::<Vec<_>>());
    }

    #[test]
    fn masks_partition_rows() {
        for s in 1..=6 {
            let g = build_target_mask(s, 2, 128).unwrap();
            let width = 128 >> s;
            let mut seen = vec![0u32; 128];
            for k in 0..g.num_codewords() {
                let sup = g.support(k);
                assert_eq!(sup.len(), width);
                assert_eq!(sup[0], k * width);
                for r in sup {
                    seen[r] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "level {s}");
        }
    }

    #[test]
    fn mask_divisibility() {
        assert!(build_target_mask(3, 3, 128).is_err());
        assert!(build_target_mask(8, 2, 128).is_err());
    }

    #[test]
    fn square_dictionary_gives_exact_column() {
        // M = N: A is a scaled unitary DFT-like matrix, so the LS solution
        // for a one-hot target is proportional to the matching A column.
        let d = build_angle_dictionary(8, 8, 0.5).unwrap();
        let mut g = DMatrix::zeros(8, 1);
        g[(3, 0)] = 1.0;
        let mask = TargetMask { matrix: g, level: 3 };
        let c = ls_codewords(&d, &mask).unwrap();
        let col = d.matrix.column(3);
        let ratio = c[(0, 0)] / col[0];
        for i in 0..8 {
            let z = c[(i, 0)] - col[i] * ratio;
            assert!(z.norm() < 1e-12);
        }
        assert_abs_diff_eq!(ratio.re, 1.0 / 8.0, epsilon = 1e-12);
    }
}
