//! Hierarchical codebooks for the RIS (analog, constant modulus) and for the
//! MS (hybrid analog/digital).
//!
//! Every level is built the same way: least-squares codewords that
//! approximate a flat-top mask over the quantized `sin(angle)` grid, column
//! normalization, then the hardware step. The RIS projects each column onto
//! the constant-modulus set; the MS factorizes `N_RF` columns at a time into
//! an analog and a digital part. Finally each codeword is rotated so its
//! dominant entry is real and positive.

mod dictionary;
mod hybrid;
mod io;
mod projection;

use num_complex::Complex64;

pub use dictionary::{
    build_angle_dictionary, build_target_mask, ls_codewords, normalize_columns, AngleDictionary, TargetMask,
};
pub use hybrid::{hybrid_factorize, AltMinParams, HybridFactors};
pub use io::{read_ms_codebook, read_ris_codebook, write_ms_codebook, write_ris_codebook};
pub use projection::{project_constant_modulus, project_entries, GradientProjection, ProjectionOutcome};

use crate::error::{Error, Result};
use crate::geometry::{steering_vector_unchecked, ScenarioGeometry};
use crate::linalg::{phase_alignment, CMatrix, CVector};

/// Shape of the hierarchy and solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookParams {
    /// Number of levels S.
    pub levels: usize,
    /// Codewords at level 1 and children per codeword, K.
    pub branching: usize,
    /// Quantization levels M of the `sin(angle)` grid.
    pub m_levels: usize,
    pub projection: GradientProjection,
    pub altmin: AltMinParams,
}

impl Default for CodebookParams {
    fn default() -> Self {
        Self {
            levels: 6,
            branching: 2,
            m_levels: 128,
            projection: GradientProjection::default(),
            altmin: AltMinParams::default(),
        }
    }
}

impl CodebookParams {
    /// K^s.
    pub fn level_size(&self, level: usize) -> usize {
        self.branching.pow(level as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::invalid("codebook needs at least one level"));
        }
        if self.branching < 2 {
            return Err(Error::invalid("branching factor must be at least 2"));
        }
        let top = u32::try_from(self.levels)
            .ok()
            .and_then(|s| self.branching.checked_pow(s))
            .ok_or_else(|| Error::invalid("K^S overflows"))?;
        if top > self.m_levels || !self.m_levels.is_multiple_of(top) {
            return Err(Error::invalid(format!("K^S = {top} must divide M = {}", self.m_levels)));
        }
        Ok(())
    }
}

/// Per-level constant-modulus codewords for the RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct RisCodebook {
    pub branching: usize,
    pub num_elements: usize,
    /// `levels[s-1][k-1]` is codeword k of level s.
    pub levels: Vec<Vec<CVector>>,
}

/// One hybrid block: `N_RF` MS codewords sharing an analog factor.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBlock {
    /// `N_M x N_RF`, entries of modulus `1/sqrt(N_M)`.
    pub analog: CMatrix,
    /// `N_RF x N_RF`.
    pub digital: CMatrix,
    /// `analog * digital`.
    pub effective: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsCodebook {
    pub branching: usize,
    pub num_elements: usize,
    pub n_rf: usize,
    /// `blocks[s-1]` holds the K^s / N_RF blocks of level s.
    pub blocks: Vec<Vec<HybridBlock>>,
    /// Effective codewords of each level, block by block.
    pub levels: Vec<Vec<CVector>>,
}

/// Objective traces gathered while building, for descent checks.
#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub projection_histories: Vec<Vec<f64>>,
    pub altmin_histories: Vec<Vec<f64>>,
}

impl BuildReport {
    /// Largest increase between consecutive objective values in any trace.
    pub fn worst_increase(&self) -> f64 {
        self.projection_histories
            .iter()
            .chain(&self.altmin_histories)
            .flat_map(|h| h.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Normalized least-squares codewords of one level.
pub fn level_targets(dict: &AngleDictionary, level: usize, branching: usize) -> Result<CMatrix> {
    let mask = build_target_mask(level, branching, dict.m_levels())?;
    let mut c = ls_codewords(dict, &mask)?;
    normalize_columns(&mut c);
    Ok(c)
}

fn align(v: CVector) -> CVector {
    let a = phase_alignment(v.as_slice());
    v * a
}

pub fn build_ris_codebook(geom: &ScenarioGeometry, params: &CodebookParams) -> Result<(RisCodebook, BuildReport)> {
    params.validate()?;
    let n = geom.n_ris;
    let dict = build_angle_dictionary(n, params.m_levels, geom.spacing_ratio())?;
    let modulus = 1.0 / (n as f64).sqrt();
    let mut report = BuildReport::default();
    let mut levels = Vec::with_capacity(params.levels);
    for s in 1..=params.levels {
        let targets = level_targets(&dict, s, params.branching)?;
        let mut words = Vec::with_capacity(targets.ncols());
        for col in targets.column_iter() {
            let out = params.projection.solve(&col.into_owned(), modulus);
            report.projection_histories.push(out.objective_history);
            words.push(align(out.solution));
        }
        levels.push(words);
    }
    Ok((
        RisCodebook {
            branching: params.branching,
            num_elements: n,
            levels,
        },
        report,
    ))
}

pub fn build_ms_codebook(geom: &ScenarioGeometry, params: &CodebookParams) -> Result<(MsCodebook, BuildReport)> {
    params.validate()?;
    let n = geom.n_ms;
    let n_rf = geom.n_rf;
    if !params.branching.is_multiple_of(n_rf) {
        return Err(Error::invalid(format!(
            "{n_rf} RF chains do not divide the level size K^s = {}",
            params.branching
        )));
    }
    let dict = build_angle_dictionary(n, params.m_levels, geom.spacing_ratio())?;
    let mut report = BuildReport::default();
    let mut blocks = Vec::with_capacity(params.levels);
    let mut levels = Vec::with_capacity(params.levels);
    for s in 1..=params.levels {
        let targets = level_targets(&dict, s, params.branching)?;
        let mut level_blocks = Vec::with_capacity(targets.ncols() / n_rf);
        let mut words = Vec::with_capacity(targets.ncols());
        for start in (0..targets.ncols()).step_by(n_rf) {
            let chunk = targets.columns(start, n_rf).into_owned();
            let factors = hybrid_factorize(&chunk, n_rf, &params.altmin)?;
            report.altmin_histories.push(factors.residual_history.clone());
            let mut digital = factors.digital;
            let mut effective = &factors.analog * &digital;
            for j in 0..n_rf {
                let col: Vec<Complex64> = effective.column(j).iter().copied().collect();
                let a = phase_alignment(&col);
                let mut dcol = digital.column_mut(j);
                dcol *= a;
                let mut ecol = effective.column_mut(j);
                ecol *= a;
            }
            for col in effective.column_iter() {
                words.push(col.into_owned());
            }
            level_blocks.push(HybridBlock {
                analog: factors.analog,
                digital,
                effective,
            });
        }
        blocks.push(level_blocks);
        levels.push(words);
    }
    Ok((
        MsCodebook {
            branching: params.branching,
            num_elements: n,
            n_rf,
            blocks,
            levels,
        },
        report,
    ))
}

impl RisCodebook {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Codeword `index` (1-based) of `level` (1-based).
    pub fn codeword(&self, level: usize, index: usize) -> &CVector {
        &self.levels[level - 1][index - 1]
    }
}

impl MsCodebook {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn codeword(&self, level: usize, index: usize) -> &CVector {
        &self.levels[level - 1][index - 1]
    }
}

/// `|α(θ)^H c|` over a grid of angles (radians).
pub fn beam_pattern(codeword: &CVector, angles: &[f64], spacing_ratio: f64) -> Vec<f64> {
    angles
        .iter()
        .map(|&theta| {
            steering_vector_unchecked(codeword.len(), theta, spacing_ratio)
                .dotc(codeword)
                .norm()
        })
        .collect()
}

/// Same gain evaluated directly at `sin(angle)` values.
pub fn beam_pattern_sin(codeword: &CVector, sines: &[f64], spacing_ratio: f64) -> Vec<f64> {
    let angles: Vec<f64> = sines.iter().map(|u| u.clamp(-1.0, 1.0).asin()).collect();
    beam_pattern(codeword, &angles, spacing_ratio)
}
