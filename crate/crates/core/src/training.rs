//! Adaptive hierarchical beam training with MS→RIS index feedback, plus the
//! exhaustive and random-phase baselines.
//!
//! At every stage the RIS offers K candidate profiles and the MS K candidate
//! combiners. One time slot holds one RIS profile while the MS combines with
//! `N_RF` codewords at once (one hybrid block), all from the same antenna
//! noise snapshot. After the K×K grid is measured the MS picks the cell with
//! the largest power summed over subcarriers, feeds the column index back to
//! the RIS controller, and both sides descend to the children of their
//! winners.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::LinkChannel;
use crate::codebook::{MsCodebook, RisCodebook};
use crate::error::{Error, Result};
use crate::linalg::{cis, CVector};

/// Training schemes; `Optimal` uses the true angles and no training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    Exhaustive,
    RandomPhase,
    Optimal,
}

impl Scheme {
    /// Fixed output order.
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::Exhaustive,
        Scheme::RandomPhase,
        Scheme::Optimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Exhaustive => "exhaustive",
            Scheme::RandomPhase => "random_phase",
            Scheme::Optimal => "optimal",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Scheme::Proposed => 1,
            Scheme::Exhaustive => 2,
            Scheme::RandomPhase => 3,
            Scheme::Optimal => 4,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Scheme::Proposed),
            "exhaustive" => Ok(Scheme::Exhaustive),
            "random_phase" | "random" => Ok(Scheme::RandomPhase),
            "optimal" => Ok(Scheme::Optimal),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Training slots a scheme consumes. `Optimal` needs none.
pub fn slot_count(scheme: Scheme, levels: usize, branching: usize, n_rf: usize) -> Result<usize> {
    if n_rf == 0 {
        return Err(Error::invalid("at least one RF chain is required"));
    }
    let pow = |e: usize| {
        u32::try_from(e)
            .ok()
            .and_then(|e| branching.checked_pow(e))
            .ok_or_else(|| Error::invalid("slot count overflows"))
    };
    let (pairs_per_unit, units) = match scheme {
        Scheme::Proposed => (branching * branching, levels),
        Scheme::Exhaustive => (pow(2 * levels)?, 1),
        Scheme::RandomPhase => (pow(levels)?, 1),
        Scheme::Optimal => return Ok(0),
    };
    if pairs_per_unit % n_rf != 0 {
        return Err(Error::invalid(format!(
            "{n_rf} RF chains do not divide {pairs_per_unit} measurements"
        )));
    }
    Ok(units * pairs_per_unit / n_rf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Noise power per antenna per subcarrier, W. Zero means noise-free.
    pub sigma_sq: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn noise_free() -> Self {
        Self {
            sigma_sq: 0.0,
            rng_seed: 0,
        }
    }
}

fn draw_noise<R: Rng + ?Sized>(len: usize, sigma_sq: f64, rng: &mut R) -> CVector {
    let scale = (sigma_sq / 2.0).sqrt();
    CVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// One time slot: the MS applies every combiner in `combiners` to the same
/// received snapshot `sqrt(P) H[n] f + n[n]`. Returns one length-N
/// observation vector per combiner.
pub fn observe_slot<R: Rng + ?Sized>(
    response: &[CVector],
    combiners: &[&CVector],
    tx_power: f64,
    sigma_sq: f64,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let amp = Complex64::new(tx_power.sqrt(), 0.0);
    let mut out = vec![Vec::with_capacity(response.len()); combiners.len()];
    for h in response {
        let mut snapshot = h * amp;
        if sigma_sq > 0.0 {
            snapshot += draw_noise(h.len(), sigma_sq, rng);
        }
        for (obs, w) in out.iter_mut().zip(combiners) {
            obs.push(w.dotc(&snapshot));
        }
    }
    out
}

/// `y[n] = w^H (sqrt(P) H[n]|_φ f + n[n])` for all subcarriers.
pub fn observe_pair<R: Rng + ?Sized>(
    link: &LinkChannel,
    ms_codeword: &CVector,
    ris_profile: &CVector,
    tx_power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Vec<Complex64> {
    let response = link.response(ris_profile);
    observe_slot(&response, &[ms_codeword], tx_power, noise.sigma_sq, rng)
        .pop()
        .unwrap_or_default()
}

/// `Σ_n |y[n]|^2` for every cell of a (rows = MS, cols = RIS) grid.
pub fn sum_power(observations: &[Vec<Vec<Complex64>>]) -> DMatrix<f64> {
    let rows = observations.len();
    let cols = observations.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |m, k| observations[m][k].iter().map(|z| z.norm_sqr()).sum())
}

/// 1-based (row, column) of the largest entry; ties go to the lowest column,
/// then the lowest row.
pub fn select_and_feedback(p: &DMatrix<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..p.ncols() {
        for m in 0..p.nrows() {
            if p[(m, k)] > best_val {
                best_val = p[(m, k)];
                best = (m, k);
            }
        }
    }
    (best.0 + 1, best.1 + 1)
}

/// 1-based indices of the next-level children of codeword `index`.
pub fn children(index: usize, branching: usize) -> RangeInclusive<usize> {
    let first = (index - 1) * branching + 1;
    first..=index * branching
}

/// One stage's K×K (or, for the baselines, full) measurement grid.
#[derive(Debug, Clone)]
pub struct StageMeasurement {
    pub stage: usize,
    /// Codebook level the candidates come from.
    pub level: usize,
    /// Global 1-based codeword indices of the row (MS) candidates.
    pub ms_candidates: Vec<usize>,
    /// Global 1-based codeword indices of the column (RIS) candidates.
    pub ris_candidates: Vec<usize>,
    /// `received[m][k]` is the length-N observation for MS candidate m and
    /// RIS candidate k.
    pub received: Vec<Vec<Vec<Complex64>>>,
    pub sum_power: DMatrix<f64>,
    /// Local 1-based row index of the winner.
    pub selected_ms: usize,
    /// Local 1-based column index of the winner.
    pub selected_ris: usize,
}

impl StageMeasurement {
    pub fn winning_power(&self) -> f64 {
        self.sum_power[(self.selected_ms - 1, self.selected_ris - 1)]
    }

    pub fn winning_ms(&self) -> usize {
        self.ms_candidates[self.selected_ms - 1]
    }

    pub fn winning_ris(&self) -> usize {
        self.ris_candidates[self.selected_ris - 1]
    }
}

/// The single message the MS sends to the RIS controller after a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackMessage {
    pub stage: usize,
    /// Local column index I_RIS,s in 1..=K.
    pub ris_index: usize,
}

/// What happened in one time slot, for the protocol trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub stage: usize,
    /// 1-based slot number within the run.
    pub slot: usize,
    pub ris_index: usize,
    pub ms_indices: Vec<usize>,
    pub sum_powers: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub scheme: Scheme,
    pub per_stage: Vec<StageMeasurement>,
    /// φ_opt.
    pub final_ris_codeword: CVector,
    /// w_opt.
    pub final_ms_codeword: CVector,
    /// Level-S index of φ_opt; `None` for a random profile.
    pub final_ris_index: Option<usize>,
    pub final_ms_index: usize,
    /// y_S, the winning pair's observation in subcarrier order.
    pub stacked_final: Vec<Complex64>,
    pub slots_used: usize,
    pub feedback: Vec<FeedbackMessage>,
    pub slots: Vec<SlotRecord>,
}

struct GridRun<'a> {
    link: &'a LinkChannel,
    tx_power: f64,
    sigma_sq: f64,
    n_rf: usize,
    slots: Vec<SlotRecord>,
}

impl GridRun<'_> {
    /// Measures every (MS, RIS) candidate pair, `n_rf` MS codewords per slot.
    #[allow(clippy::too_many_arguments)]
    fn measure<R: Rng + ?Sized>(
        &mut self,
        stage: usize,
        level: usize,
        ms_candidates: Vec<usize>,
        ris_candidates: Vec<usize>,
        ms_words: &[CVector],
        ris_profiles: &[&CVector],
        rng: &mut R,
    ) -> StageMeasurement {
        let rows = ms_candidates.len();
        let cols = ris_candidates.len();
        let mut received = vec![vec![Vec::new(); cols]; rows];
        for (k, profile) in ris_profiles.iter().enumerate() {
            let response = self.link.response(profile);
            for (chunk_idx, chunk) in ms_candidates.chunks(self.n_rf).enumerate() {
                let combiners: Vec<&CVector> = chunk.iter().map(|&i| &ms_words[i - 1]).collect();
                let obs = observe_slot(&response, &combiners, self.tx_power, self.sigma_sq, rng);
                let mut powers = Vec::with_capacity(obs.len());
                for (j, y) in obs.into_iter().enumerate() {
                    powers.push(y.iter().map(|z| z.norm_sqr()).sum());
                    received[chunk_idx * self.n_rf + j][k] = y;
                }
                self.slots.push(SlotRecord {
                    stage,
                    slot: self.slots.len() + 1,
                    ris_index: ris_candidates[k],
                    ms_indices: chunk.to_vec(),
                    sum_powers: powers,
                });
            }
        }
        let p = sum_power(&received);
        let (selected_ms, selected_ris) = select_and_feedback(&p);
        StageMeasurement {
            stage,
            level,
            ms_candidates,
            ris_candidates,
            received,
            sum_power: p,
            selected_ms,
            selected_ris,
        }
    }
}

fn check_codebooks(ris: &RisCodebook, ms: &MsCodebook) -> Result<()> {
    if ris.num_levels() == 0 || ris.num_levels() != ms.num_levels() || ris.branching != ms.branching {
        return Err(Error::invalid("RIS and MS codebooks must share levels and branching"));
    }
    Ok(())
}

/// Hierarchical search over S stages with RIS index feedback.
pub fn run_adaptive<R: Rng + ?Sized>(
    link: &LinkChannel,
    ris: &RisCodebook,
    ms: &MsCodebook,
    tx_power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    check_codebooks(ris, ms)?;
    let k = ris.branching;
    let levels = ris.num_levels();
    let mut run = GridRun {
        link,
        tx_power,
        sigma_sq: noise.sigma_sq,
        n_rf: ms.n_rf,
        slots: Vec::new(),
    };
    let mut ris_candidates: Vec<usize> = (1..=k).collect();
    let mut ms_candidates: Vec<usize> = (1..=k).collect();
    let mut per_stage = Vec::with_capacity(levels);
    let mut feedback = Vec::with_capacity(levels);
    for s in 1..=levels {
        let profiles: Vec<&CVector> = ris_candidates.iter().map(|&i| ris.codeword(s, i)).collect();
        let stage = run.measure(
            s,
            s,
            ms_candidates.clone(),
            ris_candidates.clone(),
            &ms.levels[s - 1],
            &profiles,
            rng,
        );
        feedback.push(FeedbackMessage {
            stage: s,
            ris_index: stage.selected_ris,
        });
        ris_candidates = children(stage.winning_ris(), k).collect();
        ms_candidates = children(stage.winning_ms(), k).collect();
        per_stage.push(stage);
    }
    let last = per_stage.last().expect("at least one stage");
    let ris_idx = last.winning_ris();
    let ms_idx = last.winning_ms();
    let stacked = last.received[last.selected_ms - 1][last.selected_ris - 1].clone();
    Ok(TrainingOutcome {
        scheme: Scheme::Proposed,
        final_ris_codeword: ris.codeword(levels, ris_idx).clone(),
        final_ms_codeword: ms.codeword(levels, ms_idx).clone(),
        final_ris_index: Some(ris_idx),
        final_ms_index: ms_idx,
        stacked_final: stacked,
        slots_used: run.slots.len(),
        per_stage,
        feedback,
        slots: run.slots,
    })
}

/// Every level-S pair, global argmax.
pub fn run_exhaustive<R: Rng + ?Sized>(
    link: &LinkChannel,
    ris: &RisCodebook,
    ms: &MsCodebook,
    tx_power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    check_codebooks(ris, ms)?;
    let levels = ris.num_levels();
    let mut run = GridRun {
        link,
        tx_power,
        sigma_sq: noise.sigma_sq,
        n_rf: ms.n_rf,
        slots: Vec::new(),
    };
    let ris_level = &ris.levels[levels - 1];
    let profiles: Vec<&CVector> = ris_level.iter().collect();
    let stage = run.measure(
        1,
        levels,
        (1..=ms.levels[levels - 1].len()).collect(),
        (1..=ris_level.len()).collect(),
        &ms.levels[levels - 1],
        &profiles,
        rng,
    );
    let ris_idx = stage.winning_ris();
    let ms_idx = stage.winning_ms();
    let stacked = stage.received[stage.selected_ms - 1][stage.selected_ris - 1].clone();
    Ok(TrainingOutcome {
        scheme: Scheme::Exhaustive,
        final_ris_codeword: ris.codeword(levels, ris_idx).clone(),
        final_ms_codeword: ms.codeword(levels, ms_idx).clone(),
        final_ris_index: Some(ris_idx),
        final_ms_index: ms_idx,
        stacked_final: stacked,
        slots_used: run.slots.len(),
        per_stage: vec![stage],
        feedback: Vec::new(),
        slots: run.slots,
    })
}

/// I.i.d. uniform phases with modulus `1/sqrt(n)`.
pub fn random_phase_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let modulus = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |_, _| cis(rng.random_range(0.0..2.0 * PI)) * modulus)
}

/// A single random RIS profile held for the whole sweep over the level-S MS
/// codebook.
pub fn run_random_phase<R: Rng + ?Sized>(
    link: &LinkChannel,
    n_ris: usize,
    ms: &MsCodebook,
    tx_power: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    if ms.num_levels() == 0 {
        return Err(Error::invalid("MS codebook has no levels"));
    }
    let levels = ms.num_levels();
    let profile = random_phase_profile(n_ris, rng);
    let mut run = GridRun {
        link,
        tx_power,
        sigma_sq: noise.sigma_sq,
        n_rf: ms.n_rf,
        slots: Vec::new(),
    };
    let stage = run.measure(
        1,
        levels,
        (1..=ms.levels[levels - 1].len()).collect(),
        vec![0],
        &ms.levels[levels - 1],
        &[&profile],
        rng,
    );
    let ms_idx = stage.winning_ms();
    let stacked = stage.received[stage.selected_ms - 1][0].clone();
    Ok(TrainingOutcome {
        scheme: Scheme::RandomPhase,
        final_ris_codeword: profile,
        final_ms_codeword: ms.codeword(levels, ms_idx).clone(),
        final_ris_index: None,
        final_ms_index: ms_idx,
        stacked_final: stacked,
        slots_used: run.slots.len(),
        per_stage: vec![stage],
        feedback: Vec::new(),
        slots: run.slots,
    })
}

pub const TRACE_HEADER: &str = "trial,stage,slot,ms_idx,ris_idx,sum_power";

/// Appends one CSV line per slot. A slot combines several MS codewords, so
/// `ms_idx` and `sum_power` list one value per codeword separated by `;`.
/// `ris_idx` is 0 for a random profile.
pub fn write_trace<W: Write>(trial: usize, outcome: &TrainingOutcome, out: &mut W) -> Result<()> {
    for slot in &outcome.slots {
        let ms: Vec<String> = slot.ms_indices.iter().map(usize::to_string).collect();
        let powers: Vec<String> = slot.sum_powers.iter().map(|p| format!("{p:.9e}")).collect();
        writeln!(
            out,
            "{trial},{},{},{},{},{}",
            slot.stage,
            slot.slot,
            ms.join(";"),
            slot.ris_index,
            powers.join(";")
        )?;
    }
    Ok(())
}
