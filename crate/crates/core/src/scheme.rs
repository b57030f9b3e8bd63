//! The three-stage amplifier and its detection branches.
//!
//! A coherent input passes three beam splitters in sequence. Each splitter
//! mixes the signal (mode 1) with an ancilla (mode 2) and the ancilla is
//! then counted:
//!
//! 1. vacuum ancilla, counted by the QND detector;
//! 2. the photons the QND detector saw, re-injected as `|n_qnd⟩`, counted by
//!    PD1;
//! 3. vacuum ancilla, counted by PD2.
//!
//! The heralded success pattern is `(1, 0, 1)`, which to first order in the
//! reflectivities applies `â â† â` to the input. Every other pattern is a
//! failure branch; the eight patterns with at most one photon per detector
//! are enumerated in the order of the usual results table.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::analytic::detector_adjusted;
use crate::error::{Error, Result};
use crate::fock::{default_dim, FockState};
use crate::modes::{BeamSplitter, TwoModeState};

/// Minimum dimension used by [`SchemeConfig::new`].
pub const MIN_SCHEME_DIM: usize = 30;

/// Detector pattern `(n_qnd, n_pd1, n_pd2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub qnd: usize,
    pub pd1: usize,
    pub pd2: usize,
}

impl Outcome {
    pub const fn new(qnd: usize, pd1: usize, pd2: usize) -> Self {
        Self { qnd, pd1, pd2 }
    }

    pub const SUCCESS: Outcome = Outcome::new(1, 0, 1);
}

/// Single-photon outcomes, state 1 (success) to state 8 (nothing detected).
pub const TABLE_ORDER: [Outcome; 8] = [
    Outcome::new(1, 0, 1),
    Outcome::new(1, 0, 0),
    Outcome::new(1, 1, 1),
    Outcome::new(1, 1, 0),
    Outcome::new(0, 1, 1),
    Outcome::new(0, 1, 0),
    Outcome::new(0, 0, 1),
    Outcome::new(0, 0, 0),
];

/// Input and hardware parameters of one amplifier run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub alpha: C64,
    pub r: [f64; 3],
    pub dim: usize,
    /// Efficiencies of the QND detector, PD1 and PD2.
    pub etas: [f64; 3],
}

impl SchemeConfig {
    /// Equal reflectivities, ideal detectors, `dim = max(30, default_dim)`.
    pub fn new(alpha: C64, r: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            r: [r; 3],
            dim: default_dim(alpha.norm()).max(MIN_SCHEME_DIM),
            etas: [1.0; 3],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_reflectivities(mut self, r: [f64; 3]) -> Result<Self> {
        self.r = r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        self.dim = dim;
        self.validate()?;
        Ok(self)
    }

    pub fn with_etas(mut self, etas: [f64; 3]) -> Result<Self> {
        self.etas = etas;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        if let Some(r) = self.r.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::InvalidParameter(format!(
                "reflectivity must lie in [0, 1), got {r}"
            )));
        }
        if let Some(e) = self.etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency must lie in [0, 1], got {e}"
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidParameter("dim must be at least 2".into()));
        }
        Ok(())
    }

    fn ideal_detectors(&self) -> bool {
        self.etas.iter().all(|&e| e == 1.0)
    }

    /// Unit phase of α (1 for α = 0).
    fn phase(&self) -> C64 {
        let a = self.alpha.norm();
        if a > 0.0 {
            self.alpha / a
        } else {
            C64::new(1.0, 0.0)
        }
    }
}

/// Output state of a reachable branch and its figures of merit.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchOutput {
    /// Normalized output of mode 1.
    pub state: FockState,
    pub mean_a: C64,
    pub mean_a_abs: f64,
    pub mean_n: f64,
    /// `|⟨â⟩_out| / |α|`; NaN for α = 0.
    pub g_eff: f64,
    /// Overlap with the coherent state `g_eff |α| e^{i arg α}`.
    pub fidelity_eff: f64,
    /// Overlap with `|2α⟩`.
    pub fidelity_ideal: f64,
    /// Overlap with the coherent state of equal mean photon number,
    /// amplitude `√⟨n̂⟩ e^{i arg ⟨â⟩}`. This is the reference behind the
    /// `1 − F` column of the published table.
    pub fidelity_matched: f64,
}

/// One detection pattern of the amplifier.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchResult {
    pub outcome: Outcome,
    /// Product of the three conditional probabilities, scaled by the
    /// detector efficiencies when those are not ideal.
    pub probability: f64,
    /// `None` when the pattern cannot occur (probability exactly zero).
    pub output: Option<BranchOutput>,
}

impl BranchResult {
    pub fn is_defined(&self) -> bool {
        self.output.is_some()
    }

    pub fn output(&self) -> Result<&BranchOutput> {
        self.output.as_ref().ok_or(Error::ZeroProbability)
    }
}

/// `|⟨β|ψ⟩|²` for normalized `ψ`, with `|β⟩` built wide enough not to
/// truncate.
pub fn coherent_overlap(state: &FockState, beta: C64) -> Result<f64> {
    let dim = state.dim().max(default_dim(beta.norm()));
    let reference = FockState::coherent(beta, dim)?;
    let padded = state.resized(dim)?;
    padded.fidelity(&reference)
}

fn summarize(cfg: &SchemeConfig, state: FockState) -> Result<BranchOutput> {
    let m = state.metrics()?;
    let alpha_abs = cfg.alpha.norm();
    let mean_a_abs = m.mean_a.norm();
    let g_eff = if alpha_abs > 0.0 {
        mean_a_abs / alpha_abs
    } else {
        f64::NAN
    };
    let eff_amp = if alpha_abs > 0.0 {
        cfg.phase() * mean_a_abs
    } else {
        C64::new(0.0, 0.0)
    };
    let out_phase = if mean_a_abs > 0.0 {
        m.mean_a / mean_a_abs
    } else {
        cfg.phase()
    };
    Ok(BranchOutput {
        fidelity_eff: coherent_overlap(&state, eff_amp)?,
        fidelity_ideal: coherent_overlap(&state, cfg.alpha * 2.0)?,
        fidelity_matched: coherent_overlap(&state, out_phase * m.mean_n.max(0.0).sqrt())?,
        mean_a: m.mean_a,
        mean_a_abs,
        mean_n: m.mean_n,
        g_eff,
        state,
    })
}

/// Propagates `|α⟩` through the three stages, conditioning on `outcome`.
pub fn run_branch(cfg: &SchemeConfig, outcome: Outcome) -> Result<BranchResult> {
    cfg.validate()?;
    let dim = cfg.dim;
    for n in [outcome.qnd, outcome.pd1, outcome.pd2] {
        if n >= dim {
            return Err(Error::Index { n, dim });
        }
    }
    let stages = [
        (0, outcome.qnd),
        (outcome.qnd, outcome.pd1),
        (0, outcome.pd2),
    ];
    let mut state = FockState::coherent(cfg.alpha, dim)?;
    let mut probability = 1.0;
    for ((ancilla, detected), r) in stages.into_iter().zip(cfg.r) {
        let mixed = TwoModeState::tensor(&state, &FockState::fock(ancilla, dim)?)
            .apply_beam_splitter(&BeamSplitter::new(r)?)?;
        match mixed.project_mode2(detected) {
            Ok((p, collapsed)) => {
                probability *= p;
                state = collapsed;
            }
            Err(Error::ZeroProbability) => {
                return Ok(BranchResult {
                    outcome,
                    probability: 0.0,
                    output: None,
                })
            }
            Err(e) => return Err(e),
        }
    }
    if !cfg.ideal_detectors() {
        let [q, d1, d2] = cfg.etas;
        probability = detector_adjusted(probability, q, d1, d2);
    }
    Ok(BranchResult {
        outcome,
        probability,
        output: Some(summarize(cfg, state)?),
    })
}

/// The eight single-photon branches plus everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchTable {
    /// In [`TABLE_ORDER`].
    pub branches: Vec<BranchResult>,
    /// `1 − Σ P`: some detector saw more than one photon.
    pub other_probability: f64,
}

pub fn enumerate_single_photon_branches(cfg: &SchemeConfig) -> Result<BranchTable> {
    let branches = TABLE_ORDER
        .par_iter()
        .map(|&o| run_branch(cfg, o))
        .collect::<Result<Vec<_>>>()?;
    let seen: f64 = branches.iter().map(|b| b.probability).sum();
    Ok(BranchTable {
        branches,
        other_probability: 1.0 - seen,
    })
}

/// Distance of a branch output from the closest coherent state whose
/// amplitude points along `⟨â⟩`: `1 − max_s |⟨s·u|ψ⟩|²`, `u = ⟨â⟩/|⟨â⟩|`.
pub fn coherence_check(branch: &BranchResult, cfg: &SchemeConfig) -> Result<f64> {
    let out = branch.output()?;
    let u = if out.mean_a_abs > 0.0 {
        out.mean_a / out.mean_a_abs
    } else {
        cfg.phase()
    };
    let overlap = |s: f64| coherent_overlap(&out.state, u * s);

    // coarse scan, then golden-section refinement around the best node
    let hi = 2.0 * out.mean_n.sqrt() + 1.0;
    let nodes = 64;
    let step = hi / nodes as f64;
    let mut best = (out.mean_a_abs, overlap(out.mean_a_abs)?);
    for k in 0..=nodes {
        let s = k as f64 * step;
        let f = overlap(s)?;
        if f > best.1 {
            best = (s, f);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(0.0), best.0 + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if overlap(c)? > overlap(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let f = overlap(mid)?.max(best.1);
    Ok((1.0 - f).max(0.0))
}

/// One row of the gain/fidelity sweep for the success branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub alpha_abs: f64,
    pub r: f64,
    pub g_eff: f64,
    pub f_eff: f64,
    pub f_ideal: f64,
    pub p_succ: f64,
}

/// Success-branch gain, fidelities and probability over a grid of real
/// positive `|α|` and shared reflectivities `r`. Rows are r-major.
///
/// `dim = None` uses each row's [`SchemeConfig::new`] default.
pub fn gain_fidelity_sweep(
    alpha_abs: &[f64],
    r_values: &[f64],
    dim: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if alpha_abs.is_empty() || r_values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep ranges must be non-empty".into(),
        ));
    }
    if let Some(a) = alpha_abs.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "sweep amplitudes must be positive, got {a}"
        )));
    }
    let points: Vec<(f64, f64)> = r_values
        .iter()
        .flat_map(|&r| alpha_abs.iter().map(move |&a| (a, r)))
        .collect();
    points
        .par_iter()
        .map(|&(a, r)| {
            let mut cfg = SchemeConfig::new(C64::new(a, 0.0), r)?;
            if let Some(d) = dim {
                cfg = cfg.with_dim(d)?;
            }
            let branch = run_branch(&cfg, Outcome::SUCCESS)?;
            let out = branch.output()?;
            Ok(SweepRow {
                alpha_abs: a,
                r,
                g_eff: out.g_eff,
                f_eff: out.fidelity_eff,
                f_ideal: out.fidelity_ideal,
                p_succ: branch.probability,
            })
        })
        .collect()
}

/// Normalized `â â† â |α⟩`, the small-reflectivity limit of the success
/// branch. Fails with [`Error::ZeroNorm`] for α = 0.
pub fn operator_oracle(cfg: &SchemeConfig) -> Result<FockState> {
    let input = FockState::coherent(cfg.alpha, cfg.dim)?;
    input.annihilate().create()?.annihilate().normalized()
}
