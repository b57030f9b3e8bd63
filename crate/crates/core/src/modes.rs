//! Two-mode states, the beam splitter and photon-number conditioning.
//!
//! Mode 1 is the transmitted path and mode 2 the reflected path; detectors
//! always sit on mode 2.
//!
//! The beam splitter maps coherent inputs `(α, β)` to coherent outputs
//! `(tα − rβ, tβ + rα)`, i.e. `â₁† → t â₁† + r â₂†` and `â₂† → −r â₁† + t â₂†`.
//! This is the Fock-space form of the quadrature substitution
//! `W₁(t x₁ + r x₂, t p₁ + r p₂) · W₂(t x₂ − r x₁, t p₂ − r p₁)`.
//!
//! The unitary conserves total photon number, so it is applied block by
//! block: block `N` spans `|m, N − m⟩` and is an `(N+1) × (N+1)` real
//! orthogonal matrix.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockState, StateMetrics, ZERO_NORM};

/// Mass allowed in photon-number blocks that the truncated output cannot
/// represent in full.
pub const BLOCK_TAIL_LIMIT: f64 = 1e-10;

/// Which of the two modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

/// Lossless beam splitter with real amplitude reflectivity `r`.
///
/// `r` may be negative: `BeamSplitter::new(-r)` is the inverse of
/// `BeamSplitter::new(r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    r: f64,
    t: f64,
}

impl BeamSplitter {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "reflectivity must satisfy |r| < 1, got {r}"
            )));
        }
        Ok(Self {
            r,
            t: (1.0 - r * r).sqrt(),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Block matrices up to total photon number `n_max`.
    ///
    /// `blocks[N][m][p]` is `⟨p, N−p| U |m, N−m⟩`. Columns are generated by
    /// repeatedly applying the transformed creation operators, each step a
    /// sparse positive-weight update, so no alternating binomial sums appear.
    fn blocks(&self, n_max: usize) -> Vec<Vec<Vec<f64>>> {
        let (r, t) = (self.r, self.t);
        // image of |0, n⟩ for n = 0..=n_max
        let mut zero_col: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
        zero_col.push(vec![1.0]);
        for n in 1..=n_max {
            let prev = &zero_col[n - 1];
            let mut next = vec![0.0; n + 1];
            // (−r â₁† + t â₂†)/√n acting on block n−1
            for (q, &v) in prev.iter().enumerate() {
                next[q + 1] += -r * ((q + 1) as f64).sqrt() * v;
                next[q] += t * ((n - q) as f64).sqrt() * v;
            }
            let s = 1.0 / (n as f64).sqrt();
            next.iter_mut().for_each(|x| *x *= s);
            zero_col.push(next);
        }

        let mut blocks: Vec<Vec<Vec<f64>>> =
            (0..=n_max).map(|n| Vec::with_capacity(n + 1)).collect();
        for (n2, base) in zero_col.into_iter().enumerate() {
            // climb m = 0, 1, ... with (t â₁† + r â₂†)/√m, landing in block m + n2
            let mut col = base;
            blocks[n2].push(col.clone());
            for m in 1..=(n_max - n2) {
                let block = m + n2;
                let mut next = vec![0.0; block + 1];
                for (q, &v) in col.iter().enumerate() {
                    next[q + 1] += t * ((q + 1) as f64).sqrt() * v;
                    next[q] += r * ((block - q) as f64).sqrt() * v;
                }
                let s = 1.0 / (m as f64).sqrt();
                next.iter_mut().for_each(|x| *x *= s);
                col = next;
                blocks[block].push(col.clone());
            }
        }
        // blocks[N] was filled in order of increasing n2, i.e. decreasing m
        for b in blocks.iter_mut() {
            b.reverse();
        }
        blocks
    }
}

/// Pure two-mode state, `amps[m * d2 + n]` for `|m⟩₁ |n⟩₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    amps: Vec<C64>,
    d1: usize,
    d2: usize,
}

impl TwoModeState {
    pub fn from_amps(amps: Vec<C64>, d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidParameter(
                "mode dimensions must be positive".into(),
            ));
        }
        if amps.len() != d1 * d2 {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: d1 * d2,
            });
        }
        Ok(Self { amps, d1, d2 })
    }

    /// `|ψ₁⟩ ⊗ |ψ₂⟩`
    pub fn tensor(mode1: &FockState, mode2: &FockState) -> Self {
        let (d1, d2) = (mode1.dim(), mode2.dim());
        let mut amps = Vec::with_capacity(d1 * d2);
        for a in mode1.amps() {
            amps.extend(mode2.amps().iter().map(|b| a * b));
        }
        Self { amps, d1, d2 }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn amp(&self, m: usize, n: usize) -> C64 {
        self.amps[m * self.d2 + n]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &TwoModeState) -> Result<C64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.amps.len(),
                right: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨n̂₁ + n̂₂⟩` over the squared norm.
    pub fn mean_total_photons(&self) -> Result<f64> {
        let norm2 = self.norm_sqr();
        if norm2 < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let mut acc = 0.0;
        for m in 0..self.d1 {
            for n in 0..self.d2 {
                acc += (m + n) as f64 * self.amp(m, n).norm_sqr();
            }
        }
        Ok(acc / norm2)
    }

    /// Reduced first moments of one mode.
    pub fn mode_metrics(&self, mode: Mode) -> Result<StateMetrics> {
        let norm2 = self.norm_sqr();
        if norm2 < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let mut mean_a = C64::new(0.0, 0.0);
        let mut mean_n = 0.0;
        for m in 0..self.d1 {
            for n in 0..self.d2 {
                let c = self.amp(m, n);
                match mode {
                    Mode::One => {
                        mean_n += m as f64 * c.norm_sqr();
                        if m + 1 < self.d1 {
                            mean_a += c.conj() * self.amp(m + 1, n) * ((m + 1) as f64).sqrt();
                        }
                    }
                    Mode::Two => {
                        mean_n += n as f64 * c.norm_sqr();
                        if n + 1 < self.d2 {
                            mean_a += c.conj() * self.amp(m, n + 1) * ((n + 1) as f64).sqrt();
                        }
                    }
                }
            }
        }
        Ok(StateMetrics {
            mean_a: mean_a / norm2,
            mean_n: mean_n / norm2,
            norm: norm2.sqrt(),
        })
    }

    /// Squared norm carried by photon-number blocks `N ≥ min(d1, d2)`,
    /// which the truncated output cannot hold in full.
    fn incomplete_block_mass(&self) -> f64 {
        let full = self.d1.min(self.d2);
        let mut acc = 0.0;
        for m in 0..self.d1 {
            for n in 0..self.d2 {
                if m + n >= full {
                    acc += self.amp(m, n).norm_sqr();
                }
            }
        }
        acc
    }

    /// Mixes the two modes on `bs`.
    pub fn apply_beam_splitter(&self, bs: &BeamSplitter) -> Result<Self> {
        let lost = self.incomplete_block_mass();
        if lost > BLOCK_TAIL_LIMIT {
            return Err(Error::Truncation {
                what: "two-mode photon-number blocks exceed truncation",
                mass: lost,
                limit: BLOCK_TAIL_LIMIT,
            });
        }
        let (d1, d2) = (self.d1, self.d2);
        let n_max = d1 + d2 - 2;
        let blocks = bs.blocks(n_max);
        let mut out = vec![C64::new(0.0, 0.0); d1 * d2];
        for (total, block) in blocks.iter().enumerate() {
            // representable m range for this block
            let lo = total.saturating_sub(d2 - 1);
            let hi = total.min(d1 - 1);
            if lo > hi {
                continue;
            }
            for m in lo..=hi {
                let c = self.amp(m, total - m);
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let col = &block[m];
                for p in lo..=hi {
                    out[p * d2 + (total - p)] += c * col[p];
                }
            }
        }
        Ok(Self { amps: out, d1, d2 })
    }

    /// Unnormalized mode-1 state conditioned on `n` photons in mode 2.
    pub fn condition_mode2(&self, n: usize) -> Result<FockState> {
        if n >= self.d2 {
            return Err(Error::Index { n, dim: self.d2 });
        }
        FockState::from_amps((0..self.d1).map(|m| self.amp(m, n)).collect())
    }

    /// Projects mode 2 onto `|n⟩`.
    ///
    /// Returns the outcome probability `Σ_m |c_{m,n}|²` (relative to the
    /// squared norm of `self`) and the renormalized mode-1 state.
    pub fn project_mode2(&self, n: usize) -> Result<(f64, FockState)> {
        let branch = self.condition_mode2(n)?;
        let total = self.norm_sqr();
        if total < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let p = branch.norm_sqr() / total;
        if p < ZERO_NORM {
            return Err(Error::ZeroProbability);
        }
        Ok((p, branch.normalized()?))
    }
}
