//! Truncated single-mode Fock space.
//!
//! A [`FockState`] holds the amplitudes `c_n` of `Σ c_n |n⟩` for
//! `n = 0..dim`; amplitudes at `n ≥ dim` are implicitly zero. States are not
//! required to be normalized: conditional branch probabilities are read off
//! squared norms before renormalizing, so unnormalized intermediates are
//! ordinary values here.
//!
//! Units follow ħ = κ = 1 throughout the crate.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest untruncated tail mass accepted when building a coherent state.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-10;
/// Largest top-level amplitude allowed before raising photon number.
pub const CREATE_TOP_LIMIT: f64 = 1e-10;
/// Norms below this are treated as exactly zero.
pub const ZERO_NORM: f64 = 1e-300;

/// Truncation dimension that keeps the coherent tail negligible for `|α|`.
///
/// `max(20, ceil(|α|² + 8|α| + 12))`; below 1e-14 lost mass for `|α| ≤ 2`.
pub fn default_dim(alpha_abs: f64) -> usize {
    let a = alpha_abs.abs();
    let rule = (a * a + 8.0 * a + 12.0).ceil() as usize;
    rule.max(20)
}

/// Pure single-mode state in a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    amps: Vec<C64>,
}

/// First moments of a state, normalized by its squared norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    /// ⟨â⟩
    pub mean_a: C64,
    /// ⟨n̂⟩
    pub mean_n: f64,
    /// `sqrt(Σ |c_n|²)` of the state the metrics were taken from.
    pub norm: f64,
}

impl FockState {
    /// Wraps raw amplitudes. Fails on an empty vector.
    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        Ok(Self { amps })
    }

    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_amps(vec![C64::new(0.0, 0.0); dim])
    }

    /// The vacuum `|0⟩`.
    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Number state `|n⟩`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if n >= dim {
            return Err(Error::Index { n, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Coherent state `|α⟩` truncated to `dim` levels and renormalized.
    ///
    /// The amplitudes `e^{-|α|²/2} αⁿ/√n!` are built by the recurrence
    /// `c_n = c_{n-1} α/√n`, so no factorial is ever formed. Fails if the
    /// discarded tail carries more than [`COHERENT_TAIL_LIMIT`] of the mass.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        let mut amps = Vec::with_capacity(dim);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        amps.push(c);
        for n in 1..dim {
            c = c * alpha / (n as f64).sqrt();
            amps.push(c);
        }
        let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        let tail = 1.0 - kept;
        if tail > COHERENT_TAIL_LIMIT {
            return Err(Error::Truncation {
                what: "coherent state tail beyond truncation",
                mass: tail,
                limit: COHERENT_TAIL_LIMIT,
            });
        }
        let mut state = Self { amps };
        state.normalize()?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// `Σ |c_n|²`
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales in place to unit norm.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|c| *c *= inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Multiplies every amplitude by `z`.
    pub fn scaled(mut self, z: C64) -> Self {
        self.amps.iter_mut().for_each(|c| *c *= z);
        self
    }

    /// `â|ψ⟩`, unnormalized. The result has squared norm `⟨ψ|n̂|ψ⟩`.
    pub fn annihilate(&self) -> Self {
        let dim = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for n in 0..dim - 1 {
            out[n] = self.amps[n + 1] * ((n + 1) as f64).sqrt();
        }
        Self { amps: out }
    }

    /// `â†|ψ⟩`, unnormalized.
    ///
    /// The top amplitude would be pushed out of the truncated space, so it
    /// must be below [`CREATE_TOP_LIMIT`].
    pub fn create(&self) -> Result<Self> {
        let dim = self.dim();
        let top = self.amps[dim - 1].norm();
        if top > CREATE_TOP_LIMIT {
            return Err(Error::Truncation {
                what: "creation operator on occupied top level",
                mass: top * top,
                limit: CREATE_TOP_LIMIT * CREATE_TOP_LIMIT,
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for n in 0..dim - 1 {
            out[n + 1] = self.amps[n] * ((n + 1) as f64).sqrt();
        }
        Ok(Self { amps: out })
    }

    /// `⟨self|other⟩ = Σ conj(a_n) b_n`
    pub fn inner(&self, other: &FockState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na < ZERO_NORM || nb < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner(other)?.norm_sqr() / (na * nb))
    }

    /// `Σ (-1)ⁿ |c_n|²` over the squared norm.
    pub fn mean_parity(&self) -> Result<f64> {
        let norm2 = self.norm_sqr();
        if norm2 < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let parity: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n % 2 == 0 {
                    c.norm_sqr()
                } else {
                    -c.norm_sqr()
                }
            })
            .sum();
        Ok(parity / norm2)
    }

    /// ⟨â⟩ and ⟨n̂⟩, both divided by the squared norm.
    pub fn metrics(&self) -> Result<StateMetrics> {
        let norm2 = self.norm_sqr();
        let norm = norm2.sqrt();
        if norm < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let mut mean_a = C64::new(0.0, 0.0);
        let mut mean_n = 0.0;
        for n in 1..self.dim() {
            let sq = (n as f64).sqrt();
            mean_a += self.amps[n - 1].conj() * self.amps[n] * sq;
            mean_n += n as f64 * self.amps[n].norm_sqr();
        }
        Ok(StateMetrics {
            mean_a: mean_a / norm2,
            mean_n: mean_n / norm2,
            norm,
        })
    }

    /// Same amplitudes embedded in (or cut down to) `dim` levels.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        let mut amps = self.amps.clone();
        amps.resize(dim, C64::new(0.0, 0.0));
        Self::from_amps(amps)
    }
}
