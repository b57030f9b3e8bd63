//! Closed-form predictions for the success branch of the amplifier.
//!
//! These are plain scalar functions of `|α|` and the three reflectivities,
//! deliberately kept free of any Fock-space machinery so that the simulator
//! in [`crate::scheme`] can be checked against them and vice versa.
//!
//! All three closed forms depend on the splitters only through the products
//! `T = t₁t₂t₃` and `R = r₁r₂r₃`.

use crate::error::{Error, Result};

/// Reflectivities of the three beam splitters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitterTriple {
    pub r: [f64; 3],
}

impl SplitterTriple {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        for r in [r1, r2, r3] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!(
                    "reflectivity must lie in [0, 1), got {r}"
                )));
            }
        }
        Ok(Self { r: [r1, r2, r3] })
    }

    pub fn uniform(r: f64) -> Result<Self> {
        Self::new(r, r, r)
    }

    /// `t_i = √(1 − r_i²)`
    pub fn t(&self) -> [f64; 3] {
        self.r.map(|r| (1.0 - r * r).sqrt())
    }

    /// `T = t₁ t₂ t₃`
    pub fn big_t(&self) -> f64 {
        self.t().iter().product()
    }

    /// `R = r₁ r₂ r₃`
    pub fn big_r(&self) -> f64 {
        self.r.iter().product()
    }
}

/// Probability of the (QND, PD1, PD2) = (1, 0, 1) outcome:
/// `(1 + |Tα|²(3 + |Tα|²)) |Rα|² e^{|Tα|² − |α|²}`.
pub fn p_succ_closed(alpha_abs: f64, s: &SplitterTriple) -> f64 {
    let a2 = alpha_abs * alpha_abs;
    let x = s.big_t().powi(2) * a2;
    let r = s.big_r();
    (1.0 + x * (3.0 + x)) * r * r * a2 * (x - a2).exp()
}

/// Effective gain `|⟨â⟩_out| / |α|` of the success branch:
/// `T (2 + 4|Tα|² + |Tα|⁴) / (1 + 3|Tα|² + |Tα|⁴)`.
pub fn g_eff_closed(alpha_abs: f64, s: &SplitterTriple) -> f64 {
    let t = s.big_t();
    let x = t * t * alpha_abs * alpha_abs;
    t * (2.0 + 4.0 * x + x * x) / (1.0 + 3.0 * x + x * x)
}

/// A closed-form fidelity together with which exponent produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFidelity {
    pub value: f64,
    /// `true` for the exponent `(g_eff² − T)²`, `false` for `(g_eff − T)²`.
    pub as_printed: bool,
}

fn f_eff_with_shift(alpha_abs: f64, s: &SplitterTriple, g_eff: f64, shift: f64) -> f64 {
    let t = s.big_t();
    let a2 = alpha_abs * alpha_abs;
    let x = t * t * a2;
    let num = 1.0 + 2.0 * g_eff * t * a2 + g_eff * g_eff * t * t * a2 * a2;
    num * (-(shift - t).powi(2) * a2).exp() / (1.0 + 3.0 * x + x * x)
}

/// Success-branch fidelity against `|g_eff α⟩` with the exponent
/// `e^{−(g_eff² − T)²|α|²}`.
///
/// Kept for reference only; it disagrees with the numerically computed
/// overlap (see [`f_eff_closed_corrected`]).
pub fn f_eff_closed(alpha_abs: f64, s: &SplitterTriple, g_eff: f64) -> ClosedFidelity {
    ClosedFidelity {
        value: f_eff_with_shift(alpha_abs, s, g_eff, g_eff * g_eff),
        as_printed: true,
    }
}

/// Same expression with the exponent `e^{−(g_eff − T)²|α|²}`, which is the
/// exact overlap `|⟨g_eff α|ψ_out⟩|²` of the success branch.
pub fn f_eff_closed_corrected(alpha_abs: f64, s: &SplitterTriple, g_eff: f64) -> ClosedFidelity {
    ClosedFidelity {
        value: f_eff_with_shift(alpha_abs, s, g_eff, g_eff),
        as_printed: false,
    }
}

/// Success probability with non-ideal detectors: `p · η_qnd · η_pd1 · η_pd2`.
pub fn detector_adjusted(p: f64, eta_qnd: f64, eta_pd1: f64, eta_pd2: f64) -> f64 {
    p * eta_qnd * eta_pd1 * eta_pd2
}
