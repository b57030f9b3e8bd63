//! Simulation and analysis of a heralded noiseless amplifier for weak
//! coherent light.
//!
//! The amplifier subtracts a photon from the signal with a beam splitter and
//! a quantum non-demolition (QND) counter, re-injects it on a second beam
//! splitter, and subtracts again on a third. Conditioned on the detector
//! pattern (1, 0, 1) this approximates `â â† â`, giving up to twice the input
//! field amplitude without adding noise.
//!
//! * [`fock`] and [`modes`] hold the truncated Fock-space simulator.
//! * [`wigner`] evaluates states in phase space, an independent route to
//!   overlaps and field expectations.
//! * [`analytic`] has the closed-form success probability, gain and
//!   fidelity.
//! * [`scheme`] runs the three-stage amplifier branch by branch.
//! * [`optimizer`] maximizes the success probability under a gain floor.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod modes;
pub mod optimizer;
pub mod scheme;
pub mod wigner;

pub use num_complex::Complex64;

pub use analytic::{g_eff_closed, p_succ_closed, SplitterTriple};
pub use error::{Error, Result};
pub use fock::{default_dim, FockState, StateMetrics};
pub use modes::{BeamSplitter, Mode, TwoModeState};
pub use optimizer::{OptProblem, OptResult, OptSettings};
pub use scheme::{
    enumerate_single_photon_branches, run_branch, BranchOutput, BranchResult, BranchTable, Outcome,
    SchemeConfig, TABLE_ORDER,
};
pub use wigner::{GridSpec, WignerGrid};
