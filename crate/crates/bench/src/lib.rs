//! Fixtures shared by the criterion benchmarks in `benches/`.

use nlamp_core::{Complex64 as C64, FockState, SchemeConfig};

/// The table configuration: |α| = 0.5, r = 0.4 on every splitter.
pub fn table_config() -> SchemeConfig {
    SchemeConfig::new(C64::new(0.5, 0.0), 0.4).expect("valid parameters")
}

/// Success-branch output of [`table_config`].
pub fn success_state() -> FockState {
    let branch =
        nlamp_core::run_branch(&table_config(), nlamp_core::Outcome::SUCCESS).expect("branch runs");
    branch.output().expect("reachable").state.clone()
}
