use nlamp_core::analytic::{f_eff_closed, f_eff_closed_corrected, g_eff_closed, SplitterTriple};
use nlamp_core::wigner::{expect_a_grid, fidelity_grid, wigner_coherent, wigner_of_state};
use nlamp_core::{run_branch, Complex64 as C64, GridSpec, Outcome, SchemeConfig, WignerGrid};
use tempfile::TempDir;

#[test]
fn success_branch_through_phase_space() {
    let cfg = SchemeConfig::new(C64::new(0.5, 0.0), 0.4).unwrap();
    let out = run_branch(&cfg, Outcome::SUCCESS).unwrap();
    let out = out.output().unwrap();
    let spec = GridSpec::default();
    let w = wigner_of_state(&out.state, &spec).unwrap();
    assert!((w.integral() - 1.0).abs() < 1e-6);
    let a = expect_a_grid(&w).unwrap();
    assert!((a.norm() - 0.686).abs() < 1e-3);
    assert!((a - out.mean_a).norm() < 1e-6);

    let reference = wigner_coherent(C64::new(out.g_eff * 0.5, 0.0), &spec).unwrap();
    let f = fidelity_grid(&w, &reference).unwrap();
    assert!((f - out.fidelity_eff).abs() < 1e-6);
}

#[test]
fn closed_fidelity_forms_against_simulator() {
    for (a, r) in [(0.3, 0.1), (0.5, 0.4), (0.8, 0.25)] {
        let cfg = SchemeConfig::new(C64::new(a, 0.0), r).unwrap();
        let sim = run_branch(&cfg, Outcome::SUCCESS).unwrap();
        let sim = sim.output().unwrap();
        let s = SplitterTriple::uniform(r).unwrap();
        let g = g_eff_closed(a, &s);
        let corrected = f_eff_closed_corrected(a, &s, g).value;
        assert!((corrected - sim.fidelity_eff).abs() < 1e-10, "{a} {r}");
        let printed = f_eff_closed(a, &s, g).value;
        assert!((printed - sim.fidelity_eff).abs() > 1e-4);
    }
}

#[test]
fn grid_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = SchemeConfig::new(C64::new(0.4, 0.2), 0.3).unwrap();
    let b = run_branch(&cfg, Outcome::new(1, 1, 0)).unwrap();
    let spec = GridSpec::square(5.0, 41);
    let w = wigner_of_state(&b.output().unwrap().state, &spec).unwrap();
    let path = dir.path().join("w.csv");
    w.export(&path).unwrap();
    let back = WignerGrid::import(&path).unwrap();
    assert_eq!(back, w);
    assert!(WignerGrid::import(dir.path().join("missing.csv")).is_err());
}
