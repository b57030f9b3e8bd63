use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nlamp_core::analytic::detector_adjusted;
use nlamp_core::optimizer::{refined_thresholds, sweep, threshold_grid, OptResult};
use nlamp_core::scheme::{coherence_check, gain_fidelity_sweep};
use nlamp_core::wigner::{wigner_coherent, wigner_of_state};
use nlamp_core::{enumerate_single_photon_branches, run_branch, Error, OptSettings, TABLE_ORDER};
use serde::Serialize;

use crate::config::{BranchSel, RunConfig};
use crate::error::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

pub fn table1(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let table = enumerate_single_photon_branches(&cfg.scheme)?;
    let (path, mut out) = create(&cfg.out, "table1.csv")?;
    writeln!(out, "state,n_qnd,n_pd1,n_pd2,abs_mean_a,one_minus_F,P")?;
    for (k, b) in table.branches.iter().enumerate() {
        let o = b.outcome;
        let (amp, infid) = match &b.output {
            Some(out) => (
                num(out.mean_a_abs),
                num((1.0 - out.fidelity_matched).max(0.0)),
            ),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{amp},{infid},{}",
            k + 1,
            o.qnd,
            o.pd1,
            o.pd2,
            num(b.probability)
        )?;
    }
    writeln!(out, "other,,,,,,{}", num(table.other_probability))?;
    out.flush()?;
    Ok(vec![path])
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let rows = gain_fidelity_sweep(&cfg.sweep_alphas, &cfg.r_values, Some(cfg.scheme.dim))?;
    let [q, d1, d2] = cfg.scheme.etas;
    let (path, mut out) = create(&cfg.out, "sweep.csv")?;
    writeln!(out, "alpha_abs,r,g_eff,F_eff,F_ideal,P_succ")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.alpha_abs),
            num(r.r),
            num(r.g_eff),
            num(r.f_eff),
            num(r.f_ideal),
            num(detector_adjusted(r.p_succ, q, d1, d2))
        )?;
    }
    out.flush()?;
    Ok(vec![path])
}

fn optimize_row(g0: f64, res: &Result<OptResult, Error>) -> String {
    match res {
        Ok(r) => format!(
            "{},{},{},{},{},{}",
            num(g0),
            num(r.p_opt),
            num(r.alpha_opt),
            num(r.r_opt.iter().sum::<f64>() / 3.0),
            num(r.f_opt),
            r.converged
        ),
        Err(_) => {
            let nan = num(f64::NAN);
            format!("{},{nan},{nan},{nan},{nan},false", num(g0))
        }
    }
}

pub fn optimize(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (lo, hi, step) = cfg.geff0;
    let settings = OptSettings::default();
    let coarse = threshold_grid(lo, hi, step)?;
    let mut thresholds = coarse.clone();
    let mut results = sweep(&coarse, &settings)?;
    if cfg.refine && coarse.len() > 2 {
        let fine = refined_thresholds(&coarse, &results);
        if fine != coarse {
            results = sweep(&fine, &settings)?;
            thresholds = fine;
        }
    }
    let (path, mut out) = create(&cfg.out, "optimize.csv")?;
    writeln!(out, "g_eff0,p_opt,alpha_opt,r_opt,f_opt,converged")?;
    let mut failed = 0;
    for (g0, res) in thresholds.iter().zip(&results) {
        if let Err(e) = res {
            eprintln!("g_eff0 = {g0}: {e}");
            failed += 1;
        }
        writeln!(out, "{}", optimize_row(*g0, res))?;
    }
    out.flush()?;
    if failed > 0 {
        return Err(CliError::NotConverged(failed));
    }
    Ok(vec![path])
}

pub fn wigner(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    for sel in &cfg.branches {
        let (grid, name) = match *sel {
            BranchSel::Input => (
                wigner_coherent(cfg.scheme.alpha, &cfg.grid)?,
                "wigner_input.csv".to_string(),
            ),
            BranchSel::State(k) => {
                let outcome = TABLE_ORDER[k - 1];
                let branch = run_branch(&cfg.scheme, outcome)?;
                let Some(out) = &branch.output else {
                    return Err(CliError::ZeroProbability(format!(
                        "branch {k} (QND, PD1, PD2) = ({}, {}, {}) has zero probability for this configuration",
                        outcome.qnd, outcome.pd1, outcome.pd2
                    )));
                };
                (
                    wigner_of_state(&out.state, &cfg.grid)?,
                    format!("wigner_branch{k}.csv"),
                )
            }
        };
        let path = cfg.out.join(name);
        grid.export(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct OutcomeJson {
    qnd: usize,
    pd1: usize,
    pd2: usize,
}

#[derive(Serialize)]
struct BranchJson {
    state: usize,
    outcome: OutcomeJson,
    probability: f64,
    defined: bool,
    mean_a: Option<[f64; 2]>,
    mean_a_abs: Option<f64>,
    mean_n: Option<f64>,
    g_eff: Option<f64>,
    fidelity_eff: Option<f64>,
    fidelity_ideal: Option<f64>,
    fidelity_matched: Option<f64>,
    coherence_deviation: Option<f64>,
}

#[derive(Serialize)]
struct ConfigJson {
    alpha: [f64; 2],
    r: [f64; 3],
    dim: usize,
    etas: [f64; 3],
}

#[derive(Serialize)]
struct BranchesJson {
    config: ConfigJson,
    branches: Vec<BranchJson>,
    other_probability: f64,
}

pub fn branches(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let s = &cfg.scheme;
    let table = enumerate_single_photon_branches(s)?;
    let mut rows = Vec::with_capacity(8);
    for (k, b) in table.branches.iter().enumerate() {
        let o = b.output.as_ref();
        let coherence = match o {
            Some(_) => Some(coherence_check(b, s)?),
            None => None,
        };
        rows.push(BranchJson {
            state: k + 1,
            outcome: OutcomeJson {
                qnd: b.outcome.qnd,
                pd1: b.outcome.pd1,
                pd2: b.outcome.pd2,
            },
            probability: b.probability,
            defined: o.is_some(),
            mean_a: o.map(|o| [o.mean_a.re, o.mean_a.im]),
            mean_a_abs: o.map(|o| o.mean_a_abs),
            mean_n: o.map(|o| o.mean_n),
            g_eff: o.map(|o| o.g_eff).filter(|g| g.is_finite()),
            fidelity_eff: o.map(|o| o.fidelity_eff),
            fidelity_ideal: o.map(|o| o.fidelity_ideal),
            fidelity_matched: o.map(|o| o.fidelity_matched),
            coherence_deviation: coherence,
        });
    }
    let doc = BranchesJson {
        config: ConfigJson {
            alpha: [s.alpha.re, s.alpha.im],
            r: s.r,
            dim: s.dim,
            etas: s.etas,
        },
        branches: rows,
        other_probability: table.other_probability,
    };
    let (path, mut out) = create(&cfg.out, "branches.json")?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(vec![path])
}
