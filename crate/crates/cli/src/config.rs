use std::fs;
use std::path::{Path, PathBuf};

use nlamp_core::{Complex64 as C64, GridSpec, OptProblem, SchemeConfig};
use serde::Deserialize;

use crate::error::CliError;

/// One reflectivity shared by all splitters, or one per splitter.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Reflectivity {
    Shared(f64),
    Each([f64; 3]),
}

impl Reflectivity {
    fn triple(&self) -> [f64; 3] {
        match *self {
            Reflectivity::Shared(r) => [r; 3],
            Reflectivity::Each(r) => r,
        }
    }
}

/// The JSON document. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    /// Phase of α in radians.
    pub alpha_phase: Option<f64>,
    pub r: Option<Reflectivity>,
    pub dim: Option<usize>,
    pub eta_qnd: Option<f64>,
    pub eta_pd1: Option<f64>,
    pub eta_pd2: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_points: Option<usize>,
    pub r_values: Option<Vec<f64>>,
    pub geff0_min: Option<f64>,
    pub geff0_max: Option<f64>,
    pub geff0_step: Option<f64>,
    pub refine: Option<bool>,
    /// `"xmin,xmax,pmin,pmax,nx,np"`
    pub grid: Option<String>,
    pub branches: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `top` win.
    pub fn overlay(self, top: FileConfig) -> FileConfig {
        FileConfig {
            alpha: top.alpha.or(self.alpha),
            alpha_phase: top.alpha_phase.or(self.alpha_phase),
            r: top.r.or(self.r),
            dim: top.dim.or(self.dim),
            eta_qnd: top.eta_qnd.or(self.eta_qnd),
            eta_pd1: top.eta_pd1.or(self.eta_pd1),
            eta_pd2: top.eta_pd2.or(self.eta_pd2),
            alpha_min: top.alpha_min.or(self.alpha_min),
            alpha_max: top.alpha_max.or(self.alpha_max),
            alpha_points: top.alpha_points.or(self.alpha_points),
            r_values: top.r_values.or(self.r_values),
            geff0_min: top.geff0_min.or(self.geff0_min),
            geff0_max: top.geff0_max.or(self.geff0_max),
            geff0_step: top.geff0_step.or(self.geff0_step),
            refine: top.refine.or(self.refine),
            grid: top.grid.or(self.grid),
            branches: top.branches.or(self.branches),
            out: top.out.or(self.out),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchSel {
    Input,
    /// Table row, 1-based.
    State(usize),
}

impl std::str::FromStr for BranchSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("input") {
            return Ok(BranchSel::Input);
        }
        match s.parse::<usize>() {
            Ok(k) if (1..=8).contains(&k) => Ok(BranchSel::State(k)),
            _ => Err(format!("branch must be 1..8 or `input`, got {s:?}")),
        }
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let f: Vec<&str> = s.split(',').map(str::trim).collect();
    if f.len() != 6 {
        return Err(format!(
            "grid needs 6 fields xmin,xmax,pmin,pmax,nx,np, got {s:?}"
        ));
    }
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let count = |v: &str| v.parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let spec = GridSpec {
        x_min: num(f[0])?,
        x_max: num(f[1])?,
        p_min: num(f[2])?,
        p_max: num(f[3])?,
        nx: count(f[4])?,
        np: count(f[5])?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Comma-separated list of one or three reflectivities.
pub fn parse_reflectivity(s: &str) -> Result<Reflectivity, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [r] => Ok(Reflectivity::Shared(*r)),
        [a, b, c] => Ok(Reflectivity::Each([*a, *b, *c])),
        _ => Err(format!("expected 1 or 3 reflectivities, got {}", v.len())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub sweep_alphas: Vec<f64>,
    pub r_values: Vec<f64>,
    pub geff0: (f64, f64, f64),
    pub refine: bool,
    pub grid: GridSpec,
    pub branches: Vec<BranchSel>,
    pub out: PathBuf,
}

impl RunConfig {
    /// Fills defaults and validates everything up front.
    pub fn resolve(c: FileConfig) -> Result<Self, CliError> {
        let bad = |e: nlamp_core::Error| CliError::Config(e.to_string());

        let alpha_abs = c.alpha.unwrap_or(0.5);
        if !(alpha_abs >= 0.0 && alpha_abs.is_finite()) {
            return Err(CliError::Config(format!(
                "alpha must be >= 0, got {alpha_abs}"
            )));
        }
        let alpha = C64::from_polar(alpha_abs, c.alpha_phase.unwrap_or(0.0));
        let r = c.r.unwrap_or(Reflectivity::Shared(0.4)).triple();
        let mut scheme = SchemeConfig::new(alpha, r[0])
            .and_then(|s| s.with_reflectivities(r))
            .and_then(|s| {
                s.with_etas([
                    c.eta_qnd.unwrap_or(1.0),
                    c.eta_pd1.unwrap_or(1.0),
                    c.eta_pd2.unwrap_or(1.0),
                ])
            })
            .map_err(bad)?;
        if let Some(d) = c.dim {
            scheme = scheme.with_dim(d).map_err(bad)?;
        }

        let (a_lo, a_hi) = (c.alpha_min.unwrap_or(0.01), c.alpha_max.unwrap_or(2.0));
        let points = c.alpha_points.unwrap_or(200);
        if !(a_lo > 0.0 && a_hi >= a_lo && points >= 1) {
            return Err(CliError::Config(format!(
                "sweep needs 0 < alpha_min <= alpha_max and alpha_points >= 1, got {a_lo}, {a_hi}, {points}"
            )));
        }
        let sweep_alphas = if points == 1 {
            vec![a_lo]
        } else {
            (0..points)
                .map(|k| a_lo + (a_hi - a_lo) * k as f64 / (points - 1) as f64)
                .collect()
        };
        let r_values = c.r_values.unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.3, 0.4]);
        if r_values.is_empty() || r_values.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(CliError::Config(
                "r_values must be non-empty and in [0, 1)".into(),
            ));
        }

        let geff0 = (
            c.geff0_min.unwrap_or(1.05),
            c.geff0_max.unwrap_or(1.95),
            c.geff0_step.unwrap_or(0.05),
        );
        OptProblem::new(geff0.0).map_err(bad)?;
        OptProblem::new(geff0.1).map_err(bad)?;
        if !(geff0.2 > 0.0) || geff0.1 < geff0.0 {
            return Err(CliError::Config(format!(
                "need geff0_min <= geff0_max and geff0_step > 0, got {geff0:?}"
            )));
        }

        let grid = match c.grid {
            Some(s) => parse_grid(&s).map_err(CliError::Config)?,
            None => GridSpec::default(),
        };
        let branches = match c.branches {
            Some(list) => list
                .iter()
                .map(|s| s.parse::<BranchSel>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Config)?,
            None => vec![BranchSel::Input, BranchSel::State(1)],
        };

        Ok(Self {
            scheme,
            sweep_alphas,
            r_values,
            geff0,
            refine: c.refine.unwrap_or(true),
            grid,
            branches,
            out: c.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
