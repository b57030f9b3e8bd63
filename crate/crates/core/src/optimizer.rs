//! Gain-constrained maximization of the success probability.
//!
//! Solves `max P_succ(|α|, r₁, r₂, r₃)` subject to `g_eff ≥ g_eff0` inside the
//! box `|α| ∈ (0, 2]`, `r_i ∈ [1e-6, 0.9]`, using the closed forms from
//! [`crate::analytic`]. The constraint is handled by a logarithmic barrier:
//! for a decreasing sequence `μ_k = μ₀ ρ^k` the unconstrained function
//!
//! ```text
//! φ_μ(v) = ln P_succ(v) + μ ln(g_eff(v) − g_eff0)
//! ```
//!
//! is maximized, each stage starting from the previous stage's optimum. The
//! inner solver is a compass (coordinate pattern) search with a shrinking
//! step, followed by a Newton polish whose gradient and Hessian come from
//! central differences of `ln P_succ` and `g_eff` individually; the barrier
//! derivatives are assembled from those by the chain rule, so the polish
//! stays well conditioned as the iterate approaches the constraint.
//!
//! Several starts are run and the best is kept under a total order, so the
//! result does not depend on how the starts are scheduled.

use std::cmp::Ordering;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::analytic::{g_eff_closed, p_succ_closed, SplitterTriple};
use crate::error::{Error, Result};
use crate::scheme::{run_branch, Outcome, SchemeConfig};

pub const ALPHA_MIN: f64 = 1e-6;
pub const ALPHA_MAX: f64 = 2.0;
pub const R_MIN: f64 = 1e-6;
pub const R_MAX: f64 = 0.9;

/// Gain floor and box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptProblem {
    pub g_eff0: f64,
    pub alpha_bounds: (f64, f64),
    pub r_bounds: (f64, f64),
}

impl OptProblem {
    pub fn new(g_eff0: f64) -> Result<Self> {
        if !(g_eff0 > 1.0 && g_eff0 < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "gain threshold must lie in (1, 2), got {g_eff0}"
            )));
        }
        Ok(Self {
            g_eff0,
            alpha_bounds: (ALPHA_MIN, ALPHA_MAX),
            r_bounds: (R_MIN, R_MAX),
        })
    }
}

/// Barrier schedule, inner-solver limits and start list.
#[derive(Clone, Debug, PartialEq)]
pub struct OptSettings {
    pub mu0: f64,
    pub mu_factor: f64,
    pub stages: usize,
    pub step0: f64,
    pub step_floor: f64,
    /// Objective evaluations allowed per compass search.
    pub max_evals: usize,
    /// Newton iterations per stage; 0 disables the polish.
    pub polish_iters: usize,
    /// Relative drop in `P_succ` between stages tolerated by the
    /// monotonicity check.
    pub monotone_tol: f64,
    /// Symmetric starts `(|α|, r)`.
    pub starts: Vec<(f64, f64)>,
}

impl Default for OptSettings {
    fn default() -> Self {
        let mut starts = Vec::with_capacity(9);
        for a in [0.2, 0.5, 0.8] {
            for r in [0.1, 0.3, 0.45] {
                starts.push((a, r));
            }
        }
        Self {
            mu0: 10.0,
            mu_factor: 0.2,
            stages: 10,
            step0: 0.1,
            step_floor: 1e-9,
            max_evals: 2_000_000,
            polish_iters: 30,
            monotone_tol: 1e-9,
            starts,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub g_eff0: f64,
    pub p_opt: f64,
    pub alpha_opt: f64,
    pub r_opt: [f64; 3],
    /// Success-branch fidelity against `|g_eff α⟩` at the optimum, from the
    /// simulator.
    pub f_opt: f64,
    /// Gain reached at the optimum.
    pub g_eff: f64,
    /// `g_eff − g_eff0`.
    pub slack: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `(μ, P_succ)` after each barrier stage.
    pub barrier_trace: Vec<(f64, f64)>,
}

/// Variables are `[|α|, r₁, r₂, r₃]` or, for the symmetric problem, `[|α|, r]`.
fn unpack(v: &[f64]) -> (f64, SplitterTriple) {
    let r = if v.len() == 2 {
        [v[1]; 3]
    } else {
        [v[1], v[2], v[3]]
    };
    // the box keeps r inside [0, 1); finite differences may step just past it
    (v[0], SplitterTriple { r })
}

fn ln_p(v: &[f64]) -> f64 {
    let (a, s) = unpack(v);
    p_succ_closed(a, &s).ln()
}

fn gain(v: &[f64]) -> f64 {
    let (a, s) = unpack(v);
    g_eff_closed(a, &s)
}

struct Barrier<'a> {
    problem: &'a OptProblem,
    mu: f64,
}

impl Barrier<'_> {
    fn in_box(&self, v: &[f64]) -> bool {
        let (alo, ahi) = self.problem.alpha_bounds;
        let (rlo, rhi) = self.problem.r_bounds;
        (alo..=ahi).contains(&v[0]) && v[1..].iter().all(|r| (rlo..=rhi).contains(r))
    }

    fn clip(&self, v: &mut [f64]) {
        let (alo, ahi) = self.problem.alpha_bounds;
        let (rlo, rhi) = self.problem.r_bounds;
        v[0] = v[0].clamp(alo, ahi);
        for r in &mut v[1..] {
            *r = r.clamp(rlo, rhi);
        }
    }

    /// `φ_μ`, or −∞ outside the feasible interior.
    fn value(&self, v: &[f64]) -> f64 {
        if !self.in_box(v) {
            return f64::NEG_INFINITY;
        }
        let slack = gain(v) - self.problem.g_eff0;
        if !(slack > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lp = ln_p(v);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        lp + self.mu * slack.ln()
    }
}

/// Central-difference gradient and Hessian.
fn fd_derivatives(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let f0 = f(x);
    let mut grad = vec![0.0; n];
    let mut hess = vec![vec![0.0; n]; n];
    let shifted = |pairs: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, d) in pairs {
            y[i] += d;
        }
        f(&y)
    };
    for i in 0..n {
        let fp = shifted(&[(i, h)]);
        let fm = shifted(&[(i, -h)]);
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let v = (shifted(&[(i, h), (j, h)])
                - shifted(&[(i, h), (j, -h)])
                - shifted(&[(i, -h), (j, h)])
                + shifted(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    (grad, hess)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

struct Inner {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    /// Step reached the floor before the evaluation cap.
    settled: bool,
}

/// Coordinate pattern search, maximizing. The step doubles (up to `step0`)
/// after a successful poll and halves after a failed one.
fn compass_search(b: &Barrier, x0: &[f64], settings: &OptSettings) -> Inner {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = b.value(&x);
    let mut step = settings.step0;
    let mut evals = 1;
    let mut polls = 0;
    while step >= settings.step_floor && evals < settings.max_evals {
        polls += 1;
        let mut moved = false;
        'poll: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                b.clip(&mut y);
                if y == x {
                    continue;
                }
                let fy = b.value(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break 'poll;
                }
            }
        }
        step = if moved {
            (2.0 * step).min(settings.step0)
        } else {
            0.5 * step
        };
    }
    Inner {
        x,
        value: fx,
        iterations: polls,
        settled: step < settings.step_floor,
    }
}

/// Damped Newton steps on `φ_μ` from finite-difference derivatives of
/// `ln P` and `g_eff`.
fn newton_polish(b: &Barrier, start: Inner, iters: usize) -> Inner {
    const H: f64 = 1e-4;
    let Inner {
        mut x,
        value: mut fx,
        mut iterations,
        settled,
    } = start;
    for _ in 0..iters {
        let slack = gain(&x) - b.problem.g_eff0;
        let (gl, hl) = fd_derivatives(ln_p, &x, H);
        let (gg, hg) = fd_derivatives(gain, &x, H);
        let n = x.len();
        let grad: Vec<f64> = (0..n).map(|i| gl[i] + b.mu * gg[i] / slack).collect();
        let hess: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| hl[i][j] + b.mu * (hg[i][j] / slack - gg[i] * gg[j] / (slack * slack)))
                    .collect()
            })
            .collect();
        let Some(step) = solve(hess, grad.iter().map(|g| -g).collect()) else {
            break;
        };
        // ascent direction only
        let slope: f64 = step.iter().zip(&grad).map(|(s, g)| s * g).sum();
        if !(slope > 0.0) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut y: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            b.clip(&mut y);
            let fy = b.value(&y);
            if fy > fx {
                let moved = y
                    .iter()
                    .zip(&x)
                    .map(|(a, c)| (a - c).abs())
                    .fold(0.0, f64::max);
                x = y;
                fx = fy;
                accepted = true;
                iterations += 1;
                if moved < 1e-13 {
                    return Inner {
                        x,
                        value: fx,
                        iterations,
                        settled,
                    };
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Inner {
        x,
        value: fx,
        iterations,
        settled,
    }
}

/// Moves an infeasible start toward the `(α → 0, r → 0)` corner, where the
/// gain approaches 2, until the constraint holds strictly.
fn restore_feasibility(problem: &OptProblem, mut v: Vec<f64>) -> Option<Vec<f64>> {
    let b = Barrier { problem, mu: 1.0 };
    b.clip(&mut v);
    for _ in 0..80 {
        if b.value(&v).is_finite() {
            return Some(v);
        }
        v.iter_mut().for_each(|x| *x *= 0.5);
        b.clip(&mut v);
    }
    None
}

struct Run {
    x: Vec<f64>,
    trace: Vec<(f64, f64)>,
    iterations: usize,
    converged: bool,
}

fn barrier_run(problem: &OptProblem, settings: &OptSettings, start: Vec<f64>) -> Run {
    let mut x = start;
    let mut trace = Vec::with_capacity(settings.stages);
    let mut iterations = 0;
    let mut settled = true;
    for k in 0..settings.stages {
        let mu = settings.mu0 * settings.mu_factor.powi(k as i32);
        let b = Barrier { problem, mu };
        let mut inner = compass_search(&b, &x, settings);
        if settings.polish_iters > 0 {
            inner = newton_polish(&b, inner, settings.polish_iters);
        }
        iterations += inner.iterations;
        settled &= inner.settled && inner.value.is_finite();
        x = inner.x;
        let (a, s) = unpack(&x);
        trace.push((mu, p_succ_closed(a, &s)));
    }
    let monotone = trace
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 * (1.0 - settings.monotone_tol));
    Run {
        x,
        trace,
        iterations,
        converged: settled && monotone,
    }
}

/// Converged runs first, then larger `P_succ`, then lexicographically
/// smaller parameters.
fn better(a: &Run, b: &Run) -> Ordering {
    let pa = a.trace.last().map_or(f64::NEG_INFINITY, |t| t.1);
    let pb = b.trace.last().map_or(f64::NEG_INFINITY, |t| t.1);
    a.converged
        .cmp(&b.converged)
        .then(pa.total_cmp(&pb))
        .then_with(|| {
            b.x.iter()
                .zip(&a.x)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
}

fn optimize(
    problem: &OptProblem,
    settings: &OptSettings,
    symmetric: bool,
    extra: &[Vec<f64>],
) -> Result<OptResult> {
    let expand = |a: f64, r: f64| {
        if symmetric {
            vec![a, r]
        } else {
            vec![a, r, r, r]
        }
    };
    let mut starts: Vec<Vec<f64>> = extra.to_vec();
    starts.extend(settings.starts.iter().map(|&(a, r)| expand(a, r)));
    let starts: Vec<Vec<f64>> = starts
        .into_iter()
        .filter_map(|s| restore_feasibility(problem, s))
        .collect();
    if starts.is_empty() {
        return Err(Error::Infeasible {
            g_eff0: problem.g_eff0,
        });
    }

    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|s| barrier_run(problem, settings, s))
        .collect();
    let best = runs.into_iter().max_by(better).expect("at least one start");
    if !best.converged {
        return Err(Error::NotConverged(format!(
            "no start converged for g_eff0 = {}",
            problem.g_eff0
        )));
    }

    let (alpha, s) = unpack(&best.x);
    let g = g_eff_closed(alpha, &s);
    let cfg = SchemeConfig::new(C64::new(alpha, 0.0), s.r[0])?.with_reflectivities(s.r)?;
    let f_opt = run_branch(&cfg, Outcome::SUCCESS)?.output()?.fidelity_eff;
    Ok(OptResult {
        g_eff0: problem.g_eff0,
        p_opt: p_succ_closed(alpha, &s),
        alpha_opt: alpha,
        r_opt: s.r,
        f_opt,
        g_eff: g,
        slack: g - problem.g_eff0,
        converged: best.converged,
        iterations: best.iterations,
        barrier_trace: best.trace,
    })
}

/// Four-variable solve over `(|α|, r₁, r₂, r₃)`.
pub fn maximize(problem: &OptProblem, settings: &OptSettings) -> Result<OptResult> {
    optimize(problem, settings, false, &[])
}

/// Same problem restricted to `r₁ = r₂ = r₃`.
pub fn maximize_symmetric(problem: &OptProblem, settings: &OptSettings) -> Result<OptResult> {
    optimize(problem, settings, true, &[])
}

/// Four-variable solve with additional starting points `[|α|, r₁, r₂, r₃]`.
pub fn maximize_from(
    problem: &OptProblem,
    settings: &OptSettings,
    extra_starts: &[[f64; 4]],
) -> Result<OptResult> {
    let extra: Vec<Vec<f64>> = extra_starts.iter().map(|s| s.to_vec()).collect();
    optimize(problem, settings, false, &extra)
}

/// One solve per threshold, each warm-started from the previous optimum.
/// `g_eff0_list` must be ascending; failures are kept in place.
pub fn sweep(g_eff0_list: &[f64], settings: &OptSettings) -> Result<Vec<Result<OptResult>>> {
    if g_eff0_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "thresholds must be strictly ascending".into(),
        ));
    }
    let mut out = Vec::with_capacity(g_eff0_list.len());
    let mut warm: Option<[f64; 4]> = None;
    for &g0 in g_eff0_list {
        let res = OptProblem::new(g0).and_then(|p| {
            let extra: Vec<[f64; 4]> = warm.into_iter().collect();
            maximize_from(&p, settings, &extra)
        });
        if let Ok(r) = &res {
            warm = Some([r.alpha_opt, r.r_opt[0], r.r_opt[1], r.r_opt[2]]);
        }
        out.push(res);
    }
    Ok(out)
}

/// Thresholds `[lo, hi]` every `step`, rounded to 1e-9 to keep grid values
/// exact in output files.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidParameter(format!(
            "bad threshold range {lo}..{hi} step {step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Adds `0.01`-spaced thresholds within `±0.04` of the coarse maximum of
/// `r_opt` and the coarse minimum of `f_opt`, merged and sorted.
pub fn refined_thresholds(coarse: &[f64], results: &[Result<OptResult>]) -> Vec<f64> {
    let ok: Vec<&OptResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let mut all = coarse.to_vec();
    let r_peak = ok
        .iter()
        .max_by(|a, b| a.r_opt[0].total_cmp(&b.r_opt[0]))
        .map(|r| r.g_eff0);
    let f_dip = ok
        .iter()
        .min_by(|a, b| a.f_opt.total_cmp(&b.f_opt))
        .map(|r| r.g_eff0);
    for center in [r_peak, f_dip].into_iter().flatten() {
        for k in -4i32..=4 {
            let g = ((center + 0.01 * k as f64) * 1e9).round() / 1e9;
            if g > 1.0 && g < 2.0 {
                all.push(g);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    all
}

/// Largest pairwise `|r_i − r_j|`.
pub fn verify_symmetry(result: &OptResult) -> f64 {
    let r = result.r_opt;
    (r[0] - r[1])
        .abs()
        .max((r[0] - r[2]).abs())
        .max((r[1] - r[2]).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_solver() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(a, vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn finite_differences_on_quadratic() {
        let f = |v: &[f64]| 3.0 * v[0] * v[0] + v[0] * v[1] - 2.0 * v[1] * v[1] + v[1];
        let (g, h) = fd_derivatives(f, &[0.5, -1.0], 1e-4);
        assert!((g[0] - 2.0).abs() < 1e-8);
        assert!((g[1] - 5.5).abs() < 1e-8);
        assert!((h[0][0] - 6.0).abs() < 1e-5);
        assert!((h[0][1] - 1.0).abs() < 1e-5);
        assert!((h[1][1] + 4.0).abs() < 1e-5);
    }

    #[test]
    fn compass_search_finds_interior_maximum() {
        // with a loose threshold the barrier pulls toward the constraint;
        // here just check the inner solver climbs
        let problem = OptProblem::new(1.4).unwrap();
        let b = Barrier {
            problem: &problem,
            mu: 1.0,
        };
        let start = vec![0.3, 0.2, 0.2, 0.2];
        let f0 = b.value(&start);
        let inner = compass_search(&b, &start, &OptSettings::default());
        assert!(inner.value > f0);
        assert!(inner.settled);
    }

    #[test]
    fn infeasible_starts_are_restored() {
        let problem = OptProblem::new(1.95).unwrap();
        let v = restore_feasibility(&problem, vec![0.8, 0.45, 0.45, 0.45]).unwrap();
        assert!(gain(&v) > 1.95);
    }

    #[test]
    fn threshold_range() {
        assert!(OptProblem::new(1.0).is_err());
        assert!(OptProblem::new(2.0).is_err());
        let g = threshold_grid(1.05, 1.95, 0.05).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], 1.05);
        assert_eq!(g[18], 1.95);
        assert!(threshold_grid(1.0, 1.5, 0.0).is_err());
        assert!(sweep(&[1.3, 1.2], &OptSettings::default()).is_err());
    }
}
