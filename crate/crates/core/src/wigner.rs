//! Phase-space representation on rectangular quadrature grids.
//!
//! With ħ = κ = 1 the quadratures relate to the mode operator by
//! `â = (x̂ + i p̂)/√2`, a coherent state `|α⟩` is a Gaussian centred at
//! `(√2 Re α, √2 Im α)`, and the overlap of two pure states is
//! `2π ∬ W₁ W₂ dx dp`.
//!
//! Everything here is an independent route to quantities the Fock-space
//! code computes directly, so the two can be checked against each other.
//! Integrals use the trapezoid rule on the grid itself.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockState;

/// Largest Fock dimension the cross-Wigner recurrence is used for.
pub const MAX_KERNEL_DIM: usize = 60;
/// `|W|` on the grid boundary above which moment integrals are refused.
pub const BOUNDARY_LIMIT: f64 = 1e-10;

/// Sampling of the `(x, p)` plane. Both axes include their end points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for GridSpec {
    /// `[-6, 6]²` with 241 points per axis.
    fn default() -> Self {
        Self {
            x_min: -6.0,
            x_max: 6.0,
            p_min: -6.0,
            p_max: 6.0,
            nx: 241,
            np: 241,
        }
    }
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.p_max <= self.p_min {
            return Err(Error::InvalidParameter(format!("bad grid bounds {self:?}")));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::InvalidParameter(
                "grids need at least 2 points per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    /// Trapezoid weight of grid node `(i, j)`.
    fn weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wp = if j == 0 || j == self.np - 1 { 0.5 } else { 1.0 };
        wx * wp * self.dx() * self.dp()
    }
}

/// Values of `W(x_i, p_j)`, stored x-major: `values[i * np + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl WignerGrid {
    /// Evaluates `f(x, p)` on every node, one x-row per task.
    pub fn from_fn<F>(spec: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        spec.validate()?;
        let values: Vec<f64> = (0..spec.nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = spec.x(i);
                let f = &f;
                (0..spec.np).map(move |j| f(x, spec.p(j)))
            })
            .collect();
        Ok(Self {
            spec: *spec,
            values,
        })
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.nx * spec.np {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: spec.nx * spec.np,
            });
        }
        Ok(Self { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    /// Trapezoid-rule `∬ g(x, p) W dx dp`. Summation order is fixed.
    fn integrate_with<T, G>(&self, g: G) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        G: Fn(f64, f64) -> T,
    {
        let s = &self.spec;
        (0..s.nx)
            .flat_map(|i| (0..s.np).map(move |j| (i, j)))
            .map(|(i, j)| g(s.x(i), s.p(j)) * (self.value(i, j) * s.weight(i, j)))
            .sum()
    }

    /// `∬ W dx dp`
    pub fn integral(&self) -> f64 {
        self.integrate_with(|_, _| 1.0)
    }

    /// Largest `|W|` on the four edges.
    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let mut m: f64 = 0.0;
        for i in 0..nx {
            m = m
                .max(self.value(i, 0).abs())
                .max(self.value(i, np - 1).abs());
        }
        for j in 0..np {
            m = m
                .max(self.value(0, j).abs())
                .max(self.value(nx - 1, j).abs());
        }
        m
    }

    /// Grid minimum.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Node closest to the maximum of `W`.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                    if v > best.1 {
                        (k, v)
                    } else {
                        best
                    }
                });
        (self.spec.x(k / self.spec.np), self.spec.p(k % self.spec.np))
    }

    /// Writes the grid as CSV.
    ///
    /// Line 1 holds `x_min,x_max,p_min,p_max,nx,np`; then one `x,p,w` row
    /// per node, x outer, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        let s = &self.spec;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            s.x_min, s.x_max, s.p_min, s.p_max, s.nx, s.np
        )?;
        for i in 0..s.nx {
            let x = s.x(i);
            for j in 0..s.np {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", x, s.p(j), self.value(i, j))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    /// Inverse of [`WignerGrid::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty file".into()))??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!("header has {} fields", fields.len())));
        }
        let float = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        };
        let count = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        };
        let spec = GridSpec {
            x_min: float(fields[0])?,
            x_max: float(fields[1])?,
            p_min: float(fields[2])?,
            p_max: float(fields[3])?,
            nx: count(fields[4])?,
            np: count(fields[5])?,
        };
        spec.validate()?;
        let mut values = Vec::with_capacity(spec.nx * spec.np);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let w = line
                .rsplit(',')
                .next()
                .ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
            values.push(float(w)?);
        }
        Self::from_values(spec, values)
            .map_err(|_| Error::Parse("row count does not match header".into()))
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }
}

/// `W` of `|α⟩`: `(1/π) exp[−(x − √2 Re α)² − (p − √2 Im α)²]`.
pub fn coherent_value(alpha: C64, x: f64, p: f64) -> f64 {
    let dx = x - SQRT_2 * alpha.re;
    let dp = p - SQRT_2 * alpha.im;
    FRAC_1_PI * (-dx * dx - dp * dp).exp()
}

pub fn wigner_coherent(alpha: C64, spec: &GridSpec) -> Result<WignerGrid> {
    WignerGrid::from_fn(spec, |x, p| coherent_value(alpha, x, p))
}

/// `L_n(y)` by the three-term recurrence.
pub fn laguerre(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - y);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - y) * cur - k as f64 * prev;
        prev = cur;
        cur = next / (k + 1) as f64;
    }
    cur
}

/// `W` of `|n⟩`: `((−1)ⁿ/π) e^{−x²−p²} L_n(2x² + 2p²)`.
pub fn fock_value(n: usize, x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * FRAC_1_PI * (-r2).exp() * laguerre(n, 2.0 * r2)
}

pub fn wigner_fock(n: usize, spec: &GridSpec) -> Result<WignerGrid> {
    WignerGrid::from_fn(spec, |x, p| fock_value(n, x, p))
}

/// `W(x, p)` of an arbitrary pure state from its Fock amplitudes.
///
/// Uses the kernel of `|n+k⟩⟨n|`,
/// `((−1)ⁿ/π) √(n!/(n+k)!) (√2 (x − ip))^k e^{−r²} L_n^{(k)}(2r²)`,
/// with the prefactor and the associated Laguerre polynomial both advanced
/// by recurrence in `n` for each off-diagonal `k`.
fn state_value(amps: &[C64], x: f64, p: f64) -> f64 {
    let dim = amps.len();
    let r2 = x * x + p * p;
    let y = 2.0 * r2;
    let z = C64::new(x, -p) * SQRT_2;

    let mut total = 0.0;
    // (√2 z)^k / √k!
    let mut head = C64::new(1.0, 0.0);
    for k in 0..dim {
        if k > 0 {
            head = head * z / (k as f64).sqrt();
        }
        let kf = k as f64;
        let mut pref = head;
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..dim - k {
            if n == 1 {
                l_prev = 1.0;
                l_cur = 1.0 + kf - y;
            } else if n > 1 {
                let nf = (n - 1) as f64;
                let next = ((2.0 * nf + 1.0 + kf - y) * l_cur - (nf + kf) * l_prev) / (nf + 1.0);
                l_prev = l_cur;
                l_cur = next;
            }
            if n > 0 {
                pref *= (n as f64 / (n as f64 + kf)).sqrt();
            }
            let term = amps[n + k] * amps[n].conj() * pref * l_cur;
            if n % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        total += if k == 0 { acc.re } else { 2.0 * acc.re };
    }
    FRAC_1_PI * (-r2).exp() * total
}

/// Wigner function of a (normalized) pure state on `spec`.
pub fn wigner_of_state(state: &FockState, spec: &GridSpec) -> Result<WignerGrid> {
    let amps = state.amps();
    let used = amps
        .iter()
        .rposition(|c| c.norm_sqr() > 1e-30)
        .map_or(1, |k| k + 1);
    if used > MAX_KERNEL_DIM {
        return Err(Error::KernelLimit {
            dim: used,
            max: MAX_KERNEL_DIM,
        });
    }
    let amps = &amps[..used];
    WignerGrid::from_fn(spec, |x, p| state_value(amps, x, p))
}

/// Overlap `2π ∬ W₁ W₂ dx dp`.
pub fn fidelity_grid(w1: &WignerGrid, w2: &WignerGrid) -> Result<f64> {
    if w1.spec != w2.spec {
        return Err(Error::GridMismatch);
    }
    let s = &w1.spec;
    let mut acc = 0.0;
    for i in 0..s.nx {
        for j in 0..s.np {
            acc += s.weight(i, j) * w1.value(i, j) * w2.value(i, j);
        }
    }
    Ok(2.0 * PI * acc)
}

/// `⟨â⟩` from the phase-space correspondence.
///
/// The full integrand is `[(x + ½ i∂_p) + i(p − ½ i∂_x)] W / √2`. Integrating
/// the derivative terms by parts leaves only boundary values, which vanish
/// for a state contained in the grid, so what is computed is
/// `∬ (x + ip)/√2 · W dx dp`. Containment is enforced: the call fails if
/// `|W|` on the boundary exceeds [`BOUNDARY_LIMIT`].
pub fn expect_a_grid(w: &WignerGrid) -> Result<C64> {
    let edge = w.boundary_max();
    if edge > BOUNDARY_LIMIT {
        return Err(Error::BoundaryMass { edge });
    }
    Ok(w.integrate_with(|x, p| C64::new(x, p) / SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn coherent_peak_and_norm() {
        let spec = GridSpec::default();
        let w0 = wigner_coherent(c(0.0), &spec).unwrap();
        assert!((w0.value(120, 120) - FRAC_1_PI).abs() < 1e-15);
        let w = wigner_coherent(c(0.5), &spec).unwrap();
        let (x, p) = w.argmax();
        assert!((x - SQRT_2 * 0.5).abs() <= spec.dx() / 2.0 + 1e-12);
        assert!(p.abs() < 1e-12);
        assert!((w.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn laguerre_low_orders() {
        for &y in &[0.0, 0.3, 1.7, 5.0] {
            assert_eq!(laguerre(0, y), 1.0);
            assert!((laguerre(1, y) - (1.0 - y)).abs() < 1e-15);
            assert!((laguerre(2, y) - (1.0 - 2.0 * y + y * y / 2.0)).abs() < 1e-13);
            let l3 = 1.0 - 3.0 * y + 1.5 * y * y - y * y * y / 6.0;
            assert!((laguerre(3, y) - l3).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_closed_form() {
        let spec = GridSpec::default();
        let f0 = wigner_fock(0, &spec).unwrap();
        let c0 = wigner_coherent(c(0.0), &spec).unwrap();
        for (a, b) in f0.values().iter().zip(c0.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((fock_value(1, 0.0, 0.0) + FRAC_1_PI).abs() < 1e-15);
        let r = 0.5f64.sqrt();
        assert!(fock_value(1, r, 0.0).abs() < 1e-15);
        assert!(fock_value(1, r * 0.6, r * 0.8).abs() < 1e-15);
    }

    #[test]
    fn general_state_reduces_to_closed_forms() {
        let spec = GridSpec::square(6.0, 61);
        let coh = FockState::coherent(c(0.5), 30).unwrap();
        let a = wigner_of_state(&coh, &spec).unwrap();
        let b = wigner_coherent(c(0.5), &spec).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-8);
        }
        for n in 0..6 {
            let a = wigner_of_state(&FockState::fock(n, 10).unwrap(), &spec).unwrap();
            let b = wigner_fock(n, &spec).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        // complex amplitude, off-axis displacement
        let alpha = C64::new(-0.3, 0.9);
        let a = wigner_of_state(&FockState::coherent(alpha, 30).unwrap(), &spec).unwrap();
        let b = wigner_coherent(alpha, &spec).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn kernel_limit() {
        let s = FockState::fock(60, 61).unwrap();
        let err = wigner_of_state(&s, &GridSpec::square(1.0, 3)).unwrap_err();
        assert!(matches!(err, Error::KernelLimit { dim: 61, .. }));
        // trailing zeros do not count
        let s = FockState::fock(3, 80).unwrap();
        assert!(wigner_of_state(&s, &GridSpec::square(1.0, 3)).is_ok());
    }

    #[test]
    fn grid_fidelities() {
        let spec = GridSpec::default();
        let a = wigner_coherent(c(0.5), &spec).unwrap();
        let b = wigner_coherent(c(0.7), &spec).unwrap();
        assert!((fidelity_grid(&a, &a).unwrap() - 1.0).abs() < 1e-6);
        assert!((fidelity_grid(&a, &b).unwrap() - (-0.04f64).exp()).abs() < 1e-6);
        let f0 = wigner_fock(0, &spec).unwrap();
        let f1 = wigner_fock(1, &spec).unwrap();
        assert!(fidelity_grid(&f0, &f1).unwrap().abs() < 1e-6);
        let other = wigner_fock(0, &GridSpec::square(5.0, 241)).unwrap();
        assert!(matches!(
            fidelity_grid(&f0, &other),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn annihilation_moment() {
        let spec = GridSpec::default();
        let a = expect_a_grid(&wigner_coherent(c(0.5), &spec).unwrap()).unwrap();
        assert!((a - c(0.5)).norm() < 1e-6);
        let a = expect_a_grid(&wigner_fock(1, &spec).unwrap()).unwrap();
        assert!(a.norm() < 1e-6);
        let wide = wigner_coherent(c(3.5), &spec).unwrap();
        assert!(matches!(
            expect_a_grid(&wide),
            Err(Error::BoundaryMass { .. })
        ));
    }

    #[test]
    fn lower_bound_and_parity() {
        let spec = GridSpec::default();
        for n in 0..8 {
            let w = wigner_fock(n, &spec).unwrap();
            assert!(w.min_value() >= -FRAC_1_PI - 1e-9);
        }
        let s = FockState::from_amps(vec![c(0.6), C64::new(0.0, 0.48), c(-0.64)]).unwrap();
        let origin = state_value(s.amps(), 0.0, 0.0);
        assert!((PI * origin - s.mean_parity().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn csv_round_trip() {
        let spec = GridSpec::square(1.0, 3);
        let w = wigner_coherent(C64::new(0.1, -0.2), &spec).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 6);
        assert_eq!(header[4], "3");
        assert_eq!(header[5], "3");
        assert_eq!(header[0].parse::<f64>().unwrap(), -1.0);
        assert_eq!(lines.count(), 9);
        let back = WignerGrid::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn csv_rejects_short_files() {
        let text = "-1,1,-1,1,3,3\n0,0,0.1\n";
        assert!(matches!(
            WignerGrid::read_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(WignerGrid::read_csv("".as_bytes()).is_err());
    }
}
