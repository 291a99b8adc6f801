//! Sampled amoeba of the discriminant locus of a trinomial system.
//!
//! A point `ρ ∈ ℝⁿ` is tested by solving the critical system
//! `{P(x, y) = 0, det ∂P/∂y = 0, Log|x| = ρ}`. With `w = log y` and
//! `Yᵢ = y^ω⁽ⁱ⁾`, the equations `Pᵢ = 0` give `xᵢ = (1 − Yᵢ) y^{−σ⁽ⁱ⁾}`, and the
//! rescaled Jacobian `M_{ij} = σ_{ji} + (ω_{ji} − σ_{ji}) Yᵢ` is singular exactly
//! where `∂P/∂y` is. The residual in `w` is minimized by Levenberg–Marquardt
//! from random starts.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::systems::TrinomialSystem;

const MAX_ITERATIONS: usize = 80;

#[derive(Clone, Debug)]
pub struct AmoebaOptions {
    pub attempts: usize,
    pub tol: f64,
    pub seed: u64,
    /// Starting points have `|Re wⱼ| ≤ start_radius`.
    pub start_radius: f64,
}

impl Default for AmoebaOptions {
    fn default() -> Self {
        Self {
            attempts: 40,
            tol: 1e-8,
            seed: 0,
            start_radius: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Fraction of starts that reached the critical set.
    pub score: f64,
}

struct Critical<'a> {
    system: &'a TrinomialSystem,
    rho: &'a [f64],
    half_width: f64,
}

impl Critical<'_> {
    fn n(&self) -> usize {
        self.system.n()
    }

    fn y_powers(&self, w: &[Complex64]) -> Vec<Complex64> {
        (0..self.n())
            .map(|i| {
                let e: Complex64 = (0..self.n()).map(|k| w[k] * self.system.omega_f64(k, i)).sum();
                e.exp()
            })
            .collect()
    }

    fn matrix(&self, y: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            let s = self.system.sigma_f64(j, i);
            Complex64::new(s, 0.0) + y[i] * (self.system.omega_f64(j, i) - s)
        })
    }

    /// Real residual vector and its Jacobian in `(Re w, Im w)`.
    fn evaluate(&self, w: &[Complex64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n();
        let y = self.y_powers(w);
        if y.iter().any(|v| !v.is_finite() || (Complex64::new(1.0, 0.0) - v).norm() < 1e-300) {
            return None;
        }
        let m = self.matrix(&y);
        let det = m.determinant();
        // holomorphic derivatives of det M and of gᵢ = log(1 − Yᵢ) − ⟨σ⁽ⁱ⁾, w⟩
        let mut det_grad = vec![Complex64::new(0.0, 0.0); n];
        for (k, grad) in det_grad.iter_mut().enumerate() {
            for i in 0..n {
                let mut mi = m.clone();
                for j in 0..n {
                    mi[(i, j)] = y[i] * (self.system.omega_f64(j, i) - self.system.sigma_f64(j, i)) * self.system.omega_f64(k, i);
                }
                *grad += mi.determinant();
            }
        }
        let rows = 2 + n;
        let mut r = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, 2 * n);
        let put = |row: usize, value: Complex64, grad: &[Complex64], r: &mut DVector<f64>, jac: &mut DMatrix<f64>, real: bool| {
            r[row] = if real { value.re } else { value.im };
            for k in 0..n {
                let (u, v) = (grad[k].re, grad[k].im);
                if real {
                    jac[(row, k)] = u;
                    jac[(row, n + k)] = -v;
                } else {
                    jac[(row, k)] = v;
                    jac[(row, n + k)] = u;
                }
            }
        };
        put(0, det, &det_grad, &mut r, &mut jac, true);
        put(1, det, &det_grad, &mut r, &mut jac, false);
        for i in 0..n {
            let one_minus = Complex64::new(1.0, 0.0) - y[i];
            let log_abs_x = one_minus.norm().ln() - (0..n).map(|k| w[k].re * self.system.sigma_f64(k, i)).sum::<f64>();
            let grad: Vec<Complex64> = (0..n)
                .map(|k| -y[i] * self.system.omega_f64(k, i) / one_minus - self.system.sigma_f64(k, i))
                .collect();
            let offset = log_abs_x - self.rho[i];
            let excess = offset - offset.clamp(-self.half_width, self.half_width);
            put(2 + i, Complex64::new(excess, 0.0), &grad, &mut r, &mut jac, true);
            if excess == 0.0 {
                jac.row_mut(2 + i).fill(0.0);
            }
        }
        Some((r, jac))
    }

    /// Final residual norm of one Levenberg–Marquardt run.
    fn solve_from(&self, mut w: Vec<Complex64>) -> f64 {
        let n = self.n();
        let Some((mut r, mut jac)) = self.evaluate(&w) else { return f64::INFINITY };
        let mut lambda = 1e-3;
        for _ in 0..MAX_ITERATIONS {
            let norm = r.norm();
            if norm < 1e-14 {
                break;
            }
            let jt = jac.transpose();
            let g = &jt * &r;
            let mut a = &jt * &jac;
            for k in 0..2 * n {
                a[(k, k)] += lambda * (1.0 + a[(k, k)]);
            }
            let Some(step) = a.lu().solve(&(-g)) else { break };
            let trial: Vec<Complex64> = (0..n).map(|k| w[k] + Complex64::new(step[k], step[n + k])).collect();
            match self.evaluate(&trial) {
                Some((tr, tj)) if tr.norm() < norm => {
                    w = trial;
                    r = tr;
                    jac = tj;
                    lambda = (lambda * 0.3).max(1e-12);
                    if step.norm() < 1e-15 {
                        break;
                    }
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        break;
                    }
                }
            }
        }
        r.norm()
    }
}

fn run(system: &TrinomialSystem, rho: &[f64], half_width: f64, options: &AmoebaOptions, stream: u64) -> Membership {
    let problem = Critical { system, rho, half_width };
    let n = system.n();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(stream);
    let mut hits = 0usize;
    for _ in 0..options.attempts {
        let w: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.gen_range(-options.start_radius..=options.start_radius),
                    rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                )
            })
            .collect();
        if problem.solve_from(w) < options.tol {
            hits += 1;
        }
    }
    let score = if options.attempts == 0 { 0.0 } else { hits as f64 / options.attempts as f64 };
    Membership { member: hits > 0, score }
}

/// Does the discriminant amoeba contain `rho`?
pub fn amoeba_membership(system: &TrinomialSystem, rho: &[f64], options: &AmoebaOptions) -> Result<Membership> {
    if rho.len() != system.n() {
        return Err(Error::DimensionMismatch { expected: system.n(), got: rho.len() });
    }
    Ok(run(system, rho, 0.0, options, 0))
}

/// Axis-aligned grid in `Log|x|` coordinates; cells of side `resolution`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: f64,
}

impl GridSpec {
    pub fn square(n: usize, half_width: f64, resolution: f64) -> Self {
        Self {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
            resolution,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| {
                if b > a {
                    ((b - a) / self.resolution).round().max(1.0) as usize
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Cells in row-major order (last axis fastest).
#[derive(Clone, Debug)]
pub struct AmoebaGrid {
    pub spec: GridSpec,
    pub shape: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub members: Vec<bool>,
    pub scores: Vec<f64>,
}

impl AmoebaGrid {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Rows `rho1,…,rhon,member,score`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let n = self.spec.lower.len();
        let mut header: Vec<String> = (1..=n).map(|i| format!("rho{i}")).collect();
        header.push("member".into());
        header.push("score".into());
        writeln!(out, "{}", header.join(","))?;
        for ((c, m), s) in self.centers.iter().zip(&self.members).zip(&self.scores) {
            let coords: Vec<String> = c.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "{},{},{s:.4}", coords.join(","), u8::from(*m))?;
        }
        Ok(())
    }

    fn neighbours(&self, cell: usize, diagonal: bool) -> Vec<usize> {
        let n = self.shape.len();
        let mut idx = vec![0usize; n];
        let mut rest = cell;
        for a in (0..n).rev() {
            idx[a] = rest % self.shape[a];
            rest /= self.shape[a];
        }
        let mut out = Vec::new();
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
            .map(|mut c| {
                (0..n)
                    .map(|_| {
                        let v = (c % 3) as i64 - 1;
                        c /= 3;
                        v
                    })
                    .collect()
            })
            .filter(|o: &Vec<i64>| {
                let moved = o.iter().filter(|&&v| v != 0).count();
                moved > 0 && (diagonal || moved == 1)
            })
            .collect();
        for o in offsets {
            let mut flat = 0usize;
            let mut ok = true;
            for a in 0..n {
                let v = idx[a] as i64 + o[a];
                if v < 0 || v >= self.shape[a] as i64 {
                    ok = false;
                    break;
                }
                flat = flat * self.shape[a] + v as usize;
            }
            if ok {
                out.push(flat);
            }
        }
        out
    }

    fn on_border(&self, cell: usize) -> bool {
        let mut rest = cell;
        for a in (0..self.shape.len()).rev() {
            let i = rest % self.shape[a];
            rest /= self.shape[a];
            if i == 0 || i + 1 == self.shape[a] {
                return true;
            }
        }
        false
    }

    /// Connected components of cells with `member == wanted`; returns for each
    /// component whether it touches the grid border.
    fn components(&self, wanted: bool, diagonal: bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.members[start] != wanted {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut border = false;
            while let Some(c) = stack.pop() {
                border |= self.on_border(c);
                for nb in self.neighbours(c, diagonal) {
                    if !seen[nb] && self.members[nb] == wanted {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
            out.push(border);
        }
        out
    }

    /// Number of amoeba components (8-connected in 2-D).
    pub fn amoeba_components(&self) -> usize {
        self.components(true, true).len()
    }

    /// `(all, touching the border)` complement components (4-connected in 2-D).
    pub fn complement_components(&self) -> (usize, usize) {
        let c = self.components(false, false);
        (c.len(), c.iter().filter(|&&b| b).count())
    }
}

/// Scans every cell; a cell is a member when the critical set maps into it.
pub fn amoeba_scan(system: &TrinomialSystem, spec: &GridSpec, options: &AmoebaOptions) -> Result<AmoebaGrid> {
    let n = system.n();
    if n > 2 {
        return Err(Error::InvalidSystem("amoeba scans support n = 1 or n = 2".into()));
    }
    if spec.lower.len() != n || spec.upper.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.lower.len() });
    }
    if spec.resolution.is_nan() || spec.resolution <= 0.0 {
        return Err(Error::InvalidSystem("grid resolution must be positive".into()));
    }
    let shape = spec.shape();
    let total: usize = shape.iter().product();
    let centers: Vec<Vec<f64>> = (0..total)
        .map(|cell| {
            let mut c = vec![0.0; n];
            let mut rest = cell;
            for a in (0..n).rev() {
                let i = rest % shape[a];
                rest /= shape[a];
                c[a] = spec.lower[a] + (i as f64 + 0.5) * spec.resolution;
            }
            c
        })
        .collect();
    let results: Vec<Membership> = centers
        .par_iter()
        .enumerate()
        .map(|(cell, c)| run(system, c, spec.resolution / 2.0, options, cell as u64))
        .collect();
    Ok(AmoebaGrid {
        spec: spec.clone(),
        shape,
        centers,
        members: results.iter().map(|m| m.member).collect(),
        scores: results.iter().map(|m| m.score).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::fixtures::{eq1, quadratic};

    #[test]
    fn univariate_point() {
        let sys = quadratic();
        let opts = AmoebaOptions { attempts: 200, ..Default::default() };
        assert!(amoeba_membership(&sys, &[2f64.ln()], &opts).unwrap().member);
        for rho in [0.0, 2f64.ln() - 0.5, 2f64.ln() + 0.5] {
            let m = amoeba_membership(&sys, &[rho], &opts).unwrap();
            assert!(!m.member && m.score == 0.0, "{rho}");
        }
    }

    #[test]
    fn univariate_scan_brackets_ln2() {
        let spec = GridSpec { lower: vec![-1.0], upper: vec![2.0], resolution: 0.05 };
        let grid = amoeba_scan(&quadratic(), &spec, &AmoebaOptions::default()).unwrap();
        let members: Vec<f64> = grid.centers.iter().zip(&grid.members).filter(|(_, m)| **m).map(|(c, _)| c[0]).collect();
        assert!(!members.is_empty());
        assert!(members.iter().all(|c| (c - 2f64.ln()).abs() <= 0.05), "{members:?}");
    }

    #[test]
    fn empty_grid_has_header_only() {
        let spec = GridSpec { lower: vec![0.0, 0.0], upper: vec![0.0, 0.0], resolution: 0.1 };
        let grid = amoeba_scan(&eq1(), &spec, &AmoebaOptions::default()).unwrap();
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rho1,rho2,member,score\n");
    }

    #[test]
    fn scores_grow_with_tolerance() {
        let sys = eq1();
        let rho = [0.3, -0.2];
        let mut last = 0.0;
        for tol in [1e-12, 1e-8, 1e-4, 1e-1] {
            let opts = AmoebaOptions { tol, attempts: 30, ..Default::default() };
            let m = run(&sys, &rho, 0.05, &opts, 17);
            assert!(m.score >= last);
            last = m.score;
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let spec = GridSpec { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0], resolution: 0.25 };
        let opts = AmoebaOptions { attempts: 10, seed: 5, ..Default::default() };
        let a = amoeba_scan(&eq1(), &spec, &opts).unwrap();
        let b = amoeba_scan(&eq1(), &spec, &opts).unwrap();
        assert_eq!(a.members, b.members);
        assert_eq!(a.scores, b.scores);
    }
}
