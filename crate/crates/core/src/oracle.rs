//! Numerical ground truth: the principal solution `y(x)` (the branch with
//! `y(0) = (1, …, 1)`) by Newton continuation in `w = log y`, plus exact
//! univariate coefficients by Lagrange inversion.

use nalgebra::{DMatrix, DVector};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::systems::{EquationCoefficients, TrinomialSystem};
use crate::taylor::MultiIndex;

pub type ComplexVector = Vec<Complex64>;

const MAX_NEWTON: usize = 8;
const MAX_CONDITION: f64 = 1e12;
const MAX_HALVINGS: u32 = 40;
/// When the step size collapses, a Jacobian this badly conditioned marks the
/// failure as a branch point on the path.
const SUSPECT_CONDITION: f64 = 1e6;
/// Largest corrector move accepted for one step; larger moves risk a jump
/// to another sheet.
const MAX_CORRECTION: f64 = 0.1;

/// A tracked path `x(t)` with the solution at each accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationPath {
    pub target: ComplexVector,
    pub steps: usize,
    pub tolerance: f64,
    pub waypoints: Vec<Waypoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waypoint {
    pub x: ComplexVector,
    pub y: ComplexVector,
    /// `log y`, continuous along the path.
    pub log_y: ComplexVector,
}

impl ContinuationPath {
    pub fn endpoint(&self) -> &Waypoint {
        self.waypoints.last().expect("path has a starting point")
    }
}

fn exponents(system: &TrinomialSystem) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = system.n();
    let col = |f: &dyn Fn(usize, usize) -> f64, i: usize| (0..n).map(|j| f(j, i)).collect::<Vec<_>>();
    (
        (0..n).map(|i| col(&|j, i| system.omega_f64(j, i), i)).collect(),
        (0..n).map(|i| col(&|j, i| system.sigma_f64(j, i), i)).collect(),
    )
}

struct Evaluation {
    /// Residuals divided by the largest term of their equation.
    scaled: DVector<Complex64>,
    raw: Vec<Complex64>,
    jacobian: DMatrix<Complex64>,
}

fn evaluate(
    omega: &[Vec<f64>],
    sigma: &[Vec<f64>],
    coefficients: &[EquationCoefficients],
    w: &[Complex64],
) -> Evaluation {
    let n = w.len();
    let mut scaled = DVector::zeros(n);
    let mut raw = vec![Complex64::zero(); n];
    let mut jacobian = DMatrix::zeros(n, n);
    for i in 0..n {
        let dot = |e: &[f64]| e.iter().zip(w).map(|(a, b)| b * *a).sum::<Complex64>();
        let tw = coefficients[i].omega * dot(&omega[i]).exp();
        let ts = coefficients[i].sigma * dot(&sigma[i]).exp();
        let t0 = coefficients[i].zero;
        let scale = tw.norm().max(ts.norm()).max(t0.norm()).max(f64::MIN_POSITIVE);
        raw[i] = tw + ts + t0;
        scaled[i] = raw[i] / scale;
        for j in 0..n {
            jacobian[(i, j)] = (tw * omega[i][j] + ts * sigma[i][j]) / scale;
        }
    }
    Evaluation { scaled, raw, jacobian }
}

/// `max(σ_max, 1)/σ_min` of the row-scaled Jacobian. Rows are normalized so
/// their terms are at most 1, which makes this meaningful even for `n = 1`.
fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(1.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

enum Newton {
    Converged(ComplexVector),
    Failed,
}

/// Newton in log coordinates from `w`; at most `MAX_NEWTON` iterations.
fn newton(
    omega: &[Vec<f64>],
    sigma: &[Vec<f64>],
    coefficients: &[EquationCoefficients],
    mut w: ComplexVector,
    max_iter: usize,
) -> Newton {
    for _ in 0..max_iter {
        let e = evaluate(omega, sigma, coefficients, &w);
        let Some(delta) = e.jacobian.lu().solve(&e.scaled) else {
            return Newton::Failed;
        };
        let step: Vec<Complex64> = delta.iter().cloned().collect();
        if !step.iter().all(|s| s.is_finite()) {
            return Newton::Failed;
        }
        for (wi, s) in w.iter_mut().zip(&step) {
            *wi -= s;
        }
        if norm(&step) <= 1e-13 * (1.0 + norm(&w)) {
            return Newton::Converged(w);
        }
    }
    Newton::Failed
}

/// Tracks a solution of `a_ω y^ω + a_σ y^σ + a_0 = 0` while the
/// coefficients move along `path(t)`, `t ∈ [0, 1]`, starting from `log y =
/// w0` at `t = 0`. Returns `(t, log y)` at every accepted step.
pub fn track<F>(
    system: &TrinomialSystem,
    path: F,
    w0: ComplexVector,
    steps: usize,
    tolerance: f64,
) -> Result<Vec<(f64, ComplexVector)>>
where
    F: Fn(f64) -> Vec<EquationCoefficients>,
{
    let n = system.n();
    if w0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w0.len(),
        });
    }
    let (omega, sigma) = exponents(system);
    let base = 1.0 / steps.max(1) as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let start = match newton(&omega, &sigma, &path(0.0), w0, MAX_NEWTON) {
        Newton::Converged(w) => w,
        Newton::Failed => return Err(Error::NoConvergence("start point is not a solution".into())),
    };
    out.push((0.0, start));
    let mut t = 0.0;
    let mut h = base;
    let mut halvings: u32 = 0;
    while t < 1.0 {
        let t_next = (t + h).min(1.0);
        let (t_prev, w_prev) = out.last().unwrap().clone();
        // secant predictor
        let predicted: ComplexVector = if out.len() >= 2 {
            let (t_before, w_before) = &out[out.len() - 2];
            let r = (t_next - t_prev) / (t_prev - t_before);
            w_prev.iter().zip(w_before).map(|(a, b)| a + (a - b) * r).collect()
        } else {
            w_prev.clone()
        };
        let coefficients = path(t_next);
        let accepted = match newton(&omega, &sigma, &coefficients, predicted.clone(), MAX_NEWTON) {
            Newton::Converged(w) => {
                let moved: ComplexVector = w.iter().zip(&predicted).map(|(a, b)| a - b).collect();
                if norm(&moved) <= MAX_CORRECTION {
                    Some(w)
                } else {
                    None
                }
            }
            Newton::Failed => None,
        };
        match accepted {
            Some(w) => {
                let e = evaluate(&omega, &sigma, &coefficients, &w);
                let condition = condition_number(&e.jacobian);
                if condition > MAX_CONDITION {
                    return Err(Error::PathSingular { t: t_next, condition });
                }
                if norm(e.scaled.as_slice()) >= tolerance {
                    return Err(Error::NoConvergence(format!("residual too large at t={t_next}")));
                }
                out.push((t_next, w));
                t = t_next;
                halvings = halvings.saturating_sub(1);
                h = (h * 2.0).min(base);
            }
            None => {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    let e = evaluate(&omega, &sigma, &path(t), &w_prev);
                    let condition = condition_number(&e.jacobian);
                    if condition > SUSPECT_CONDITION {
                        return Err(Error::PathSingular { t, condition });
                    }
                    return Err(Error::NoConvergence(format!("step size underflow at t={t}")));
                }
                h /= 2.0;
            }
        }
    }
    Ok(out)
}

fn x_coefficients(x: &[Complex64]) -> Vec<EquationCoefficients> {
    x.iter()
        .map(|&xi| EquationCoefficients {
            omega: Complex64::one(),
            sigma: xi,
            zero: -Complex64::one(),
        })
        .collect()
}

/// Continuation from `x = 0` through the given vertices (piecewise linear).
pub fn continue_along(
    system: &TrinomialSystem,
    vertices: &[ComplexVector],
    steps: usize,
    tolerance: f64,
) -> Result<ContinuationPath> {
    let n = system.n();
    if let Some(v) = vertices.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let mut waypoints = vec![Waypoint {
        x: vec![Complex64::zero(); n],
        y: vec![Complex64::one(); n],
        log_y: vec![Complex64::zero(); n],
    }];
    let mut from = vec![Complex64::zero(); n];
    for to in vertices {
        let w0 = waypoints.last().unwrap().log_y.clone();
        let segment = |t: f64| -> ComplexVector { from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect() };
        let tracked = track(system, |t| x_coefficients(&segment(t)), w0, steps, tolerance)?;
        for (t, w) in tracked.into_iter().skip(1) {
            waypoints.push(Waypoint {
                x: segment(t),
                y: w.iter().map(|v| v.exp()).collect(),
                log_y: w,
            });
        }
        from = to.clone();
    }
    let target = vertices.last().cloned().unwrap_or_else(|| vec![Complex64::zero(); n]);
    let end = waypoints.last().unwrap();
    let residual = norm(&system.residuals(&end.x, &end.y));
    if residual >= tolerance {
        return Err(Error::NoConvergence(format!("final residual {residual:e}")));
    }
    Ok(ContinuationPath {
        target,
        steps,
        tolerance,
        waypoints,
    })
}

/// Continuation along the straight segment from `0` to `x`.
pub fn principal_path(system: &TrinomialSystem, x: &[Complex64], steps: usize, tolerance: f64) -> Result<ContinuationPath> {
    if x.iter().all(|v| v.is_zero()) {
        let n = system.n();
        return Ok(ContinuationPath {
            target: x.to_vec(),
            steps,
            tolerance,
            waypoints: vec![Waypoint {
                x: x.to_vec(),
                y: vec![Complex64::one(); n],
                log_y: vec![Complex64::zero(); n],
            }],
        });
    }
    continue_along(system, &[x.to_vec()], steps, tolerance)
}

/// The principal solution at `x`, continued along the straight segment.
pub fn principal_solution(system: &TrinomialSystem, x: &[Complex64], steps: usize, tolerance: f64) -> Result<ComplexVector> {
    Ok(principal_path(system, x, steps, tolerance)?.endpoint().y.clone())
}

/// `∏ yᵢ^{dᵢ}` with principal powers.
pub fn monomial_of_solution(y: &[Complex64], d: &[Rational]) -> Result<Complex64> {
    if y.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: d.len(),
        });
    }
    let mut out = Complex64::one();
    for (i, (yi, di)) in y.iter().zip(d).enumerate() {
        if yi.is_zero() {
            return Err(Error::ZeroCoordinate(i));
        }
        out *= match rational::as_i64(di) {
            Some(p) => yi.powi(p as i32),
            None => (yi.ln() * rational::to_f64(di)).exp(),
        };
    }
    Ok(out)
}

/// `exp⟨d, log y⟩`, the monomial continued along a tracked path.
pub fn monomial_from_log(log_y: &[Complex64], d: &[Rational]) -> Complex64 {
    log_y.iter().zip(d).map(|(l, e)| l * rational::to_f64(e)).sum::<Complex64>().exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceMethod {
    /// Richardson-extrapolated central differences with base step `h`.
    FiniteDifference { step: f64 },
    /// Exact Lagrange inversion, `n = 1` only.
    Lagrange,
}

impl Default for ReferenceMethod {
    fn default() -> Self {
        ReferenceMethod::FiniteDifference { step: 1e-3 }
    }
}

/// Taylor coefficient of `y^d` at `x = 0` computed without the series engine.
pub fn reference_coefficient(
    system: &TrinomialSystem,
    d: &[Rational],
    k: &MultiIndex,
    method: ReferenceMethod,
) -> Result<f64> {
    let n = system.n();
    if k.0.len() != n || d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.0.len().min(d.len()),
        });
    }
    match method {
        ReferenceMethod::Lagrange => {
            if n != 1 {
                return Err(Error::InvalidSystem("Lagrange inversion needs n = 1".into()));
            }
            let w = system.omega().get(0, 0).to_i64().unwrap();
            let s = system.sigma().get(0, 0).to_i64().unwrap();
            Ok(rational::to_f64(&lagrange_coefficient(w, s, &d[0], k.0[0])))
        }
        ReferenceMethod::FiniteDifference { step } => {
            if k.degree() == 0 {
                return Ok(1.0);
            }
            let f = |x: &[f64]| -> Result<f64> {
                let xc: ComplexVector = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let path = principal_path(system, &xc, 1, 1e-12)?;
                Ok(monomial_from_log(&path.endpoint().log_y, d).re)
            };
            let diff = |h: f64| -> Result<f64> { central_difference(&f, &k.0, h) };
            // Richardson on h, 2h, 4h (error series in h²).
            let (d1, d2, d4) = (diff(step)?, diff(2.0 * step)?, diff(4.0 * step)?);
            let r1 = (4.0 * d1 - d2) / 3.0;
            let r2 = (4.0 * d2 - d4) / 3.0;
            let derivative = (16.0 * r1 - r2) / 15.0;
            let fact = rational::to_f64(&Rational::from_integer(k.factorial()));
            Ok(derivative / fact)
        }
    }
}

/// Tensor-product central difference `∂^k f(0)` with step `h`.
fn central_difference<F: Fn(&[f64]) -> Result<f64>>(f: &F, k: &[u64], h: f64) -> Result<f64> {
    let n = k.len();
    // per coordinate: nodes (m/2 − i)h with weights (−1)^i C(m, i)
    let stencils: Vec<Vec<(f64, f64)>> = k
        .iter()
        .map(|&m| {
            (0..=m)
                .map(|i| {
                    let binom = rational::to_f64(&Rational::new(
                        rational::factorial(m),
                        rational::factorial(i) * rational::factorial(m - i),
                    ));
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    ((m as f64 / 2.0 - i as f64) * h, sign * binom)
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n).map(|j| stencils[j][idx[j]].0).collect();
        let weight: f64 = (0..n).map(|j| stencils[j][idx[j]].1).product();
        total += weight * f(&x)?;
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < stencils[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    let degree: u64 = k.iter().sum();
    Ok(total / h.powi(degree as i32))
}

/// `[xᵏ] y^d` for `y^ω + x y^σ − 1 = 0`:
/// `(−1)ᵏ d/(ωk) · C(d/ω − 1 + kσ/ω, k − 1)`, and `1` for `k = 0`.
pub fn lagrange_coefficient(omega: i64, sigma: i64, d: &Rational, k: u64) -> Rational {
    if k == 0 {
        return Rational::one();
    }
    let w = Rational::from_integer(BigInt::from(omega));
    let kr = Rational::from_integer(BigInt::from(k));
    let top = d / &w - Rational::one() + &kr * Rational::from_integer(BigInt::from(sigma)) / &w;
    let mut binom = Rational::one();
    for i in 0..k - 1 {
        binom *= &top - Rational::from_integer(BigInt::from(i));
    }
    binom /= Rational::from_integer(rational::factorial(k - 1));
    let value = d / (w * kr) * binom;
    if k % 2 == 1 {
        -value
    } else {
        value
    }
}

/// Newton-polishes `y` at `x` without continuation.
pub fn polish(system: &TrinomialSystem, x: &[Complex64], y: &[Complex64]) -> Result<ComplexVector> {
    let (omega, sigma) = exponents(system);
    let w: ComplexVector = y.iter().map(|v| v.ln()).collect();
    match newton(&omega, &sigma, &x_coefficients(x), w, 50) {
        Newton::Converged(w) => Ok(w.iter().map(|v| v.exp()).collect()),
        Newton::Failed => Err(Error::NoConvergence("polish failed".into())),
    }
}

/// Largest residual `|a_ω y^ω + a_σ y^σ + a_0|` for general coefficients.
pub fn residual(system: &TrinomialSystem, coefficients: &[EquationCoefficients], y: &[Complex64]) -> f64 {
    let (omega, sigma) = exponents(system);
    let w: ComplexVector = y.iter().map(|v| v.ln()).collect();
    norm(&evaluate(&omega, &sigma, coefficients, &w).raw)
}
