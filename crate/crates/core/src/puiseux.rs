//! Puiseux expansions of `y^d(x)` attached to a reduction: support points
//! `m(k)`, coefficients `c̃ₖ = e^{iπp(k)}cₖ`, and evaluation on an explicit
//! branch.
//!
//! `x^m` means `exp(Σ mⱼ Log xⱼ)` with the principal logarithm. Branch `b`
//! multiplies term `k` by `e^{2πiθ_b(k)}` (see [`Reduction::branch_phase`]);
//! branch 0 is the principal sum.

use std::fmt;
use std::io::Write;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::systems::{check_point, Part, Reduction};
use crate::taylor::{MultiIndex, TaylorSeries};

/// `c̃ₖ = magnitude · e^{iπ·phase}`, with `phase` reduced to `[0, 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuiseuxCoefficient {
    pub magnitude: Rational,
    pub phase: Rational,
}

impl PuiseuxCoefficient {
    pub fn value(&self) -> Complex64 {
        let angle = std::f64::consts::PI * rational::to_f64(&self.phase);
        Complex64::from_polar(1.0, angle) * rational::to_f64(&self.magnitude)
    }

    pub fn is_real(&self) -> bool {
        self.phase.is_zero() || self.phase == Rational::one()
    }
}

impl fmt::Display for PuiseuxCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase.is_zero() {
            write!(f, "{}", rational::format(&self.magnitude))
        } else {
            write!(
                f,
                "{}*exp(i*pi*{})",
                rational::format(&self.magnitude),
                rational::format(&self.phase)
            )
        }
    }
}

fn reduce_phase(p: &Rational) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let q = (p / &two).floor();
    p - q * two
}

/// `m(k)`: `kⱼ` on `J`, `−aₗ(k)` on `L`, `aₜ(k) − kₜ` on `T`, where
/// `a(k) = κ⁻¹d + κ⁻¹β̄k`.
pub fn support_point(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Vec<Rational> {
    let a = reduction.gamma_arguments(d, k.as_slice());
    (0..reduction.n())
        .map(|j| {
            let kj = Rational::from_integer(BigInt::from(k.0[j]));
            match reduction.part(j) {
                Part::J => kj,
                Part::L => -a[j].clone(),
                Part::T => &a[j] - kj,
            }
        })
        .collect()
}

/// The same support point assembled row by row from `Φ`, `Ψ` and `κ⁻¹`.
pub fn support_point_from_blocks(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Vec<Rational> {
    let n = reduction.n();
    let kr = k.as_rationals();
    let (jset, lset, tset) = (
        reduction.indices(Part::J),
        reduction.indices(Part::L),
        reduction.indices(Part::T),
    );
    let partial = |m: &crate::intlinalg::RationalMatrix, row: usize, cols: &[usize]| -> Rational {
        cols.iter().map(|&c| m.get(row, c) * &kr[c]).sum()
    };
    let kd = |row: usize| rational::dot(&reduction.kappa_inv().row(row), d);
    (0..n)
        .map(|j| match reduction.part(j) {
            Part::J => kr[j].clone(),
            Part::L => {
                -partial(reduction.phi(), j, &jset) - partial(reduction.psi(), j, &lset)
                    + partial(reduction.psi(), j, &tset)
                    - kd(j)
            }
            Part::T => {
                partial(reduction.phi(), j, &jset) + partial(reduction.psi(), j, &lset)
                    - partial(reduction.psi(), j, &tset)
                    + kd(j)
            }
        })
        .collect()
}

/// `p(k) = Σ_{t∈T} (kₜ + mₜ(k))`, unreduced.
pub fn phase_exponent(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Rational {
    let m = support_point(reduction, d, k);
    reduction
        .indices(Part::T)
        .into_iter()
        .map(|t| Rational::from_integer(BigInt::from(k.0[t])) + &m[t])
        .sum()
}

pub fn puiseux_coefficient(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Result<PuiseuxCoefficient> {
    let magnitude = crate::taylor::taylor_coefficient(reduction, d, k)?;
    Ok(PuiseuxCoefficient {
        magnitude,
        phase: reduce_phase(&phase_exponent(reduction, d, k)),
    })
}

/// A Puiseux series sharing its coefficient cache with a [`TaylorSeries`].
#[derive(Clone, Debug)]
pub struct PuiseuxSeries {
    taylor: TaylorSeries,
}

impl PuiseuxSeries {
    pub fn new(reduction: Reduction, d: Vec<Rational>) -> Result<Self> {
        Ok(Self {
            taylor: TaylorSeries::new(reduction, d)?,
        })
    }

    pub fn reduction(&self) -> &Reduction {
        self.taylor.reduction()
    }

    pub fn d(&self) -> &[Rational] {
        self.taylor.d()
    }

    pub fn n(&self) -> usize {
        self.taylor.n()
    }

    pub fn taylor(&self) -> &TaylorSeries {
        &self.taylor
    }

    pub fn branch_count(&self) -> usize {
        self.reduction().branch_count()
    }

    pub fn support(&self, k: &MultiIndex) -> Vec<Rational> {
        support_point(self.reduction(), self.d(), k)
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Result<PuiseuxCoefficient> {
        Ok(PuiseuxCoefficient {
            magnitude: self.taylor.coefficient(k)?,
            phase: reduce_phase(&phase_exponent(self.reduction(), self.d(), k)),
        })
    }

    /// `Σ_{|k| ≤ max_degree} c̃ₖ x^{m(k)}` on `branch`, graded-lex order.
    pub fn evaluate(&self, x: &[Complex64], max_degree: u64, branch: usize) -> Result<Complex64> {
        check_point(x, self.n())?;
        self.reduction().branch_digits(branch)?;
        let log_x: Vec<Complex64> = x.iter().map(|v| v.ln()).collect();
        let terms: Vec<Complex64> = MultiIndex::up_to_degree(self.n(), max_degree)
            .into_par_iter()
            .map(|k| {
                let c = rational::to_f64(&self.taylor.coefficient(&k)?);
                if c == 0.0 {
                    return Ok(Complex64::zero());
                }
                let m = self.support(&k);
                let phase = reduce_phase(&phase_exponent(self.reduction(), self.d(), &k));
                let turn = self.reduction().branch_phase(self.d(), k.as_slice(), branch)?;
                let mut log_term: Complex64 = m.iter().zip(&log_x).map(|(mi, l)| l * rational::to_f64(mi)).sum();
                log_term += Complex64::new(
                    0.0,
                    std::f64::consts::PI * (rational::to_f64(&phase) + 2.0 * rational::to_f64(&turn)),
                );
                Ok(log_term.exp() * c)
            })
            .collect::<Result<_>>()?;
        Ok(terms.into_iter().fold(Complex64::zero(), |acc, t| acc + t))
    }

    /// The branch closest to `reference`, with its value and distance.
    pub fn best_branch(&self, x: &[Complex64], max_degree: u64, reference: Complex64) -> Result<(usize, Complex64, f64)> {
        let mut best: Option<(usize, Complex64, f64)> = None;
        for b in 0..self.branch_count() {
            let v = self.evaluate(x, max_degree, b)?;
            let err = (v - reference).norm();
            if best.is_none_or(|(_, _, e)| err < e) {
                best = Some((b, v, err));
            }
        }
        best.ok_or(Error::BranchOutOfRange { branch: 0, count: 0 })
    }

    /// CSV with columns `k1..kn,m1..mn,magnitude,phase`; the term is
    /// `magnitude · e^{iπ·phase} · x^m`.
    pub fn write_csv<W: Write>(&self, out: &mut W, max_degree: u64) -> Result<()> {
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        let n = self.n();
        let ks: Vec<String> = (1..=n).map(|j| format!("k{j}")).collect();
        let ms: Vec<String> = (1..=n).map(|j| format!("m{j}")).collect();
        writeln!(out, "{},{},magnitude,phase", ks.join(","), ms.join(",")).map_err(io)?;
        for (k, c) in self.taylor.coefficients(max_degree)? {
            let kcol: Vec<String> = k.0.iter().map(|v| v.to_string()).collect();
            let mcol: Vec<String> = self.support(&k).iter().map(rational::format).collect();
            let p = phase_exponent(self.reduction(), self.d(), &k);
            writeln!(
                out,
                "{},{},{},{}",
                kcol.join(","),
                mcol.join(","),
                rational::format(&c),
                rational::format(&p)
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Free-function form of [`PuiseuxSeries::evaluate`].
pub fn evaluate_puiseux(series: &PuiseuxSeries, x: &[Complex64], max_degree: u64, branch: usize) -> Result<Complex64> {
    series.evaluate(x, max_degree, branch)
}
