//! Reduced trinomial systems `y^ω⁽ⁱ⁾ + xᵢ y^σ⁽ⁱ⁾ − 1 = 0` and their
//! reductions to systems `rᵢ y^β⁽ⁱ⁾ + y^μ⁽ⁱ⁾ − y^ν⁽ⁱ⁾ = 0`.
//!
//! A reduction is fixed by choosing, for every equation, which two of the
//! three exponents `{ω⁽ⁱ⁾, σ⁽ⁱ⁾, 0}` become `(μ⁽ⁱ⁾, ν⁽ⁱ⁾)`.
//!
//! Fractional powers always use the principal logarithm, and the factors
//! `(−xₜ)` are taken literally as `e^{iπ}·xₜ`. Every other determination is
//! reached through the explicit `branch` index, which enumerates the
//! `|det κ|` values of the matrix radical `g^{κ⁻¹}` via the Smith normal form
//! of `κ`, digit vectors in lexicographic order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::{rational_inverse, smith_normal_form, IntegerMatrix, RationalMatrix, SnfDecomposition};
use crate::rational::{self, Rational};

pub type ComplexVector = Vec<Complex64>;

/// Support data of a reduced trinomial system. Column `i` of `omega` (resp.
/// `sigma`) is the exponent vector `ω⁽ⁱ⁾` (resp. `σ⁽ⁱ⁾`) of equation `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrinomialSystem {
    omega: IntegerMatrix,
    sigma: IntegerMatrix,
}

/// On-disk JSON form; inner lists are columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub omega: Vec<Vec<i64>>,
    pub sigma: Vec<Vec<i64>>,
}

impl TrinomialSystem {
    pub fn new(omega: IntegerMatrix, sigma: IntegerMatrix) -> Result<Self> {
        let n = omega.dim();
        if sigma.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: sigma.dim(),
            });
        }
        if omega.determinant().is_zero() {
            return Err(Error::InvalidSystem("omega is degenerate".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if omega.get(i, j).is_negative() || sigma.get(i, j).is_negative() {
                    return Err(Error::InvalidSystem("exponents must be nonnegative".into()));
                }
            }
        }
        for i in 0..n {
            let w = omega.column(i);
            let s = sigma.column(i);
            let zero = |v: &[BigInt]| v.iter().all(|e| e.is_zero());
            if w == s || zero(&w) || zero(&s) {
                return Err(Error::InvalidSystem(format!(
                    "equation {}: exponents omega, sigma and 0 must be pairwise distinct",
                    i + 1
                )));
            }
        }
        Ok(Self { omega, sigma })
    }

    /// Builds a system from exponent columns.
    pub fn from_columns(omega: &[Vec<i64>], sigma: &[Vec<i64>]) -> Result<Self> {
        let n = omega.len();
        if n == 0 || sigma.len() != n || omega.iter().chain(sigma).any(|c| c.len() != n) {
            return Err(Error::InvalidSystem("omega and sigma must be n x n".into()));
        }
        Self::new(IntegerMatrix::from_columns(omega), IntegerMatrix::from_columns(sigma))
    }

    pub fn n(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &IntegerMatrix {
        &self.omega
    }

    pub fn sigma(&self) -> &IntegerMatrix {
        &self.sigma
    }

    pub fn omega_f64(&self, j: usize, i: usize) -> f64 {
        self.omega.get(j, i).to_f64().unwrap()
    }

    pub fn sigma_f64(&self, j: usize, i: usize) -> f64 {
        self.sigma.get(j, i).to_f64().unwrap()
    }

    /// Residuals `y^ω⁽ⁱ⁾ + xᵢ y^σ⁽ⁱ⁾ − 1`.
    pub fn residuals(&self, x: &[Complex64], y: &[Complex64]) -> ComplexVector {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut yw = Complex64::new(1.0, 0.0);
                let mut ys = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    yw *= y[j].powi(self.omega.get(j, i).to_i32().unwrap());
                    ys *= y[j].powi(self.sigma.get(j, i).to_i32().unwrap());
                }
                yw + x[i] * ys - 1.0
            })
            .collect()
    }

    pub fn to_file(&self) -> SystemFile {
        let cols = |m: &IntegerMatrix| -> Vec<Vec<i64>> {
            m.columns()
                .into_iter()
                .map(|c| c.iter().map(|v| v.to_i64().unwrap()).collect())
                .collect()
        };
        SystemFile {
            n: self.n(),
            omega: cols(&self.omega),
            sigma: cols(&self.sigma),
        }
    }

    pub fn from_file(file: &SystemFile) -> Result<Self> {
        if file.omega.len() != file.n || file.sigma.len() != file.n {
            return Err(Error::InvalidSystem(format!("expected {} columns", file.n)));
        }
        Self::from_columns(&file.omega, &file.sigma)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&file)
    }

    /// Canonical compact JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("system serializes")
    }

    /// The universal coefficients `(a_ω, a_σ, a_0) = (1, xᵢ, −1)` of equation `i`.
    pub fn coefficients_at(&self, x: &[Complex64]) -> Vec<EquationCoefficients> {
        x.iter()
            .map(|&xi| EquationCoefficients {
                omega: Complex64::new(1.0, 0.0),
                sigma: xi,
                zero: Complex64::new(-1.0, 0.0),
            })
            .collect()
    }
}

impl fmt::Display for TrinomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Coefficients of one trinomial `a_ω y^ω + a_σ y^σ + a_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquationCoefficients {
    pub omega: Complex64,
    pub sigma: Complex64,
    pub zero: Complex64,
}

impl EquationCoefficients {
    pub fn get(&self, m: Monomial) -> Complex64 {
        match m {
            Monomial::Omega => self.omega,
            Monomial::Sigma => self.sigma,
            Monomial::Zero => self.zero,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monomial {
    Omega,
    Sigma,
    Zero,
}

/// Which pair `(μ⁽ⁱ⁾, ν⁽ⁱ⁾)` is chosen in equation `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairTag {
    /// `(ω, 0)`; the equation lands in `J`.
    W0,
    /// `(σ, 0)`; the equation lands in `L`.
    S0,
    /// `(ω, σ)`; the equation lands in `T`.
    WS,
}

impl PairTag {
    pub const ALL: [PairTag; 3] = [PairTag::W0, PairTag::S0, PairTag::WS];

    /// `(μ, ν, β)`.
    pub fn roles(self) -> (Monomial, Monomial, Monomial) {
        match self {
            PairTag::W0 => (Monomial::Omega, Monomial::Zero, Monomial::Sigma),
            PairTag::S0 => (Monomial::Sigma, Monomial::Zero, Monomial::Omega),
            PairTag::WS => (Monomial::Omega, Monomial::Sigma, Monomial::Zero),
        }
    }

    pub fn part(self) -> Part {
        match self {
            PairTag::W0 => Part::J,
            PairTag::S0 => Part::L,
            PairTag::WS => Part::T,
        }
    }
}

impl FromStr for PairTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "w0" => Ok(PairTag::W0),
            "s0" => Ok(PairTag::S0),
            "ws" | "sw" => Ok(PairTag::WS),
            other => Err(Error::Parse(format!("unknown pair tag {other:?} (expected w0, s0 or ws)"))),
        }
    }
}

impl fmt::Display for PairTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairTag::W0 => "w0",
            PairTag::S0 => "s0",
            PairTag::WS => "ws",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    J,
    L,
    T,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairSelection(Vec<PairTag>);

impl PairSelection {
    pub fn new(tags: Vec<PairTag>) -> Self {
        Self(tags)
    }

    pub fn uniform(n: usize, tag: PairTag) -> Self {
        Self(vec![tag; n])
    }

    pub fn tags(&self) -> &[PairTag] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `3ⁿ` selections, first equation varying slowest.
    pub fn all(n: usize) -> Vec<PairSelection> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<PairTag>| {
                    PairTag::ALL.iter().map(move |t| {
                        let mut v = prefix.clone();
                        v.push(*t);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(PairSelection).collect()
    }
}

impl FromStr for PairSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(PairSelection)
    }
}

impl fmt::Display for PairSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        f.write_str(&tags.join(","))
    }
}

/// Everything derived from a pair selection: `κ`, `β̄`, the `J/L/T`
/// partition, `Φ = κ⁻¹σ`, `Ψ = κ⁻¹ω`, and the Smith form of `κ`.
#[derive(Clone, Debug)]
pub struct Reduction {
    system: TrinomialSystem,
    selection: PairSelection,
    kappa: IntegerMatrix,
    beta_bar: IntegerMatrix,
    kappa_inv: RationalMatrix,
    /// `κ⁻¹β̄`
    linear: RationalMatrix,
    phi: RationalMatrix,
    psi: RationalMatrix,
    parts: Vec<Part>,
    snf: SnfDecomposition,
}

fn exponent(system: &TrinomialSystem, i: usize, m: Monomial) -> Vec<BigInt> {
    match m {
        Monomial::Omega => system.omega.column(i),
        Monomial::Sigma => system.sigma.column(i),
        Monomial::Zero => vec![BigInt::zero(); system.n()],
    }
}

fn difference(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    a.into_iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Builds the reduction for a selection; rejects selections with `det κ = 0`.
pub fn build_reduction(system: &TrinomialSystem, selection: &PairSelection) -> Result<Reduction> {
    let n = system.n();
    if selection.len() != n {
        return Err(Error::InvalidSelection(format!(
            "expected {n} pair tags, got {}",
            selection.len()
        )));
    }
    let mut kappa_cols = Vec::with_capacity(n);
    let mut beta_cols = Vec::with_capacity(n);
    for (i, tag) in selection.tags().iter().enumerate() {
        let (mu, nu, beta) = tag.roles();
        kappa_cols.push(difference(exponent(system, i, mu), exponent(system, i, nu)));
        beta_cols.push(difference(exponent(system, i, beta), exponent(system, i, nu)));
    }
    let kappa = IntegerMatrix::from_bigint_columns(&kappa_cols);
    let beta_bar = IntegerMatrix::from_bigint_columns(&beta_cols);
    let snf = smith_normal_form(&kappa).map_err(|_| Error::SingularKappa)?;
    let kappa_inv = rational_inverse(&kappa).map_err(|_| Error::SingularKappa)?;
    let linear = kappa_inv.mul_integer(&beta_bar);
    let phi = kappa_inv.mul_integer(&system.sigma);
    let psi = kappa_inv.mul_integer(&system.omega);
    let parts = selection.tags().iter().map(|t| t.part()).collect();
    Ok(Reduction {
        system: system.clone(),
        selection: selection.clone(),
        kappa,
        beta_bar,
        kappa_inv,
        linear,
        phi,
        psi,
        parts,
        snf,
    })
}

/// `(λ, λ₀)` making `λ₀⁽ⁱ⁾ λ^μ⁽ⁱ⁾ a_μ = 1` and `λ₀⁽ⁱ⁾ λ^ν⁽ⁱ⁾ a_ν = −1`.
#[derive(Clone, Debug)]
pub struct PolyhomogeneityData {
    pub lambda: ComplexVector,
    pub lambda0: ComplexVector,
    /// `log λ`, unreduced, consistent with the chosen branch.
    pub log_lambda: ComplexVector,
    /// `gᵢ = −a_ν / a_μ`
    pub g: ComplexVector,
}

impl Reduction {
    pub fn system(&self) -> &TrinomialSystem {
        &self.system
    }

    pub fn selection(&self) -> &PairSelection {
        &self.selection
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn kappa(&self) -> &IntegerMatrix {
        &self.kappa
    }

    pub fn beta_bar(&self) -> &IntegerMatrix {
        &self.beta_bar
    }

    pub fn kappa_inv(&self) -> &RationalMatrix {
        &self.kappa_inv
    }

    /// `κ⁻¹β̄`
    pub fn linear_part(&self) -> &RationalMatrix {
        &self.linear
    }

    pub fn phi(&self) -> &RationalMatrix {
        &self.phi
    }

    pub fn psi(&self) -> &RationalMatrix {
        &self.psi
    }

    pub fn snf(&self) -> &SnfDecomposition {
        &self.snf
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> Part {
        self.parts[j]
    }

    /// Zero-based indices of the equations in `part`.
    pub fn indices(&self, part: Part) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.parts[j] == part).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(|p| *p == Part::J)
    }

    /// Number of branches of `g^{κ⁻¹}`, i.e. `|det κ|`.
    pub fn branch_count(&self) -> usize {
        self.snf
            .invariant_factors()
            .iter()
            .map(|q| q.to_usize().expect("invariant factor fits in usize"))
            .product()
    }

    /// Radical digits `(b₁, …, bₙ)` with `0 ≤ bᵢ < qᵢ`, lexicographic order.
    pub fn branch_digits(&self, branch: usize) -> Result<Vec<usize>> {
        let count = self.branch_count();
        if branch >= count {
            return Err(Error::BranchOutOfRange { branch, count });
        }
        let q: Vec<usize> = self.snf.invariant_factors().iter().map(|v| v.to_usize().unwrap()).collect();
        let mut digits = vec![0; q.len()];
        let mut rest = branch;
        for i in (0..q.len()).rev() {
            digits[i] = rest % q[i];
            rest /= q[i];
        }
        Ok(digits)
    }

    /// `κ⁻¹d + κ⁻¹β̄k`, the gamma arguments of the Taylor coefficients.
    pub fn gamma_arguments(&self, d: &[Rational], k: &[u64]) -> Vec<Rational> {
        let mut v: Vec<Rational> = d.to_vec();
        let kr: Vec<Rational> = k.iter().map(|&ki| Rational::from_integer(BigInt::from(ki))).collect();
        let bk = self.beta_bar.to_rational().mul_vec(&kr);
        for (vi, b) in v.iter_mut().zip(bk) {
            *vi += b;
        }
        self.kappa_inv.mul_vec(&v)
    }

    /// Phase shift `⟨κ⁻¹(d + β̄k), n_b⟩ mod 1` of term `k` on `branch`,
    /// computed as `Σᵢ bᵢ (C(d + β̄k))ᵢ / qᵢ`.
    pub fn branch_phase(&self, d: &[Rational], k: &[u64], branch: usize) -> Result<Rational> {
        let digits = self.branch_digits(branch)?;
        if digits.iter().all(|&b| b == 0) {
            return Ok(Rational::zero());
        }
        let mut v: Vec<Rational> = d.to_vec();
        let kr: Vec<Rational> = k.iter().map(|&ki| Rational::from_integer(BigInt::from(ki))).collect();
        for (vi, b) in v.iter_mut().zip(self.beta_bar.to_rational().mul_vec(&kr)) {
            *vi += b;
        }
        let cv = self.snf.c.to_rational().mul_vec(&v);
        let q = self.snf.invariant_factors();
        let mut theta = Rational::zero();
        for i in 0..self.n() {
            theta += &cv[i] * Rational::new(BigInt::from(digits[i]), q[i].clone());
        }
        Ok(rational::frac(&theta))
    }

    /// `log gᵢ` for the x-system, taken literally: `0` on `J`, `−Log xₗ` on
    /// `L`, `iπ + Log xₜ` on `T`.
    fn log_g(&self, x: &[Complex64]) -> Result<ComplexVector> {
        check_point(x, self.n())?;
        Ok((0..self.n())
            .map(|j| match self.parts[j] {
                Part::J => Complex64::new(0.0, 0.0),
                Part::L => -x[j].ln(),
                Part::T => Complex64::new(0.0, PI) + x[j].ln(),
            })
            .collect())
    }

    /// Coordinates of the monomial change `r = r(x)`.
    pub fn monomial_change(&self, x: &[Complex64]) -> Result<ComplexVector> {
        Ok(self.monomial_change_log(x)?.into_iter().map(|l| l.exp()).collect())
    }

    /// `log r(x)` with the literal branch conventions; exponentiating it gives
    /// [`Reduction::monomial_change`].
    pub fn monomial_change_log(&self, x: &[Complex64]) -> Result<ComplexVector> {
        check_point(x, self.n())?;
        let n = self.n();
        let log_x: ComplexVector = x.iter().map(|v| v.ln()).collect();
        let log_minus_x: ComplexVector = log_x.iter().map(|l| l + Complex64::new(0.0, PI)).collect();
        let f = |r: &Rational| rational::to_f64(r);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            match self.parts[j] {
                Part::J => {
                    acc += log_x[j];
                    for l in self.indices(Part::L) {
                        acc -= log_x[l] * f(self.phi.get(l, j));
                    }
                    for t in self.indices(Part::T) {
                        acc += log_minus_x[t] * f(self.phi.get(t, j));
                    }
                }
                Part::L => {
                    for l in self.indices(Part::L) {
                        acc -= log_x[l] * f(self.psi.get(l, j));
                    }
                    for t in self.indices(Part::T) {
                        acc += log_minus_x[t] * f(self.psi.get(t, j));
                    }
                }
                Part::T => {
                    acc += Complex64::new(0.0, PI);
                    for l in self.indices(Part::L) {
                        acc += log_x[l] * f(self.psi.get(l, j));
                    }
                    for t in self.indices(Part::T) {
                        acc -= log_minus_x[t] * f(self.psi.get(t, j));
                    }
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `log` of the prefactor `∏ₗ xₗ^{−⟨d,κ⁻¹ₗ⟩} ∏ₜ (e^{iπ}xₜ)^{⟨d,κ⁻¹ₜ⟩}`
    /// relating `y^d(x)` to `y^d(r)`.
    pub fn prefactor_log(&self, x: &[Complex64], d: &[Rational]) -> Result<Complex64> {
        let log_g = self.log_g(x)?;
        let kd = self.kappa_inv.mul_vec(d);
        Ok(kd.iter().zip(&log_g).map(|(e, l)| l * rational::to_f64(e)).sum())
    }

    /// One branch of `λ = g^{κ⁻¹}` through the Smith form, with the matching
    /// `λ₀`, for the x-system with coefficients `(1, xᵢ, −1)`.
    pub fn polyhomogeneity_data(&self, x: &[Complex64], branch: usize) -> Result<PolyhomogeneityData> {
        let log_g = self.log_g(x)?;
        let coefficients = self.system.coefficients_at(x);
        self.polyhomogeneity_from_log(&coefficients, &log_g, branch)
    }

    /// Same as [`Reduction::polyhomogeneity_data`] for arbitrary universal
    /// coefficients; `log g` uses principal logarithms.
    pub fn polyhomogeneity_for(
        &self,
        coefficients: &[EquationCoefficients],
        branch: usize,
    ) -> Result<PolyhomogeneityData> {
        let log_g: Result<ComplexVector> = coefficients
            .iter()
            .zip(self.selection.tags())
            .enumerate()
            .map(|(i, (c, tag))| {
                let (mu, nu, _) = tag.roles();
                let g = -c.get(nu) / c.get(mu);
                if g.norm() == 0.0 || !g.is_finite() {
                    return Err(Error::ZeroCoordinate(i));
                }
                Ok(g.ln())
            })
            .collect();
        self.polyhomogeneity_from_log(coefficients, &log_g?, branch)
    }

    fn polyhomogeneity_from_log(
        &self,
        coefficients: &[EquationCoefficients],
        log_g: &[Complex64],
        branch: usize,
    ) -> Result<PolyhomogeneityData> {
        let n = self.n();
        let digits = self.branch_digits(branch)?;
        let q = self.snf.invariant_factors();
        // log uᵢ = (⟨f⁽ⁱ⁾, log g⟩ + 2πi bᵢ) / qᵢ ;  log λ = Cᵀ log u
        let log_u: ComplexVector = (0..n)
            .map(|i| {
                let mut acc: Complex64 = (0..n).map(|m| log_g[m] * self.snf.f.get(m, i).to_f64().unwrap()).sum();
                acc += Complex64::new(0.0, 2.0 * PI * digits[i] as f64);
                acc / q[i].to_f64().unwrap()
            })
            .collect();
        let log_lambda: ComplexVector = (0..n)
            .map(|j| (0..n).map(|i| log_u[i] * self.snf.c.get(i, j).to_f64().unwrap()).sum())
            .collect();
        let lambda0 = (0..n)
            .map(|i| {
                let (mu, _, _) = self.selection.tags()[i].roles();
                let e = exponent(&self.system, i, mu);
                let log_mu: Complex64 = e.iter().zip(&log_lambda).map(|(a, l)| l * a.to_f64().unwrap()).sum();
                (-log_mu).exp() / coefficients[i].get(mu)
            })
            .collect();
        Ok(PolyhomogeneityData {
            lambda: log_lambda.iter().map(|l| l.exp()).collect(),
            lambda0,
            log_lambda,
            g: log_g.iter().map(|l| l.exp()).collect(),
        })
    }

    /// Coefficients `rᵢ = λ₀⁽ⁱ⁾ λ^β⁽ⁱ⁾ a_β` of the reduced system obtained by
    /// rescaling with the given polyhomogeneity data.
    pub fn reduced_coefficients(
        &self,
        coefficients: &[EquationCoefficients],
        data: &PolyhomogeneityData,
    ) -> ComplexVector {
        (0..self.n())
            .map(|i| {
                let (_, _, beta) = self.selection.tags()[i].roles();
                let e = exponent(&self.system, i, beta);
                let log_beta: Complex64 = e.iter().zip(&data.log_lambda).map(|(a, l)| l * a.to_f64().unwrap()).sum();
                data.lambda0[i] * log_beta.exp() * coefficients[i].get(beta)
            })
            .collect()
    }

    /// Exponent vector of monomial `m` in equation `i`.
    pub fn exponent(&self, i: usize, m: Monomial) -> Vec<BigInt> {
        exponent(&self.system, i, m)
    }
}

pub(crate) fn check_point(x: &[Complex64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroCoordinate(i));
    }
    Ok(())
}

/// Ready-made systems used throughout the test suites and the CLI examples.
pub mod fixtures {
    use super::*;

    /// `y₁⁴ + x₁y₁²y₂ − 1 = 0`, `y₂⁴ + x₂y₁y₂² − 1 = 0`.
    pub fn eq1() -> TrinomialSystem {
        TrinomialSystem::from_columns(&[vec![4, 0], vec![0, 4]], &[vec![2, 1], vec![1, 2]]).unwrap()
    }

    /// `y² + xy − 1 = 0`.
    pub fn quadratic() -> TrinomialSystem {
        TrinomialSystem::from_columns(&[vec![2]], &[vec![1]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rm(rows: &[&[(i64, i64)]]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect())
    }

    #[test]
    fn rejects_invalid_systems() {
        assert!(TrinomialSystem::from_columns(&[vec![1, 1], vec![1, 1]], &[vec![1, 0], vec![0, 1]]).is_err());
        assert!(TrinomialSystem::from_columns(&[vec![2, 0], vec![0, 2]], &[vec![2, 0], vec![1, 1]]).is_err());
        assert!(TrinomialSystem::from_columns(&[vec![2, 0], vec![0, 2]], &[vec![0, 0], vec![1, 1]]).is_err());
        assert!(TrinomialSystem::from_columns(&[vec![2, 0], vec![0, 2]], &[vec![-1, 0], vec![1, 1]]).is_err());
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let text = r#"{"n":2,"omega":[[4,0],[0,4]],"sigma":[[2,1],[1,2]]}"#;
        let s = TrinomialSystem::from_json(text).unwrap();
        assert_eq!(s, eq1());
        assert_eq!(s.to_json(), text);
        let spaced = "{ \"n\": 2, \"omega\": [[4, 0], [0, 4]], \"sigma\": [[2, 1], [1, 2]] }";
        assert_eq!(TrinomialSystem::from_json(spaced).unwrap().to_json(), text);
        assert!(TrinomialSystem::from_json(r#"{"n":2,"omega":[[4,0],[0,4]],"sigma":[[2,1],[1,2]],"x":1}"#).is_err());
    }

    #[test]
    fn tags_parse() {
        let sel: PairSelection = "s0,W0,ws".parse().unwrap();
        assert_eq!(sel.tags(), &[PairTag::S0, PairTag::W0, PairTag::WS]);
        assert_eq!(sel.to_string(), "s0,w0,ws");
        assert!("s1".parse::<PairSelection>().is_err());
        assert_eq!(PairSelection::all(2).len(), 9);
    }

    #[test]
    fn identity_reduction() {
        let red = build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::W0)).unwrap();
        assert_eq!(red.kappa(), eq1().omega());
        assert_eq!(red.beta_bar(), eq1().sigma());
        assert_eq!(red.indices(Part::J), vec![0, 1]);
        assert!(red.indices(Part::L).is_empty() && red.indices(Part::T).is_empty());
        let x = vec![c(0.3, -0.2), c(-1.5, 0.7)];
        let r = red.monomial_change(&x).unwrap();
        for (a, b) in r.iter().zip(&x) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn all_s0_reduction() {
        let red = build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::S0)).unwrap();
        assert_eq!(red.kappa(), &IntegerMatrix::from_rows(&[vec![2, 1], vec![1, 2]]));
        assert_eq!(red.beta_bar(), eq1().omega());
        assert_eq!(red.indices(Part::L), vec![0, 1]);
        assert_eq!(red.psi(), &rm(&[&[(8, 3), (-4, 3)], &[(-4, 3), (8, 3)]]));
        assert_eq!(red.branch_count(), 3);

        let x = vec![c(0.7, 0.2), c(1.3, -0.4)];
        let r = red.monomial_change(&x).unwrap();
        let expected = [
            (x[0].ln() * (-8.0 / 3.0) + x[1].ln() * (4.0 / 3.0)).exp(),
            (x[0].ln() * (4.0 / 3.0) + x[1].ln() * (-8.0 / 3.0)).exp(),
        ];
        for (a, b) in r.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-13 * b.norm());
        }
    }

    #[test]
    fn mixed_reduction() {
        let sel: PairSelection = "s0,w0".parse().unwrap();
        let red = build_reduction(&eq1(), &sel).unwrap();
        assert_eq!(red.kappa(), &IntegerMatrix::from_rows(&[vec![2, 0], vec![1, 4]]));
        assert_eq!(red.beta_bar(), &IntegerMatrix::from_rows(&[vec![4, 1], vec![0, 2]]));
        assert_eq!(red.indices(Part::J), vec![1]);
        assert_eq!(red.indices(Part::L), vec![0]);
        assert_eq!(red.phi(), &rm(&[&[(1, 1), (1, 2)], &[(0, 1), (3, 8)]]));
        assert_eq!(red.psi(), &rm(&[&[(2, 1), (0, 1)], &[(-1, 2), (1, 1)]]));
        // J coordinate r₂ = x₂ · x₁^(−φ₁⁽²⁾) = x₂ x₁^(−1/2); L coordinate r₁ = x₁^(−2)
        let x = vec![c(3.0, 1.0), c(0.5, -0.25)];
        let r = red.monomial_change(&x).unwrap();
        assert!((r[1] - x[1] * (x[0].ln() * -0.5).exp()).norm() < 1e-14);
        assert!((r[0] - x[0].powi(-2)).norm() < 1e-14);
    }

    #[test]
    fn singular_kappa_rejected() {
        // ω⁽¹⁾ − σ⁽¹⁾ = (1,-1) and ω⁽²⁾ − σ⁽²⁾ = (-1,1) are parallel.
        let s = TrinomialSystem::from_columns(&[vec![2, 0], vec![0, 2]], &[vec![1, 1], vec![1, 1]]).unwrap();
        let sel: PairSelection = "ws,ws".parse().unwrap();
        assert!(matches!(build_reduction(&s, &sel), Err(Error::SingularKappa)));
    }

    #[test]
    fn partition_matches_tags() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sys = TrinomialSystem::from_columns(
            &[vec![3, 0, 1], vec![0, 2, 0], vec![1, 0, 4]],
            &[vec![1, 1, 0], vec![2, 0, 1], vec![0, 1, 1]],
        )
        .unwrap();
        let mut checked = 0;
        while checked < 100 {
            let tags: Vec<PairTag> = (0..3).map(|_| PairTag::ALL[rng.gen_range(0..3)]).collect();
            let Ok(red) = build_reduction(&sys, &PairSelection::new(tags.clone())) else {
                continue;
            };
            for (j, tag) in tags.iter().enumerate() {
                let (mu, nu, _) = tag.roles();
                let expected = match (mu, nu) {
                    (Monomial::Omega, Monomial::Zero) => Part::J,
                    (Monomial::Sigma, Monomial::Zero) => Part::L,
                    (Monomial::Omega, Monomial::Sigma) => Part::T,
                    _ => unreachable!(),
                };
                assert_eq!(red.part(j), expected);
            }
            assert_eq!(red.kappa_inv().mul_integer(red.kappa()), RationalMatrix::identity(3));
            assert_eq!(red.kappa().to_rational().mul(red.phi()), sys.sigma().to_rational());
            assert_eq!(red.kappa().to_rational().mul(red.psi()), sys.omega().to_rational());
            checked += 1;
        }
    }

    #[test]
    fn branch_enumeration() {
        let red = build_reduction(&quadratic(), &PairSelection::uniform(1, PairTag::W0)).unwrap();
        assert_eq!(red.branch_count(), 2);
        assert!(matches!(red.branch_digits(2), Err(Error::BranchOutOfRange { .. })));
        let coeffs = vec![EquationCoefficients {
            omega: c(1.0, 0.0),
            sigma: c(1.0, 0.0),
            zero: c(-4.0, 0.0),
        }];
        let mut roots: Vec<f64> = (0..2)
            .map(|b| red.polyhomogeneity_for(&coeffs, b).unwrap().lambda[0])
            .map(|l| {
                assert!(l.im.abs() < 1e-14);
                l.re
            })
            .collect();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] + 2.0).abs() < 1e-14 && (roots[1] - 2.0).abs() < 1e-14);

        let id = build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::S0)).unwrap();
        let data = id.polyhomogeneity_data(&[c(1.0, 0.0), c(1.0, 0.0)], 0).unwrap();
        assert!(data.lambda.iter().all(|l| (l - 1.0).norm() < 1e-15));
    }

    #[test]
    fn radical_branches_solve_the_kappa_system() {
        for tags in ["s0,s0", "s0,w0", "ws,s0", "w0,ws"] {
            let red = build_reduction(&eq1(), &tags.parse().unwrap()).unwrap();
            let x = [c(0.1, 0.0), c(0.1, 0.0)];
            let coeffs = eq1().coefficients_at(&x);
            let mut seen: Vec<ComplexVector> = Vec::new();
            for b in 0..red.branch_count() {
                let data = red.polyhomogeneity_data(&x, b).unwrap();
                for i in 0..2 {
                    let col = red.kappa().column(i);
                    let v: Complex64 = col
                        .iter()
                        .zip(&data.lambda)
                        .map(|(e, l)| l.powi(e.to_i32().unwrap()))
                        .product();
                    assert!((v - data.g[i]).norm() < 1e-12 * data.g[i].norm(), "{tags} branch {b}");
                    let (mu, nu, _) = red.selection().tags()[i].roles();
                    let pow = |m| {
                        red.exponent(i, m)
                            .iter()
                            .zip(&data.lambda)
                            .map(|(e, l)| l.powi(e.to_i32().unwrap()))
                            .product::<Complex64>()
                    };
                    assert!((data.lambda0[i] * pow(mu) * coeffs[i].get(mu) - 1.0).norm() < 1e-12);
                    assert!((data.lambda0[i] * pow(nu) * coeffs[i].get(nu) + 1.0).norm() < 1e-12);
                }
                assert!(!seen.iter().any(|s| s.iter().zip(&data.lambda).all(|(a, b)| (a - b).norm() < 1e-9)));
                seen.push(data.lambda);
            }
        }
    }

    /// The literal monomial change agrees with `rᵢ = λ₀ λ^β a_β` on branch 0.
    #[test]
    fn monomial_change_matches_rescaling_route() {
        let sys = TrinomialSystem::from_columns(
            &[vec![3, 1, 0], vec![0, 2, 1], vec![1, 0, 2]],
            &[vec![1, 1, 1], vec![2, 0, 0], vec![0, 3, 1]],
        )
        .unwrap();
        let x = vec![c(0.4, 0.3), c(-1.2, 0.5), c(2.0, -0.7)];
        for sel in PairSelection::all(3) {
            let Ok(red) = build_reduction(&sys, &sel) else { continue };
            let r = red.monomial_change(&x).unwrap();
            let data = red.polyhomogeneity_data(&x, 0).unwrap();
            let r2 = red.reduced_coefficients(&sys.coefficients_at(&x), &data);
            for (a, b) in r.iter().zip(&r2) {
                assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{sel}: {a} vs {b}");
            }
            let d = vec![int(1), rat(1, 2), int(2)];
            let pre = red.prefactor_log(&x, &d).unwrap().exp();
            let lambda_d: Complex64 = data
                .log_lambda
                .iter()
                .zip(&d)
                .map(|(l, e)| l * rational::to_f64(e))
                .sum::<Complex64>()
                .exp();
            assert!((pre - lambda_d).norm() < 1e-10 * pre.norm());
        }
    }

    #[test]
    fn zero_coordinate_is_an_error() {
        let red = build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::S0)).unwrap();
        assert_eq!(
            red.monomial_change(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap_err(),
            Error::ZeroCoordinate(0)
        );
        assert!(matches!(
            red.polyhomogeneity_data(&[c(1.0, 0.0), c(1.0, 0.0)], 3),
            Err(Error::BranchOutOfRange { branch: 3, count: 3 })
        ));
    }
}
