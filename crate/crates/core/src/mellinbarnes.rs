//! Mellin–Barnes integral of `y^d(x)` for systems with diagonal `ω`, and its
//! evaluation as a sum of Grothendieck residues over a user-designated
//! divisor pairing and simplicial cone.
//!
//! The integrand is
//!
//! ```text
//! ∏ⱼ Γ(zⱼ) Γ(ℓⱼ(z)) / Γ(ℓⱼ(z) + zⱼ + 1) · Q(z) · x^{−z},
//! ℓⱼ(z) = dⱼ/ωⱼ − ⟨σⱼ, z⟩/ωⱼ,
//! ```
//!
//! with polar families `Lⱼ: zⱼ = −ν` and `L_{n+j}: ℓⱼ(z) = −ν`. Family
//! indices are 1-based in text (`"2,3|1,4"`) and 0-based in the API.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma;
use crate::intlinalg::{IntegerMatrix, RationalMatrix};
use crate::rational::{self, Rational};
use crate::systems::TrinomialSystem;
use crate::taylor::MultiIndex;

/// `⟨linear, z⟩ + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

impl AffineForm {
    pub fn eval(&self, z: &[Rational]) -> Rational {
        rational::dot(&self.linear, z) + &self.constant
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        self.linear
            .iter()
            .zip(z)
            .map(|(a, v)| v * rational::to_f64(a))
            .sum::<Complex64>()
            + rational::to_f64(&self.constant)
    }
}

/// Integral data: polar families, `Q(z)`, and the base point `γ`.
#[derive(Clone, Debug)]
pub struct MBIntegralData {
    system: TrinomialSystem,
    d: Vec<Rational>,
    omega: Vec<Rational>,
    families: Vec<AffineForm>,
    gamma: Vec<Rational>,
}

impl MBIntegralData {
    /// Uses a default `γ` on the diagonal of `U = {u > 0, ⟨σⱼ,u⟩ < dⱼ}`.
    pub fn new(system: &TrinomialSystem, d: Vec<Rational>) -> Result<Self> {
        let n = system.n();
        if d.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: d.len() });
        }
        if !system.omega().is_diagonal() {
            return Err(Error::InvalidSystem("the Mellin-Barnes integral needs a diagonal omega".into()));
        }
        let omega: Vec<Rational> = (0..n)
            .map(|j| Rational::from_integer(system.omega().get(j, j).clone()))
            .collect();
        let sigma = system.sigma().to_rational();
        let mut families = Vec::with_capacity(2 * n);
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            families.push(AffineForm {
                linear: e,
                constant: Rational::zero(),
            });
        }
        for j in 0..n {
            families.push(AffineForm {
                linear: sigma.row(j).iter().map(|s| -s / &omega[j]).collect(),
                constant: &d[j] / &omega[j],
            });
        }
        // t·(1,…,1) with t half the largest admissible value
        let mut t = Rational::one();
        for j in 0..n {
            let row_sum: Rational = sigma.row(j).into_iter().sum();
            if row_sum.is_positive() {
                let bound = &d[j] / row_sum / Rational::from_integer(BigInt::from(2));
                if bound < t {
                    t = bound;
                }
            }
        }
        let mut data = Self {
            system: system.clone(),
            d,
            omega,
            families,
            gamma: vec![t; n],
        };
        if !data.in_u_polytope(&data.gamma.clone()) {
            return Err(Error::InvalidCone("the polytope U is empty".into()));
        }
        data.gamma.shrink_to_fit();
        Ok(data)
    }

    /// Replaces `γ`; it must lie in the interior of `U`.
    pub fn with_gamma(mut self, gamma: Vec<Rational>) -> Result<Self> {
        if gamma.len() != self.n() || !self.in_u_polytope(&gamma) {
            return Err(Error::InvalidCone(format!(
                "gamma = ({}) is not inside U",
                gamma.iter().map(rational::format).collect::<Vec<_>>().join(", ")
            )));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &TrinomialSystem {
        &self.system
    }

    pub fn d(&self) -> &[Rational] {
        &self.d
    }

    pub fn gamma(&self) -> &[Rational] {
        &self.gamma
    }

    /// The `2n` polar families, `Lⱼ` first.
    pub fn families(&self) -> &[AffineForm] {
        &self.families
    }

    /// `u > 0` and `⟨σⱼ, u⟩ < dⱼ` for all `j`.
    pub fn in_u_polytope(&self, u: &[Rational]) -> bool {
        let sigma = self.system.sigma().to_rational();
        u.iter().all(|v| v.is_positive())
            && (0..self.n()).all(|j| rational::dot(&sigma.row(j), u) < self.d[j])
    }

    fn q_matrix<T, F>(&self, z: &[T], from: F) -> Vec<Vec<T>>
    where
        T: Clone + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
        F: Fn(&Rational) -> T,
    {
        let n = self.n();
        let sigma = self.system.sigma();
        let s = |j: usize, i: usize| from(&Rational::from_integer(sigma.get(j, i).clone()));
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut v = s(j, i) * z[i].clone();
                        if i == j {
                            let mut inner = from(&self.d[j]);
                            for k in 0..n {
                                inner = inner - s(j, k) * z[k].clone();
                            }
                            v = v + inner;
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// `Q(z) = det‖δᵢʲ(dⱼ − ⟨σⱼ,z⟩) + σⱼ⁽ⁱ⁾zᵢ‖ / det ω`, exact.
    pub fn q_polynomial_exact(&self, z: &[Rational]) -> Rational {
        let m = RationalMatrix::from_rows(self.q_matrix(z, |r| r.clone()));
        let det_omega: Rational = self.omega.iter().product();
        m.determinant() / det_omega
    }

    /// `Q(z)` at a complex point.
    pub fn q_polynomial(&self, z: &[Complex64]) -> Complex64 {
        let rows = self.q_matrix(z, |r| Complex64::new(rational::to_f64(r), 0.0));
        let n = self.n();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let det_omega: f64 = self.omega.iter().map(rational::to_f64).product();
        m.determinant() / det_omega
    }

    /// The full integrand at `z` (principal branch of `x^{−z}`).
    pub fn integrand(&self, z: &[Complex64], x: &[Complex64]) -> Complex64 {
        let n = self.n();
        let mut v = self.q_polynomial(z);
        for j in 0..n {
            let l = self.families[n + j].eval_complex(z);
            v *= gamma::gamma_complex(z[j]) * gamma::gamma_complex(l) * gamma::rgamma_complex(l + z[j] + 1.0);
        }
        let log_x: Complex64 = z.iter().zip(x).map(|(zi, xi)| zi * xi.ln()).sum();
        v * (-log_x).exp()
    }

    /// Sum of the `zⱼ` coefficients over numerator gamma arguments equals the
    /// sum over denominator arguments, for every `j`.
    pub fn non_confluent(&self) -> bool {
        let n = self.n();
        (0..n).all(|j| {
            let mut numerator = Rational::zero();
            let mut denominator = Rational::zero();
            for k in 0..n {
                numerator += &self.families[k].linear[j] + &self.families[n + k].linear[j];
                denominator += &self.families[n + k].linear[j] + &self.families[k].linear[j];
            }
            numerator == denominator
        })
    }
}

/// True iff every leading principal minor of `σ` is positive.
pub fn convergence_nonempty(sigma: &IntegerMatrix) -> bool {
    (1..=sigma.dim()).all(|k| sigma.leading_minor(k).is_positive())
}

/// Assignment of polar families to `n` divisor groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorPairing {
    groups: Vec<Vec<usize>>,
}

impl DivisorPairing {
    /// Groups of 0-based family indices.
    pub fn new(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if groups.len() != n {
            return Err(Error::DegeneratePairing(format!("expected {n} groups, got {}", groups.len())));
        }
        let mut seen = vec![false; 2 * n];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::DegeneratePairing("empty divisor group".into()));
            }
            for &f in g {
                if f >= 2 * n {
                    return Err(Error::DegeneratePairing(format!("family L{} does not exist", f + 1)));
                }
                if std::mem::replace(&mut seen[f], true) {
                    return Err(Error::DegeneratePairing(format!("family L{} is used twice", f + 1)));
                }
            }
        }
        Ok(Self { groups })
    }

    /// Parses `"2,3|1,4"` (1-based family indices).
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let groups = text
            .split('|')
            .map(|g| {
                g.split(',')
                    .map(|f| {
                        let v: usize = f
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad family index {f:?}")))?;
                        if v == 0 {
                            return Err(Error::Parse("family indices start at 1".into()));
                        }
                        Ok(v - 1)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(groups, n)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_of(&self, family: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&family))
    }

    /// All choices of one family per group, lexicographic in group order.
    pub fn transversals(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for g in &self.groups {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    g.iter().map(move |&f| {
                        let mut v = prefix.clone();
                        v.push(f);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for DivisorPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&groups.join("|"))
    }
}

/// Simplicial cone `apex + cone(rays)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueCone {
    apex: Vec<Rational>,
    rays: Vec<Vec<Rational>>,
    /// Columns are the rays.
    basis: RationalMatrix,
}

impl ResidueCone {
    pub fn new(apex: Vec<Rational>, rays: Vec<Vec<Rational>>) -> Result<Self> {
        let n = apex.len();
        if rays.len() != n || rays.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCone(format!("need {n} rays of length {n}")));
        }
        let mut basis = RationalMatrix::zeros(n);
        for (j, r) in rays.iter().enumerate() {
            for i in 0..n {
                basis.set(i, j, r[i].clone());
            }
        }
        if basis.determinant().is_zero() {
            return Err(Error::InvalidCone("rays are linearly dependent".into()));
        }
        Ok(Self { apex, rays, basis })
    }

    /// Parses rays written as `"2,-1;-1,2"`.
    pub fn parse(apex: Vec<Rational>, text: &str) -> Result<Self> {
        let rays = text.split(';').map(rational::parse_list).collect::<Result<Vec<_>>>()?;
        Self::new(apex, rays)
    }

    pub fn apex(&self) -> &[Rational] {
        &self.apex
    }

    pub fn rays(&self) -> &[Vec<Rational>] {
        &self.rays
    }

    /// Strictly inside the open cone.
    pub fn contains(&self, z: &[Rational]) -> bool {
        let shifted: Vec<Rational> = z.iter().zip(&self.apex).map(|(a, b)| a - b).collect();
        match self.basis.solve(&shifted) {
            Some(c) => c.iter().all(|v| v.is_positive()),
            None => false,
        }
    }
}

/// One way a residue point arises: designated families and their pole
/// orders, both in group order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hit {
    pub families: Vec<usize>,
    pub nu: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResiduePoint {
    pub z: Vec<Rational>,
    pub hits: Vec<Hit>,
}

impl ResiduePoint {
    /// The label of the first hit.
    pub fn k(&self) -> &MultiIndex {
        &self.hits[0].nu
    }
}

fn linear_matrix(data: &MBIntegralData, families: &[usize]) -> RationalMatrix {
    RationalMatrix::from_rows(families.iter().map(|&f| data.families[f].linear.clone()).collect())
}

/// Intersection points of designated families strictly inside the cone,
/// for pole orders `|ν| ≤ bound`, sorted by the label of their first hit
/// (graded-lex) and then by transversal.
pub fn residue_lattice(
    data: &MBIntegralData,
    pairing: &DivisorPairing,
    cone: &ResidueCone,
    bound: u64,
) -> Result<Vec<ResiduePoint>> {
    let n = data.n();
    if pairing.groups().len() != n || cone.apex().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pairing.groups().len(),
        });
    }
    let transversals: Vec<(Vec<usize>, RationalMatrix)> = pairing
        .transversals()
        .into_iter()
        .map(|t| {
            let m = linear_matrix(data, &t);
            (t, m)
        })
        .filter(|(_, m)| !m.determinant().is_zero())
        .collect();
    if transversals.is_empty() {
        return Err(Error::DegeneratePairing("no transversal has independent linear parts".into()));
    }
    let nus = MultiIndex::up_to_degree(n, bound);
    let mut points: Vec<(usize, ResiduePoint)> = Vec::new();
    for (ti, (families, m)) in transversals.iter().enumerate() {
        for nu in &nus {
            // ⟨a_f, z⟩ + c_f = −ν_f
            let rhs: Vec<Rational> = families
                .iter()
                .zip(&nu.0)
                .map(|(&f, &v)| -Rational::from_integer(BigInt::from(v)) - &data.families[f].constant)
                .collect();
            let z = m.solve(&rhs).expect("nonsingular transversal");
            if !cone.contains(&z) {
                continue;
            }
            let hit = Hit {
                families: families.clone(),
                nu: nu.clone(),
            };
            match points.iter_mut().find(|(_, p)| p.z == z) {
                Some((_, p)) => p.hits.push(hit),
                None => points.push((ti, ResiduePoint { z, hits: vec![hit] })),
            }
        }
    }
    points.sort_by(|(ta, a), (tb, b)| a.k().graded_cmp(b.k()).then(ta.cmp(tb)));
    Ok(points.into_iter().map(|(_, p)| p).collect())
}

/// A factor known exactly when possible, always approximately.
#[derive(Clone, Debug)]
struct Value {
    exact: Option<Rational>,
    approx: f64,
}

impl Value {
    fn exact(r: Rational) -> Self {
        Self {
            approx: rational::to_f64(&r),
            exact: Some(r),
        }
    }

    fn float(v: f64) -> Self {
        Self { exact: None, approx: v }
    }

    fn mul(&self, other: &Value) -> Value {
        Value {
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
            approx: self.approx * other.approx,
        }
    }

    fn is_zero(&self) -> bool {
        match &self.exact {
            Some(v) => v.is_zero(),
            None => self.approx == 0.0,
        }
    }
}

/// A Laurent term `c(z)/∏ ε_F` of one gamma triple, `c(z)` holomorphic with
/// the stored value at the point.
#[derive(Clone, Debug)]
struct Term {
    forms: Vec<usize>,
    value: Value,
}

fn pole_order(v: &Rational) -> Option<u64> {
    if rational::is_nonpositive_integer(v) {
        (-v.to_integer()).to_u64()
    } else {
        None
    }
}

fn sign_over_factorial(nu: u64) -> Rational {
    let v = Rational::new(BigInt::one(), rational::factorial(nu));
    if nu % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `Γ(p)Γ(q)/Γ(p+q+1)` with neither `p` nor `q` a pole.
fn regular_triple(p: &Rational, q: &Rational) -> Result<Value> {
    let top = p + q + Rational::one();
    if rational::is_nonpositive_integer(&top) {
        return Ok(Value::exact(Rational::zero()));
    }
    // exact when one argument is a positive integer: Γ(m) = (m−1)!
    for (a, b) in [(p, q), (q, p)] {
        if b.is_integer() {
            let m = b.to_integer().to_u64().expect("positive integer argument");
            let fact = Rational::from_integer(rational::factorial(m - 1));
            return Ok(Value::exact(gamma::gamma_ratio_exact(a, &top)? * fact));
        }
    }
    let ratio = gamma::gamma_ratio_float(rational::to_f64(p), rational::to_f64(&top))?;
    let gq = gamma::gamma_ratio_float(rational::to_f64(q), 1.0)?;
    Ok(Value::float(ratio * gq))
}

fn triple_terms(data: &MBIntegralData, j: usize, z: &[Rational]) -> Result<Vec<Term>> {
    let n = data.n();
    let p = z[j].clone();
    let q = data.families[n + j].eval(z);
    let (zf, lf) = (j, n + j);
    Ok(match (pole_order(&p), pole_order(&q)) {
        (None, None) => vec![Term {
            forms: vec![],
            value: regular_triple(&p, &q)?,
        }],
        (Some(nu), None) => {
            let rest = gamma::gamma_ratio_exact(&q, &(&q + &p + Rational::one()))?;
            vec![Term {
                forms: vec![zf],
                value: Value::exact(sign_over_factorial(nu) * rest),
            }]
        }
        (None, Some(nu)) => {
            let rest = gamma::gamma_ratio_exact(&p, &(&q + &p + Rational::one()))?;
            vec![Term {
                forms: vec![lf],
                value: Value::exact(sign_over_factorial(nu) * rest),
            }]
        }
        (Some(0), Some(0)) => vec![Term {
            forms: vec![zf, lf],
            value: Value::exact(Rational::one()),
        }],
        (Some(a), Some(b)) => {
            // Γ(−a+ε₁)Γ(−b+ε₂)/Γ(1−a−b+ε₁+ε₂) = C(1/ε₁ + 1/ε₂) + …
            let big_n = a + b - 1;
            let c = -Rational::new(
                rational::factorial(big_n),
                rational::factorial(a) * rational::factorial(b),
            );
            vec![
                Term {
                    forms: vec![zf],
                    value: Value::exact(c.clone()),
                },
                Term {
                    forms: vec![lf],
                    value: Value::exact(c),
                },
            ]
        }
    })
}

/// Residue of the integrand at a lattice point, without the `x^{−z}` factor.
#[derive(Clone, Debug)]
pub struct Residue {
    pub point: ResiduePoint,
    /// The transversal carrying the residue, or the first hit when the
    /// residue vanishes.
    pub hit: Hit,
    pub exact: Option<Rational>,
    pub value: f64,
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(v) => v.is_zero(),
            None => self.value == 0.0,
        }
    }
}

fn describe(z: &[Rational]) -> String {
    format!("({})", z.iter().map(rational::format).collect::<Vec<_>>().join(", "))
}

/// Grothendieck residue at `point` with respect to the pairing's divisors,
/// using `|det|` of the designated linear parts.
pub fn residue_at(data: &MBIntegralData, pairing: &DivisorPairing, point: &ResiduePoint) -> Result<Residue> {
    let n = data.n();
    let z = &point.z;
    let per_triple: Vec<Vec<Term>> = (0..n).map(|j| triple_terms(data, j, z)).collect::<Result<_>>()?;
    let q = Value::exact(data.q_polynomial_exact(z));
    let mut total = Value::exact(Rational::zero());
    let mut carrier: Option<Vec<usize>> = None;
    let mut choice = vec![0usize; n];
    loop {
        let mut forms = Vec::new();
        let mut value = q.clone();
        for j in 0..n {
            let t = &per_triple[j][choice[j]];
            forms.extend(t.forms.iter().copied());
            value = value.mul(&t.value);
        }
        if let Some(&f) = forms.iter().find(|&&f| pairing.group_of(f).is_none()) {
            return Err(Error::NonSimplePole {
                point: describe(z),
                reason: format!("family L{} is not in any divisor", f + 1),
            });
        }
        let mut per_group = vec![0usize; n];
        for &f in &forms {
            per_group[pairing.group_of(f).unwrap()] += 1;
        }
        if per_group.iter().all(|&c| c == 1) {
            let mut ordered = vec![0usize; n];
            for &f in &forms {
                ordered[pairing.group_of(f).unwrap()] = f;
            }
            let det = linear_matrix(data, &ordered).determinant().abs();
            let contribution = value.mul(&Value::exact(det.recip()));
            if carrier.is_none() && !contribution.is_zero() {
                carrier = Some(ordered);
            }
            total = Value {
                exact: match (&total.exact, &contribution.exact) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                },
                approx: total.approx + contribution.approx,
            };
        } else if per_group.iter().all(|&c| c >= 1) && !value.is_zero() {
            return Err(Error::NonSimplePole {
                point: describe(z),
                reason: "more than one polar family of a divisor meets the point".into(),
            });
        }
        let mut j = 0;
        while j < n {
            choice[j] += 1;
            if choice[j] < per_triple[j].len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    let hit = match carrier {
        Some(families) => {
            let nu = families
                .iter()
                .map(|&f| pole_order(&data.families[f].eval(z)).expect("designated form vanishes"))
                .collect();
            Hit { families, nu: MultiIndex(nu) }
        }
        None => point.hits[0].clone(),
    };
    Ok(Residue {
        point: point.clone(),
        hit,
        value: match &total.exact {
            Some(v) => rational::to_f64(v),
            None => total.approx,
        },
        exact: total.exact,
    })
}

/// Residues at every lattice point, ordered graded-lex by the label of the
/// carrying transversal.
pub fn residues(
    data: &MBIntegralData,
    pairing: &DivisorPairing,
    cone: &ResidueCone,
    bound: u64,
) -> Result<Vec<Residue>> {
    if !data.non_confluent() {
        log::warn!("the Mellin-Barnes integrand is confluent; the residue sum may not represent the integral");
    }
    let mut out: Vec<Residue> = residue_lattice(data, pairing, cone, bound)?
        .par_iter()
        .map(|p| residue_at(data, pairing, p))
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.hit.nu.graded_cmp(&b.hit.nu).then_with(|| a.hit.families.cmp(&b.hit.families)));
    Ok(out)
}

/// `Σ res · x^{−z}` over the lattice, principal powers, lattice order.
pub fn residue_sum(
    data: &MBIntegralData,
    pairing: &DivisorPairing,
    cone: &ResidueCone,
    x: &[Complex64],
    bound: u64,
) -> Result<Complex64> {
    crate::systems::check_point(x, data.n())?;
    let log_x: Vec<Complex64> = x.iter().map(|v| v.ln()).collect();
    Ok(residues(data, pairing, cone, bound)?
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| {
            let e: Complex64 = r.point.z.iter().zip(&log_x).map(|(zi, l)| l * rational::to_f64(zi)).sum();
            (-e).exp() * r.value
        })
        .fold(Complex64::zero(), |acc, t| acc + t))
}

/// Iterated contour integral around `point` (n = 2): the integrand without
/// `x^{−z}` over `|s| = outer`, `|t| = inner`, where `t` is the only vanishing
/// form of one divisor and `s` a vanishing form of the other. Returns the
/// residue normalized like [`residue_at`]; `None` when neither divisor has
/// a single vanishing form at the point.
pub fn residue_quadrature(
    data: &MBIntegralData,
    pairing: &DivisorPairing,
    point: &ResiduePoint,
    samples: usize,
) -> Option<Complex64> {
    if data.n() != 2 {
        return None;
    }
    let z = &point.z;
    let vanishing: Vec<Vec<usize>> = pairing
        .groups()
        .iter()
        .map(|g| {
            g.iter()
                .copied()
                .filter(|&f| pole_order(&data.families[f].eval(z)).is_some())
                .collect()
        })
        .collect();
    if vanishing.iter().any(|v| v.is_empty()) {
        return None;
    }
    let (inner_group, outer_group) = if vanishing[1].len() == 1 {
        (1, 0)
    } else if vanishing[0].len() == 1 {
        (0, 1)
    } else {
        return None;
    };
    let t_form = vanishing[inner_group][0];
    let s_form = vanishing[outer_group][0];
    let a = linear_matrix(data, &[s_form, t_form]);
    let a64 = nalgebra::Matrix2::from_fn(|i, j| rational::to_f64(a.get(i, j)));
    let m = a64.try_inverse()?;
    let det_a = a64.determinant();
    let z0 = [rational::to_f64(&z[0]), rational::to_f64(&z[1])];
    let (outer, inner) = (1e-2, 1e-5);
    let ones = [Complex64::one(), Complex64::one()];
    let mut total = Complex64::zero();
    for i in 0..samples {
        let t = Complex64::from_polar(inner, 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / samples as f64);
        for k in 0..samples {
            let s = Complex64::from_polar(outer, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / samples as f64);
            let zz = [z0[0] + m[(0, 0)] * s + m[(0, 1)] * t, z0[1] + m[(1, 0)] * s + m[(1, 1)] * t];
            // (1/2πi)² ∮∮ f ds dt = mean of f·s·t
            total += data.integrand(&zz, &ones) * s * t;
        }
    }
    let mean = total / (samples * samples) as f64;
    // dz = det(A)⁻¹ ds dt, normalized with |det| as in `residue_at`
    Some(mean / det_a.abs())
}

/// The sectorial domain `Θ` of the eq1 integral, in `(arg x₁, arg x₂)`.
pub mod theta {
    use std::f64::consts::PI;

    pub fn contains(t1: f64, t2: f64) -> bool {
        t1.abs() < PI / 2.0
            && t2.abs() < PI / 2.0
            && (2.0 * t2 - t1).abs() < 3.0 * PI / 4.0
            && (t2 - 2.0 * t1).abs() < 3.0 * PI / 4.0
    }

    /// Vertices of the octagon, counter-clockwise.
    pub fn vertices() -> [(f64, f64); 8] {
        let q = PI / 4.0;
        [
            (2.0 * q, q),
            (2.0 * q, 2.0 * q),
            (q, 2.0 * q),
            (-q, q),
            (-2.0 * q, -q),
            (-2.0 * q, -2.0 * q),
            (-q, -2.0 * q),
            (q, -q),
        ]
    }
}

impl FromStr for DivisorPairing {
    type Err = Error;

    /// Infers `n` from the number of groups.
    fn from_str(s: &str) -> Result<Self> {
        let n = s.split('|').count();
        Self::parse(s, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::systems::fixtures::eq1;
    use crate::systems::{build_reduction, PairSelection, PairTag};
    use crate::puiseux::PuiseuxSeries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data() -> MBIntegralData {
        MBIntegralData::new(&eq1(), vec![int(1), int(1)]).unwrap()
    }

    fn pi1() -> (DivisorPairing, ResidueCone) {
        let d = data();
        (
            DivisorPairing::parse("2,3|1,4", 2).unwrap(),
            ResidueCone::parse(d.gamma().to_vec(), "2,-1;-1,2").unwrap(),
        )
    }

    fn pi2() -> (DivisorPairing, ResidueCone) {
        let d = data();
        (
            DivisorPairing::parse("3,4|2", 2).unwrap(),
            ResidueCone::parse(d.gamma().to_vec(), "1,0;1,-2").unwrap(),
        )
    }

    #[test]
    fn convergence_criterion() {
        assert!(convergence_nonempty(&IntegerMatrix::from_rows(&[vec![2, 1], vec![1, 2]])));
        assert!(!convergence_nonempty(&IntegerMatrix::from_rows(&[vec![0, 1], vec![1, 2]])));
        assert!(!convergence_nonempty(&IntegerMatrix::from_rows(&[vec![1, 3], vec![2, 1]])));
    }

    #[test]
    fn q_polynomial_examples() {
        let d = data();
        assert_eq!(d.q_polynomial_exact(&[int(0), int(0)]), rat(1, 16));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = vec![rat(rng.gen_range(-50..50), rng.gen_range(1..9)), rat(rng.gen_range(-50..50), rng.gen_range(1..9))];
            let expected = (int(1) - &z[0] - &z[1]) / int(16);
            assert_eq!(d.q_polynomial_exact(&z), expected);
            let zc: Vec<Complex64> = z.iter().map(|v| Complex64::new(rational::to_f64(v), 0.3)).collect();
            let ec = (Complex64::one() - zc[0] - zc[1]) / 16.0;
            assert!((d.q_polynomial(&zc) - ec).norm() < 1e-12 * ec.norm().max(1.0));
        }
        let general = MBIntegralData::new(&eq1(), vec![rat(3, 2), int(2)]).unwrap();
        assert_eq!(general.q_polynomial_exact(&[int(0), int(0)]), rat(3, 16));
    }

    #[test]
    fn gamma_and_polytope() {
        let d = data();
        assert!(d.in_u_polytope(d.gamma()));
        assert!(d.clone().with_gamma(vec![rat(1, 4), rat(1, 4)]).is_ok());
        assert!(d.clone().with_gamma(vec![rat(1, 2), rat(1, 4)]).is_err());
        assert!(d.non_confluent());
        let not_diagonal = TrinomialSystem::from_columns(&[vec![2, 1], vec![0, 2]], &[vec![1, 1], vec![1, 0]]).unwrap();
        assert!(MBIntegralData::new(&not_diagonal, vec![int(1), int(1)]).is_err());
    }

    #[test]
    fn pairing_parsing() {
        let p = DivisorPairing::parse("2,3|1,4", 2).unwrap();
        assert_eq!(p.groups(), &[vec![1, 2], vec![0, 3]]);
        assert_eq!(p.to_string(), "2,3|1,4");
        assert_eq!(p.transversals().len(), 4);
        assert!(DivisorPairing::parse("2,3|3,4", 2).is_err());
        assert!(DivisorPairing::parse("2,3", 2).is_err());
        assert!(DivisorPairing::parse("2,5|1", 2).is_err());
        assert!(DivisorPairing::parse("2,|1", 2).is_err());
        assert!(matches!(
            ResidueCone::parse(vec![int(0), int(0)], "1,1;2,2"),
            Err(Error::InvalidCone(_))
        ));
    }

    #[test]
    fn lattice_points() {
        let d = data();
        let (pairing, cone) = pi1();
        let points = residue_lattice(&d, &pairing, &cone, 3).unwrap();
        let find = |z: Vec<Rational>| points.iter().find(|p| p.z == z).cloned();
        let p0 = find(vec![rat(1, 3), rat(1, 3)]).unwrap();
        assert!(p0.hits.iter().any(|h| h.families == vec![2, 3] && h.nu.0 == vec![0, 0]));
        let p1 = find(vec![int(3), int(-1)]).unwrap();
        assert!(p1.hits.iter().any(|h| h.families == vec![2, 3] && h.nu.0 == vec![1, 0]));

        let (pairing, cone) = pi2();
        let points = residue_lattice(&d, &pairing, &cone, 3).unwrap();
        let p = points.iter().find(|p| p.z == vec![int(1), int(-1)]).unwrap();
        assert!(p.hits.iter().any(|h| h.families == vec![2, 1] && h.nu.0 == vec![0, 1]));
    }

    fn compare_with_puiseux(pairing: &DivisorPairing, cone: &ResidueCone, tags: &str, bound: u64) {
        let d = data();
        let series = PuiseuxSeries::new(build_reduction(&eq1(), &tags.parse().unwrap()).unwrap(), vec![int(1), int(1)]).unwrap();
        let res = residues(&d, pairing, cone, bound + 4).unwrap();
        let mut matched = 0;
        for k in MultiIndex::up_to_degree(2, bound) {
            let z: Vec<Rational> = series.support(&k).iter().map(|m| -m).collect();
            let c = series.coefficient(&k).unwrap();
            assert!(c.phase.is_zero());
            let r = res.iter().find(|r| r.point.z == z);
            match r {
                Some(r) => {
                    assert_eq!(r.exact.as_ref().unwrap(), &c.magnitude, "{k}");
                    if !r.is_zero() {
                        assert_eq!(r.hit.nu, k);
                    }
                    matched += 1;
                }
                None => assert!(c.magnitude.is_zero(), "{k} missing"),
            }
        }
        assert!(matched > 0);
        // every nonzero residue sits on the Puiseux support
        let support: Vec<Vec<Rational>> = MultiIndex::up_to_degree(2, 4 * bound + 40)
            .iter()
            .map(|k| series.support(k).iter().map(|m| -m).collect())
            .collect();
        for r in res.iter().filter(|r| !r.is_zero()) {
            assert!(support.contains(&r.point.z), "stray residue at {:?}", r.point.z);
        }
    }

    #[test]
    fn pi1_residues_match_puiseux() {
        let (pairing, cone) = pi1();
        compare_with_puiseux(&pairing, &cone, "s0,s0", 8);
    }

    #[test]
    fn pi2_residues_match_puiseux() {
        let (pairing, cone) = pi2();
        compare_with_puiseux(&pairing, &cone, "s0,w0", 8);
    }

    #[test]
    fn bound_zero_gives_leading_term() {
        let d = data();
        let (pairing, cone) = pi1();
        let x = [Complex64::new(10.0, 0.0), Complex64::new(10.0, 0.0)];
        let v = residue_sum(&d, &pairing, &cone, &x, 0).unwrap();
        assert!((v - 10f64.powf(-2.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn residue_sum_matches_puiseux_sum() {
        let d = data();
        let (pairing, cone) = pi2();
        let x = [Complex64::new(20.0, 3.0), Complex64::new(0.7, -0.4)];
        let mb = residue_sum(&d, &pairing, &cone, &x, 30).unwrap();
        let series = PuiseuxSeries::new(build_reduction(&eq1(), &"s0,w0".parse().unwrap()).unwrap(), vec![int(1), int(1)]).unwrap();
        let p = series.evaluate(&x, 30, 0).unwrap();
        assert!((mb - p).norm() < 1e-12, "{mb} vs {p}");
    }

    #[test]
    fn quadrature_confirms_residues() {
        let d = data();
        for (pairing, cone) in [pi1(), pi2()] {
            let points = residue_lattice(&d, &pairing, &cone, 3).unwrap();
            let mut checked = 0;
            for p in &points {
                let r = residue_at(&d, &pairing, p).unwrap();
                if let Some(q) = residue_quadrature(&d, &pairing, p, 48) {
                    let scale = r.value.abs().max(1e-3);
                    assert!((q - Complex64::new(r.value, 0.0)).norm() < 1e-6 * scale, "{:?}: {} vs {q}", p.z, r.value);
                    checked += 1;
                }
            }
            assert!(checked >= 5);
        }
    }

    #[test]
    fn undesignated_family_is_reported() {
        // L3 is not designated but passes through (-1, 3) on L1 and L4.
        let d = data();
        let pairing = DivisorPairing::parse("4|1", 2).unwrap();
        let cone = ResidueCone::parse(d.gamma().to_vec(), "-1,0;0,1").unwrap();
        let err = residues(&d, &pairing, &cone, 6).unwrap_err();
        assert!(matches!(err, Error::NonSimplePole { .. }), "{err:?}");
    }

    #[test]
    fn theta_octagon() {
        assert!(theta::contains(0.0, 0.0));
        for (a, b) in theta::vertices() {
            assert!(!theta::contains(a, b));
            assert!(theta::contains(0.99 * a, 0.99 * b));
            assert!(!theta::contains(1.01 * a, 1.01 * b));
        }
    }

    #[test]
    fn identity_reduction_series_via_pairing() {
        // The Taylor series itself is the residue sum over the cone spanned by
        // the negative axes with divisors {L1}, {L2}.
        let d = data();
        let pairing = DivisorPairing::parse("1,3|2,4", 2).unwrap();
        let cone = ResidueCone::parse(d.gamma().to_vec(), "-1,0;0,-1").unwrap();
        let res = residues(&d, &pairing, &cone, 6).unwrap();
        let series = crate::taylor::TaylorSeries::new(
            build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::W0)).unwrap(),
            vec![int(1), int(1)],
        )
        .unwrap();
        for r in res {
            let k = MultiIndex(r.point.z.iter().map(|v| (-v).to_integer().to_u64().unwrap()).collect());
            assert_eq!(r.exact.unwrap(), series.coefficient(&k).unwrap());
        }
    }
}
