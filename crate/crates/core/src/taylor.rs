//! Exact Taylor coefficients of `y^d(r)` for a reduced system
//! `rᵢ y^β⁽ⁱ⁾ + y^μ⁽ⁱ⁾ − y^ν⁽ⁱ⁾ = 0`, and evaluation of partial sums.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use dashmap::DashMap;
use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma;
use crate::intlinalg::RationalMatrix;
use crate::rational::{self, Rational};
use crate::systems::Reduction;

/// A summation index `k ∈ ℤⁿ≥0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u64>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn as_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(|&k| Rational::from_integer(BigInt::from(k))).collect()
    }

    /// `k!` = ∏ kⱼ!
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&k| rational::factorial(k)).product()
    }

    /// Graded-lexicographic order: by `|k|`, then lexicographically.
    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }

    /// All indices with `|k| ≤ max_degree`, in graded-lex order.
    pub fn up_to_degree(n: usize, max_degree: u64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut current = vec![0; n];
            compositions(n, deg, 0, &mut current, &mut out);
        }
        out
    }
}

impl From<Vec<u64>> for MultiIndex {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

// Lexicographically increasing compositions of `remaining` into the slots from `pos`.
fn compositions(n: usize, remaining: u64, pos: usize, current: &mut Vec<u64>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        compositions(n, remaining - v, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn check_exponent(reduction: &Reduction, d: &[Rational]) -> Result<()> {
    if d.len() != reduction.n() {
        return Err(Error::DimensionMismatch {
            expected: reduction.n(),
            got: d.len(),
        });
    }
    if d.iter().any(|v| v.is_negative()) {
        return Err(Error::InvalidSystem("exponent d must be nonnegative".into()));
    }
    Ok(())
}

fn check_index(reduction: &Reduction, k: &MultiIndex) -> Result<()> {
    if k.0.len() != reduction.n() {
        return Err(Error::DimensionMismatch {
            expected: reduction.n(),
            got: k.0.len(),
        });
    }
    Ok(())
}

/// `Q(k) = det(diag[κ⁻¹d + κ⁻¹β̄k] − κ⁻¹β̄·diag[k])`.
pub fn q_determinant(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Result<Rational> {
    check_exponent(reduction, d)?;
    check_index(reduction, k)?;
    let n = reduction.n();
    let a = reduction.gamma_arguments(d, k.as_slice());
    let m = reduction.linear_part();
    let mut q = RationalMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -(m.get(i, j) * Rational::from_integer(BigInt::from(k.0[j])));
            if i == j {
                v += &a[i];
            }
            q.set(i, j, v);
        }
    }
    Ok(q.determinant())
}

/// Exact `cₖ = (−1)^|k|/k! · Γ(a)/Γ(a − k + I) · Q(k)` with `a = κ⁻¹d + κ⁻¹β̄k`.
///
/// The gamma ratio is folded into the rows of `diag(a) − diag(k)·κ⁻¹β̄`
/// (which has the same determinant as `Q`), so arguments at nonpositive
/// integers never produce a pole.
pub fn taylor_coefficient(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Result<Rational> {
    check_exponent(reduction, d)?;
    check_index(reduction, k)?;
    let n = reduction.n();
    let a = reduction.gamma_arguments(d, k.as_slice());
    let m = reduction.linear_part();
    let mut rows = RationalMatrix::zeros(n);
    for j in 0..n {
        let kj = k.0[j];
        if kj == 0 {
            rows.set(j, j, Rational::one());
            continue;
        }
        // (a−1)(a−2)…(a−k+1) = Γ(a)/Γ(a−k+1)
        let mut p = Rational::one();
        for s in 1..kj {
            p *= &a[j] - Rational::from_integer(BigInt::from(s));
        }
        let kr = Rational::from_integer(BigInt::from(kj));
        for i in 0..n {
            let mut v = -(&kr * m.get(j, i));
            if i == j {
                v += &a[j];
            }
            rows.set(j, i, v * &p);
        }
    }
    let mut c = rows.determinant() / Rational::from_integer(k.factorial());
    if k.degree() % 2 == 1 {
        c = -c;
    }
    Ok(c)
}

/// Same coefficient computed in floating point from the gamma-ratio module;
/// fails where that ratio hits a non-removable pole.
pub fn taylor_coefficient_float(reduction: &Reduction, d: &[Rational], k: &MultiIndex) -> Result<f64> {
    let q = q_determinant(reduction, d, k)?;
    let a = reduction.gamma_arguments(d, k.as_slice());
    let b: Vec<Rational> = a
        .iter()
        .zip(&k.0)
        .map(|(ai, &kj)| ai - Rational::from_integer(BigInt::from(kj)) + Rational::one())
        .collect();
    let ratio = gamma::gamma_ratio_vector(&a, &b)?;
    let sign = if k.degree() % 2 == 1 { -1.0 } else { 1.0 };
    let fact = rational::to_f64(&Rational::from_integer(k.factorial()));
    Ok(sign * ratio * rational::to_f64(&q) / fact)
}

/// The Taylor series of `y^d(r)` with lazily computed, memoized coefficients.
#[derive(Clone)]
pub struct TaylorSeries {
    reduction: Arc<Reduction>,
    d: Vec<Rational>,
    cache: Arc<DashMap<MultiIndex, Rational>>,
}

impl fmt::Debug for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaylorSeries")
            .field("selection", self.reduction.selection())
            .field("d", &self.d)
            .field("cached", &self.cache.len())
            .finish()
    }
}

impl TaylorSeries {
    pub fn new(reduction: Reduction, d: Vec<Rational>) -> Result<Self> {
        check_exponent(&reduction, &d)?;
        Ok(Self {
            reduction: Arc::new(reduction),
            d,
            cache: Arc::new(DashMap::new()),
        })
    }

    pub fn reduction(&self) -> &Reduction {
        &self.reduction
    }

    pub fn d(&self) -> &[Rational] {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.reduction.n()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Result<Rational> {
        if let Some(c) = self.cache.get(k) {
            return Ok(c.clone());
        }
        let c = taylor_coefficient(&self.reduction, &self.d, k)?;
        Ok(self.cache.entry(k.clone()).or_insert(c).clone())
    }

    /// Coefficients for `|k| ≤ max_degree` in graded-lex order.
    pub fn coefficients(&self, max_degree: u64) -> Result<Vec<(MultiIndex, Rational)>> {
        MultiIndex::up_to_degree(self.n(), max_degree)
            .into_par_iter()
            .map(|k| self.coefficient(&k).map(|c| (k, c)))
            .collect()
    }

    /// `Σ_{|k| ≤ max_degree} cₖ rᵏ`, terms added in graded-lex order.
    pub fn evaluate(&self, r: &[Complex64], max_degree: u64) -> Result<Complex64> {
        if r.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: r.len(),
            });
        }
        let terms: Vec<Complex64> = MultiIndex::up_to_degree(self.n(), max_degree)
            .into_par_iter()
            .map(|k| {
                let c = rational::to_f64(&self.coefficient(&k)?);
                Ok(monomial(r, &k) * c)
            })
            .collect::<Result<_>>()?;
        Ok(terms.into_iter().fold(Complex64::zero(), |acc, t| acc + t))
    }

    /// `Σ_{|k|=m} |cₖ rᵏ|` for `m = 0..=max_degree`; a cheap convergence
    /// diagnostic for a partial sum at `r`.
    pub fn degree_norms(&self, r: &[Complex64], max_degree: u64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; max_degree as usize + 1];
        for (k, c) in self.coefficients(max_degree)? {
            out[k.degree() as usize] += (monomial(r, &k) * rational::to_f64(&c)).norm();
        }
        Ok(out)
    }

    /// CSV with columns `k1..kn,coefficient`, coefficients as `p/q`.
    pub fn write_csv<W: Write>(&self, out: &mut W, max_degree: u64) -> Result<()> {
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        let header: Vec<String> = (1..=self.n()).map(|j| format!("k{j}")).collect();
        writeln!(out, "{},coefficient", header.join(",")).map_err(io)?;
        for (k, c) in self.coefficients(max_degree)? {
            let ks: Vec<String> = k.0.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{}", ks.join(","), rational::format(&c)).map_err(io)?;
        }
        Ok(())
    }
}

pub(crate) fn monomial(r: &[Complex64], k: &MultiIndex) -> Complex64 {
    r.iter()
        .zip(&k.0)
        .fold(Complex64::one(), |acc, (ri, &kj)| acc * ri.powi(kj as i32))
}

/// Free-function form of [`TaylorSeries::evaluate`].
pub fn evaluate_taylor(series: &TaylorSeries, x: &[Complex64], max_degree: u64) -> Result<Complex64> {
    series.evaluate(x, max_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::rational_inverse;
    use crate::rational::{int, rat};
    use crate::systems::fixtures::{eq1, quadratic};
    use crate::systems::{build_reduction, PairSelection, PairTag, TrinomialSystem};
    use proptest::prelude::*;

    fn k(v: &[u64]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn reduction(sys: &TrinomialSystem, tags: &str) -> Reduction {
        build_reduction(sys, &tags.parse().unwrap()).unwrap()
    }

    #[test]
    fn graded_lex_enumeration() {
        let ks = MultiIndex::up_to_degree(2, 2);
        let expected: Vec<MultiIndex> = [[0, 0], [0, 1], [1, 0], [0, 2], [1, 1], [2, 0]]
            .iter()
            .map(|v| k(v))
            .collect();
        assert_eq!(ks, expected);
        assert_eq!(MultiIndex::up_to_degree(3, 4).len(), 35);
        for w in ks.windows(2) {
            assert_eq!(w[0].graded_cmp(&w[1]), Ordering::Less);
        }
    }

    #[test]
    fn q_determinant_examples() {
        let d = vec![int(1), int(1)];
        let w0 = reduction(&eq1(), "w0,w0");
        let s0 = reduction(&eq1(), "s0,s0");
        for k1 in 0..6 {
            for k2 in 0..6 {
                let kk = k(&[k1, k2]);
                let (a, b) = (k1 as i64, k2 as i64);
                assert_eq!(q_determinant(&w0, &d, &kk).unwrap(), rat(1 + a + b, 16));
                assert_eq!(q_determinant(&s0, &d, &kk).unwrap(), rat(1 - 4 * a - 4 * b, 9));
            }
        }
        let mixed = reduction(&eq1(), "s0,w0");
        assert_eq!(q_determinant(&mixed, &d, &k(&[0, 0])).unwrap(), rat(1, 16));
    }

    #[test]
    fn quadratic_coefficients() {
        let series = TaylorSeries::new(reduction(&quadratic(), "w0"), vec![int(1)]).unwrap();
        let expected = [rat(1, 1), rat(-1, 2), rat(1, 8), rat(0, 1), rat(-1, 128)];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(&series.coefficient(&k(&[i as u64])).unwrap(), e);
        }
        let x = Complex64::new(0.2, 0.0);
        let exact = (-0.2 + 4.04f64.sqrt()) / 2.0;
        assert!((series.evaluate(&[x], 30).unwrap().re - exact).abs() < 1e-12);
    }

    #[test]
    fn eq1_identity_coefficients() {
        let d = vec![int(1), int(1)];
        let series = TaylorSeries::new(reduction(&eq1(), "w0,w0"), d).unwrap();
        assert_eq!(series.coefficient(&k(&[1, 0])).unwrap(), rat(-1, 4));
        assert_eq!(series.coefficient(&k(&[0, 1])).unwrap(), rat(-1, 4));
        assert_eq!(series.coefficient(&k(&[0, 0])).unwrap(), int(1));
        let zero = [Complex64::zero(), Complex64::zero()];
        assert_eq!(series.evaluate(&zero, 10).unwrap(), Complex64::one());
    }

    /// `c₀ = 1` even when `κ⁻¹d` has zero entries.
    #[test]
    fn constant_term_with_vanishing_arguments() {
        let s0 = reduction(&eq1(), "s0,s0");
        assert_eq!(taylor_coefficient(&s0, &[int(0), int(0)], &k(&[0, 0])).unwrap(), int(1));
        assert_eq!(taylor_coefficient(&s0, &[int(1), int(0)], &k(&[0, 0])).unwrap(), int(1));
        assert_eq!(taylor_coefficient(&s0, &[int(0), int(0)], &k(&[1, 0])).unwrap(), int(0));
    }

    #[test]
    fn rejects_bad_exponent() {
        let red = reduction(&eq1(), "w0,w0");
        assert!(TaylorSeries::new(red.clone(), vec![int(-1), int(1)]).is_err());
        assert!(TaylorSeries::new(red, vec![int(1)]).is_err());
    }

    #[test]
    fn csv_dump() {
        let series = TaylorSeries::new(reduction(&eq1(), "w0,w0"), vec![int(1), int(1)]).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf, 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k1,k2,coefficient\n0,0,1\n0,1,-1/4\n1,0,-1/4\n");
    }

    #[test]
    fn evaluation_is_reproducible() {
        let series = TaylorSeries::new(reduction(&eq1(), "w0,w0"), vec![int(1), int(1)]).unwrap();
        let x = [Complex64::new(0.1, 0.02), Complex64::new(-0.05, 0.1)];
        let a = series.evaluate(&x, 20).unwrap();
        let fresh = TaylorSeries::new(reduction(&eq1(), "w0,w0"), vec![int(1), int(1)]).unwrap();
        assert_eq!(a, fresh.evaluate(&x, 20).unwrap());
        assert_eq!(a, series.evaluate(&x, 20).unwrap());
    }

    fn random_system() -> impl Strategy<Value = (TrinomialSystem, PairSelection, Vec<Rational>)> {
        let n = 2usize;
        (
            prop::collection::vec(0i64..=4, n * n),
            prop::collection::vec(0i64..=4, n * n),
            prop::collection::vec(0usize..3, n),
            prop::collection::vec((0i64..=6, 1i64..=4), n),
        )
            .prop_filter_map("valid system and selection", move |(w, s, tags, d)| {
                let cols = |v: &Vec<i64>| -> Vec<Vec<i64>> { v.chunks(n).map(|c| c.to_vec()).collect() };
                let sys = TrinomialSystem::from_columns(&cols(&w), &cols(&s)).ok()?;
                let sel = PairSelection::new(tags.iter().map(|&t| PairTag::ALL[t]).collect());
                build_reduction(&sys, &sel).ok()?;
                let d = d.iter().map(|&(p, q)| rat(p, q)).collect();
                Some((sys, sel, d))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn constant_coefficient_is_one((sys, sel, d) in random_system()) {
            let red = build_reduction(&sys, &sel).unwrap();
            prop_assert_eq!(taylor_coefficient(&red, &d, &MultiIndex::zero(2)).unwrap(), int(1));
        }

        #[test]
        fn exact_matches_float((sys, sel, d) in random_system()) {
            let red = build_reduction(&sys, &sel).unwrap();
            for kk in MultiIndex::up_to_degree(2, 8) {
                let exact = rational::to_f64(&taylor_coefficient(&red, &d, &kk).unwrap());
                if let Ok(float) = taylor_coefficient_float(&red, &d, &kk) {
                    prop_assert!((exact - float).abs() <= 1e-10 * exact.abs().max(1e-300) + 1e-300,
                        "{} {}: exact {} float {}", sel, kk, exact, float);
                }
            }
        }

        /// For the identity selection the coefficients follow directly from
        /// `ω⁻¹(d + σk)` without going through the reduction.
        #[test]
        fn identity_selection_specialization((sys, _sel, d) in random_system()) {
            let red = build_reduction(&sys, &PairSelection::uniform(2, PairTag::W0)).unwrap();
            let w_inv = rational_inverse(sys.omega()).unwrap();
            let sigma = sys.sigma().to_rational();
            for kk in MultiIndex::up_to_degree(2, 5) {
                let kr = kk.as_rationals();
                let mut v = d.clone();
                for (vi, s) in v.iter_mut().zip(sigma.mul_vec(&kr)) {
                    *vi += s;
                }
                let a = w_inv.mul_vec(&v);
                let lin = w_inv.mul(&sigma);
                let mut q = RationalMatrix::zeros(2);
                for i in 0..2 {
                    for j in 0..2 {
                        let mut e = -(lin.get(i, j) * &kr[j]);
                        if i == j {
                            e += &a[i];
                        }
                        q.set(i, j, e);
                    }
                }
                // Only compare where 1/aⱼ is defined.
                if a.iter().zip(&kk.0).any(|(ai, &kj)| kj == 0 && ai.is_zero()) {
                    continue;
                }
                let mut expected = q.determinant();
                for j in 0..2 {
                    if kk.0[j] == 0 {
                        expected /= &a[j];
                    } else {
                        expected *= gamma::falling_product(&a[j], kk.0[j]);
                    }
                }
                expected /= Rational::from_integer(kk.factorial());
                if kk.degree() % 2 == 1 {
                    expected = -expected;
                }
                prop_assert_eq!(taylor_coefficient(&red, &d, &kk).unwrap(), expected);
            }
        }
    }
}
