//! Exact integer and rational linear algebra on small square matrices.
//!
//! Matrices are stored row-major. Where a matrix collects exponent vectors
//! (ω, σ, κ, β̄), each exponent vector is a *column*.

use std::fmt;

use num::bigint::BigInt;
use num::integer::Integer as _;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Self {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diagonal(values: &[i64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, BigInt::from(*v));
        }
        m
    }

    /// Builds a matrix from rows. Panics if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<i64>]) -> Self {
        Self::from_rows(columns).transpose()
    }

    pub fn from_bigint_columns(columns: &[Vec<BigInt>]) -> Self {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "matrix must be square");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.n + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.n..(i + 1) * self.n].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            entries: self.entries.iter().map(|v| Rational::from_integer(v.clone())).collect(),
        }
    }

    /// Fraction-free Gaussian elimination (Bareiss).
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i)).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Determinant with row `skip_row` and column `skip_col` removed.
    fn minor(&self, skip_row: usize, skip_col: usize) -> BigInt {
        if self.n == 1 {
            return BigInt::one();
        }
        let mut sub = Self::zeros(self.n - 1);
        for (r, i) in (0..self.n).filter(|&i| i != skip_row).enumerate() {
            for (c, j) in (0..self.n).filter(|&j| j != skip_col).enumerate() {
                sub.set(r, c, self.get(i, j).clone());
            }
        }
        sub.determinant()
    }

    /// Leading principal minor of order `k` (1-based).
    pub fn leading_minor(&self, k: usize) -> BigInt {
        assert!(k >= 1 && k <= self.n);
        let mut sub = Self::zeros(k);
        for i in 0..k {
            for j in 0..k {
                sub.set(i, j, self.get(i, j).clone());
            }
        }
        sub.determinant()
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "[{}]", row.join(","))?;
        }
        write!(f, "]")
    }
}

/// Square matrix of exact rationals, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Rational> {
        self.entries[i * self.n..(i + 1) * self.n].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Rational::zero();
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_integer(&self, other: &IntegerMatrix) -> Self {
        self.mul(&other.to_rational())
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| rational::dot(&self.entries[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Gaussian elimination over the rationals.
    pub fn determinant(&self) -> Rational {
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = (0..n).map(|i| self.row(i)).collect();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                a.swap(k, p);
                det = -det;
            }
            det *= &a[k][k];
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] / &a[k][k];
                for j in k..n {
                    let v = &a[k][j] * &factor;
                    a[i][j] -= v;
                }
            }
        }
        det
    }

    /// Solves `self * x = b` exactly; `None` when singular.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut row = self.row(i);
                row.push(b[i].clone());
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
            let pivot = a[k][k].clone();
            for v in a[k].iter_mut() {
                *v /= &pivot;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let factor = a[i][k].clone();
                for j in k..=n {
                    let v = &a[k][j] * &factor;
                    a[i][j] -= v;
                }
            }
        }
        Some(a.into_iter().map(|row| row[n].clone()).collect())
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            let row: Vec<String> = self.row(i).iter().map(rational::format).collect();
            write!(f, "[{}]", row.join(","))?;
        }
        write!(f, "]")
    }
}

/// `C · M · F = S` with `C`, `F` unimodular and `S = diag(q₁, …, qₙ)`,
/// `qⱼ | qⱼ₊₁`, `qⱼ > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub c: IntegerMatrix,
    pub s: IntegerMatrix,
    pub f: IntegerMatrix,
}

impl SnfDecomposition {
    /// The invariant factors `q₁, …, qₙ`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.s.dim()).map(|i| self.s.get(i, i).clone()).collect()
    }

    /// Checks every invariant by exact arithmetic against the input matrix.
    pub fn verify(&self, m: &IntegerMatrix) -> bool {
        let n = m.dim();
        if self.c.mul(m).mul(&self.f) != self.s || !self.s.is_diagonal() {
            return false;
        }
        if self.c.determinant().abs() != BigInt::one() || self.f.determinant().abs() != BigInt::one() {
            return false;
        }
        let q = self.invariant_factors();
        q.iter().all(|v| v.is_positive()) && (0..n.saturating_sub(1)).all(|j| q[j + 1].is_multiple_of(&q[j]))
    }
}

fn swap_rows(m: &mut IntegerMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.dim() {
        let va = m.get(a, j).clone();
        let vb = m.get(b, j).clone();
        m.set(a, j, vb);
        m.set(b, j, va);
    }
}

fn swap_cols(m: &mut IntegerMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.dim() {
        let va = m.get(i, a).clone();
        let vb = m.get(i, b).clone();
        m.set(i, a, vb);
        m.set(i, b, va);
    }
}

/// row[target] -= q * row[source]
fn row_axpy(m: &mut IntegerMatrix, target: usize, source: usize, q: &BigInt) {
    for j in 0..m.dim() {
        let v = m.get(target, j) - q * m.get(source, j);
        m.set(target, j, v);
    }
}

/// col[target] -= q * col[source]
fn col_axpy(m: &mut IntegerMatrix, target: usize, source: usize, q: &BigInt) {
    for i in 0..m.dim() {
        let v = m.get(i, target) - q * m.get(i, source);
        m.set(i, target, v);
    }
}

fn negate_row(m: &mut IntegerMatrix, i: usize) {
    for j in 0..m.dim() {
        let v = -m.get(i, j);
        m.set(i, j, v);
    }
}

/// Smith normal form by row/column reduction. The pivot is the nonzero entry
/// of least absolute value in the trailing block, ties broken by the lowest
/// (row, column).
pub fn smith_normal_form(m: &IntegerMatrix) -> Result<SnfDecomposition> {
    if m.determinant().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = m.dim();
    let mut a = m.clone();
    let mut c = IntegerMatrix::identity(n);
    let mut f = IntegerMatrix::identity(n);

    for t in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let v = a.get(i, j);
                    if v.is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => v.abs() < a.get(pi, pj).abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = pivot.expect("nonsingular matrix has a nonzero trailing block");
            swap_rows(&mut a, t, pi);
            swap_rows(&mut c, t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut f, t, pj);

            let mut clean = true;
            for i in t + 1..n {
                let q = a.get(i, t).div_floor(a.get(t, t));
                if !q.is_zero() {
                    row_axpy(&mut a, i, t, &q);
                    row_axpy(&mut c, i, t, &q);
                }
                clean &= a.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let q = a.get(t, j).div_floor(a.get(t, t));
                if !q.is_zero() {
                    col_axpy(&mut a, j, t, &q);
                    col_axpy(&mut f, j, t, &q);
                }
                clean &= a.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into the pivot row and retry.
            let pivot_value = a.get(t, t).clone();
            let offending = (t + 1..n).find(|&i| (t + 1..n).any(|j| !a.get(i, j).is_multiple_of(&pivot_value)));
            match offending {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut a, t, i, &minus_one);
                    row_axpy(&mut c, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            negate_row(&mut a, t);
            negate_row(&mut c, t);
        }
    }
    Ok(SnfDecomposition { c, s: a, f })
}

/// Inverse as `F · S⁻¹ · C`, cross-checked against the adjugate formula.
pub fn rational_inverse(m: &IntegerMatrix) -> Result<RationalMatrix> {
    let snf = smith_normal_form(m)?;
    let n = m.dim();
    let mut s_inv = RationalMatrix::zeros(n);
    for i in 0..n {
        s_inv.set(i, i, Rational::new(BigInt::one(), snf.s.get(i, i).clone()));
    }
    let inv = snf.f.to_rational().mul(&s_inv).mul(&snf.c.to_rational());
    debug_assert_eq!(inv, adjugate_inverse(m)?, "SNF and adjugate inverses disagree");
    Ok(inv)
}

/// Inverse as `adj(M) / det(M)`.
pub fn adjugate_inverse(m: &IntegerMatrix) -> Result<RationalMatrix> {
    let det = m.determinant();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = m.dim();
    let mut inv = RationalMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // (adj M)_{ij} = (-1)^{i+j} · minor_{ji}
            let mut cofactor = m.minor(j, i);
            if (i + j) % 2 == 1 {
                cofactor = -cofactor;
            }
            inv.set(i, j, Rational::new(cofactor, det.clone()));
        }
    }
    Ok(inv)
}
