//! Ratios of gamma functions, read as meromorphic functions with removable
//! singularities.
//!
//! `Γ(a)/Γ(b)` is defined for every pair of rationals except when `a` is a
//! pole and `b` is not:
//!
//! * neither argument a pole: the ordinary quotient;
//! * `b = -n` a pole, `a` not: `0`;
//! * `a = -m`, `b = -n` both poles: the limit of `Γ(-m+ε)/Γ(-n+ε)`, which is
//!   `(-1)^(n-m) n!/m!`.
//!
//! When `a - b` is an integer the value is an exact rational and is computed
//! with `Γ(z+1) = zΓ(z)`; otherwise a log-gamma float path is used.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn pole_error(a: &Rational, b: &Rational) -> Error {
    Error::Pole {
        a: rational::format(a),
        b: rational::format(b),
    }
}

/// `sin(πx)` with the argument reduced exactly first, so values near large
/// integers keep their relative accuracy.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    (std::f64::consts::PI * r).sin()
}

/// `ln Γ(x)` for `x ≥ 1/2`.
fn ln_gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `(ln|Γ(x)|, sign Γ(x))`; `None` at poles.
pub fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x >= 0.5 {
        return Some((ln_gamma_lanczos(x), 1.0));
    }
    if x == x.floor() {
        return None;
    }
    let s = sin_pi(x);
    let (lg, _) = ln_gamma_signed(1.0 - x)?;
    Some((std::f64::consts::PI.ln() - s.abs().ln() - lg, s.signum()))
}

/// Float path: `Γ(a)/Γ(b)` through log-gamma with reflection.
pub fn gamma_ratio_float(a: f64, b: f64) -> Result<f64> {
    let a_pole = a <= 0.0 && a == a.floor();
    let b_pole = b <= 0.0 && b == b.floor();
    match (a_pole, b_pole) {
        (true, true) => {
            let m = (-a) as u64;
            let n = (-b) as u64;
            let sign = if (n + m).is_multiple_of(2) { 1.0 } else { -1.0 };
            // n!/m! as a short product
            let (lo, hi) = (m.min(n), m.max(n));
            let product = (lo + 1..=hi).fold(1.0, |acc, v| acc * v as f64);
            Ok(sign * if n >= m { product } else { 1.0 / product })
        }
        (false, true) => Ok(0.0),
        (true, false) => Err(Error::Pole {
            a: a.to_string(),
            b: b.to_string(),
        }),
        (false, false) => {
            let (la, sa) = ln_gamma_signed(a).unwrap();
            let (lb, sb) = ln_gamma_signed(b).unwrap();
            Ok(sa * sb * (la - lb).exp())
        }
    }
}

/// Exact path, valid when `a - b` is an integer.
pub fn gamma_ratio_exact(a: &Rational, b: &Rational) -> Result<Rational> {
    let offset = a - b;
    if !offset.is_integer() {
        return Err(Error::NotIntegerOffset {
            a: rational::format(a),
            b: rational::format(b),
        });
    }
    let a_pole = rational::is_nonpositive_integer(a);
    let b_pole = rational::is_nonpositive_integer(b);
    match (a_pole, b_pole) {
        (true, true) => {
            let m = (-a.to_integer()).to_u64().expect("pole index fits in u64");
            let n = (-b.to_integer()).to_u64().expect("pole index fits in u64");
            let value = Rational::new(rational::factorial(n), rational::factorial(m));
            Ok(if (n + m).is_multiple_of(2) { value } else { -value })
        }
        (false, true) => Ok(Rational::zero()),
        (true, false) => Err(pole_error(a, b)),
        (false, false) => {
            let c = offset.to_integer();
            let steps = c.abs().to_u64().expect("offset fits in u64");
            let base = if c.is_negative() { a } else { b };
            let mut product = Rational::one();
            let mut term = base.clone();
            for _ in 0..steps {
                product *= &term;
                term += Rational::one();
            }
            Ok(if c.is_negative() { product.recip() } else { product })
        }
    }
}

/// `Γ(a)/Γ(b)` under the removable-singularity convention. Exact whenever
/// `a - b` is an integer, float otherwise.
pub fn gamma_ratio(a: &Rational, b: &Rational) -> Result<f64> {
    if (a - b).is_integer() {
        return gamma_ratio_exact(a, b).map(|v| rational::to_f64(&v));
    }
    let a_pole = rational::is_nonpositive_integer(a);
    let b_pole = rational::is_nonpositive_integer(b);
    match (a_pole, b_pole) {
        (true, _) => Err(pole_error(a, b)),
        (false, true) => Ok(0.0),
        (false, false) => gamma_ratio_float(rational::to_f64(a), rational::to_f64(b)),
    }
}

/// `Γ(a)/Γ(b) = ∏ⱼ Γ(aⱼ)/Γ(bⱼ)`, with singularities resolved per component.
pub fn gamma_ratio_vector(a: &[Rational], b: &[Rational]) -> Result<f64> {
    check_len(a, b)?;
    a.iter().zip(b).try_fold(1.0, |acc, (x, y)| Ok(acc * gamma_ratio(x, y)?))
}

/// Exact counterpart of [`gamma_ratio_vector`]; every `aⱼ - bⱼ` must be an
/// integer.
pub fn gamma_ratio_vector_exact(a: &[Rational], b: &[Rational]) -> Result<Rational> {
    check_len(a, b)?;
    a.iter()
        .zip(b)
        .try_fold(Rational::one(), |acc, (x, y)| Ok(acc * gamma_ratio_exact(x, y)?))
}

fn check_len(a: &[Rational], b: &[Rational]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// `(a-1)(a-2)···(a-k+1)`, which is `Γ(a)/Γ(a-k+1)` for `k ≥ 1`.
pub fn falling_product(a: &Rational, k: u64) -> Rational {
    (1..k).fold(Rational::one(), |acc, m| acc * (a - Rational::from_integer(BigInt::from(m))))
}

/// Complex `ln Γ(z)` (Lanczos, reflection for `Re z < 1/2`). The imaginary
/// part is only defined modulo 2π.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(Complex64::new(LANCZOS[0], 0.0), |acc, (i, c)| acc + *c / (z + (i + 1) as f64));
    Complex64::new(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + series.ln()
}

pub fn gamma_complex(z: Complex64) -> Complex64 {
    ln_gamma_complex(z).exp()
}

/// `1/Γ(z)`, entire; exactly zero at the poles of `Γ`.
pub fn rgamma_complex(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma_complex(z)).exp()
}
