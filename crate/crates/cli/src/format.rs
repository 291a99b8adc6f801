use num::complex::Complex64;
use serde_json::{json, Value};

use trinomial::rational;
use trinomial::{IntegerMatrix, RationalMatrix};

/// `(re, im)` with 17 significant digits.
pub fn complex(v: Complex64) -> String {
    format!("({:.16e}, {:.16e})", v.re, v.im)
}

pub fn complex_json(v: Complex64) -> Value {
    json!([v.re, v.im])
}

/// Row-major `[[a,b],[c,d]]`.
pub fn integer_matrix(m: &IntegerMatrix) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| format!("[{}]", m.row(i).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

pub fn rational_matrix(m: &RationalMatrix) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| format!("[{}]", m.row(i).iter().map(rational::format).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}
