//! Truncated power series and their plain-text coefficient format.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Write as _;

/// Coefficients `c_0..c_N` of a truncated Taylor expansion with a bound on
/// the discarded tail, valid on `|z| ≤ r_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    pub coeffs: Vec<Complex64>,
    pub tail_bound: f64,
    pub r_max: f64,
}

impl TaylorSeries {
    pub fn new(coeffs: Vec<Complex64>, tail_bound: f64, r_max: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("Taylor series needs at least one coefficient"));
        }
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::invalid(format!("r_max must lie in (0, 1), got {r_max}")));
        }
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::invalid(format!("tail bound must be finite and non-negative, got {tail_bound}")));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite Taylor coefficient"));
        }
        Ok(TaylorSeries { coeffs, tail_bound, r_max })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value and derivative by Horner's scheme.
    pub fn jet(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    }

    /// Plain-text form: optional `# tail_bound` / `# r_max` header lines,
    /// then one `index re im` line per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tail_bound {:.17e}", self.tail_bound);
        let _ = writeln!(out, "# r_max {:.17e}", self.r_max);
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{k} {:.17e} {:.17e}", c.re, c.im);
        }
        out
    }

    /// Parses the format written by [`TaylorSeries::to_text`]. Missing
    /// header lines default to a zero tail bound and `r_max = 0.999`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut tail_bound = 0.0;
        let mut r_max = 0.999;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("tail_bound"), Some(v)) => tail_bound = parse_f64(v, line_no)?,
                    (Some("r_max"), Some(v)) => r_max = parse_f64(v, line_no)?,
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `index re im`, found {} fields", fields.len()),
                });
            }
            let idx: usize = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad index `{}`", fields[0]),
            })?;
            if idx != coeffs.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected index {}, found {idx}", coeffs.len()),
                });
            }
            let re = parse_f64(fields[1], line_no)?;
            let im = parse_f64(fields[2], line_no)?;
            coeffs.push(Complex64::new(re, im));
        }
        if coeffs.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "no coefficients".into(),
            });
        }
        TaylorSeries::new(coeffs, tail_bound, r_max).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad number `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite number `{s}`"),
        });
    }
    Ok(v)
}

/// Truncated product of two coefficient vectors, keeping degrees `0..=n`.
pub(crate) fn mul_trunc(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for (i, &x) in a.iter().enumerate().take(n + 1) {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}
