//! Text formats: coefficient files and measure arguments.
//!
//! A coefficient file holds one complex number per line as `re im`.
//! Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock_space::CoeffVec;
use crate::radial_measure::MeasureSpec;
use crate::report::fmt_g17;

pub fn parse_coeff_file(text: &str) -> Result<CoeffVec> {
    const OP: &str = "parse_coeff_file";
    let mut coeffs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(
                OP,
                format!("line {}: expected two numbers `re im`", lineno + 1),
            ));
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(OP, format!("line {}: bad number {s:?}", lineno + 1)))
        };
        coeffs.push(Complex64::new(num(re)?, num(im)?));
    }
    if coeffs.is_empty() {
        return Err(Error::parse(OP, "no coefficients found"));
    }
    CoeffVec::new(coeffs)
}

/// Inverse of [`parse_coeff_file`]; coefficients that underflow are written
/// as zero.
pub fn format_coeff_file(f: &CoeffVec) -> String {
    let mut out = String::new();
    for z in f.to_vec() {
        out.push_str(&fmt_g17(z.re));
        out.push(' ');
        out.push_str(&fmt_g17(z.im));
        out.push('\n');
    }
    out
}

pub fn read_coeff_file(path: &Path) -> Result<CoeffVec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::parse("read_coeff_file", format!("{}: {e}", path.display())))?;
    parse_coeff_file(&text)
}

/// A measure given inline as JSON (leading `{`) or as a path to a JSON file.
pub fn load_measure(arg: &str) -> Result<MeasureSpec> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return MeasureSpec::from_json(trimmed);
    }
    let text =
        fs::read_to_string(arg).map_err(|e| Error::parse("load_measure", format!("{arg}: {e}")))?;
    MeasureSpec::from_json(&text)
}
