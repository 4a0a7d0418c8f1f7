//! Scan reports: one row per (series, parameter, N) cell, plus summary
//! scalars and free-form metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Shortest `%.17g`-style rendering: 17 significant digits, trailing zeros
/// dropped, exponent form outside [1e−5, 1e17). Round-trips every double.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mant),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A column-named table rendered as CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// One measured cell. `value` is `None` when the computation overflowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub series: String,
    pub param: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: Option<f64>,
    /// value / value at the previous N of the same series and parameter.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScanReport {
    pub kind: String,
    pub metadata: BTreeMap<String, Value>,
    pub rows: Vec<ReportRow>,
    pub summary: BTreeMap<String, f64>,
    /// Series whose values must not decrease along N.
    pub nested_series: Vec<String>,
}

impl ScanReport {
    pub fn new(kind: impl Into<String>) -> Self {
        ScanReport {
            kind: kind.into(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn mark_nested(&mut self, series: &str) {
        if !self.nested_series.iter().any(|s| s == series) {
            self.nested_series.push(series.to_string());
        }
    }

    /// Append a cell; the ratio is taken against the last row with the same
    /// series and parameter.
    pub fn push(&mut self, series: &str, param: f64, n: usize, value: Option<f64>) {
        let prev = self
            .rows
            .iter()
            .rev()
            .find(|r| r.series == series && r.param == param)
            .and_then(|r| r.value);
        let ratio = match (prev, value) {
            (Some(p), Some(v)) if p != 0.0 => Some(v / p),
            _ => None,
        };
        self.rows.push(ReportRow {
            series: series.to_string(),
            param,
            n,
            value,
            ratio,
        });
    }

    pub fn series(&self, name: &str) -> impl Iterator<Item = &ReportRow> {
        let name = name.to_string();
        self.rows.iter().filter(move |r| r.series == name)
    }

    /// Value of a cell, if present and finite.
    pub fn value(&self, series: &str, param: f64, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.series == series && r.param == param && r.n == n)
            .and_then(|r| r.value)
    }

    /// Ratio value(n_hi) / value(n_lo) for one series and parameter.
    pub fn growth(&self, series: &str, param: f64, n_lo: usize, n_hi: usize) -> Option<f64> {
        Some(self.value(series, param, n_hi)? / self.value(series, param, n_lo)?)
    }

    /// Cells in nested series where the value drops as N grows.
    pub fn nesting_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.nested_series {
            let mut last: BTreeMap<u64, (usize, f64)> = BTreeMap::new();
            for r in self.series(s) {
                let Some(v) = r.value else { continue };
                let key = r.param.to_bits();
                if let Some(&(n0, v0)) = last.get(&key) {
                    // allow rounding noise at the level of the iteration tolerance
                    if r.n > n0 && v < v0 * (1.0 - 1e-10) {
                        out.push(format!(
                            "{s} at param {}: N={} gives {} < {} at N={n0}",
                            r.param, r.n, v, v0
                        ));
                    }
                }
                last.insert(key, (r.n, v));
            }
        }
        out
    }

    pub fn check_nesting(&self) -> Result<()> {
        match self.nesting_violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::Invariant {
                op: "ScanReport",
                msg: v.clone(),
            }),
        }
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["series", "param", "N", "value", "ratio"]);
        for r in &self.rows {
            t.push(vec![
                r.series.clone(),
                fmt_g17(r.param),
                r.n.to_string(),
                r.value.map_or_else(|| "overflow".into(), fmt_g17),
                r.ratio.map_or_else(String::new, fmt_g17),
            ]);
        }
        t
    }

    /// Cells only; summary scalars would break plain CSV readers, so they
    /// live in the JSON form and in [`ScanReport::summary_line`].
    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serialises")
    }

    /// One-line human summary, e.g. for a CLI status line.
    pub fn summary_line(&self) -> String {
        let mut s = format!("{}: {} cells", self.kind, self.rows.len());
        for (k, v) in &self.summary {
            let _ = write!(s, ", {k}={}", fmt_g17(*v));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_formats() {
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_g17(0.25), "0.25");
        assert_eq!(fmt_g17(-2.0), "-2");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(0.0), "0");
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            std::f64::consts::PI,
            1e-300,
            6.02214076e23,
            0.1,
            1.0 - f64::EPSILON,
            12345.678,
        ] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ratios_and_nesting() {
        let mut r = ScanReport::new("t");
        r.mark_nested("a");
        r.push("a", 1.0, 2, Some(1.0));
        r.push("b", 1.0, 2, Some(5.0));
        r.push("a", 1.0, 4, Some(2.0));
        r.push("a", 2.0, 4, Some(3.0));
        assert_eq!(r.rows[2].ratio, Some(2.0));
        assert_eq!(r.rows[3].ratio, None);
        assert!(r.check_nesting().is_ok());
        r.push("a", 1.0, 8, Some(1.5));
        assert_eq!(r.nesting_violations().len(), 1);
        let csv = r.to_csv();
        assert!(csv.starts_with("series,param,N,value,ratio\n"));
        assert!(csv.contains("a,1,4,2,2\n"));
    }
}
