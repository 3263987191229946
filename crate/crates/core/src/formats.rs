//! File formats: uniform axes, labelled CSV tables, and phase-space grids.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file parses back to the identical `f64` values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};

/// Uniformly spaced sample positions `start + i * step`, `i < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    /// `count` points spanning `[lo, hi]` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(TomoError::Grid(format!("bad axis {lo}:{hi}:{count}")));
        }
        Ok(Self { start: lo, step: (hi - lo) / (count - 1) as f64, count })
    }

    /// Symmetric axis `[-half, half]`.
    pub fn symmetric(half: f64, count: usize) -> Result<Self> {
        Self::linspace(-half, half, count)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.value(self.count.saturating_sub(1))
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Parses `lo:hi:count`.
    pub fn parse_range(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || TomoError::Grid(format!("expected lo:hi:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::linspace(lo, hi, count)
    }

    /// Recovers an axis from sorted distinct sample positions; fails when
    /// the spacing is not uniform to `1e-9` relative.
    pub fn from_samples(sorted: &[f64]) -> Result<Self> {
        if sorted.len() < 2 {
            return Err(TomoError::Grid("need at least two distinct samples per axis".into()));
        }
        let axis = Self::linspace(sorted[0], sorted[sorted.len() - 1], sorted.len())?;
        let tol = 1e-9 * (1.0 + axis.start.abs().max(axis.end().abs()));
        for (i, &v) in sorted.iter().enumerate() {
            if (axis.value(i) - v).abs() > tol {
                return Err(TomoError::Grid(format!("non-uniform axis near {v}")));
            }
        }
        Ok(axis)
    }

    /// Index of a sample equal to `v` within `tol`, if any.
    pub fn index_of(&self, v: f64, tol: f64) -> Option<usize> {
        let t = (v - self.start) / self.step;
        let i = t.round();
        if i < 0.0 || i >= self.count as f64 {
            return None;
        }
        let i = i as usize;
        ((self.value(i) - v).abs() <= tol).then_some(i)
    }
}

/// Sorted distinct values, merging entries closer than `1e-12` relative.
pub fn distinct_sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    v
}

/// A CSV table of numeric columns with a named header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        String::from_utf8(buf).map_err(|e| TomoError::Format(e.to_string()))
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let columns: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        TomoError::Format(format!("row {}: '{f}' is not a number", line + 2))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read(s.as_bytes())
    }

    /// Position of a required column; the error names the missing column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| TomoError::Format(format!("missing column '{name}'")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }
}

/// Normalization convention of a phase-space grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `integral f dq dp = 1`; tomograms obtained by Radon transform integrate to 1 in `X`.
    UnitIntegral,
    /// `(1/2pi) integral f dq dp = 1`, the usual Wigner normalization.
    TwoPi,
}

impl Convention {
    /// Value of `integral f dq dp` under this convention.
    pub fn total(self) -> f64 {
        match self {
            Convention::UnitIntegral => 1.0,
            Convention::TwoPi => 2.0 * std::f64::consts::PI,
        }
    }
}

/// Real samples on a rectangular `(q, p)` grid, stored row-major in `q` then `p`.
///
/// Serves both as a classical phase-space density and as a sampled Wigner
/// function (which may be negative).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub q: Axis,
    pub p: Axis,
    pub convention: Convention,
    /// `values[iq * p.count + ip]`
    pub values: Vec<f64>,
}

/// JSON header written next to a grid payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub q: Axis,
    pub p: Axis,
    pub convention: Convention,
    pub layout: String,
}

const LAYOUT: &str = "row-major-q-then-p";

impl PhaseGrid {
    pub fn from_fn(q: Axis, p: Axis, convention: Convention, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(q.count * p.count);
        for iq in 0..q.count {
            for ip in 0..p.count {
                values.push(f(q.value(iq), p.value(ip)));
            }
        }
        Self { q, p, convention, values }
    }

    pub fn get(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.p.count + ip]
    }

    /// Trapezoid estimate of `integral f dq dp`.
    pub fn integral(&self) -> f64 {
        let wq = crate::special::trapezoid_weights(self.q.count, self.q.step);
        let wp = crate::special::trapezoid_weights(self.p.count, self.p.step);
        let mut acc = 0.0;
        for iq in 0..self.q.count {
            for ip in 0..self.p.count {
                acc += wq[iq] * wp[ip] * self.get(iq, ip);
            }
        }
        acc
    }

    /// Rescales the samples to another normalization convention; the two
    /// conventions differ by exactly `2 pi`.
    pub fn with_convention(&self, target: Convention) -> Self {
        let factor = target.total() / self.convention.total();
        Self {
            q: self.q,
            p: self.p,
            convention: target,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.q != other.q || self.p != other.p {
            return Err(TomoError::Grid("grids have different axes".into()));
        }
        let other = other.with_convention(self.convention);
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    pub fn header(&self) -> GridHeader {
        GridHeader { q: self.q, p: self.p, convention: self.convention, layout: LAYOUT.into() }
    }

    /// CSV payload: one line per `q` sample, `p.count` values per line.
    pub fn payload_csv(&self) -> String {
        let mut s = String::new();
        for iq in 0..self.q.count {
            let row: Vec<String> =
                (0..self.p.count).map(|ip| self.get(iq, ip).to_string()).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_parts(header_json: &str, payload_csv: &str) -> Result<Self> {
        let header: GridHeader = serde_json::from_str(header_json)?;
        if header.layout != LAYOUT {
            return Err(TomoError::Format(format!("unsupported layout '{}'", header.layout)));
        }
        let mut values = Vec::with_capacity(header.q.count * header.p.count);
        let mut lines = 0;
        for line in payload_csv.lines().filter(|l| !l.trim().is_empty()) {
            lines += 1;
            let before = values.len();
            for f in line.split(',') {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| TomoError::Format(format!("'{f}' is not a number")))?;
                values.push(v);
            }
            if values.len() - before != header.p.count {
                return Err(TomoError::Format(format!("payload line {lines} has wrong length")));
            }
        }
        if lines != header.q.count {
            return Err(TomoError::Format(format!(
                "payload has {lines} lines, header says {}",
                header.q.count
            )));
        }
        Ok(Self { q: header.q, p: header.p, convention: header.convention, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parse_and_values() {
        let a = Axis::parse_range("-6:6:241").unwrap();
        assert_eq!(a.count, 241);
        assert_eq!(a.value(0), -6.0);
        assert!((a.end() - 6.0).abs() < 1e-12);
        assert!((a.step - 0.05).abs() < 1e-15);
        assert!(Axis::parse_range("1:0:5").is_err());
        assert!(Axis::parse_range("0:1").is_err());
    }

    #[test]
    fn axis_from_samples() {
        let a = Axis::linspace(-3.0, 3.0, 41).unwrap();
        let back = Axis::from_samples(&a.values()).unwrap();
        assert_eq!(back.count, 41);
        assert!((back.step - a.step).abs() < 1e-15);
        assert!(Axis::from_samples(&[0.0, 1.0, 3.0]).is_err());
        assert_eq!(a.index_of(0.0, 1e-9), Some(20));
        assert_eq!(a.index_of(0.01, 1e-9), None);
    }

    #[test]
    fn table_missing_column_named() {
        let t = Table::from_csv_str("n,re_alpha,omega\n0,0,1\n").unwrap();
        let err = t.column("im_alpha").unwrap_err();
        assert!(err.to_string().contains("im_alpha"));
    }

    #[test]
    fn table_rejects_non_numeric() {
        assert!(Table::from_csv_str("a,b\n1,x\n").is_err());
    }

    #[test]
    fn grid_round_trip_and_conventions() {
        let q = Axis::symmetric(4.0, 33).unwrap();
        let p = Axis::symmetric(5.0, 21).unwrap();
        let g = PhaseGrid::from_fn(q, p, Convention::TwoPi, |q, p| {
            2.0 * (-q * q - p * p).exp() + 1e-3 * q / 7.0
        });
        let header = serde_json::to_string(&g.header()).unwrap();
        let back = PhaseGrid::from_parts(&header, &g.payload_csv()).unwrap();
        assert_eq!(back, g);
        let unit = g.with_convention(Convention::UnitIntegral);
        assert!((g.values[5] / unit.values[5] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(header.contains("two-pi"));
    }
}
