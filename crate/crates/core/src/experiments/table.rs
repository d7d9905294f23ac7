//! Result rows and their CSV encoding. Column order is the field order of
//! each row type and is part of the output contract.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One `(snr_db, scheme, combiner)` point of an outage curve. Outputs the
/// scenario did not request are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub snr_db: f64,
    /// `dfaf`, `df`, `af`, or `af_lower` / `af_upper` for AF bound rows.
    pub scheme: String,
    pub combiner: String,
    pub outage_analytic: Option<f64>,
    pub outage_asymptotic: Option<f64>,
    pub outage_mc: Option<f64>,
    pub mc_ci_low: Option<f64>,
    pub mc_ci_high: Option<f64>,
    pub trials: Option<u64>,
    pub failures: Option<u64>,
}

pub const CURVE_COLUMNS: [&str; 10] = [
    "snr_db",
    "scheme",
    "combiner",
    "outage_analytic",
    "outage_asymptotic",
    "outage_mc",
    "mc_ci_low",
    "mc_ci_high",
    "trials",
    "failures",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub scheme: String,
    pub combiner: String,
    pub outage_mc: f64,
    pub mc_ci_low: f64,
    pub mc_ci_high: f64,
    pub trials: u64,
    pub failures: u64,
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "alpha",
    "scheme",
    "combiner",
    "outage_mc",
    "mc_ci_low",
    "mc_ci_high",
    "trials",
    "failures",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub scheme: String,
    pub combiner: String,
    pub theoretical_d: f64,
    pub fitted_slope: f64,
    pub residual: f64,
    pub window_lo_db: f64,
    pub window_hi_db: f64,
    pub points: usize,
}

pub const FIT_COLUMNS: [&str; 8] = [
    "scheme",
    "combiner",
    "theoretical_d",
    "fitted_slope",
    "residual",
    "window_lo_db",
    "window_hi_db",
    "points",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub m0: f64,
    pub g1: f64,
    pub g2: f64,
    pub theoretical_d: f64,
    pub fitted_slope: f64,
    pub residual: f64,
    pub window_lo_db: f64,
    pub window_hi_db: f64,
}

pub const SURFACE_COLUMNS: [&str; 8] = [
    "m0",
    "g1",
    "g2",
    "theoretical_d",
    "fitted_slope",
    "residual",
    "window_lo_db",
    "window_hi_db",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Curve(Vec<CurveRow>),
    Sweep(Vec<SweepRow>),
    Fit(Vec<FitRow>),
    Surface(Vec<SurfaceRow>),
}

fn write_rows<T: Serialize, W: Write>(columns: &[&str], rows: &[T], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses rows written by [`Table::write_csv`].
pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

impl Table {
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Table::Curve(_) => &CURVE_COLUMNS,
            Table::Sweep(_) => &SWEEP_COLUMNS,
            Table::Fit(_) => &FIT_COLUMNS,
            Table::Surface(_) => &SURFACE_COLUMNS,
        }
    }

    /// Writes the header row followed by one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let cols = self.columns();
        match self {
            Table::Curve(rows) => write_rows(cols, rows, out),
            Table::Sweep(rows) => write_rows(cols, rows, out),
            Table::Fit(rows) => write_rows(cols, rows, out),
            Table::Surface(rows) => write_rows(cols, rows, out),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn len(&self) -> usize {
        match self {
            Table::Curve(r) => r.len(),
            Table::Sweep(r) => r.len(),
            Table::Fit(r) => r.len(),
            Table::Surface(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
