//! CSV and JSON file formats.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::harness::TrialReport;
use crate::numeric::{Real, PRECISION};
use crate::pdcr::{ReconstructionResult, StepDiagnostics, Status};
use crate::sampling::{Design, MagnitudeSamples, NoiseMeta};

#[derive(Serialize, Deserialize)]
struct CoeffRow {
    index: usize,
    re: f64,
    im: f64,
}

pub fn write_coefficients<W: Write>(w: W, coeffs: &[Complex64]) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    for (index, c) in coeffs.iter().enumerate() {
        out.serialize(CoeffRow { index, re: c.re, im: c.im })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `index,re,im` rows; indices must be `0, 1, 2, ...` in order.
pub fn read_coefficients<R: Read>(r: R) -> Result<Vec<Complex64>, IoError> {
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize::<CoeffRow>() {
        let row = row?;
        if row.index != out.len() {
            return Err(IoError::Format(format!("expected coefficient index {}, found {}", out.len(), row.index)));
        }
        out.push(Complex64::new(row.re, row.im));
    }
    if out.is_empty() {
        return Err(IoError::Format("no coefficients".into()));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    n: usize,
    t: f64,
    /// Decimal with enough digits to carry the working precision.
    value: String,
}

/// Significant digits written for sample values.
const VALUE_DIGITS: usize = 80;

pub fn write_samples<W: Write>(w: W, samples: &MagnitudeSamples) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    for (n, t, v) in samples.rows() {
        out.serialize(SampleRow { n, t, value: v.to_string_radix(10, Some(VALUE_DIGITS)) })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `n,t,value` rows. Interval 0 must hold exactly one sample and
/// every later interval up to the largest `n` exactly `density` samples.
pub fn read_samples<R: Read>(r: R, density: usize) -> Result<MagnitudeSamples, IoError> {
    let mut rows: Vec<SampleRow> = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize::<SampleRow>() {
        rows.push(row?);
    }
    let fmt = |m: String| IoError::Format(m);
    let first: Vec<&SampleRow> = rows.iter().filter(|r| r.n == 0).collect();
    if first.len() != 1 {
        return Err(fmt(format!("interval 0 must have exactly one sample, found {}", first.len())));
    }
    let n_max = rows.iter().map(|r| r.n).max().unwrap_or(0);
    let mut points = vec![Vec::new(); n_max];
    let mut values = vec![Vec::new(); n_max];
    for r in rows.iter().filter(|r| r.n > 0) {
        points[r.n - 1].push(r.t);
        values[r.n - 1].push(parse_value(&r.value)?);
    }
    for (i, row) in points.iter().enumerate() {
        if row.len() != density {
            return Err(fmt(format!("interval {} has {} samples, expected {density}", i + 1, row.len())));
        }
    }
    let design = Design::new(density, first[0].t, points).map_err(|e| fmt(e.to_string()))?;
    let value0 = parse_value(&first[0].value)?;
    MagnitudeSamples::new(design, value0, values).map_err(|e| fmt(e.to_string()))
}

fn parse_value(text: &str) -> Result<Real, IoError> {
    let parsed = Real::parse(text.trim()).map_err(|e| IoError::Format(format!("bad sample value {text:?}: {e}")))?;
    let v = Real::with_val(PRECISION, parsed);
    if !v.is_finite() {
        return Err(IoError::Format(format!("sample value {text:?} is not finite")));
    }
    Ok(v)
}

pub fn write_noise_meta<W: Write>(w: W, meta: Option<&NoiseMeta>) -> Result<(), IoError> {
    serde_json::to_writer_pretty(w, &meta)?;
    Ok(())
}

#[derive(Serialize)]
struct ResultDoc<'a> {
    generator: String,
    mode: crate::pdcr::Mode,
    status: Status,
    coefficient_count: usize,
    phase0: f64,
    phases: &'a [Vec<f64>],
    steps: &'a [StepDiagnostics],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

pub fn write_result_json<W: Write>(w: W, result: &ReconstructionResult, error: Option<f64>) -> Result<(), IoError> {
    let doc = ResultDoc {
        generator: result.generator.to_string(),
        mode: result.mode,
        status: result.status,
        coefficient_count: result.coeffs.len(),
        phase0: result.phase0,
        phases: &result.phases,
        steps: &result.diagnostics,
        error,
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Writes `report.json`, `errors.csv` and `cdf.csv` into `dir`.
pub fn write_report(dir: &Path, report: &TrialReport) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a crate::harness::TrialConfig,
        trials: usize,
        success_rate: f64,
        failures: crate::harness::FailureTally,
        max_consistency_residual: Option<f64>,
    }
    let doc = Doc {
        config: &report.config,
        trials: report.outcomes.len(),
        success_rate: report.success_rate,
        failures: report.failures,
        max_consistency_residual: report.max_consistency_residual,
    };
    serde_json::to_writer_pretty(File::create(dir.join("report.json"))?, &doc)?;
    let mut errors = csv::Writer::from_path(dir.join("errors.csv"))?;
    errors.write_record(["trial", "error", "status"])?;
    for o in &report.outcomes {
        let status = match o.status {
            Status::Ok => "ok",
            Status::DegenerateSample { .. } => "degenerate_sample",
            Status::AmbiguousRoot { .. } => "ambiguous_root",
        };
        errors.write_record([o.trial.to_string(), o.error.to_string(), status.to_string()])?;
    }
    errors.flush()?;
    let mut cdf = csv::Writer::from_path(dir.join("cdf.csv"))?;
    cdf.write_record(["x", "cdf"])?;
    for [x, y] in &report.cdf {
        cdf.write_record([format!("{x:.2}"), y.to_string()])?;
    }
    cdf.flush()?;
    Ok(())
}
