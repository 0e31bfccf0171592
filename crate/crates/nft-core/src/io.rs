//! File formats: pulse CSV (`t,re_q,im_q`) and the spectrum JSON object.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical inputs always produce byte-identical files.

use crate::error::{Error, Result};
use crate::spectra::{ContinuousSpectrum, DiscretePoint, DiscreteSpectrum, SampledPulse};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub fn write_pulse_csv<W: Write>(mut w: W, pulse: &SampledPulse) -> Result<()> {
    writeln!(w, "t,re_q,im_q")?;
    for (n, q) in pulse.samples().iter().enumerate() {
        writeln!(w, "{},{},{}", pulse.time(n), q.re, q.im)?;
    }
    Ok(())
}

/// Parse a pulse CSV, checking the grid is uniform and symmetric about zero.
pub fn read_pulse_csv<R: BufRead>(r: R) -> Result<SampledPulse> {
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line_no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line_no == 0 {
            if line != "t,re_q,im_q" {
                return Err(Error::MalformedCsv(format!(
                    "expected header 't,re_q,im_q', got '{line}'"
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedCsv(format!(
                "line {}: expected 3 fields, got {}",
                line_no + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedCsv(format!("line {}: {e}", line_no + 1)))
        };
        times.push(parse(fields[0])?);
        samples.push(C64::new(parse(fields[1])?, parse(fields[2])?));
    }
    if samples.len() < 2 {
        return Err(Error::MalformedCsv(
            "need at least two samples".to_string(),
        ));
    }

    let t_first = times[0];
    let t_last = *times.last().unwrap();
    let n = times.len() - 1;
    let h = (t_last - t_first) / n as f64;
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::MalformedCsv("t column must increase".to_string()));
    }
    let tol = 1e-9 * h.max(t_last.abs());
    for (i, &t) in times.iter().enumerate() {
        let expected = t_first + i as f64 * h;
        if (t - expected).abs() > tol {
            return Err(Error::MalformedCsv(format!(
                "non-uniform t column at row {}: {} vs expected {}",
                i + 1,
                t,
                expected
            )));
        }
    }
    if (t_first + t_last).abs() > tol {
        return Err(Error::MalformedCsv(format!(
            "grid must be symmetric about 0, got [{t_first}, {t_last}]"
        )));
    }
    SampledPulse::new(t_last, samples).map_err(|e| Error::MalformedCsv(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct ComplexRepr {
    re: f64,
    im: f64,
}

impl From<C64> for ComplexRepr {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRepr> for C64 {
    fn from(z: ComplexRepr) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct QcRepr {
    lambda: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Reproducibility metadata attached by the CLI `nft` command.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct SpectrumMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_intervals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fb: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct SpectrumRepr {
    eigenvalues: Vec<ComplexRepr>,
    qd: Vec<ComplexRepr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b: Option<Vec<ComplexRepr>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    qc: Option<QcRepr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    meta: Option<SpectrumMeta>,
}

/// Everything the spectrum file can carry.
#[derive(Debug, Clone, Default)]
pub struct SpectrumFile {
    pub discrete: Option<DiscreteSpectrum>,
    pub continuous: Option<ContinuousSpectrum>,
    pub meta: Option<SpectrumMeta>,
}

impl SpectrumFile {
    pub fn discrete_or_empty(&self) -> DiscreteSpectrum {
        self.discrete.clone().unwrap_or_else(DiscreteSpectrum::empty)
    }
}

pub fn write_spectrum_json<W: Write>(mut w: W, file: &SpectrumFile) -> Result<()> {
    let discrete = file.discrete_or_empty();
    let points = discrete.points();
    let b = if points.iter().any(|p| p.b.is_some()) {
        Some(
            points
                .iter()
                .map(|p| p.b.unwrap_or(C64::new(f64::NAN, f64::NAN)).into())
                .collect(),
        )
    } else {
        None
    };
    let repr = SpectrumRepr {
        eigenvalues: points.iter().map(|p| p.lambda.into()).collect(),
        qd: points.iter().map(|p| p.qd.into()).collect(),
        b,
        qc: file.continuous.as_ref().map(|qc| QcRepr {
            lambda: qc.lambda_grid().to_vec(),
            re: qc.qc().iter().map(|z| z.re).collect(),
            im: qc.qc().iter().map(|z| z.im).collect(),
        }),
        meta: file.meta.clone(),
    };
    let text = serde_json::to_string_pretty(&repr)
        .map_err(|e| Error::MalformedJson(e.to_string()))?;
    writeln!(w, "{text}")?;
    Ok(())
}

pub fn read_spectrum_json<R: std::io::Read>(r: R) -> Result<SpectrumFile> {
    let repr: SpectrumRepr =
        serde_json::from_reader(r).map_err(|e| Error::MalformedJson(e.to_string()))?;
    if repr.eigenvalues.len() != repr.qd.len() {
        return Err(Error::MalformedJson(format!(
            "{} eigenvalues but {} qd entries",
            repr.eigenvalues.len(),
            repr.qd.len()
        )));
    }
    if let Some(b) = &repr.b {
        if b.len() != repr.eigenvalues.len() {
            return Err(Error::MalformedJson(format!(
                "{} eigenvalues but {} b entries",
                repr.eigenvalues.len(),
                b.len()
            )));
        }
    }
    let points: Vec<DiscretePoint> = repr
        .eigenvalues
        .iter()
        .zip(&repr.qd)
        .enumerate()
        .map(|(i, (lam, qd))| DiscretePoint {
            lambda: lam.clone().into(),
            qd: qd.clone().into(),
            b: repr.b.as_ref().map(|b| b[i].clone().into()),
        })
        .collect();
    let discrete = if points.is_empty() {
        None
    } else {
        Some(DiscreteSpectrum::new(points)?)
    };
    let continuous = match repr.qc {
        None => None,
        Some(qc) => {
            if qc.lambda.len() != qc.re.len() || qc.lambda.len() != qc.im.len() {
                return Err(Error::MalformedJson(
                    "qc arrays must have matching lengths".to_string(),
                ));
            }
            let values: Vec<C64> = qc
                .re
                .iter()
                .zip(&qc.im)
                .map(|(&re, &im)| C64::new(re, im))
                .collect();
            Some(
                ContinuousSpectrum::new(qc.lambda, values)
                    .map_err(|e| Error::MalformedJson(e.to_string()))?,
            )
        }
    };
    Ok(SpectrumFile {
        discrete,
        continuous,
        meta: repr.meta,
    })
}
