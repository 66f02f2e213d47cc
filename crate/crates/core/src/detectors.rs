//! Linear MF, ZF and MMSE detectors and the BPSK slicer.
//!
//! ZF and MMSE build the explicit pseudo-inverse `P = G^-1 H^H` (with
//! `G = H^H H`, regularized for MMSE) and apply it to `y`. That evaluation
//! order is what the standard flop table for these detectors counts, so the
//! instrumented totals reconcile with it term by term for square systems.
//!
//! MF soft values are not normalized by column energy; slicing is unaffected
//! but soft values are not comparable across detectors.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::SnrConfig;
use crate::linalg::{ComplexMatrix, ComplexVector, FlopCounter, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Mf,
    Zf,
    Mmse,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Mf, DetectorKind::Zf, DetectorKind::Mmse];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::Mf => "mf",
            DetectorKind::Zf => "zf",
            DetectorKind::Mmse => "mmse",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mf" => Ok(DetectorKind::Mf),
            "zf" => Ok(DetectorKind::Zf),
            "mmse" => Ok(DetectorKind::Mmse),
            other => Err(format!("unknown detector '{other}' (expected mf, zf or mmse)")),
        }
    }
}

/// Flops spent by one named stage of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub flops: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftEstimate {
    pub values: ComplexVector,
    pub kind: DetectorKind,
    pub flops_spent: u64,
    pub stages: Vec<Stage>,
}

/// A ±1 vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HardDecision(Vec<i8>);

impl HardDecision {
    /// Returns `None` unless every entry is exactly ±1.
    pub fn new(bits: &[f64]) -> Option<Self> {
        bits.iter()
            .map(|&b| match b {
                1.0 => Some(1),
                -1.0 => Some(-1),
                _ => None,
            })
            .collect::<Option<Vec<i8>>>()
            .map(HardDecision)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> Vec<f64> {
        self.0.iter().map(|&b| b as f64).collect()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// Number of positions where `self` and `truth` disagree.
    pub fn errors_against(&self, truth: &[f64]) -> usize {
        self.0
            .iter()
            .zip(truth)
            .filter(|(&b, &t)| (b as f64) * t < 0.0)
            .count()
    }

    pub fn to_soft(&self) -> ComplexVector {
        ComplexVector::from_real(&self.bits())
    }
}

struct StageRecorder<'a> {
    counter: &'a mut FlopCounter,
    start: FlopCounter,
    mark: FlopCounter,
    stages: Vec<Stage>,
}

impl<'a> StageRecorder<'a> {
    fn new(counter: &'a mut FlopCounter) -> Self {
        let start = *counter;
        Self {
            counter,
            start,
            mark: start,
            stages: Vec::new(),
        }
    }

    fn close(&mut self, name: &'static str) {
        self.stages.push(Stage {
            name,
            flops: self.counter.since(&self.mark),
        });
        self.mark = *self.counter;
    }

    fn finish(self, values: ComplexVector, kind: DetectorKind) -> SoftEstimate {
        SoftEstimate {
            values,
            kind,
            flops_spent: self.counter.since(&self.start),
            stages: self.stages,
        }
    }
}

/// Matched filter `H^H y`.
pub fn mf(h: &ComplexMatrix, y: &[Complex64], counter: &mut FlopCounter) -> Result<SoftEstimate, LinalgError> {
    let mut rec = StageRecorder::new(counter);
    let values = h.hermitian_transpose().mat_vec(y, rec.counter)?;
    rec.close("H^H y");
    Ok(rec.finish(values, DetectorKind::Mf))
}

/// Zero forcing `(H^H H)^-1 H^H y`.
pub fn zf(h: &ComplexMatrix, y: &[Complex64], counter: &mut FlopCounter) -> Result<SoftEstimate, LinalgError> {
    pseudo_inverse_detect(h, y, None, counter)
}

/// MMSE with regularizer `N0 / Es` taken from `snr`.
pub fn mmse(
    h: &ComplexMatrix,
    y: &[Complex64],
    snr: &SnrConfig,
    counter: &mut FlopCounter,
) -> Result<SoftEstimate, LinalgError> {
    mmse_regularized(h, y, snr.noise_variance(h.cols()) / snr.es, counter)
}

/// MMSE with an explicit `N0 / Es` ratio; a ratio of 0 reproduces ZF bit for bit.
pub fn mmse_regularized(
    h: &ComplexMatrix,
    y: &[Complex64],
    n0_over_es: f64,
    counter: &mut FlopCounter,
) -> Result<SoftEstimate, LinalgError> {
    pseudo_inverse_detect(h, y, Some(n0_over_es), counter)
}

fn pseudo_inverse_detect(
    h: &ComplexMatrix,
    y: &[Complex64],
    regularizer: Option<f64>,
    counter: &mut FlopCounter,
) -> Result<SoftEstimate, LinalgError> {
    if h.rows() != y.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "linear detector",
            left_rows: h.rows(),
            left_cols: h.cols(),
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    let nt = h.cols();
    let mut rec = StageRecorder::new(counter);
    let hh = h.hermitian_transpose();
    let mut gram = hh.mat_mul(h, rec.counter)?;
    rec.close("G = H^H H");
    if let Some(ratio) = regularizer {
        for j in 0..nt {
            gram[(j, j)] += Complex64::new(ratio, 0.0);
        }
        // scaled identity: 2 real mults per diagonal entry; complex add: 2
        rec.counter.real_mults(2 * nt as u64);
        rec.counter.complex_adds(nt as u64);
        rec.close("G + (N0/Es) I");
    }
    let inverse = gram.gauss_invert(rec.counter)?;
    rec.close("inverse");
    let pinv = inverse.mat_mul(&hh, rec.counter)?;
    rec.close("P = G^-1 H^H");
    let values = pinv.mat_vec(y, rec.counter)?;
    rec.close("P y");
    let kind = if regularizer.is_some() {
        DetectorKind::Mmse
    } else {
        DetectorKind::Zf
    };
    Ok(rec.finish(values, kind))
}

pub fn detect(
    kind: DetectorKind,
    h: &ComplexMatrix,
    y: &[Complex64],
    snr: &SnrConfig,
    counter: &mut FlopCounter,
) -> Result<SoftEstimate, LinalgError> {
    match kind {
        DetectorKind::Mf => mf(h, y, counter),
        DetectorKind::Zf => zf(h, y, counter),
        DetectorKind::Mmse => mmse(h, y, snr, counter),
    }
}

/// BPSK decision on the real part; an exact zero goes to +1.
pub fn slice_bpsk(soft: &SoftEstimate) -> HardDecision {
    slice_values(&soft.values)
}

pub fn slice_values(values: &[Complex64]) -> HardDecision {
    HardDecision(values.iter().map(|v| if v.re >= 0.0 { 1 } else { -1 }).collect())
}
