//! Seed-deterministic Monte-Carlo BER engine.
//!
//! A sweep is the cartesian product of antenna pairs, SNRs, initial
//! detectors, LAS on/off and ρ values. Each grid point runs independent trials
//! until `min_bit_errors` errors have been seen or `max_trials` is exhausted;
//! the latter is reported as a flagged point rather than dropped.

mod config;
pub mod exec;
pub mod seed;

pub use config::{ConfigError, ExperimentConfig, PointConfig, MAX_GRID_POINTS};
pub use exec::Executor;

use serde::Serialize;
use thiserror::Error;

use crate::channel::{assemble, sample_bpsk, sample_channel, SnrConfig};
use crate::detectors::{detect, slice_bpsk};
use crate::linalg::{FlopCounter, LinalgError};
use crate::slas::{self, SlasConfig, SlasTrace, SlasWorkspace};

/// Trials evaluated between checks of the stopping rule.
pub const BATCH_SIZE: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrialError {
    #[error("trial {trial}: {source}")]
    Linalg {
        trial: u64,
        #[source]
        source: LinalgError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    /// Errors of the linear detector alone.
    pub initial_bit_errors: u64,
    pub flops: u64,
    pub flips: usize,
    pub trace: Option<SlasTrace>,
}

/// One independent channel use at `point`, fully determined by
/// `(point, trial_index)`.
pub fn trial(point: &PointConfig, trial_index: u64, keep_trace: bool) -> Result<TrialOutcome, TrialError> {
    let wrap = |source| TrialError::Linalg {
        trial: trial_index,
        source,
    };
    let mut rng = seed::trial_rng(point.cell_key(), trial_index);
    let snr = SnrConfig {
        snr_db: point.snr_db,
        es: 1.0,
        convention: point.snr_convention,
    };
    let h = sample_channel(point.nt, point.nr, &mut rng);
    let b = sample_bpsk(point.nt, snr.es, &mut rng);
    let inst = assemble(h, b, &snr, &mut rng).map_err(wrap)?;
    let truth = inst.bits();

    let mut counter = FlopCounter::new();
    let soft = detect(point.detector, &inst.h, &inst.y, &snr, &mut counter).map_err(wrap)?;
    let b0 = slice_bpsk(&soft);
    let initial_bit_errors = b0.errors_against(&truth) as u64;

    if !point.las_enabled {
        return Ok(TrialOutcome {
            bit_errors: initial_bit_errors,
            initial_bit_errors,
            flops: counter.total(),
            flips: 0,
            trace: None,
        });
    }

    let ws = SlasWorkspace::precompute(&inst.h, &inst.y, &mut counter).map_err(wrap)?;
    let cfg = SlasConfig::new(point.rho, point.n_f).threshold_rule(point.threshold_rule);
    let out = slas::run(&ws, &b0, &cfg, Some(&truth), &mut counter);
    if point.rho >= 1.0 {
        let final_likelihood = out.trace.records.last().map_or(out.trace.initial_likelihood, |r| r.likelihood);
        assert!(
            final_likelihood >= out.trace.initial_likelihood,
            "likelihood decreased at rho >= 1 (trial {trial_index})"
        );
    }
    Ok(TrialOutcome {
        bit_errors: out.bits.errors_against(&truth) as u64,
        initial_bit_errors,
        flops: counter.total(),
        flips: out.flips,
        trace: keep_trace.then_some(out.trace),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub point: PointConfig,
    pub trials_run: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Trials abandoned because a matrix was singular.
    pub aborted_trials: u64,
    pub floor_reached: bool,
    /// Mean instrumented flops per completed trial, rounded down.
    pub mean_flops: u64,
}

impl BerPoint {
    pub fn flagged(&self) -> bool {
        !self.floor_reached || self.aborted_trials > 0
    }
}

/// Runs trials until the error floor or the trial cap is reached.
///
/// Trials run in fixed batches; within a batch, results are scanned in index
/// order and the point stops at the first trial that brings the error count
/// to `min_bit_errors`. The outcome does not depend on the executor.
pub fn run_point(point: &PointConfig, exec: &Executor) -> BerPoint {
    let mut trials_run = 0u64;
    let mut bits_sent = 0u64;
    let mut bit_errors = 0u64;
    let mut aborted = 0u64;
    let mut flops = 0u64;

    'batches: while trials_run < point.max_trials {
        let end = (trials_run + BATCH_SIZE).min(point.max_trials);
        let results = exec.map(trials_run..end, |i| trial(point, i, false));
        for result in results {
            trials_run += 1;
            match result {
                Ok(outcome) => {
                    bit_errors += outcome.bit_errors;
                    bits_sent += point.nt as u64;
                    flops += outcome.flops;
                }
                Err(_) => aborted += 1,
            }
            if bit_errors >= point.min_bit_errors {
                break 'batches;
            }
        }
    }

    let completed = trials_run - aborted;
    BerPoint {
        point: *point,
        trials_run,
        bits_sent,
        bit_errors,
        ber: if bits_sent == 0 { 0.0 } else { bit_errors as f64 / bits_sent as f64 },
        aborted_trials: aborted,
        floor_reached: bit_errors >= point.min_bit_errors,
        mean_flops: flops.checked_div(completed).unwrap_or(0),
    }
}

/// One [`BerPoint`] per grid cell, in [`ExperimentConfig::points`] order.
pub fn run_sweep(cfg: &ExperimentConfig, exec: &Executor) -> Result<Vec<BerPoint>, ConfigError> {
    let points = cfg.points()?;
    Ok(points.iter().map(|p| run_point(p, exec)).collect())
}

/// Per-step averages over trials; index 0 is the linear detector alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceAggregate {
    pub point: PointConfig,
    pub trials: u64,
    pub aborted_trials: u64,
    pub mean_likelihood: Vec<f64>,
    pub mean_ber: Vec<f64>,
}

impl TraceAggregate {
    pub fn steps(&self) -> usize {
        self.mean_likelihood.len() - 1
    }
}

pub fn run_trace(point: &PointConfig, trials: u64, exec: &Executor) -> Result<TraceAggregate, ConfigError> {
    if !point.las_enabled {
        return Err(ConfigError::Invalid("a trace needs LAS enabled".into()));
    }
    if trials == 0 {
        return Err(ConfigError::Invalid("a trace needs at least one trial".into()));
    }
    let len = point.n_f + 1;
    let results = exec.map(0..trials, |i| trial(point, i, true));
    let mut likelihood = vec![0.0; len];
    let mut errors = vec![0u64; len];
    let mut completed = 0u64;
    for result in results {
        let Ok(outcome) = result else { continue };
        let trace = outcome.trace.expect("trace requested");
        completed += 1;
        likelihood[0] += trace.initial_likelihood;
        errors[0] += trace.initial_bit_errors.unwrap_or(0) as u64;
        for (k, rec) in trace.records.iter().enumerate() {
            likelihood[k + 1] += rec.likelihood;
            errors[k + 1] += rec.bit_errors.unwrap_or(0) as u64;
        }
    }
    let denom = completed.max(1) as f64;
    Ok(TraceAggregate {
        point: *point,
        trials: completed,
        aborted_trials: trials - completed,
        mean_likelihood: likelihood.iter().map(|l| l / denom).collect(),
        mean_ber: errors.iter().map(|&e| e as f64 / (denom * point.nt as f64)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SnrConvention;
    use crate::detectors::DetectorKind;
    use crate::slas::ThresholdRule;

    fn point(nt: usize, snr_db: f64, detector: DetectorKind, las: bool) -> PointConfig {
        PointConfig {
            nt,
            nr: nt,
            snr_db,
            rho: 1.0,
            detector,
            las_enabled: las,
            n_f: 2 * nt,
            max_trials: 1000,
            min_bit_errors: 5,
            master_seed: 0,
            snr_convention: SnrConvention::PerReceiveAntenna,
            threshold_rule: ThresholdRule::Single,
        }
    }

    #[test]
    fn trial_is_reproducible() {
        let p = point(8, 5.0, DetectorKind::Mf, true);
        assert_eq!(trial(&p, 17, true), trial(&p, 17, true));
    }

    #[test]
    fn noiseless_zf_never_errs() {
        let p = PointConfig {
            max_trials: 300,
            ..point(6, 400.0, DetectorKind::Zf, false)
        };
        for i in 0..50 {
            assert_eq!(trial(&p, i, false).unwrap().bit_errors, 0);
        }
        let ber = run_point(&p, &Executor::sequential());
        assert_eq!(ber.trials_run, 300);
        assert_eq!(ber.bit_errors, 0);
        assert!(!ber.floor_reached);
        assert!(ber.flagged());
    }

    #[test]
    fn stops_at_min_errors() {
        let p = point(4, 0.0, DetectorKind::Mf, false);
        let ber = run_point(&p, &Executor::sequential());
        assert!(ber.floor_reached);
        assert!(ber.bit_errors >= 5 && ber.bit_errors < 5 + 4);
        assert!(ber.trials_run < 1000);
        assert_eq!(ber.bits_sent, ber.trials_run * 4);
    }

    #[test]
    fn run_point_is_executor_independent() {
        let p = PointConfig {
            min_bit_errors: 40,
            ..point(8, 10.0, DetectorKind::Mf, true)
        };
        let seq = run_point(&p, &Executor::sequential());
        assert_eq!(run_point(&p, &Executor::new(4)), seq);
    }

    #[test]
    fn ber_equals_sum_of_trial_errors() {
        let p = PointConfig {
            max_trials: 200,
            min_bit_errors: u64::MAX,
            ..point(4, 5.0, DetectorKind::Mmse, true)
        };
        let ber = run_point(&p, &Executor::sequential());
        let sum: u64 = (0..200).map(|i| trial(&p, i, false).unwrap().bit_errors).sum();
        assert_eq!(ber.bit_errors, sum);
        assert_eq!(ber.ber, sum as f64 / (200.0 * 4.0));
    }

    #[test]
    fn zero_step_las_matches_linear_detector() {
        let off = point(8, 5.0, DetectorKind::Zf, false);
        let on = PointConfig {
            las_enabled: true,
            n_f: 0,
            ..off
        };
        let a = run_point(&off, &Executor::sequential());
        let b = run_point(&on, &Executor::sequential());
        assert_eq!((a.bit_errors, a.trials_run), (b.bit_errors, b.trials_run));
    }

    #[test]
    fn trace_shapes_and_step_zero() {
        let p = point(8, 5.0, DetectorKind::Mf, true);
        let agg = run_trace(&p, 64, &Executor::sequential()).unwrap();
        assert_eq!(agg.mean_likelihood.len(), 17);
        assert_eq!(agg.steps(), 16);
        let off = PointConfig {
            las_enabled: false,
            max_trials: 64,
            min_bit_errors: u64::MAX,
            ..p
        };
        let baseline = run_point(&off, &Executor::sequential());
        assert_eq!(agg.mean_ber[0], baseline.ber);
        for w in agg.mean_likelihood.windows(2) {
            assert!(w[1] >= w[0]);
        }

        let zero = PointConfig { n_f: 0, ..p };
        let agg = run_trace(&zero, 10, &Executor::sequential()).unwrap();
        assert_eq!(agg.mean_ber.len(), 1);

        assert!(run_trace(&off, 10, &Executor::sequential()).is_err());
    }
}
