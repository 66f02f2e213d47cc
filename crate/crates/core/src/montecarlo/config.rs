use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use super::seed;
use crate::channel::SnrConvention;
use crate::detectors::DetectorKind;
use crate::slas::ThresholdRule;

/// Largest sweep [`ExperimentConfig::points`] will expand.
pub const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("sweep has {points} grid points, limit is {limit}")]
    GridTooLarge { points: usize, limit: usize },
    #[error("invalid experiment config: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(de: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn opt_one_or_many<'de, D, T>(de: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    one_or_many(de).map(Some)
}

fn default_experiment() -> String {
    "sweep".into()
}
fn default_rho() -> Vec<f64> {
    vec![1.0]
}
fn default_detector() -> Vec<DetectorKind> {
    DetectorKind::ALL.to_vec()
}
fn default_las() -> Vec<bool> {
    vec![false, true]
}
fn default_max_trials() -> u64 {
    100_000
}
fn default_min_errors() -> u64 {
    5
}

/// A sweep description. Scalars are accepted wherever a list is.
///
/// `nt` and `nr` are zipped into antenna pairs; leaving `nr` out means
/// `Nr = Nt` for every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    #[serde(deserialize_with = "one_or_many")]
    pub nt: Vec<usize>,
    #[serde(default, deserialize_with = "opt_one_or_many", skip_serializing_if = "Option::is_none")]
    pub nr: Option<Vec<usize>>,
    #[serde(deserialize_with = "one_or_many")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_rho", deserialize_with = "one_or_many")]
    pub rho: Vec<f64>,
    #[serde(default = "default_detector", deserialize_with = "one_or_many")]
    pub detector: Vec<DetectorKind>,
    #[serde(default = "default_las", deserialize_with = "one_or_many")]
    pub las_enabled: Vec<bool>,
    pub n_f: usize,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_min_errors")]
    pub min_bit_errors: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub snr_convention: SnrConvention,
    #[serde(default)]
    pub threshold_rule: ThresholdRule,
}

/// One grid cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub nt: usize,
    pub nr: usize,
    pub snr_db: f64,
    pub rho: f64,
    pub detector: DetectorKind,
    pub las_enabled: bool,
    pub n_f: usize,
    pub max_trials: u64,
    pub min_bit_errors: u64,
    pub master_seed: u64,
    pub snr_convention: SnrConvention,
    pub threshold_rule: ThresholdRule,
}

impl PointConfig {
    pub fn cell_key(&self) -> [u8; 32] {
        seed::cell_key(self.master_seed, self.nt, self.nr, self.snr_db)
    }
}

impl ExperimentConfig {
    pub fn antenna_pairs(&self) -> Vec<(usize, usize)> {
        match &self.nr {
            Some(nr) => self.nt.iter().copied().zip(nr.iter().copied()).collect(),
            None => self.nt.iter().map(|&n| (n, n)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: &str| Err(ConfigError::Invalid(msg.into()));
        if self.nt.is_empty() || self.snr_db.is_empty() || self.rho.is_empty() {
            return invalid("nt, snr_db and rho must be non-empty");
        }
        if self.detector.is_empty() || self.las_enabled.is_empty() {
            return invalid("detector and las_enabled must be non-empty");
        }
        if let Some(nr) = &self.nr {
            if nr.len() != self.nt.len() {
                return invalid("nr must have as many entries as nt");
            }
        }
        if self.antenna_pairs().iter().any(|&(t, r)| t == 0 || r == 0) {
            return invalid("antenna counts must be at least 1");
        }
        if self.rho.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return invalid("rho must be positive and finite");
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return invalid("snr_db must not be NaN");
        }
        if self.max_trials < 1 || self.min_bit_errors < 1 {
            return invalid("max_trials and min_bit_errors must be at least 1");
        }
        Ok(())
    }

    /// Expands the grid, outermost first: antennas, SNR, detector, LAS flag,
    /// ρ. Rows with LAS off ignore ρ and appear once.
    pub fn points(&self) -> Result<Vec<PointConfig>, ConfigError> {
        self.validate()?;
        let pairs = self.antenna_pairs();
        let with_las = self.las_enabled.iter().filter(|&&l| l).count();
        let without_las = self.las_enabled.len() - with_las;
        let per_detector = with_las * self.rho.len() + without_las;
        let total = pairs.len() * self.snr_db.len() * self.detector.len() * per_detector;
        if total > MAX_GRID_POINTS {
            return Err(ConfigError::GridTooLarge {
                points: total,
                limit: MAX_GRID_POINTS,
            });
        }

        let mut out = Vec::with_capacity(total);
        for &(nt, nr) in &pairs {
            for &snr_db in &self.snr_db {
                for &detector in &self.detector {
                    for &las_enabled in &self.las_enabled {
                        let rhos: &[f64] = if las_enabled { &self.rho } else { &[1.0] };
                        for &rho in rhos {
                            out.push(PointConfig {
                                nt,
                                nr,
                                snr_db,
                                rho,
                                detector,
                                las_enabled,
                                n_f: self.n_f,
                                max_trials: self.max_trials,
                                min_bit_errors: self.min_bit_errors,
                                master_seed: self.master_seed,
                                snr_convention: self.snr_convention,
                                threshold_rule: self.threshold_rule,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        serde_json::from_str(r#"{"nt": 32, "snr_db": [0, 10], "n_f": 100}"#).unwrap()
    }

    #[test]
    fn scalars_and_defaults() {
        let cfg = base();
        assert_eq!(cfg.nt, vec![32]);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0]);
        assert_eq!(cfg.detector.len(), 3);
        assert_eq!(cfg.max_trials, 100_000);
        assert_eq!(cfg.min_bit_errors, 5);
        // 2 snr x 3 detectors x (1 las-off + 1 rho)
        assert_eq!(cfg.points().unwrap().len(), 12);
    }

    #[test]
    fn las_off_ignores_rho() {
        let mut cfg = base();
        cfg.rho = vec![0.8, 0.9, 1.0];
        cfg.detector = vec![DetectorKind::Mf];
        let points = cfg.points().unwrap();
        assert_eq!(points.len(), 2 * (1 + 3));
        assert_eq!(points.iter().filter(|p| !p.las_enabled).count(), 2);
    }

    #[test]
    fn zipped_antennas() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"nt": [2, 4], "nr": [4, 8], "snr_db": 5, "n_f": 8, "detector": "zf", "las_enabled": true}"#)
                .unwrap();
        assert_eq!(cfg.antenna_pairs(), vec![(2, 4), (4, 8)]);
        let bad: ExperimentConfig =
            serde_json::from_str(r#"{"nt": [2, 4], "nr": [4], "snr_db": 5, "n_f": 8}"#).unwrap();
        assert!(bad.points().is_err());
    }

    #[test]
    fn grid_guard() {
        let mut cfg = base();
        cfg.snr_db = (0..2000).map(f64::from).collect();
        assert!(matches!(cfg.points(), Err(ConfigError::GridTooLarge { .. })));
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = base();
        cfg.rho = vec![0.0];
        assert!(cfg.points().is_err());
        let mut cfg = base();
        cfg.max_trials = 0;
        assert!(cfg.points().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"nt": 1, "snr_db": 0, "n_f": 1, "bogus": 1}"#).is_err());
    }

    #[test]
    fn adding_cells_keeps_keys() {
        let small = base().points().unwrap();
        let mut bigger = base();
        bigger.snr_db.push(20.0);
        let big = bigger.points().unwrap();
        for p in &small {
            let twin = big.iter().find(|q| *q == p).unwrap();
            assert_eq!(twin.cell_key(), p.cell_key());
        }
    }
}
