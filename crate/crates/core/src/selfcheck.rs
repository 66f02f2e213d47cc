//! Randomized property checks of SLAS against exact references.

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::channel::{assemble, sample_bpsk, sample_channel, SnrConfig};
use crate::detectors::{detect, slice_bpsk, DetectorKind, HardDecision};
use crate::linalg::FlopCounter;
use crate::montecarlo::seed;
use crate::oracle::{is_local_optimum, ml_bruteforce};
use crate::slas::{self, InjectedFault, SlasConfig, SlasState, SlasWorkspace};

/// Largest gradient drift tolerated between incremental and full evaluation.
pub const GRADIENT_TOLERANCE: f64 = 1e-9;
/// Relative slack for likelihood comparisons, covering round-off only.
pub const LIKELIHOOD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    MonotoneFlips,
    FinalNotWorse,
    SilentPassIsLocalOptimum,
    GradientConsistency,
    BoundedByMl,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::MonotoneFlips,
        Property::FinalNotWorse,
        Property::SilentPassIsLocalOptimum,
        Property::GradientConsistency,
        Property::BoundedByMl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Property::MonotoneFlips => "monotone-flips",
            Property::FinalNotWorse => "final-not-worse",
            Property::SilentPassIsLocalOptimum => "silent-pass-local-optimum",
            Property::GradientConsistency => "gradient-consistency",
            Property::BoundedByMl => "bounded-by-ml",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelfcheckConfig {
    pub seed: u64,
    pub instances: usize,
    pub sizes: Vec<usize>,
    pub snrs_db: Vec<f64>,
    /// Passes over the antennas per instance.
    pub passes: usize,
    pub fault: Option<InjectedFault>,
}

impl Default for SelfcheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 1000,
            sizes: vec![2, 4, 8],
            snrs_db: vec![0.0, 10.0, 20.0],
            passes: 4,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub property: Property,
    pub instance: usize,
    pub nt: usize,
    pub snr_db: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyTally {
    pub property: Property,
    pub checks: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfcheckReport {
    pub seed: u64,
    pub instances: usize,
    pub tallies: Vec<PropertyTally>,
    /// First failure per property.
    pub failures: Vec<Failure>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.tallies.iter().all(|t| t.failures == 0)
    }

    pub fn tally(&self, property: Property) -> &PropertyTally {
        self.tallies
            .iter()
            .find(|t| t.property == property)
            .expect("every property is tallied")
    }
}

impl fmt::Display for SelfcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selfcheck seed={} instances={}", self.seed, self.instances)?;
        writeln!(f, "{:<28} {:>8} {:>8}  result", "property", "checks", "failures")?;
        for t in &self.tallies {
            let verdict = if t.failures == 0 { "PASS" } else { "FAIL" };
            writeln!(f, "{:<28} {:>8} {:>8}  {verdict}", t.property.as_str(), t.checks, t.failures)?;
        }
        for fail in &self.failures {
            writeln!(
                f,
                "first failure of {}: seed={} instance={} nt={} snr_db={}: {}",
                fail.property.as_str(),
                self.seed,
                fail.instance,
                fail.nt,
                fail.snr_db,
                fail.detail
            )?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

struct Recorder {
    tallies: Vec<PropertyTally>,
    failures: Vec<Failure>,
    instance: usize,
    nt: usize,
    snr_db: f64,
}

impl Recorder {
    fn check(&mut self, property: Property, ok: bool, detail: impl FnOnce() -> String) {
        let tally = self
            .tallies
            .iter_mut()
            .find(|t| t.property == property)
            .expect("every property is tallied");
        tally.checks += 1;
        if ok {
            return;
        }
        tally.failures += 1;
        if !self.failures.iter().any(|f| f.property == property) {
            self.failures.push(Failure {
                property,
                instance: self.instance,
                nt: self.nt,
                snr_db: self.snr_db,
                detail: detail(),
            });
        }
    }
}

fn slack(reference: f64) -> f64 {
    LIKELIHOOD_TOLERANCE * (1.0 + reference.abs())
}

/// Runs every property on `cfg.instances` random systems at ρ = 1.
///
/// Instance `i` uses `Nt = Nr = sizes[i % len]`, cycles the SNR list and the
/// initial detector, and draws from its own ChaCha stream, so any failure can
/// be replayed from `(seed, instance)` alone.
pub fn run(cfg: &SelfcheckConfig) -> SelfcheckReport {
    assert!(!cfg.sizes.is_empty() && !cfg.snrs_db.is_empty());
    let mut rec = Recorder {
        tallies: Property::ALL
            .iter()
            .map(|&property| PropertyTally {
                property,
                checks: 0,
                failures: 0,
            })
            .collect(),
        failures: Vec::new(),
        instance: 0,
        nt: 0,
        snr_db: 0.0,
    };
    let key = seed::cell_key(cfg.seed, 0, 0, 0.0);

    for i in 0..cfg.instances {
        let nt = cfg.sizes[i % cfg.sizes.len()];
        let snr_db = cfg.snrs_db[(i / cfg.sizes.len()) % cfg.snrs_db.len()];
        let kind = DetectorKind::ALL[(i / (cfg.sizes.len() * cfg.snrs_db.len())) % DetectorKind::ALL.len()];
        rec.instance = i;
        rec.nt = nt;
        rec.snr_db = snr_db;
        check_instance(&mut rec, cfg, seed::trial_rng(key, i as u64), nt, snr_db, kind);
    }

    SelfcheckReport {
        seed: cfg.seed,
        instances: cfg.instances,
        tallies: rec.tallies,
        failures: rec.failures,
    }
}

fn check_instance(rec: &mut Recorder, cfg: &SelfcheckConfig, mut rng: ChaCha8Rng, nt: usize, snr_db: f64, kind: DetectorKind) {
    let snr = SnrConfig::new(snr_db);
    let h = sample_channel(nt, nt, &mut rng);
    let b = sample_bpsk(nt, snr.es, &mut rng);
    let inst = assemble(h, b, &snr, &mut rng).expect("square shapes agree");
    let mut counter = FlopCounter::new();
    let Ok(soft) = detect(kind, &inst.h, &inst.y, &snr, &mut counter) else {
        // singular Gram matrix; fall back to MF so the instance still counts
        return check_instance_from(rec, cfg, &inst.h, &inst.y, None);
    };
    check_instance_from(rec, cfg, &inst.h, &inst.y, Some(slice_bpsk(&soft)));
}

fn check_instance_from(
    rec: &mut Recorder,
    cfg: &SelfcheckConfig,
    h: &crate::linalg::ComplexMatrix,
    y: &[num_complex::Complex64],
    b0: Option<HardDecision>,
) {
    let mut counter = FlopCounter::new();
    let b0 = match b0 {
        Some(b0) => b0,
        None => slice_bpsk(&detect(DetectorKind::Mf, h, y, &SnrConfig::new(0.0), &mut counter).expect("MF cannot fail")),
    };
    let ws = SlasWorkspace::precompute(h, y, &mut counter).expect("square shapes agree");
    let nt = ws.nt();
    let mut slas_cfg = SlasConfig::new(1.0, cfg.passes * nt);
    slas_cfg.fault = cfg.fault;

    let mut state = SlasState::new(&ws, &b0, &slas_cfg, &mut counter);
    let initial = ws.likelihood(&state.b);
    let mut quiet = 0usize;
    let mut checked_silent_pass = false;

    for _ in 0..slas_cfg.n_f {
        let j = state.j;
        if state.flip_decision(j) {
            let before = ws.likelihood(&state.b);
            state.apply_flip(&ws, j, &mut counter);
            let after = ws.likelihood(&state.b);
            rec.check(Property::MonotoneFlips, after >= before - slack(before), || {
                format!("flip of antenna {j} moved the likelihood from {before:.12e} to {after:.12e}")
            });
            quiet = 0;
        } else {
            quiet += 1;
        }
        let full = ws.gradient_full(&state.b);
        let drift = full
            .iter()
            .zip(&state.g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rec.check(Property::GradientConsistency, drift <= GRADIENT_TOLERANCE, || {
            format!("incremental gradient drifted {drift:.3e} from full recompute at step {}", state.n + 1)
        });
        state.n += 1;
        state.j = (j + 1) % nt;
        if quiet == nt && !checked_silent_pass {
            checked_silent_pass = true;
            rec.check(Property::SilentPassIsLocalOptimum, is_local_optimum(&ws, &state.b), || {
                format!("silent pass ended at step {} on a vector that is not a local optimum", state.n)
            });
        }
    }

    let last = ws.likelihood(&state.b);
    rec.check(Property::FinalNotWorse, last >= initial - slack(initial), || {
        format!("final likelihood {last:.12e} below the initial {initial:.12e}")
    });
    let ml = ml_bruteforce(&ws).expect("selfcheck sizes are enumerable");
    rec.check(Property::BoundedByMl, last <= ml.lambda_star + slack(ml.lambda_star), || {
        format!("final likelihood {last:.12e} exceeds the exhaustive maximum {:.12e}", ml.lambda_star)
    });

    // the library loop must agree with the one above
    let out = slas::run(&ws, &b0, &slas_cfg, None, &mut FlopCounter::new());
    rec.check(Property::FinalNotWorse, out.bits.bits() == state.b, || {
        "library run and step-by-step replay ended on different vectors".into()
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SelfcheckConfig {
        SelfcheckConfig {
            seed,
            instances: 90,
            ..SelfcheckConfig::default()
        }
    }

    #[test]
    fn clean_run_passes() {
        let report = run(&small(0));
        assert!(report.passed(), "{report}");
        for t in &report.tallies {
            assert!(t.checks > 0, "{} never exercised", t.property.as_str());
        }
    }

    #[test]
    fn report_is_deterministic() {
        assert_eq!(run(&small(11)).to_string(), run(&small(11)).to_string());
    }

    #[test]
    fn injected_sign_fault_is_caught() {
        let cfg = SelfcheckConfig {
            fault: Some(InjectedFault::GradientUpdateSign),
            ..small(0)
        };
        let report = run(&cfg);
        assert!(!report.passed());
        assert!(report.tally(Property::GradientConsistency).failures > 0);
        let text = report.to_string();
        assert!(text.contains("seed=0 instance="), "{text}");
        assert!(text.ends_with("overall: FAIL"));
    }
}
