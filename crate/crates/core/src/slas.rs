//! Selective-ρ sequential likelihood ascent search (SLAS).
//!
//! Starting from a linear detector's ±1 decision, SLAS visits one antenna per
//! step in circular order and flips that bit when the gradient of the
//! likelihood
//!
//! ```text
//! Λ(b) = bᵀ y_eff − bᵀ Re(H_eff) b,   y_eff = 2 Re(Hᴴy),  H_eff = HᴴH
//! g    = y_eff − H_real b,             H_real = 2 Re(H_eff)
//! ```
//!
//! clears a threshold scaled by the selective factor ρ:
//!
//! * `b_j = −1` flips to `+1` when `g_j >  ρ ζ_j`
//! * `b_j = +1` flips to `−1` when `g_j < −ρ ζ_j`
//!
//! with `ζ_j = |H_real[j][j]|`. Flipping bit `j` changes the likelihood by
//! `ΔΛ = −2 b_j g_j − 2 H_real[j][j] = 2(|g_j| − ζ_j)` for a qualifying flip,
//! so every accepted flip strictly increases Λ when ρ ≥ 1. Values of ρ below
//! one accept some flips that lower Λ, which lets the search leave shallow
//! local optima.
//!
//! A step is one antenna visit: `n_f = k * Nt` gives `k` passes over the
//! antennas. The gradient is maintained incrementally after each flip,
//! `g ← g + 2 b_j(old) H_real[·][j]`, at `2 Nt` real flops per flip.

use serde::{Deserialize, Serialize};

use crate::detectors::HardDecision;
use crate::linalg::{ComplexMatrix, ComplexVector, FlopCounter, LinalgError, RealMatrix};

/// Quantities derived once per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SlasWorkspace {
    y_eff: Vec<f64>,
    h_eff: ComplexMatrix,
    h_real: RealMatrix,
    zeta_base: Vec<f64>,
}

impl SlasWorkspace {
    /// Builds the workspace from the channel matrix and received vector.
    ///
    /// `y_eff` is formed as `2 Re(Hᴴy)`, which is the same vector as
    /// `Hᴴy + (Hᴴy)*`.
    pub fn precompute(h: &ComplexMatrix, y: &[num_complex::Complex64], counter: &mut FlopCounter) -> Result<Self, LinalgError> {
        let hh = h.hermitian_transpose();
        let matched = hh.mat_vec(y, counter)?;
        let y_eff: Vec<f64> = matched.iter().map(|z| 2.0 * z.re).collect();
        counter.real_mults(y_eff.len() as u64);
        let h_eff = hh.mat_mul(h, counter)?;
        let h_real = h_eff.real_part_scaled(2.0, counter);
        let zeta_base = (0..h_real.rows()).map(|j| h_real[(j, j)].abs()).collect();
        Ok(Self {
            y_eff,
            h_eff,
            h_real,
            zeta_base,
        })
    }

    pub fn nt(&self) -> usize {
        self.y_eff.len()
    }

    pub fn y_eff(&self) -> &[f64] {
        &self.y_eff
    }

    pub fn h_eff(&self) -> &ComplexMatrix {
        &self.h_eff
    }

    pub fn h_real(&self) -> &RealMatrix {
        &self.h_real
    }

    /// `|H_real[j][j]|` for each antenna, before scaling by ρ.
    pub fn zeta_base(&self) -> &[f64] {
        &self.zeta_base
    }

    /// `Λ(b) = bᵀ y_eff − bᵀ Re(H_eff) b` for a ±1 vector `b`.
    pub fn likelihood(&self, b: &[f64]) -> f64 {
        assert_eq!(b.len(), self.nt());
        let linear: f64 = b.iter().zip(&self.y_eff).map(|(bi, yi)| bi * yi).sum();
        let quadratic: f64 = (0..self.nt())
            .map(|i| {
                let row = self.h_eff.row(i);
                b[i] * row.iter().zip(b).map(|(hij, bj)| hij.re * bj).sum::<f64>()
            })
            .sum();
        linear - quadratic
    }

    /// `g = y_eff − H_real b`.
    pub fn gradient_full(&self, b: &[f64]) -> Vec<f64> {
        self.gradient_counted(b, &mut FlopCounter::new())
    }

    fn gradient_counted(&self, b: &[f64], counter: &mut FlopCounter) -> Vec<f64> {
        let hb = self
            .h_real
            .mat_vec(b, counter)
            .expect("b length must equal Nt");
        counter.real_adds(hb.len() as u64);
        self.y_eff.iter().zip(hb).map(|(y, v)| y - v).collect()
    }

    /// Gradient evaluated the way the complex flop model prices it: a complex
    /// mat-vec plus a complex vector subtraction, `8 Nt^2` flops in total.
    fn gradient_complex_model(&self, h_real_c: &ComplexMatrix, b: &[f64], counter: &mut FlopCounter) -> Vec<f64> {
        let hb = h_real_c
            .mat_vec(&ComplexVector::from_real(b), counter)
            .expect("b length must equal Nt");
        counter.complex_adds(hb.len() as u64);
        self.y_eff.iter().zip(hb.iter()).map(|(y, v)| y - v.re).collect()
    }

    /// Likelihood change from flipping bit `j` of `b`, given the gradient `g`
    /// at `b`.
    pub fn flip_delta(&self, b: &[f64], g: &[f64], j: usize) -> f64 {
        -2.0 * b[j] * g[j] - 2.0 * self.h_real[(j, j)]
    }
}

/// How ρ enters the flip threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Threshold `ρ |H_real[j][j]|`.
    #[default]
    Single,
    /// Threshold `ρ² |H_real[j][j]|`, applying ρ both inside `ζ_j` and again
    /// in the comparison.
    Squared,
}

impl ThresholdRule {
    pub fn factor(&self, rho: f64) -> f64 {
        match self {
            ThresholdRule::Single => rho,
            ThresholdRule::Squared => rho * rho,
        }
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single" => Ok(Self::Single),
            "squared" => Ok(Self::Squared),
            other => Err(format!("unknown threshold rule '{other}' (expected single or squared)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Rank-one update after each accepted flip.
    #[default]
    Incremental,
    /// Recompute `g` from scratch at every step, priced as a complex mat-vec.
    FullRecompute,
}

/// Deliberate defects used to prove the self-check catches them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectedFault {
    /// Subtract instead of add in the incremental gradient update.
    GradientUpdateSign,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlasConfig {
    pub rho: f64,
    pub n_f: usize,
    pub threshold_rule: ThresholdRule,
    pub gradient_mode: GradientMode,
    /// Stop once a full pass over the antennas produced no flip. Off by
    /// default: the detector always runs `n_f` steps.
    pub stop_after_silent_pass: bool,
    #[doc(hidden)]
    pub fault: Option<InjectedFault>,
}

impl SlasConfig {
    pub fn new(rho: f64, n_f: usize) -> Self {
        assert!(rho > 0.0, "rho must be positive");
        Self {
            rho,
            n_f,
            threshold_rule: ThresholdRule::Single,
            gradient_mode: GradientMode::Incremental,
            stop_after_silent_pass: false,
            fault: None,
        }
    }

    pub fn threshold_rule(mut self, rule: ThresholdRule) -> Self {
        self.threshold_rule = rule;
        self
    }

    pub fn gradient_mode(mut self, mode: GradientMode) -> Self {
        self.gradient_mode = mode;
        self
    }

    pub fn stop_after_silent_pass(mut self, stop: bool) -> Self {
        self.stop_after_silent_pass = stop;
        self
    }
}

/// Search state between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SlasState {
    pub b: Vec<f64>,
    /// Gradient at `b`.
    pub g: Vec<f64>,
    /// `ρ ζ_j` (or `ρ² ζ_j`) per antenna.
    pub thresholds: Vec<f64>,
    /// Steps taken so far.
    pub n: usize,
    /// Antenna visited by the next step, 0-based.
    pub j: usize,
    pub rho: f64,
    pub flips: usize,
    fault: Option<InjectedFault>,
}

impl SlasState {
    /// Initial state at `b0`. Charges the initial gradient (`2 Nt^2`) and the
    /// threshold scaling (`Nt`).
    pub fn new(ws: &SlasWorkspace, b0: &HardDecision, cfg: &SlasConfig, counter: &mut FlopCounter) -> Self {
        assert_eq!(b0.len(), ws.nt(), "initial decision length must equal Nt");
        let b = b0.bits();
        let g = ws.gradient_counted(&b, counter);
        let factor = cfg.threshold_rule.factor(cfg.rho);
        let thresholds: Vec<f64> = ws.zeta_base().iter().map(|z| factor * z).collect();
        counter.real_mults(thresholds.len() as u64);
        Self {
            b,
            g,
            thresholds,
            n: 0,
            j: 0,
            rho: cfg.rho,
            flips: 0,
            fault: cfg.fault,
        }
    }

    /// Whether bit `j` should flip under the strict threshold rule.
    pub fn flip_decision(&self, j: usize) -> bool {
        let (b, g, t) = (self.b[j], self.g[j], self.thresholds[j]);
        (b < 0.0 && g > t) || (b > 0.0 && g < -t)
    }

    /// Flips bit `j` and updates the gradient in `2 Nt` real flops.
    pub fn apply_flip(&mut self, ws: &SlasWorkspace, j: usize, counter: &mut FlopCounter) {
        let old = self.b[j];
        let scale = match self.fault {
            Some(InjectedFault::GradientUpdateSign) => -2.0 * old,
            None => 2.0 * old,
        };
        // H_real is exactly symmetric, so row j is column j.
        for (gi, hij) in self.g.iter_mut().zip(ws.h_real().row(j)) {
            *gi += scale * hij;
        }
        let nt = self.g.len() as u64;
        counter.real_mults(nt);
        counter.real_adds(nt);
        self.b[j] = -old;
        self.flips += 1;
    }

    fn flip_bit_only(&mut self, j: usize) {
        self.b[j] = -self.b[j];
        self.flips += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Step count after this step, starting at 1.
    pub step: usize,
    /// Antenna visited, 0-based.
    pub antenna: usize,
    /// Λ after the step.
    pub likelihood: f64,
    pub flipped: bool,
    /// Errors against the reference bits, when they were supplied.
    pub bit_errors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlasTrace {
    pub initial_likelihood: f64,
    pub initial_bit_errors: Option<usize>,
    pub records: Vec<StepRecord>,
    pub final_bits: HardDecision,
}

/// Flops of one run, split into one-off setup and the per-step loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LasFlops {
    pub setup: u64,
    pub steps: u64,
}

impl LasFlops {
    pub fn total(&self) -> u64 {
        self.setup + self.steps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlasOutcome {
    pub bits: HardDecision,
    pub trace: SlasTrace,
    pub flips: usize,
    /// A full pass over all antennas finished without a flip.
    pub silent_pass: bool,
    pub flops: LasFlops,
}

/// Runs `cfg.n_f` steps of SLAS from `b0`.
///
/// `b_true`, when given, is only used to fill the bit-error columns of the
/// trace. The trace likelihood is carried forward with the per-flip delta
/// rather than recomputed, so tracing adds O(1) per step.
pub fn run(
    ws: &SlasWorkspace,
    b0: &HardDecision,
    cfg: &SlasConfig,
    b_true: Option<&[f64]>,
    counter: &mut FlopCounter,
) -> SlasOutcome {
    let nt = ws.nt();
    let start = *counter;
    let mut state = SlasState::new(ws, b0, cfg, counter);
    let setup = counter.since(&start);
    let step_start = *counter;

    let count_errors = |b: &[f64]| -> Option<usize> {
        b_true.map(|t| b.iter().zip(t).filter(|(x, y)| *x * *y < 0.0).count())
    };

    let mut likelihood = ws.likelihood(&state.b);
    let initial_likelihood = likelihood;
    let mut bit_errors = count_errors(&state.b);
    let initial_bit_errors = bit_errors;

    let h_real_c = match cfg.gradient_mode {
        GradientMode::FullRecompute => Some(ws.h_real().to_complex()),
        GradientMode::Incremental => None,
    };

    let mut records = Vec::with_capacity(cfg.n_f);
    let mut quiet_steps = 0usize;
    let mut silent_pass = false;

    for _ in 0..cfg.n_f {
        let j = state.j;
        if let Some(hc) = &h_real_c {
            state.g = ws.gradient_complex_model(hc, &state.b, counter);
        }
        let flipped = state.flip_decision(j);
        if flipped {
            likelihood += ws.flip_delta(&state.b, &state.g, j);
            if let (Some(errs), Some(truth)) = (bit_errors.as_mut(), b_true) {
                if state.b[j] * truth[j] < 0.0 {
                    *errs -= 1;
                } else {
                    *errs += 1;
                }
            }
            match cfg.gradient_mode {
                GradientMode::Incremental => state.apply_flip(ws, j, counter),
                GradientMode::FullRecompute => state.flip_bit_only(j),
            }
            quiet_steps = 0;
        } else {
            quiet_steps += 1;
        }
        state.n += 1;
        state.j = (j + 1) % nt;
        records.push(StepRecord {
            step: state.n,
            antenna: j,
            likelihood,
            flipped,
            bit_errors,
        });
        if quiet_steps >= nt {
            silent_pass = true;
            if cfg.stop_after_silent_pass {
                break;
            }
        }
    }

    let bits = HardDecision::new(&state.b).expect("SLAS keeps bits in ±1");
    SlasOutcome {
        trace: SlasTrace {
            initial_likelihood,
            initial_bit_errors,
            records,
            final_bits: bits.clone(),
        },
        bits,
        flips: state.flips,
        silent_pass,
        flops: LasFlops {
            setup,
            steps: counter.since(&step_start),
        },
    }
}
