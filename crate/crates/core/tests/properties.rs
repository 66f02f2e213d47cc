use mimo_slas::channel::{assemble, assemble_with_noise_variance, sample_bpsk, sample_channel, SnrConfig};
use mimo_slas::complexity::{flops_closed_form, measure_detector, ModelKind};
use mimo_slas::detectors::{mf, mmse_regularized, slice_bpsk, slice_values, zf, DetectorKind};
use mimo_slas::linalg::{ComplexMatrix, FlopCounter};
use mimo_slas::montecarlo::{run_point, trial, Executor, PointConfig};
use mimo_slas::oracle::{is_local_optimum, ml_bruteforce};
use mimo_slas::slas::{run, SlasConfig, SlasState, SlasWorkspace, ThresholdRule};
use mimo_slas::channel::SnrConvention;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn workspace(nt: usize, nr: usize, snr_db: f64, seed: u64) -> (SlasWorkspace, Vec<f64>, mimo_slas::detectors::HardDecision) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = sample_channel(nt, nr, &mut rng);
    let b = sample_bpsk(nt, 1.0, &mut rng);
    let inst = assemble(h, b, &SnrConfig::new(snr_db), &mut rng).unwrap();
    let mut c = FlopCounter::new();
    let b0 = slice_bpsk(&mf(&inst.h, &inst.y, &mut c).unwrap());
    let ws = SlasWorkspace::precompute(&inst.h, &inst.y, &mut c).unwrap();
    (ws, inst.bits(), b0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_times_matrix_is_identity(n in 1usize..=32, seed in any::<u64>()) {
        let a = sample_channel(n, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let inv = a.gauss_invert(&mut FlopCounter::new()).unwrap();
        let prod = inv.mat_mul(&a, &mut FlopCounter::new()).unwrap();
        prop_assert!(prod.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-8);
    }

    #[test]
    fn mat_mul_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (sample_channel(4, 4, &mut rng), sample_channel(4, 4, &mut rng), sample_channel(4, 4, &mut rng));
        let mut k = FlopCounter::new();
        let left = a.mat_mul(&b, &mut k).unwrap().mat_mul(&c, &mut k).unwrap();
        let right = a.mat_mul(&b.mat_mul(&c, &mut k).unwrap(), &mut k).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-9);
    }

    #[test]
    fn mf_count_matches_closed_form(nt in 1usize..=64, nr in 1usize..=64) {
        let est = measure_detector(DetectorKind::Mf, nt, nr, 0).unwrap();
        prop_assert_eq!(est.flops_spent, (8 * nt * nr - 2 * nt) as u64);
        prop_assert_eq!(est.flops_spent, flops_closed_form(ModelKind::Mf, nt, nr, 0));
    }

    #[test]
    fn zf_and_mmse_models_differ_by_4nt(nt in 1usize..=256, nr in 1usize..=256) {
        let zf = flops_closed_form(ModelKind::Zf, nt, nr, 0) as i128;
        let mmse = flops_closed_form(ModelKind::Mmse, nt, nr, 0) as i128;
        prop_assert_eq!(zf - mmse, -4 * nt as i128);
    }

    #[test]
    fn las_model_is_linear_in_steps(nt in 1usize..=256, n_f in 1usize..=512) {
        let one = flops_closed_form(ModelKind::Las, nt, nt, 1);
        prop_assert_eq!(flops_closed_form(ModelKind::Las, nt, nt, n_f), one * n_f as u64);
    }

    #[test]
    fn channel_reconstructs_and_is_seeded(nt in 1usize..=8, nr in 1usize..=8, snr in -10.0f64..40.0, seed in any::<u64>()) {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = sample_channel(nt, nr, &mut rng);
            let b = sample_bpsk(nt, 1.0, &mut rng);
            assemble(h, b, &SnrConfig::new(snr), &mut rng).unwrap()
        };
        let inst = draw();
        let hb = inst.h.mat_vec(&inst.b_true, &mut FlopCounter::new()).unwrap();
        for k in 0..nr {
            prop_assert_eq!(inst.y[k], hb[k] + inst.noise[k]);
        }
        prop_assert_eq!(inst, draw());
    }

    #[test]
    fn noise_variance_falls_with_snr(a in -20.0f64..60.0, gap in 0.01f64..20.0, nt in 1usize..=256) {
        for conv in [SnrConvention::PerReceiveAntenna, SnrConvention::PerSymbol] {
            let lo = SnrConfig::new(a).with_convention(conv).noise_variance(nt);
            let hi = SnrConfig::new(a + gap).with_convention(conv).noise_variance(nt);
            prop_assert!(lo > hi);
        }
    }

    #[test]
    fn noiseless_zf_recovers_bits(nt in 1usize..=8, extra in 0usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = sample_channel(nt, nt + extra, &mut rng);
        let b = sample_bpsk(nt, 1.0, &mut rng);
        let inst = assemble_with_noise_variance(h, b, 0.0, 1.0, &mut rng).unwrap();
        let est = zf(&inst.h, &inst.y, &mut FlopCounter::new()).unwrap();
        prop_assert_eq!(slice_bpsk(&est).bits(), inst.bits());
    }

    #[test]
    fn slicing_is_idempotent(values in prop::collection::vec(-5.0f64..5.0, 1..16)) {
        let soft: Vec<_> = values.iter().map(|&v| num_complex::Complex64::new(v, 0.3)).collect();
        let once = slice_values(&soft);
        prop_assert_eq!(slice_values(&once.to_soft()), once);
    }

    #[test]
    fn accepted_flips_raise_likelihood_at_rho_one(nt in 1usize..=12, snr in 0.0f64..30.0, seed in any::<u64>(), rho in 1.0f64..2.0) {
        let (ws, _, b0) = workspace(nt, nt, snr, seed);
        let cfg = SlasConfig::new(rho, 4 * nt);
        let mut counter = FlopCounter::new();
        let mut state = SlasState::new(&ws, &b0, &cfg, &mut counter);
        for _ in 0..cfg.n_f {
            let j = state.j;
            if state.flip_decision(j) {
                let before = ws.likelihood(&state.b);
                state.apply_flip(&ws, j, &mut counter);
                prop_assert!(ws.likelihood(&state.b) > before);
            }
            let full = ws.gradient_full(&state.b);
            for (a, b) in full.iter().zip(&state.g) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            state.j = (j + 1) % nt;
        }
    }

    #[test]
    fn converged_runs_are_local_optima(nt in 1usize..=16, snr in 0.0f64..30.0, seed in any::<u64>()) {
        let (ws, _, b0) = workspace(nt, nt, snr, seed);
        let cfg = SlasConfig::new(1.0, 64 * nt).stop_after_silent_pass(true);
        let out = run(&ws, &b0, &cfg, None, &mut FlopCounter::new());
        prop_assume!(out.silent_pass);
        let b = out.bits.bits();
        prop_assert!(is_local_optimum(&ws, &b));
        // cross-check against direct single-flip enumeration
        let base = ws.likelihood(&b);
        for j in 0..nt {
            let mut flipped = b.clone();
            flipped[j] = -flipped[j];
            prop_assert!(ws.likelihood(&flipped) <= base + 1e-9 * (1.0 + base.abs()));
        }
        prop_assert!(base >= ws.likelihood(&b0.bits()));
    }

    #[test]
    fn ml_dominates_every_candidate(nt in 1usize..=10, snr in 0.0f64..20.0, seed in any::<u64>(), rho in 0.5f64..1.5) {
        let (ws, truth, b0) = workspace(nt, nt, snr, seed);
        let ml = ml_bruteforce(&ws).unwrap();
        prop_assert_eq!(ml.enumerated, 1u64 << nt);
        let las = run(&ws, &b0, &SlasConfig::new(rho, 3 * nt), Some(&truth), &mut FlopCounter::new());
        let tol = 1e-9 * (1.0 + ml.lambda_star.abs());
        for cand in [truth, b0.bits(), las.bits.bits()] {
            prop_assert!(ws.likelihood(&cand) <= ml.lambda_star + tol);
        }
    }

    #[test]
    fn trace_integrity_below_rho_one(nt in 2usize..=12, seed in any::<u64>(), rho in 0.3f64..1.0) {
        let (ws, truth, b0) = workspace(nt, nt, 5.0, seed);
        let out = run(&ws, &b0, &SlasConfig::new(rho, 5 * nt), Some(&truth), &mut FlopCounter::new());
        prop_assert_eq!(out.trace.records.len(), 5 * nt);
        prop_assert_eq!(out.trace.records.iter().filter(|r| r.flipped).count(), out.flips);
        for (k, r) in out.trace.records.iter().enumerate() {
            prop_assert_eq!(r.step, k + 1);
            prop_assert_eq!(r.antenna, k % nt);
        }
        let last = out.trace.records.last().unwrap();
        let exact = ws.likelihood(&out.bits.bits());
        prop_assert!((last.likelihood - exact).abs() <= 1e-8 * (1.0 + exact.abs()));
        prop_assert_eq!(last.bit_errors, Some(out.bits.errors_against(&truth)));
    }

    #[test]
    fn slas_is_deterministic(nt in 1usize..=12, seed in any::<u64>(), rho in 0.5f64..1.5) {
        let (ws, _, b0) = workspace(nt, nt, 10.0, seed);
        let cfg = SlasConfig::new(rho, 2 * nt).threshold_rule(ThresholdRule::Squared);
        prop_assert_eq!(
            run(&ws, &b0, &cfg, None, &mut FlopCounter::new()),
            run(&ws, &b0, &cfg, None, &mut FlopCounter::new())
        );
    }
}

#[test]
fn mmse_approaches_zf_as_noise_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = sample_channel(6, 8, &mut rng);
    let y = sample_channel(1, 8, &mut rng).column(0);
    let z = zf(&h, &y, &mut FlopCounter::new()).unwrap().values;
    let mut last = f64::INFINITY;
    for ratio in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let m = mmse_regularized(&h, &y, ratio, &mut FlopCounter::new()).unwrap().values;
        let gap = m.max_abs_diff(&z);
        assert!(gap < last);
        assert!(gap <= 100.0 * ratio, "gap {gap} at ratio {ratio}");
        last = gap;
    }
}

#[test]
fn run_point_error_count_is_additive() {
    let p = PointConfig {
        nt: 6,
        nr: 6,
        snr_db: 4.0,
        rho: 0.9,
        detector: DetectorKind::Mf,
        las_enabled: true,
        n_f: 18,
        max_trials: 300,
        min_bit_errors: u64::MAX,
        master_seed: 3,
        snr_convention: SnrConvention::PerReceiveAntenna,
        threshold_rule: ThresholdRule::Single,
    };
    let total = run_point(&p, &Executor::new(3));
    let sum: u64 = (0..300).map(|i| trial(&p, i, false).unwrap().bit_errors).sum();
    assert_eq!(total.bit_errors, sum);
    assert_eq!(total.ber, sum as f64 / (300.0 * 6.0));
    assert_eq!(total, run_point(&p, &Executor::sequential()));
}

#[test]
fn selfcheck_default_suite_passes() {
    let report = mimo_slas::selfcheck::run(&Default::default());
    assert!(report.passed(), "{report}");
}
