use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use mimo_slas::complexity::{self, flops_closed_form, reconcile_total, sample_instance, ModelKind};
use mimo_slas::detectors::{detect, DetectorKind};
use mimo_slas::linalg::FlopCounter;
use mimo_slas::montecarlo::{self, run_sweep, ExperimentConfig, Executor, PointConfig};
use mimo_slas::selfcheck::{self, SelfcheckConfig};
use mimo_slas::slas::{GradientMode, InjectedFault};

use crate::grid::{parse_counts, parse_detectors, parse_las, parse_reals};
use crate::output::{emit, BenchRow, BerRow, FlopsRow, TraceRow};
use crate::presets::{BerGrid, ComplexityGrid, Preset, TraceGrid};
use crate::{
    BenchArgs, BerArgs, Command, DefaultPreset, Fault, FlopsArgs, RunArgs, SelfcheckArgs, SweepArgs, TraceArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
    ChecksFailed,
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::ChecksFailed => ExitCode::from(1),
            CliError::Usage(_) | CliError::Io(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::ChecksFailed => write!(f, "selfcheck failed"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

impl From<montecarlo::ConfigError> for CliError {
    fn from(e: montecarlo::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::BerSnr(args) => ber(args),
        Command::BerAntennas(args) => ber(args),
        Command::BerRho(args) => ber(args),
        Command::Trace(args) => trace(args),
        Command::Flops(args) => flops(args),
        Command::Selfcheck(args) => run_selfcheck(args),
        Command::Bench(args) => bench(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn wrong_preset(preset: Preset, command: &str) -> CliError {
    CliError::Usage(format!("preset {} does not describe a {command} grid", preset.name()))
}

fn ber_grid<D: DefaultPreset>(args: &BerArgs<D>) -> Result<BerGrid> {
    let mut g = args.preset.ber().ok_or_else(|| wrong_preset(args.preset, "BER"))?;
    let flags = &args.grid;
    if let Some(nt) = &flags.nt {
        g.nt = parse_counts(nt)?;
        g.nr = None;
    }
    if let Some(nr) = &flags.nr {
        g.nr = Some(parse_counts(nr)?);
    }
    if let Some(s) = &flags.snr_list {
        g.snr_db = parse_reals(s)?;
    }
    if let Some(s) = &flags.rho {
        g.rho = parse_reals(s)?;
    }
    if let Some(s) = &flags.detector {
        g.detectors = parse_detectors(s)?;
    }
    if let Some(s) = &flags.las {
        g.las = parse_las(s)?;
    }
    if let Some(n_f) = flags.steps {
        g.n_f = n_f;
    }
    Ok(g)
}

fn ber<D: DefaultPreset>(args: BerArgs<D>) -> Result<ExitCode> {
    let g = ber_grid(&args)?;
    let cfg = ExperimentConfig {
        experiment: g.experiment,
        nt: g.nt,
        nr: g.nr,
        snr_db: g.snr_db,
        rho: g.rho,
        detector: g.detectors,
        las_enabled: g.las,
        n_f: g.n_f,
        max_trials: args.stop.trials,
        min_bit_errors: args.stop.min_errors,
        master_seed: args.run.seed.unwrap_or(0),
        snr_convention: args.model.snr_convention,
        threshold_rule: args.model.rho_rule,
    };
    run_ber(&cfg, &args.run)
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.run.seed {
        cfg.master_seed = seed;
    }
    run_ber(&cfg, &args.run)
}

pub fn ber_row(experiment: &str, p: &montecarlo::BerPoint) -> BerRow {
    let c = &p.point;
    let mut model = flops_closed_form(c.detector.into(), c.nt, c.nr, 0);
    if c.las_enabled {
        model += flops_closed_form(ModelKind::Las, c.nt, c.nr, c.n_f);
    }
    BerRow {
        experiment: experiment.to_string(),
        nt: c.nt,
        nr: c.nr,
        snr_db: c.snr_db,
        detector: c.detector.as_str().to_string(),
        las: c.las_enabled,
        rho: c.las_enabled.then_some(c.rho),
        n_f: c.las_enabled.then_some(c.n_f),
        trials: p.trials_run,
        bit_errors: p.bit_errors,
        ber: p.ber,
        flops_model: model,
        flops_measured: p.mean_flops,
        flagged: p.flagged(),
    }
}

fn run_ber(cfg: &ExperimentConfig, run: &RunArgs) -> Result<ExitCode> {
    let exec = Executor::new(run.jobs);
    let points = run_sweep(cfg, &exec)?;
    let rows: Vec<BerRow> = points.iter().map(|p| ber_row(&cfg.experiment, p)).collect();
    emit(&rows, run.format, run.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn trace_grid(args: &TraceArgs) -> Result<TraceGrid> {
    let mut g = args.preset.trace().ok_or_else(|| wrong_preset(args.preset, "trace"))?;
    if let Some(nt) = args.nt {
        g.nt = nt;
        g.nr = nt;
    }
    if let Some(nr) = args.nr {
        g.nr = nr;
    }
    if let Some(s) = &args.snr_list {
        g.snr_db = parse_reals(s)?;
    }
    if let Some(s) = &args.rho {
        g.rho = parse_reals(s)?;
    }
    if let Some(s) = &args.detector {
        g.detector = s.parse::<DetectorKind>()?;
    }
    if let Some(n_f) = args.steps {
        g.n_f = n_f;
    }
    if let Some(trials) = args.trials {
        g.trials = trials;
    }
    if g.nt == 0 || g.nr == 0 {
        return Err(CliError::Usage("antenna counts must be at least 1".into()));
    }
    if g.rho.iter().any(|&r| r <= 0.0) {
        return Err(CliError::Usage("rho must be positive".into()));
    }
    Ok(g)
}

fn trace(args: TraceArgs) -> Result<ExitCode> {
    let g = trace_grid(&args)?;
    let seed = args.run.seed.unwrap_or(0);
    let exec = Executor::new(args.run.jobs);
    let mut rows = Vec::new();
    for &snr_db in &g.snr_db {
        for &rho in &g.rho {
            let point = PointConfig {
                nt: g.nt,
                nr: g.nr,
                snr_db,
                rho,
                detector: g.detector,
                las_enabled: true,
                n_f: g.n_f,
                max_trials: g.trials,
                min_bit_errors: u64::MAX,
                master_seed: seed,
                snr_convention: args.model.snr_convention,
                threshold_rule: args.model.rho_rule,
            };
            let agg = montecarlo::run_trace(&point, g.trials, &exec)?;
            for step in 0..=agg.steps() {
                rows.push(TraceRow {
                    experiment: g.experiment.clone(),
                    nt: g.nt,
                    nr: g.nr,
                    snr_db,
                    detector: g.detector.as_str().to_string(),
                    rho,
                    n_f: g.n_f,
                    trials: agg.trials,
                    step,
                    mean_likelihood: agg.mean_likelihood[step],
                    mean_ber: agg.mean_ber[step],
                });
            }
        }
    }
    emit(&rows, args.run.format, args.run.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn complexity_grid(base: ComplexityGrid, n_list: &Option<String>, steps_list: &Option<String>) -> Result<ComplexityGrid> {
    let mut g = base;
    if let Some(s) = n_list {
        g.n = parse_counts(s)?;
    }
    if let Some(s) = steps_list {
        g.n_f = parse_counts(s)?;
    }
    if g.n.contains(&0) {
        return Err(CliError::Usage("antenna counts must be at least 1".into()));
    }
    Ok(g)
}

fn flops_row(experiment: &str, detector: &str, n_f: Option<usize>, report: complexity::ReconciliationReport) -> FlopsRow {
    FlopsRow {
        experiment: experiment.to_string(),
        nt: report.nt,
        nr: report.nr,
        n_f,
        detector: detector.to_string(),
        flops_model: report.model_flops,
        flops_measured: report.measured_flops,
        relative_error: report.relative_error,
        verdict: report.verdict.to_string(),
        notes: report.notes,
    }
}

fn flops(args: FlopsArgs) -> Result<ExitCode> {
    let base = args.preset.flops().ok_or_else(|| wrong_preset(args.preset, "flops"))?;
    let g = complexity_grid(base, &args.n_list, &args.steps_list)?;
    let seed = args.run.seed.unwrap_or(0);
    let mut rows = Vec::new();
    for &n in &g.n {
        let inst = sample_instance(n, n, 0.0, seed);
        let snr = mimo_slas::channel::SnrConfig::new(0.0);
        for kind in DetectorKind::ALL {
            let mut counter = FlopCounter::new();
            let est = detect(kind, &inst.h, &inst.y, &snr, &mut counter)
                .map_err(|e| CliError::Usage(format!("{kind} at N={n}: {e}")))?;
            let report = complexity::reconcile(kind.into(), n, n, 0, &counter).with_stages(&est.stages);
            rows.push(flops_row(&g.experiment, kind.as_str(), None, report));
        }
        for &n_f in &g.n_f {
            for (label, mode) in [("las", GradientMode::FullRecompute), ("las-incremental", GradientMode::Incremental)] {
                let m = complexity::measure_las(n, n, n_f, mode, seed)
                    .map_err(|e| CliError::Usage(format!("LAS at N={n}: {e}")))?;
                let mut report = reconcile_total(ModelKind::Las, n, n, n_f, m.run.steps);
                report.notes.push_str(&format!(
                    "; precompute={} setup={} flips={}",
                    m.precompute, m.run.setup, m.flips
                ));
                rows.push(flops_row(&g.experiment, label, Some(n_f), report));
            }
        }
    }
    emit(&rows, args.run.format, args.run.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let base = args.preset.bench().ok_or_else(|| wrong_preset(args.preset, "bench"))?;
    let g = complexity_grid(base, &args.n_list, &args.steps_list)?;
    if args.repetitions < 5 {
        return Err(CliError::Usage("--repetitions must be at least 5".into()));
    }
    let mut rows = Vec::new();
    for &n in &g.n {
        let mut cells: Vec<(ModelKind, Option<usize>)> =
            DetectorKind::ALL.iter().map(|&k| (ModelKind::from(k), None)).collect();
        cells.extend(g.n_f.iter().map(|&f| (ModelKind::Las, Some(f))));
        for (kind, n_f) in cells {
            let stats = complexity::benchmark(kind, n, n, n_f.unwrap_or(0), args.repetitions)
                .map_err(|e| CliError::Usage(format!("{kind} at N={n}: {e}")))?;
            rows.push(BenchRow {
                experiment: g.experiment.clone(),
                nt: n,
                nr: n,
                n_f,
                detector: kind.as_str().to_string(),
                repetitions: args.repetitions,
                median_s: stats.median,
                p10_s: stats.p10,
                p90_s: stats.p90,
            });
        }
    }
    emit(&rows, args.format, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn write_text(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            out.flush()
        }
    }
}

fn run_selfcheck(args: SelfcheckArgs) -> Result<ExitCode> {
    if args.instances == 0 {
        return Err(CliError::Usage("--instances must be at least 1".into()));
    }
    let cfg = SelfcheckConfig {
        seed: args.seed.unwrap_or(0),
        instances: args.instances,
        fault: args.inject_fault.map(|Fault::GradientSign| InjectedFault::GradientUpdateSign),
        ..SelfcheckConfig::default()
    };
    let report = selfcheck::run(&cfg);
    write_text(&report.to_string(), args.out.as_deref())?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::ChecksFailed)
    }
}
