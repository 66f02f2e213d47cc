mod commands;
mod grid;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mimo_slas::channel::SnrConvention;
use mimo_slas::slas::ThresholdRule;

use output::Format;
use presets::Preset;

#[derive(Parser, Debug)]
#[command(
    name = "mimo-slas",
    version,
    about = "Monte-Carlo BER, convergence and complexity experiments for selective-rho SLAS MIMO detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// BER against SNR for MF/ZF/MMSE with and without LAS (default grid: fig1)
    BerSnr(BerArgs<SnrDefault>),
    /// BER against the antenna count Nt = Nr (default grid: fig2)
    BerAntennas(BerArgs<AntennaDefault>),
    /// BER against the selective factor rho (default grid: fig8)
    BerRho(BerArgs<RhoDefault>),
    /// Mean likelihood and BER after every LAS step (default grid: fig3)
    Trace(TraceArgs),
    /// Instrumented flop counts against the closed-form models (default grid: fig9)
    Flops(FlopsArgs),
    /// Randomized property checks against exhaustive references
    Selfcheck(SelfcheckArgs),
    /// Wall-clock timing of each detector (default grid: fig10)
    Bench(BenchArgs),
    /// Runs the BER grid described by a JSON experiment file
    Sweep(SweepArgs),
}

/// Supplies the preset a BER command falls back to.
pub trait DefaultPreset: Clone + Send + Sync + std::fmt::Debug + 'static {
    const PRESET: &'static str;
}

#[derive(Debug, Clone)]
pub struct SnrDefault;
#[derive(Debug, Clone)]
pub struct AntennaDefault;
#[derive(Debug, Clone)]
pub struct RhoDefault;

impl DefaultPreset for SnrDefault {
    const PRESET: &'static str = "fig1";
}
impl DefaultPreset for AntennaDefault {
    const PRESET: &'static str = "fig2";
}
impl DefaultPreset for RhoDefault {
    const PRESET: &'static str = "fig8";
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Master seed; falls back to MIMO_SLAS_SEED, then 0
    #[arg(long, env = "MIMO_SLAS_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// How SNR maps to noise: per-receive-antenna (N0 = Nt Es / snr) or per-symbol (N0 = Es / snr)
    #[arg(long, default_value = "per-receive-antenna")]
    pub snr_convention: SnrConvention,
    /// Flip threshold rule: single (rho * zeta) or squared (rho^2 * zeta)
    #[arg(long, default_value = "single")]
    pub rho_rule: ThresholdRule,
}

#[derive(Args, Debug, Clone)]
pub struct StopArgs {
    /// Trial cap per grid point
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Stop a grid point once this many bit errors were seen
    #[arg(long, default_value_t = 5)]
    pub min_errors: u64,
}

/// Grid flags; each one overrides the matching field of the preset.
#[derive(Args, Debug, Clone)]
pub struct BerGridArgs {
    /// Transmit antennas, list or start:step:stop [preset]
    #[arg(long, visible_alias = "n-list")]
    pub nt: Option<String>,
    /// Receive antennas, zipped with --nt [default: same as --nt]
    #[arg(long)]
    pub nr: Option<String>,
    /// SNR values in dB [preset]
    #[arg(long, visible_alias = "snr")]
    pub snr_list: Option<String>,
    /// Selective factors for LAS rows [preset]
    #[arg(long, visible_alias = "rho-list")]
    pub rho: Option<String>,
    /// Initial detectors: mf, zf, mmse, a comma list, or all [preset]
    #[arg(long)]
    pub detector: Option<String>,
    /// on, off or both [preset]
    #[arg(long)]
    pub las: Option<String>,
    /// LAS steps n_F [preset]
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct BerArgs<D: DefaultPreset> {
    /// Figure grid to start from
    #[arg(long, value_enum, default_value = D::PRESET)]
    pub preset: Preset,
    #[command(flatten)]
    pub grid: BerGridArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(skip)]
    _marker: std::marker::PhantomData<D>,
}

#[derive(Args, Debug, Clone)]
pub struct TraceArgs {
    /// Figure grid to start from
    #[arg(long, value_enum, default_value = "fig3")]
    pub preset: Preset,
    /// Transmit antennas [preset]
    #[arg(long)]
    pub nt: Option<usize>,
    /// Receive antennas [default: same as --nt]
    #[arg(long)]
    pub nr: Option<usize>,
    /// SNR values in dB [preset]
    #[arg(long, visible_alias = "snr")]
    pub snr_list: Option<String>,
    /// Selective factors [preset]
    #[arg(long, visible_alias = "rho-list")]
    pub rho: Option<String>,
    /// Initial detector [preset]
    #[arg(long)]
    pub detector: Option<String>,
    /// LAS steps n_F [preset]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Trials averaged per curve [preset]
    #[arg(long)]
    pub trials: Option<u64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FlopsArgs {
    /// Figure grid to start from
    #[arg(long, value_enum, default_value = "fig9")]
    pub preset: Preset,
    /// Antenna counts Nt = Nr [preset]
    #[arg(long)]
    pub n_list: Option<String>,
    /// LAS step counts [preset]
    #[arg(long, visible_alias = "steps")]
    pub steps_list: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Figure grid to start from
    #[arg(long, value_enum, default_value = "fig10")]
    pub preset: Preset,
    /// Antenna counts Nt = Nr [preset]
    #[arg(long)]
    pub n_list: Option<String>,
    /// LAS step counts [preset]
    #[arg(long, visible_alias = "steps")]
    pub steps_list: Option<String>,
    /// Timed repetitions per cell (at least 5)
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    GradientSign,
}

#[derive(Args, Debug, Clone)]
pub struct SelfcheckArgs {
    /// Seed of the random instances; falls back to MIMO_SLAS_SEED, then 0
    #[arg(long, env = "MIMO_SLAS_SEED")]
    pub seed: Option<u64>,
    /// Number of random instances
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Report file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// JSON experiment file
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("mimo-slas: {err}");
            err.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ber_defaults_follow_the_command() {
        let cli = Cli::try_parse_from(["mimo-slas", "ber-antennas"]).unwrap();
        let Command::BerAntennas(args) = cli.command else { panic!() };
        assert_eq!(args.preset, Preset::Fig2);
        assert_eq!(args.stop.trials, 100_000);
        assert_eq!(args.stop.min_errors, 5);
    }

    #[test]
    fn help_lists_defaults() {
        let mut cmd = Cli::command();
        let help = cmd.find_subcommand_mut("ber-rho").unwrap().render_long_help().to_string();
        assert!(help.contains("[default: fig8]"), "{help}");
        assert!(help.contains("[default: 100000]"));
        assert!(help.contains("MIMO_SLAS_SEED"));
    }
}
