mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use omit_core::config::{load_document, ConfigDocument};
use omit_core::figures::{figure_preset, FigurePreset, DEFAULT_GRID};
use omit_core::nmode::n_mode_spectrum;
use omit_core::oracle::{oracle_check, CheckOptions};
use omit_core::presets::{lab_n_mode, PUMP_POWER_W};
use omit_core::sidebands::spectrum::{compute_spectrum, OmegaGrid};
use omit_core::sweep::{run_sweep, SweepSpec, SweepValues};
use omit_core::{OmitError, SystemConfig64};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "omit-lab", version, about = "Optomechanically induced transparency with coupled mechanical modes")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// System description file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files; single results go to stdout when absent.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "OMIT_LAB_JOBS")]
    jobs: Option<usize>,

    /// Probe grid `start:stop:count` in units of ω_m.
    #[arg(long, global = true)]
    omega_grid: Option<String>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Log verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probe transmission, second-order efficiency and group delay over Ω.
    Spectrum,
    /// Spectra while one configuration value is stepped.
    Sweep {
        /// Dotted key, e.g. `drive.power_pump_w` or `coupling.1.theta_pi_units`.
        #[arg(long)]
        param: String,
        /// `start:stop:count[:log]` or a list `a,b,c`.
        #[arg(long)]
        values: String,
    },
    /// Dark-mode analysis.
    Darkmode {
        #[command(subcommand)]
        action: DarkmodeAction,
    },
    /// N-mode chain tools.
    Nmode {
        #[command(subcommand)]
        action: NmodeAction,
    },
    /// Time-domain cross-check of the sideband amplitudes.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Write the tables behind one of the named figure presets.
    Figure {
        #[arg(value_parser = parse_preset)]
        name: FigurePreset,
    },
}

#[derive(Subcommand, Debug)]
enum DarkmodeAction {
    /// Hybridization, adiabatic elimination and linewidth prediction as JSON.
    Report,
}

#[derive(Args, Debug, Clone)]
struct ChainArgs {
    /// Number of identical modes (ignored with --config).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    eta_over_omegam: f64,
    /// θ₁ in units of π.
    #[arg(long, default_value_t = 0.0)]
    theta1_pi: f64,
    #[arg(long, default_value_t = PUMP_POWER_W * 1e3)]
    power_mw: f64,
}

#[derive(Subcommand, Debug)]
enum NmodeAction {
    /// Transmission spectrum of an N-mode chain.
    Spectrum(ChainArgs),
    /// Normal-mode frequencies, transform and effective couplings as JSON.
    Basis(ChainArgs),
}

#[derive(Subcommand, Debug)]
enum OracleAction {
    /// Integrate, demodulate and compare at several probe detunings.
    Check {
        /// Probe detunings in units of ω_m.
        #[arg(long, value_delimiter = ',', default_value = "0.93,0.95,1.0,1.05,1.07")]
        omegas: Vec<f64>,
        /// Probe-to-pump amplitude ratio used for the check.
        #[arg(long, default_value_t = 0.01)]
        probe_ratio: f64,
        /// Demodulation window in probe periods.
        #[arg(long, default_value_t = 100)]
        periods: usize,
    },
}

fn parse_preset(s: &str) -> Result<FigurePreset, String> {
    s.parse().map_err(|e: OmitError| e.to_string())
}

/// Failure of one invocation, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<OmitError> for Failure {
    fn from(e: OmitError) -> Self {
        let code = if e.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERICAL };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

type CliResult<T = ()> = Result<T, Failure>;

impl Common {
    fn document(&self) -> CliResult<ConfigDocument> {
        let path = self.config.as_ref().ok_or_else(|| usage("--config is required for this command"))?;
        Ok(load_document(path)?)
    }

    fn grid(&self) -> CliResult<OmegaGrid> {
        match &self.omega_grid {
            Some(s) => Ok(OmegaGrid::parse(s)?),
            None => Ok(DEFAULT_GRID),
        }
    }

    fn json_only(&self) -> CliResult {
        match self.format {
            Some(Format::Csv) => Err(usage("this command only produces JSON")),
            _ => Ok(()),
        }
    }

    fn out_dir(&self) -> CliResult<&Path> {
        self.out_dir.as_deref().ok_or_else(|| usage("--out-dir is required for this command"))
    }

    /// Writes to `<out-dir>/<name>` or stdout.
    fn emit(&self, name: &str, content: &str) -> CliResult {
        match &self.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(OmitError::from)?;
                let path = dir.join(name);
                std::fs::write(&path, content).map_err(OmitError::from)?;
                log::info!("wrote {}", path.display());
            }
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(content.as_bytes()).and_then(|_| out.flush()) {
                    // A reader such as `head` closing the pipe early is not an error.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                    r => r.map_err(OmitError::from)?,
                }
            }
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn chain_config(common: &Common, chain: &ChainArgs) -> CliResult<SystemConfig64> {
    match (&common.config, chain.n) {
        (Some(_), _) => Ok(common.document()?.to_config()?),
        (None, Some(n)) if n >= 1 => {
            let c = lab_n_mode::<f64>(n, chain.power_mw * 1e-3, chain.eta_over_omegam, chain.theta1_pi);
            c.validate()?;
            Ok(c)
        }
        (None, Some(_)) => Err(usage("--n must be at least 1")),
        (None, None) => Err(usage("give either --config or --n")),
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    let c = &cli.common;
    match cli.command {
        Command::Spectrum => {
            let config = c.document()?.to_config()?;
            let s = compute_spectrum(&config, &c.grid()?)?;
            match c.format.unwrap_or(Format::Csv) {
                Format::Csv => c.emit("spectrum.csv", &s.to_csv())?,
                Format::Json => c.emit("spectrum.json", &pretty(&s.to_json()))?,
            }
        }
        Command::Sweep { param, values } => {
            let doc = c.document()?;
            let dir = c.out_dir()?;
            let spec = SweepSpec { parameter_path: param, values: SweepValues::parse(&values)?, inner_grid: c.grid()? };
            let bundle = run_sweep(&doc, &spec)?;
            bundle.write(dir)?;
            let failed = bundle.failures();
            if bundle.all_failed() {
                return Err(Failure { code: EXIT_NUMERICAL, message: format!("all {failed} sweep points failed") });
            }
            if failed > 0 {
                eprintln!("omit-lab: {failed} of {} sweep points failed; see manifest.json", bundle.points.len());
                return Ok(EXIT_PARTIAL);
            }
        }
        Command::Darkmode { action: DarkmodeAction::Report } => {
            c.json_only()?;
            let config = c.document()?.to_config()?;
            c.emit("darkmode.json", &pretty(&report::darkmode(&config)?))?;
        }
        Command::Nmode { action: NmodeAction::Spectrum(chain) } => {
            let config = chain_config(c, &chain)?;
            let s = n_mode_spectrum(&config, &c.grid()?)?;
            match c.format.unwrap_or(Format::Csv) {
                Format::Csv => c.emit("nmode_spectrum.csv", &s.to_csv())?,
                Format::Json => c.emit("nmode_spectrum.json", &pretty(&s.to_json()))?,
            }
        }
        Command::Nmode { action: NmodeAction::Basis(chain) } => {
            c.json_only()?;
            let config = chain_config(c, &chain)?;
            c.emit("nmode_basis.json", &pretty(&report::basis(&config)?))?;
        }
        Command::Oracle { action: OracleAction::Check { omegas, probe_ratio, periods } } => {
            c.json_only()?;
            let config = c.document()?.to_config()?.with_probe_ratio(probe_ratio);
            config.validate()?;
            let w = config.reference_omega();
            let abs: Vec<f64> = omegas.iter().map(|r| r * w).collect();
            let opts = CheckOptions { periods, ..CheckOptions::default() };
            let rows = oracle_check(&config, &abs, &opts)?;
            c.emit("oracle.json", &pretty(&report::oracle(&rows, w)))?;
        }
        Command::Figure { name } => {
            let dir = c.out_dir()?;
            let grid = c.omega_grid.as_ref().map(|_| c.grid()).transpose()?;
            let bundle = figure_preset(name, grid)?;
            bundle.write(dir)?;
            if bundle.failed_points > 0 {
                eprintln!("omit-lab: {name}: {} points failed and were left blank", bundle.failed_points);
                return Ok(EXIT_PARTIAL);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            eprintln!("omit-lab: --jobs must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("omit-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
