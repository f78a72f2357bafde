use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use permagg_cli::{preset, run_spectrum, run_sweep, run_validate, write_output, CliError, RunConfig};

const PRESET_HELP: &str = "\
Presets:
  dimer-pdi   lambda-system dimer: omega_e0=2.3, omega_g1=0.16, J=-0.06, gamma=0.01,
              gamma_v=1e-5 (eV), N=1, unit FC, grid 1.8..2.9 eV with 4001 points
  lambda      same monomer with N=10, J=-0.006; use --n to change N (J is kept)
  fig3-sweep  displaced oscillator S=0.5, omega_v=0.16, omega_00=2.3, M_g=1, M_e=4,
              gamma=0.02, N=100, N J / omega_v from -3 to 3 in 121 steps, order:0

Exit codes: 0 success, 2 config or I/O error, 3 numerical error, 4 validation failure.";

#[derive(Parser)]
#[command(name = "permagg", version, about = "Absorption spectra of permutation-symmetric molecular aggregates", after_help = PRESET_HELP)]
struct Cli {
    /// Worker threads for the frequency grid (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Absorption spectrum on a frequency grid, one column per method.
    Spectrum(RunArgs),
    /// Spectra along the N J / omega_v axis of the [sweep] section.
    Sweep(RunArgs),
    /// Cross-check the symmetric engine against the brute-force oracle,
    /// dense inversion and the classical-optics identity.
    Validate {
        /// Replace every case tolerance (absolute).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Compiled-in configuration: dimer-pdi, lambda or fig3-sweep.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated methods: exact, cpa, order:<k>.
    #[arg(long)]
    methods: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frequency grid as start,stop,count in eV.
    #[arg(long)]
    grid: Option<String>,
    /// Override the number of ground-state molecules N.
    #[arg(long)]
    n: Option<usize>,
    /// Print the expanded configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::from_file(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => return Err(CliError::Config("give --config or --preset".into())),
        };
        if let Some(m) = &self.methods {
            cfg.set_methods(m);
        }
        if let Some(g) = &self.grid {
            cfg.set_grid(g)?;
        }
        if let Some(n) = self.n {
            cfg.aggregate.n = n;
        }
        if let Some(out) = &self.out {
            cfg.output.path = Some(out.display().to_string());
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Spectrum(args) | Command::Sweep(args) if args.print_config => {
            write_output(None, &args.load()?.to_toml())
        }
        Command::Spectrum(args) => {
            let cfg = args.load()?;
            let csv = run_spectrum(&cfg)?;
            write_output(cfg.output.path.as_ref().map(PathBuf::from).as_deref(), &csv)
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let csv = run_sweep(&cfg)?;
            write_output(cfg.output.path.as_ref().map(PathBuf::from).as_deref(), &csv)
        }
        Command::Validate { tolerance } => {
            if tolerance.is_some_and(|t| t.is_nan() || t < 0.0) {
                return Err(CliError::Config("--tolerance must be non-negative".into()));
            }
            let report = run_validate(tolerance)?;
            write_output(None, &report.render())?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation("one or more cases exceeded tolerance".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("permagg: {e}");
            ExitCode::from(e.code())
        }
    }
}
