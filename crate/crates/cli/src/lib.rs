//! The `kinex` command-line tool: resolves a config, runs one experiment and
//! writes its files plus `manifest.json` into the output directory.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kinex::experiments::{self, ExperimentConfig, ModelKind, OutputFile, Preset};

pub use config::{parse_config, ConfigError, Overrides};
pub use plot::{emit_plot_svg, PlotError, PlotSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kinex", version, about = "Agent-based goods market simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one model and write its wealth distribution, fits and price histograms.
    Simulate(RunArgs),
    /// Sweep the goods:money ratio and write the demand curve.
    Sweep(RunArgs),
    /// Compare the buyer model with the two money-exchange models.
    Compare(RunArgs),
    /// Re-run the fits on a previously written wealth_samples.csv.
    Analyze(AnalyzeArgs),
    /// Render two CSV columns as an SVG figure.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_agents: Option<usize>,
    /// Total goods (clears any ratio).
    #[arg(long)]
    pub goods: Option<u64>,
    /// Total money.
    #[arg(long)]
    pub money: Option<f64>,
    /// Goods:money ratio; goods = ratio x money.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Ratios for `sweep`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Named goods supply: "1:1" or "100:1".
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Saving propensity of the cc model, in [0, 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// A wealth_samples.csv written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Scatter,
    Line,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV file to plot.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, value_enum, default_value = "linear")]
    pub x_scale: ScaleArg,
    #[arg(long, value_enum, default_value = "linear")]
    pub y_scale: ScaleArg,
    #[arg(long, value_enum, default_value = "scatter")]
    pub kind: KindArg,
    #[arg(long)]
    pub title: Option<String>,
    /// Output directory; the figure is named after the input file.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl From<ScaleArg> for plot::Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Linear => plot::Scale::Linear,
            ScaleArg::Log => plot::Scale::Log,
        }
    }
}

impl From<KindArg> for plot::Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Scatter => plot::Kind::Scatter,
            KindArg::Line => plot::Kind::Line,
        }
    }
}

/// A failure, tagged with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<kinex::Error> for Failure {
    fn from(e: kinex::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<PlotError> for Failure {
    fn from(e: PlotError) -> Self {
        Failure::Validation(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    let env_seed = std::env::var("KINEX_SEED").ok();
    match dispatch(cli, env_seed.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("kinex: error: {}", f.message());
            f.exit_code()
        }
    }
}

/// Runs one parsed invocation. `env_seed` is the lowest-precedence seed.
pub fn dispatch(cli: Cli, env_seed: Option<&str>) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Simulate(args) => {
            let config = resolve(&args, env_seed)?;
            eprintln!(
                "kinex: simulate model={} n_agents={} goods={} money={} sweeps={} seed={}",
                config.model.name(),
                config.n_agents,
                config.goods(),
                config.total_money,
                config.n_sweeps,
                config.seed
            );
            let report = experiments::run_wealth_experiment(&config)?;
            let mut files = report.files;
            if config.model == ModelKind::Buyer && !config.snapshot_sweeps.is_empty() {
                files.extend(experiments::run_price_evolution(&config)?.files);
            }
            finish(&config, &files, started)
        }
        Command::Sweep(args) => {
            let config = resolve(&args, env_seed)?;
            eprintln!(
                "kinex: sweep over {} ratios, n_agents={} sweeps={} seed={}",
                config.ratios.len(),
                config.n_agents,
                config.n_sweeps,
                config.seed
            );
            let sweep = experiments::run_demand_sweep(&config)?;
            finish(&config, &sweep.files, started)
        }
        Command::Compare(args) => {
            let config = resolve(&args, env_seed)?;
            eprintln!(
                "kinex: compare buyer/dy/cc, n_agents={} sweeps={} lambda={} seed={}",
                config.n_agents, config.n_sweeps, config.lambda, config.seed
            );
            let cmp = experiments::run_comparison(&config)?;
            finish(&config, &cmp.files, started)
        }
        Command::Analyze(args) => {
            let config = resolve(&args.run, env_seed)?;
            eprintln!("kinex: analyze {}", args.input.display());
            let agents = experiments::read_wealth_samples(&args.input)?;
            let wealth: Vec<f64> = agents.iter().map(|a| a.wealth()).collect();
            let report = experiments::wealth_report(&config, config.model, &agents, &wealth)?;
            finish(&config, &report.files, started)
        }
        Command::Plot(args) => plot_command(&args),
    }
}

fn resolve(args: &RunArgs, env_seed: Option<&str>) -> Result<ExperimentConfig, Failure> {
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let overrides = Overrides {
        seed: args.seed,
        n_agents: args.n_agents,
        goods: args.goods,
        money: args.money,
        ratio: args.ratio,
        ratios: args.ratios.clone(),
        model: args.model,
        lambda: args.lambda,
        sweeps: args.sweeps,
        burn_in: args.burn_in,
        out: args.out.clone(),
        preset: args.preset,
    };
    Ok(parse_config(text.as_deref(), &overrides, env_seed)?)
}

fn finish(
    config: &ExperimentConfig,
    files: &[OutputFile],
    started: Instant,
) -> Result<(), Failure> {
    let dir = experiments::output_dir(config);
    let manifest = experiments::write_outputs(&dir, config, files, started)?;
    eprintln!(
        "kinex: wrote {} files and manifest.json to {} in {:.2}s",
        manifest.files.len(),
        dir.display(),
        manifest.wall_clock_seconds
    );
    Ok(())
}

fn plot_command(args: &PlotArgs) -> Result<(), Failure> {
    let csv = std::fs::read_to_string(&args.input)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.input.display())))?;
    let spec = PlotSpec {
        x: args.x.clone(),
        y: args.y.clone(),
        x_scale: args.x_scale.into(),
        y_scale: args.y_scale.into(),
        kind: args.kind.into(),
        title: args.title.clone(),
    };
    let svg = emit_plot_svg(&csv, &spec)?;
    let path = figure_path(&args.out, &args.input);
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.out.display())))?;
    std::fs::write(&path, svg).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    eprintln!("kinex: wrote {}", path.display());
    Ok(())
}

fn figure_path(out: &Path, input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    out.join(format!("{stem}.svg"))
}
