use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nbse::oracles::{make_synthetic, SyntheticKind, SyntheticSpec};
use nbse_cli::error::{CliError, CliResult};
use nbse_cli::io::{write_labels, write_matrix, MatrixFormat};
use nbse_cli::{run_stages, RunConfig, RunReport, Stage};

#[derive(Parser)]
#[command(name = "nbse", version, about = "Noise-based spectral embedding and feature ablation")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long)]
    input: Option<PathBuf>,

    #[arg(long)]
    labels: Option<PathBuf>,

    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the input matrix and report its shape.
    IngestCheck(Common),
    /// Build the object graph and write its edge list.
    Graph(Common),
    /// Locate β_N on the object graph.
    Beta(Common),
    /// Spectral fingerprint of every feature.
    Fingerprint(Common),
    /// φ_min on the feature axis.
    EmbedFeatures(Common),
    /// Balanced-bin feature selection per proportion.
    Select(Common),
    /// Retention curves for the configured selectors.
    Eval(Common),
    /// Sensitivity of β_N to multiplicative data noise.
    NoiseSweep(Common),
    /// Every stage.
    Run(Common),
    /// Print a human summary of an existing report.
    Report {
        /// report.txt, or a directory containing one.
        path: PathBuf,
    },
    /// Write a synthetic dataset (matrix, labels, planted groups).
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// `blobs` or `redundant`.
    #[arg(long, default_value = "redundant")]
    kind: String,
    #[arg(long, default_value_t = 200)]
    m: usize,
    /// Feature count for blobs.
    #[arg(long, default_value_t = 60)]
    d: usize,
    #[arg(long, default_value_t = 12.0)]
    separation: f64,
    #[arg(long, default_value_t = 10)]
    groups: usize,
    #[arg(long, default_value_t = 20)]
    distractors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value = "csv")]
    format: MatrixFormat,
}

fn load_config(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cwd = PathBuf::from(".");
    if let Some(p) = &c.input {
        cfg.set("input", &p.to_string_lossy(), &cwd)?;
    }
    if let Some(p) = &c.labels {
        cfg.set("labels", &p.to_string_lossy(), &cwd)?;
    }
    if let Some(p) = &c.output_dir {
        cfg.set("output_dir", &p.to_string_lossy(), &cwd)?;
    }
    cfg.apply_overrides(&c.set)?;
    Ok(cfg)
}

fn run_to(c: &Common, target: Stage) -> CliResult<()> {
    let mut cfg = load_config(c)?;
    let stages = if target == Stage::NoiseSweep {
        cfg.noise_forced = true;
        target.prefix()
    } else if target == Stage::Evaluation && cfg.labels.is_none() {
        return Err(CliError::Config("eval needs labels".into()));
    } else {
        target.prefix()
    };
    let out = run_stages(&cfg, &stages)?;
    print!("{}", out.report.summary());
    Ok(())
}

fn synth(a: &SynthArgs) -> CliResult<()> {
    let spec = match a.kind.as_str() {
        "blobs" => SyntheticSpec::sbm_blobs(a.m, a.d, a.separation, a.seed),
        "redundant" => SyntheticSpec::redundant_groups(a.m, a.groups, a.distractors, a.seed),
        other => return Err(CliError::Config(format!("unknown synthetic kind '{other}'"))),
    };
    let data = make_synthetic(&spec).map_err(CliError::stage("synth"))?;
    let dir = &a.output_dir;
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let ext = match a.format {
        MatrixFormat::Csv => "csv",
        MatrixFormat::Bin => "bin",
    };
    let stage = CliError::stage("synth");
    write_matrix(&data.data.x, &dir.join(format!("data.{ext}")), a.format).map_err(stage)?;
    write_labels(&data.data.y, &dir.join("labels.txt")).map_err(CliError::stage("synth"))?;
    if matches!(spec.kind, SyntheticKind::RedundantGroups { .. }) {
        let path = dir.join("planted.txt");
        let file = std::fs::File::create(&path).map_err(CliError::io(&path))?;
        data.write_planted(file).map_err(CliError::stage("synth"))?;
    }
    println!("wrote {} x {} matrix to {}", data.data.x.rows(), data.data.x.cols(), dir.display());
    Ok(())
}

fn show_report(path: &std::path::Path) -> CliResult<()> {
    let file = if path.is_dir() { path.join("report.txt") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(CliError::io(&file))?;
    print!("{}", RunReport::parse(&text)?.summary());
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::IngestCheck(c) => run_to(c, Stage::Ingest),
        Command::Graph(c) => run_to(c, Stage::Graph),
        Command::Beta(c) => run_to(c, Stage::Beta),
        Command::Fingerprint(c) => run_to(c, Stage::Fingerprint),
        Command::EmbedFeatures(c) => run_to(c, Stage::FeatureEmbedding),
        Command::Select(c) => run_to(c, Stage::Selection),
        Command::Eval(c) => run_to(c, Stage::Evaluation),
        Command::NoiseSweep(c) => run_to(c, Stage::NoiseSweep),
        Command::Run(c) => {
            let cfg = load_config(c)?;
            let out = nbse_cli::run_pipeline(&cfg)?;
            print!("{}", out.report.summary());
            Ok(())
        }
        Command::Report { path } => show_report(path),
        Command::Synth(a) => synth(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("nbse: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nbse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
