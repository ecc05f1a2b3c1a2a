use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use liss::bench::{
    checkpoint_schedule, compare_modes, emit_report, map_inputs, read_train, read_transfer,
    run_beta, run_efficiency, run_train, write_train, write_transfer, EfficiencyResults,
    ExperimentConfig, Preset, Report, ReportInput, SpaceKind,
};
use liss::config::KeyValues;
use liss::dsl::parse;
use liss::library::Library;
use liss::selfplay::{transfer, TransferMode};

#[derive(Parser)]
#[command(name = "liss-lab", version, about = "Train, transfer and measure programmatic RTS policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base settings.
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// Key-value file applied over the preset and all flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Self-play on one map; writes policy, corpus, pool, library and trace.
    Train {
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Self-play on a test map, optionally reusing a training directory.
    Transfer {
        #[arg(long)]
        mode: TransferMode,
        /// Training directory (`<out>/<seed>` of `train`).
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "transfer")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fraction of neighbors that behave like their program.
    Beta {
        #[arg(long)]
        space: Option<SpaceKind>,
        /// Training directory whose library replaces per-seed training.
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "beta")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Trains and transfers every mode for every seed, then compares them.
    Efficiency {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "efficiency")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compares the transfer runs under a directory written by `transfer`.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures before any experiment work starts.
#[derive(Debug)]
struct ConfigFailure(anyhow::Error);

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn config_err<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| ConfigFailure(e).into())
}

fn load_config(common: &Common, flags: &[(&str, Option<String>)]) -> Result<ExperimentConfig> {
    config_err((|| {
        let file = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Some(KeyValues::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
            }
            None => None,
        };
        let preset = match file.as_ref().and_then(|kv| kv.iter().find(|(k, _)| *k == "preset")) {
            Some((_, v)) => v.parse::<Preset>().map_err(|e| anyhow!(e))?,
            None => common.preset,
        };
        let mut config = ExperimentConfig::preset(preset);
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if let Some(kv) = &file {
            config.apply(kv)?;
        }
        Ok(config)
    })())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { map, seed, out, common } => {
            let config = load_config(&common, &[("train_map", map), ("seed", seed.map(|s| s.to_string()))])?;
            config_err(config.train_config(config.seed).map_err(Into::into))?;
            let output = run_train(&config, config.seed)?;
            let dir = out.join(config.seed.to_string());
            write_train(&dir, &output, &config.to_text())?;
            println!(
                "train seed {}: {} games, corpus {}, pool {}, library {} -> {}",
                config.seed,
                output.artifacts.games,
                output.artifacts.corpus.len(),
                output.pool.len(),
                output.library.len(),
                dir.display()
            );
        }
        Command::Transfer { mode, train, map, seed, out, common } => {
            let config = load_config(&common, &[("test_maps", map), ("seed", seed.map(|s| s.to_string()))])?;
            let tc = config_err(config.transfer_config(mode, config.seed).map_err(Into::into))?;
            let trained = match (mode, train) {
                (TransferMode::Syntax, _) => None,
                (_, Some(dir)) => Some(config_err(read_train(&dir).map_err(Into::into))?),
                (_, None) => return Err(ConfigFailure(anyhow!("--train is required for mode {mode}")).into()),
            };
            let outcome = transfer(trained.as_ref(), &tc)?;
            let dir = out.join(mode.name()).join(config.seed.to_string());
            write_transfer(&dir, &outcome, &config.to_text())?;
            let last = outcome.artifacts.iterations.last().map_or(0.0, |i| i.best_eval);
            print!("transfer {mode} seed {}: {} games, last best_eval {last:.3}", config.seed, outcome.artifacts.games);
            if let Some((before, after)) = outcome.library_growth {
                print!(", library {before} -> {after}");
            }
            println!(" -> {}", dir.display());
        }
        Command::Beta { space, train, seed, out, common } => {
            let config = load_config(
                &common,
                &[("space", space.map(|s| s.name().to_string())), ("seed", seed.map(|s| s.to_string()))],
            )?;
            config_err(config.beta_config(config.seed).map_err(Into::into))?;
            let library = config_err(beta_library(&config, train.as_deref()))?;
            let (beta, inputs) = run_beta(&config, config.space, library.as_ref())?;
            let report = Report {
                config,
                beta,
                efficiency: None,
                inputs,
            };
            finish(&report, &out)?;
        }
        Command::Efficiency { seed, out, common } => {
            let config = load_config(&common, &[("seed", seed.map(|s| s.to_string()))])?;
            config_err(config.efficiency_config().map(|_| ()).map_err(Into::into))?;
            let (results, inputs) = run_efficiency(&config)?;
            let report = Report {
                config,
                beta: Vec::new(),
                efficiency: Some(results),
                inputs,
            };
            finish(&report, &out)?;
        }
        Command::Report { input, out } => {
            let report = config_err(collect_transfers(&input))?;
            let report = report.finish()?;
            finish(&report, out.as_deref().unwrap_or(&input))?;
        }
    }
    Ok(())
}

fn finish(report: &Report, out: &Path) -> Result<()> {
    let files = emit_report(report, out)?;
    print!("{}", fs::read_to_string(files.last().expect("summary written"))?);
    Ok(())
}

/// Library for the beta of the library space: the configured file, the
/// training directory's, or none (each seed trains its own).
fn beta_library(config: &ExperimentConfig, train: Option<&Path>) -> Result<Option<Library>> {
    if config.space != SpaceKind::Liss {
        return Ok(None);
    }
    if let Some(path) = &config.library_path {
        let pool_path = path.with_file_name("pool.states");
        let pool = liss::bench::artifacts::read_pool(&pool_path)?;
        return Ok(Some(liss::bench::artifacts::read_library(path, pool)?));
    }
    Ok(match train {
        Some(dir) => Some(read_train(dir)?.library),
        None => None,
    })
}

/// Transfer runs found under `<in>/<mode>/<seed>`, not yet compared.
struct PendingReport {
    config: ExperimentConfig,
    runs: BTreeMap<TransferMode, Vec<liss::selfplay::TrainingArtifacts>>,
    seeds: Vec<u64>,
    inputs: Vec<ReportInput>,
}

fn seeds_under(dir: &Path) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let entry = entry?;
        if let Some(seed) = entry.file_name().to_str().and_then(|s| s.parse().ok()) {
            if entry.path().join("iterations.csv").exists() {
                seeds.push(seed);
            }
        }
    }
    seeds.sort_unstable();
    Ok(seeds)
}

fn collect_transfers(input: &Path) -> Result<PendingReport> {
    let modes: Vec<TransferMode> = TransferMode::ALL
        .into_iter()
        .filter(|m| input.join(m.name()).is_dir())
        .collect();
    if modes.len() < 2 {
        bail!("{} holds fewer than two transfer modes", input.display());
    }
    let mut seeds = seeds_under(&input.join(modes[0].name()))?;
    for m in &modes[1..] {
        let other = seeds_under(&input.join(m.name()))?;
        seeds.retain(|s| other.contains(s));
    }
    let Some(&first) = seeds.first() else {
        bail!("no seed was run in every mode under {}", input.display());
    };
    let config_path = input.join(modes[0].name()).join(first.to_string()).join("config.txt");
    let config_text = fs::read_to_string(&config_path).with_context(|| format!("reading {}", config_path.display()))?;
    let config = ExperimentConfig::from_text(&config_text).with_context(|| format!("parsing {}", config_path.display()))?;
    let initial = parse("empty").expect("empty program");
    let mut runs = BTreeMap::new();
    let mut inputs = map_inputs(&config.test_maps)?;
    inputs.push(ReportInput::new("config", config_text.as_bytes()));
    for &mode in &modes {
        let mut per_seed = Vec::new();
        for seed in &seeds {
            let dir = input.join(mode.name()).join(seed.to_string());
            let policy = fs::read(dir.join("policy.mrl"))?;
            inputs.push(ReportInput::new(format!("policy {mode} seed {seed}"), &policy));
            per_seed.push(read_transfer(&dir, &initial)?);
        }
        runs.insert(mode, per_seed);
    }
    Ok(PendingReport {
        config,
        runs,
        seeds,
        inputs,
    })
}

impl PendingReport {
    fn finish(self) -> Result<Report> {
        let checkpoints = checkpoint_schedule(self.config.game_budget, self.config.test_iterations);
        let setups = liss::bench::setups(&self.config.test_maps, "transfer")?;
        let initial = parse("empty").expect("empty program");
        let rows = compare_modes(&self.runs, &checkpoints, &setups, &initial)?;
        Ok(Report {
            config: self.config,
            beta: Vec::new(),
            efficiency: Some(EfficiencyResults {
                seeds: self.seeds,
                checkpoints,
                rows,
                runs: Vec::new(),
            }),
            inputs: self.inputs,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ConfigFailure>() => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
