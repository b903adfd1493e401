//! Command-line entry point for the Little-Zoo curriculum laboratory.
//!
//! Exit codes: 0 success, 2 config error, 3 validation error, 4 runtime
//! invariant violation. Errors print one machine-readable JSON line to
//! stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use littlezoo::estimators::EstimatorKind;
use littlezoo::goalspace::{generate, GoalSpace};
use littlezoo::learners::LearnerKind;
use littlezoo::rngs::{stream_rng, Stream};

use zoolab::config::{ConfigFile, RunConfig};
use zoolab::harness::adaptation::{
    adaptation_test, write_adaptation_csv, write_adaptation_sr_csv, AdaptationConfig,
};
use zoolab::harness::benchmark::{estimator_benchmark, write_benchmark_csv, BenchmarkConfig};
use zoolab::harness::generalization::{generalization_report, read_evals_csv};
use zoolab::harness::run_training;
use zoolab::metrics::RunPaths;
use zoolab::plotdata::{emit_plot_data, Metric};
use zoolab::{space_file, LabError};

#[derive(Parser)]
#[command(
    name = "zoolab",
    about = "Little-Zoo automatic-curriculum laboratory",
    version,
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a train/test goal space and write it as JSON lines.
    GenerateGoals(GenerateGoalsArgs),
    /// Validate a goal-space file: labels, invariants and seeded
    /// feasibility spot checks against the search oracle.
    Validate(ValidateArgs),
    /// Run one curriculum training experiment.
    Run(RunArgs),
    /// Benchmark competence estimators against a simulated learner.
    BenchmarkEstimators(BenchmarkArgs),
    /// Aggregate held-out prediction error from a finished run.
    GeneralizationReport(GeneralizationArgs),
    /// Goal-space-swap adaptation tests with sample-efficiency scores.
    AdaptationTest(AdaptationArgs),
    /// Export goal latents and predicted competence from a learned
    ///-regressor checkpoint.
    ExportLatents(ExportLatentsArgs),
    /// Merge evaluation curves from several runs into tidy plot data.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct GenerateGoalsArgs {
    /// Train-split size.
    #[arg(long, default_value_t = 25_000)]
    total: usize,
    /// Test-split size.
    #[arg(long, default_value_t = 5_000)]
    test_total: usize,
    /// Generation seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Optional config file providing a [generation] section.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Goal-space file to check.
    space: PathBuf,
    /// Number of goals to re-check against the search oracle.
    #[arg(long, default_value_t = 200)]
    bfs_sample: usize,
    /// Seed for the spot-check sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Goal-space file. Without it the space is generated from the
    /// config's [generation] section.
    #[arg(long)]
    goal_space: Option<PathBuf>,
    /// Competence/ALP estimation strategy.
    #[arg(long, value_parser = parse_estimator)]
    estimator: Option<EstimatorKind>,
    /// Learner practicing the goals.
    #[arg(long, value_parser = parse_learner)]
    learner: Option<LearnerKind>,
    /// Training episodes.
    #[arg(long)]
    episodes: Option<u64>,
    /// Master seed (env/selector/learner/estimator streams derive from it).
    #[arg(long)]
    seed: Option<u64>,
    /// Fan out over an inclusive seed range like `0..7`, one child
    /// process per seed, writing to `<out>/seed-<N>`.
    #[arg(long)]
    seeds: Option<String>,
    /// Run directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also evaluate the held-out split every sweep (needed for
    /// generalization reports).
    #[arg(long)]
    record_test_evals: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Goal-space file; generated from config when absent.
    #[arg(long)]
    goal_space: Option<PathBuf>,
    /// Episodes of the driving stream.
    #[arg(long, default_value_t = 50_000)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimators to score (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    estimators: Option<Vec<EstimatorKind>>,
    /// Which estimator's ALP drives goal selection.
    #[arg(long, value_parser = parse_estimator, default_value = "uniform")]
    driver: EstimatorKind,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GeneralizationArgs {
    /// Run directory holding evals_test.csv.
    #[arg(long)]
    run: PathBuf,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdaptationArgs {
    /// Config file (TOML) for the base run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Goal-space file; generated from config when absent.
    #[arg(long)]
    goal_space: Option<PathBuf>,
    /// Estimator of the base run.
    #[arg(long, value_parser = parse_estimator, default_value = "magellan")]
    estimator: EstimatorKind,
    /// Learner for base run and continuations.
    #[arg(long, value_parser = parse_learner, default_value = "qlinear")]
    learner: LearnerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Swap points (comma separated), multiples of the sweep cadence.
    #[arg(long, value_delimiter = ',', default_values_t = vec![50_000u64, 100_000, 150_000])]
    swap_points: Vec<u64>,
    /// Continuation length after each swap.
    #[arg(long, default_value_t = 50_000)]
    continuation: u64,
    /// Methods to hand off to (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    methods: Option<Vec<EstimatorKind>>,
    /// Output directory for adaptation.csv and adaptation_sr.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportLatentsArgs {
    /// Estimator checkpoint written by a run (learned regressor only).
    #[arg(long)]
    checkpoint: PathBuf,
    /// Goal-space file the checkpoint was trained on.
    #[arg(long)]
    goal_space: PathBuf,
    /// Optional config file with the [magellan] section used in the run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Run directories to merge.
    #[arg(long, required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    /// Metric column: sr | estimator_competence.
    #[arg(long, default_value = "sr")]
    metric: String,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    EstimatorKind::from_str(s).ok_or_else(|| {
        format!(
            "unknown estimator {s:?} (choose from mb|online|eval|ek-online|ek-eval|magellan|uniform)"
        )
    })
}

fn parse_learner(s: &str) -> Result<LearnerKind, String> {
    LearnerKind::from_str(s)
        .ok_or_else(|| format!("unknown learner {s:?} (choose from expert|simulated|qlinear)"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("{}", error.machine_line());
            ExitCode::from(error.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<String, LabError> {
    match command {
        Command::GenerateGoals(args) => generate_goals(args),
        Command::Validate(args) => validate(args),
        Command::Run(args) => run(args),
        Command::BenchmarkEstimators(args) => benchmark(args),
        Command::GeneralizationReport(args) => generalization(args),
        Command::AdaptationTest(args) => adaptation(args),
        Command::ExportLatents(args) => export_latents_cmd(args),
        Command::PlotData(args) => plot_data(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, LabError> {
    match path {
        Some(path) => ConfigFile::from_path(path),
        None => Ok(ConfigFile::default()),
    }
}

fn generate_goals(args: GenerateGoalsArgs) -> Result<String, LabError> {
    let file = load_config(&args.config)?;
    let mut config = file.generation_config();
    config.total_goals = args.total;
    config.test_goals = args.test_total;
    config.rng_seed = args.seed;
    let vocab = littlezoo::env::Vocabulary::default_zoo();
    let space = generate(
        &config,
        &vocab,
        &mut stream_rng(config.rng_seed, Stream::GenerateTrain),
        &mut stream_rng(config.rng_seed, Stream::GenerateTest),
    )?;
    space_file::save(&space, &args.out)?;
    let counts: Vec<String> = littlezoo::goalspace::CategoryLabel::ALL
        .iter()
        .map(|category| {
            format!(
                "{}={}",
                category.as_str(),
                space
                    .ids_by_category(littlezoo::goalspace::Split::Train, *category)
                    .len()
            )
        })
        .collect();
    Ok(format!(
        "wrote {} train + {} test goals to {} ({})",
        space.train_ids().len(),
        space.test_ids().len(),
        args.out.display(),
        counts.join(", ")
    ))
}

fn validate(args: ValidateArgs) -> Result<String, LabError> {
    let space = space_file::load(&args.space)?;
    space_file::spot_check_bfs(&space, args.bfs_sample, args.seed)?;
    Ok(format!(
        "{} is valid: {} goals, {} spot checks against the search oracle passed",
        args.space.display(),
        space.goals().len(),
        args.bfs_sample.min(space.goals().len()),
    ))
}

fn resolve_space(
    goal_space: &Option<PathBuf>,
    file: &ConfigFile,
) -> Result<GoalSpace, LabError> {
    match goal_space
        .clone()
        .or_else(|| file.run.as_ref().and_then(|run| run.goal_space.clone()))
    {
        Some(path) => space_file::load(&path),
        None => {
            let config = file.generation_config();
            let vocab = littlezoo::env::Vocabulary::default_zoo();
            Ok(generate(
                &config,
                &vocab,
                &mut stream_rng(config.rng_seed, Stream::GenerateTrain),
                &mut stream_rng(config.rng_seed, Stream::GenerateTest),
            )?)
        }
    }
}

fn run(args: RunArgs) -> Result<String, LabError> {
    if let Some(range) = &args.seeds {
        return fan_out_seeds(&args, range);
    }
    let file = load_config(&args.config)?;
    let run_section = file.run.clone().unwrap_or_default();
    let estimator = args
        .estimator
        .or_else(|| {
            run_section
                .estimator
                .as_deref()
                .and_then(EstimatorKind::from_str)
        })
        .ok_or_else(|| LabError::Config("no estimator given (flag or config)".into()))?;
    let learner = args
        .learner
        .or_else(|| {
            run_section
                .learner
                .as_deref()
                .and_then(LearnerKind::from_str)
        })
        .ok_or_else(|| LabError::Config("no learner given (flag or config)".into()))?;
    let seed = args.seed.or(run_section.seed).unwrap_or(0);

    let mut config = RunConfig::from_file(&file, estimator, learner, seed);
    if let Some(episodes) = args.episodes {
        config.episodes = episodes;
    }
    if args.record_test_evals {
        config.record_test_evals = true;
    }
    if let Some(out) = &args.out {
        config.out_dir = Some(out.clone());
    }
    let space = resolve_space(&args.goal_space, &file)?;

    // Echo the effective config so the run reproduces from its own
    // directory.
    if let Some(out) = &config.out_dir {
        std::fs::create_dir_all(out)?;
        let mut effective = file.clone();
        let mut section = effective.run.unwrap_or_default();
        section.estimator = Some(estimator.as_str().to_string());
        section.learner = Some(learner.as_str().to_string());
        section.episodes = Some(config.episodes);
        section.eval_cadence = Some(config.eval_cadence);
        section.eval_goals_per_category = Some(config.eval_goals_per_category);
        section.seed = Some(seed);
        section.record_test_evals = Some(config.record_test_evals);
        section.shadow_ek = Some(config.shadow_ek);
        section.goal_space = args
            .goal_space
            .clone()
            .or(section.goal_space)
            .map(absolute_path);
        section.out_dir = None;
        effective.run = Some(section);
        std::fs::write(RunPaths::new(out).config_toml(), effective.to_toml()?)?;
    }

    let output = run_training(&config, &space)?;
    let mastered: Vec<String> = output
        .mastery
        .iter()
        .filter_map(|(category, episode)| episode.map(|e| format!("{category}@{e}")))
        .collect();
    Ok(format!(
        "run complete: {} training episodes, {} sr-eval episodes, {} estimator-eval episodes; mastered: {}",
        output.counters.training,
        output.counters.sr_eval,
        output.counters.estimator_eval,
        if mastered.is_empty() {
            "none".to_string()
        } else {
            mastered.join(", ")
        },
    ))
}

fn absolute_path(path: PathBuf) -> PathBuf {
    std::path::absolute(&path).unwrap_or(path)
}

/// Spawns one child process per seed in an inclusive `a..b` range.
fn fan_out_seeds(args: &RunArgs, range: &str) -> Result<String, LabError> {
    let (start, end) = range
        .split_once("..")
        .and_then(|(a, b)| Some((a.parse::<u64>().ok()?, b.parse::<u64>().ok()?)))
        .ok_or_else(|| LabError::Config(format!("bad --seeds range {range:?} (want a..b)")))?;
    if end < start {
        return Err(LabError::Config(format!("empty --seeds range {range:?}")));
    }
    let out = args
        .out
        .clone()
        .ok_or_else(|| LabError::Config("--seeds requires --out".into()))?;
    let exe = std::env::current_exe()?;
    let mut children = Vec::new();
    for seed in start..=end {
        let mut cmd = std::process::Command::new(&exe);
        cmd.arg("run");
        if let Some(config) = &args.config {
            cmd.arg("--config").arg(config);
        }
        if let Some(space) = &args.goal_space {
            cmd.arg("--goal-space").arg(space);
        }
        if let Some(estimator) = args.estimator {
            cmd.arg("--estimator").arg(estimator.as_str());
        }
        if let Some(learner) = args.learner {
            cmd.arg("--learner").arg(learner.as_str());
        }
        if let Some(episodes) = args.episodes {
            cmd.arg("--episodes").arg(episodes.to_string());
        }
        if args.record_test_evals {
            cmd.arg("--record-test-evals");
        }
        cmd.arg("--seed").arg(seed.to_string());
        cmd.arg("--out").arg(out.join(format!("seed-{seed}")));
        children.push((seed, cmd.spawn()?));
    }
    let mut failures = Vec::new();
    for (seed, mut child) in children {
        let status = child.wait()?;
        if !status.success() {
            failures.push(format!("seed {seed} exited with {status}"));
        }
    }
    if failures.is_empty() {
        Ok(format!("seeds {start}..{end} complete under {}", out.display()))
    } else {
        Err(LabError::Invariant(failures.join("; ")))
    }
}

fn benchmark(args: BenchmarkArgs) -> Result<String, LabError> {
    let file = load_config(&args.config)?;
    let space = resolve_space(&args.goal_space, &file)?;
    let mut config = BenchmarkConfig::new(args.seed);
    config.episodes = args.episodes;
    config.driver = args.driver;
    config.params = file.estimator_params();
    config.simulated = file.simulated_learner();
    if let Some(estimators) = args.estimators {
        config.estimators = estimators;
    }
    if !config.estimators.contains(&config.driver) {
        config.estimators.push(config.driver);
    }
    let records = estimator_benchmark(&config, &space)?;
    write_benchmark_csv(&records, &args.out)?;
    Ok(format!(
        "benchmarked {} estimators over {} episodes into {}",
        config.estimators.len(),
        config.episodes,
        args.out.display(),
    ))
}

fn generalization(args: GeneralizationArgs) -> Result<String, LabError> {
    let paths = RunPaths::new(&args.run);
    let rows = read_evals_csv(&paths.test_evals_csv())?;
    let report = generalization_report(&rows);
    let mut document = serde_json::Map::new();
    for category in littlezoo::goalspace::CategoryLabel::ALL {
        if let Some(error) = report.per_category[category.index()] {
            document.insert(category.as_str().to_string(), serde_json::json!(error));
        }
    }
    document.insert(
        "macro_average".to_string(),
        serde_json::json!(report.macro_average),
    );
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&document).map_err(|e| LabError::Config(e.to_string()))?
            + "\n",
    )?;
    Ok(format!(
        "held-out error report written to {} (macro {:.4})",
        args.out.display(),
        report.macro_average,
    ))
}

fn adaptation(args: AdaptationArgs) -> Result<String, LabError> {
    let file = load_config(&args.config)?;
    let space = resolve_space(&args.goal_space, &file)?;
    let base = RunConfig::from_file(&file, args.estimator, args.learner, args.seed);
    let mut config = AdaptationConfig::new(base);
    config.swap_points = args.swap_points.clone();
    config.continuation_episodes = args.continuation;
    if let Some(methods) = args.methods {
        config.methods = methods;
    }
    let results = adaptation_test(&config, &space)?;
    std::fs::create_dir_all(&args.out)?;
    write_adaptation_csv(&results, &args.out.join("adaptation.csv"))?;
    write_adaptation_sr_csv(&results, &args.out.join("adaptation_sr.csv"))?;
    Ok(format!(
        "{} adaptation continuations written to {}",
        results.len(),
        args.out.display(),
    ))
}

fn export_latents_cmd(args: ExportLatentsArgs) -> Result<String, LabError> {
    let file = load_config(&args.config)?;
    let space = space_file::load(&args.goal_space)?;
    let estimator = zoolab::snapshot_file::load_estimator(
        &args.checkpoint,
        &file.estimator_params(),
        &space,
        stream_rng(0, Stream::Estimator),
    )?;
    let magellan = estimator.as_magellan().ok_or_else(|| {
        LabError::Validation("checkpoint does not hold a learned-regressor estimator".into())
    })?;
    zoolab::metrics::export_latents(magellan, &space, &args.out)?;
    Ok(format!(
        "latents for {} goals written to {}",
        space.goals().len(),
        args.out.display(),
    ))
}

fn plot_data(args: PlotDataArgs) -> Result<String, LabError> {
    let metric = Metric::from_str(&args.metric)
        .ok_or_else(|| LabError::Config(format!("unknown metric {:?}", args.metric)))?;
    emit_plot_data(&args.runs, metric, &args.out)?;
    Ok(format!(
        "plot data ({}) for {} runs written to {}",
        metric.as_str(),
        args.runs.len(),
        args.out.display(),
    ))
}
