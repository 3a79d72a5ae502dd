//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-file error, 4 numeric
//! failure during a run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::experiments::{basin_sample, sweep_rates, sweep_scales, DEFAULT_EPS_CONV};
use crate::game::{regret_report, Game, StrategyProfile};
use crate::games::{builtin, parse_shape, random_game, BUILTIN_NAMES};
use crate::io;
use crate::iteration::{run, seeded_random_profile, RunConfig};
use crate::matching::UpdateRule;
use crate::metrics::{metric_trace, MetricKind};
use crate::oracle::support_enumeration;
use crate::projection::{barycentric_path, pca_project};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "geomatch",
    version,
    about = "Approximate Nash equilibria by geometrical regret matching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate from one initial profile and export the trace.
    Run(RunArgs),
    /// Repeat a run for several shared adjustment rates.
    SweepRate(SweepRateArgs),
    /// Repeat a run on scaled copies of the game; regret sums are scaled back.
    SweepScale(SweepScaleArgs),
    /// Run from many seeded random starts and classify convergence.
    Basin(BasinArgs),
    /// Map one player's trajectory from a trace CSV to plot coordinates.
    Project(ProjectArgs),
    /// List the equilibria of a small two-player game.
    Enumerate(EnumerateArgs),
    /// List builtin games, or write one to a game file.
    Games(GamesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Barycentric,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Sum,
    Max,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game file, `builtin:NAME`, or `random:KxM[x...]` (payoffs seeded by --seed).
    #[arg(long)]
    pub game: String,
    /// Seed for random games and random initial profiles.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Adjustment rate, one value for all players or a comma list per player.
    #[arg(long, conflicts_with = "rule")]
    pub rate: Option<String>,
    /// Update rule, e.g. `general:r=0.05,alpha=power:2`; separate per-player rules with `;`.
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    /// Stop once the overall regret sum is at or below this value.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// `uniform`, `random`, or a profile file (JSON array of weight arrays).
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Trace output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Step-length and ratio output file (CSV).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Sum)]
    pub metric: Metric,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepRateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Comma-separated rates; each row uses one rate for all players.
    #[arg(long)]
    pub rates: String,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepScaleArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Comma-separated positive scale factors.
    #[arg(long)]
    pub scales: String,
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BasinArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    /// Overall regret sum below which a run counts as converged.
    #[arg(long, default_value_t = DEFAULT_EPS_CONV)]
    pub eps_conv: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Trace CSV written by `run`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Player whose trajectory is projected, counted from 1.
    #[arg(long, default_value_t = 1)]
    pub player: usize,
    #[arg(long, value_enum, default_value_t = Mode::Barycentric)]
    pub mode: Mode,
    /// Output dimension for PCA (2 or 3).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Path CSV; PCA also writes `<out>.variance` next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GamesArgs {
    /// Builtin to write as a game file.
    #[arg(long, requires = "out")]
    pub write: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: message plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() {
            3
        } else if matches!(e, Error::Numeric(_) | Error::InsufficientData(_)) {
            4
        } else {
            2
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn seed_or_default(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        eprintln!("note: no --seed given, using default seed {DEFAULT_SEED}");
        DEFAULT_SEED
    })
}

/// Resolves `--game`. Random games consume the seed, so it is returned.
fn load_game(args: &GameArgs) -> CliResult<(Game, Option<u64>)> {
    if let Some(name) = args.game.strip_prefix("builtin:") {
        let game = builtin(name).ok_or_else(|| {
            let names: Vec<&str> = BUILTIN_NAMES.iter().map(|(n, _, _)| *n).collect();
            Failure::usage(format!("unknown builtin game `{name}`; known: {}", names.join(", ")))
        })?;
        return Ok((game, args.seed));
    }
    if let Some(shape) = args.game.strip_prefix("random:") {
        let shape = parse_shape(shape).map_err(|e| Failure::usage(e.to_string()))?;
        let seed = seed_or_default(args.seed);
        return Ok((random_game(&shape, seed)?, Some(seed)));
    }
    let path = Path::new(&args.game);
    let game = io::read_game(path).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok((game, args.seed))
}

fn initial_profile(init: &str, game: &Game, seed: Option<u64>) -> CliResult<StrategyProfile> {
    match init {
        "uniform" => Ok(StrategyProfile::uniform(game.shape())),
        "random" => Ok(seeded_random_profile(game.shape(), seed_or_default(seed))),
        file => {
            let path = Path::new(file);
            let profile = io::read_profile(path).map_err(|e| Failure {
                code: 3,
                message: format!("{}: {e}", path.display()),
            })?;
            game.check_profile(&profile).map_err(|e| Failure {
                code: 3,
                message: format!("{}: {e}", path.display()),
            })?;
            Ok(profile)
        }
    }
}

fn parse_list(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("--{flag}: `{v}` is not a number")))
        })
        .collect()
}

fn rules(args: &DynamicsArgs, num_players: usize) -> CliResult<Vec<UpdateRule>> {
    let per_player = |items: Vec<UpdateRule>, flag: &str| -> CliResult<Vec<UpdateRule>> {
        match items.len() {
            1 => Ok(vec![items[0].clone(); num_players]),
            k if k == num_players => Ok(items),
            k => Err(Failure::usage(format!(
                "--{flag} gives {k} values for a {num_players}-player game"
            ))),
        }
    };
    if let Some(spec) = &args.rule {
        let items = spec
            .split(';')
            .map(|s| {
                s.trim()
                    .parse::<UpdateRule>()
                    .map_err(|e| Failure::usage(format!("--rule: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        return per_player(items, "rule");
    }
    let rates = parse_list("rate", args.rate.as_deref().unwrap_or("0.05"))?;
    let items = rates
        .into_iter()
        .map(|r| UpdateRule::standard(r).map_err(|e| Failure::usage(format!("--rate: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    per_player(items, "rate")
}

fn run_config(args: &DynamicsArgs, game: &Game) -> CliResult<RunConfig> {
    let mut config = RunConfig::new(rules(args, game.num_players())?, args.iters);
    config.epsilon = args.epsilon;
    Ok(config)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    if let Some(path) = path {
        io::write_atomic(path, bytes).map_err(|e| Failure {
            code: 3,
            message: format!("{}: {e}", path.display()),
        })?;
    }
    Ok(())
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("output values serialize");
    v.push(b'\n');
    v
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let (game, seed) = load_game(&args.game)?;
    let initial = initial_profile(&args.init, &game, seed)?;
    let config = run_config(&args.dynamics, &game)?.record_every(args.record_every);
    let trace = run(&game, &initial, &config)?;
    let bytes = match args.format {
        Format::Csv => io::trace_csv(&trace)?,
        Format::Json => json_bytes(&trace),
    };
    write_output(args.out.as_deref(), &bytes)?;
    if let Some(path) = &args.metrics_out {
        let kind = match args.metric {
            Metric::Sum => MetricKind::Sum,
            Metric::Max => MetricKind::Max,
        };
        let m = metric_trace(&trace.profiles, kind)?;
        write_output(Some(path), &io::metrics_csv(&m)?)?;
    }
    println!(
        "best_regret_sum={} best_step={} steps={} stopped_early={}",
        trace.best_total(),
        trace.best_step,
        trace.steps_run,
        trace.stopped_early
    );
    Ok(())
}

fn cmd_sweep_rate(args: &SweepRateArgs) -> CliResult<()> {
    let (game, seed) = load_game(&args.game)?;
    let initial = initial_profile(&args.init, &game, seed)?;
    let rates = parse_list("rates", &args.rates)?;
    let result = sweep_rates(&game, &initial, &rates, args.iters)?;
    let bytes = match args.format {
        Format::Csv => io::sweep_csv(&result)?,
        Format::Json => json_bytes(&result),
    };
    write_output(args.out.as_deref(), &bytes)?;
    summarize_sweep("rate", &result);
    Ok(())
}

fn cmd_sweep_scale(args: &SweepScaleArgs) -> CliResult<()> {
    let (game, seed) = load_game(&args.game)?;
    let initial = initial_profile(&args.init, &game, seed)?;
    let scales = parse_list("scales", &args.scales)?;
    let result = sweep_scales(&game, &initial, &scales, args.iters, args.rate)?;
    let bytes = match args.format {
        Format::Csv => io::sweep_csv(&result)?,
        Format::Json => json_bytes(&result),
    };
    write_output(args.out.as_deref(), &bytes)?;
    summarize_sweep("scale", &result);
    Ok(())
}

fn summarize_sweep(name: &str, result: &crate::experiments::SweepResult) {
    let best = result
        .rows
        .iter()
        .min_by(|a, b| a.best_total.total_cmp(&b.best_total))
        .expect("sweeps have at least one row");
    println!(
        "rows={} best_{name}={} best_regret_sum={} best_step={}",
        result.rows.len(),
        best.params[0],
        best.best_total,
        best.best_step
    );
}

fn cmd_basin(args: &BasinArgs) -> CliResult<()> {
    let (game, seed) = load_game(&args.game)?;
    let seed = match seed {
        Some(s) => s,
        None => seed_or_default(None),
    };
    let config = run_config(&args.dynamics, &game)?;
    let report = basin_sample(&game, args.starts, seed, &config, args.eps_conv)?;
    let bytes = match args.format {
        Format::Csv => io::basin_csv(&report)?,
        Format::Json => json_bytes(&report),
    };
    write_output(args.out.as_deref(), &bytes)?;
    let best = report
        .entries
        .iter()
        .map(|e| e.best_total)
        .fold(f64::INFINITY, f64::min);
    println!(
        "starts={} converged={} eps_conv={} best_regret_sum={}",
        report.entries.len(),
        report.num_converged(),
        report.eps_conv,
        best
    );
    Ok(())
}

fn cmd_project(args: &ProjectArgs) -> CliResult<()> {
    let file = std::fs::File::open(&args.input).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", args.input.display()),
    })?;
    let table = io::read_trace_csv(file).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", args.input.display()),
    })?;
    if args.player == 0 {
        return Err(Failure::usage("--player counts from 1"));
    }
    let strategies = table.player_path(args.player - 1)?;
    let g = strategies[0].len();
    let path = match args.mode {
        Mode::Barycentric => {
            if g != 3 {
                return Err(Failure::usage(format!(
                    "barycentric projection requires exactly 3 strategies, player {} has {g}; use --mode pca",
                    args.player
                )));
            }
            barycentric_path(&strategies)?
        }
        Mode::Pca => {
            let points: Vec<Vec<f64>> = strategies.iter().map(|s| s.weights().to_vec()).collect();
            pca_project(&points, args.dim)?
        }
    };
    write_output(args.out.as_deref(), &io::path_csv(&path, &table.steps)?)?;
    if let (Some(out), Some(sidecar)) = (&args.out, io::path_sidecar(&path)) {
        let mut side = out.clone().into_os_string();
        side.push(".variance");
        write_output(Some(Path::new(&side)), sidecar.as_bytes())?;
    }
    match path.captured_variance {
        Some(v) => println!("points={} dim={} captured_variance={v}", path.points.len(), path.dim),
        None => println!("points={} dim={}", path.points.len(), path.dim),
    }
    Ok(())
}

fn fmt_weights(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn cmd_enumerate(args: &EnumerateArgs) -> CliResult<()> {
    let (game, _) = load_game(&args.game)?;
    let set = support_enumeration(&game, args.tolerance)?;
    for (i, eq) in set.equilibria.iter().enumerate() {
        let parts: Vec<String> = eq.strategies().iter().map(|s| fmt_weights(s.weights())).collect();
        let sums: Vec<String> = regret_report(&game, eq)?
            .players
            .iter()
            .map(|p| format!("{:e}", p.regret_sum))
            .collect();
        println!("{i}: {} regret_sums=[{}]", parts.join(" "), sums.join(", "));
    }
    println!("equilibria={} degenerate={}", set.equilibria.len(), set.degenerate);
    write_output(args.out.as_deref(), &json_bytes(&set))?;
    Ok(())
}

fn cmd_games(args: &GamesArgs) -> CliResult<()> {
    if let Some(name) = &args.write {
        let game = builtin(name).ok_or_else(|| Failure::usage(format!("unknown builtin game `{name}`")))?;
        write_output(args.out.as_deref(), io::game_to_json(&game).as_bytes())?;
        return Ok(());
    }
    for (name, aliases, description) in BUILTIN_NAMES {
        if aliases.is_empty() {
            println!("{name}: {description}");
        } else {
            println!("{name} ({}): {description}", aliases.join(", "));
        }
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SweepRate(a) => cmd_sweep_rate(a),
        Command::SweepScale(a) => cmd_sweep_scale(a),
        Command::Basin(a) => cmd_basin(a),
        Command::Project(a) => cmd_project(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Games(a) => cmd_games(a),
    }
}

/// Parses the process arguments, executes, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
