use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use predgame::arith::ArithmeticMode;
use predgame::cli::{exit_code_for, run_command, Command, RunConfig, DEFAULT_PNE_BUDGET};
use predgame::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "predgame",
    version,
    about = "Competing prediction algorithms as a game"
)]
struct Cli {
    /// JSON file supplying defaults for any option not given on the line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed recorded in and driving every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Arithmetic mode: floating (f64) or rational (exact).
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<ArithmeticMode>,
    /// Directory for artifact files; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections; never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: CliCommand,
}

fn parse_mode(s: &str) -> std::result::Result<ArithmeticMode, String> {
    match s {
        "floating" => Ok(ArithmeticMode::Floating),
        "rational" => Ok(ArithmeticMode::Rational),
        other => Err(format!("unknown mode {other:?} (floating|rational)")),
    }
}

#[derive(Subcommand)]
enum CliCommand {
    /// Print the minimal sample size for the accuracy/confidence pair.
    SampleSize(SampleSizeArgs),
    /// Print the uniform-convergence tail bound at a sample size.
    Ucb(UcbArgs),
    /// Run better-response dynamics on a game file.
    Dynamics(DynamicsArgs),
    /// Enumerate all exact pure equilibria of a finite game.
    PneEnumerate(PneArgs),
    /// Check a profile for approximate-equilibrium violations.
    Verify(VerifyArgs),
    /// Best linear response to an opponent profile on a sample.
    Blr(BlrArgs),
    /// Sample-then-converge: draw a sample and run dynamics on it.
    Learn(LearnArgs),
    /// Materialize a packaged scenario (example41, claim-a6).
    Scenario(ScenarioArgs),
    /// Count distinct satisfaction patterns of a class on a sample.
    RestrictionCount(RestrictionArgs),
}

#[derive(Args)]
struct SampleSizeArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Summed declared pseudo-dimension.
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    players: Option<u64>,
}

#[derive(Args)]
struct UcbArgs {
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    players: Option<u64>,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Game descriptor (JSON).
    #[arg(long)]
    game: Option<PathBuf>,
    /// Starting profile (JSON); defaults to the game's default profile.
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Improvement threshold, decimal or fraction text.
    #[arg(long)]
    epsilon: Option<String>,
    /// round-robin or random.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    max_iterations: Option<u64>,
}

#[derive(Args)]
struct PneArgs {
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args)]
struct BlrArgs {
    /// Sample CSV.
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Opponent profile (JSON); omit for an empty market.
    #[arg(long)]
    opponents: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Distribution descriptor (JSON).
    #[arg(long)]
    dist: Option<PathBuf>,
    /// JSON array of class descriptors with declared pdim values.
    #[arg(long)]
    classes: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Cap on the drawn sample size (desk-scale escape hatch).
    #[arg(long)]
    m_cap: Option<u64>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// example41 or claim-a6.
    #[arg(long)]
    name: Option<String>,
    /// Sample size (example41) or coins per trial (claim-a6).
    #[arg(long)]
    m: Option<u64>,
    /// Trials for claim-a6.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct RestrictionArgs {
    /// Class descriptor (JSON).
    #[arg(long)]
    class: Option<PathBuf>,
    /// Sample CSV.
    #[arg(long)]
    sample: Option<PathBuf>,
}

/// Defaults loaded from --config; flat key lookup per command.
struct FileDefaults {
    params: Value,
    seed: Option<u64>,
    mode: Option<ArithmeticMode>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

impl FileDefaults {
    fn empty() -> Self {
        FileDefaults {
            params: Value::Null,
            seed: None,
            mode: None,
            out: None,
            threads: None,
        }
    }

    fn load(path: &PathBuf, command_name: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let map = value
            .as_object()
            .ok_or_else(|| Error::Config("config file must be a JSON object".into()))?;
        if let Some(Value::String(name)) = map.get("command") {
            if name != command_name {
                return Err(Error::Config(format!(
                    "config file is for command {name:?}, not {command_name:?}"
                )));
            }
        }
        let mode = match map.get("mode").and_then(Value::as_str) {
            Some("floating") => Some(ArithmeticMode::Floating),
            Some("rational") => Some(ArithmeticMode::Rational),
            Some(other) => return Err(Error::Config(format!("unknown mode {other:?} in config"))),
            None => None,
        };
        Ok(FileDefaults {
            params: map.get("params").cloned().unwrap_or(Value::Null),
            seed: map.get("seed").and_then(Value::as_u64),
            mode,
            out: map.get("out").and_then(Value::as_str).map(PathBuf::from),
            threads: map
                .get("threads")
                .and_then(Value::as_u64)
                .map(|v| v as usize),
        })
    }

    fn str_param(&self, key: &str) -> Option<String> {
        self.params
            .get(key)
            .and_then(Value::as_str)
            .map(str::to_owned)
    }

    fn path_param(&self, key: &str) -> Option<PathBuf> {
        self.str_param(key).map(PathBuf::from)
    }

    fn u64_param(&self, key: &str) -> Option<u64> {
        self.params.get(key).and_then(Value::as_u64)
    }

    fn f64_param(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Value::as_f64)
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required parameter --{what}")))
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let command_name = match &cli.command {
        CliCommand::SampleSize(_) => "sample-size",
        CliCommand::Ucb(_) => "ucb",
        CliCommand::Dynamics(_) => "dynamics",
        CliCommand::PneEnumerate(_) => "pne-enumerate",
        CliCommand::Verify(_) => "verify",
        CliCommand::Blr(_) => "blr",
        CliCommand::Learn(_) => "learn",
        CliCommand::Scenario(_) => "scenario",
        CliCommand::RestrictionCount(_) => "restriction-count",
    };
    let defaults = match &cli.config {
        Some(path) => FileDefaults::load(path, command_name)?,
        None => FileDefaults::empty(),
    };

    let command = match cli.command {
        CliCommand::SampleSize(a) => Command::SampleSize {
            epsilon: require(
                a.epsilon.or_else(|| defaults.f64_param("epsilon")),
                "epsilon",
            )?,
            delta: require(a.delta.or_else(|| defaults.f64_param("delta")), "delta")?,
            d: require(a.d.or_else(|| defaults.u64_param("d")), "d")?,
            players: require(
                a.players.or_else(|| defaults.u64_param("players")),
                "players",
            )?,
        },
        CliCommand::Ucb(a) => Command::Ucb {
            m: require(a.m.or_else(|| defaults.u64_param("m")), "m")?,
            epsilon: require(
                a.epsilon.or_else(|| defaults.f64_param("epsilon")),
                "epsilon",
            )?,
            d: require(a.d.or_else(|| defaults.u64_param("d")), "d")?,
            players: require(
                a.players.or_else(|| defaults.u64_param("players")),
                "players",
            )?,
        },
        CliCommand::Dynamics(a) => Command::Dynamics {
            game: require(a.game.or_else(|| defaults.path_param("game")), "game")?,
            initial: a.initial.or_else(|| defaults.path_param("initial")),
            epsilon: require(
                a.epsilon.or_else(|| defaults.str_param("epsilon")),
                "epsilon",
            )?,
            schedule: a
                .schedule
                .or_else(|| defaults.str_param("schedule"))
                .unwrap_or_else(|| "round-robin".into()),
            max_iterations: a
                .max_iterations
                .or_else(|| defaults.u64_param("max_iterations")),
        },
        CliCommand::PneEnumerate(a) => Command::PneEnumerate {
            game: require(a.game.or_else(|| defaults.path_param("game")), "game")?,
            budget: a
                .budget
                .or_else(|| defaults.u64_param("budget"))
                .unwrap_or(DEFAULT_PNE_BUDGET),
        },
        CliCommand::Verify(a) => Command::Verify {
            game: require(a.game.or_else(|| defaults.path_param("game")), "game")?,
            profile: require(
                a.profile.or_else(|| defaults.path_param("profile")),
                "profile",
            )?,
            epsilon: require(
                a.epsilon.or_else(|| defaults.str_param("epsilon")),
                "epsilon",
            )?,
        },
        CliCommand::Blr(a) => Command::Blr {
            sample: require(a.sample.or_else(|| defaults.path_param("sample")), "sample")?,
            opponents: a.opponents.or_else(|| defaults.path_param("opponents")),
        },
        CliCommand::Learn(a) => Command::Learn {
            dist: require(a.dist.or_else(|| defaults.path_param("dist")), "dist")?,
            classes: require(
                a.classes.or_else(|| defaults.path_param("classes")),
                "classes",
            )?,
            epsilon: require(
                a.epsilon.or_else(|| defaults.f64_param("epsilon")),
                "epsilon",
            )?,
            delta: require(a.delta.or_else(|| defaults.f64_param("delta")), "delta")?,
            m_cap: a.m_cap.or_else(|| defaults.u64_param("m_cap")),
        },
        CliCommand::Scenario(a) => Command::Scenario {
            name: require(a.name.or_else(|| defaults.str_param("name")), "name")?,
            m: a.m.or_else(|| defaults.u64_param("m")).unwrap_or(15),
            trials: a
                .trials
                .or_else(|| defaults.u64_param("trials"))
                .unwrap_or(100_000),
        },
        CliCommand::RestrictionCount(a) => Command::RestrictionCount {
            class: require(a.class.or_else(|| defaults.path_param("class")), "class")?,
            sample: require(a.sample.or_else(|| defaults.path_param("sample")), "sample")?,
        },
    };

    Ok(RunConfig {
        command,
        seed: cli.seed.or(defaults.seed).unwrap_or(0),
        mode: cli
            .mode
            .or(defaults.mode)
            .unwrap_or(ArithmeticMode::Floating),
        out: cli.out.or(defaults.out),
        threads: cli.threads.or(defaults.threads),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve(cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("predgame: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    if let Some(threads) = config.threads {
        // Ignore failure when a pool already exists (repeat invocations in
        // one process, e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run_command(&config) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("predgame: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
