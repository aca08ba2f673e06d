//! Command front end: configuration resolution, command dispatch, and
//! artifact files.
//!
//! Runs are batch jobs: one command, one seed, one arithmetic mode, outputs
//! written atomically under `--out`. Every report embeds the resolved
//! command, parameters, seed, and mode, so identical configurations produce
//! byte-identical artifacts.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::arith::{ArithmeticMode, Scalar, Q};
use crate::bounds::{
    learn_equilibrium, required_sample_size, uniform_convergence_bound, BoundInputs,
};
use crate::dynamics::{
    enumerate_pure_nash, iteration_bound, run_dynamics, verify_epsilon_pne, BetterResponseOracle,
    ScheduleKind, ScheduleSpec, Verdict,
};
use crate::error::{Error, Result};
use crate::io;
use crate::linear::{best_linear_response, LinearConfig};
use crate::model::{empirical_payoffs, restriction_count, ClassKind, EmpiricalGame};
use crate::scenarios::{draw_sample, make_example41, simulate_claim_a6};

/// Default budget on enumerated profiles.
pub const DEFAULT_PNE_BUDGET: u64 = 1_000_000;

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub mode: ArithmeticMode,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Command {
    SampleSize {
        epsilon: f64,
        delta: f64,
        d: u64,
        players: u64,
    },
    Ucb {
        m: u64,
        epsilon: f64,
        d: u64,
        players: u64,
    },
    Dynamics {
        game: PathBuf,
        initial: Option<PathBuf>,
        epsilon: String,
        schedule: String,
        max_iterations: Option<u64>,
    },
    PneEnumerate {
        game: PathBuf,
        budget: u64,
    },
    Verify {
        game: PathBuf,
        profile: PathBuf,
        epsilon: String,
    },
    Blr {
        sample: PathBuf,
        opponents: Option<PathBuf>,
    },
    Learn {
        dist: PathBuf,
        classes: PathBuf,
        epsilon: f64,
        delta: f64,
        m_cap: Option<u64>,
    },
    Scenario {
        name: String,
        m: u64,
        trials: u64,
    },
    RestrictionCount {
        class: PathBuf,
        sample: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleSize { .. } => "sample-size",
            Command::Ucb { .. } => "ucb",
            Command::Dynamics { .. } => "dynamics",
            Command::PneEnumerate { .. } => "pne-enumerate",
            Command::Verify { .. } => "verify",
            Command::Blr { .. } => "blr",
            Command::Learn { .. } => "learn",
            Command::Scenario { .. } => "scenario",
            Command::RestrictionCount { .. } => "restriction-count",
        }
    }

    fn params_value(&self) -> Value {
        match self {
            Command::SampleSize {
                epsilon,
                delta,
                d,
                players,
            } => json!({
                "epsilon": epsilon, "delta": delta, "d": d, "players": players,
            }),
            Command::Ucb {
                m,
                epsilon,
                d,
                players,
            } => json!({
                "m": m, "epsilon": epsilon, "d": d, "players": players,
            }),
            Command::Dynamics {
                game,
                initial,
                epsilon,
                schedule,
                max_iterations,
            } => json!({
                "game": path_text(game),
                "initial": initial.as_deref().map(path_text),
                "epsilon": epsilon,
                "schedule": schedule,
                "max_iterations": max_iterations,
            }),
            Command::PneEnumerate { game, budget } => json!({
                "game": path_text(game), "budget": budget,
            }),
            Command::Verify {
                game,
                profile,
                epsilon,
            } => json!({
                "game": path_text(game), "profile": path_text(profile), "epsilon": epsilon,
            }),
            Command::Blr { sample, opponents } => json!({
                "sample": path_text(sample),
                "opponents": opponents.as_deref().map(path_text),
            }),
            Command::Learn {
                dist,
                classes,
                epsilon,
                delta,
                m_cap,
            } => json!({
                "dist": path_text(dist),
                "classes": path_text(classes),
                "epsilon": epsilon,
                "delta": delta,
                "m_cap": m_cap,
            }),
            Command::Scenario { name, m, trials } => json!({
                "name": name, "m": m, "trials": trials,
            }),
            Command::RestrictionCount { class, sample } => json!({
                "class": path_text(class), "sample": path_text(sample),
            }),
        }
    }
}

fn path_text(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// The configuration block embedded in every artifact. Output locations and
/// thread counts are excluded: neither may change results.
pub fn config_value(config: &RunConfig) -> Value {
    json!({
        "command": config.command.name(),
        "params": config.command.params_value(),
        "seed": config.seed,
        "mode": config.mode.to_string(),
    })
}

/// Exit codes: 0 success, 1 verification found a violation, then one code
/// per error family.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        Error::InvalidInput(_) | Error::Parse(_) | Error::Unsupported(_) => 3,
        Error::Resource(_) => 4,
        Error::Oracle { .. } | Error::Io(_) | Error::Internal(_) => 5,
    }
}

struct Outputs<'a> {
    config: Value,
    out: Option<&'a Path>,
}

impl<'a> Outputs<'a> {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = self.out {
            io::write_atomic(&dir.join(name), bytes)?;
        }
        Ok(())
    }

    fn write_report(&self, mut body: serde_json::Map<String, Value>) -> Result<()> {
        body.insert("config".into(), self.config.clone());
        self.write(
            "report.json",
            io::to_pretty_json(&Value::Object(body)).as_bytes(),
        )
    }

    fn comment(&self) -> String {
        format!("config: {}", self.config)
    }
}

/// Execute one command; returns the process exit status (0, or 1 when a
/// verification reports a violation).
pub fn run_command(config: &RunConfig) -> Result<i32> {
    let outputs = Outputs {
        config: config_value(config),
        out: config.out.as_deref(),
    };
    match config.mode {
        ArithmeticMode::Floating => dispatch::<f64>(config, &outputs),
        ArithmeticMode::Rational => dispatch::<Q>(config, &outputs),
    }
}

fn dispatch<S: Scalar>(config: &RunConfig, outputs: &Outputs<'_>) -> Result<i32> {
    match &config.command {
        Command::SampleSize {
            epsilon,
            delta,
            d,
            players,
        } => {
            let m = required_sample_size(&BoundInputs {
                epsilon: *epsilon,
                delta: *delta,
                d: *d,
                players: *players,
            })?;
            println!("{m}");
            let mut body = serde_json::Map::new();
            body.insert("m".into(), json!(m));
            outputs.write_report(body)?;
            Ok(0)
        }
        Command::Ucb {
            m,
            epsilon,
            d,
            players,
        } => {
            let value = uniform_convergence_bound(*m, *epsilon, *d, *players)?;
            let log_value =
                crate::bounds::log_uniform_convergence_bound(*m, *epsilon, *d, *players);
            println!("{}", value.canonical_text());
            let mut body = serde_json::Map::new();
            body.insert("value".into(), json!(value.canonical_text()));
            body.insert("log_value".into(), json!(log_value.canonical_text()));
            outputs.write_report(body)?;
            Ok(0)
        }
        Command::Dynamics {
            game,
            initial,
            epsilon,
            schedule,
            max_iterations,
        } => {
            let game: EmpiricalGame<S> = io::game_from_value(&io::read_json(game)?)?;
            let initial_profile = match initial {
                Some(path) => io::profile_from_value(&io::read_json(path)?)?,
                None => game.default_profile(),
            };
            let eps = S::parse_text(epsilon)?;
            let schedule = ScheduleSpec {
                kind: parse_schedule(schedule, config.seed)?,
                max_iterations: *max_iterations,
            };
            let oracles = default_oracles(&game);
            let (profile, trace) = run_dynamics(&game, initial_profile, &eps, &oracles, &schedule)?;
            let payoffs = empirical_payoffs(&game, &profile)?;
            let potential = crate::dynamics::potential(&game, &profile)?;
            println!(
                "converged={} steps={} bound={}",
                trace.terminated,
                trace.iterations,
                iteration_bound(game.num_players(), eps.to_f64()),
            );
            outputs.write(
                "trace.csv",
                io::write_trace_csv(&trace, Some(&outputs.comment())).as_bytes(),
            )?;
            outputs.write(
                "profile.json",
                io::to_pretty_json(&io::profile_to_value(&profile)).as_bytes(),
            )?;
            let mut body = serde_json::Map::new();
            body.insert("iterations".into(), json!(trace.iterations));
            body.insert("terminated".into(), json!(trace.terminated));
            body.insert(
                "final_payoffs".into(),
                json!(payoffs
                    .values()
                    .iter()
                    .map(|v| v.canonical_text())
                    .collect::<Vec<_>>()),
            );
            body.insert("potential".into(), json!(potential.canonical_text()));
            outputs.write_report(body)?;
            Ok(0)
        }
        Command::PneEnumerate { game, budget } => {
            let game: EmpiricalGame<S> = io::game_from_value(&io::read_json(game)?)?;
            let profiles = enumerate_pure_nash(&game, *budget)?;
            println!("{}", profiles.len());
            let body = json!({
                "config": outputs.config,
                "count": profiles.len(),
                "profiles": profiles.iter().map(io::profile_to_value).collect::<Vec<_>>(),
            });
            outputs.write("pne.json", io::to_pretty_json(&body).as_bytes())?;
            let mut report = serde_json::Map::new();
            report.insert("count".into(), json!(profiles.len()));
            outputs.write_report(report)?;
            Ok(0)
        }
        Command::Verify {
            game,
            profile,
            epsilon,
        } => {
            let game: EmpiricalGame<S> = io::game_from_value(&io::read_json(game)?)?;
            let profile = io::profile_from_value(&io::read_json(profile)?)?;
            let eps = S::parse_text(epsilon)?;
            let oracles = default_oracles(&game);
            let outcome = verify_epsilon_pne(&game, &profile, &eps, &oracles)?;
            let mut body = serde_json::Map::new();
            body.insert("advisory".into(), json!(outcome.advisory));
            let status = match &outcome.verdict {
                Verdict::Holds => {
                    println!("holds");
                    body.insert("verdict".into(), json!("holds"));
                    0
                }
                Verdict::Violated {
                    player,
                    witness,
                    gain,
                } => {
                    println!("violated player={} gain={}", player, gain.canonical_text());
                    body.insert("verdict".into(), json!("violated"));
                    body.insert("player".into(), json!(player));
                    body.insert("gain".into(), json!(gain.canonical_text()));
                    body.insert("witness".into(), io::hypothesis_to_value(witness));
                    1
                }
            };
            outputs.write_report(body)?;
            Ok(status)
        }
        Command::Blr { sample, opponents } => {
            let sample = io::read_sample_csv_path::<S>(sample)?;
            let opponents = match opponents {
                Some(path) => io::profile_from_value(&io::read_json(path)?)?.strategies,
                None => Vec::new(),
            };
            let response = best_linear_response(&sample, &opponents, &LinearConfig::default())?;
            println!("payoff={}", response.payoff.canonical_text());
            outputs.write(
                "response.json",
                io::to_pretty_json(&json!({
                    "config": outputs.config,
                    "hypothesis": io::hypothesis_to_value(&response.hypothesis),
                    "payoff": response.payoff.canonical_text(),
                    "region": response.region.to_text(),
                }))
                .as_bytes(),
            )?;
            let mut report = serde_json::Map::new();
            report.insert("payoff".into(), json!(response.payoff.canonical_text()));
            report.insert("region".into(), json!(response.region.to_text()));
            outputs.write_report(report)?;
            Ok(0)
        }
        Command::Learn {
            dist,
            classes,
            epsilon,
            delta,
            m_cap,
        } => {
            let dist = io::distribution_from_value::<S>(&io::read_json(dist)?)?;
            let classes_value = io::read_json(classes)?;
            let classes = classes_value
                .as_array()
                .ok_or_else(|| Error::Parse("classes file must be a JSON array".into()))?
                .iter()
                .map(io::class_from_value)
                .collect::<Result<Vec<_>>>()?;
            let oracles: Vec<BetterResponseOracle> = classes
                .iter()
                .map(|c| match c.kind {
                    ClassKind::Linear { .. } => BetterResponseOracle::LinearBlr,
                    _ => BetterResponseOracle::FiniteEnumeration,
                })
                .collect();
            let outcome = learn_equilibrium::<S>(
                &dist,
                classes,
                *epsilon,
                *delta,
                &oracles,
                config.seed,
                *m_cap,
                None,
            )?;
            println!(
                "m_target={} m_used={} capped={} steps={}",
                outcome.m_target, outcome.m_used, outcome.capped, outcome.trace.iterations,
            );
            outputs.write(
                "sample.csv",
                io::write_sample_csv(&outcome.sample, Some(&outputs.comment()))?.as_bytes(),
            )?;
            outputs.write(
                "trace.csv",
                io::write_trace_csv(&outcome.trace, Some(&outputs.comment())).as_bytes(),
            )?;
            outputs.write(
                "profile.json",
                io::to_pretty_json(&io::profile_to_value(&outcome.profile)).as_bytes(),
            )?;
            let mut body = serde_json::Map::new();
            body.insert("m_target".into(), json!(outcome.m_target));
            body.insert("m_used".into(), json!(outcome.m_used));
            body.insert("capped".into(), json!(outcome.capped));
            body.insert("iterations".into(), json!(outcome.trace.iterations));
            body.insert("terminated".into(), json!(outcome.trace.terminated));
            outputs.write_report(body)?;
            Ok(0)
        }
        Command::Scenario { name, m, trials } => match name.as_str() {
            "example41" => {
                let dist = crate::scenarios::example41_distribution::<S>();
                let sample = draw_sample(&dist, *m as usize, config.seed)?;
                let (game, profile, dist) = make_example41(sample.clone())?;
                let payoffs = empirical_payoffs(&game, &profile)?;
                println!(
                    "m={} empirical_payoffs={}",
                    m,
                    payoffs
                        .values()
                        .iter()
                        .map(|v| v.canonical_text())
                        .collect::<Vec<_>>()
                        .join(",")
                );
                outputs.write(
                    "game.json",
                    io::to_pretty_json(&io::game_to_value(&game)).as_bytes(),
                )?;
                outputs.write(
                    "profile.json",
                    io::to_pretty_json(&io::profile_to_value(&profile)).as_bytes(),
                )?;
                outputs.write(
                    "dist.json",
                    io::to_pretty_json(&io::distribution_to_value(&dist)).as_bytes(),
                )?;
                outputs.write(
                    "sample.csv",
                    io::write_sample_csv(&sample, Some(&outputs.comment()))?.as_bytes(),
                )?;
                let mut body = serde_json::Map::new();
                body.insert(
                    "empirical_payoffs".into(),
                    json!(payoffs
                        .values()
                        .iter()
                        .map(|v| v.canonical_text())
                        .collect::<Vec<_>>()),
                );
                outputs.write_report(body)?;
                Ok(0)
            }
            "claim-a6" => {
                let estimate = simulate_claim_a6(*trials, *m, config.seed)?;
                println!("{}", estimate.canonical_text());
                let mut body = serde_json::Map::new();
                body.insert("estimate".into(), json!(estimate.canonical_text()));
                body.insert("trials".into(), json!(trials));
                body.insert("m".into(), json!(m));
                outputs.write_report(body)?;
                Ok(0)
            }
            other => Err(Error::Config(format!(
                "unknown scenario {other:?}; available: example41, claim-a6"
            ))),
        },
        Command::RestrictionCount { class, sample } => {
            let class = io::class_from_value::<S>(&io::read_json(class)?)?;
            let sample = io::read_sample_csv_path::<S>(sample)?;
            let count = restriction_count(&class, &sample, &LinearConfig::default())?;
            println!("{count}");
            let mut body = serde_json::Map::new();
            body.insert("count".into(), json!(count));
            outputs.write_report(body)?;
            Ok(0)
        }
    }
}

/// Oracles inferred from class kinds: enumeration for finitely enumerable
/// classes, the linear oracle otherwise.
pub fn default_oracles<S: Scalar>(game: &EmpiricalGame<S>) -> Vec<BetterResponseOracle> {
    game.classes()
        .iter()
        .map(|c| match c.kind {
            ClassKind::Linear { .. } => BetterResponseOracle::LinearBlr,
            _ => BetterResponseOracle::FiniteEnumeration,
        })
        .collect()
}

fn parse_schedule(text: &str, seed: u64) -> Result<ScheduleKind> {
    match text {
        "round-robin" => Ok(ScheduleKind::RoundRobin),
        "random" => Ok(ScheduleKind::RandomPlayer { seed }),
        other => Err(Error::Config(format!(
            "unknown schedule {other:?}; available: round-robin, random"
        ))),
    }
}
