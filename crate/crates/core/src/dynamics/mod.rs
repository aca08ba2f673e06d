//! The potential function, better-response dynamics, approximate-equilibrium
//! verification, and exact equilibrium enumeration for finite classes.
//!
//! Every empirical game here is a potential game: the harmonic potential
//! `(1/m) * sum_j (1 + 1/2 + ... + 1/c_j)`, where `c_j` counts the players
//! satisfying point `j`, changes under a unilateral deviation by exactly the
//! deviator's payoff change. That identity drives everything in this module:
//! improvement dynamics must terminate, the potential maximizer is an exact
//! equilibrium, and the step count is bounded by `(ln N + 1) / epsilon`.

mod finite;

use finite::SatTable;
use rayon::prelude::*;

use crate::arith::{harmonic, Scalar};
use crate::error::{Error, Result};
use crate::linear::{best_linear_response, LinearConfig};
use crate::model::{augment_with_bias, ClassKind, EmpiricalGame, Hypothesis, StrategyProfile};

/// Which player moves next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Cycle player indices, restarting from player 0 after every
    /// improvement.
    RoundRobin,
    /// Query a uniformly random player each time; deterministic in the seed.
    RandomPlayer { seed: u64 },
}

/// Player schedule plus an optional hard cap on improvement steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub max_iterations: Option<u64>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            kind: ScheduleKind::RoundRobin,
            max_iterations: None,
        }
    }
}

/// How a player searches for an improving strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BetterResponseOracle {
    /// Enumerate the members of a finite class; exact.
    FiniteEnumeration,
    /// Best response within the linear class via region enumeration; exact.
    LinearBlr,
    /// A caller-registered oracle; treated as advisory by verification.
    Custom(String),
}

/// Caller-supplied oracle: returns a strategy improving the player's payoff
/// by at least epsilon, or None.
pub trait CustomOracle<S: Scalar>: Send + Sync {
    fn better_response(
        &self,
        game: &EmpiricalGame<S>,
        profile: &StrategyProfile<S>,
        player: usize,
        epsilon: &S,
    ) -> Result<Option<Hypothesis<S>>>;
}

/// Registry resolving `BetterResponseOracle::Custom` identifiers.
#[derive(Default)]
pub struct OracleRegistry<S: Scalar> {
    oracles: std::collections::HashMap<String, Box<dyn CustomOracle<S>>>,
}

impl<S: Scalar> OracleRegistry<S> {
    pub fn new() -> Self {
        OracleRegistry {
            oracles: std::collections::HashMap::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, oracle: Box<dyn CustomOracle<S>>) {
        self.oracles.insert(name.into(), oracle);
    }

    fn get(&self, name: &str) -> Option<&dyn CustomOracle<S>> {
        self.oracles.get(name).map(|b| b.as_ref())
    }
}

/// One improvement step of a dynamics run.
#[derive(Debug, Clone)]
pub struct DynamicsStep<S: Scalar> {
    pub player: usize,
    pub old_strategy: Hypothesis<S>,
    pub new_strategy: Hypothesis<S>,
    pub old_payoff: S,
    pub new_payoff: S,
    pub potential_after: S,
}

/// Ordered record of improvement steps; the audit trail behind every
/// convergence claim.
#[derive(Debug, Clone)]
pub struct DynamicsTrace<S: Scalar> {
    pub steps: Vec<DynamicsStep<S>>,
    /// False only when a max-iterations cap stopped the run early.
    pub terminated: bool,
    pub iterations: u64,
}

/// Verdict of an approximate-equilibrium check.
#[derive(Debug, Clone)]
pub enum Verdict<S: Scalar> {
    Holds,
    Violated {
        player: usize,
        witness: Hypothesis<S>,
        gain: S,
    },
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome<S: Scalar> {
    pub verdict: Verdict<S>,
    /// True when a non-exact custom oracle took part in the check.
    pub advisory: bool,
}

impl<S: Scalar> VerifyOutcome<S> {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }
}

/// The harmonic potential of a profile; exact in rational mode.
pub fn potential<S: Scalar>(game: &EmpiricalGame<S>, profile: &StrategyProfile<S>) -> Result<S> {
    if profile.len() != game.num_players() {
        return Err(Error::InvalidInput(
            "profile length does not match the game".into(),
        ));
    }
    let mut acc = S::zero();
    for z in game.sample().points() {
        let mut count = 0usize;
        for h in &profile.strategies {
            if crate::model::satisfies(z, h)? {
                count += 1;
            }
        }
        acc = acc + harmonic::<S>(count);
    }
    Ok(acc / S::from_usize(game.sample().len()))
}

/// Payoff of `player` when it unilaterally plays `strategy` against the
/// rest of `profile`.
fn deviation_payoff<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    player: usize,
    strategy: &Hypothesis<S>,
) -> Result<S> {
    let mut acc = S::zero();
    for z in game.sample().points() {
        if !crate::model::satisfies(z, strategy)? {
            continue;
        }
        let mut count = 1usize;
        for (i, h) in profile.strategies.iter().enumerate() {
            if i != player && crate::model::satisfies(z, h)? {
                count += 1;
            }
        }
        acc = acc + S::from_int_ratio(1, count as i128);
    }
    Ok(acc / S::from_usize(game.sample().len()))
}

/// Best member of a finite class against the rest of the profile: the
/// maximizer, ties broken by lowest member index.
fn best_finite_member<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    player: usize,
) -> Result<(Hypothesis<S>, S)> {
    let members = game.classes()[player].members().ok_or_else(|| {
        Error::Unsupported("finite enumeration needs a finitely enumerable class".into())
    })?;
    let mut best: Option<(Hypothesis<S>, S)> = None;
    for member in members {
        let value = deviation_payoff(game, profile, player, &member)?;
        match &best {
            Some((_, incumbent)) if value <= *incumbent => {}
            _ => best = Some((member, value)),
        }
    }
    best.ok_or_else(|| Error::InvalidInput("empty hypothesis class".into()))
}

/// Member of the player's finite class improving the player's payoff by at
/// least `epsilon` (boundary inclusive), or None. Returns the best such
/// member, ties broken by lowest index.
pub fn epsilon_better_response_finite<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    player: usize,
    epsilon: &S,
) -> Result<Option<Hypothesis<S>>> {
    if *epsilon <= S::zero() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let current = deviation_payoff(game, profile, player, &profile.strategies[player])?;
    let (best, value) = best_finite_member(game, profile, player)?;
    if value >= current + epsilon.clone() {
        Ok(Some(best))
    } else {
        Ok(None)
    }
}

/// Best response via the player's configured oracle, as (strategy, payoff).
fn oracle_best_response<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    player: usize,
    oracle: &BetterResponseOracle,
    epsilon: &S,
    registry: Option<&OracleRegistry<S>>,
    linear_cfg: &LinearConfig,
) -> Result<Option<(Hypothesis<S>, S)>> {
    match oracle {
        BetterResponseOracle::FiniteEnumeration => {
            let (best, value) = best_finite_member(game, profile, player)?;
            Ok(Some((best, value)))
        }
        BetterResponseOracle::LinearBlr => {
            let (dimension, with_bias) = match &game.classes()[player].kind {
                ClassKind::Linear {
                    dimension,
                    with_bias,
                } => (*dimension, *with_bias),
                _ => {
                    return Err(Error::Unsupported(
                        "the linear oracle needs a linear class".into(),
                    ))
                }
            };
            debug_assert_eq!(dimension, game.sample().dimension());
            let opponents: Vec<Hypothesis<S>> = profile
                .strategies
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != player)
                .map(|(_, h)| h.clone())
                .collect();
            if with_bias {
                // Augmented points carry a constant-1 feature, but opponent
                // hypotheses expect raw points; satisfaction of opponents is
                // computed on the raw sample and folded into weights there.
                let raw_weights = crate::linear::response_weights(game.sample(), &opponents)?;
                let augmented = augment_with_bias(game.sample())?;
                let regions = crate::linear::enumerate_regions(&augmented, linear_cfg)?;
                let mut best: Option<(S, crate::linear::RegionVector)> = None;
                for region in regions {
                    let value = S::sum(
                        region
                            .labels()
                            .iter()
                            .zip(raw_weights.iter())
                            .filter(|(l, _)| **l == crate::linear::RegionLabel::One)
                            .map(|(_, w)| w.clone()),
                    );
                    match &best {
                        Some((incumbent, _)) if value <= *incumbent => {}
                        _ => best = Some((value, region)),
                    }
                }
                let (value, region) = best.expect("at least one region exists");
                let witness = match crate::linear::pvf(&augmented, &region, linear_cfg)? {
                    crate::linear::FeasibilityResult::Feasible { witness, .. } => witness,
                    crate::linear::FeasibilityResult::Infeasible => {
                        return Err(Error::Internal("region lost feasibility".into()))
                    }
                };
                Ok(Some((
                    Hypothesis::linear(witness),
                    value / S::from_usize(game.sample().len()),
                )))
            } else {
                let response = best_linear_response(game.sample(), &opponents, linear_cfg)?;
                Ok(Some((response.hypothesis, response.payoff)))
            }
        }
        BetterResponseOracle::Custom(name) => {
            let registry = registry.ok_or_else(|| {
                Error::Config(format!("custom oracle {name:?} used without a registry"))
            })?;
            let custom = registry
                .get(name)
                .ok_or_else(|| Error::Config(format!("unknown custom oracle {name:?}")))?;
            match custom.better_response(game, profile, player, epsilon)? {
                Some(h) => {
                    let value = deviation_payoff(game, profile, player, &h)?;
                    Ok(Some((h, value)))
                }
                None => Ok(None),
            }
        }
    }
}

fn check_oracles<S: Scalar>(
    game: &EmpiricalGame<S>,
    oracles: &[BetterResponseOracle],
) -> Result<()> {
    if oracles.len() != game.num_players() {
        return Err(Error::Config(format!(
            "{} oracles supplied for {} players",
            oracles.len(),
            game.num_players()
        )));
    }
    for (i, (oracle, class)) in oracles.iter().zip(game.classes().iter()).enumerate() {
        let compatible = match oracle {
            BetterResponseOracle::FiniteEnumeration => {
                !matches!(class.kind, ClassKind::Linear { .. })
            }
            BetterResponseOracle::LinearBlr => matches!(class.kind, ClassKind::Linear { .. }),
            BetterResponseOracle::Custom(_) => true,
        };
        if !compatible {
            return Err(Error::Config(format!(
                "oracle for player {i} is incompatible with its class"
            )));
        }
    }
    Ok(())
}

/// Run epsilon-better-response dynamics until no scheduled oracle improves.
///
/// Each improvement step raises the potential by at least epsilon and the
/// potential never exceeds `ln N + 1`, so the step count is bounded by
/// `ceil((ln N + 1) / epsilon)` regardless of schedule. Deterministic for a
/// fixed schedule and seed.
pub fn run_dynamics<S: Scalar>(
    game: &EmpiricalGame<S>,
    initial: StrategyProfile<S>,
    epsilon: &S,
    oracles: &[BetterResponseOracle],
    schedule: &ScheduleSpec,
) -> Result<(StrategyProfile<S>, DynamicsTrace<S>)> {
    run_dynamics_with(
        game,
        initial,
        epsilon,
        oracles,
        schedule,
        None,
        &LinearConfig::default(),
    )
}

pub fn run_dynamics_with<S: Scalar>(
    game: &EmpiricalGame<S>,
    initial: StrategyProfile<S>,
    epsilon: &S,
    oracles: &[BetterResponseOracle],
    schedule: &ScheduleSpec,
    registry: Option<&OracleRegistry<S>>,
    linear_cfg: &LinearConfig,
) -> Result<(StrategyProfile<S>, DynamicsTrace<S>)> {
    if *epsilon <= S::zero() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    check_oracles(game, oracles)?;
    game.validate_profile(&initial)?;

    let n = game.num_players();
    let mut profile = initial;
    let mut steps: Vec<DynamicsStep<S>> = Vec::new();
    let mut clean: Vec<bool> = vec![false; n];
    let mut clean_count = 0usize;
    let mut rng = match &schedule.kind {
        ScheduleKind::RandomPlayer { seed } => Some(schedule_rng(*seed)),
        ScheduleKind::RoundRobin => None,
    };
    let mut round_robin_next = 0usize;
    let mut terminated = false;

    loop {
        if clean_count == n {
            terminated = true;
            break;
        }
        if let Some(cap) = schedule.max_iterations {
            if steps.len() as u64 >= cap {
                break;
            }
        }
        let player = match &mut rng {
            Some(rng) => next_random_index(rng, n),
            None => {
                let p = round_robin_next;
                round_robin_next = (round_robin_next + 1) % n;
                p
            }
        };
        if clean[player] {
            continue;
        }
        let improvement = (|| -> Result<Option<(Hypothesis<S>, S, S)>> {
            let current = deviation_payoff(game, &profile, player, &profile.strategies[player])?;
            match oracle_best_response(
                game,
                &profile,
                player,
                &oracles[player],
                epsilon,
                registry,
                linear_cfg,
            )? {
                Some((candidate, value)) if value >= current.clone() + epsilon.clone() => {
                    Ok(Some((candidate, current, value)))
                }
                _ => Ok(None),
            }
        })()
        .map_err(|e| match e {
            Error::Oracle { .. } => e,
            other => Error::Oracle {
                player,
                step: steps.len() as u64 + 1,
                message: other.to_string(),
            },
        })?;

        match improvement {
            Some((candidate, old_payoff, new_payoff)) => {
                let old_strategy =
                    std::mem::replace(&mut profile.strategies[player], candidate.clone());
                let potential_after = potential(game, &profile)?;
                steps.push(DynamicsStep {
                    player,
                    old_strategy,
                    new_strategy: candidate,
                    old_payoff,
                    new_payoff,
                    potential_after,
                });
                clean = vec![false; n];
                clean_count = 0;
                // Round robin restarts at player 0 after an improvement.
                round_robin_next = 0;
            }
            None => {
                clean[player] = true;
                clean_count += 1;
            }
        }
    }

    let iterations = steps.len() as u64;
    Ok((
        profile,
        DynamicsTrace {
            steps,
            terminated,
            iterations,
        },
    ))
}

fn schedule_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand_chacha::rand_core::SeedableRng;
    // Tagged so the scheduler stream never collides with sampling streams.
    rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x7363_6865_6475_6c65)
}

fn next_random_index(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> usize {
    use rand::RngCore;
    (rng.next_u64() % n as u64) as usize
}

/// Upper bound on improvement steps of any epsilon-dynamics on this game.
pub fn iteration_bound(num_players: usize, epsilon: f64) -> u64 {
    (((num_players as f64).ln() + 1.0) / epsilon).ceil() as u64
}

/// Check that no player can gain `epsilon` or more (and strictly more than
/// zero) by a unilateral deviation, using exact oracles per class.
///
/// In floating mode a deviation counts only when its gain clears epsilon
/// plus a slack of 1e-12. Any custom oracle involved marks the verdict as
/// advisory.
pub fn verify_epsilon_pne<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    epsilon: &S,
    oracles: &[BetterResponseOracle],
) -> Result<VerifyOutcome<S>> {
    verify_epsilon_pne_with(
        game,
        profile,
        epsilon,
        oracles,
        None,
        &LinearConfig::default(),
    )
}

pub fn verify_epsilon_pne_with<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
    epsilon: &S,
    oracles: &[BetterResponseOracle],
    registry: Option<&OracleRegistry<S>>,
    linear_cfg: &LinearConfig,
) -> Result<VerifyOutcome<S>> {
    if *epsilon < S::zero() {
        return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
    }
    check_oracles(game, oracles)?;
    game.validate_profile(profile)?;
    let advisory = oracles
        .iter()
        .any(|o| matches!(o, BetterResponseOracle::Custom(_)));
    // A positive epsilon is required by the oracle interface; verification
    // at epsilon = 0 still needs candidate responses, so probe with any
    // positive value and judge gains below.
    let probe = if *epsilon > S::zero() {
        epsilon.clone()
    } else {
        S::one()
    };
    for (player, oracle) in oracles.iter().enumerate() {
        let current = deviation_payoff(game, profile, player, &profile.strategies[player])?;
        let response =
            oracle_best_response(game, profile, player, oracle, &probe, registry, linear_cfg)?;
        let Some((candidate, value)) = response else {
            continue;
        };
        let gain = value - current;
        let violates = gain > S::zero() && gain >= epsilon.clone() + S::comparison_slack();
        if violates {
            return Ok(VerifyOutcome {
                verdict: Verdict::Violated {
                    player,
                    witness: candidate,
                    gain,
                },
                advisory,
            });
        }
    }
    Ok(VerifyOutcome {
        verdict: Verdict::Holds,
        advisory,
    })
}

/// Exhaustively list the exact pure equilibria of a finite empirical game in
/// lexicographic member-index order.
pub fn enumerate_pure_nash<S: Scalar>(
    game: &EmpiricalGame<S>,
    budget: u64,
) -> Result<Vec<StrategyProfile<S>>> {
    let member_lists: Vec<Vec<Hypothesis<S>>> = game
        .classes()
        .iter()
        .map(|class| {
            class.members().ok_or_else(|| {
                Error::Unsupported("equilibrium enumeration needs finite classes".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total: u128 = 1;
    for list in &member_lists {
        total = total.saturating_mul(list.len() as u128);
    }
    if total > budget as u128 {
        return Err(Error::Resource(format!(
            "profile space of {total} exceeds the enumeration budget {budget}"
        )));
    }

    let table = SatTable::build(game, &member_lists)?;
    let n = table.num_players();
    let radices: Vec<usize> = (0..n).map(|i| table.member_count(i)).collect();

    // Enumerate in parallel chunks over a flattened index, collecting in
    // order so the output stays lexicographic.
    let total = total as u64;
    let chunk: u64 = 4096;
    let num_chunks = total.div_ceil(chunk);
    let hits: Vec<Vec<u64>> = (0..num_chunks)
        .into_par_iter()
        .map(|c| {
            let mut found = Vec::new();
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut indices = unflatten(start, &radices);
            for flat in start..end {
                let counts = table.counts(&indices);
                let is_pne = (0..n).all(|p| !table.has_strict_improvement(&indices, &counts, p));
                if is_pne {
                    found.push(flat);
                }
                increment(&mut indices, &radices);
            }
            found
        })
        .collect();

    let mut profiles = Vec::new();
    for flat in hits.into_iter().flatten() {
        let indices = unflatten(flat, &radices);
        profiles.push(StrategyProfile::new(
            indices
                .iter()
                .enumerate()
                .map(|(i, &k)| member_lists[i][k].clone())
                .collect(),
        ));
    }
    Ok(profiles)
}

/// Mixed-radix decode of a flat profile index (last player varies fastest).
fn unflatten(mut flat: u64, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; radices.len()];
    for i in (0..radices.len()).rev() {
        out[i] = (flat % radices[i] as u64) as usize;
        flat /= radices[i] as u64;
    }
    out
}

fn increment(indices: &mut [usize], radices: &[usize]) {
    for i in (0..indices.len()).rev() {
        indices[i] += 1;
        if indices[i] < radices[i] {
            return;
        }
        indices[i] = 0;
    }
}

/// Scaled-integer potential argmax over all profiles of a finite game;
/// exposed for tests that cross-check enumeration.
pub fn potential_argmax_profiles<S: Scalar>(
    game: &EmpiricalGame<S>,
    budget: u64,
) -> Result<Vec<StrategyProfile<S>>> {
    let member_lists: Vec<Vec<Hypothesis<S>>> = game
        .classes()
        .iter()
        .map(|class| {
            class
                .members()
                .ok_or_else(|| Error::Unsupported("potential argmax needs finite classes".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total: u128 = 1;
    for list in &member_lists {
        total = total.saturating_mul(list.len() as u128);
    }
    if total > budget as u128 {
        return Err(Error::Resource("profile space exceeds the budget".into()));
    }
    let table = SatTable::build(game, &member_lists)?;
    let radices: Vec<usize> = (0..table.num_players())
        .map(|i| table.member_count(i))
        .collect();
    let mut best: Option<i128> = None;
    let mut winners: Vec<Vec<usize>> = Vec::new();
    let mut indices = vec![0usize; radices.len()];
    for _ in 0..total {
        let phi = table.potential_scaled(&table.counts(&indices));
        match best {
            Some(b) if phi < b => {}
            Some(b) if phi == b => winners.push(indices.clone()),
            _ => {
                best = Some(phi);
                winners = vec![indices.clone()];
            }
        }
        increment(&mut indices, &radices);
    }
    Ok(winners
        .into_iter()
        .map(|idx| {
            StrategyProfile::new(
                idx.iter()
                    .enumerate()
                    .map(|(i, &k)| member_lists[i][k].clone())
                    .collect(),
            )
        })
        .collect())
}
