//! Sample-complexity formulas and the end-to-end sample-then-converge
//! learner.
//!
//! The uniform-convergence tail bound is `4N (2em)^(10d) exp(-eps^2 m / 8)`;
//! the sample size that drives it below delta is
//! `(320d/eps^2) ln(160d/eps^2) + 160d ln(2e)/eps^2 + (16/eps^2) ln(4N/delta)`.
//! All logarithms are natural, matching the exponential tail.

use crate::arith::Scalar;
use crate::dynamics::{
    run_dynamics_with, BetterResponseOracle, DynamicsTrace, OracleRegistry, ScheduleSpec,
};
use crate::error::{Error, Result};
use crate::linear::LinearConfig;
use crate::model::{EmpiricalGame, HypothesisClass, Sample, StrategyProfile};
use crate::scenarios::{draw_sample, DistributionSpec};

/// Parameters of the uniform-convergence formulas. `d` is the summed
/// declared pseudo-dimension over the players.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub delta: f64,
    pub d: u64,
    pub players: u64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config("epsilon must lie strictly in (0, 1)".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie strictly in (0, 1)".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.players == 0 {
            return Err(Error::Config("player count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Natural log of the tail bound at sample size `m`; exposed so callers can
/// stay in log space for very large arguments.
pub fn log_uniform_convergence_bound(m: u64, epsilon: f64, d: u64, players: u64) -> f64 {
    let m = m as f64;
    (4.0 * players as f64).ln() + 10.0 * d as f64 * (2.0 * std::f64::consts::E * m).ln()
        - epsilon * epsilon * m / 8.0
}

/// The tail bound `4N (2em)^(10d) exp(-eps^2 m / 8)`.
///
/// Evaluated in log space; values beyond the floating range come back as
/// `f64::INFINITY`. The raw bound may exceed 1 — callers clamp when they
/// want a probability.
pub fn uniform_convergence_bound(m: u64, epsilon: f64, d: u64, players: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    if d == 0 || players == 0 {
        return Err(Error::Config(
            "d and player count must be at least 1".into(),
        ));
    }
    let log_value = log_uniform_convergence_bound(m, epsilon, d, players);
    Ok(if log_value > f64::MAX.ln() {
        f64::INFINITY
    } else {
        log_value.exp()
    })
}

/// Right-hand side of the sample-size inequality.
pub fn sample_size_rhs(epsilon: f64, delta: f64, d: u64, players: u64) -> f64 {
    let e2 = epsilon * epsilon;
    let d = d as f64;
    let first = (320.0 * d / e2) * (160.0 * d / e2).ln();
    let second = 160.0 * d * (2.0 * std::f64::consts::E).ln() / e2;
    let third = (16.0 / e2) * (4.0 * players as f64 / delta).ln();
    first + second + third
}

/// Smallest integer sample size satisfying the uniform-convergence
/// inequality for the given accuracy and confidence.
pub fn required_sample_size(inputs: &BoundInputs) -> Result<u64> {
    inputs.validate()?;
    let rhs = sample_size_rhs(inputs.epsilon, inputs.delta, inputs.d, inputs.players);
    Ok(rhs.ceil() as u64)
}

/// Result of a full sample-then-converge run.
#[derive(Debug, Clone)]
pub struct LearnOutcome<S: Scalar> {
    pub profile: StrategyProfile<S>,
    pub sample: Sample<S>,
    pub trace: DynamicsTrace<S>,
    /// The uncapped sample size the formula asked for.
    pub m_target: u64,
    /// The size actually drawn.
    pub m_used: u64,
    /// True when a cap reduced the drawn sample; the population guarantee
    /// only holds for uncapped runs.
    pub capped: bool,
}

/// Sample-then-converge: draw the formula-sized sample (optionally capped
/// for desk-scale runs), then run half-epsilon better-response dynamics to
/// convergence on the induced empirical game.
#[allow(clippy::too_many_arguments)]
pub fn learn_equilibrium<S: Scalar>(
    dist: &DistributionSpec<S>,
    classes: Vec<HypothesisClass<S>>,
    epsilon: f64,
    delta: f64,
    oracles: &[BetterResponseOracle],
    seed: u64,
    m_cap: Option<u64>,
    registry: Option<&OracleRegistry<S>>,
) -> Result<LearnOutcome<S>> {
    if classes.is_empty() {
        return Err(Error::Config("need at least one player class".into()));
    }
    let d: u64 = classes
        .iter()
        .map(|c| {
            c.declared_pdim.ok_or_else(|| {
                Error::Config("every class needs a declared pseudo-dimension".into())
            })
        })
        .sum::<Result<u64>>()?;
    let inputs = BoundInputs {
        epsilon: epsilon / 2.0,
        delta,
        d,
        players: classes.len() as u64,
    };
    let m_target = required_sample_size(&inputs)?;
    let m_used = match m_cap {
        Some(cap) if cap < m_target => cap,
        _ => m_target,
    };
    let capped = m_used < m_target;

    let sample = draw_sample(dist, m_used as usize, seed)?;
    let game = EmpiricalGame::new(sample.clone(), classes)?;
    let initial = game.default_profile();
    let half_epsilon = S::from_f64(epsilon) / S::from_u64(2);
    let (profile, trace) = run_dynamics_with(
        &game,
        initial,
        &half_epsilon,
        oracles,
        &ScheduleSpec::default(),
        registry,
        &LinearConfig::default(),
    )?;
    Ok(LearnOutcome {
        profile,
        sample,
        trace,
        m_target,
        m_used,
        capped,
    })
}
