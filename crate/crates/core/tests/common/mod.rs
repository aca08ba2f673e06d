//! Shared test support: seeded random game generators and independent
//! oracles (exhaustive payoff recomputation, slope sweeps, arrangement cell
//! probes) used to cross-check the engine.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use predgame::arith::{Scalar, Q};
use predgame::linear::{RegionLabel, RegionVector};
use predgame::model::{
    empirical_payoffs, satisfies, EmpiricalGame, Hypothesis, HypothesisClass, Sample,
    StrategyProfile, UserPoint,
};

pub fn q(text: &str) -> Q {
    <Q as Scalar>::parse_text(text).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Grid scalar `k / 8`, exact in both modes.
pub fn grid<S: Scalar>(k: i64) -> S {
    S::from_int_ratio(k as i128, 8)
}

pub struct GameDims {
    pub max_players: usize,
    pub max_members: usize,
    pub max_points: usize,
}

impl Default for GameDims {
    fn default() -> Self {
        GameDims {
            max_players: 5,
            max_members: 6,
            max_points: 25,
        }
    }
}

/// Random finite empirical game on eighth-grid values. The same rng state
/// yields the same game for any scalar type.
pub fn random_finite_game<S: Scalar>(rng: &mut ChaCha8Rng, dims: &GameDims) -> EmpiricalGame<S> {
    let m = rng.gen_range(1..=dims.max_points);
    let points: Vec<UserPoint<S>> = (0..m)
        .map(|_| {
            UserPoint::new(
                vec![grid(rng.gen_range(-16..=16))],
                grid(rng.gen_range(-12..=12)),
                grid(rng.gen_range(1..=8)),
            )
            .unwrap()
        })
        .collect();
    let sample = Sample::new(points).unwrap();

    let n = rng.gen_range(1..=dims.max_players);
    let mut classes = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.gen_range(1..=dims.max_members);
        let mut members: Vec<Hypothesis<S>> = Vec::new();
        let mut evals: Vec<Vec<S>> = Vec::new();
        let mut attempts = 0;
        while members.len() < target && attempts < 200 {
            attempts += 1;
            let candidate: Hypothesis<S> = if rng.gen_bool(0.7) {
                Hypothesis::constant(grid(rng.gen_range(-16..=16)))
            } else {
                let lo = rng.gen_range(-16..=12);
                let hi = rng.gen_range(lo..=16);
                Hypothesis::IntervalIndicator {
                    lo: grid(lo),
                    hi: grid(hi),
                    inclusive_lo: rng.gen_bool(0.5),
                    inclusive_hi: rng.gen_bool(0.5),
                }
            };
            let row: Vec<S> = sample
                .points()
                .iter()
                .map(|z| candidate.evaluate(&z.features).unwrap())
                .collect();
            if evals.iter().any(|seen| seen == &row) {
                continue;
            }
            evals.push(row);
            members.push(candidate);
        }
        classes.push(HypothesisClass::finite(members).with_pdim(1));
    }
    EmpiricalGame::new(sample, classes).unwrap()
}

pub fn random_profile<S: Scalar>(
    rng: &mut ChaCha8Rng,
    game: &EmpiricalGame<S>,
) -> StrategyProfile<S> {
    StrategyProfile::new(
        game.classes()
            .iter()
            .map(|class| {
                let members = class.members().unwrap();
                members[rng.gen_range(0..members.len())].clone()
            })
            .collect(),
    )
}

/// Exhaustive equilibrium check by direct payoff recomputation; independent
/// of the enumeration engine.
pub fn brute_force_is_pne<S: Scalar>(
    game: &EmpiricalGame<S>,
    profile: &StrategyProfile<S>,
) -> bool {
    let current = empirical_payoffs(game, profile).unwrap();
    for player in 0..game.num_players() {
        for member in game.classes()[player].members().unwrap() {
            let candidate = profile.with_strategy(player, member);
            let payoffs = empirical_payoffs(game, &candidate).unwrap();
            if payoffs.values()[player] > current.values()[player] {
                return false;
            }
        }
    }
    true
}

/// All exact equilibria by exhaustive profile iteration, lexicographic.
pub fn brute_force_pne<S: Scalar>(game: &EmpiricalGame<S>) -> Vec<StrategyProfile<S>> {
    let member_lists: Vec<Vec<Hypothesis<S>>> = game
        .classes()
        .iter()
        .map(|c| c.members().unwrap())
        .collect();
    let mut indices = vec![0usize; member_lists.len()];
    let mut out = Vec::new();
    loop {
        let profile = StrategyProfile::new(
            indices
                .iter()
                .enumerate()
                .map(|(i, &k)| member_lists[i][k].clone())
                .collect(),
        );
        if brute_force_is_pne(game, &profile) {
            out.push(profile);
        }
        // Mixed-radix increment, last player fastest.
        let mut pos = indices.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < member_lists[pos].len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Linear oracles

/// Label of slope `a` against a one-dimensional point.
fn label_1d(a: &Q, z: &UserPoint<Q>) -> RegionLabel {
    let r = a.clone() * z.features[0].clone() - z.label.clone();
    if r.abs() <= z.tolerance {
        RegionLabel::One
    } else if r > z.tolerance {
        RegionLabel::Above
    } else {
        RegionLabel::Below
    }
}

/// Exact breakpoint sweep for one-dimensional samples: sort every slope at
/// which some point's label can flip, probe each breakpoint and each gap,
/// and collect the distinct label vectors.
pub fn sweep_label_vectors(sample: &Sample<Q>) -> BTreeSet<Vec<RegionLabel>> {
    assert_eq!(sample.dimension(), 1);
    let mut breaks: Vec<Q> = Vec::new();
    for z in sample.points() {
        let x = &z.features[0];
        if x.is_zero() {
            continue;
        }
        for bound in [
            z.label.clone() - z.tolerance.clone(),
            z.label.clone() + z.tolerance.clone(),
        ] {
            let a = bound / x.clone();
            if !breaks.contains(&a) {
                breaks.push(a);
            }
        }
    }
    breaks.sort();
    let mut probes: Vec<Q> = Vec::new();
    if breaks.is_empty() {
        probes.push(q("0"));
    } else {
        probes.push(breaks[0].clone() - q("1"));
        for i in 0..breaks.len() {
            probes.push(breaks[i].clone());
            if i + 1 < breaks.len() {
                probes.push((breaks[i].clone() + breaks[i + 1].clone()) / q("2"));
            }
        }
        probes.push(breaks[breaks.len() - 1].clone() + q("1"));
    }
    probes
        .iter()
        .map(|a| sample.points().iter().map(|z| label_1d(a, z)).collect())
        .collect()
}

fn label_vector(h: &[Q], sample: &Sample<Q>) -> Vec<RegionLabel> {
    sample
        .points()
        .iter()
        .map(|z| {
            let mut dot = q("0");
            for (a, x) in h.iter().zip(z.features.iter()) {
                dot += a.clone() * x.clone();
            }
            let r = dot - z.label.clone();
            if r.abs() <= z.tolerance {
                RegionLabel::One
            } else if r > z.tolerance {
                RegionLabel::Above
            } else {
                RegionLabel::Below
            }
        })
        .collect()
}

/// Dense probe of realizable label vectors: random predictors plus every
/// constraint-boundary construction (pairwise intersections, on-line
/// samples, and safe perpendicular offsets that stay within the adjacent
/// cells). For dimensions 1 and 2 the constructed candidates visit every
/// cell, edge, and vertex of the slab-boundary arrangement.
pub fn probe_label_vectors(
    sample: &Sample<Q>,
    random_draws: usize,
    rng: &mut ChaCha8Rng,
) -> BTreeSet<Vec<RegionLabel>> {
    let n = sample.dimension();
    assert!(n <= 2, "probe oracle supports dimensions 1 and 2");
    let mut vectors = BTreeSet::new();

    if n == 1 {
        for labels in sweep_label_vectors(sample) {
            vectors.insert(labels);
        }
    } else {
        // Slab boundary lines a.h = b.
        let mut lines: Vec<(Vec<Q>, Q)> = Vec::new();
        for z in sample.points() {
            if z.features.iter().all(|v| v.is_zero()) {
                continue;
            }
            for bound in [
                z.label.clone() - z.tolerance.clone(),
                z.label.clone() + z.tolerance.clone(),
            ] {
                lines.push((z.features.clone(), bound));
            }
        }
        let mut candidates: Vec<Vec<Q>> = vec![vec![q("0"), q("0")]];
        // Pairwise intersections.
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1) = &lines[i];
                let (a2, b2) = &lines[j];
                let det = a1[0].clone() * a2[1].clone() - a1[1].clone() * a2[0].clone();
                if det.is_zero() {
                    continue;
                }
                let hx = (b1.clone() * a2[1].clone() - b2.clone() * a1[1].clone()) / det.clone();
                let hy = (a1[0].clone() * b2.clone() - a2[0].clone() * b1.clone()) / det;
                candidates.push(vec![hx, hy]);
            }
        }
        // Points along each line: every intersection parameter, the gaps
        // between them, and beyond the extremes; each with perpendicular
        // offsets small enough not to cross any other line.
        for (a, b) in &lines {
            let norm2 = a[0].clone() * a[0].clone() + a[1].clone() * a[1].clone();
            let base = [
                a[0].clone() * b.clone() / norm2.clone(),
                a[1].clone() * b.clone() / norm2.clone(),
            ];
            let dir = [-a[1].clone(), a[0].clone()];
            let mut params: Vec<Q> = Vec::new();
            for (a2, b2) in &lines {
                let denom = a2[0].clone() * dir[0].clone() + a2[1].clone() * dir[1].clone();
                if denom.is_zero() {
                    continue;
                }
                let num = b2.clone()
                    - (a2[0].clone() * base[0].clone() + a2[1].clone() * base[1].clone());
                let t = num / denom;
                if !params.contains(&t) {
                    params.push(t);
                }
            }
            params.sort();
            let mut ts: Vec<Q> = vec![q("0")];
            if !params.is_empty() {
                ts.push(params[0].clone() - q("1"));
                for i in 0..params.len() {
                    ts.push(params[i].clone());
                    if i + 1 < params.len() {
                        ts.push((params[i].clone() + params[i + 1].clone()) / q("2"));
                    }
                }
                ts.push(params[params.len() - 1].clone() + q("1"));
            }
            for t in ts {
                let p = vec![
                    base[0].clone() + t.clone() * dir[0].clone(),
                    base[1].clone() + t.clone() * dir[1].clone(),
                ];
                candidates.push(p.clone());
                // Safe offset: half the smallest ratio |residual| / |a'.a|
                // over lines not passing through p.
                let mut alpha: Option<Q> = None;
                for (a2, b2) in &lines {
                    let along = a2[0].clone() * a[0].clone() + a2[1].clone() * a[1].clone();
                    if along.is_zero() {
                        continue;
                    }
                    let r =
                        b2.clone() - (a2[0].clone() * p[0].clone() + a2[1].clone() * p[1].clone());
                    if r.is_zero() {
                        continue;
                    }
                    let bound = r.abs() / along.abs();
                    alpha = Some(match alpha {
                        Some(existing) => Q::min_of(existing, bound),
                        None => bound,
                    });
                }
                let alpha = alpha.map(|a| a / q("2")).unwrap_or_else(|| q("1"));
                for sign in [q("1"), q("-1")] {
                    candidates.push(vec![
                        p[0].clone() + sign.clone() * alpha.clone() * a[0].clone(),
                        p[1].clone() + sign * alpha.clone() * a[1].clone(),
                    ]);
                }
            }
        }
        for h in candidates {
            vectors.insert(label_vector(&h, sample));
        }
    }

    // Random draws, exact labels of exactly-representable floats.
    for _ in 0..random_draws {
        let h: Vec<Q> = (0..n)
            .map(|_| <Q as Scalar>::from_f64(rng.gen_range(-6.0..6.0)))
            .collect();
        vectors.insert(label_vector(&h, sample));
    }
    vectors
}

/// Best payoff over a probed set of label vectors under per-point weights.
pub fn probe_best_value(vectors: &BTreeSet<Vec<RegionLabel>>, weights: &[Q]) -> Q {
    let mut best = q("0");
    for labels in vectors {
        let mut value = q("0");
        for (label, w) in labels.iter().zip(weights.iter()) {
            if *label == RegionLabel::One {
                value += w.clone();
            }
        }
        if value > best {
            best = value;
        }
    }
    best
}

pub fn to_region_vectors(set: &BTreeSet<Vec<RegionLabel>>) -> BTreeSet<RegionVector> {
    set.iter()
        .map(|labels| RegionVector::new(labels.clone()))
        .collect()
}

/// Random one- or two-dimensional sample on the eighth grid for linear
/// oracle tests.
pub fn random_linear_sample(rng: &mut ChaCha8Rng, n: usize, max_points: usize) -> Sample<Q> {
    let m = rng.gen_range(1..=max_points);
    Sample::new(
        (0..m)
            .map(|_| {
                let features: Vec<Q> = (0..n).map(|_| grid(rng.gen_range(-12..=12))).collect();
                UserPoint::new(
                    features,
                    grid(rng.gen_range(-12..=12)),
                    grid(rng.gen_range(0..=8)),
                )
                .unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Random opponents for best-response instances.
pub fn random_opponents(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Hypothesis<Q>> {
    (0..count)
        .map(|_| {
            if n == 1 && rng.gen_bool(0.3) {
                let lo = rng.gen_range(-12..=8);
                let hi = rng.gen_range(lo..=12);
                Hypothesis::IntervalIndicator {
                    lo: grid(lo),
                    hi: grid(hi),
                    inclusive_lo: true,
                    inclusive_hi: true,
                }
            } else if rng.gen_bool(0.5) {
                Hypothesis::constant(grid(rng.gen_range(-12..=12)))
            } else {
                Hypothesis::linear((0..n).map(|_| grid(rng.gen_range(-8..=8))).collect())
            }
        })
        .collect()
}

/// Check a witness reproduces the One-pattern of its label vector.
pub fn witness_matches_pattern(sample: &Sample<Q>, witness: &[Q], labels: &RegionVector) -> bool {
    let h = Hypothesis::linear(witness.to_vec());
    sample
        .points()
        .iter()
        .zip(labels.labels().iter())
        .all(|(z, label)| satisfies(z, &h).unwrap() == (*label == RegionLabel::One))
}
