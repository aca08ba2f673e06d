//! Reproducible scenario generators: synthetic user distributions, seeded
//! sampling, the bundled `example41` three-player game, and the `claim-a6`
//! coin simulation.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::model::{
    ClassKind, EmpiricalGame, Hypothesis, HypothesisClass, Sample, StrategyProfile, UserPoint,
};

/// One uniform slab of users: `x` uniform on `[x_lo, x_hi]`, fixed label and
/// tolerance, selected with probability `mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<S: Scalar> {
    pub x_lo: S,
    pub x_hi: S,
    pub label: S,
    pub tolerance: S,
    pub mass: S,
}

/// A user population the engine can sample from.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec<S: Scalar> {
    UniformSegments {
        segments: Vec<Segment<S>>,
    },
    PointMass {
        z: UserPoint<S>,
    },
    GaussianRegression {
        x_lo: S,
        x_hi: S,
        slope: S,
        intercept: S,
        noise_sd: S,
        tolerance: S,
    },
    UniformOverSample {
        sample: Sample<S>,
    },
}

impl<S: Scalar> DistributionSpec<S> {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::UniformSegments { segments } => {
                if segments.is_empty() {
                    return Err(Error::Config("uniform segments need a segment".into()));
                }
                let mut total = S::zero();
                for seg in segments {
                    if seg.mass < S::zero() {
                        return Err(Error::Config("segment mass must be nonnegative".into()));
                    }
                    if seg.tolerance < S::zero() {
                        return Err(Error::Config(
                            "segment tolerance must be nonnegative".into(),
                        ));
                    }
                    if seg.x_hi < seg.x_lo {
                        return Err(Error::Config("segment range is reversed".into()));
                    }
                    total = total + seg.mass.clone();
                }
                let slack = S::from_f64(1e-9);
                if (total - S::one()).abs() > slack {
                    return Err(Error::Config("segment masses must sum to 1".into()));
                }
                Ok(())
            }
            DistributionSpec::PointMass { .. } => Ok(()),
            DistributionSpec::GaussianRegression {
                x_lo,
                x_hi,
                noise_sd,
                tolerance,
                ..
            } => {
                if x_hi < x_lo {
                    return Err(Error::Config("x range is reversed".into()));
                }
                if *noise_sd < S::zero() {
                    return Err(Error::Config("noise sd must be nonnegative".into()));
                }
                if *tolerance < S::zero() {
                    return Err(Error::Config("tolerance must be nonnegative".into()));
                }
                Ok(())
            }
            DistributionSpec::UniformOverSample { .. } => Ok(()),
        }
    }

    /// Feature dimension of points this distribution produces.
    pub fn dimension(&self) -> usize {
        match self {
            DistributionSpec::UniformSegments { .. }
            | DistributionSpec::GaussianRegression { .. } => 1,
            DistributionSpec::PointMass { z } => z.dimension(),
            DistributionSpec::UniformOverSample { sample } => sample.dimension(),
        }
    }
}

/// Deterministic stream of user points.
///
/// Draw coordinates are materialized on the `f64` grid and converted exactly
/// into the active scalar type, so a seed produces the identical sample in
/// both arithmetic modes on every platform.
pub struct DrawStream<'a, S: Scalar> {
    dist: &'a DistributionSpec<S>,
    rng: ChaCha8Rng,
}

impl<'a, S: Scalar> DrawStream<'a, S> {
    pub fn new(dist: &'a DistributionSpec<S>, seed: u64, stream: u64) -> Result<Self> {
        dist.validate()?;
        Ok(DrawStream {
            dist,
            rng: ChaCha8Rng::seed_from_u64(splitmix(seed, stream)),
        })
    }

    fn uniform01(&mut self) -> f64 {
        // 53 uniform bits; the canonical double in [0, 1).
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    pub fn draw(&mut self) -> UserPoint<S> {
        match self.dist {
            DistributionSpec::PointMass { z } => z.clone(),
            DistributionSpec::UniformOverSample { sample } => {
                let u = self.uniform01();
                let idx = ((u * sample.len() as f64) as usize).min(sample.len() - 1);
                sample.points()[idx].clone()
            }
            DistributionSpec::UniformSegments { segments } => {
                // Inverse CDF over segment masses, then a uniform position.
                let pick = S::from_f64(self.uniform01());
                let u_pos = self.uniform01();
                let mut cumulative = S::zero();
                let mut chosen = segments.len() - 1;
                for (i, seg) in segments.iter().enumerate() {
                    cumulative = cumulative + seg.mass.clone();
                    if pick < cumulative {
                        chosen = i;
                        break;
                    }
                }
                let seg = &segments[chosen];
                let x =
                    seg.x_lo.clone() + S::from_f64(u_pos) * (seg.x_hi.clone() - seg.x_lo.clone());
                UserPoint {
                    features: vec![x],
                    label: seg.label.clone(),
                    tolerance: seg.tolerance.clone(),
                }
            }
            DistributionSpec::GaussianRegression {
                x_lo,
                x_hi,
                slope,
                intercept,
                noise_sd,
                tolerance,
            } => {
                let ux = self.uniform01();
                // Box-Muller; consumes two uniforms per draw.
                let u1 = self.uniform01().max(f64::MIN_POSITIVE);
                let u2 = self.uniform01();
                let normal = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                let x = x_lo.clone() + S::from_f64(ux) * (x_hi.clone() - x_lo.clone());
                let label = slope.clone() * x.clone()
                    + intercept.clone()
                    + noise_sd.clone() * S::from_f64(normal);
                UserPoint {
                    features: vec![x],
                    label,
                    tolerance: tolerance.clone(),
                }
            }
        }
    }
}

fn splitmix(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw `m` independent points; deterministic under a fixed seed.
pub fn draw_sample<S: Scalar>(
    dist: &DistributionSpec<S>,
    m: usize,
    seed: u64,
) -> Result<Sample<S>> {
    if m == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut stream = DrawStream::new(dist, seed, 0)?;
    Sample::new((0..m).map(|_| stream.draw()).collect())
}

/// The population behind the `example41` scenario: half the users sit on
/// `[0, 1)` with label 0, half on `[1, 2]` with label 1, all with tolerance
/// one half.
pub fn example41_distribution<S: Scalar>() -> DistributionSpec<S> {
    let half = S::from_int_ratio(1, 2);
    DistributionSpec::UniformSegments {
        segments: vec![
            Segment {
                x_lo: S::zero(),
                x_hi: S::one(),
                label: S::zero(),
                tolerance: half.clone(),
                mass: half.clone(),
            },
            Segment {
                x_lo: S::one(),
                x_hi: S::from_u64(2),
                label: S::one(),
                tolerance: half.clone(),
                mass: half,
            },
        ],
    }
}

/// The two members of the relabeling class over a support sample: both
/// predict the upper-interval indicator off the support, and predict a flat
/// 0 (respectively 1) on every supported instance.
pub fn example41_class1_members<S: Scalar>(support: &Sample<S>) -> Vec<Hypothesis<S>> {
    let base = Hypothesis::IntervalIndicator {
        lo: S::one(),
        hi: S::from_u64(2),
        inclusive_lo: true,
        inclusive_hi: true,
    };
    let keys: Vec<Vec<S>> = support
        .points()
        .iter()
        .map(|z| z.features.clone())
        .collect();
    let to_value = |value: S| -> Hypothesis<S> {
        Hypothesis::SampleOverride {
            base: Box::new(base.clone()),
            overrides: keys.iter().map(|k| (k.clone(), value.clone())).collect(),
        }
    };
    vec![to_value(S::zero()), to_value(S::one())]
}

/// Build the three-player `example41` game over a drawn sample.
///
/// Player 0's class holds the two relabeling hypotheses over the sample;
/// players 1 and 2 both choose between the `[0, 1)` and `[1, 2]` indicator
/// predictors. The returned profile is (relabel-to-0, upper, upper).
///
/// Note that with the inclusive tolerance of one half, both indicator
/// predictors satisfy every user in the population support: predicting 0 on
/// a label-0 user and predicting 1 on a label-1 user are both exact, and
/// predicting 0 on a label-1 user misses by 1. A label-0 user off `[1, 2]`
/// is predicted 0 by the upper indicator, which is within tolerance, so
/// off-support misses only occur on relabeled sample instances.
pub fn make_example41<S: Scalar>(
    sample: Sample<S>,
) -> Result<(EmpiricalGame<S>, StrategyProfile<S>, DistributionSpec<S>)> {
    if sample.dimension() != 1 {
        return Err(Error::InvalidInput(
            "example41 expects one-dimensional instances".into(),
        ));
    }
    let half = S::from_int_ratio(1, 2);
    for z in sample.points() {
        let x = &z.features[0];
        let in_range = *x >= S::zero() && *x <= S::from_u64(2);
        let label_ok = z.label == S::zero() || z.label == S::one();
        // Labels must match their segment.
        let segment_ok = if z.label == S::zero() {
            *x < S::one()
        } else {
            *x >= S::one()
        };
        if !in_range || !label_ok || !segment_ok || z.tolerance != half {
            return Err(Error::InvalidInput(
                "sample point outside the example41 support".into(),
            ));
        }
    }

    let class1_members = example41_class1_members(&sample);
    let relabel_to_zero = class1_members[0].clone();
    let lower = Hypothesis::IntervalIndicator {
        lo: S::zero(),
        hi: S::one(),
        inclusive_lo: true,
        inclusive_hi: false,
    };
    let upper = Hypothesis::IntervalIndicator {
        lo: S::one(),
        hi: S::from_u64(2),
        inclusive_lo: true,
        inclusive_hi: true,
    };
    let indicator_class = HypothesisClass {
        kind: ClassKind::FiniteList {
            members: vec![lower, upper.clone()],
        },
        declared_pdim: Some(1),
    };
    let class1 = HypothesisClass {
        kind: ClassKind::Example41 {
            support: sample.clone(),
        },
        declared_pdim: None,
    };
    let game = EmpiricalGame::new(
        sample,
        vec![class1, indicator_class.clone(), indicator_class],
    )?;
    let profile = StrategyProfile::new(vec![relabel_to_zero, upper.clone(), upper]);
    Ok((game, profile, example41_distribution()))
}

/// Empirical frequency, over seeded trials, of fair-coin samples of size `m`
/// whose mean lies strictly between one half and three quarters.
pub fn simulate_claim_a6(trials: u64, m: u64, seed: u64) -> Result<f64> {
    if m < 15 {
        return Err(Error::InvalidInput(
            "the coin simulation is stated for m of at least 15".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 1));
    let mut hits = 0u64;
    let mut pending_bits = 0u64;
    let mut bits_left = 0u32;
    for _ in 0..trials {
        let mut successes = 0u64;
        for _ in 0..m {
            if bits_left == 0 {
                pending_bits = rng.next_u64();
                bits_left = 64;
            }
            successes += pending_bits & 1;
            pending_bits >>= 1;
            bits_left -= 1;
        }
        // Strict inequalities: 1/2 < successes/m < 3/4.
        if 2 * successes > m && 4 * successes < 3 * m {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Q;
    use crate::model::{empirical_payoffs, payoff_weights, satisfies};

    fn q(text: &str) -> Q {
        <Q as Scalar>::parse_text(text).unwrap()
    }

    #[test]
    fn point_mass_draws_copies() {
        let z = UserPoint::new(vec![q("1"), q("2")], q("3"), q("0.5")).unwrap();
        let dist = DistributionSpec::PointMass { z: z.clone() };
        let sample = draw_sample(&dist, 5, 7).unwrap();
        assert_eq!(sample.len(), 5);
        assert!(sample.points().iter().all(|p| *p == z));
    }

    #[test]
    fn same_seed_same_sample() {
        let dist = example41_distribution::<Q>();
        let a = draw_sample(&dist, 50, 123).unwrap();
        let b = draw_sample(&dist, 50, 123).unwrap();
        assert_eq!(a, b);
        let c = draw_sample(&dist, 50, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn label_balance_over_seeds() {
        // Fraction of label-1 points within [0.45, 0.55] for at least 99 of
        // 100 fixed seeds at m = 1000.
        let dist = example41_distribution::<f64>();
        let mut ok = 0;
        for seed in 0..100u64 {
            let sample = draw_sample(&dist, 1000, seed).unwrap();
            let ones = sample.points().iter().filter(|z| z.label == 1.0).count() as f64;
            let frac = ones / 1000.0;
            if (0.45..=0.55).contains(&frac) {
                ok += 1;
            }
        }
        assert!(ok >= 99, "only {ok}/100 seeds balanced");
    }

    #[test]
    fn example41_members_relabel_the_support() {
        let sample = Sample::new(vec![
            UserPoint::new(vec![q("0.25")], q("0"), q("0.5")).unwrap(),
            UserPoint::new(vec![q("1.5")], q("1"), q("0.5")).unwrap(),
        ])
        .unwrap();
        let members = example41_class1_members(&sample);
        // Relabel-to-0 predicts 0 on sampled instances, indicator off-sample.
        assert_eq!(members[0].evaluate(&[q("1.5")]).unwrap(), q("0"));
        assert_eq!(members[0].evaluate(&[q("1.25")]).unwrap(), q("1"));
        assert_eq!(members[0].evaluate(&[q("0.75")]).unwrap(), q("0"));
        // Relabel-to-1 predicts 1 on sampled instances.
        assert_eq!(members[1].evaluate(&[q("0.25")]).unwrap(), q("1"));
    }

    #[test]
    fn example41_game_payoffs_match_per_point_summation() {
        let dist = example41_distribution::<Q>();
        let sample = draw_sample(&dist, 40, 99).unwrap();
        let (game, profile, _) = make_example41(sample.clone()).unwrap();
        let engine = empirical_payoffs(&game, &profile).unwrap();

        // Independent per-point loop over satisfaction bits.
        let mut sums = vec![q("0"); 3];
        for z in sample.points() {
            let hits: Vec<bool> = profile
                .strategies
                .iter()
                .map(|h| satisfies(z, h).unwrap())
                .collect();
            let count = hits.iter().filter(|&&b| b).count();
            for (i, hit) in hits.iter().enumerate() {
                if *hit {
                    sums[i] = sums[i].clone() + Q::from_int_ratio(1, count as i128);
                }
            }
        }
        let m = Q::from_usize(sample.len());
        for (engine_value, sum) in engine.values().iter().zip(&sums) {
            assert_eq!(*engine_value, sum.clone() / m.clone());
        }
        // Sanity: the weights of a single point line up with payoff_weights.
        let w = payoff_weights(&sample.points()[0], &profile).unwrap();
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn example41_rejects_off_support_points() {
        let sample =
            Sample::new(vec![UserPoint::new(vec![q("3")], q("1"), q("0.5")).unwrap()]).unwrap();
        assert!(make_example41(sample).is_err());
        let sample = Sample::new(vec![
            UserPoint::new(vec![q("0.5")], q("1"), q("0.5")).unwrap()
        ])
        .unwrap();
        assert!(make_example41(sample).is_err(), "label 1 below the split");
    }

    #[test]
    fn claim_a6_requires_fifteen_coins() {
        assert!(simulate_claim_a6(10, 14, 0).is_err());
    }

    #[test]
    fn claim_a6_strictness_excludes_exact_half() {
        // With m = 16, a run of exactly 8 successes has mean exactly 1/2 and
        // must not count. Probability of mean in (1/2, 3/4) for m = 16 is
        // sum of C(16,k)/2^16 for k in 9..=11; the estimate must sit near it
        // rather than near the value that would include k = 8.
        let est = simulate_claim_a6(200_000, 16, 5).unwrap();
        let exact: f64 = (9..=11).map(|k| binomial(16, k)).sum::<f64>() / 65536.0;
        let with_boundary = exact + binomial(16, 8) / 65536.0;
        assert!((est - exact).abs() < 0.01);
        assert!((est - with_boundary).abs() > 0.05);
    }

    fn binomial(n: u64, k: u64) -> f64 {
        let mut acc = 1f64;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    }

    #[test]
    fn segment_draws_pass_a_chi_square_fit() {
        // Four segments with distinct labels and masses 0.1/0.2/0.3/0.4;
        // the label identifies the segment. Critical value for three
        // degrees of freedom at significance 0.001 is 16.266.
        let masses = [0.1, 0.2, 0.3, 0.4];
        let dist = DistributionSpec::UniformSegments {
            segments: masses
                .iter()
                .enumerate()
                .map(|(i, &mass)| Segment {
                    x_lo: i as f64,
                    x_hi: i as f64 + 1.0,
                    label: i as f64,
                    tolerance: 0.5,
                    mass,
                })
                .collect(),
        };
        let m = 10_000usize;
        let sample = draw_sample(&dist, m, 31).unwrap();
        let mut observed = [0f64; 4];
        for z in sample.points() {
            observed[z.label as usize] += 1.0;
        }
        let statistic: f64 = masses
            .iter()
            .zip(observed.iter())
            .map(|(&mass, &obs)| {
                let expected = mass * m as f64;
                (obs - expected).powi(2) / expected
            })
            .sum();
        assert!(statistic < 16.266, "chi-square statistic {statistic}");
    }

    #[test]
    fn gaussian_regression_draws_follow_the_line() {
        let dist = DistributionSpec::GaussianRegression {
            x_lo: 0.0f64,
            x_hi: 4.0,
            slope: 2.0,
            intercept: -1.0,
            noise_sd: 0.25,
            tolerance: 0.5,
        };
        let sample = draw_sample(&dist, 2_000, 12).unwrap();
        let mut mean_residual = 0.0;
        let mut outliers = 0;
        for z in sample.points() {
            let x = z.features[0];
            assert!((0.0..=4.0).contains(&x));
            assert_eq!(z.tolerance, 0.5);
            let residual = z.label - (2.0 * x - 1.0);
            mean_residual += residual;
            if residual.abs() > 5.0 * 0.25 {
                outliers += 1;
            }
        }
        mean_residual /= 2_000.0;
        assert!(mean_residual.abs() < 0.05, "bias {mean_residual}");
        assert!(outliers <= 2, "{outliers} residuals beyond five sigma");
    }

    #[test]
    fn segment_masses_must_sum_to_one() {
        let dist = DistributionSpec::UniformSegments {
            segments: vec![Segment {
                x_lo: q("0"),
                x_hi: q("1"),
                label: q("0"),
                tolerance: q("0.5"),
                mass: q("0.5"),
            }],
        };
        assert!(matches!(dist.validate(), Err(Error::Config(_))));
    }
}
