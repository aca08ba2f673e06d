//! Monte Carlo estimation of population payoffs.

use rayon::prelude::*;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::model::{payoff_weights, PayoffVector, StrategyProfile};
use crate::scenarios::{DistributionSpec, DrawStream};

/// Estimated population payoffs with per-coordinate standard errors.
#[derive(Debug, Clone)]
pub struct MonteCarloEstimate<S: Scalar> {
    pub payoffs: PayoffVector<S>,
    pub std_errors: Vec<f64>,
    pub draws: u64,
}

const BLOCK: u64 = 4096;

/// Estimate each player's expected payoff under the profile by sampling the
/// distribution.
///
/// Draws are split into fixed-size blocks whose substreams derive from the
/// seed alone, and block results are combined in block order, so the output
/// is identical regardless of how many worker threads run the blocks.
pub fn monte_carlo_payoffs<S: Scalar>(
    dist: &DistributionSpec<S>,
    profile: &StrategyProfile<S>,
    draws: u64,
    seed: u64,
) -> Result<MonteCarloEstimate<S>> {
    if draws == 0 {
        return Err(Error::InvalidInput("need at least one draw".into()));
    }
    if profile.is_empty() {
        return Err(Error::InvalidInput("profile must not be empty".into()));
    }
    dist.validate()?;

    let n = profile.len();
    let num_blocks = draws.div_ceil(BLOCK);
    let blocks: Vec<(Vec<S>, Vec<f64>)> = (0..num_blocks)
        .into_par_iter()
        .map(|block| -> Result<(Vec<S>, Vec<f64>)> {
            let mut stream = DrawStream::new(dist, seed, block + 1)?;
            let count = if block == num_blocks - 1 && !draws.is_multiple_of(BLOCK) {
                draws % BLOCK
            } else {
                BLOCK
            };
            let mut sums = vec![S::zero(); n];
            let mut sq_sums = vec![0.0f64; n];
            for _ in 0..count {
                let z = stream.draw();
                let weights = payoff_weights(&z, profile)?;
                for i in 0..n {
                    let w = weights.get(i);
                    sums[i] = sums[i].clone() + w.clone();
                    let wf = w.to_f64();
                    sq_sums[i] += wf * wf;
                }
            }
            Ok((sums, sq_sums))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums = vec![S::zero(); n];
    let mut sq_sums = vec![0.0f64; n];
    for (block_sums, block_sq) in blocks {
        for i in 0..n {
            sums[i] = sums[i].clone() + block_sums[i].clone();
            sq_sums[i] += block_sq[i];
        }
    }

    let denom = S::from_u64(draws);
    let means: Vec<S> = sums.into_iter().map(|s| s / denom.clone()).collect();
    let std_errors = means
        .iter()
        .zip(sq_sums.iter())
        .map(|(mean, sq)| {
            let mean_f = mean.to_f64();
            let variance = (sq / draws as f64 - mean_f * mean_f).max(0.0);
            (variance / draws as f64).sqrt()
        })
        .collect();
    Ok(MonteCarloEstimate {
        payoffs: PayoffVector::from_values(means),
        std_errors,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hypothesis, Sample, UserPoint};

    #[test]
    fn point_mass_reproduces_single_point_weights() {
        let z = UserPoint::new(vec![1.0], 0.0, 0.5).unwrap();
        let dist = DistributionSpec::PointMass { z: z.clone() };
        let profile =
            StrategyProfile::new(vec![Hypothesis::constant(0.0), Hypothesis::constant(2.0)]);
        let est = monte_carlo_payoffs(&dist, &profile, 5000, 3).unwrap();
        let direct = payoff_weights(&z, &profile).unwrap();
        assert_eq!(est.payoffs.values(), direct.values());
        assert!(est.std_errors.iter().all(|se| *se == 0.0));
    }

    #[test]
    fn single_player_satisfying_everything_gets_one() {
        let sample = Sample::new(vec![
            UserPoint::new(vec![0.0], 0.0, 1.0).unwrap(),
            UserPoint::new(vec![1.0], 0.5, 1.0).unwrap(),
        ])
        .unwrap();
        let dist = DistributionSpec::UniformOverSample { sample };
        let profile = StrategyProfile::new(vec![Hypothesis::constant(0.25)]);
        let est = monte_carlo_payoffs(&dist, &profile, 2000, 11).unwrap();
        assert_eq!(est.payoffs.values(), &[1.0]);
        assert_eq!(est.std_errors[0], 0.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let dist = crate::scenarios::example41_distribution::<f64>();
        let profile =
            StrategyProfile::new(vec![Hypothesis::constant(0.0), Hypothesis::constant(1.0)]);
        let a = monte_carlo_payoffs(&dist, &profile, 20_000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool
            .install(|| monte_carlo_payoffs(&dist, &profile, 20_000, 42))
            .unwrap();
        assert_eq!(a.payoffs.values(), b.payoffs.values());
        assert_eq!(a.std_errors, b.std_errors);
    }
}
