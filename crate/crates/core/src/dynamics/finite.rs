//! Exact finite-game engine over precomputed satisfaction bitmasks.
//!
//! Payoffs of a finite empirical game are rationals with denominator
//! `m * lcm(1..=N)`; representing them as scaled integers makes profile
//! enumeration a pure integer computation, identical in both arithmetic
//! modes.

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::model::{satisfies, EmpiricalGame, Hypothesis};

const MAX_PLAYERS_FOR_TABLE: usize = 40;

pub(crate) struct SatTable {
    /// members[i][k][j] = does member k of player i satisfy point j.
    members: Vec<Vec<Vec<bool>>>,
    points: usize,
    /// lcm of 1..=N; `unit / c` is the scaled share of a point split c ways.
    unit: i128,
    /// Scaled harmonic prefix: `phi[c] = sum_{k<=c} unit / k`.
    phi: Vec<i128>,
}

impl SatTable {
    pub fn build<S: Scalar>(
        game: &EmpiricalGame<S>,
        member_lists: &[Vec<Hypothesis<S>>],
    ) -> Result<SatTable> {
        let n = member_lists.len();
        if n > MAX_PLAYERS_FOR_TABLE {
            return Err(Error::Resource(format!(
                "finite-game table supports up to {MAX_PLAYERS_FOR_TABLE} players, got {n}"
            )));
        }
        let unit = lcm_up_to(n);
        let phi: Vec<i128> = (0..=n)
            .scan(0i128, |acc, c| {
                if c > 0 {
                    *acc += unit / c as i128;
                }
                Some(*acc)
            })
            .collect();
        let mut members = Vec::with_capacity(n);
        for list in member_lists {
            let mut per_member = Vec::with_capacity(list.len());
            for h in list {
                let mask = game
                    .sample()
                    .points()
                    .iter()
                    .map(|z| satisfies(z, h))
                    .collect::<Result<Vec<bool>>>()?;
                per_member.push(mask);
            }
            members.push(per_member);
        }
        Ok(SatTable {
            members,
            points: game.sample().len(),
            unit,
            phi,
        })
    }

    pub fn num_players(&self) -> usize {
        self.members.len()
    }

    pub fn member_count(&self, player: usize) -> usize {
        self.members[player].len()
    }

    /// Denominator of every scaled payoff and potential value.
    #[cfg(test)]
    pub fn denominator(&self) -> i128 {
        self.unit * self.points as i128
    }

    /// Satisfying-player count per point for a profile of member indices.
    pub fn counts(&self, profile: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.points];
        for (player, &member) in profile.iter().enumerate() {
            for (j, &hit) in self.members[player][member].iter().enumerate() {
                counts[j] += u32::from(hit);
            }
        }
        counts
    }

    /// Scaled payoff of one player given precomputed counts.
    pub fn payoff_scaled(&self, profile: &[usize], counts: &[u32], player: usize) -> i128 {
        self.members[player][profile[player]]
            .iter()
            .zip(counts.iter())
            .filter(|(hit, _)| **hit)
            .map(|(_, &c)| self.unit / c as i128)
            .sum()
    }

    /// Scaled potential given counts: sum over points of the harmonic prefix
    /// of the satisfier count.
    pub fn potential_scaled(&self, counts: &[u32]) -> i128 {
        counts.iter().map(|&c| self.phi[c as usize]).sum()
    }

    /// Scaled payoff of `player` after unilaterally switching to
    /// `alternative`, given the counts of the current profile.
    pub fn deviation_payoff_scaled(
        &self,
        profile: &[usize],
        counts: &[u32],
        player: usize,
        alternative: usize,
    ) -> i128 {
        let current = &self.members[player][profile[player]];
        let switched = &self.members[player][alternative];
        let mut total = 0i128;
        for j in 0..self.points {
            if switched[j] {
                let c = counts[j] - u32::from(current[j]) + 1;
                total += self.unit / c as i128;
            }
        }
        total
    }

    /// Does some member strictly improve on the player's current choice?
    pub fn has_strict_improvement(&self, profile: &[usize], counts: &[u32], player: usize) -> bool {
        let current = self.payoff_scaled(profile, counts, player);
        (0..self.member_count(player)).any(|alt| {
            alt != profile[player]
                && self.deviation_payoff_scaled(profile, counts, player, alt) > current
        })
    }
}

fn lcm_up_to(n: usize) -> i128 {
    let mut acc: i128 = 1;
    for k in 2..=n as i128 {
        acc = acc / gcd(acc, k) * k;
    }
    acc
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Q;
    use crate::model::{HypothesisClass, Sample, UserPoint};

    fn q(text: &str) -> Q {
        <Q as Scalar>::parse_text(text).unwrap()
    }

    fn table() -> SatTable {
        let sample = Sample::new(vec![
            UserPoint::new(vec![q("1")], q("0"), q("0.5")).unwrap(),
            UserPoint::new(vec![q("1")], q("1"), q("0.5")).unwrap(),
        ])
        .unwrap();
        let members = vec![
            vec![Hypothesis::constant(q("0")), Hypothesis::constant(q("1"))],
            vec![Hypothesis::constant(q("0")), Hypothesis::constant(q("1"))],
        ];
        let game = EmpiricalGame::new(
            sample,
            members
                .iter()
                .map(|m| HypothesisClass::finite(m.clone()))
                .collect(),
        )
        .unwrap();
        SatTable::build(&game, &members).unwrap()
    }

    #[test]
    fn scaled_payoffs_match_hand_computation() {
        let t = table();
        // unit = lcm(1, 2) = 2, denominator = 2 * 2 = 4.
        assert_eq!(t.denominator(), 4);
        // Both players at constant 0: share point 0, miss point 1.
        let profile = [0, 0];
        let counts = t.counts(&profile);
        assert_eq!(counts, vec![2, 0]);
        // Payoff 1/4 scaled by 4 = 1.
        assert_eq!(t.payoff_scaled(&profile, &counts, 0), 1);
        // Deviating to constant 1 takes point 1 alone: payoff 1/2 -> 2.
        assert_eq!(t.deviation_payoff_scaled(&profile, &counts, 0, 1), 2);
        assert!(t.has_strict_improvement(&profile, &counts, 0));

        // Split profile: each player alone on a point.
        let profile = [0, 1];
        let counts = t.counts(&profile);
        assert_eq!(t.payoff_scaled(&profile, &counts, 0), 2);
        assert_eq!(t.payoff_scaled(&profile, &counts, 1), 2);
        assert!(!t.has_strict_improvement(&profile, &counts, 0));
        assert!(!t.has_strict_improvement(&profile, &counts, 1));
    }

    #[test]
    fn potential_tracks_harmonic_prefix() {
        let t = table();
        // (0,0): counts (2,0): phi = 2/1 + 2/2 = 3; (0,1): counts (1,1):
        // phi = 2 + 2 = 4.
        assert_eq!(t.potential_scaled(&t.counts(&[0, 0])), 3);
        assert_eq!(t.potential_scaled(&t.counts(&[0, 1])), 4);
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_up_to(1), 1);
        assert_eq!(lcm_up_to(5), 60);
        assert_eq!(lcm_up_to(10), 2520);
    }
}
