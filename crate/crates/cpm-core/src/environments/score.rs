//! Continuous ranking: the learner scores items with a vector in `[0,1]^n`,
//! items are shown sorted by score, relevance feedback arrives for the top
//! item, and performance is squared loss against the binary relevance
//! vector, negated so that larger is better.
//!
//! Only the argmax oracle exists here: a continuous action space has no
//! discrete second best, so this game runs under PEGE but not under gap
//! estimation or PEGE2.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{CpmError, Result};
use crate::game::{ActionCount, Game, Oracle};
use crate::math;

/// A score vector in `[0,1]^n`.
#[derive(Clone, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(CpmError::invalid("scores", "must be non-empty"));
        }
        if scores.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
            return Err(CpmError::invalid("scores", "components must lie in [0,1]"));
        }
        Ok(ScoreVector(scores))
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    /// Item with the highest score, ties broken by ascending index.
    pub fn top_item(&self) -> usize {
        let mut best = 0usize;
        for i in 1..self.0.len() {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl fmt::Display for ScoreVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for ScoreVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Componentwise projection onto `[0,1]^n`; the maximizer of the concave
/// mean reward over the cube.
pub fn score_ranking_argmax(theta: &[f64]) -> ScoreVector {
    ScoreVector(theta.iter().map(|&x| x.clamp(0.0, 1.0)).collect())
}

#[derive(Clone, Debug)]
pub struct ScoreRankingGame {
    n: usize,
}

impl ScoreRankingGame {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(CpmError::invalid("n", "must be at least 1"));
        }
        Ok(ScoreRankingGame { n })
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    /// One-hot score vectors: the k-th candidate scores item k with 1 and
    /// the rest with 0, placing each item on top in turn. Their stacked
    /// feedback rows form a permutation matrix.
    pub fn sigma_candidates(&self) -> impl Iterator<Item = ScoreVector> + '_ {
        (0..self.n).map(move |k| {
            let mut v = alloc::vec![0.0; self.n];
            v[k] = 1.0;
            ScoreVector(v)
        })
    }

    pub fn oracles(&self) -> ScoreRankingOracles {
        ScoreRankingOracles { n: self.n }
    }
}

impl Game for ScoreRankingGame {
    type Action = ScoreVector;

    fn dimension(&self) -> usize {
        self.n
    }

    fn feedback_matrix(&self, action: &ScoreVector) -> DMatrix<f64> {
        let mut row = DMatrix::<f64>::zeros(1, self.n);
        row[(0, action.top_item())] = 1.0;
        row
    }

    /// Mean reward for binary relevance draws:
    /// `-||x||^2 + 2 x . theta - 1 . theta`.
    fn expected_reward(&self, action: &ScoreVector, theta: &[f64]) -> f64 {
        let x = action.scores();
        let mut norm2 = 0.0;
        let mut dot = 0.0;
        let mut ones = 0.0;
        for i in 0..self.n {
            norm2 += x[i] * x[i];
            dot += x[i] * theta[i];
            ones += theta[i];
        }
        -norm2 + 2.0 * dot - ones
    }

    fn realized_reward(&self, action: &ScoreVector, theta: &[f64]) -> f64 {
        -action
            .scores()
            .iter()
            .zip(theta)
            .map(|(x, t)| (x - t) * (x - t))
            .sum::<f64>()
    }

    fn lipschitz_constant(&self) -> f64 {
        // |r(x, t1) - r(x, t2)| = |(2x - 1).(t1 - t2)| <= sqrt(n) ||t1 - t2||
        math::sqrt(self.n as f64)
    }

    fn reward_ceiling(&self) -> f64 {
        // the mean reward is nonpositive and vanishes at binary theta = x
        0.0
    }

    fn action_count(&self) -> ActionCount {
        ActionCount::Infinite
    }
}

#[derive(Clone, Debug)]
pub struct ScoreRankingOracles {
    n: usize,
}

impl Oracle for ScoreRankingOracles {
    type Action = ScoreVector;

    fn argmax(&self, theta: &[f64]) -> ScoreVector {
        debug_assert_eq!(theta.len(), self.n);
        score_ranking_argmax(theta)
    }

    fn has_secondmax(&self) -> bool {
        false
    }

    fn arg_secondmax(&self, _theta: &[f64], _excluded: &ScoreVector) -> Result<ScoreVector> {
        Err(CpmError::SecondMaxUnavailable)
    }
}

/// Builds the continuous game, its argmax-only oracle, and the one-hot
/// observable-set candidates.
pub fn build_score_ranking_game(
    n: usize,
) -> Result<(ScoreRankingGame, ScoreRankingOracles, Vec<ScoreVector>)> {
    let game = ScoreRankingGame::new(n)?;
    let oracles = game.oracles();
    let candidates = game.sigma_candidates().collect();
    Ok((game, oracles, candidates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{GlobalObservableSet, DEFAULT_RANK_TOL};
    use alloc::vec;

    #[test]
    fn argmax_is_identity_inside_the_cube() {
        let x = score_ranking_argmax(&[0.3, 0.7]);
        assert_eq!(x.scores(), &[0.3, 0.7]);
    }

    #[test]
    fn argmax_projects_onto_the_cube() {
        let x = score_ranking_argmax(&[1.4, -0.2]);
        assert_eq!(x.scores(), &[1.0, 0.0]);
    }

    #[test]
    fn argmax_at_origin() {
        let x = score_ranking_argmax(&[0.0, 0.0, 0.0]);
        assert_eq!(x.scores(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn one_hot_candidate_feedback_reveals_that_coordinate() {
        let game = ScoreRankingGame::new(3).unwrap();
        let theta = [0.2, 0.8, 0.5];
        for (k, cand) in game.sigma_candidates().enumerate() {
            let fb = game.feedback_matrix(&cand) * nalgebra::DVector::from_row_slice(&theta);
            assert_eq!(fb[0], theta[k]);
        }
    }

    #[test]
    fn observable_set_matches_discrete_ranking_constant() {
        let game = ScoreRankingGame::new(4).unwrap();
        let sigma =
            GlobalObservableSet::find(&game, game.sigma_candidates(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(sigma.size(), 4);
        let expected = 4.0_f64.powf(1.5);
        assert!((sigma.beta_sigma() - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn closed_form_at_the_maximizer() {
        let game = ScoreRankingGame::new(2).unwrap();
        let theta = [0.3, 0.7];
        let x = score_ranking_argmax(&theta);
        let expected = theta.iter().map(|t| t * t).sum::<f64>() - theta.iter().sum::<f64>();
        assert!((game.expected_reward(&x, &theta) - expected).abs() < 1e-15);
    }

    #[test]
    fn maximizer_dominates_nearby_actions() {
        let game = ScoreRankingGame::new(2).unwrap();
        let theta = [0.3, 0.7];
        let best = score_ranking_argmax(&theta);
        let best_val = game.expected_reward(&best, &theta);
        for dx in [-0.1, 0.1] {
            let other = ScoreVector::new(vec![0.3 + dx, 0.7]).unwrap();
            assert!(game.expected_reward(&other, &theta) < best_val);
        }
    }

    #[test]
    fn score_vector_validation() {
        assert!(ScoreVector::new(vec![]).is_err());
        assert!(ScoreVector::new(vec![1.2]).is_err());
        assert!(ScoreVector::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn secondmax_is_unavailable() {
        let oracles = ScoreRankingGame::new(2).unwrap().oracles();
        assert!(!oracles.has_secondmax());
        let x = score_ranking_argmax(&[0.1, 0.2]);
        assert_eq!(
            oracles.arg_secondmax(&[0.1, 0.2], &x).unwrap_err(),
            CpmError::SecondMaxUnavailable
        );
    }
}
