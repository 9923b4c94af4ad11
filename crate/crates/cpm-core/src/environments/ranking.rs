//! Online ranking with relevance feedback on the top item.
//!
//! The learner ranks `n` fixed items; the adversary draws a binary
//! relevance vector; the reward is a position-discounted linear gain
//! `f(x) . theta` and the only feedback is the relevance of the top-ranked
//! item. Sorting items by decreasing `theta` maximizes the reward
//! (rearrangement), and the global second best is always an adjacent
//! transposition of the sorted order.

use alloc::vec::Vec;
use core::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{CpmError, Result};
use crate::game::{ActionCount, Game, Oracle};
use crate::math;

/// A ranking of `n` items: `items()[p]` is the item placed at position `p`
/// (position 0 is the top).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    /// Validates that `items` is a permutation of `0..items.len()`.
    pub fn new(items: Vec<usize>) -> Result<Self> {
        let n = items.len();
        let mut seen = alloc::vec![false; n];
        for &it in &items {
            if it >= n || seen[it] {
                return Err(CpmError::invalid("items", "not a permutation"));
            }
            seen[it] = true;
        }
        Ok(Ranking(items))
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn top_item(&self) -> usize {
        self.0[0]
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, it) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{it}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Position-discounted gain `1 / log2(position + 1)` for 1-based positions.
pub fn dcg_gain(position: usize, n_items: usize) -> Result<f64> {
    if position < 1 || position > n_items {
        return Err(CpmError::invalid("position", "must lie in 1..=n"));
    }
    Ok(1.0 / math::log2((position + 1) as f64))
}

/// The ranking game: all `n!` permutations, top-item feedback, linear
/// position-discounted reward.
#[derive(Clone, Debug)]
pub struct RankingGame {
    n: usize,
    gains: Vec<f64>,
}

impl RankingGame {
    /// `gains[p]` is the gain of (0-based) position `p`; gains must be
    /// nonincreasing and positive.
    pub fn new(n: usize, gains: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(CpmError::invalid("n", "must be at least 1"));
        }
        if n > 34 {
            // action_count is reported as u128; 35! overflows
            return Err(CpmError::invalid("n", "at most 34 items supported"));
        }
        if gains.len() != n {
            return Err(CpmError::invalid("gains", "length must equal n"));
        }
        if gains.windows(2).any(|w| w[0] < w[1]) || gains.iter().any(|&g| g <= 0.0) {
            return Err(CpmError::invalid(
                "gains",
                "must be nonincreasing and positive",
            ));
        }
        Ok(RankingGame { n, gains })
    }

    pub fn with_default_gains(n: usize) -> Result<Self> {
        let gains = (1..=n).map(|p| dcg_gain(p, n)).collect::<Result<_>>()?;
        Self::new(n, gains)
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// All permutations in lexicographic order. `n!` of them; callers cap n.
    pub fn enumerate_actions(&self) -> impl Iterator<Item = Ranking> {
        (0..self.n).permutations(self.n).map(Ranking)
    }

    /// Canonical observable-set candidates: for each item k, the ranking
    /// that puts k on top and keeps the rest in ascending order.
    pub fn sigma_candidates(&self) -> impl Iterator<Item = Ranking> + '_ {
        (0..self.n).map(move |k| {
            let mut items = Vec::with_capacity(self.n);
            items.push(k);
            items.extend((0..self.n).filter(|&i| i != k));
            Ranking(items)
        })
    }

    pub fn oracles(&self) -> RankingOracles {
        RankingOracles {
            n: self.n,
            gains: self.gains.clone(),
        }
    }
}

impl Game for RankingGame {
    type Action = Ranking;

    fn dimension(&self) -> usize {
        self.n
    }

    fn feedback_matrix(&self, action: &Ranking) -> DMatrix<f64> {
        let mut row = DMatrix::<f64>::zeros(1, self.n);
        row[(0, action.top_item())] = 1.0;
        row
    }

    // Summed in position order so that rankings differing only in the
    // placement of equal-theta items produce bit-identical values; exact
    // tie detection in gap profiles depends on this.
    fn expected_reward(&self, action: &Ranking, theta: &[f64]) -> f64 {
        self.gains
            .iter()
            .zip(action.items())
            .map(|(g, &item)| g * theta[item])
            .sum()
    }

    fn realized_reward(&self, action: &Ranking, theta: &[f64]) -> f64 {
        self.expected_reward(action, theta)
    }

    fn lipschitz_constant(&self) -> f64 {
        math::sqrt(self.gains.iter().map(|g| g * g).sum())
    }

    fn reward_ceiling(&self) -> f64 {
        self.gains.iter().sum()
    }

    fn action_count(&self) -> ActionCount {
        let mut count: u128 = 1;
        for k in 2..=self.n as u128 {
            count *= k;
        }
        ActionCount::Finite(count)
    }
}

/// Sorting-based oracles for the ranking game.
#[derive(Clone, Debug)]
pub struct RankingOracles {
    n: usize,
    gains: Vec<f64>,
}

/// Permutation sorting items by decreasing `theta`, ties broken by
/// ascending item index. Maximizes the discounted gain for any
/// nonincreasing gain vector.
pub fn ranking_argmax(theta: &[f64]) -> Ranking {
    let mut items: Vec<usize> = (0..theta.len()).collect();
    items.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]).then(a.cmp(&b)));
    Ranking(items)
}

/// The best ranking other than `best`: the adjacent transposition of the
/// sorted order with the least reward drop. `best` must be
/// `ranking_argmax(theta)`.
pub fn ranking_secondmax(gains: &[f64], theta: &[f64], best: &Ranking) -> Result<Ranking> {
    let n = best.items().len();
    if n < 2 {
        return Err(CpmError::NoSecondAction);
    }
    let items = best.items();
    let mut best_pos = 0usize;
    let mut best_drop = f64::INFINITY;
    for k in 0..n - 1 {
        let drop = (gains[k] - gains[k + 1]) * (theta[items[k]] - theta[items[k + 1]]);
        if drop < best_drop {
            best_drop = drop;
            best_pos = k;
        }
    }
    let mut swapped = items.to_vec();
    swapped.swap(best_pos, best_pos + 1);
    Ok(Ranking(swapped))
}

impl Oracle for RankingOracles {
    type Action = Ranking;

    fn argmax(&self, theta: &[f64]) -> Ranking {
        ranking_argmax(theta)
    }

    fn has_secondmax(&self) -> bool {
        self.n >= 2
    }

    fn arg_secondmax(&self, theta: &[f64], excluded: &Ranking) -> Result<Ranking> {
        let best = ranking_argmax(theta);
        if &best != excluded {
            // the global maximizer is itself admissible
            return Ok(best);
        }
        ranking_secondmax(&self.gains, theta, &best)
    }
}

/// Builds the game, its oracles, and the canonical observable-set
/// candidates. Requires `n >= 2` so that a second-best action exists.
pub fn build_ranking_game(
    n: usize,
    gains: Option<Vec<f64>>,
) -> Result<(RankingGame, RankingOracles, Vec<Ranking>)> {
    if n < 2 {
        return Err(CpmError::invalid(
            "n",
            "ranking game needs at least 2 items",
        ));
    }
    let game = match gains {
        Some(g) => RankingGame::new(n, g)?,
        None => RankingGame::with_default_gains(n)?,
    };
    let oracles = game.oracles();
    let candidates = game.sigma_candidates().collect();
    Ok((game, oracles, candidates))
}
