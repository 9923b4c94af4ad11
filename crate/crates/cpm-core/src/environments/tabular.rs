//! Explicit tabular games: a finite action list with per-action feedback
//! matrices and linear reward rows. Test fixture and smallest-possible
//! experiment instance.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{CpmError, Result};
use crate::game::{ActionCount, Game, Oracle};
use crate::math;

/// One tabular action: its feedback transformation and the row defining
/// its linear mean reward `row . theta`.
#[derive(Clone, Debug)]
pub struct TabularAction {
    pub feedback: DMatrix<f64>,
    pub reward_row: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TabularGame {
    dimension: usize,
    actions: Vec<TabularAction>,
    lipschitz: f64,
    ceiling: f64,
}

impl TabularGame {
    pub fn new(dimension: usize, actions: Vec<TabularAction>) -> Result<Self> {
        if dimension == 0 {
            return Err(CpmError::invalid("dimension", "must be positive"));
        }
        if actions.is_empty() {
            return Err(CpmError::invalid("actions", "must be non-empty"));
        }
        for a in &actions {
            if a.feedback.ncols() != dimension {
                return Err(CpmError::DimensionMismatch {
                    expected: dimension,
                    got: a.feedback.ncols(),
                });
            }
            if a.reward_row.len() != dimension {
                return Err(CpmError::DimensionMismatch {
                    expected: dimension,
                    got: a.reward_row.len(),
                });
            }
        }
        let lipschitz = actions
            .iter()
            .map(|a| math::sqrt(a.reward_row.iter().map(|x| x * x).sum()))
            .fold(0.0f64, f64::max);
        // max over theta in [0,1]^n of row . theta, then over actions
        let ceiling = actions
            .iter()
            .map(|a| a.reward_row.iter().map(|&x| x.max(0.0)).sum::<f64>())
            .fold(0.0f64, f64::max);
        Ok(TabularGame {
            dimension,
            actions,
            lipschitz,
            ceiling,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn oracles(&self) -> TabularOracles {
        TabularOracles {
            rows: self.actions.iter().map(|a| a.reward_row.clone()).collect(),
        }
    }
}

impl Game for TabularGame {
    type Action = usize;

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn feedback_matrix(&self, action: &usize) -> DMatrix<f64> {
        self.actions[*action].feedback.clone()
    }

    fn expected_reward(&self, action: &usize, theta: &[f64]) -> f64 {
        self.actions[*action]
            .reward_row
            .iter()
            .zip(theta)
            .map(|(r, t)| r * t)
            .sum()
    }

    fn realized_reward(&self, action: &usize, theta: &[f64]) -> f64 {
        self.expected_reward(action, theta)
    }

    fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    fn reward_ceiling(&self) -> f64 {
        self.ceiling
    }

    fn action_count(&self) -> ActionCount {
        ActionCount::Finite(self.actions.len() as u128)
    }
}

/// Enumeration oracles; ties broken by the first action in list order.
#[derive(Clone, Debug)]
pub struct TabularOracles {
    rows: Vec<Vec<f64>>,
}

impl TabularOracles {
    fn value(&self, index: usize, theta: &[f64]) -> f64 {
        self.rows[index].iter().zip(theta).map(|(r, t)| r * t).sum()
    }
}

impl Oracle for TabularOracles {
    type Action = usize;

    fn argmax(&self, theta: &[f64]) -> usize {
        let mut best = 0usize;
        let mut best_val = self.value(0, theta);
        for i in 1..self.rows.len() {
            let v = self.value(i, theta);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }

    fn has_secondmax(&self) -> bool {
        self.rows.len() >= 2
    }

    fn arg_secondmax(&self, theta: &[f64], excluded: &usize) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            if i == *excluded {
                continue;
            }
            let v = self.value(i, theta);
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((i, v)),
            }
        }
        best.map(|(i, _)| i).ok_or(CpmError::NoSecondAction)
    }
}

/// The canonical two-action instance on a one-dimensional adversary space:
/// action 0 is rewarded by the adversary's mean and reveals the move,
/// action 1 pays nothing and reveals nothing. The gap equals the mean, the
/// Lipschitz constant and the recovery constant are both 1.
pub fn two_action_game() -> (TabularGame, TabularOracles) {
    let actions = alloc::vec![
        TabularAction {
            feedback: DMatrix::from_row_slice(1, 1, &[1.0]),
            reward_row: alloc::vec![1.0],
        },
        TabularAction {
            feedback: DMatrix::from_row_slice(1, 1, &[0.0]),
            reward_row: alloc::vec![0.0],
        },
    ];
    let game = TabularGame::new(1, actions).expect("static construction");
    let oracles = game.oracles();
    (game, oracles)
}
