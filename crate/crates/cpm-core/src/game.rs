//! The CPM game abstraction: learner-side game description, offline
//! oracles, adversary distributions, and exact gap profiles.
//!
//! Learner algorithms may touch a [`Game`] only through its feedback
//! matrices, its reward function evaluated at *their own* estimates, and its
//! declared constants. Evaluating rewards at the adversary's true mean and
//! computing [`GapProfile`]s is simulator/test territory.

use alloc::vec::Vec;
use core::cell::Cell;
use core::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{CpmError, Result};

/// Cardinality of the learner's action set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionCount {
    Finite(u128),
    Infinite,
}

/// A stochastic CPM game as seen by the learner.
///
/// `dimension` is the adversary space dimension `n`; every feedback matrix
/// has exactly `n` columns. `expected_reward` evaluates the mean reward
/// function; `realized_reward` evaluates the per-round reward at a concrete
/// adversary draw and is used by reporting only, never by learners.
pub trait Game {
    type Action: Clone + PartialEq + fmt::Debug;

    fn dimension(&self) -> usize;

    /// The linear transformation applied to the adversary's move when this
    /// action is played; shape `m_x` by `dimension()`.
    fn feedback_matrix(&self, action: &Self::Action) -> DMatrix<f64>;

    fn expected_reward(&self, action: &Self::Action, theta: &[f64]) -> f64;

    fn realized_reward(&self, action: &Self::Action, theta: &[f64]) -> f64;

    /// Lipschitz constant of `expected_reward` in its second argument.
    fn lipschitz_constant(&self) -> f64;

    /// Upper bound on `expected_reward` over all actions and all
    /// `theta` in `[0,1]^n`.
    fn reward_ceiling(&self) -> f64;

    fn action_count(&self) -> ActionCount;
}

/// Checked evaluation of the mean reward function.
pub fn expected_reward<G: Game>(game: &G, action: &G::Action, theta: &[f64]) -> Result<f64> {
    if theta.len() != game.dimension() {
        return Err(CpmError::DimensionMismatch {
            expected: game.dimension(),
            got: theta.len(),
        });
    }
    Ok(game.expected_reward(action, theta))
}

/// Offline optimization oracles over the learner's action set.
///
/// `argmax` must return a maximizer of the mean reward at the given vector;
/// ties are broken by the environment's canonical order so that repeated
/// calls are deterministic. `arg_secondmax` maximizes over all actions other
/// than `excluded`. Vectors are not restricted to `[0,1]^n`: running
/// estimates may leave the cube.
pub trait Oracle {
    type Action: Clone + PartialEq + fmt::Debug;

    fn argmax(&self, theta: &[f64]) -> Self::Action;

    fn has_secondmax(&self) -> bool;

    fn arg_secondmax(&self, theta: &[f64], excluded: &Self::Action) -> Result<Self::Action>;

    /// Whether this oracle only accepts vectors inside `[0,1]^n`. Learners
    /// clamp their estimates componentwise before calling when set.
    fn requires_clamped_estimates(&self) -> bool {
        false
    }
}

/// Oracle wrapper that counts calls; used for call accounting in regret
/// curves and for asserting that learners respect their oracle contract.
pub struct CountingOracle<O> {
    inner: O,
    argmax_calls: Cell<u64>,
    secondmax_calls: Cell<u64>,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            argmax_calls: Cell::new(0),
            secondmax_calls: Cell::new(0),
        }
    }

    pub fn argmax_calls(&self) -> u64 {
        self.argmax_calls.get()
    }

    pub fn secondmax_calls(&self) -> u64 {
        self.secondmax_calls.get()
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Oracle> Oracle for CountingOracle<O> {
    type Action = O::Action;

    fn argmax(&self, theta: &[f64]) -> Self::Action {
        self.argmax_calls.set(self.argmax_calls.get() + 1);
        self.inner.argmax(theta)
    }

    fn has_secondmax(&self) -> bool {
        self.inner.has_secondmax()
    }

    fn arg_secondmax(&self, theta: &[f64], excluded: &Self::Action) -> Result<Self::Action> {
        self.secondmax_calls.set(self.secondmax_calls.get() + 1);
        self.inner.arg_secondmax(theta, excluded)
    }

    fn requires_clamped_estimates(&self) -> bool {
        self.inner.requires_clamped_estimates()
    }
}

/// One round of learner/adversary interaction: play an action, receive the
/// linear feedback `M_x * theta(t)`. Implementations own the adversary's
/// random stream and any regret accounting.
pub trait Interaction<A> {
    fn play(&mut self, action: &A) -> Vec<f64>;
}

/// Product distributions on `[0,1]^n` with a known mean.
#[derive(Clone, Debug, PartialEq)]
pub enum AdversaryDistribution {
    /// Deterministic adversary: every draw equals the given vector.
    PointMass(Vec<f64>),
    /// Independent Bernoulli coordinates with the given success means.
    BernoulliProduct(Vec<f64>),
    /// Independent Beta(a_i, b_i) coordinates.
    IndependentBeta { alpha: Vec<f64>, beta: Vec<f64> },
}

impl AdversaryDistribution {
    pub fn dimension(&self) -> usize {
        match self {
            AdversaryDistribution::PointMass(v) => v.len(),
            AdversaryDistribution::BernoulliProduct(v) => v.len(),
            AdversaryDistribution::IndependentBeta { alpha, .. } => alpha.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: &[f64]| v.iter().all(|&x| (0.0..=1.0).contains(&x));
        match self {
            AdversaryDistribution::PointMass(v) | AdversaryDistribution::BernoulliProduct(v) => {
                if v.is_empty() {
                    return Err(CpmError::invalid("means", "must be non-empty"));
                }
                if !in_unit(v) {
                    return Err(CpmError::invalid("means", "components must lie in [0,1]"));
                }
            }
            AdversaryDistribution::IndependentBeta { alpha, beta } => {
                if alpha.is_empty() || alpha.len() != beta.len() {
                    return Err(CpmError::invalid(
                        "beta",
                        "shape parameter vectors must be non-empty and of equal length",
                    ));
                }
                if alpha.iter().chain(beta.iter()).any(|&x| x <= 0.0) {
                    return Err(CpmError::invalid(
                        "beta",
                        "shape parameters must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The mean vector `theta*` of the distribution.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            AdversaryDistribution::PointMass(v) => v.clone(),
            AdversaryDistribution::BernoulliProduct(v) => v.clone(),
            AdversaryDistribution::IndependentBeta { alpha, beta } => alpha
                .iter()
                .zip(beta.iter())
                .map(|(&a, &b)| a / (a + b))
                .collect(),
        }
    }

    /// Draw one i.i.d. move; every sample lies in `[0,1]^n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            AdversaryDistribution::PointMass(v) => v.clone(),
            AdversaryDistribution::BernoulliProduct(v) => v
                .iter()
                .map(|&p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect(),
            AdversaryDistribution::IndependentBeta { alpha, beta } => alpha
                .iter()
                .zip(beta.iter())
                .map(|(&a, &b)| {
                    // validated at construction; Beta::new only fails on
                    // non-positive parameters
                    Beta::new(a, b)
                        .expect("validated beta parameters")
                        .sample(rng)
                })
                .collect(),
        }
    }
}

/// Exact optimality structure of a finite instance at a fixed mean vector.
#[derive(Clone, Debug)]
pub struct GapProfile<A> {
    /// First action (in enumeration order) attaining the maximum.
    pub optimal_action: A,
    pub optimal_value: f64,
    /// Minimum positive gap; `None` when every action is optimal.
    pub gap_delta: Option<f64>,
    /// Largest gap over all actions.
    pub gap_max: f64,
    /// Every action paired with its gap, in enumeration order.
    pub per_action_gaps: Vec<(A, f64)>,
    /// Whether exactly one action attains `optimal_value` (exact comparison
    /// of computed reward values, no tolerance).
    pub unique_optimal: bool,
}

impl<A: PartialEq> GapProfile<A> {
    /// Gap of a specific action, if it appears in the enumeration.
    pub fn gap_of(&self, action: &A) -> Option<f64> {
        self.per_action_gaps
            .iter()
            .find(|(a, _)| a == action)
            .map(|(_, g)| *g)
    }
}

/// Enumerates a finite game and computes its exact gap profile at
/// `theta_star`. Used by simulators and tests only; learners never see the
/// true mean.
pub fn gap_profile<G: Game>(
    game: &G,
    theta_star: &[f64],
    actions: impl IntoIterator<Item = G::Action>,
) -> Result<GapProfile<G::Action>> {
    if matches!(game.action_count(), ActionCount::Infinite) {
        return Err(CpmError::InfiniteActionSet);
    }
    if theta_star.len() != game.dimension() {
        return Err(CpmError::DimensionMismatch {
            expected: game.dimension(),
            got: theta_star.len(),
        });
    }

    let valued: Vec<(G::Action, f64)> = actions
        .into_iter()
        .map(|a| {
            let v = game.expected_reward(&a, theta_star);
            (a, v)
        })
        .collect();
    if valued.is_empty() {
        return Err(CpmError::invalid(
            "actions",
            "enumeration yielded no actions",
        ));
    }

    let mut best = valued[0].1;
    let mut best_idx = 0usize;
    for (i, (_, v)) in valued.iter().enumerate() {
        if *v > best {
            best = *v;
            best_idx = i;
        }
    }
    let optimal_count = valued.iter().filter(|(_, v)| *v == best).count();

    let mut gap_delta: Option<f64> = None;
    let mut gap_max = 0.0f64;
    let per_action_gaps: Vec<(G::Action, f64)> = valued
        .iter()
        .map(|(a, v)| {
            let gap = best - v;
            if gap > 0.0 {
                gap_delta = Some(match gap_delta {
                    Some(d) => d.min(gap),
                    None => gap,
                });
            }
            gap_max = gap_max.max(gap);
            (a.clone(), gap)
        })
        .collect();

    Ok(GapProfile {
        optimal_action: valued[best_idx].0.clone(),
        optimal_value: best,
        gap_delta,
        gap_max,
        per_action_gaps,
        unique_optimal: optimal_count == 1,
    })
}
