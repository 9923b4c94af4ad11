//! Gap estimation: repeated single sweeps of the observable set with a
//! width-based stopping rule.
//!
//! Episode `b` plays every observable-set action once, recovers one move,
//! and averages. If the argmax under the running mean is unique (its value
//! strictly exceeds the runner-up's) and the estimated gap clears six
//! confidence widths, the gap estimate is emitted; once the episode index
//! passes the exploration threshold the run gives up and reports the
//! latest mean instead.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{CpmError, Result};
use crate::estimation::{confidence_width, recover_theta_tilde, ThetaEstimate};
use crate::game::{Game, Interaction, Oracle};
use crate::linalg::GlobalObservableSet;

use super::{LearnerTrace, PhaseTag, SegmentActions, ThetaSnapshot, TraceSegment};

/// How a gap-estimation run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum GapOutcome {
    /// The stopping rule fired: the estimated gap cleared `6 w(b)`.
    Estimate {
        delta_hat: f64,
        stop_episode: u64,
        theta_hat: Vec<f64>,
        rounds_consumed: u64,
    },
    /// The episode index passed the exploration threshold first.
    ThresholdExceeded {
        stop_episode: u64,
        theta_hat_final: Vec<f64>,
        rounds_consumed: u64,
    },
}

impl GapOutcome {
    pub fn is_estimate(&self) -> bool {
        matches!(self, GapOutcome::Estimate { .. })
    }

    pub fn stop_episode(&self) -> u64 {
        match self {
            GapOutcome::Estimate { stop_episode, .. }
            | GapOutcome::ThresholdExceeded { stop_episode, .. } => *stop_episode,
        }
    }

    pub fn rounds_consumed(&self) -> u64 {
        match self {
            GapOutcome::Estimate {
                rounds_consumed, ..
            }
            | GapOutcome::ThresholdExceeded {
                rounds_consumed, ..
            } => *rounds_consumed,
        }
    }

    pub fn delta_hat(&self) -> Option<f64> {
        match self {
            GapOutcome::Estimate { delta_hat, .. } => Some(*delta_hat),
            GapOutcome::ThresholdExceeded { .. } => None,
        }
    }

    /// The mean estimate held when the run stopped.
    pub fn theta_hat(&self) -> &[f64] {
        match self {
            GapOutcome::Estimate { theta_hat, .. } => theta_hat,
            GapOutcome::ThresholdExceeded {
                theta_hat_final, ..
            } => theta_hat_final,
        }
    }
}

/// Outcome of the horizon-bounded runner.
pub(crate) enum GapRun {
    Stopped(GapOutcome),
    /// The round budget ran out before either stopping condition fired.
    Truncated,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_gap_estimation<G, O, E>(
    game: &G,
    sigma: &GlobalObservableSet<G::Action>,
    oracles: &O,
    t0: f64,
    delta: f64,
    budget: u64,
    env: &mut E,
    trace: &mut LearnerTrace<G::Action>,
) -> Result<GapRun>
where
    G: Game,
    G::Action: Clone + PartialEq + fmt::Debug,
    O: Oracle<Action = G::Action>,
    E: Interaction<G::Action>,
{
    if !oracles.has_secondmax() {
        return Err(CpmError::SecondMaxUnavailable);
    }
    let dim = sigma.dimension();
    let mut estimate = if oracles.requires_clamped_estimates() {
        ThetaEstimate::with_clamping(dim)
    } else {
        ThetaEstimate::new(dim)
    };
    let lipschitz = game.lipschitz_constant();
    let beta_sigma = sigma.beta_sigma();

    let seg_start = trace.total_rounds + 1;
    let mut used = 0u64;
    let mut episode = 0u64;
    let outcome = loop {
        if used >= budget {
            break GapRun::Truncated;
        }
        episode += 1;

        let mut feedbacks: Vec<Vec<f64>> = Vec::with_capacity(sigma.size());
        for action in sigma.actions() {
            if used >= budget {
                break;
            }
            feedbacks.push(env.play(action));
            trace.total_rounds += 1;
            used += 1;
        }
        if feedbacks.len() < sigma.size() {
            break GapRun::Truncated;
        }
        let tilde = recover_theta_tilde(sigma, &feedbacks)?;
        estimate.update(&tilde)?;
        trace.theta_tildes.push(tilde);
        trace.theta_snapshots.push(ThetaSnapshot {
            phase: episode,
            tag: PhaseTag::GapEstimation,
            theta_hat: estimate.theta_hat().to_vec(),
        });

        let view = estimate.oracle_view();
        let best = oracles.argmax(&view);
        let runner_up = oracles.arg_secondmax(&view, &best)?;
        let best_value = game.expected_reward(&best, &view);
        let second_value = game.expected_reward(&runner_up, &view);
        // "unique argmax" operationally: strictly above the runner-up
        if best_value > second_value {
            let width = confidence_width(episode, lipschitz, beta_sigma, delta)?;
            let gap = best_value - second_value;
            if gap > 6.0 * width {
                break GapRun::Stopped(GapOutcome::Estimate {
                    delta_hat: gap,
                    stop_episode: episode,
                    theta_hat: estimate.theta_hat().to_vec(),
                    rounds_consumed: used,
                });
            }
        }
        if episode as f64 > t0 {
            break GapRun::Stopped(GapOutcome::ThresholdExceeded {
                stop_episode: episode,
                theta_hat_final: estimate.theta_hat().to_vec(),
                rounds_consumed: used,
            });
        }
    };
    if used > 0 {
        trace.segments.push(TraceSegment {
            start_round: seg_start,
            rounds: used,
            phase: episode,
            tag: PhaseTag::GapEstimation,
            actions: SegmentActions::SigmaSweep,
        });
    }
    Ok(outcome)
}

/// Runs gap estimation to completion (it always stops once the episode
/// index passes `t0`), returning the outcome and the full trace.
pub fn gap_estimation_run<G, O, E>(
    game: &G,
    sigma: &GlobalObservableSet<G::Action>,
    oracles: &O,
    t0: f64,
    delta: f64,
    env: &mut E,
) -> Result<(GapOutcome, LearnerTrace<G::Action>)>
where
    G: Game,
    G::Action: Clone + PartialEq + fmt::Debug,
    O: Oracle<Action = G::Action>,
    E: Interaction<G::Action>,
{
    if !(t0 >= 1.0) {
        return Err(CpmError::invalid("t0", "threshold must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CpmError::invalid("delta", "must lie in (0,1)"));
    }
    let mut trace = LearnerTrace::new(sigma.actions().to_vec());
    match run_gap_estimation(game, sigma, oracles, t0, delta, u64::MAX, env, &mut trace)? {
        GapRun::Stopped(outcome) => Ok((outcome, trace)),
        GapRun::Truncated => unreachable!("unbounded budget cannot truncate"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::score::build_score_ranking_game;
    use crate::environments::tabular::two_action_game;
    use crate::game::AdversaryDistribution;
    use crate::linalg::DEFAULT_RANK_TOL;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    struct DrawEnv<'a, G: Game> {
        game: &'a G,
        adversary: AdversaryDistribution,
        rng: ChaCha12Rng,
    }

    impl<G: Game> Interaction<G::Action> for DrawEnv<'_, G> {
        fn play(&mut self, action: &G::Action) -> Vec<f64> {
            let theta = self.adversary.sample(&mut self.rng);
            let fb = self.game.feedback_matrix(action) * nalgebra::DVector::from_row_slice(&theta);
            fb.iter().copied().collect()
        }
    }

    #[test]
    fn point_mass_stops_at_the_first_episode_clearing_six_widths() {
        // theta is recovered exactly every episode, so the run stops at the
        // first b with 6 w(b) < 0.8; scan for that b independently
        let (game, oracles) = two_action_game();
        let sigma = GlobalObservableSet::find(&game, 0..2, DEFAULT_RANK_TOL).unwrap();
        let delta = 0.05;
        let e2 = core::f64::consts::E.powi(2);
        let mut expected_stop = 1u64;
        loop {
            let b = expected_stop as f64;
            let w = (1.0 * (4.0 * e2 * b * b / delta).ln() / b).sqrt();
            if 0.8 > 6.0 * w {
                break;
            }
            expected_stop += 1;
        }
        let mut env = DrawEnv {
            game: &game,
            adversary: AdversaryDistribution::PointMass(vec![0.8]),
            rng: ChaCha12Rng::seed_from_u64(1),
        };
        let (outcome, trace) =
            gap_estimation_run(&game, &sigma, &oracles, 1e6, delta, &mut env).unwrap();
        match outcome {
            GapOutcome::Estimate {
                delta_hat,
                stop_episode,
                rounds_consumed,
                ..
            } => {
                assert!((delta_hat - 0.8).abs() < 1e-12);
                assert_eq!(stop_episode, expected_stop);
                assert_eq!(rounds_consumed, stop_episode * sigma.size() as u64);
            }
            other => panic!("expected an estimate, got {other:?}"),
        }
        trace.validate_round_conservation().unwrap();
    }

    #[test]
    fn identical_rewards_always_exceed_the_threshold() {
        use crate::environments::tabular::{TabularAction, TabularGame};
        use nalgebra::DMatrix;
        // two actions with the same reward row: never a unique argmax
        let game = TabularGame::new(
            1,
            vec![
                TabularAction {
                    feedback: DMatrix::from_row_slice(1, 1, &[1.0]),
                    reward_row: vec![1.0],
                },
                TabularAction {
                    feedback: DMatrix::from_row_slice(1, 1, &[1.0]),
                    reward_row: vec![1.0],
                },
            ],
        )
        .unwrap();
        let oracles = game.oracles();
        let sigma = GlobalObservableSet::find(&game, 0..2, DEFAULT_RANK_TOL).unwrap();
        for seed in 0..50 {
            let mut env = DrawEnv {
                game: &game,
                adversary: AdversaryDistribution::BernoulliProduct(vec![0.5]),
                rng: ChaCha12Rng::seed_from_u64(seed),
            };
            let (outcome, _) =
                gap_estimation_run(&game, &sigma, &oracles, 50.0, 0.05, &mut env).unwrap();
            match outcome {
                GapOutcome::ThresholdExceeded { stop_episode, .. } => {
                    assert_eq!(stop_episode, 51, "stops right after passing t0");
                }
                other => panic!("seed {seed}: expected threshold exceeded, got {other:?}"),
            }
        }
    }

    #[test]
    fn requires_the_secondmax_oracle() {
        let (game, oracles, candidates) = build_score_ranking_game(2).unwrap();
        let sigma = GlobalObservableSet::from_actions(&game, candidates, DEFAULT_RANK_TOL).unwrap();
        let mut env = DrawEnv {
            game: &game,
            adversary: AdversaryDistribution::BernoulliProduct(vec![0.5, 0.5]),
            rng: ChaCha12Rng::seed_from_u64(7),
        };
        assert_eq!(
            gap_estimation_run(&game, &sigma, &oracles, 10.0, 0.05, &mut env).unwrap_err(),
            CpmError::SecondMaxUnavailable
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let (game, oracles) = two_action_game();
        let sigma = GlobalObservableSet::find(&game, 0..2, DEFAULT_RANK_TOL).unwrap();
        let mut env = DrawEnv {
            game: &game,
            adversary: AdversaryDistribution::PointMass(vec![0.5]),
            rng: ChaCha12Rng::seed_from_u64(3),
        };
        assert!(gap_estimation_run(&game, &sigma, &oracles, 0.5, 0.05, &mut env).is_err());
        assert!(gap_estimation_run(&game, &sigma, &oracles, 10.0, 1.0, &mut env).is_err());
    }
}
