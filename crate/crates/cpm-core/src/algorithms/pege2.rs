//! The combined learner: gap estimation first, then either a
//! gap-tuned phased run or pure exploitation of the final estimate.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{CpmError, Result};
use crate::game::{Game, Interaction, Oracle};
use crate::linalg::GlobalObservableSet;
use crate::math;

use super::gap::{run_gap_estimation, GapRun};
use super::pege::run_phases;
use super::{GapOutcome, LearnerTrace, PegeParams, PhaseTag, SegmentActions, TraceSegment};

/// Exploration threshold and confidence used by the gap-estimation stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pege2Parameters {
    pub t0: f64,
    pub delta: f64,
}

/// Stage parameters for a known horizon:
/// `t0 = (2 R beta_sigma T / (|sigma| R_max))^(2/3)` and `delta = 1/T`.
pub fn pege2_parameters(
    horizon: u64,
    lipschitz: f64,
    beta_sigma: f64,
    sigma_size: usize,
    reward_ceiling: f64,
) -> Pege2Parameters {
    let t = horizon as f64;
    let t0 = math::powf(
        2.0 * lipschitz * beta_sigma * t / (sigma_size as f64 * reward_ceiling),
        2.0 / 3.0,
    );
    Pege2Parameters { t0, delta: 1.0 / t }
}

/// Everything a combined run produced.
#[derive(Clone, Debug)]
pub struct Pege2Run<A> {
    pub trace: LearnerTrace<A>,
    pub parameters: Pege2Parameters,
    /// `None` only when the horizon ran out mid-estimation.
    pub gap_outcome: Option<GapOutcome>,
    /// The exploitation growth rate handed to the phased stage,
    /// `delta_hat^2 / (9 R^2 beta_sigma^2)`; set only on the estimate path.
    pub tuned_h: Option<f64>,
}

/// Runs the combined learner for exactly `horizon` rounds.
///
/// Gap estimation runs first with the parameters above. On an estimate, the
/// remaining rounds go to the constant-exploration phased learner tuned
/// with `h = delta_hat^2 / (9 R^2 beta_sigma^2)`, restarted from a fresh
/// estimator. On a threshold exceed, the argmax under the final estimate is
/// played for every remaining round. Remaining rounds are accounted from
/// actual consumption, not from the nominal threshold.
pub fn pege2_run<G, O, E>(
    game: &G,
    sigma: &GlobalObservableSet<G::Action>,
    oracles: &O,
    horizon: u64,
    env: &mut E,
) -> Result<Pege2Run<G::Action>>
where
    G: Game,
    G::Action: Clone + PartialEq + fmt::Debug,
    O: Oracle<Action = G::Action>,
    E: Interaction<G::Action>,
{
    if horizon < 2 {
        // delta = 1/T must land in (0,1)
        return Err(CpmError::invalid("horizon", "must be at least 2"));
    }
    if !oracles.has_secondmax() {
        return Err(CpmError::SecondMaxUnavailable);
    }
    let lipschitz = game.lipschitz_constant();
    let beta_sigma = sigma.beta_sigma();
    let parameters = pege2_parameters(
        horizon,
        lipschitz,
        beta_sigma,
        sigma.size(),
        game.reward_ceiling(),
    );

    let mut trace = LearnerTrace::new(sigma.actions().to_vec());
    let stage = run_gap_estimation(
        game,
        sigma,
        oracles,
        parameters.t0,
        parameters.delta,
        horizon,
        env,
        &mut trace,
    )?;

    let outcome = match stage {
        GapRun::Truncated => {
            return Ok(Pege2Run {
                trace,
                parameters,
                gap_outcome: None,
                tuned_h: None,
            });
        }
        GapRun::Stopped(outcome) => outcome,
    };

    let remaining = horizon - trace.total_rounds;
    let mut tuned_h = None;
    match &outcome {
        GapOutcome::ThresholdExceeded {
            theta_hat_final,
            stop_episode,
            ..
        } => {
            if remaining > 0 {
                let view: Vec<f64> = if oracles.requires_clamped_estimates() {
                    theta_hat_final.iter().map(|&x| x.clamp(0.0, 1.0)).collect()
                } else {
                    theta_hat_final.clone()
                };
                let chosen = oracles.argmax(&view);
                let start = trace.total_rounds + 1;
                for _ in 0..remaining {
                    env.play(&chosen);
                }
                trace.total_rounds += remaining;
                trace.segments.push(TraceSegment {
                    start_round: start,
                    rounds: remaining,
                    phase: *stop_episode,
                    tag: PhaseTag::TerminalExploit,
                    actions: SegmentActions::Single(chosen),
                });
            }
        }
        GapOutcome::Estimate { delta_hat, .. } => {
            let h = delta_hat * delta_hat / (9.0 * lipschitz * lipschitz * beta_sigma * beta_sigma);
            tuned_h = Some(h);
            if remaining > 0 {
                let params = PegeParams::exp_exploit(h);
                run_phases(sigma, oracles, &params, remaining, env, &mut trace)?;
            }
        }
    }
    Ok(Pege2Run {
        trace,
        parameters,
        gap_outcome: Some(outcome),
        tuned_h,
    })
}
