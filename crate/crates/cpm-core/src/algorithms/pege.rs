//! Phased exploration with greedy exploitation.
//!
//! Each phase `b` plays `round(b^beta)` full sweeps of the global
//! observable set, recovers one move per completed sweep, folds it into the
//! running mean, then trusts the mean completely: the argmax oracle is
//! called once and its action is played for `ceil(exp(C(b^alpha)))`
//! rounds. Only the argmax oracle is ever used.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::estimation::{recover_theta_tilde, ThetaEstimate};
use crate::game::{Interaction, Oracle};
use crate::linalg::GlobalObservableSet;

use super::{
    pege_phase_plan, LearnerTrace, PegeParams, PhaseTag, SegmentActions, ThetaSnapshot,
    TraceSegment,
};

/// Runs phases into an existing trace until `budget` rounds are consumed,
/// starting the phase counter from 1 with a fresh estimator. Shared by the
/// standalone runner and the combined learner's second stage.
pub(crate) fn run_phases<A, O, E>(
    sigma: &GlobalObservableSet<A>,
    oracle: &O,
    params: &PegeParams,
    budget: u64,
    env: &mut E,
    trace: &mut LearnerTrace<A>,
) -> Result<()>
where
    A: Clone + PartialEq + fmt::Debug,
    O: Oracle<Action = A>,
    E: Interaction<A>,
{
    let dim = sigma.dimension();
    let mut estimate = if oracle.requires_clamped_estimates() {
        ThetaEstimate::with_clamping(dim)
    } else {
        ThetaEstimate::new(dim)
    };
    let mut used = 0u64;
    let mut phase = 0u64;

    while used < budget {
        phase += 1;
        let plan = pege_phase_plan(phase, params);

        let explore_start = trace.total_rounds + 1;
        let mut explore_rounds = 0u64;
        for _ in 0..plan.explore_reps {
            if used >= budget {
                break;
            }
            let mut feedbacks: Vec<Vec<f64>> = Vec::with_capacity(sigma.size());
            for action in sigma.actions() {
                if used >= budget {
                    break;
                }
                feedbacks.push(env.play(action));
                trace.total_rounds += 1;
                used += 1;
                explore_rounds += 1;
            }
            // a sweep cut short by the horizon yields no recovery
            if feedbacks.len() == sigma.size() {
                let tilde = recover_theta_tilde(sigma, &feedbacks)?;
                estimate.update(&tilde)?;
                trace.theta_tildes.push(tilde);
            }
        }
        if explore_rounds > 0 {
            trace.segments.push(TraceSegment {
                start_round: explore_start,
                rounds: explore_rounds,
                phase,
                tag: PhaseTag::Explore,
                actions: SegmentActions::SigmaSweep,
            });
        }
        if estimate.sample_count() > 0 {
            trace.theta_snapshots.push(ThetaSnapshot {
                phase,
                tag: PhaseTag::Explore,
                theta_hat: estimate.theta_hat().to_vec(),
            });
        }
        if used >= budget || estimate.sample_count() == 0 {
            break;
        }

        let chosen = oracle.argmax(&estimate.oracle_view());
        let exploit_rounds = plan.exploit_rounds.min(budget - used);
        let exploit_start = trace.total_rounds + 1;
        for _ in 0..exploit_rounds {
            env.play(&chosen);
        }
        trace.total_rounds += exploit_rounds;
        used += exploit_rounds;
        trace.segments.push(TraceSegment {
            start_round: exploit_start,
            rounds: exploit_rounds,
            phase,
            tag: PhaseTag::Exploit,
            actions: SegmentActions::Single(chosen),
        });
    }
    Ok(())
}

/// Plays the phased learner for exactly `horizon` rounds, truncating
/// mid-phase (or mid-sweep) when the horizon is reached.
pub fn pege_run<A, O, E>(
    sigma: &GlobalObservableSet<A>,
    oracle: &O,
    params: &PegeParams,
    horizon: u64,
    env: &mut E,
) -> Result<LearnerTrace<A>>
where
    A: Clone + PartialEq + fmt::Debug,
    O: Oracle<Action = A>,
    E: Interaction<A>,
{
    params.validate()?;
    let mut trace = LearnerTrace::new(sigma.actions().to_vec());
    run_phases(sigma, oracle, params, horizon, env, &mut trace)?;
    Ok(trace)
}
