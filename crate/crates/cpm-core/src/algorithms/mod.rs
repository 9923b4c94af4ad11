//! The learners: the phased explore/exploit framework with its published
//! parameterizations, gap estimation with a width-based stopping rule, and
//! the combined learner that tunes itself from the estimated gap.

mod bounds;
mod gap;
mod pege;
mod pege2;

pub use bounds::{
    exp_exploit_h_limit, exp_exploit_h_valid, exp_exploit_linear_explore_regret_bound,
    exp_exploit_regret_bound, regret_bound_b1, regret_bound_b2, sqrt_exploit_regret_bound,
};
pub use gap::{gap_estimation_run, GapOutcome};
pub(crate) use gap::{run_gap_estimation, GapRun};
pub use pege::pege_run;
pub use pege2::{pege2_parameters, pege2_run, Pege2Parameters, Pege2Run};

use alloc::vec::Vec;
use core::fmt;

use crate::error::{CpmError, Result};
use crate::math;

/// Growth function `C` applied to `b^alpha` to size exploitation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExploreGrowth {
    /// `C(a) = log a`: exploitation grows polynomially with the phase.
    Log,
    /// `C(a) = h * a`: exploitation grows exponentially with rate `h`.
    Linear { h: f64 },
}

/// Phase schedule parameters: per-phase exploration repetitions scale as
/// `b^beta`, exploitation rounds as `ceil(exp(C(b^alpha)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PegeParams {
    pub alpha: f64,
    pub beta: f64,
    pub growth: ExploreGrowth,
}

impl PegeParams {
    /// Constant exploration, `ceil(sqrt(b))` exploitation. Distribution
    /// independent; needs only the argmax oracle.
    pub fn sqrt_exploit() -> Self {
        PegeParams {
            alpha: 0.5,
            beta: 0.0,
            growth: ExploreGrowth::Log,
        }
    }

    /// Exploration growing linearly in the phase, `ceil(exp(h*b))`
    /// exploitation. Gap dependent through the tuning rate `h`.
    pub fn exp_exploit_linear_explore(h: f64) -> Self {
        PegeParams {
            alpha: 1.0,
            beta: 1.0,
            growth: ExploreGrowth::Linear { h },
        }
    }

    /// Constant exploration, `ceil(exp(h*b))` exploitation. The variant the
    /// combined learner runs after estimating the gap.
    pub fn exp_exploit(h: f64) -> Self {
        PegeParams {
            alpha: 1.0,
            beta: 0.0,
            growth: ExploreGrowth::Linear { h },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(CpmError::invalid("alpha", "must be nonnegative"));
        }
        if !(self.beta >= 0.0) {
            return Err(CpmError::invalid("beta", "must be nonnegative"));
        }
        if let ExploreGrowth::Linear { h } = self.growth {
            if !(h > 0.0) {
                return Err(CpmError::invalid("h", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Resolved schedule of one phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PegePhasePlan {
    pub phase: u64,
    /// Sweeps of the observable set to play: `round(b^beta)`, at least 1.
    pub explore_reps: u64,
    /// Greedy rounds to play afterwards: `ceil(exp(C(b^alpha)))`, at
    /// least 1; saturates at `u64::MAX`.
    pub exploit_rounds: u64,
}

/// Evaluates the schedule of phase `b >= 1`.
pub fn pege_phase_plan(phase: u64, params: &PegeParams) -> PegePhasePlan {
    debug_assert!(phase >= 1);
    let b = phase as f64;
    let explore_reps = (math::round(math::powf(b, params.beta)) as u64).max(1);
    // C = log cancels the outer exp exactly: exploit = ceil(b^alpha);
    // evaluating the composition directly avoids exp(ln(x)) round-trips.
    let exploit = match params.growth {
        ExploreGrowth::Log => math::ceil(math::powf(b, params.alpha)),
        ExploreGrowth::Linear { h } => math::ceil(math::exp(h * math::powf(b, params.alpha))),
    };
    PegePhasePlan {
        phase,
        explore_reps,
        exploit_rounds: (exploit as u64).max(1),
    }
}

/// What a stretch of rounds was spent on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseTag {
    Explore,
    Exploit,
    GapEstimation,
    /// Single-action exploitation after the gap-estimation budget ran out.
    TerminalExploit,
}

/// The actions behind a trace segment.
#[derive(Clone, Debug, PartialEq)]
pub enum SegmentActions<A> {
    /// The observable-set actions, cycled in order for `rounds` rounds
    /// (possibly ending mid-sweep at the horizon).
    SigmaSweep,
    /// One action repeated for every round of the segment.
    Single(A),
}

/// A run-length-encoded stretch of consecutive rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSegment<A> {
    /// 1-based round of the first play in the segment.
    pub start_round: u64,
    pub rounds: u64,
    pub phase: u64,
    pub tag: PhaseTag,
    pub actions: SegmentActions<A>,
}

/// Estimator state recorded at the end of a phase's estimation step.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSnapshot {
    pub phase: u64,
    pub tag: PhaseTag,
    pub theta_hat: Vec<f64>,
}

/// Complete record of a learner run: every round's action (run-length
/// encoded), per-phase estimator snapshots, and every recovered move.
#[derive(Clone, Debug)]
pub struct LearnerTrace<A> {
    /// The observable-set actions that `SigmaSweep` segments cycle through.
    pub sigma_actions: Vec<A>,
    pub segments: Vec<TraceSegment<A>>,
    pub theta_snapshots: Vec<ThetaSnapshot>,
    /// Every recovered move, in recovery order.
    pub theta_tildes: Vec<Vec<f64>>,
    pub total_rounds: u64,
}

impl<A: Clone + PartialEq + fmt::Debug> LearnerTrace<A> {
    pub fn new(sigma_actions: Vec<A>) -> Self {
        LearnerTrace {
            sigma_actions,
            segments: Vec::new(),
            theta_snapshots: Vec::new(),
            theta_tildes: Vec::new(),
            total_rounds: 0,
        }
    }

    /// Expands the segments into per-round `(round, action, tag)` triples.
    pub fn rounds(&self) -> impl Iterator<Item = (u64, &A, PhaseTag)> {
        self.segments.iter().flat_map(move |seg| {
            (0..seg.rounds).map(move |i| {
                let action = match &seg.actions {
                    SegmentActions::Single(a) => a,
                    SegmentActions::SigmaSweep => {
                        &self.sigma_actions[(i as usize) % self.sigma_actions.len()]
                    }
                };
                (seg.start_round + i, action, seg.tag)
            })
        })
    }

    /// Checks that segments tile `1..=total_rounds` exactly.
    pub fn validate_round_conservation(&self) -> Result<()> {
        let mut next = 1u64;
        for seg in &self.segments {
            if seg.start_round != next {
                return Err(CpmError::invalid("segments", "non-contiguous trace"));
            }
            next += seg.rounds;
        }
        if next != self.total_rounds + 1 {
            return Err(CpmError::invalid("segments", "rounds do not sum to total"));
        }
        Ok(())
    }
}
