//! Seeded learner/adversary interaction with pseudo-regret accounting.
//!
//! A run owns one ChaCha12 random stream (a named, portable, documented
//! generator: same seed, same draws, on every platform) and plays the
//! configured learner against i.i.d. adversary draws for exactly the
//! configured horizon. Per round it adds the mean-reward gap of the played
//! action at the adversary's mean; the learner never sees that mean, only
//! feedback vectors.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::algorithms::{
    exp_exploit_h_valid, pege2_run, pege_run, run_gap_estimation, ExploreGrowth, GapOutcome,
    GapRun, LearnerTrace, PegeParams,
};
use crate::environments::ranking::build_ranking_game;
use crate::environments::score::build_score_ranking_game;
use crate::environments::tabular::two_action_game;
use crate::error::{CpmError, Result};
use crate::game::{gap_profile, AdversaryDistribution, CountingOracle, Game, Interaction, Oracle};
use crate::linalg::{GlobalObservableSet, DEFAULT_RANK_TOL};
use crate::math;

/// Largest finite action count that gets enumerated for exact gap
/// metadata (8! for the ranking game).
const MAX_GAP_ENUMERATION: u128 = 40_320;

/// Which game to instantiate.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvironmentSpec {
    Ranking {
        n: usize,
        gains: Option<Vec<f64>>,
    },
    ScoreRanking {
        n: usize,
    },
    /// One revealing rewarded action, one silent zero-reward action, on a
    /// one-dimensional adversary space.
    TwoAction,
}

impl EnvironmentSpec {
    pub fn dimension(&self) -> usize {
        match self {
            EnvironmentSpec::Ranking { n, .. } => *n,
            EnvironmentSpec::ScoreRanking { n } => *n,
            EnvironmentSpec::TwoAction => 1,
        }
    }
}

/// Which learner to run.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgorithmSpec {
    Pege(PegeParams),
    GapEstimation { t0: f64, delta: f64 },
    Pege2,
}

/// A complete experiment description; `seeds` fan out into independent
/// runs with independent random streams.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub adversary: AdversaryDistribution,
    pub algorithm: AlgorithmSpec,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    /// Rounds at which cumulative regret is recorded; sorted, all within
    /// the horizon.
    pub snapshot_schedule: Vec<u64>,
}

/// Geometric snapshot grid `ceil(1.25^k)` deduplicated, capped at the
/// horizon, and always ending exactly there.
pub fn geometric_schedule(horizon: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let v = math::ceil(math::powf(1.25, k as f64)) as u64;
        let v = v.min(horizon);
        if grid.last() != Some(&v) {
            grid.push(v);
        }
        if v >= horizon {
            break;
        }
        k += 1;
    }
    grid
}

impl ExperimentConfig {
    /// Builds a config with the default geometric snapshot schedule.
    pub fn new(
        environment: EnvironmentSpec,
        adversary: AdversaryDistribution,
        algorithm: AlgorithmSpec,
        horizon: u64,
        seeds: Vec<u64>,
    ) -> Result<Self> {
        let config = ExperimentConfig {
            snapshot_schedule: geometric_schedule(horizon),
            environment,
            adversary,
            algorithm,
            horizon,
            seeds,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(CpmError::invalid("horizon", "must be at least 1"));
        }
        match &self.environment {
            EnvironmentSpec::Ranking { n, gains } => {
                if *n < 2 {
                    return Err(CpmError::invalid("n", "ranking needs at least 2 items"));
                }
                if let Some(g) = gains {
                    if g.len() != *n {
                        return Err(CpmError::invalid("gains", "length must equal n"));
                    }
                }
            }
            EnvironmentSpec::ScoreRanking { n } => {
                if *n < 1 {
                    return Err(CpmError::invalid("n", "must be at least 1"));
                }
            }
            EnvironmentSpec::TwoAction => {}
        }
        self.adversary.validate()?;
        if self.adversary.dimension() != self.environment.dimension() {
            return Err(CpmError::DimensionMismatch {
                expected: self.environment.dimension(),
                got: self.adversary.dimension(),
            });
        }
        match &self.algorithm {
            AlgorithmSpec::Pege(params) => params.validate()?,
            AlgorithmSpec::GapEstimation { t0, delta } => {
                if !(*t0 >= 1.0) {
                    return Err(CpmError::invalid("t0", "must be at least 1"));
                }
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(CpmError::invalid("delta", "must lie in (0,1)"));
                }
                if matches!(self.environment, EnvironmentSpec::ScoreRanking { .. }) {
                    return Err(CpmError::SecondMaxUnavailable);
                }
            }
            AlgorithmSpec::Pege2 => {
                if self.horizon < 2 {
                    return Err(CpmError::invalid("horizon", "must be at least 2"));
                }
                if matches!(self.environment, EnvironmentSpec::ScoreRanking { .. }) {
                    return Err(CpmError::SecondMaxUnavailable);
                }
            }
        }
        if self.seeds.is_empty() {
            return Err(CpmError::invalid("seeds", "must be non-empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CpmError::invalid("seeds", "must be distinct"));
        }
        if self.snapshot_schedule.is_empty() {
            return Err(CpmError::invalid("snapshots", "schedule must be non-empty"));
        }
        if self.snapshot_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CpmError::invalid(
                "snapshots",
                "schedule must be strictly increasing",
            ));
        }
        if *self.snapshot_schedule.last().unwrap() > self.horizon {
            return Err(CpmError::invalid(
                "snapshots",
                "schedule exceeds the horizon",
            ));
        }
        Ok(())
    }

    /// Canonical key = value rendering of everything that identifies the
    /// experiment (seeds excluded: they identify the run).
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let fmt_list = |xs: &[f64]| {
            let mut out = String::new();
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x:.16e}");
            }
            out
        };
        match &self.environment {
            EnvironmentSpec::Ranking { n, gains } => {
                let _ = writeln!(s, "env = ranking");
                let _ = writeln!(s, "n = {n}");
                match gains {
                    Some(g) => {
                        let _ = writeln!(s, "gains = {}", fmt_list(g));
                    }
                    None => {
                        let _ = writeln!(s, "gains = default");
                    }
                }
            }
            EnvironmentSpec::ScoreRanking { n } => {
                let _ = writeln!(s, "env = score_ranking");
                let _ = writeln!(s, "n = {n}");
            }
            EnvironmentSpec::TwoAction => {
                let _ = writeln!(s, "env = two_action");
                let _ = writeln!(s, "n = 1");
            }
        }
        match &self.adversary {
            AdversaryDistribution::PointMass(m) => {
                let _ = writeln!(s, "adversary = point_mass");
                let _ = writeln!(s, "means = {}", fmt_list(m));
            }
            AdversaryDistribution::BernoulliProduct(m) => {
                let _ = writeln!(s, "adversary = bernoulli");
                let _ = writeln!(s, "means = {}", fmt_list(m));
            }
            AdversaryDistribution::IndependentBeta { alpha, beta } => {
                let _ = writeln!(s, "adversary = beta");
                let _ = writeln!(s, "beta_a = {}", fmt_list(alpha));
                let _ = writeln!(s, "beta_b = {}", fmt_list(beta));
            }
        }
        match &self.algorithm {
            AlgorithmSpec::Pege(p) => {
                let _ = writeln!(s, "algo = pege");
                let _ = writeln!(s, "alpha = {:.16e}", p.alpha);
                let _ = writeln!(s, "beta = {:.16e}", p.beta);
                match p.growth {
                    ExploreGrowth::Log => {
                        let _ = writeln!(s, "growth = log");
                    }
                    ExploreGrowth::Linear { h } => {
                        let _ = writeln!(s, "growth = linear");
                        let _ = writeln!(s, "h = {h:.16e}");
                    }
                }
            }
            AlgorithmSpec::GapEstimation { t0, delta } => {
                let _ = writeln!(s, "algo = gap");
                let _ = writeln!(s, "t0 = {t0:.16e}");
                let _ = writeln!(s, "delta = {delta:.16e}");
            }
            AlgorithmSpec::Pege2 => {
                let _ = writeln!(s, "algo = pege2");
            }
        }
        let _ = writeln!(s, "T = {}", self.horizon);
        s
    }

    /// FNV-1a hash of the canonical rendering.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.canonical_string().as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        hash
    }
}

/// One run's time-indexed cumulative pseudo-regret plus metadata.
#[derive(Clone, Debug)]
pub struct RegretCurve {
    pub snapshots: Vec<(u64, f64)>,
    pub seed: u64,
    pub fingerprint: u64,
    pub argmax_calls: u64,
    pub secondmax_calls: u64,
    pub beta_sigma: f64,
    /// Rendered observable-set actions, in order.
    pub sigma: Vec<String>,
    /// Exact minimum positive gap of the instance, when enumerable.
    pub gap: Option<f64>,
    /// Stage outcome for gap-estimation and combined runs.
    pub gap_outcome: Option<GapOutcome>,
    /// Tuned exploitation rate of a combined run's second stage.
    pub tuned_h: Option<f64>,
}

impl RegretCurve {
    /// Cumulative regret at the final snapshot.
    pub fn final_regret(&self) -> f64 {
        self.snapshots.last().map(|&(_, r)| r).unwrap_or(0.0)
    }
}

struct SimEnv<'a, G: Game> {
    game: &'a G,
    adversary: &'a AdversaryDistribution,
    rng: ChaCha12Rng,
    theta_star: Vec<f64>,
    optimal_value: f64,
    round: u64,
    cum_regret: f64,
    schedule: &'a [u64],
    next_snapshot: usize,
    points: Vec<(u64, f64)>,
}

impl<G: Game> SimEnv<'_, G> {
    fn record_due(&mut self) {
        while self.next_snapshot < self.schedule.len()
            && self.schedule[self.next_snapshot] <= self.round
        {
            self.points
                .push((self.schedule[self.next_snapshot], self.cum_regret));
            self.next_snapshot += 1;
        }
    }

    /// Pads the remaining schedule with the final value; a learner that
    /// stops before the horizon accrues nothing afterwards.
    fn finish(mut self) -> Vec<(u64, f64)> {
        while self.next_snapshot < self.schedule.len() {
            self.points
                .push((self.schedule[self.next_snapshot], self.cum_regret));
            self.next_snapshot += 1;
        }
        self.points
    }
}

impl<G: Game> Interaction<G::Action> for SimEnv<'_, G> {
    fn play(&mut self, action: &G::Action) -> Vec<f64> {
        let draw = self.adversary.sample(&mut self.rng);
        self.round += 1;
        let gap = self.optimal_value - self.game.expected_reward(action, &self.theta_star);
        debug_assert!(gap >= -1e-9, "negative per-round regret {gap}");
        self.cum_regret += gap;
        self.record_due();
        let fb = self.game.feedback_matrix(action) * DVector::from_row_slice(&draw);
        fb.iter().copied().collect()
    }
}

/// Plays one seeded run of the configured experiment and returns its
/// regret curve. Every recovered move is checked against the deterministic
/// recovery bound; a violation is an error, not a warning.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<RegretCurve> {
    config.validate()?;
    match &config.environment {
        EnvironmentSpec::Ranking { n, gains } => {
            let (game, oracles, candidates) = build_ranking_game(*n, gains.clone())?;
            let sigma = GlobalObservableSet::find(&game, candidates, DEFAULT_RANK_TOL)?;
            let enumerable = matches!(
                game.action_count(),
                crate::game::ActionCount::Finite(c) if c <= MAX_GAP_ENUMERATION
            );
            let profile = if enumerable {
                Some(gap_profile(
                    &game,
                    &config.adversary.mean(),
                    game.enumerate_actions(),
                )?)
            } else {
                None
            };
            run_instance(
                config,
                seed,
                &game,
                oracles,
                &sigma,
                profile.as_ref().map(|p| p.gap_delta).unwrap_or(None),
            )
        }
        EnvironmentSpec::ScoreRanking { n } => {
            let (game, oracles, candidates) = build_score_ranking_game(*n)?;
            let sigma = GlobalObservableSet::from_actions(&game, candidates, DEFAULT_RANK_TOL)?;
            run_instance(config, seed, &game, oracles, &sigma, None)
        }
        EnvironmentSpec::TwoAction => {
            let (game, oracles) = two_action_game();
            let sigma = GlobalObservableSet::find(&game, 0..2, DEFAULT_RANK_TOL)?;
            let profile = gap_profile(&game, &config.adversary.mean(), 0..2)?;
            run_instance(config, seed, &game, oracles, &sigma, profile.gap_delta)
        }
    }
}

fn run_instance<G, O>(
    config: &ExperimentConfig,
    seed: u64,
    game: &G,
    oracles: O,
    sigma: &GlobalObservableSet<G::Action>,
    instance_gap: Option<f64>,
) -> Result<RegretCurve>
where
    G: Game,
    O: Oracle<Action = G::Action>,
{
    let theta_star = config.adversary.mean();
    // privileged baseline: the simulator may query the raw oracle at the
    // true mean; learners only ever see the counting wrapper
    let x_star = oracles.argmax(&theta_star);
    let optimal_value = game.expected_reward(&x_star, &theta_star);

    if let AlgorithmSpec::Pege(params) = &config.algorithm {
        if let ExploreGrowth::Linear { h } = params.growth {
            if params.beta == 0.0 {
                if let Some(gap) = instance_gap {
                    let lipschitz = game.lipschitz_constant();
                    let beta_sigma = sigma.beta_sigma();
                    if !exp_exploit_h_valid(h, gap, lipschitz, beta_sigma) {
                        log::warn!(
                            "exploitation rate h = {h} violates the precondition 0 < h < gap^2/(4 R^2 beta_sigma^2) = {}; \
                             the gap-dependent regret guarantee does not apply to this run",
                            gap * gap / (4.0 * lipschitz * lipschitz * beta_sigma * beta_sigma),
                        );
                    }
                }
            }
        }
    }

    let counting = CountingOracle::new(oracles);
    let mut env = SimEnv {
        game,
        adversary: &config.adversary,
        rng: ChaCha12Rng::seed_from_u64(seed),
        theta_star: theta_star.clone(),
        optimal_value,
        round: 0,
        cum_regret: 0.0,
        schedule: &config.snapshot_schedule,
        next_snapshot: 0,
        points: Vec::with_capacity(config.snapshot_schedule.len()),
    };

    let (trace, gap_outcome, tuned_h): (LearnerTrace<G::Action>, Option<GapOutcome>, Option<f64>) =
        match &config.algorithm {
            AlgorithmSpec::Pege(params) => {
                let trace = pege_run(sigma, &counting, params, config.horizon, &mut env)?;
                (trace, None, None)
            }
            AlgorithmSpec::GapEstimation { t0, delta } => {
                let mut trace = LearnerTrace::new(sigma.actions().to_vec());
                let outcome = match run_gap_estimation(
                    game,
                    sigma,
                    &counting,
                    *t0,
                    *delta,
                    config.horizon,
                    &mut env,
                    &mut trace,
                )? {
                    GapRun::Stopped(outcome) => Some(outcome),
                    GapRun::Truncated => None,
                };
                (trace, outcome, None)
            }
            AlgorithmSpec::Pege2 => {
                let run = pege2_run(game, sigma, &counting, config.horizon, &mut env)?;
                (run.trace, run.gap_outcome, run.tuned_h)
            }
        };

    trace.validate_round_conservation()?;
    let beta_sigma = sigma.beta_sigma();
    for tilde in &trace.theta_tildes {
        let err = math::sqrt(
            tilde
                .iter()
                .zip(&theta_star)
                .map(|(t, s)| (t - s) * (t - s))
                .sum(),
        );
        if err > beta_sigma + 1e-9 {
            return Err(CpmError::RecoveryBoundViolated {
                error: err,
                beta_sigma,
            });
        }
    }

    Ok(RegretCurve {
        snapshots: env.finish(),
        seed,
        fingerprint: config.fingerprint(),
        argmax_calls: counting.argmax_calls(),
        secondmax_calls: counting.secondmax_calls(),
        beta_sigma,
        sigma: sigma.actions().iter().map(|a| format!("{a:?}")).collect(),
        gap: instance_gap,
        gap_outcome,
        tuned_h,
    })
}

/// Pointwise mean and standard error across seeds.
#[derive(Clone, Debug)]
pub struct AggregateCurve {
    pub rounds: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl AggregateCurve {
    pub fn mean_snapshots(&self) -> Vec<(u64, f64)> {
        self.rounds
            .iter()
            .copied()
            .zip(self.mean.iter().copied())
            .collect()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&0.0)
    }
}

/// Aggregates curves with identical snapshot schedules.
pub fn aggregate(curves: &[RegretCurve]) -> Result<AggregateCurve> {
    if curves.is_empty() {
        return Err(CpmError::invalid("curves", "must be non-empty"));
    }
    let rounds: Vec<u64> = curves[0].snapshots.iter().map(|&(t, _)| t).collect();
    for c in curves.iter().skip(1) {
        if c.snapshots.len() != rounds.len()
            || c.snapshots.iter().zip(&rounds).any(|(&(t, _), &r)| t != r)
        {
            return Err(CpmError::ScheduleMismatch);
        }
    }
    let k = curves.len() as f64;
    let mut mean = Vec::with_capacity(rounds.len());
    let mut stderr = Vec::with_capacity(rounds.len());
    for i in 0..rounds.len() {
        let m = curves.iter().map(|c| c.snapshots[i].1).sum::<f64>() / k;
        let se = if curves.len() < 2 {
            0.0
        } else {
            let var = curves
                .iter()
                .map(|c| (c.snapshots[i].1 - m) * (c.snapshots[i].1 - m))
                .sum::<f64>()
                / (k - 1.0);
            math::sqrt(var / k)
        };
        mean.push(m);
        stderr.push(se);
    }
    Ok(AggregateCurve {
        rounds,
        mean,
        stderr,
    })
}

/// Least-squares slope of `log regret` against `log round` over snapshots
/// at or after `t_min` with positive regret. Needs at least five such
/// points.
pub fn fit_scaling_exponent(snapshots: &[(u64, f64)], t_min: u64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = snapshots
        .iter()
        .filter(|&&(t, r)| t >= t_min && r > 0.0)
        .map(|&(t, r)| (math::ln(t as f64), math::ln(r)))
        .collect();
    if pts.len() < 5 {
        return Err(CpmError::InsufficientPoints {
            got: pts.len(),
            needed: 5,
        });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
