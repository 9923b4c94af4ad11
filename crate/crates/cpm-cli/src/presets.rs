//! Named experiments mirroring the verification suite, runnable as
//! `cpm preset <name>`.

use cpm_core::algorithms::PegeParams;
use cpm_core::environments::ranking::build_ranking_game;
use cpm_core::game::{gap_profile, AdversaryDistribution, Game};
use cpm_core::linalg::{GlobalObservableSet, DEFAULT_RANK_TOL};
use cpm_core::simulator::{AlgorithmSpec, EnvironmentSpec, ExperimentConfig};

use crate::AppError;

/// The named experiments with one-line descriptions.
pub fn preset_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("smoke", "3-seed ranking sanity run, T = 1000"),
        (
            "ranking5-pege-sqrt",
            "ranking n=5, sqrt-exploit schedule, T = 1e6, 50 seeds",
        ),
        (
            "ranking5-pege-exp",
            "ranking n=5, exponential exploitation tuned from the exact gap, T = 1e6, 50 seeds",
        ),
        (
            "two-action-pege-exp",
            "two-action game, exponential exploitation h = 0.03, T = 1e6, 50 seeds",
        ),
        (
            "gap-two-action",
            "gap estimation on the two-action game, t0 = 15000, delta = 0.05, 200 seeds",
        ),
        (
            "gap-tied-ranking3",
            "gap estimation on a tied-optimum ranking, t0 = 300, delta = 0.05, 200 seeds",
        ),
        (
            "pege2-ranking3",
            "combined learner on ranking n=3, T = 1e5, 100 seeds",
        ),
        (
            "pege2-tied-ranking3",
            "combined learner on a tied-optimum ranking, T = 1e5, 100 seeds",
        ),
    ]
}

fn seeds(count: u64) -> Vec<u64> {
    (0..count).collect()
}

/// Exploitation rate `gap^2 / (8 R^2 beta_sigma^2)` for the n=5 ranking
/// instance, computed from the exact enumeration of the instance.
fn ranking5_tuned_h(means: &[f64]) -> Result<f64, AppError> {
    let (game, _, candidates) =
        build_ranking_game(5, None).map_err(|e| AppError::runtime(e.to_string()))?;
    let sigma = GlobalObservableSet::find(&game, candidates, DEFAULT_RANK_TOL)
        .map_err(|e| AppError::runtime(e.to_string()))?;
    let profile = gap_profile(&game, means, game.enumerate_actions())
        .map_err(|e| AppError::runtime(e.to_string()))?;
    let gap = profile
        .gap_delta
        .ok_or_else(|| AppError::runtime("instance has no positive gap"))?;
    let r = game.lipschitz_constant();
    let bs = sigma.beta_sigma();
    Ok(gap * gap / (8.0 * r * r * bs * bs))
}

/// Builds the config behind a preset name.
pub fn preset_config(name: &str) -> Result<ExperimentConfig, AppError> {
    let config = match name {
        "smoke" => ExperimentConfig::new(
            EnvironmentSpec::Ranking { n: 3, gains: None },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.1]),
            AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
            1_000,
            seeds(3),
        ),
        "ranking5-pege-sqrt" => ExperimentConfig::new(
            EnvironmentSpec::Ranking { n: 5, gains: None },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.7, 0.5, 0.3, 0.1]),
            AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
            1_000_000,
            seeds(50),
        ),
        "ranking5-pege-exp" => {
            let means = vec![0.9, 0.7, 0.5, 0.3, 0.1];
            let h = ranking5_tuned_h(&means)?;
            ExperimentConfig::new(
                EnvironmentSpec::Ranking { n: 5, gains: None },
                AdversaryDistribution::BernoulliProduct(means),
                AlgorithmSpec::Pege(PegeParams::exp_exploit_linear_explore(h)),
                1_000_000,
                seeds(50),
            )
        }
        "two-action-pege-exp" => ExperimentConfig::new(
            EnvironmentSpec::TwoAction,
            AdversaryDistribution::BernoulliProduct(vec![0.5]),
            AlgorithmSpec::Pege(PegeParams::exp_exploit(0.03)),
            1_000_000,
            seeds(50),
        ),
        "gap-two-action" => ExperimentConfig::new(
            EnvironmentSpec::TwoAction,
            AdversaryDistribution::BernoulliProduct(vec![0.5]),
            AlgorithmSpec::GapEstimation {
                t0: 15_000.0,
                delta: 0.05,
            },
            20_000,
            seeds(200),
        ),
        "gap-tied-ranking3" => ExperimentConfig::new(
            EnvironmentSpec::Ranking { n: 3, gains: None },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.5]),
            AlgorithmSpec::GapEstimation {
                t0: 300.0,
                delta: 0.05,
            },
            1_000,
            seeds(200),
        ),
        "pege2-ranking3" => ExperimentConfig::new(
            EnvironmentSpec::Ranking { n: 3, gains: None },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.1]),
            AlgorithmSpec::Pege2,
            100_000,
            seeds(100),
        ),
        "pege2-tied-ranking3" => ExperimentConfig::new(
            EnvironmentSpec::Ranking { n: 3, gains: None },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.5]),
            AlgorithmSpec::Pege2,
            100_000,
            seeds(100),
        ),
        other => {
            return Err(AppError::validation(format!(
                "unknown preset `{other}`; see `cpm preset --list`"
            )));
        }
    };
    config.map_err(|e| AppError::validation(e.to_string()))
}
