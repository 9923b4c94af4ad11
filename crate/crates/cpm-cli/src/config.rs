//! Flat `key = value` experiment configs.
//!
//! One statement per line, `#` starts a comment, lists are
//! comma-separated. Unknown and duplicate keys are rejected with their
//! line number. Omitted adversary blocks default to independent Bernoulli
//! coordinates with evenly spaced descending means.

use std::collections::BTreeMap;
use std::path::Path;

use cpm_core::algorithms::PegeParams;
use cpm_core::game::AdversaryDistribution;
use cpm_core::simulator::{AlgorithmSpec, EnvironmentSpec, ExperimentConfig};
use cpm_core::CpmError;

use crate::AppError;

const KNOWN_KEYS: &[&str] = &[
    "env",
    "n",
    "gains",
    "adversary",
    "means",
    "beta_a",
    "beta_b",
    "algo",
    "h",
    "t0",
    "delta",
    "T",
    "seeds",
    "base_seed",
];

struct RawConfig {
    // key -> (line number, value)
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }
}

fn tokenize(text: &str) -> Result<RawConfig, AppError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(AppError::validation(format!(
                "line {lineno}: expected `key = value`"
            )));
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() || value.is_empty() {
            return Err(AppError::validation(format!(
                "line {lineno}: expected `key = value`"
            )));
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(AppError::validation(format!(
                "line {lineno}: unknown key `{key}`"
            )));
        }
        if entries.contains_key(key) {
            return Err(AppError::validation(format!(
                "line {lineno}: duplicate key `{key}`"
            )));
        }
        entries.insert(key.to_string(), (lineno, value.to_string()));
    }
    Ok(RawConfig { entries })
}

fn parse_f64(raw: &RawConfig, key: &str) -> Result<Option<f64>, AppError> {
    match raw.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
            AppError::validation(format!(
                "line {}: invalid number for `{key}`",
                raw.line(key)
            ))
        }),
    }
}

fn parse_f64_list(raw: &RawConfig, key: &str) -> Result<Option<Vec<f64>>, AppError> {
    match raw.get(key) {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map(Some)
            .map_err(|_| {
                AppError::validation(format!("line {}: invalid list for `{key}`", raw.line(key)))
            }),
    }
}

/// Default adversary means: evenly spaced from 0.9 down to 0.1
/// (0.5 when the space is one-dimensional).
pub fn default_means(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5];
    }
    // one correctly rounded division per mean keeps e.g. n = 5 at exactly
    // (0.9, 0.7, 0.5, 0.3, 0.1)
    (0..n)
        .map(|i| (9 * (n - 1 - i) + i) as f64 / (10 * (n - 1)) as f64)
        .collect()
}

fn map_core_error(err: CpmError) -> AppError {
    AppError::Validation(err.to_string())
}

/// Parses and validates a config from text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, AppError> {
    let raw = tokenize(text)?;

    let env_kind = raw
        .get("env")
        .ok_or_else(|| AppError::validation("missing required key `env`"))?;
    let n = match raw.get("n") {
        Some(v) => Some(v.parse::<i128>().map_err(|_| {
            AppError::validation(format!("line {}: invalid number for `n`", raw.line("n")))
        })?),
        None => None,
    };
    let gains = parse_f64_list(&raw, "gains")?;

    let environment = match env_kind {
        "ranking" => {
            let n = n.ok_or_else(|| AppError::validation("ranking requires `n`"))?;
            if n < 2 {
                return Err(AppError::validation("n: ranking needs at least 2 items"));
            }
            EnvironmentSpec::Ranking {
                n: n as usize,
                gains,
            }
        }
        "score_ranking" => {
            let n = n.ok_or_else(|| AppError::validation("score_ranking requires `n`"))?;
            if n < 1 {
                return Err(AppError::validation("n: must be at least 1"));
            }
            if gains.is_some() {
                return Err(AppError::validation("gains: not used by score_ranking"));
            }
            EnvironmentSpec::ScoreRanking { n: n as usize }
        }
        "two_action" => {
            if let Some(n) = n {
                if n != 1 {
                    return Err(AppError::validation("n: two_action is one-dimensional"));
                }
            }
            if gains.is_some() {
                return Err(AppError::validation("gains: not used by two_action"));
            }
            EnvironmentSpec::TwoAction
        }
        other => {
            return Err(AppError::validation(format!(
                "line {}: unknown environment `{other}`",
                raw.line("env")
            )));
        }
    };
    let dimension = environment.dimension();

    let means = parse_f64_list(&raw, "means")?;
    let beta_a = parse_f64_list(&raw, "beta_a")?;
    let beta_b = parse_f64_list(&raw, "beta_b")?;
    let adversary = match raw.get("adversary").unwrap_or("bernoulli") {
        "bernoulli" => AdversaryDistribution::BernoulliProduct(
            means.unwrap_or_else(|| default_means(dimension)),
        ),
        "point_mass" => {
            AdversaryDistribution::PointMass(means.unwrap_or_else(|| default_means(dimension)))
        }
        "beta" => {
            let alpha =
                beta_a.ok_or_else(|| AppError::validation("beta adversary requires `beta_a`"))?;
            let beta =
                beta_b.ok_or_else(|| AppError::validation("beta adversary requires `beta_b`"))?;
            AdversaryDistribution::IndependentBeta { alpha, beta }
        }
        other => {
            return Err(AppError::validation(format!(
                "line {}: unknown adversary `{other}`",
                raw.line("adversary")
            )));
        }
    };

    let algo = raw
        .get("algo")
        .ok_or_else(|| AppError::validation("missing required key `algo`"))?;
    let h = parse_f64(&raw, "h")?;
    let t0 = parse_f64(&raw, "t0")?;
    let delta = parse_f64(&raw, "delta")?;
    let algorithm = match algo {
        "pege-t1" => AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
        "pege-t2" => {
            let h = h.ok_or_else(|| AppError::validation("h: required by the pege-t2 preset"))?;
            AlgorithmSpec::Pege(PegeParams::exp_exploit_linear_explore(h))
        }
        "pege-t5" => {
            let h = h.ok_or_else(|| AppError::validation("h: required by the pege-t5 preset"))?;
            AlgorithmSpec::Pege(PegeParams::exp_exploit(h))
        }
        "gap" => {
            let t0 = t0.ok_or_else(|| AppError::validation("t0: required by gap estimation"))?;
            let delta =
                delta.ok_or_else(|| AppError::validation("delta: required by gap estimation"))?;
            AlgorithmSpec::GapEstimation { t0, delta }
        }
        "pege2" => AlgorithmSpec::Pege2,
        other => {
            return Err(AppError::validation(format!(
                "line {}: unknown algorithm `{other}`",
                raw.line("algo")
            )));
        }
    };

    let horizon_raw = raw
        .get("T")
        .ok_or_else(|| AppError::validation("missing required key `T` (horizon)"))?;
    let horizon = horizon_raw.parse::<i128>().map_err(|_| {
        AppError::validation(format!(
            "line {}: invalid number for `T` (horizon)",
            raw.line("T")
        ))
    })?;
    if horizon < 1 {
        return Err(AppError::validation(
            "horizon: `T` must be a positive round count",
        ));
    }

    let seed_count_raw = raw
        .get("seeds")
        .ok_or_else(|| AppError::validation("missing required key `seeds`"))?;
    let seed_count = seed_count_raw.parse::<i128>().map_err(|_| {
        AppError::validation(format!(
            "line {}: invalid number for `seeds`",
            raw.line("seeds")
        ))
    })?;
    if seed_count < 1 {
        return Err(AppError::validation("seeds: must be at least 1"));
    }
    let base_seed = match raw.get("base_seed") {
        None => 0u64,
        Some(v) => v.parse::<u64>().map_err(|_| {
            AppError::validation(format!(
                "line {}: invalid number for `base_seed`",
                raw.line("base_seed")
            ))
        })?,
    };
    let seeds: Vec<u64> = (0..seed_count as u64).map(|i| base_seed + i).collect();

    ExperimentConfig::new(environment, adversary, algorithm, horizon as u64, seeds)
        .map_err(map_core_error)
}

/// Parses a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::runtime(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let config =
            parse_config_str("env = ranking\nn = 3\nalgo = pege-t1\nT = 1000\nseeds = 3\n")
                .unwrap();
        assert_eq!(config.horizon, 1000);
        assert_eq!(config.seeds, vec![0, 1, 2]);
        assert_eq!(
            config.adversary,
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.1])
        );
        assert_eq!(
            config.algorithm,
            AlgorithmSpec::Pege(PegeParams::sqrt_exploit())
        );
        assert_eq!(*config.snapshot_schedule.last().unwrap(), 1000);
    }

    #[test]
    fn negative_horizon_names_the_field() {
        let err = parse_config_str("env = ranking\nn = 3\nalgo = pege-t1\nT = -5\nseeds = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_h_names_the_field() {
        let err = parse_config_str("env = ranking\nn = 3\nalgo = pege-t2\nT = 10\nseeds = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains('h'), "{err}");
        assert!(err.to_string().contains("pege-t2"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = parse_config_str("env = ranking\nn = 3\nwat = 7\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("wat"), "{err}");
    }

    #[test]
    fn duplicates_and_malformed_lines_are_rejected() {
        let err = parse_config_str("env = ranking\nenv = ranking\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = parse_config_str("env ranking\n").unwrap_err();
        assert!(err.to_string().contains("key = value"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let config = parse_config_str(
            "# experiment\nenv = ranking # inline\n\nn = 3\nalgo = pege-t1\nT = 10\nseeds = 1\n",
        )
        .unwrap();
        assert_eq!(config.horizon, 10);
    }

    #[test]
    fn gap_algorithm_requires_thresholds() {
        let err =
            parse_config_str("env = two_action\nalgo = gap\nT = 100\nseeds = 1\n").unwrap_err();
        assert!(err.to_string().contains("t0"), "{err}");
        let ok = parse_config_str(
            "env = two_action\nalgo = gap\nt0 = 50\ndelta = 0.05\nT = 100\nseeds = 1\n",
        )
        .unwrap();
        assert_eq!(
            ok.algorithm,
            AlgorithmSpec::GapEstimation {
                t0: 50.0,
                delta: 0.05
            }
        );
    }

    #[test]
    fn beta_adversary_round_trips() {
        let config = parse_config_str(
            "env = ranking\nn = 2\nadversary = beta\nbeta_a = 2,1\nbeta_b = 2,3\nalgo = pege-t1\nT = 10\nseeds = 1\n",
        )
        .unwrap();
        assert_eq!(
            config.adversary,
            AdversaryDistribution::IndependentBeta {
                alpha: vec![2.0, 1.0],
                beta: vec![2.0, 3.0]
            }
        );
    }

    #[test]
    fn core_validation_errors_surface_as_validation() {
        // means length mismatching the environment dimension
        let err = parse_config_str(
            "env = ranking\nn = 3\nmeans = 0.5,0.5\nalgo = pege-t1\nT = 10\nseeds = 1\n",
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn default_means_are_descending() {
        assert_eq!(default_means(1), vec![0.5]);
        let m = default_means(5);
        assert_eq!(m[0], 0.9);
        assert_eq!(*m.last().unwrap(), 0.1);
        assert!(m.windows(2).all(|w| w[0] > w[1]));
    }
}
