//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//! Every tolerance is pinned here, in code.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use cpm_core::algorithms::{
    exp_exploit_linear_explore_regret_bound, exp_exploit_regret_bound, pege_run, regret_bound_b1,
    regret_bound_b2, sqrt_exploit_regret_bound, GapOutcome, PegeParams, PhaseTag, SegmentActions,
};
use cpm_core::environments::ranking::{
    build_ranking_game, ranking_argmax, ranking_secondmax, RankingGame,
};
use cpm_core::estimation::theory_thresholds;
use cpm_core::game::{gap_profile, AdversaryDistribution, Game, Interaction};
use cpm_core::linalg::{GlobalObservableSet, DEFAULT_RANK_TOL};
use cpm_core::simulator::{
    aggregate, fit_scaling_exponent, run_single, AlgorithmSpec, EnvironmentSpec, ExperimentConfig,
    RegretCurve,
};
use cpm_core::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn criterion(number: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:2} ({name}): {verdict} [{detail}]");
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

/// Runs every seed of a config on a small thread pool.
fn run_seeds(config: &ExperimentConfig) -> Vec<RegretCurve> {
    let slots: Mutex<Vec<Option<RegretCurve>>> = Mutex::new(vec![None; config.seeds.len()]);
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..4usize.min(config.seeds.len()) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= config.seeds.len() {
                    break;
                }
                let curve = run_single(config, config.seeds[i]).expect("run failed");
                slots.lock().unwrap()[i] = Some(curve);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|s| s.unwrap())
        .collect()
}

struct DrawEnv<'a, G: Game> {
    game: &'a G,
    adversary: AdversaryDistribution,
    rng: ChaCha12Rng,
}

impl<G: Game> Interaction<G::Action> for DrawEnv<'_, G> {
    fn play(&mut self, action: &G::Action) -> Vec<f64> {
        let theta = self.adversary.sample(&mut self.rng);
        let fb = self.game.feedback_matrix(action) * DVector::from_row_slice(&theta);
        fb.iter().copied().collect()
    }
}

/// Ranking n=5 instance shared by the scaling criteria.
fn ranking5() -> (ExperimentConfig, RankingInstance) {
    let means = vec![0.9, 0.7, 0.5, 0.3, 0.1];
    let instance = RankingInstance::build(5, &means);
    let config = ExperimentConfig::new(
        EnvironmentSpec::Ranking { n: 5, gains: None },
        AdversaryDistribution::BernoulliProduct(means),
        AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
        1_000_000,
        (0..50).collect(),
    )
    .unwrap();
    (config, instance)
}

/// Exact instance constants computed by enumeration.
struct RankingInstance {
    lipschitz: f64,
    reward_ceiling: f64,
    beta_sigma: f64,
    sigma_size: usize,
    gap: f64,
    gap_max: f64,
    sigma_gaps: Vec<f64>,
}

impl RankingInstance {
    fn build(n: usize, means: &[f64]) -> Self {
        let (game, _, candidates) = build_ranking_game(n, None).unwrap();
        let sigma = GlobalObservableSet::find(&game, candidates, DEFAULT_RANK_TOL).unwrap();
        let profile = gap_profile(&game, means, game.enumerate_actions()).unwrap();
        let sigma_gaps: Vec<f64> = sigma
            .actions()
            .iter()
            .map(|a| profile.optimal_value - game.expected_reward(a, means))
            .collect();
        RankingInstance {
            lipschitz: game.lipschitz_constant(),
            reward_ceiling: game.reward_ceiling(),
            beta_sigma: sigma.beta_sigma(),
            sigma_size: sigma.size(),
            gap: profile.gap_delta.expect("instance has a positive gap"),
            gap_max: profile.gap_max,
            sigma_gaps,
        }
    }
}

#[test]
fn criterion_01_exact_recovery_under_point_mass() {
    let started = Instant::now();
    let theta0 = vec![0.8, 0.6, 0.4, 0.2];
    let game = RankingGame::with_default_gains(4).unwrap();
    let oracles = game.oracles();
    let sigma =
        GlobalObservableSet::find(&game, game.sigma_candidates(), DEFAULT_RANK_TOL).unwrap();
    let mut env = DrawEnv {
        game: &game,
        adversary: AdversaryDistribution::PointMass(theta0.clone()),
        rng: ChaCha12Rng::seed_from_u64(1),
    };
    let trace = pege_run(
        &sigma,
        &oracles,
        &PegeParams::sqrt_exploit(),
        10_000,
        &mut env,
    )
    .unwrap();

    let worst_estimate_error = trace
        .theta_snapshots
        .iter()
        .flat_map(|s| s.theta_hat.iter().zip(&theta0).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max);
    let optimal = ranking_argmax(&theta0);
    let all_exploits_optimal = trace
        .segments
        .iter()
        .filter(|s| s.tag == PhaseTag::Exploit)
        .all(|s| matches!(&s.actions, SegmentActions::Single(a) if a == &optimal));
    let worst_recovery_error = trace
        .theta_tildes
        .iter()
        .map(|t| {
            t.iter()
                .zip(&theta0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0f64, f64::max);
    let elapsed = started.elapsed();

    criterion(
        1,
        "exact recovery",
        worst_estimate_error <= 1e-9
            && all_exploits_optimal
            && worst_recovery_error <= sigma.beta_sigma() + 1e-9
            && elapsed.as_secs_f64() < 1.0,
        &format!(
            "max |theta_hat - theta*| = {worst_estimate_error:.2e}, exploits optimal = {all_exploits_optimal}, {} ms",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_02_beta_sigma_closed_form() {
    let mut worst_rel = 0.0f64;
    for n in 2..=8usize {
        let (game, _, candidates) = build_ranking_game(n, None).unwrap();
        let sigma = GlobalObservableSet::find(&game, candidates, DEFAULT_RANK_TOL).unwrap();
        let expected = (n as f64).powf(1.5);
        let rel = (sigma.beta_sigma() - expected).abs() / expected;
        worst_rel = worst_rel.max(rel);
    }
    criterion(
        2,
        "beta_sigma = n^(3/2)",
        worst_rel <= 1e-9,
        &format!("worst relative error over n=2..8: {worst_rel:.2e}"),
    );
}

#[test]
fn criterion_03_deterministic_recovery_bound_across_runs() {
    // run_single re-checks || theta_tilde - theta* || <= beta_sigma + 1e-9
    // for every recovery of every run and errors out on violation; sweep a
    // spread of environments, adversaries, and learners through it
    let mut battery: Vec<ExperimentConfig> = Vec::new();
    for adversary in [
        AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.1]),
        AdversaryDistribution::PointMass(vec![0.7, 0.4, 0.2]),
        AdversaryDistribution::IndependentBeta {
            alpha: vec![2.0, 1.0, 0.5],
            beta: vec![2.0, 3.0, 0.5],
        },
    ] {
        for algorithm in [
            AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
            AlgorithmSpec::Pege(PegeParams::exp_exploit_linear_explore(0.5)),
            AlgorithmSpec::Pege2,
        ] {
            battery.push(
                ExperimentConfig::new(
                    EnvironmentSpec::Ranking { n: 3, gains: None },
                    adversary.clone(),
                    algorithm,
                    5_000,
                    (0..5).collect(),
                )
                .unwrap(),
            );
        }
    }
    battery.push(
        ExperimentConfig::new(
            EnvironmentSpec::TwoAction,
            AdversaryDistribution::BernoulliProduct(vec![0.5]),
            AlgorithmSpec::GapEstimation {
                t0: 200.0,
                delta: 0.05,
            },
            1_000,
            (0..5).collect(),
        )
        .unwrap(),
    );
    battery.push(
        ExperimentConfig::new(
            EnvironmentSpec::ScoreRanking { n: 3 },
            AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.1]),
            AlgorithmSpec::Pege(PegeParams::sqrt_exploit()),
            5_000,
            (0..5).collect(),
        )
        .unwrap(),
    );

    let mut runs = 0usize;
    for config in &battery {
        for &seed in &config.seeds {
            run_single(config, seed).expect("recovery bound violated");
            runs += 1;
        }
    }
    criterion(
        3,
        "deterministic recovery bound",
        true,
        &format!("{runs} runs, every recovery within beta_sigma + 1e-9"),
    );
}

#[test]
fn criterion_04_oracles_match_exhaustive_enumeration() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let mut checked = 0u64;
    let mut ok = true;
    'outer: for n in 2..=6usize {
        let game = RankingGame::with_default_gains(n).unwrap();
        let all: Vec<_> = game.enumerate_actions().collect();
        for _ in 0..1000 {
            let theta: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let best = ranking_argmax(&theta);
            let best_value = game.expected_reward(&best, &theta);
            let brute_best = all
                .iter()
                .map(|a| game.expected_reward(a, &theta))
                .fold(f64::NEG_INFINITY, f64::max);
            let second = ranking_secondmax(game.gains(), &theta, &best).unwrap();
            let second_value = game.expected_reward(&second, &theta);
            let brute_second = all
                .iter()
                .filter(|a| *a != &best)
                .map(|a| game.expected_reward(a, &theta))
                .fold(f64::NEG_INFINITY, f64::max);
            checked += 1;
            if best_value != brute_best || second_value != brute_second {
                ok = false;
                break 'outer;
            }
        }
    }
    let elapsed = started.elapsed();
    criterion(
        4,
        "oracle equivalence",
        ok && elapsed.as_secs() < 30,
        &format!(
            "{checked} random vectors matched exactly, {} ms",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_05_sqrt_exploit_scaling() {
    let (config, instance) = ranking5();
    let curves = run_seeds(&config);
    let agg = aggregate(&curves).unwrap();
    let mean = agg.mean_snapshots();

    let slope = fit_scaling_exponent(&mean, 10_000).unwrap();
    let slope_ok = (0.50..=0.78).contains(&slope);

    let mut ceiling_ok = true;
    let mut worst_ratio = 0.0f64;
    for &(t, regret) in &mean {
        let rhs = sqrt_exploit_regret_bound(
            t as f64,
            instance.lipschitz,
            instance.beta_sigma,
            instance.sigma_size,
            instance.reward_ceiling,
        )
        .unwrap();
        worst_ratio = worst_ratio.max(regret / rhs);
        if regret > rhs {
            ceiling_ok = false;
        }
    }
    criterion(
        5,
        "distribution-independent scaling",
        slope_ok && ceiling_ok,
        &format!(
            "slope = {slope:.3} (target [0.50, 0.78]), max regret/bound = {worst_ratio:.3e}, final mean regret = {:.1}",
            agg.final_mean()
        ),
    );
}

#[test]
fn criterion_06_exp_exploit_polylog_growth() {
    let (mut config, instance) = ranking5();
    let h = instance.gap * instance.gap
        / (8.0
            * instance.lipschitz
            * instance.lipschitz
            * instance.beta_sigma
            * instance.beta_sigma);
    config.algorithm = AlgorithmSpec::Pege(PegeParams::exp_exploit_linear_explore(h));
    let curves = run_seeds(&config);
    let agg = aggregate(&curves).unwrap();
    let mean = agg.mean_snapshots();

    let sigma_gap_sum: f64 = instance.sigma_gaps.iter().sum();
    let rhs = exp_exploit_linear_explore_regret_bound(
        1e6,
        h,
        instance.lipschitz,
        instance.beta_sigma,
        instance.gap,
        instance.gap_max,
        sigma_gap_sum,
    )
    .unwrap();
    let final_regret = agg.final_mean();
    let ceiling_ok = final_regret <= rhs;

    let slope = fit_scaling_exponent(&mean, 10_000).unwrap();
    let slope_ok = slope <= 0.3;

    criterion(
        6,
        "gap-dependent polylog growth",
        ceiling_ok && slope_ok,
        &format!(
            "h = {h:.3e}, final mean regret = {final_regret:.1} vs bound {rhs:.3e}, slope = {slope:.3} (required <= 0.3)"
        ),
    );
}

#[test]
fn criterion_07_gap_estimation_concentrates() {
    // two-action instance: gap 0.5, unit constants
    let delta = 0.05;
    let thresholds = theory_thresholds(0.5, 1.0, 1.0, delta).unwrap();
    let t0 = 15_000.0;
    assert!(t0 > thresholds.t1, "precondition of the criterion");
    let config = ExperimentConfig::new(
        EnvironmentSpec::TwoAction,
        AdversaryDistribution::BernoulliProduct(vec![0.5]),
        AlgorithmSpec::GapEstimation { t0, delta },
        20_000,
        (0..200).collect(),
    )
    .unwrap();
    let curves = run_seeds(&config);

    let mut good = 0usize;
    let mut soundness_ok = true;
    for curve in &curves {
        if let Some(GapOutcome::Estimate {
            delta_hat,
            stop_episode,
            ..
        }) = curve.gap_outcome.as_ref()
        {
            if (0.25..=0.75).contains(delta_hat) && (*stop_episode as f64) <= thresholds.t1 {
                good += 1;
            }
            if (*stop_episode as f64) <= thresholds.t2 {
                soundness_ok = false;
            }
        }
    }
    let fraction = good as f64 / curves.len() as f64;
    criterion(
        7,
        "gap estimate within constant factors",
        fraction >= 0.95 && soundness_ok,
        &format!(
            "{good}/200 runs gave delta_hat in [0.25, 0.75] within t1 = {:.0}; all stop episodes > t2 = {:.0}: {soundness_ok}",
            thresholds.t1, thresholds.t2
        ),
    );
}

#[test]
fn criterion_08_tied_optimum_exceeds_threshold() {
    let config = ExperimentConfig::new(
        EnvironmentSpec::Ranking { n: 3, gains: None },
        AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.5]),
        AlgorithmSpec::GapEstimation {
            t0: 300.0,
            delta: 0.05,
        },
        1_000,
        (0..200).collect(),
    )
    .unwrap();
    let curves = run_seeds(&config);
    let exceeded = curves
        .iter()
        .filter(|c| matches!(c.gap_outcome, Some(GapOutcome::ThresholdExceeded { .. })))
        .count();
    let fraction = exceeded as f64 / curves.len() as f64;
    criterion(
        8,
        "tied optimum reports threshold exceeded",
        fraction >= 0.95,
        &format!("{exceeded}/200 runs exceeded the threshold"),
    );
}

#[test]
fn criterion_09_combined_learner_respects_both_ceilings() {
    let means = vec![0.9, 0.5, 0.1];
    let instance = RankingInstance::build(3, &means);
    let unique = ExperimentConfig::new(
        EnvironmentSpec::Ranking { n: 3, gains: None },
        AdversaryDistribution::BernoulliProduct(means),
        AlgorithmSpec::Pege2,
        100_000,
        (0..100).collect(),
    )
    .unwrap();
    let unique_curves = run_seeds(&unique);
    let unique_mean = aggregate(&unique_curves).unwrap().final_mean();
    let b2 = regret_bound_b2(
        1e5,
        instance.lipschitz,
        instance.beta_sigma,
        instance.gap,
        &instance.sigma_gaps,
        instance.reward_ceiling,
    )
    .unwrap();
    let b2_ok = unique_mean <= b2;

    // per-seed tuned h must land in [gap^2/36, gap^2/4] / (R^2 beta^2) for
    // at least 95% of the seeds whose estimation stage produced an estimate
    let estimate_curves: Vec<&RegretCurve> = unique_curves
        .iter()
        .filter(|c| c.gap_outcome.as_ref().is_some_and(|o| o.is_estimate()))
        .collect();
    let r2b2 = instance.lipschitz * instance.lipschitz * instance.beta_sigma * instance.beta_sigma;
    let h_lo = instance.gap * instance.gap / 36.0 / r2b2;
    let h_hi = instance.gap * instance.gap / 4.0 / r2b2;
    let h_in_range = estimate_curves
        .iter()
        .filter(|c| c.tuned_h.is_some_and(|h| (h_lo..=h_hi).contains(&h)))
        .count();
    let h_ok =
        estimate_curves.is_empty() || (h_in_range as f64 / estimate_curves.len() as f64) >= 0.95;
    let estimate_mean_ok = estimate_curves.is_empty() || {
        let m = estimate_curves
            .iter()
            .map(|c| c.final_regret())
            .sum::<f64>()
            / estimate_curves.len() as f64;
        m <= b2
    };

    // tied-optimum variant stays under the distribution-independent ceiling
    let tied = ExperimentConfig::new(
        EnvironmentSpec::Ranking { n: 3, gains: None },
        AdversaryDistribution::BernoulliProduct(vec![0.9, 0.5, 0.5]),
        AlgorithmSpec::Pege2,
        100_000,
        (0..100).collect(),
    )
    .unwrap();
    let tied_curves = run_seeds(&tied);
    let tied_mean = aggregate(&tied_curves).unwrap().final_mean();
    let b1 = regret_bound_b1(
        1e5,
        instance.lipschitz,
        instance.beta_sigma,
        instance.sigma_size,
        instance.reward_ceiling,
    )
    .unwrap();
    let b1_ok = tied_mean <= b1;

    criterion(
        9,
        "combined learner ceilings",
        b2_ok && estimate_mean_ok && h_ok && b1_ok,
        &format!(
            "unique: mean regret {unique_mean:.1} <= b2 {b2:.3e} ({}/100 estimate outcomes, h in range: {h_in_range}); tied: mean regret {tied_mean:.1} <= b1 {b1:.1}",
            estimate_curves.len()
        ),
    );
}

/// Captures warnings emitted through the `log` facade.
struct CaptureLogger;

static CAPTURED: OnceLock<Mutex<Vec<String>>> = OnceLock::new();

impl log::Log for CaptureLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }
    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            CAPTURED
                .get_or_init(|| Mutex::new(Vec::new()))
                .lock()
                .unwrap()
                .push(record.args().to_string());
        }
    }
    fn flush(&self) {}
}

#[test]
fn criterion_10_exploitation_rate_guard() {
    let _ = log::set_logger(&CaptureLogger);
    log::set_max_level(log::LevelFilter::Warn);

    // gap = 0.5, unit constants: the admissible range is (0, 0.0625)
    let invalid = ExperimentConfig::new(
        EnvironmentSpec::TwoAction,
        AdversaryDistribution::BernoulliProduct(vec![0.5]),
        AlgorithmSpec::Pege(PegeParams::exp_exploit(0.0625)),
        10_000,
        vec![0],
    )
    .unwrap();
    let before = CAPTURED
        .get_or_init(|| Mutex::new(Vec::new()))
        .lock()
        .unwrap()
        .len();
    let curve = run_single(&invalid, 0).expect("run must complete despite the warning");
    let warnings: Vec<String> = CAPTURED.get().unwrap().lock().unwrap()[before..].to_vec();
    let warned = warnings.iter().any(|w| w.contains("precondition"));
    let still_ran = curve.snapshots.last().unwrap().0 == 10_000;

    // valid rate: the gap-dependent ceiling applies
    let valid = ExperimentConfig::new(
        EnvironmentSpec::TwoAction,
        AdversaryDistribution::BernoulliProduct(vec![0.5]),
        AlgorithmSpec::Pege(PegeParams::exp_exploit(0.03)),
        1_000_000,
        (0..50).collect(),
    )
    .unwrap();
    let curves = run_seeds(&valid);
    let mean_regret = aggregate(&curves).unwrap().final_mean();
    // sigma = {rewarded action} which is optimal: no exploration regret term
    let rhs = exp_exploit_regret_bound(1e6, 0.03, 1.0, 1.0, 0.5, 0.5, 0.0).unwrap();
    let ceiling_ok = mean_regret <= rhs;

    criterion(
        10,
        "exploitation rate guard",
        warned && still_ran && ceiling_ok,
        &format!(
            "warning emitted = {warned}, run completed = {still_ran}, mean regret {mean_regret:.3} <= bound {rhs:.1}"
        ),
    );
}

#[test]
fn criterion_11_cli_byte_determinism() {
    let config =
        cpm_cli::parse_config_str("env = ranking\nn = 3\nalgo = pege-t1\nT = 1000\nseeds = 3\n")
            .unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = cpm_cli::run_experiment(&config, dir_a.path(), 1, None).unwrap();
    let b = cpm_cli::run_experiment(&config, dir_b.path(), 2, None).unwrap();
    let mut identical = true;
    for (fa, fb) in a.seed_files.iter().zip(&b.seed_files) {
        if std::fs::read(fa).unwrap() != std::fs::read(fb).unwrap() {
            identical = false;
        }
    }
    if std::fs::read(&a.aggregate_file).unwrap() != std::fs::read(&b.aggregate_file).unwrap() {
        identical = false;
    }
    criterion(
        11,
        "CLI byte determinism",
        identical,
        "seed and aggregate CSVs byte-identical across reruns",
    );
}
