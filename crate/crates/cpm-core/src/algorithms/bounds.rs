//! Closed-form regret ceilings for the learners, evaluated numerically.
//! Planning and acceptance instrumentation: none of these feed back into
//! the learners.

use crate::error::{CpmError, Result};
use crate::math;

fn e2() -> f64 {
    core::f64::consts::E * core::f64::consts::E
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(CpmError::invalid(name, "must be positive"));
    }
    Ok(())
}

/// Regret ceiling of the constant-exploration, `ceil(sqrt(b))`-exploitation
/// schedule over `t` rounds:
/// `R_max |sigma| t^(2/3) + 2 R beta_sigma t^(2/3) sqrt(log(2e^2) + 2 log t) + R_max`.
pub fn sqrt_exploit_regret_bound(
    t: f64,
    lipschitz: f64,
    beta_sigma: f64,
    sigma_size: usize,
    reward_ceiling: f64,
) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("lipschitz", lipschitz)?;
    check_positive("beta_sigma", beta_sigma)?;
    check_positive("reward_ceiling", reward_ceiling)?;
    let t23 = math::powf(t, 2.0 / 3.0);
    Ok(reward_ceiling * sigma_size as f64 * t23
        + 2.0 * lipschitz * beta_sigma * t23 * math::sqrt(math::ln(2.0 * e2()) + 2.0 * math::ln(t))
        + reward_ceiling)
}

/// Regret ceiling of the linear-exploration, exponential-exploitation
/// schedule with rate `h`:
/// `sigma_gap_sum (log t / h)^2
///  + 4 sqrt(2 pi) e^2 R gap_max beta_sigma / gap * exp(2 h^2 R^2 beta_sigma^2 / gap^2)`.
pub fn exp_exploit_linear_explore_regret_bound(
    t: f64,
    h: f64,
    lipschitz: f64,
    beta_sigma: f64,
    gap: f64,
    gap_max: f64,
    sigma_gap_sum: f64,
) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("h", h)?;
    check_positive("gap", gap)?;
    check_positive("lipschitz", lipschitz)?;
    check_positive("beta_sigma", beta_sigma)?;
    let r2b2 = lipschitz * lipschitz * beta_sigma * beta_sigma;
    let log_t = math::ln(t);
    let additive =
        4.0 * math::sqrt(2.0 * core::f64::consts::PI) * e2() * lipschitz * gap_max * beta_sigma
            / gap
            * math::exp(2.0 * h * h * r2b2 / (gap * gap));
    Ok(sigma_gap_sum * (log_t / h) * (log_t / h) + additive)
}

/// Largest admissible exploitation rate for the constant-exploration
/// exponential schedule: `gap^2 / (4 R^2 beta_sigma^2)`.
pub fn exp_exploit_h_limit(gap: f64, lipschitz: f64, beta_sigma: f64) -> f64 {
    gap * gap / (4.0 * lipschitz * lipschitz * beta_sigma * beta_sigma)
}

/// Whether `h` satisfies the precondition `0 < h < gap^2 / (4 R^2 beta_sigma^2)`
/// of the gap-dependent guarantee for the constant-exploration exponential
/// schedule.
pub fn exp_exploit_h_valid(h: f64, gap: f64, lipschitz: f64, beta_sigma: f64) -> bool {
    h > 0.0 && h < exp_exploit_h_limit(gap, lipschitz, beta_sigma)
}

/// Regret ceiling of the constant-exploration exponential schedule:
/// `sigma_gap_sum log t / h + 2 e^2 gap_max / (gap^2/(4 R^2 beta_sigma^2) - h)`.
/// Errors when `h` violates its precondition: the bound does not apply.
pub fn exp_exploit_regret_bound(
    t: f64,
    h: f64,
    lipschitz: f64,
    beta_sigma: f64,
    gap: f64,
    gap_max: f64,
    sigma_gap_sum: f64,
) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("gap", gap)?;
    check_positive("lipschitz", lipschitz)?;
    check_positive("beta_sigma", beta_sigma)?;
    if !exp_exploit_h_valid(h, gap, lipschitz, beta_sigma) {
        return Err(CpmError::invalid(
            "h",
            "must lie in (0, gap^2 / (4 R^2 beta_sigma^2))",
        ));
    }
    let limit = exp_exploit_h_limit(gap, lipschitz, beta_sigma);
    Ok(sigma_gap_sum * math::ln(t) / h + 2.0 * e2() * gap_max / (limit - h))
}

/// Distribution-independent ceiling of the combined learner:
/// `2 (2 R beta_sigma |sigma|^2 R_max^2 t)^(2/3) sqrt(log(4 e^2 t^3)) + R_max`.
pub fn regret_bound_b1(
    t: f64,
    lipschitz: f64,
    beta_sigma: f64,
    sigma_size: usize,
    reward_ceiling: f64,
) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("lipschitz", lipschitz)?;
    check_positive("beta_sigma", beta_sigma)?;
    check_positive("reward_ceiling", reward_ceiling)?;
    let s = sigma_size as f64;
    let inner = 2.0 * lipschitz * beta_sigma * s * s * reward_ceiling * reward_ceiling * t;
    Ok(
        2.0 * math::powf(inner, 2.0 / 3.0) * math::sqrt(math::ln(4.0 * e2() * t * t * t))
            + reward_ceiling,
    )
}

/// Gap-dependent ceiling of the combined learner: the sum of
/// `(256 R^2 b^2 / gap^2) log(512 e^2 R^2 b^2 t / gap^2) R_max |sigma|`,
/// `sum_x gap_x (36 R^2 b^2 log t / gap^2)` over the observable-set
/// actions, `8 e^2 R^2 b^2 / gap^2`, and `R_max`.
pub fn regret_bound_b2(
    t: f64,
    lipschitz: f64,
    beta_sigma: f64,
    gap: f64,
    sigma_gaps: &[f64],
    reward_ceiling: f64,
) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("gap", gap)?;
    check_positive("lipschitz", lipschitz)?;
    check_positive("beta_sigma", beta_sigma)?;
    check_positive("reward_ceiling", reward_ceiling)?;
    if sigma_gaps.is_empty() {
        return Err(CpmError::invalid("sigma_gaps", "must be non-empty"));
    }
    let r2b2 = lipschitz * lipschitz * beta_sigma * beta_sigma;
    let gap2 = gap * gap;
    let sigma_size = sigma_gaps.len() as f64;
    let first = 256.0 * r2b2 / gap2
        * math::ln(512.0 * e2() * r2b2 * t / gap2)
        * reward_ceiling
        * sigma_size;
    let second: f64 = sigma_gaps
        .iter()
        .map(|gx| gx * 36.0 * r2b2 * math::ln(t) / gap2)
        .sum();
    Ok(first + second + 8.0 * e2() * r2b2 / gap2 + reward_ceiling)
}
