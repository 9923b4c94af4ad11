//! Recovery of adversary moves from stacked feedback, running means of the
//! recovered moves, and the confidence width driving the stopping rule.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DVector;

use crate::error::{CpmError, Result};
use crate::linalg::GlobalObservableSet;
use crate::math;

/// Applies the pseudoinverse of the observable set to the concatenated
/// feedback of one sweep, yielding one recovered move `theta_tilde`.
///
/// `feedbacks[k]` must be the feedback received for the k-th action of the
/// set, in order. When every feedback came from the same adversary move the
/// recovery is exact up to rounding; across different draws the recovery
/// error is deterministically bounded by `beta_sigma`.
pub fn recover_theta_tilde<A: Clone + PartialEq + fmt::Debug>(
    sigma: &GlobalObservableSet<A>,
    feedbacks: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let offsets = sigma.row_offsets();
    if feedbacks.len() != offsets.len() {
        return Err(CpmError::FeedbackLengthMismatch {
            index: feedbacks.len().min(offsets.len()),
            expected: offsets.len(),
            got: feedbacks.len(),
        });
    }
    let total: usize = offsets.iter().map(|&(_, len)| len).sum();
    let mut stacked = DVector::<f64>::zeros(total);
    for (index, (fb, &(start, len))) in feedbacks.iter().zip(offsets).enumerate() {
        if fb.len() != len {
            return Err(CpmError::FeedbackLengthMismatch {
                index,
                expected: len,
                got: fb.len(),
            });
        }
        for (i, &v) in fb.iter().enumerate() {
            stacked[start + i] = v;
        }
    }
    let theta = sigma.pseudoinverse() * stacked;
    Ok(theta.iter().copied().collect())
}

/// Running arithmetic mean of recovered moves.
///
/// The mean is unclamped by default; recovered moves can leave `[0,1]^n`
/// and clamping them would bias the estimate. Oracles that only accept
/// vectors in the unit cube receive a componentwise-clamped view instead.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaEstimate {
    theta_hat: Vec<f64>,
    sample_count: u64,
    clamp_for_oracles: bool,
}

impl ThetaEstimate {
    pub fn new(dimension: usize) -> Self {
        ThetaEstimate {
            theta_hat: vec![0.0; dimension],
            sample_count: 0,
            clamp_for_oracles: false,
        }
    }

    /// Estimate whose oracle view is clamped to `[0,1]^n`.
    pub fn with_clamping(dimension: usize) -> Self {
        ThetaEstimate {
            clamp_for_oracles: true,
            ..Self::new(dimension)
        }
    }

    /// Folds one recovered move into the mean (numerically stable
    /// incremental form).
    pub fn update(&mut self, theta_tilde: &[f64]) -> Result<()> {
        if theta_tilde.len() != self.theta_hat.len() {
            return Err(CpmError::DimensionMismatch {
                expected: self.theta_hat.len(),
                got: theta_tilde.len(),
            });
        }
        self.sample_count += 1;
        let k = self.sample_count as f64;
        for (mean, &x) in self.theta_hat.iter_mut().zip(theta_tilde) {
            *mean += (x - *mean) / k;
        }
        Ok(())
    }

    /// The raw running mean.
    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    /// Whether oracle views of this estimate are clamped to the unit cube.
    pub fn clamped(&self) -> bool {
        self.clamp_for_oracles
    }

    /// The vector handed to oracles: clamped componentwise iff the estimate
    /// was configured for clamping.
    pub fn oracle_view(&self) -> Cow<'_, [f64]> {
        if self.clamp_for_oracles {
            Cow::Owned(self.theta_hat.iter().map(|&x| x.clamp(0.0, 1.0)).collect())
        } else {
            Cow::Borrowed(&self.theta_hat)
        }
    }
}

/// Confidence width `w(b) = sqrt(R^2 beta_sigma^2 log(4 e^2 b^2 / delta) / b)`
/// after `b` exploration episodes.
pub fn confidence_width(b: u64, lipschitz: f64, beta_sigma: f64, delta: f64) -> Result<f64> {
    if b < 1 {
        return Err(CpmError::invalid("b", "episode index must be at least 1"));
    }
    if !(lipschitz > 0.0) {
        return Err(CpmError::invalid("lipschitz", "must be positive"));
    }
    if !(beta_sigma > 0.0) {
        return Err(CpmError::invalid("beta_sigma", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CpmError::invalid("delta", "must lie in (0,1)"));
    }
    let b = b as f64;
    let e2 = core::f64::consts::E * core::f64::consts::E;
    let r2b2 = lipschitz * lipschitz * beta_sigma * beta_sigma;
    let log_term = math::ln(4.0 * e2 * b * b / delta);
    Ok(math::sqrt(r2b2 * log_term / b))
}

/// Episode-count thresholds for the gap-estimation stopping analysis.
///
/// `t1` bounds the episodes needed to certify a gap of size `gap` with
/// confidence `delta`; an estimate produced before the exploration budget
/// runs out must have taken more than `t2` episodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapThresholds {
    pub t1: f64,
    pub t2: f64,
}

/// Evaluates both thresholds. Test/planning instrumentation only: learners
/// never know the true gap.
pub fn theory_thresholds(
    gap: f64,
    lipschitz: f64,
    beta_sigma: f64,
    delta: f64,
) -> Result<GapThresholds> {
    if !(gap > 0.0) {
        return Err(CpmError::invalid("gap", "must be positive"));
    }
    if !(lipschitz > 0.0) || !(beta_sigma > 0.0) {
        return Err(CpmError::invalid("lipschitz", "constants must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CpmError::invalid("delta", "must lie in (0,1)"));
    }
    let e2 = core::f64::consts::E * core::f64::consts::E;
    let r2b2 = lipschitz * lipschitz * beta_sigma * beta_sigma;
    let gap2 = gap * gap;
    let t1 = 256.0 * r2b2 / gap2 * math::ln(512.0 * e2 * r2b2 / (gap2 * delta));
    let t2 = 16.0 * r2b2 / gap2 * math::ln(4.0 * e2 / delta);
    Ok(GapThresholds { t1, t2 })
}
