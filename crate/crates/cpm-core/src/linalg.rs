//! Small dense linear algebra for move recovery: rank, Moore-Penrose
//! pseudoinverse, spectral norm, the per-recovery error constant
//! `beta_sigma`, and greedy construction of a global observable set.
//!
//! Everything here goes through SVD rather than explicit normal equations;
//! the feedback matrices in the bundled environments are tiny 0/1 matrices,
//! so the default relative rank tolerance of `1e-10` is far below any
//! genuine near-degeneracy.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{CpmError, Result};
use crate::game::Game;
use crate::math;

/// Default rank tolerance, relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

fn require_nonempty(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(CpmError::EmptyMatrix);
    }
    Ok(())
}

/// Number of singular values exceeding `tol` times the largest one.
pub fn matrix_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    require_nonempty(m)?;
    if !(tol > 0.0) {
        return Err(CpmError::invalid("tol", "must be positive"));
    }
    let svd = m.clone().svd(false, false);
    // nalgebra sorts singular values in decreasing order
    let largest = svd.singular_values[0];
    if largest == 0.0 {
        return Ok(0);
    }
    let cutoff = tol * largest;
    Ok(svd.singular_values.iter().filter(|&&s| s > cutoff).count())
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    require_nonempty(m)?;
    let svd = m.clone().svd(false, false);
    Ok(svd.singular_values[0])
}

/// Moore-Penrose pseudoinverse of a full-column-rank matrix.
///
/// Computed from the SVD; equals `(M^T M)^-1 M^T` at full column rank.
/// Rank deficiency at tolerance `tol` is an explicit error, never silently
/// absorbed.
pub fn pseudoinverse(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    require_nonempty(m)?;
    if !(tol > 0.0) {
        return Err(CpmError::invalid("tol", "must be positive"));
    }
    let svd = m.clone().svd(true, true);
    let largest = svd.singular_values[0];
    let cutoff = tol * largest;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < m.ncols() {
        return Err(CpmError::RankDeficient {
            rank,
            cols: m.ncols(),
        });
    }
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    // pinv = V * S^-1 * U^T, using all ncols singular values
    let s_inv = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&s| 1.0 / s),
    );
    Ok(v_t.transpose() * DMatrix::from_diagonal(&s_inv) * u.transpose())
}

/// The per-recovery error constant of a stacked feedback matrix:
/// `sqrt(n) * sum_k || (M^T M)^-1 M_k^T M_k ||_2` over the per-action
/// blocks `M_k`. Depends only on the feedback structure, not on the
/// adversary.
pub fn compute_beta_sigma(blocks: &[DMatrix<f64>], tol: f64) -> Result<f64> {
    if blocks.is_empty() {
        return Err(CpmError::EmptyMatrix);
    }
    let n = blocks[0].ncols();
    for b in blocks {
        if b.ncols() != n {
            return Err(CpmError::DimensionMismatch {
                expected: n,
                got: b.ncols(),
            });
        }
    }
    let total_rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::<f64>::zeros(total_rows, n);
    let mut row = 0;
    for b in blocks {
        stacked.rows_mut(row, b.nrows()).copy_from(b);
        row += b.nrows();
    }

    let svd = stacked.clone().svd(false, true);
    let largest = svd.singular_values[0];
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol * largest)
        .count();
    if rank < n {
        return Err(CpmError::RankDeficient { rank, cols: n });
    }
    // (M^T M)^-1 = V * S^-2 * V^T from the SVD of the stack
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let s_inv2 = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&s| 1.0 / (s * s)),
    );
    let gram_inv = v_t.transpose() * DMatrix::from_diagonal(&s_inv2) * v_t;

    let mut sum = 0.0;
    for b in blocks {
        let summand = &gram_inv * (b.transpose() * b);
        sum += spectral_norm(&summand)?;
    }
    Ok(math::sqrt(n as f64) * sum)
}

/// An ordered action subset whose stacked feedback matrices jointly observe
/// the whole adversary space (full column rank), together with the
/// precomputed pseudoinverse and error constant used for move recovery.
#[derive(Clone)]
pub struct GlobalObservableSet<A> {
    actions: Vec<A>,
    stacked: DMatrix<f64>,
    pinv: DMatrix<f64>,
    beta_sigma: f64,
    /// Per-action `(start, len)` row ranges within the stacked matrix.
    row_offsets: Vec<(usize, usize)>,
}

impl<A: fmt::Debug> fmt::Debug for GlobalObservableSet<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GlobalObservableSet")
            .field("actions", &self.actions)
            .field("beta_sigma", &self.beta_sigma)
            .field("rows", &self.stacked.nrows())
            .field("dimension", &self.stacked.ncols())
            .finish()
    }
}

impl<A: Clone + PartialEq + fmt::Debug> GlobalObservableSet<A> {
    /// Builds the set from an explicit action list, verifying full column
    /// rank at tolerance `tol`.
    pub fn from_actions<G>(game: &G, actions: Vec<A>, tol: f64) -> Result<Self>
    where
        G: Game<Action = A>,
    {
        if actions.is_empty() {
            return Err(CpmError::invalid("actions", "must be non-empty"));
        }
        let blocks: Vec<DMatrix<f64>> = actions.iter().map(|a| game.feedback_matrix(a)).collect();
        let n = game.dimension();
        let mut row_offsets = Vec::with_capacity(blocks.len());
        let mut row = 0usize;
        for b in &blocks {
            if b.ncols() != n {
                return Err(CpmError::DimensionMismatch {
                    expected: n,
                    got: b.ncols(),
                });
            }
            row_offsets.push((row, b.nrows()));
            row += b.nrows();
        }
        let mut stacked = DMatrix::<f64>::zeros(row, n);
        for (b, &(start, len)) in blocks.iter().zip(&row_offsets) {
            stacked.rows_mut(start, len).copy_from(b);
        }

        let rank = matrix_rank(&stacked, tol)?;
        if rank < n {
            return Err(CpmError::RankDeficient { rank, cols: n });
        }
        let pinv = pseudoinverse(&stacked, tol)?;
        let beta_sigma = compute_beta_sigma(&blocks, tol)?;
        Ok(GlobalObservableSet {
            actions,
            stacked,
            pinv,
            beta_sigma,
            row_offsets,
        })
    }

    /// Greedy scan over a candidate stream: an action is appended iff it
    /// strictly increases the rank of the stack; the scan stops once the
    /// rank reaches the game dimension. Errors if the stream runs out
    /// first.
    pub fn find<G, I>(game: &G, candidates: I, tol: f64) -> Result<Self>
    where
        G: Game<Action = A>,
        I: IntoIterator<Item = A>,
    {
        let n = game.dimension();
        let mut chosen: Vec<A> = Vec::new();
        let mut rows: Vec<DMatrix<f64>> = Vec::new();
        let mut rank = 0usize;
        for cand in candidates {
            let block = game.feedback_matrix(&cand);
            let total: usize = rows.iter().map(|b| b.nrows()).sum::<usize>() + block.nrows();
            let mut stacked = DMatrix::<f64>::zeros(total, n);
            let mut at = 0;
            for b in rows.iter().chain(core::iter::once(&block)) {
                stacked.rows_mut(at, b.nrows()).copy_from(b);
                at += b.nrows();
            }
            let new_rank = matrix_rank(&stacked, tol)?;
            if new_rank > rank {
                rank = new_rank;
                rows.push(block);
                chosen.push(cand);
                if rank == n {
                    return Self::from_actions(game, chosen, tol);
                }
            }
        }
        Err(CpmError::NotGloballyObservable { rank, dimension: n })
    }

    pub fn actions(&self) -> &[A] {
        &self.actions
    }

    pub fn size(&self) -> usize {
        self.actions.len()
    }

    pub fn dimension(&self) -> usize {
        self.stacked.ncols()
    }

    pub fn stacked_matrix(&self) -> &DMatrix<f64> {
        &self.stacked
    }

    pub fn pseudoinverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    pub fn beta_sigma(&self) -> f64 {
        self.beta_sigma
    }

    pub fn row_offsets(&self) -> &[(usize, usize)] {
        &self.row_offsets
    }
}
