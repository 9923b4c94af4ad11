//! Stochastic combinatorial partial monitoring (CPM) games and learners.
//!
//! A CPM game is a repeated game where the learner picks an action from a
//! possibly huge (or continuous) set, the adversary draws a vector
//! `theta(t)` from `[0,1]^n` i.i.d. with unknown mean, and the only feedback
//! is a linear transformation `M_x * theta(t)` of the adversary's move:
//! neither the move nor the reward is revealed.
//!
//! The crate provides:
//!
//! - [`game`]: the game abstraction: feedback matrices, reward evaluators,
//!   offline argmax / arg-secondmax oracles, adversary distributions, and
//!   exact gap profiles for finite instances.
//! - [`linalg`]: the small dense linear algebra behind move recovery:
//!   stacked feedback matrices, Moore-Penrose pseudoinverse, the
//!   per-recovery error constant `beta_sigma`, and greedy construction of a
//!   global observable set.
//! - [`estimation`]: recovery of adversary moves from stacked feedback,
//!   running means, and the confidence width used by the stopping rule.
//! - [`algorithms`]: the learners: the phased explore/exploit framework
//!   (PEGE) with its published parameterizations, gap estimation with a
//!   width-based stopping rule, and the combined learner (PEGE2).
//! - [`environments`]: concrete games: online ranking with relevance
//!   feedback on the top item, the continuous score-vector variant with
//!   squared loss, and explicit tabular fixtures.
//! - [`simulator`]: seeded learner/adversary interaction loops,
//!   pseudo-regret curves, multi-seed aggregation, and log-log slope fits.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or sandboxed use.

#![cfg_attr(not(feature = "std"), no_std)]
// domain checks are written `!(x > 0.0)` so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algorithms;
pub mod environments;
pub mod error;
pub mod estimation;
pub mod game;
pub mod linalg;
mod math;
pub mod simulator;

pub use error::{CpmError, Result};
pub use game::{ActionCount, AdversaryDistribution, CountingOracle, Game, Interaction, Oracle};
pub use linalg::GlobalObservableSet;

// The matrix types used throughout the public API.
pub use nalgebra::{DMatrix, DVector};
