//! Budgeted online selection from randomly ordered streams.
//!
//! A stream of `n` candidates arrives one at a time in (presumed uniformly
//! random) order; an online policy must irrevocably accept or reject each
//! one, keeping at most `k`, to maximize the total value of the accepted
//! set against the offline optimum.  This crate provides:
//!
//! - [`stream`] — the shared domain types: validated streams, the strict
//!   total order used for every value comparison, and reproducible seeded
//!   randomness with independent substreams.
//! - [`policy`] — the selection policies as online state machines behind a
//!   single interface (four single-threshold rules, a uniform-random
//!   baseline, and the offline best-`k` selector used for scoring).
//! - [`analysis`] — analytic machinery: the coefficient family and
//!   asymptotic guarantee curve of the eager single-threshold rule, its
//!   maximizer, a finite-`n` closed form at `k = 2`, exact permutation
//!   enumeration oracles, and the noisy-observation degradation factor.
//! - [`harness`] — synthetic-data generation, deterministic Monte Carlo
//!   estimation of competitive ratios, and the budgeted attack-submission
//!   runner over externally supplied streams.
//!
//! Everything is deterministic given a seed: parallel estimation derives
//! one RNG substream per trial, so results never depend on thread count.

pub mod analysis;
pub mod harness;
pub mod policy;
pub mod stream;

mod numeric;
