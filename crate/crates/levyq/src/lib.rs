//! Buffer-overflow asymptotics for Lévy-driven queues.
//!
//! When the reflected workload of a finite-activity Lévy input first clears
//! a high barrier, the pair (undershoot, overshoot) — the workload deficit
//! just before the triggering job and the part of that job that is lost —
//! has a joint weak limit as the barrier grows. This crate evaluates the
//! limiting joint CCDF in closed form where the input is spectrally
//! positive (classical M/G/1 queues, stable or unstable), estimates the
//! renewal kernel by Monte Carlo otherwise, and validates everything
//! against an exact event-driven simulator with a rare-event importance
//! sampler for stable queues at large barriers.
//!
//! Module map:
//! * [`model`] — job-size laws, the input process, regime classification.
//! * [`spectral`] — Cramér coefficient, characteristic-equation roots,
//!   ladder constants.
//! * [`renewal`] — dual renewal functions (closed form and estimated) and
//!   the ladder-height tail.
//! * [`limitlaw`] — the limit-law evaluators along three independent routes,
//!   plus the exact finite-level law for the stable M/M/1 case.
//! * [`simulate`] — event-driven reflected paths, free-process passage, the
//!   exponential tilt, and importance-sampled overflow probabilities.
//! * [`stats`] — weighted empirical CCDFs, DKW bands, comparison verdicts.
//! * [`cli`] — config-driven front end shared by the `levyq` binary.

pub mod cli;
pub mod limitlaw;
pub mod model;
pub mod quad;
pub mod renewal;
pub mod rng;
pub mod simulate;
pub mod spectral;
pub mod stats;

pub use model::{JumpComponent, JumpDistribution, LevyModel, Regime};
pub use simulate::OvershootSample;
