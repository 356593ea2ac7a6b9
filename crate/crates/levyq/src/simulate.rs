//! Exact event-driven simulation of the reflected workload and the free
//! process, plus the exponential change of measure for rare overflow levels.
//!
//! Between jump epochs the workload moves deterministically (linear drift,
//! reflected at zero), so paths are evolved jump-to-jump with no time
//! discretisation. Crossings of the barrier happen only at up-jump epochs,
//! which keeps undershoot and overshoot strictly positive.
//!
//! Replications draw from counter-based streams keyed by `(seed, index)` and
//! are merged in index order, so output is bit-identical at any thread count.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{JumpComponent, JumpDistribution, LevyModel, ModelError, Regime};
use crate::rng::stream_rng;
use crate::spectral::SpectralError;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("event times must be strictly increasing")]
    UnsortedEvents,
    #[error("positive drift creeps across the barrier; overshoot sampling needs drift <= 0")]
    CreepingCrossing,
    #[error("model has no up-jumps: the barrier is never crossed")]
    NoUpJumps,
    #[error("barrier x={x} must exceed the initial workload u0={u0} and be positive")]
    BadBarrier { x: f64, u0: f64 },
    #[error("event budget exhausted at barrier x={x}; use the tilted sampler for rare levels")]
    EventBudget { x: f64 },
    #[error("operation not defined in this regime")]
    WrongRegime,
    #[error("tilted job law leaves the declared family: {0}")]
    UnsupportedTilt(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// One externally supplied jump of the input process.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PathEvent {
    pub time: f64,
    /// Job size; negative values are down-jumps.
    pub jump: f64,
}

/// One observed overflow record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootSample {
    pub undershoot: f64,
    pub overshoot: f64,
    pub passage_time: f64,
    /// Importance weight; 1 for plain Monte Carlo.
    pub weight: f64,
    /// Completed busy periods before the overflow (reflected sampler only).
    pub cycles: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Total event budget per batch. Sampling refuses up front when the
    /// expected event count of the whole batch exceeds it, and any single
    /// path blowing far past its expected length aborts the batch.
    pub event_budget: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { event_budget: 1_000_000_000 }
    }
}

/// Rough expected events until overflow at `x` for one replication: barrier
/// over mean progress under positive drift, and `e^{γ(x−u0)}` busy cycles of
/// a few events each under the Cramér condition.
fn expected_events_per_sample(model: &LevyModel, x: f64) -> Option<f64> {
    let total_rate = model.total_rate();
    match model.classify_regime() {
        Regime::PositiveDrift { mean } => {
            Some(total_rate * (x - model.u0).max(0.0) / mean + 8.0)
        }
        Regime::Cramer { gamma } => {
            let lam = model.up_rate();
            let m_up = model.up.as_ref().map_or(0.0, |c| c.dist.mean());
            let cycle_duration = 1.0 / lam + m_up / (-model.mean_x1());
            Some((gamma * (x - model.u0)).exp() * total_rate * cycle_duration + 8.0)
        }
        Regime::Neither => None,
    }
}

struct Reflected {
    y: f64,
    service_rate: f64, // −drift ≥ 0
    cycles: u64,
}

impl Reflected {
    /// Advance by `dt`, then apply a signed jump; report a crossing of `x`.
    fn step(&mut self, dt: f64, jump: f64, x: f64, t: f64) -> Option<OvershootSample> {
        let y_pre = (self.y - self.service_rate * dt).max(0.0);
        if self.y > 0.0 && y_pre == 0.0 {
            self.cycles += 1;
        }
        if jump > 0.0 {
            let y_post = y_pre + jump;
            if y_post > x {
                return Some(OvershootSample {
                    undershoot: x - y_pre,
                    overshoot: y_post - x,
                    passage_time: t,
                    weight: 1.0,
                    cycles: self.cycles,
                });
            }
            self.y = y_post;
        } else {
            let y_post = (y_pre + jump).max(0.0);
            if y_pre > 0.0 && y_post == 0.0 {
                self.cycles += 1;
            }
            self.y = y_post;
        }
        None
    }
}

fn check_barrier(model: &LevyModel, x: f64) -> Result<(), SimError> {
    if model.drift > 0.0 {
        return Err(SimError::CreepingCrossing);
    }
    if !(x > 0.0) || x <= model.u0 {
        return Err(SimError::BadBarrier { x, u0: model.u0 });
    }
    Ok(())
}

/// Refuse batches whose expected total event count exceeds the budget, and
/// cap any one path at a generous multiple of its expectation so a runaway
/// replication fails deterministically rather than spinning.
fn per_path_cap(model: &LevyModel, x: f64, n: u64, opts: &SimOptions) -> Result<u64, SimError> {
    match expected_events_per_sample(model, x) {
        Some(expected) => {
            if expected * n as f64 > opts.event_budget as f64 {
                return Err(SimError::EventBudget { x });
            }
            Ok(((128.0 * expected) as u64).clamp(1, opts.event_budget))
        }
        // No usable expectation (heavy-tailed negative mean): cap only.
        None => Ok((opts.event_budget / n).max(1)),
    }
}

/// Deterministically evolve the reflected workload through a fixed event
/// list; `Ok(None)` means the list was exhausted without a crossing.
pub fn evolve_path(
    model: &LevyModel,
    events: &[PathEvent],
    x: f64,
) -> Result<Option<OvershootSample>, SimError> {
    check_barrier(model, x)?;
    let mut state = Reflected { y: model.u0, service_rate: -model.drift, cycles: 0 };
    let mut t_prev = 0.0;
    for ev in events {
        if !(ev.time > t_prev) || !ev.time.is_finite() {
            return Err(SimError::UnsortedEvents);
        }
        let dt = ev.time - t_prev;
        t_prev = ev.time;
        if let Some(s) = state.step(dt, ev.jump, x, ev.time) {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn one_overflow_sample<R: Rng>(
    model: &LevyModel,
    x: f64,
    rng: &mut R,
    max_events: u64,
) -> Result<OvershootSample, SimError> {
    let total_rate = model.total_rate();
    let p_up = model.up_rate() / total_rate;
    let mut state = Reflected { y: model.u0, service_rate: -model.drift, cycles: 0 };
    let mut t = 0.0;
    for _ in 0..max_events {
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / total_rate;
        t += dt;
        let pick: f64 = rng.random();
        let jump = if pick < p_up {
            model.up.as_ref().unwrap().dist.sample(rng)
        } else {
            -model.down.as_ref().unwrap().dist.sample(rng)
        };
        if let Some(s) = state.step(dt, jump, x, t) {
            return Ok(s);
        }
    }
    Err(SimError::EventBudget { x })
}

/// Plain Monte Carlo: `n` independent overflow records of the reflected
/// workload at barrier `x`. Deterministic in `(model, x, n, seed)` at any
/// thread count.
pub fn sample_overflow(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<OvershootSample>, SimError> {
    sample_overflow_with(model, x, n, seed, SimOptions::default())
}

pub fn sample_overflow_with(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Vec<OvershootSample>, SimError> {
    check_barrier(model, x)?;
    if model.up.is_none() {
        return Err(SimError::NoUpJumps);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Regime::Cramer { gamma } = model.classify_regime() {
        if gamma * x > 4.0 * std::f64::consts::LN_10 {
            log::warn!(
                "direct sampling at x={x}: ~e^{{γx}} = {:.3e} busy cycles per record; \
                 consider the tilted sampler",
                (gamma * x).exp()
            );
        }
    }
    let max_events = per_path_cap(model, x, n, &opts)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            one_overflow_sample(model, x, &mut rng, max_events)
        })
        .collect()
}

/// First passage of the free process over `x` from 0, recording
/// `(undershoot, overshoot, passage time)` with unit weights. Requires a
/// positive-mean model so the passage is certain.
pub fn sample_free_passage(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<OvershootSample>, SimError> {
    sample_free_passage_with(model, x, n, seed, SimOptions::default())
}

pub fn sample_free_passage_with(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Vec<OvershootSample>, SimError> {
    if model.drift > 0.0 {
        return Err(SimError::CreepingCrossing);
    }
    if model.up.is_none() {
        return Err(SimError::NoUpJumps);
    }
    if model.mean_x1() <= 0.0 {
        return Err(SimError::WrongRegime);
    }
    if !(x > 0.0) {
        return Err(SimError::BadBarrier { x, u0: 0.0 });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let max_events = per_path_cap(model, x, n, &opts)?;
    let total_rate = model.total_rate();
    let p_up = model.up_rate() / total_rate;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut pos = 0.0f64;
            let mut t = 0.0f64;
            for _ in 0..max_events {
                let u: f64 = rng.random();
                let dt = -(1.0 - u).ln() / total_rate;
                t += dt;
                pos += model.drift * dt;
                let pick: f64 = rng.random();
                if pick < p_up {
                    let j = model.up.as_ref().unwrap().dist.sample(&mut rng);
                    if pos + j > x {
                        return Ok(OvershootSample {
                            undershoot: x - pos,
                            overshoot: pos + j - x,
                            passage_time: t,
                            weight: 1.0,
                            cycles: 0,
                        });
                    }
                    pos += j;
                } else {
                    pos -= model.down.as_ref().unwrap().dist.sample(&mut rng);
                }
            }
            Err(SimError::EventBudget { x })
        })
        .collect()
}

fn tilt_up(dist: &JumpDistribution, gamma: f64) -> Result<JumpDistribution, SimError> {
    use JumpDistribution::*;
    Ok(match dist {
        Exponential { rate } => Exponential { rate: rate - gamma },
        Hyperexponential { weights, rates } => {
            let mgf = dist.mgf(gamma)?;
            let new_rates: Vec<f64> = rates.iter().map(|r| r - gamma).collect();
            let new_weights: Vec<f64> = weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * (r / (r - gamma)) / mgf)
                .collect();
            Hyperexponential { weights: new_weights, rates: new_rates }
        }
        Erlang { shape, rate } => Erlang { shape: *shape, rate: rate - gamma },
        Deterministic { size } => Deterministic { size: *size },
        Pareto { .. } => {
            return Err(SimError::UnsupportedTilt(
                "pareto up-jumps admit no Cramér coefficient".into(),
            ))
        }
    })
}

fn tilt_down(dist: &JumpDistribution, gamma: f64) -> Result<JumpDistribution, SimError> {
    use JumpDistribution::*;
    Ok(match dist {
        Exponential { rate } => Exponential { rate: rate + gamma },
        Hyperexponential { weights, rates } => {
            let mgf = dist.mgf(-gamma)?;
            let new_rates: Vec<f64> = rates.iter().map(|r| r + gamma).collect();
            let new_weights: Vec<f64> = weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * (r / (r + gamma)) / mgf)
                .collect();
            Hyperexponential { weights: new_weights, rates: new_rates }
        }
        Erlang { shape, rate } => Erlang { shape: *shape, rate: rate + gamma },
        Deterministic { size } => Deterministic { size: *size },
        Pareto { .. } => {
            return Err(SimError::UnsupportedTilt(
                "tilted pareto is outside the declared job-law family".into(),
            ))
        }
    })
}

/// Exponential change of measure at the Cramér coefficient: up-jump rate
/// becomes `λ⁺E[e^{γU}]` with the size-tilted law, down-jump rate
/// `λ⁻E[e^{−γD}]`, drift unchanged. The tilted model has positive mean.
pub fn tilt(model: &LevyModel) -> Result<LevyModel, SimError> {
    let Regime::Cramer { gamma } = model.classify_regime() else {
        return Err(SimError::WrongRegime);
    };
    let up = match &model.up {
        Some(c) => Some(JumpComponent {
            rate: c.rate * c.dist.mgf(gamma)?,
            dist: tilt_up(&c.dist, gamma)?,
        }),
        None => None,
    };
    let down = match &model.down {
        Some(c) => Some(JumpComponent {
            rate: c.rate * c.dist.mgf(-gamma)?,
            dist: tilt_down(&c.dist, gamma)?,
        }),
        None => None,
    };
    Ok(LevyModel { drift: model.drift, up, down, u0: model.u0 }.validated()?)
}

/// Importance sampler for the rare-overflow regime: simulate the free
/// process under the tilted measure until passage (certain there) and weight
/// each record by `e^{−γ·overshoot}`. The self-normalised weighted CCDF
/// estimates the conditional passage law; `mean(weight)·e^{−γx}` estimates
/// the passage probability. Passage times are under the tilted clock.
pub fn sample_first_passage_tilted(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<OvershootSample>, SimError> {
    let Regime::Cramer { gamma } = model.classify_regime() else {
        return Err(SimError::WrongRegime);
    };
    let tilted = tilt(model)?;
    let mut samples = sample_free_passage(&tilted, x, n, seed)?;
    for s in &mut samples {
        s.weight = (-gamma * s.overshoot).exp();
    }
    Ok(samples)
}

/// Importance-sampled estimate of the passage probability
/// `P(T(x) < ∞) = e^{−γx} E^{tilt}[e^{−γ·overshoot}]`, with its standard
/// error. The relative error stays bounded in `x` because weights are in
/// `(0, 1]`.
pub fn estimate_ruin_is(
    model: &LevyModel,
    x: f64,
    n: u64,
    seed: u64,
) -> Result<(f64, f64), SimError> {
    let Regime::Cramer { gamma } = model.classify_regime() else {
        return Err(SimError::WrongRegime);
    };
    let samples = sample_first_passage_tilted(model, x, n, seed)?;
    let nf = n as f64;
    let mean = samples.iter().map(|s| s.weight).sum::<f64>() / nf;
    let var = samples
        .iter()
        .map(|s| (s.weight - mean).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    let scale = (-gamma * x).exp();
    Ok((scale * mean, scale * (var / nf).sqrt()))
}
