//! Finite-activity Lévy input processes for the workload model.
//!
//! The free process is `X(t) = drift·t + Σ up-jumps − Σ down-jumps`, a
//! compound Poisson process plus linear drift. For the classical queue the
//! drift is −1 (unit service speed) and only up-jumps (job arrivals) are
//! present; the general type admits two-sided jumps. No Gaussian component
//! and no infinite jump activity: crossings of a level then happen only at
//! jump epochs, which both enables exact event-driven simulation and makes
//! the joint undershoot/overshoot law a proper distribution on `(0,∞)²`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("model has neither drift nor up-jumps")]
    EmptyModel,
    #[error("model is lattice: zero drift and all jump laws concentrated on a lattice")]
    LatticeModel,
    #[error("jump law has infinite mean: {0}")]
    InfiniteMean(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("moment generating function diverges at s = {s}")]
    MgfDomain { s: f64 },
}

/// Job-size (jump-magnitude) distribution. All kinds have finite mean and a
/// closed-form mean; all but `Deterministic` have a density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpDistribution {
    Exponential { rate: f64 },
    Hyperexponential { weights: Vec<f64>, rates: Vec<f64> },
    Erlang { shape: u32, rate: f64 },
    Deterministic { size: f64 },
    Pareto { scale: f64, index: f64 },
}

impl JumpDistribution {
    pub fn validate(&self) -> Result<(), ModelError> {
        use JumpDistribution::*;
        let pos = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!(
                    "{what} must be a positive finite real, got {x}"
                )))
            }
        };
        match self {
            Exponential { rate } => pos(*rate, "exponential rate"),
            Hyperexponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(ModelError::InvalidParameter(
                        "hyperexponential weights and rates must be nonempty and equal length"
                            .into(),
                    ));
                }
                for &w in weights {
                    pos(w, "hyperexponential weight")?;
                }
                for &r in rates {
                    pos(r, "hyperexponential rate")?;
                }
                let s: f64 = weights.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(ModelError::InvalidParameter(format!(
                        "hyperexponential weights sum to {s}, expected 1"
                    )));
                }
                Ok(())
            }
            Erlang { shape, rate } => {
                if *shape == 0 {
                    return Err(ModelError::InvalidParameter("erlang shape must be >= 1".into()));
                }
                pos(*rate, "erlang rate")
            }
            Deterministic { size } => pos(*size, "deterministic size"),
            Pareto { scale, index } => {
                pos(*scale, "pareto scale")?;
                if !index.is_finite() || *index <= 0.0 {
                    return Err(ModelError::InvalidParameter(
                        "pareto index must be a positive finite real".into(),
                    ));
                }
                if *index <= 1.0 {
                    return Err(ModelError::InfiniteMean(format!(
                        "pareto index {index} <= 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        use JumpDistribution::*;
        match self {
            Exponential { rate } => 1.0 / rate,
            Hyperexponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w / r)
                .sum(),
            Erlang { shape, rate } => f64::from(*shape) / rate,
            Deterministic { size } => *size,
            Pareto { scale, index } => index * scale / (index - 1.0),
        }
    }

    /// Supremum of the set where the MGF is finite.
    pub fn mgf_boundary(&self) -> f64 {
        use JumpDistribution::*;
        match self {
            Exponential { rate } => *rate,
            Hyperexponential { rates, .. } => rates.iter().cloned().fold(f64::INFINITY, f64::min),
            Erlang { rate, .. } => *rate,
            Deterministic { .. } => f64::INFINITY,
            Pareto { .. } => 0.0,
        }
    }

    /// `E[e^{sJ}]`. Errors at or beyond the MGF singularity.
    pub fn mgf(&self, s: f64) -> Result<f64, ModelError> {
        use JumpDistribution::*;
        if s == 0.0 {
            return Ok(1.0);
        }
        if s >= self.mgf_boundary() {
            return Err(ModelError::MgfDomain { s });
        }
        Ok(match self {
            Exponential { rate } => rate / (rate - s),
            Hyperexponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * r / (r - s))
                .sum(),
            Erlang { shape, rate } => (rate / (rate - s)).powi(*shape as i32),
            Deterministic { size } => (s * size).exp(),
            Pareto { scale, index } => {
                // Laplace transform (s < 0): no closed elementary form.
                let (a, xm) = (*index, *scale);
                let kernel = move |x: f64| (s * x).exp() * a * xm.powf(a) * x.powf(-a - 1.0);
                quad::integrate_tail(kernel, xm, 1e-14)
                    .expect("pareto Laplace transform quadrature")
            }
        })
    }

    /// `E[J e^{sJ}]`, the derivative of the MGF.
    pub fn mgf_prime(&self, s: f64) -> Result<f64, ModelError> {
        use JumpDistribution::*;
        if s == 0.0 {
            return Ok(self.mean());
        }
        if s >= self.mgf_boundary() {
            return Err(ModelError::MgfDomain { s });
        }
        Ok(match self {
            Exponential { rate } => rate / (rate - s).powi(2),
            Hyperexponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * r / (r - s).powi(2))
                .sum(),
            Erlang { shape, rate } => {
                let k = f64::from(*shape);
                (k / (rate - s)) * (rate / (rate - s)).powi(*shape as i32)
            }
            Deterministic { size } => size * (s * size).exp(),
            Pareto { scale, index } => {
                let (a, xm) = (*index, *scale);
                let kernel = move |x: f64| x * (s * x).exp() * a * xm.powf(a) * x.powf(-a - 1.0);
                quad::integrate_tail(kernel, xm, 1e-14)
                    .expect("pareto Laplace transform quadrature")
            }
        })
    }

    /// Complementary CDF `P(J > a)`, right-continuous.
    pub fn tail(&self, a: f64) -> f64 {
        use JumpDistribution::*;
        if a < 0.0 {
            return 1.0;
        }
        match self {
            Exponential { rate } => (-rate * a).exp(),
            Hyperexponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * (-r * a).exp())
                .sum(),
            Erlang { shape, rate } => {
                let x = rate * a;
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..*shape {
                    term *= x / f64::from(j);
                    sum += term;
                }
                (-x).exp() * sum
            }
            Deterministic { size } => {
                if a < *size {
                    1.0
                } else {
                    0.0
                }
            }
            Pareto { scale, index } => {
                if a < *scale {
                    1.0
                } else {
                    (scale / a).powf(*index)
                }
            }
        }
    }

    /// Density at `a`, when the law is absolutely continuous.
    pub fn density(&self, a: f64) -> Option<f64> {
        use JumpDistribution::*;
        if a < 0.0 {
            return self.has_density().then_some(0.0);
        }
        match self {
            Exponential { rate } => Some(rate * (-rate * a).exp()),
            Hyperexponential { weights, rates } => Some(
                weights
                    .iter()
                    .zip(rates)
                    .map(|(w, r)| w * r * (-r * a).exp())
                    .sum(),
            ),
            Erlang { shape, rate } => {
                let k = *shape as i32;
                let mut logf = f64::from(*shape) * rate.ln() - rate * a;
                if k > 1 {
                    logf += f64::from(k - 1) * a.max(f64::MIN_POSITIVE).ln();
                    for j in 2..k {
                        logf -= f64::from(j).ln();
                    }
                }
                Some(if a == 0.0 && k > 1 { 0.0 } else { logf.exp() })
            }
            Deterministic { .. } => None,
            Pareto { scale, index } => Some(if a < *scale {
                0.0
            } else {
                index * scale.powf(*index) / a.powf(index + 1.0)
            }),
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self, JumpDistribution::Deterministic { .. })
    }

    /// Lattice support (all mass on a lattice `{d, 2d, ...}`).
    pub fn is_lattice(&self) -> bool {
        matches!(self, JumpDistribution::Deterministic { .. })
    }

    /// Locations where the tail or density has a step or kink.
    pub fn tail_breakpoints(&self) -> Vec<f64> {
        use JumpDistribution::*;
        match self {
            Deterministic { size } => vec![*size],
            Pareto { scale, .. } => vec![*scale],
            _ => Vec::new(),
        }
    }

    /// Draw one jump magnitude by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use JumpDistribution::*;
        match self {
            Exponential { rate } => exp_draw(rng, *rate),
            Hyperexponential { weights, rates } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, r) in weights.iter().zip(rates) {
                    acc += w;
                    if u < acc {
                        return exp_draw(rng, *r);
                    }
                }
                exp_draw(rng, *rates.last().unwrap())
            }
            Erlang { shape, rate } => (0..*shape).map(|_| exp_draw(rng, *rate)).sum(),
            Deterministic { size } => *size,
            Pareto { scale, index } => {
                let u: f64 = rng.random();
                scale * (1.0 - u).powf(-1.0 / index)
            }
        }
    }
}

fn exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// One compound Poisson component: jumps of law `dist` at Poisson rate `rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpComponent {
    pub rate: f64,
    pub dist: JumpDistribution,
}

/// Finite-activity Lévy process: drift plus up- and/or down-jump components,
/// and the initial workload `u0` for the reflected process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyModel {
    pub drift: f64,
    #[serde(default)]
    pub up: Option<JumpComponent>,
    #[serde(default)]
    pub down: Option<JumpComponent>,
    #[serde(default)]
    pub u0: f64,
}

/// Which asymptotic theorem applies to a validated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Cramer { gamma: f64 },
    PositiveDrift { mean: f64 },
    Neither,
}

impl LevyModel {
    /// Convenience constructor for the classical single-server queue:
    /// unit service speed, arrivals at `rate` with law `dist`, empty start.
    pub fn queue(rate: f64, dist: JumpDistribution) -> Self {
        LevyModel {
            drift: -1.0,
            up: Some(JumpComponent { rate, dist }),
            down: None,
            u0: 0.0,
        }
    }

    /// M/M/1 net-input process: arrivals at `lambda`,`Exp(mu)` jobs, drift −1.
    pub fn mm1(lambda: f64, mu: f64) -> Self {
        Self::queue(lambda, JumpDistribution::Exponential { rate: mu })
    }

    /// Check every structural invariant and hand the model back.
    pub fn validated(self) -> Result<Self, ModelError> {
        self.validate_ref()?;
        Ok(self)
    }

    fn validate_ref(&self) -> Result<(), ModelError> {
        if !self.drift.is_finite() {
            return Err(ModelError::InvalidParameter("drift must be finite".into()));
        }
        if !(self.u0.is_finite() && self.u0 >= 0.0) {
            return Err(ModelError::InvalidParameter(
                "initial workload u0 must be finite and nonnegative".into(),
            ));
        }
        for comp in [&self.up, &self.down].into_iter().flatten() {
            if !(comp.rate > 0.0 && comp.rate.is_finite()) {
                return Err(ModelError::InvalidParameter(format!(
                    "jump rate must be a positive finite real, got {}",
                    comp.rate
                )));
            }
            comp.dist.validate()?;
        }
        if self.drift == 0.0 && self.up.is_none() {
            return Err(ModelError::EmptyModel);
        }
        // Non-lattice: nonzero drift, or some jump law with non-lattice support.
        if self.drift == 0.0 {
            let all_lattice = [&self.up, &self.down]
                .into_iter()
                .flatten()
                .all(|c| c.dist.is_lattice());
            if all_lattice {
                return Err(ModelError::LatticeModel);
            }
        }
        Ok(())
    }

    pub fn up_rate(&self) -> f64 {
        self.up.as_ref().map_or(0.0, |c| c.rate)
    }

    pub fn down_rate(&self) -> f64 {
        self.down.as_ref().map_or(0.0, |c| c.rate)
    }

    pub fn total_rate(&self) -> f64 {
        self.up_rate() + self.down_rate()
    }

    /// `E[X(1)] = drift + λ⁺m⁺ − λ⁻m⁻`.
    pub fn mean_x1(&self) -> f64 {
        let up = self.up.as_ref().map_or(0.0, |c| c.rate * c.dist.mean());
        let down = self.down.as_ref().map_or(0.0, |c| c.rate * c.dist.mean());
        self.drift + up - down
    }

    /// No downward jumps.
    pub fn is_spectrally_positive(&self) -> bool {
        self.down.is_none()
    }

    /// Queue form: up-jumps only and unit service drift −1.
    pub fn is_queue_form(&self) -> bool {
        self.down.is_none() && self.up.is_some() && (self.drift + 1.0).abs() < 1e-12
    }

    /// Laplace exponent `ψ(θ) = log E[e^{−θX(1)}]`, with `ψ(0) = 0` exactly.
    pub fn psi(&self, theta: f64) -> Result<f64, ModelError> {
        if theta == 0.0 {
            return Ok(0.0);
        }
        let mut v = -theta * self.drift;
        if let Some(c) = &self.up {
            v += c.rate * (c.dist.mgf(-theta)? - 1.0);
        }
        if let Some(c) = &self.down {
            v += c.rate * (c.dist.mgf(theta)? - 1.0);
        }
        Ok(v)
    }

    /// `ψ'(θ)`; in particular `ψ'(0) = −E[X(1)]`.
    pub fn psi_prime(&self, theta: f64) -> Result<f64, ModelError> {
        let mut v = -self.drift;
        if let Some(c) = &self.up {
            v -= c.rate * c.dist.mgf_prime(-theta)?;
        }
        if let Some(c) = &self.down {
            v += c.rate * c.dist.mgf_prime(theta)?;
        }
        Ok(v)
    }

    /// Cumulant `κ(s) = log E[e^{sX(1)}] = ψ(−s)`; convex with `κ(0) = 0`.
    pub fn cumulant(&self, s: f64) -> Result<f64, ModelError> {
        self.psi(-s)
    }

    pub fn cumulant_prime(&self, s: f64) -> Result<f64, ModelError> {
        Ok(-self.psi_prime(-s)?)
    }

    /// Upper boundary of the domain of `s ↦ E[e^{sX(1)}]`.
    pub fn cumulant_boundary(&self) -> f64 {
        self.up
            .as_ref()
            .map_or(f64::INFINITY, |c| c.dist.mgf_boundary())
    }

    /// Lévy measure upper tail `ν̄(a) = λ⁺ F̄⁺(a)` for `a > 0`
    /// (extended by `ν̄(0+) = λ⁺` at the origin).
    pub fn nu_bar(&self, a: f64) -> f64 {
        self.up.as_ref().map_or(0.0, |c| c.rate * c.dist.tail(a))
    }

    /// Density of the Lévy measure on `(0,∞)`, when it exists.
    pub fn nu_density(&self, a: f64) -> Option<f64> {
        let c = self.up.as_ref()?;
        Some(c.rate * c.dist.density(a)?)
    }

    /// Kink/step locations of `z ↦ ν̄(offset + z)`, for quadrature splitting.
    pub fn nu_bar_breakpoints(&self, offset: f64) -> Vec<f64> {
        self.up
            .as_ref()
            .map(|c| {
                c.dist
                    .tail_breakpoints()
                    .into_iter()
                    .map(|b| b - offset)
                    .filter(|&z| z > 0.0)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Select the applicable limit theorem. `Neither` covers zero mean and
    /// negative-mean models without a Cramér root (e.g. heavy-tailed jobs).
    pub fn classify_regime(&self) -> Regime {
        let mean = self.mean_x1();
        if mean > 0.0 {
            Regime::PositiveDrift { mean }
        } else if mean < 0.0 {
            match crate::spectral::cramer_gamma(self) {
                Ok(gamma) => Regime::Cramer { gamma },
                Err(_) => Regime::Neither,
            }
        } else {
            Regime::Neither
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mm1_12() -> LevyModel {
        LevyModel::mm1(1.0, 2.0).validated().unwrap()
    }

    #[test]
    fn validate_accepts_mm1() {
        assert!(LevyModel::mm1(1.0, 2.0).validated().is_ok());
    }

    #[test]
    fn validate_rejects_lattice() {
        let m = LevyModel {
            drift: 0.0,
            up: Some(JumpComponent {
                rate: 1.0,
                dist: JumpDistribution::Deterministic { size: 1.0 },
            }),
            down: None,
            u0: 0.0,
        };
        assert_eq!(m.validated().unwrap_err(), ModelError::LatticeModel);
    }

    #[test]
    fn validate_rejects_infinite_mean_pareto() {
        let m = LevyModel::queue(1.0, JumpDistribution::Pareto { scale: 1.0, index: 0.9 });
        assert!(matches!(m.validated().unwrap_err(), ModelError::InfiniteMean(_)));
    }

    #[test]
    fn validate_rejects_empty() {
        let m = LevyModel { drift: 0.0, up: None, down: None, u0: 0.0 };
        assert_eq!(m.validated().unwrap_err(), ModelError::EmptyModel);
    }

    #[test]
    fn psi_mm1_closed_form() {
        // ψ(θ) = θ − λθ/(μ+θ); at (1,2), θ=1: 2/3.
        let m = mm1_12();
        assert_abs_diff_eq!(m.psi(1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        assert_eq!(m.psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_domain_error_at_pole() {
        let m = mm1_12();
        assert!(matches!(m.psi(-2.0), Err(ModelError::MgfDomain { .. })));
        assert!(matches!(m.psi(-2.5), Err(ModelError::MgfDomain { .. })));
    }

    #[test]
    fn nu_bar_examples() {
        let m = mm1_12();
        assert_abs_diff_eq!(m.nu_bar(1.0), 0.135335283236612692, epsilon = 1e-15);
        assert!(m.nu_bar(1e3) < 1e-300);

        let det = LevyModel {
            drift: -1.0,
            up: Some(JumpComponent {
                rate: 0.5,
                dist: JumpDistribution::Deterministic { size: 1.0 },
            }),
            down: None,
            u0: 0.0,
        };
        assert_eq!(det.nu_bar(0.5), 0.5);
        assert_eq!(det.nu_bar(1.5), 0.0);
    }

    #[test]
    fn classify_regime_matrix() {
        match mm1_12().classify_regime() {
            Regime::Cramer { gamma } => assert_abs_diff_eq!(gamma, 1.0, epsilon = 1e-10),
            other => panic!("expected Cramer, got {other:?}"),
        }
        match LevyModel::mm1(2.0, 1.0).validated().unwrap().classify_regime() {
            Regime::PositiveDrift { mean } => assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-14),
            other => panic!("expected PositiveDrift, got {other:?}"),
        }
        // Heavy-tailed with negative mean: no exponential moments, no root.
        let pareto = LevyModel::queue(0.3, JumpDistribution::Pareto { scale: 1.0, index: 2.5 })
            .validated()
            .unwrap();
        assert!(pareto.mean_x1() < 0.0);
        assert_eq!(pareto.classify_regime(), Regime::Neither);
        // Zero mean maps to Neither.
        assert_eq!(
            LevyModel::mm1(1.0, 1.0).validated().unwrap().classify_regime(),
            Regime::Neither
        );
    }

    #[test]
    fn classify_is_time_scale_invariant() {
        let base = mm1_12();
        for c in [0.25, 0.5, 2.0, 7.5] {
            let scaled = LevyModel {
                drift: c * base.drift,
                up: base.up.as_ref().map(|k| JumpComponent {
                    rate: c * k.rate,
                    dist: k.dist.clone(),
                }),
                down: None,
                u0: 0.0,
            }
            .validated()
            .unwrap();
            match (base.classify_regime(), scaled.classify_regime()) {
                (Regime::Cramer { gamma: g0 }, Regime::Cramer { gamma: g1 }) => {
                    assert_abs_diff_eq!(g0, g1, epsilon = 1e-9)
                }
                (a, b) => panic!("regime changed under time scaling: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn psi_prime_matches_finite_difference_and_mean() {
        let zoo = model_zoo();
        for m in &zoo {
            let h = 1e-6;
            // Heavy tails have no exponential moments, so ψ lives on θ ≥ 0
            // only; fall back to a second-order one-sided difference there.
            let fd = if m.cumulant_boundary() > 0.0 {
                (m.psi(h).unwrap() - m.psi(-h).unwrap()) / (2.0 * h)
            } else {
                (4.0 * m.psi(h).unwrap() - m.psi(2.0 * h).unwrap()) / (2.0 * h)
            };
            assert_abs_diff_eq!(fd, -m.mean_x1(), epsilon = 1e-8);
            assert_abs_diff_eq!(m.psi_prime(0.0).unwrap(), -m.mean_x1(), epsilon = 1e-12);
        }
    }

    #[test]
    fn tail_matches_empirical_for_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        for m in model_zoo() {
            let dist = &m.up.as_ref().unwrap().dist;
            for a in [0.3, 0.9, 1.7] {
                let hits = (0..n).filter(|_| dist.sample(&mut rng) > a).count();
                let p = hits as f64 / n as f64;
                let exact = dist.tail(a);
                let se = (exact * (1.0 - exact) / n as f64).sqrt();
                assert!(
                    (p - exact).abs() <= 4.0 * se + 1e-9,
                    "tail mismatch for {dist:?} at a={a}: emp {p} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn erlang_tail_and_density_consistent() {
        // d/da F̄(a) = −f(a) by finite differences.
        let d = JumpDistribution::Erlang { shape: 3, rate: 2.0 };
        for a in [0.2, 0.8, 1.9] {
            let h = 1e-6;
            let fd = -(d.tail(a + h) - d.tail(a - h)) / (2.0 * h);
            assert_abs_diff_eq!(fd, d.density(a).unwrap(), epsilon = 1e-7);
        }
    }

    fn model_zoo() -> Vec<LevyModel> {
        vec![
            LevyModel::mm1(1.0, 2.0).validated().unwrap(),
            LevyModel::queue(
                0.8,
                JumpDistribution::Hyperexponential {
                    weights: vec![0.4, 0.6],
                    rates: vec![1.5, 4.0],
                },
            )
            .validated()
            .unwrap(),
            LevyModel::queue(0.7, JumpDistribution::Erlang { shape: 3, rate: 4.0 })
                .validated()
                .unwrap(),
            LevyModel::queue(0.5, JumpDistribution::Deterministic { size: 1.0 })
                .validated()
                .unwrap(),
            LevyModel::queue(0.4, JumpDistribution::Pareto { scale: 1.0, index: 2.5 })
                .validated()
                .unwrap(),
        ]
    }

    proptest! {
        // ψ is convex on its domain.
        #[test]
        fn psi_is_convex(t1 in -1.9f64..6.0, t2 in -1.9f64..6.0, lam in 0.0f64..1.0) {
            let m = mm1_12();
            let mid = lam * t1 + (1.0 - lam) * t2;
            let lhs = m.psi(mid).unwrap();
            let rhs = lam * m.psi(t1).unwrap() + (1.0 - lam) * m.psi(t2).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        // ν̄ is non-increasing and nonnegative.
        #[test]
        fn nu_bar_monotone(a in 0.0f64..20.0, h in 0.0f64..5.0) {
            for m in model_zoo() {
                prop_assert!(m.nu_bar(a) >= m.nu_bar(a + h) - 1e-15);
                prop_assert!(m.nu_bar(a + h) >= 0.0);
            }
        }
    }
}
