//! Roots of the Laplace exponent and the ladder constants behind the limit
//! laws.
//!
//! Local-time gauge: for spectrally positive input the dual ascends by pure
//! creeping, and we normalise its local time so the dual ladder process is a
//! unit drift. Then `φ̂(θ) = θ`, `φ̂'(0) = 1`, and the Wiener–Hopf
//! factorisation pins the ascending exponent to `φ(θ) = ψ(θ)/θ`. Every
//! constant below is stated in this gauge and used consistently everywhere
//! (renewal functions, limit laws, ruin prefactor).

use thiserror::Error;

use crate::model::{LevyModel, ModelError, Regime};

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("no positive root before the MGF boundary")]
    NoRoot,
    #[error("Cramér root requires E[X(1)] < 0, got mean {mean}")]
    NotNegativeDrift { mean: f64 },
    #[error("operation not defined in this regime")]
    WrongRegime,
    #[error("model outside the supported class: {0}")]
    WrongModelClass(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Root tolerance on the exponent value at the returned point.
const ROOT_FTOL: f64 = 1e-12;

/// Unique positive zero of a convex `g` with `g(0) = 0`, `g'(0) < 0`.
///
/// Bracket by doubling from `min(1e-3, boundary/2)` up to the domain
/// boundary minus a guard, bisect to a 1e-13 interval, then polish with a
/// handful of Newton steps.
fn positive_convex_root<G, D>(g: G, dg: D, boundary: f64) -> Result<f64, SpectralError>
where
    G: Fn(f64) -> Option<f64>,
    D: Fn(f64) -> Option<f64>,
{
    if boundary <= 0.0 {
        return Err(SpectralError::NoRoot);
    }
    let cap = if boundary.is_finite() {
        boundary - 1e-9 * boundary.max(1e-3)
    } else {
        f64::INFINITY
    };
    if cap <= 0.0 {
        return Err(SpectralError::NoRoot);
    }

    let mut hi = if boundary.is_finite() {
        (0.5 * boundary).min(1e-3)
    } else {
        1e-3
    };
    let mut lo = 0.0;
    let mut found = false;
    for _ in 0..256 {
        match g(hi) {
            Some(v) if v > 0.0 => {
                found = true;
                break;
            }
            Some(_) => {
                lo = hi;
                hi = (hi * 2.0).min(cap);
                if lo == hi {
                    break;
                }
            }
            None => {
                // Stepped past the domain; retreat halfway toward lo.
                hi = 0.5 * (lo + hi);
            }
        }
    }
    if !found {
        return Err(SpectralError::NoRoot);
    }

    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match g(mid) {
            Some(v) if v > 0.0 => hi = mid,
            Some(_) => lo = mid,
            None => hi = mid,
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..5 {
        let (Some(fx), Some(dfx)) = (g(x), dg(x)) else { break };
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() || next <= lo || next >= hi {
            break;
        }
        x = next;
        if fx.abs() < 1e-16 {
            break;
        }
    }

    match g(x) {
        Some(v) if v.abs() <= ROOT_FTOL.max(1e-12 * x.abs()) => Ok(x),
        _ => Err(SpectralError::NoRoot),
    }
}

/// Cramér coefficient: the unique `γ > 0` with `E[e^{γX(1)}] = 1`,
/// equivalently `ψ(−γ) = 0`.
pub fn cramer_gamma(model: &LevyModel) -> Result<f64, SpectralError> {
    let mean = model.mean_x1();
    if mean >= 0.0 {
        return Err(SpectralError::NotNegativeDrift { mean });
    }
    positive_convex_root(
        |s| model.cumulant(s).ok(),
        |s| model.cumulant_prime(s).ok(),
        model.cumulant_boundary(),
    )
}

/// Largest positive root of `ψ(θ) = 0` for a spectrally positive model with
/// positive mean (the decay rate of the dual renewal density).
pub fn positive_psi_root(model: &LevyModel) -> Result<f64, SpectralError> {
    if !model.is_spectrally_positive() {
        return Err(SpectralError::WrongModelClass(
            "two-sided jumps: no spectrally positive closed form".into(),
        ));
    }
    if model.mean_x1() <= 0.0 {
        return Err(SpectralError::WrongRegime);
    }
    positive_convex_root(
        |t| model.psi(t).ok(),
        |t| model.psi_prime(t).ok(),
        f64::INFINITY,
    )
}

/// Nonzero real root of the queue characteristic equation
/// `λ∫e^{sy}F(dy) − λ − s = 0`: the largest root (`= γ > 0`) in the stable
/// case, the smallest (`= −Φ(0) < 0`) in the unstable case.
pub fn characteristic_root(model: &LevyModel, regime: Regime) -> Result<f64, SpectralError> {
    if !model.is_queue_form() {
        return Err(SpectralError::WrongModelClass(
            "characteristic equation requires up-jumps only and drift -1".into(),
        ));
    }
    match regime {
        Regime::Cramer { .. } => cramer_gamma(model),
        Regime::PositiveDrift { .. } => Ok(-positive_psi_root(model)?),
        Regime::Neither => Err(SpectralError::WrongRegime),
    }
}

/// Ladder-exponent constants in the unit-drift dual gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderConstants {
    /// Cramér coefficient γ (Cramér regime only).
    pub gamma: Option<f64>,
    /// Killing rate φ(0) of the ascending ladder; 0 in positive drift.
    pub killing_rate: f64,
    /// φ'(0) = E[H(1)] (positive drift only).
    pub ladder_mean: Option<f64>,
    /// φ̂'(0); identically 1 in the chosen gauge.
    pub dual_ladder_slope: f64,
    /// Φ(0), the largest root of ψ(θ) = 0 (positive drift only).
    pub psi_root: Option<f64>,
    /// φ'(−γ), by analytic differentiation of φ(θ) = ψ(θ)/θ at the root.
    pub phi_slope_at_minus_gamma: Option<f64>,
    /// Ruin prefactor C_γ = φ(0)/(γ φ'(−γ)) (Cramér regime only).
    pub cramer_prefactor: Option<f64>,
}

/// Assemble the constants for a spectrally positive model in either regime.
///
/// Cramér: φ(0) = ψ'(0)/φ̂'(0) and, since φ(θ) = ψ(θ)/θ with ψ(−γ) = 0,
/// the slope at the root is φ'(−γ) = −ψ'(−γ)/γ exactly.
/// Positive drift: φ'(0) = −ψ'(0)/Φ(0).
pub fn ladder_constants(
    model: &LevyModel,
    regime: Regime,
) -> Result<LadderConstants, SpectralError> {
    if !model.is_spectrally_positive() {
        return Err(SpectralError::WrongModelClass(
            "ladder constants in closed form require spectrally positive input".into(),
        ));
    }
    match regime {
        Regime::Cramer { gamma } => {
            let psi_prime0 = model.psi_prime(0.0)?;
            let killing_rate = psi_prime0; // φ̂'(0) = 1
            let phi_slope = -model.psi_prime(-gamma)? / gamma;
            let c_gamma = killing_rate / (gamma * phi_slope);
            Ok(LadderConstants {
                gamma: Some(gamma),
                killing_rate,
                ladder_mean: None,
                dual_ladder_slope: 1.0,
                psi_root: None,
                phi_slope_at_minus_gamma: Some(phi_slope),
                cramer_prefactor: Some(c_gamma),
            })
        }
        Regime::PositiveDrift { .. } => {
            let root = positive_psi_root(model)?;
            let ladder_mean = -model.psi_prime(0.0)? / root;
            Ok(LadderConstants {
                gamma: None,
                killing_rate: 0.0,
                ladder_mean: Some(ladder_mean),
                dual_ladder_slope: 1.0,
                psi_root: Some(root),
                phi_slope_at_minus_gamma: None,
                cramer_prefactor: None,
            })
        }
        Regime::Neither => Err(SpectralError::WrongRegime),
    }
}
