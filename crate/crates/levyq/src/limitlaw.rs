//! Joint limit laws of the undershoot and overshoot at buffer overflow.
//!
//! The limiting complementary CDF has the kernel form
//! `pref · ∫_u^∞ ν̄(v+z) K(z) dz` with `K = V̂` under positive drift and
//! `K = V̂_γ` under the Cramér condition. Evaluators exist along three
//! routes that must agree: the theorem route (renewal object + ladder
//! constants), the spectrally positive closed kernels, and the integrated
//! queue density. Keeping the routes as distinct code paths makes the
//! pairwise agreement checks meaningful.
//!
//! Conventions: CCDFs are evaluated right-continuously in both arguments;
//! values are clamped to [0,1] only within quadrature tolerance, anything
//! further out is treated as an internal error.

use thiserror::Error;

use crate::model::{LevyModel, ModelError, Regime};
use crate::quad::{self, QuadError};
use crate::renewal::{self, RenewalError, RenewalFunction};
use crate::spectral::{self, SpectralError};

pub use crate::quad::integrate_tail;

#[derive(Debug, Error)]
pub enum LawError {
    #[error("limit law not defined in this regime")]
    WrongRegime,
    #[error("model outside the supported class: {0}")]
    WrongModelClass(String),
    #[error("job law has no density; use the CCDF evaluators")]
    NoDensity,
    #[error("undershoot level u={u} exceeds the barrier x={x}")]
    LevelAboveBarrier { u: f64, x: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Renewal(#[from] RenewalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Which statement of the law an evaluator implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawProvenance {
    Thm1,
    Thm2,
    RemarkI,
    RemarkII,
    Mg1,
    LemmaIii,
}

impl std::fmt::Display for LawProvenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LawProvenance::Thm1 => "thm1",
            LawProvenance::Thm2 => "thm2",
            LawProvenance::RemarkI => "remark_i",
            LawProvenance::RemarkII => "remark_ii",
            LawProvenance::Mg1 => "mg1",
            LawProvenance::LemmaIii => "lemma_iii",
        };
        f.write_str(s)
    }
}

/// Quadrature tolerances and Monte Carlo fallback configuration.
#[derive(Debug, Clone, Copy)]
pub struct LawOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Paths for the renewal estimate when no closed form exists.
    pub mc_paths: u64,
    pub mc_seed: u64,
    /// Geometric grid resolution for the estimated renewal function.
    pub mc_grid_points: usize,
}

impl Default for LawOptions {
    fn default() -> Self {
        LawOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            mc_paths: 200_000,
            mc_seed: 0x5EED_0001,
            mc_grid_points: 256,
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// Theorem kernel with a renewal object (closed-form or estimated):
    /// `pref · ∫ ν̄(v+z) V̂_γ(z) dz` (Cramér) or `pref · ∫ ν̄(v+z) V̂(z) dz`.
    Theorem {
        renewal: RenewalFunction,
        gamma: Option<f64>,
        prefactor: f64,
    },
    /// Spectrally positive Cramér kernel `(1/ψ'(0)) ∫ (e^{γz}−1) ν̄(v+z) dz`.
    ClosedCramer { gamma: f64, inv_psi_prime0: f64 },
    /// Spectrally positive positive-drift kernel
    /// `(−1/ψ'(0)) ∫ ν̄(v+y)(1 − e^{−Φ(0)y}) dy`.
    ClosedPosDrift { root: f64, neg_inv_psi_prime0: f64 },
}

/// Joint complementary CDF `(u, v) ↦ P(undershoot > u, overshoot > v)` in
/// the large-barrier limit. Immutable and thread-safe.
#[derive(Debug, Clone)]
pub struct LimitLawEvaluator {
    model: LevyModel,
    regime: Regime,
    provenance: LawProvenance,
    kernel: Kernel,
    opts: LawOptions,
}

impl LimitLawEvaluator {
    pub fn provenance(&self) -> LawProvenance {
        self.provenance
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    /// CCDF value, clamped to [0, 1] within quadrature slack.
    pub fn ccdf(&self, u: f64, v: f64) -> f64 {
        let u = u.max(0.0);
        let v = v.max(0.0);
        let breaks = self.model.nu_bar_breakpoints(v);
        let raw = match &self.kernel {
            Kernel::Theorem { renewal, gamma, prefactor } => {
                let k = |z: f64| {
                    let w = match gamma {
                        Some(g) => renewal.tilted_cumulative(*g, z),
                        None => renewal.eval(z),
                    };
                    self.model.nu_bar(v + z) * w
                };
                prefactor
                    * quad::integrate_tail_split(&k, u, self.opts.abs_tol, &breaks)
                        .expect("theorem kernel quadrature")
            }
            Kernel::ClosedCramer { gamma, inv_psi_prime0 } => {
                let k = |z: f64| (gamma * z).exp_m1() * self.model.nu_bar(v + z);
                inv_psi_prime0
                    * quad::integrate_tail_split(&k, u, self.opts.abs_tol, &breaks)
                        .expect("closed Cramér kernel quadrature")
            }
            Kernel::ClosedPosDrift { root, neg_inv_psi_prime0 } => {
                let k = |y: f64| self.model.nu_bar(v + y) * (-(-root * y).exp_m1());
                neg_inv_psi_prime0
                    * quad::integrate_tail_split(&k, u, self.opts.abs_tol, &breaks)
                        .expect("closed positive-drift kernel quadrature")
            }
        };
        finish_ccdf(raw)
    }

    /// Joint density at `(u, v)` along the queue formula, when the job law
    /// admits one.
    pub fn density(&self, u: f64, v: f64) -> Option<f64> {
        queue_joint_density(&self.model, u, v).ok()
    }
}

fn finish_ccdf(raw: f64) -> f64 {
    const SLACK: f64 = 1e-6;
    assert!(
        (-SLACK..=1.0 + SLACK).contains(&raw),
        "limit-law CCDF out of range: {raw} (internal error, not clamped)"
    );
    raw.clamp(0.0, 1.0)
}

/// Theorem-route evaluator: dispatches on the regime, using closed-form
/// renewal objects for spectrally positive input and the Monte Carlo renewal
/// estimate (gauge-calibrated so the law has total mass one) otherwise.
pub fn joint_law(model: &LevyModel) -> Result<LimitLawEvaluator, LawError> {
    joint_law_with(model, LawOptions::default())
}

pub fn joint_law_with(
    model: &LevyModel,
    opts: LawOptions,
) -> Result<LimitLawEvaluator, LawError> {
    let regime = model.classify_regime();
    match regime {
        Regime::Neither => Err(LawError::WrongRegime),
        Regime::Cramer { gamma } => {
            let (renewal, prefactor) = if model.is_spectrally_positive() {
                let lc = spectral::ladder_constants(model, regime)?;
                let v = renewal::dual_renewal(model, regime)?;
                (v, gamma / lc.killing_rate)
            } else {
                mc_backed_kernel(model, Some(gamma), &opts)?
            };
            Ok(LimitLawEvaluator {
                model: model.clone(),
                regime,
                provenance: LawProvenance::Thm2,
                kernel: Kernel::Theorem { renewal, gamma: Some(gamma), prefactor },
                opts,
            })
        }
        Regime::PositiveDrift { .. } => {
            let (renewal, prefactor) = if model.is_spectrally_positive() {
                let lc = spectral::ladder_constants(model, regime)?;
                let v = renewal::dual_renewal(model, regime)?;
                (v, 1.0 / lc.ladder_mean.expect("positive drift has a ladder mean"))
            } else {
                mc_backed_kernel(model, None, &opts)?
            };
            Ok(LimitLawEvaluator {
                model: model.clone(),
                regime,
                provenance: LawProvenance::Thm1,
                kernel: Kernel::Theorem { renewal, gamma: None, prefactor },
                opts,
            })
        }
    }
}

/// Renewal estimate plus mass-one calibration for two-sided models.
fn mc_backed_kernel(
    model: &LevyModel,
    gamma: Option<f64>,
    opts: &LawOptions,
) -> Result<(RenewalFunction, f64), LawError> {
    // Level horizon: extend until the theorem integrand is negligible.
    let scale = model
        .up
        .as_ref()
        .map(|c| c.dist.mean())
        .unwrap_or(1.0)
        .max(1e-3);
    let weight = |y: f64| match gamma {
        Some(g) => model.nu_bar(y) * (g * y).exp(),
        None => model.nu_bar(y),
    };
    let w0 = weight(1e-9).max(f64::MIN_POSITIVE);
    let mut y_max = 4.0 * scale;
    while weight(y_max) > 1e-12 * w0 && y_max < 1e9 {
        y_max *= 2.0;
    }

    let mut grid = Vec::with_capacity(opts.mc_grid_points);
    let lo = 1e-3 * scale;
    let ratio = (y_max / lo).powf(1.0 / (opts.mc_grid_points as f64 - 1.0));
    let mut y = lo;
    for _ in 0..opts.mc_grid_points {
        grid.push(y);
        y *= ratio;
    }
    let est = renewal::estimate_dual_renewal_mc(model, &grid, opts.mc_paths, opts.mc_seed)?;

    let kernel = |z: f64| match gamma {
        Some(g) => model.nu_bar(z) * est.tilted_cumulative(g, z),
        None => model.nu_bar(z) * est.eval(z),
    };
    let breaks = model.nu_bar_breakpoints(0.0);
    let t00 = quad::integrate_tail_split(&kernel, 0.0, opts.abs_tol, &breaks)?;
    if !(t00 > 0.0) {
        return Err(LawError::WrongModelClass(
            "estimated renewal kernel has zero mass".into(),
        ));
    }
    Ok((est, 1.0 / t00))
}

/// Closed-kernel evaluator for spectrally positive models, used as an
/// independent cross-check path of [`joint_law`].
pub fn joint_law_closed(model: &LevyModel) -> Result<LimitLawEvaluator, LawError> {
    joint_law_closed_with(model, LawOptions::default())
}

pub fn joint_law_closed_with(
    model: &LevyModel,
    opts: LawOptions,
) -> Result<LimitLawEvaluator, LawError> {
    if !model.is_spectrally_positive() {
        return Err(LawError::WrongModelClass(
            "closed kernels require spectrally positive input".into(),
        ));
    }
    let regime = model.classify_regime();
    match regime {
        Regime::Neither => Err(LawError::WrongRegime),
        Regime::Cramer { gamma } => {
            let inv = 1.0 / model.psi_prime(0.0)?;
            Ok(LimitLawEvaluator {
                model: model.clone(),
                regime,
                provenance: LawProvenance::RemarkI,
                kernel: Kernel::ClosedCramer { gamma, inv_psi_prime0: inv },
                opts,
            })
        }
        Regime::PositiveDrift { .. } => {
            let root = spectral::positive_psi_root(model)?;
            let neg_inv = -1.0 / model.psi_prime(0.0)?;
            Ok(LimitLawEvaluator {
                model: model.clone(),
                regime,
                provenance: LawProvenance::RemarkII,
                kernel: Kernel::ClosedPosDrift { root, neg_inv_psi_prime0: neg_inv },
                opts,
            })
        }
    }
}

/// Joint density of the limiting (undershoot, overshoot) for the classical
/// queue: `λ/(λm − 1) · (1 − e^{r*u}) f(v + u)`. Nonnegative in both
/// regimes: the prefactor sign and the bracket flip together.
pub fn queue_joint_density(model: &LevyModel, u: f64, v: f64) -> Result<f64, LawError> {
    if !model.is_queue_form() {
        return Err(LawError::WrongModelClass(
            "queue density requires up-jumps only and drift -1".into(),
        ));
    }
    let up = model.up.as_ref().expect("queue form has up-jumps");
    if !up.dist.has_density() {
        return Err(LawError::NoDensity);
    }
    let regime = model.classify_regime();
    if regime == Regime::Neither {
        return Err(LawError::WrongRegime);
    }
    let rstar = spectral::characteristic_root(model, regime)?;
    let lambda = up.rate;
    let m = up.dist.mean();
    let f = up.dist.density(v + u).expect("density checked above");
    let val = lambda / (lambda * m - 1.0) * (1.0 - (rstar * u).exp()) * f;
    Ok(val.max(0.0))
}

/// CCDF obtained by numerically double-integrating the queue density over
/// `[u_i, ∞) × [v_j, ∞)` for every grid point — the third, density-based
/// route. Returns `out[i][j] = Ψ(u_i, v_j)`.
pub fn queue_ccdf_by_double_integral(
    model: &LevyModel,
    us: &[f64],
    vs: &[f64],
    tol: f64,
) -> Result<Vec<Vec<f64>>, LawError> {
    if !model.is_queue_form() {
        return Err(LawError::WrongModelClass(
            "queue density requires up-jumps only and drift -1".into(),
        ));
    }
    let up = model.up.as_ref().expect("queue form has up-jumps");
    if !up.dist.has_density() {
        return Err(LawError::NoDensity);
    }
    let regime = model.classify_regime();
    let rstar = spectral::characteristic_root(model, regime)?;
    let lambda = up.rate;
    let m = up.dist.mean();
    let pref = lambda / (lambda * m - 1.0);
    let dist = up.dist.clone();
    let dens_breaks = dist.tail_breakpoints();

    // Marginal-in-v' mass above v at undershoot u': ∫_v^∞ f(v'+u') dv',
    // computed numerically from the density (not via the closed tail).
    // Relative control keeps the outer bias at rel × total mass even when
    // the outer weight grows like e^{γu'} or the range is polynomially long.
    let inner_rel = 0.02 * tol;
    let inner = |up_: f64, v: f64| -> f64 {
        let breaks: Vec<f64> = dens_breaks.iter().map(|b| b - up_).collect();
        quad::integrate_tail_rel(
            &|vp: f64| dist.density(vp + up_).unwrap_or(0.0),
            v,
            inner_rel,
            &breaks,
        )
        .expect("inner density quadrature")
    };

    let mut out = vec![vec![0.0; vs.len()]; us.len()];
    for (j, &v) in vs.iter().enumerate() {
        let g = |u_: f64| pref * (1.0 - (rstar * u_).exp()) * inner(u_, v);
        let u_last = *us.last().unwrap();
        let breaks: Vec<f64> = dens_breaks.iter().map(|b| b - v).collect();
        let mut acc = quad::integrate_tail_split(&g, u_last, tol, &breaks)
            .expect("outer density quadrature");
        out[us.len() - 1][j] = finish_ccdf(acc);
        for i in (0..us.len() - 1).rev() {
            acc += quad::integrate_interval(&g, us[i], us[i + 1], tol, &breaks);
            out[i][j] = finish_ccdf(acc);
        }
    }
    Ok(out)
}

/// Marginal overshoot CCDF through the ladder-height tail:
/// `P[Z(∞) > v] = (γ/φ(0)) e^{−γv} ∫_v^∞ e^{γz} ν̄_H(z) dz`,
/// with `ν̄_H` from Vigon's identity. Must equal `joint_law(model).ccdf(0, v)`.
pub fn marginal_overshoot_ccdf(model: &LevyModel, v: f64) -> Result<f64, LawError> {
    let regime = model.classify_regime();
    let Regime::Cramer { gamma } = regime else {
        return Err(LawError::WrongRegime);
    };
    let lc = spectral::ladder_constants(model, regime)?;
    let breaks: Vec<f64> = model
        .up
        .as_ref()
        .map(|c| c.dist.tail_breakpoints())
        .unwrap_or_default();
    let integral = quad::integrate_tail_split(
        &|z: f64| {
            (gamma * z).exp() * renewal::ladder_height_tail(model, regime, z).expect("ladder tail")
        },
        v,
        1e-11,
        &breaks,
    )?;
    let val = gamma / lc.killing_rate * (-gamma * v).exp() * integral;
    Ok(finish_ccdf(val))
}

/// A first-passage limit law together with its total mass.
#[derive(Debug, Clone)]
pub struct FirstPassageLaw {
    law: LimitLawEvaluator,
    defective_mass: f64,
}

impl FirstPassageLaw {
    pub fn ccdf(&self, u: f64, v: f64) -> f64 {
        self.law.ccdf(u, v)
    }

    pub fn defective_mass(&self) -> f64 {
        self.defective_mass
    }

    pub fn provenance(&self) -> LawProvenance {
        self.law.provenance
    }
}

/// Limiting law of the free-process passage pair conditional on reaching the
/// level: identical kernel to the Cramér reflected law, tagged separately so
/// the equality is an executable assertion and the tilted sampler has an
/// analytic target.
pub fn conditional_passage_law(model: &LevyModel) -> Result<FirstPassageLaw, LawError> {
    let mut law = joint_law(model)?;
    if !matches!(law.regime, Regime::Cramer { .. }) {
        return Err(LawError::WrongRegime);
    }
    law.provenance = LawProvenance::LemmaIii;
    Ok(FirstPassageLaw { law, defective_mass: 1.0 })
}

/// Limiting law of the free-process passage pair under positive drift;
/// non-defective since passage is certain.
pub fn passage_law_positive_drift(model: &LevyModel) -> Result<FirstPassageLaw, LawError> {
    let law = joint_law(model)?;
    if !matches!(law.regime, Regime::PositiveDrift { .. }) {
        return Err(LawError::WrongRegime);
    }
    Ok(FirstPassageLaw { law, defective_mass: 1.0 })
}

/// Exact finite-level passage CCDF for the stable M/M/1 free process:
/// `Φ_x(u,v) = ∫_[0,x] F̄(x−z) V(dz)` with the compensation kernel
/// `F̄(z) = ∫_0^∞ ν̄(v+z+y) 1{z+y>u} V̂(dy) = (λ/μ) e^{−μv} e^{−μ max(z,u)}`.
/// Defective: `Φ_x(0,0)` is the classical ruin probability.
pub fn passage_ccdf_finite_mm1(
    model: &LevyModel,
    x: f64,
    u: f64,
    v: f64,
) -> Result<f64, LawError> {
    if u > x {
        return Err(LawError::LevelAboveBarrier { u, x });
    }
    let asc = renewal::ascending_renewal_mm1(model)?;
    let (lambda, mu) = (asc.lambda, asc.mu);
    let fbar = |z: f64| lambda / mu * (-mu * v).exp() * (-mu * z.max(u)).exp();
    // Atom of V at 0 plus its absolutely continuous part.
    let atom = fbar(x) * asc.atom_at_zero();
    let integral = quad::integrate_interval(
        &|z: f64| fbar(x - z) * asc.density(z),
        0.0,
        x,
        1e-13,
        &[x - u],
    );
    Ok((atom + integral).clamp(0.0, 1.0))
}
