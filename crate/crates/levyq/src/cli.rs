//! Config-driven front end: analyze constants, tabulate limit laws, run
//! simulations, and produce comparison reports.
//!
//! Everything here is a pure function of `(config, seed)`; re-runs produce
//! byte-identical artifacts. JSON in, CSV/JSON out, no binary formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limitlaw::{self, LawError, LawOptions};
use crate::model::{LevyModel, ModelError, Regime};
use crate::renewal::RenewalError;
use crate::simulate::{self, OvershootSample, SimError, SimOptions};
use crate::spectral::{self, SpectralError};
use crate::stats::{self, ComparisonReport, StatsError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Renewal(#[from] RenewalError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Exit-code contract: 0 pass, 1 comparison fail, 2 config, 3 math, 4 budget.
pub fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::InvalidConfig(_)
        | CliError::Io(_)
        | CliError::Json(_)
        | CliError::Csv(_)
        | CliError::Model(_) => 2,
        CliError::Sim(SimError::EventBudget { .. }) => 4,
        CliError::Stats(StatsError::Sim(SimError::EventBudget { .. })) => 4,
        _ => 3,
    }
}

fn default_nu() -> usize {
    17
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub u_max: f64,
    pub v_max: f64,
    #[serde(default = "default_nu")]
    pub nu: usize,
    #[serde(default = "default_nu")]
    pub nv: usize,
}

impl GridSpec {
    pub fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let lin = |max: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| max * i as f64 / (n - 1).max(1) as f64).collect()
        };
        (lin(self.u_max, self.nu), lin(self.v_max, self.nv))
    }
}

fn default_abs_tol() -> f64 {
    1e-10
}

fn default_rel_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_abs_tol")]
    pub abs: f64,
    #[serde(default = "default_rel_tol")]
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: default_abs_tol(), rel: default_rel_tol() }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LimitConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Plain,
    Tilted,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub x: f64,
    pub n: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    #[serde(default)]
    pub event_budget: Option<u64>,
}

fn default_sampler() -> SamplerKind {
    SamplerKind::Plain
}

fn default_delta() -> f64 {
    0.01
}

fn default_bias() -> f64 {
    0.002
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_bias")]
    pub bias_allowance: f64,
    /// Pre-computed samples; when absent the simulate block runs inline.
    #[serde(default)]
    pub samples_csv: Option<PathBuf>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            delta: default_delta(),
            bias_allowance: default_bias(),
            samples_csv: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub x_list: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<LevyModel>,
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    #[serde(default)]
    pub limit: Option<LimitConfig>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub converge: Option<ConvergeConfig>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Materialise the validated model from an inline spec or a referenced file
/// (relative paths resolve against the config's directory).
pub fn resolve_model(cfg: &RunConfig, base: &Path) -> Result<LevyModel, CliError> {
    let model = match (&cfg.model, &cfg.model_path) {
        (Some(m), None) => m.clone(),
        (None, Some(p)) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::InvalidConfig(format!("cannot read model {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        (Some(_), Some(_)) => {
            return Err(CliError::InvalidConfig(
                "config sets both model and model_path".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::InvalidConfig(
                "config needs a model or model_path".into(),
            ))
        }
    };
    Ok(model.validated()?)
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub probability: f64,
}

/// Constants report for `analyze`.
#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub regime: String,
    pub mean_x1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_prime0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_hat_prime0: Option<f64>,
    #[serde(rename = "Phi0", skip_serializing_if = "Option::is_none")]
    pub psi_root: Option<f64>,
    #[serde(rename = "C_gamma", skip_serializing_if = "Option::is_none")]
    pub c_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_prime_minus_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rstar: Option<f64>,
    /// Gauge note: ladder constants are stated in the unit-drift dual gauge,
    /// an artifact-level construction for non-exponential job laws.
    pub constants_provenance: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cramer_estimate: Vec<CurvePoint>,
}

/// Regime plus every applicable constant; errors with "no Cramér root" on
/// critically loaded models.
pub fn analyze_report(model: &LevyModel) -> Result<AnalysisReport, CliError> {
    let regime = model.classify_regime();
    let regime_str = match regime {
        Regime::Cramer { .. } => "cramer",
        Regime::PositiveDrift { .. } => "positive_drift",
        Regime::Neither => {
            return Err(CliError::Spectral(SpectralError::NoRoot));
        }
    };
    let (m, lambda) = match &model.up {
        Some(c) => (Some(c.dist.mean()), Some(c.rate)),
        None => (None, None),
    };
    let lc = match spectral::ladder_constants(model, regime) {
        Ok(lc) => Some(lc),
        Err(SpectralError::WrongModelClass(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let rstar = spectral::characteristic_root(model, regime).ok();
    let gamma = match regime {
        Regime::Cramer { gamma } => Some(gamma),
        _ => None,
    };
    let mut curve = Vec::new();
    if let (Some(g), Some(c)) = (gamma, lc.as_ref().and_then(|l| l.cramer_prefactor)) {
        for x in [0.0, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0] {
            curve.push(CurvePoint { x, probability: c * (-g * x).exp() });
        }
    }
    Ok(AnalysisReport {
        regime: regime_str.into(),
        mean_x1: model.mean_x1(),
        m,
        lambda,
        gamma,
        phi0: lc.as_ref().map(|l| l.killing_rate),
        phi_prime0: lc.as_ref().and_then(|l| l.ladder_mean),
        phi_hat_prime0: lc.as_ref().map(|l| l.dual_ladder_slope),
        psi_root: lc.as_ref().and_then(|l| l.psi_root),
        c_gamma: lc.as_ref().and_then(|l| l.cramer_prefactor),
        phi_prime_minus_gamma: lc.as_ref().and_then(|l| l.phi_slope_at_minus_gamma),
        rstar,
        constants_provenance: if lc.is_some() {
            "spectrally_positive_unit_gauge".into()
        } else {
            "mc_calibrated".into()
        },
        cramer_estimate: curve,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub u: f64,
    pub v: f64,
    pub ccdf: f64,
    pub density: Option<f64>,
    pub provenance: String,
}

/// Tabulate the limit law on the configured grid.
pub fn limit_rows(model: &LevyModel, cfg: &LimitConfig) -> Result<Vec<LimitRow>, CliError> {
    let tol = cfg.tolerances.clone().unwrap_or_default();
    let opts = LawOptions { abs_tol: tol.abs, rel_tol: tol.rel, ..LawOptions::default() };
    let law = limitlaw::joint_law_with(model, opts)?;
    let (us, vs) = match &cfg.grid {
        Some(g) => g.axes(),
        None => {
            let pts = stats::default_grid(model);
            let mut us: Vec<f64> = pts.iter().map(|p| p.0).collect();
            us.dedup();
            let vs: Vec<f64> = pts.iter().take_while(|p| p.0 == 0.0).map(|p| p.1).collect();
            (us, vs)
        }
    };
    let provenance = law.provenance().to_string();
    let mut rows = Vec::with_capacity(us.len() * vs.len());
    for &u in &us {
        for &v in &vs {
            rows.push(LimitRow {
                u,
                v,
                ccdf: law.ccdf(u, v),
                density: law.density(u, v),
                provenance: provenance.clone(),
            });
        }
    }
    Ok(rows)
}

pub fn write_limit_csv<W: Write>(mut w: W, rows: &[LimitRow]) -> Result<(), CliError> {
    writeln!(w, "u,v,ccdf,density,provenance")?;
    for r in rows {
        let d = r.density.map(|d| d.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.u, r.v, r.ccdf, d, r.provenance)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RuinEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

#[derive(Debug, Serialize)]
pub struct SimSummary {
    pub x: f64,
    pub n: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub n_effective: f64,
    pub mean_undershoot: f64,
    pub mean_overshoot: f64,
    pub undershoot_quantiles: [f64; 3],
    pub overshoot_quantiles: [f64; 3],
    pub mean_passage_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ruin: Option<RuinEstimate>,
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub samples: Vec<OvershootSample>,
    pub summary: SimSummary,
}

fn weighted_quantiles(values: &[(f64, f64)], ps: [f64; 3]) -> [f64; 3] {
    let mut rows = values.to_vec();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = rows.iter().map(|r| r.1).sum();
    let mut out = [0.0; 3];
    for (k, &p) in ps.iter().enumerate() {
        let target = p * total;
        let mut acc = 0.0;
        for &(v, w) in &rows {
            acc += w;
            if acc >= target {
                out[k] = v;
                break;
            }
        }
    }
    out
}

/// Run the configured sampler and summarise.
pub fn simulate_run(
    model: &LevyModel,
    cfg: &SimulateConfig,
    seed_override: Option<u64>,
) -> Result<SimulateOutput, CliError> {
    let seed = seed_override.unwrap_or(cfg.seed);
    let opts = match cfg.event_budget {
        Some(b) => SimOptions { event_budget: b },
        None => SimOptions::default(),
    };
    let samples = match cfg.sampler {
        SamplerKind::Plain => simulate::sample_overflow_with(model, cfg.x, cfg.n, seed, opts)?,
        SamplerKind::Tilted => {
            // Tilting is only defined under the Cramér condition.
            simulate::sample_first_passage_tilted(model, cfg.x, cfg.n, seed)?
        }
    };
    let nf = samples.len() as f64;
    let total_w: f64 = samples.iter().map(|s| s.weight).sum();
    let sum_sq_w: f64 = samples.iter().map(|s| s.weight * s.weight).sum();
    let wmean = |f: &dyn Fn(&OvershootSample) -> f64| -> f64 {
        samples.iter().map(|s| f(s) * s.weight).sum::<f64>() / total_w
    };
    let ruin = match cfg.sampler {
        SamplerKind::Tilted => {
            let Regime::Cramer { gamma } = model.classify_regime() else {
                return Err(CliError::Sim(SimError::WrongRegime));
            };
            let mean_w = total_w / nf;
            let var = samples
                .iter()
                .map(|s| (s.weight - mean_w).powi(2))
                .sum::<f64>()
                / (nf - 1.0);
            let scale = (-gamma * cfg.x).exp();
            Some(RuinEstimate {
                estimate: scale * mean_w,
                standard_error: scale * (var / nf).sqrt(),
            })
        }
        SamplerKind::Plain => None,
    };
    let ps = [0.5, 0.9, 0.99];
    let summary = SimSummary {
        x: cfg.x,
        n: cfg.n,
        seed,
        sampler: cfg.sampler,
        n_effective: if sum_sq_w > 0.0 { total_w * total_w / sum_sq_w } else { 0.0 },
        mean_undershoot: wmean(&|s| s.undershoot),
        mean_overshoot: wmean(&|s| s.overshoot),
        undershoot_quantiles: weighted_quantiles(
            &samples.iter().map(|s| (s.undershoot, s.weight)).collect::<Vec<_>>(),
            ps,
        ),
        overshoot_quantiles: weighted_quantiles(
            &samples.iter().map(|s| (s.overshoot, s.weight)).collect::<Vec<_>>(),
            ps,
        ),
        mean_passage_time: wmean(&|s| s.passage_time),
        ruin,
    };
    Ok(SimulateOutput { samples, summary })
}

pub fn write_samples_csv<W: Write>(mut w: W, samples: &[OvershootSample]) -> Result<(), CliError> {
    writeln!(w, "undershoot,overshoot,passage_time,weight")?;
    for s in samples {
        writeln!(w, "{},{},{},{}", s.undershoot, s.overshoot, s.passage_time, s.weight)?;
    }
    Ok(())
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<OvershootSample>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::InvalidConfig(format!("samples csv {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .ok_or_else(|| CliError::InvalidConfig("short samples row".into()))?
                .parse::<f64>()
                .map_err(|e| CliError::InvalidConfig(format!("bad float in samples csv: {e}")))
        };
        out.push(OvershootSample {
            undershoot: field(0)?,
            overshoot: field(1)?,
            passage_time: field(2)?,
            weight: field(3)?,
            cycles: 0,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub x: f64,
    pub n: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub grid_u_max: f64,
    pub grid_v_max: f64,
    pub grid_nu: usize,
    pub grid_nv: usize,
    pub delta: f64,
    pub bias_allowance: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareOutput {
    pub metadata: RunMetadata,
    pub report: ComparisonReport,
}

/// Empirical-vs-analytic verdict; `report.pass` is the process exit status.
pub fn compare_run(
    model: &LevyModel,
    cfg: &RunConfig,
    base: &Path,
    seed_override: Option<u64>,
) -> Result<CompareOutput, CliError> {
    let sim = cfg.simulate.as_ref().ok_or_else(|| {
        CliError::InvalidConfig("compare requires a simulate block for x/n/seed".into())
    })?;
    let cmp = cfg.compare.clone().unwrap_or_default();
    let seed = seed_override.unwrap_or(sim.seed);

    let samples = match &cmp.samples_csv {
        Some(p) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            read_samples_csv(&path)?
        }
        None => {
            simulate_run(model, sim, seed_override)?.samples
        }
    };
    let emp = stats::EmpiricalCcdf::from_overflow(&samples)?;
    let law = limitlaw::joint_law(model)?;

    let grid_spec = cfg
        .limit
        .as_ref()
        .and_then(|l| l.grid.clone())
        .unwrap_or_else(|| {
            let m = model.up.as_ref().map_or(1.0, |c| c.dist.mean());
            GridSpec { u_max: 4.0 * m, v_max: 4.0 * m, nu: 17, nv: 17 }
        });
    let (us, vs) = grid_spec.axes();
    let grid = stats::grid_product(&us, &vs);
    let report = stats::compare(&emp, |u, v| law.ccdf(u, v), &grid, cmp.delta, cmp.bias_allowance);
    Ok(CompareOutput {
        metadata: RunMetadata {
            x: sim.x,
            n: sim.n,
            seed,
            sampler: sim.sampler,
            grid_u_max: grid_spec.u_max,
            grid_v_max: grid_spec.v_max,
            grid_nu: grid_spec.nu,
            grid_nv: grid_spec.nv,
            delta: cmp.delta,
            bias_allowance: cmp.bias_allowance,
        },
        report,
    })
}

pub fn write_residuals_csv<W: Write>(mut w: W, report: &ComparisonReport) -> Result<(), CliError> {
    writeln!(w, "u,v,empirical,analytic,residual")?;
    for r in &report.residuals {
        writeln!(w, "{},{},{},{},{}", r.u, r.v, r.empirical, r.analytic, r.residual)?;
    }
    Ok(())
}

/// Finite-level convergence table.
pub fn converge_run(
    model: &LevyModel,
    cfg: &RunConfig,
    seed_override: Option<u64>,
) -> Result<Vec<(f64, f64)>, CliError> {
    let conv = cfg
        .converge
        .as_ref()
        .ok_or_else(|| CliError::InvalidConfig("converge block missing".into()))?;
    if conv.x_list.is_empty() || conv.x_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::InvalidConfig(
            "converge.x_list must be nonempty and increasing".into(),
        ));
    }
    let (n, seed) = match &cfg.simulate {
        Some(s) => (s.n, seed_override.unwrap_or(s.seed)),
        None => (100_000, seed_override.unwrap_or(0)),
    };
    Ok(stats::convergence_study(model, &conv.x_list, n, seed)?)
}

pub fn write_converge_csv<W: Write>(mut w: W, rows: &[(f64, f64)]) -> Result<(), CliError> {
    writeln!(w, "x,sup_distance")?;
    for (x, d) in rows {
        writeln!(w, "{x},{d}")?;
    }
    Ok(())
}
