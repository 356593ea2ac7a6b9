//! Empirical bivariate CCDFs and agreement tests against analytic laws.
//!
//! The empirical estimator is self-normalised over importance weights, with
//! effective sample size `(Σw)²/Σw²`. Agreement uses the distribution-free
//! DKW band applied per grid line with a Bonferroni correction (the band is
//! univariate; the grid has `n_u + n_v` lines) plus a configurable finite-
//! level bias allowance, since the theorems come with no rate.

use serde::Serialize;
use thiserror::Error;

use crate::limitlaw::{self, LawError};
use crate::model::{LevyModel, Regime};
use crate::simulate::{self, OvershootSample, SimError};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample set")]
    EmptyInput,
    #[error("weights must be positive and finite")]
    BadWeight,
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Weighted empirical joint CCDF of (undershoot, overshoot) pairs.
#[derive(Debug, Clone)]
pub struct EmpiricalCcdf {
    // Samples sorted by undershoot descending.
    us: Vec<f64>,
    vs: Vec<f64>,
    ws: Vec<f64>,
    total_weight: f64,
    n_effective: f64,
}

impl EmpiricalCcdf {
    pub fn new(samples: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self, StatsError> {
        let mut rows: Vec<(f64, f64, f64)> = samples.into_iter().collect();
        if rows.is_empty() {
            return Err(StatsError::EmptyInput);
        }
        if rows.iter().any(|r| !(r.2 > 0.0 && r.2.is_finite())) {
            return Err(StatsError::BadWeight);
        }
        rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let total_weight: f64 = rows.iter().map(|r| r.2).sum();
        let sum_sq: f64 = rows.iter().map(|r| r.2 * r.2).sum();
        Ok(EmpiricalCcdf {
            us: rows.iter().map(|r| r.0).collect(),
            vs: rows.iter().map(|r| r.1).collect(),
            ws: rows.iter().map(|r| r.2).collect(),
            total_weight,
            n_effective: total_weight * total_weight / sum_sq,
        })
    }

    pub fn from_overflow(samples: &[OvershootSample]) -> Result<Self, StatsError> {
        Self::new(samples.iter().map(|s| (s.undershoot, s.overshoot, s.weight)))
    }

    pub fn len(&self) -> usize {
        self.us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.us.is_empty()
    }

    /// Effective sample size `(Σw)²/Σw²`.
    pub fn n_effective(&self) -> f64 {
        self.n_effective
    }

    /// Normalised weighted fraction with undershoot > u and overshoot > v.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        // First index whose undershoot is <= u (descending order).
        let k = self.us.partition_point(|&s| s > u);
        let mut acc = 0.0;
        for i in 0..k {
            if self.vs[i] > v {
                acc += self.ws[i];
            }
        }
        acc / self.total_weight
    }

    /// Batch evaluation by a weight sweep over undershoot thresholds; output
    /// matches `eval` pointwise at O((n + q) log n) total cost.
    pub fn eval_many(&self, points: &[(f64, f64)]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[b].0.partial_cmp(&points[a].0).unwrap());

        let mut sorted_vs: Vec<f64> = self.vs.clone();
        sorted_vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut fen = Fenwick::new(sorted_vs.len());
        let mut inserted_weight = 0.0;
        let mut next = 0usize;

        let mut out = vec![0.0; points.len()];
        for &qi in &order {
            let (qu, qv) = points[qi];
            while next < self.us.len() && self.us[next] > qu {
                let rank = sorted_vs.partition_point(|&s| s < self.vs[next]);
                fen.add(rank, self.ws[next]);
                inserted_weight += self.ws[next];
                next += 1;
            }
            // Weight with v <= qv among inserted samples.
            let below = fen.prefix(sorted_vs.partition_point(|&s| s <= qv));
            out[qi] = (inserted_weight - below) / self.total_weight;
        }
        out
    }
}

struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0.0; n + 1] }
    }

    fn add(&mut self, mut i: usize, w: f64) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += w;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `count` positions.
    fn prefix(&self, mut count: usize) -> f64 {
        let mut acc = 0.0;
        while count > 0 {
            acc += self.tree[count];
            count -= count & count.wrapping_neg();
        }
        acc
    }
}

/// DKW band half-width `sqrt(ln(2/δ) / (2 n_eff))`.
pub fn dkw_epsilon(n_effective: f64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n_effective)).sqrt()
}

/// Bonferroni-corrected band for a product grid with `lines` grid lines.
pub fn dkw_epsilon_grid(n_effective: f64, delta: f64, lines: usize) -> f64 {
    dkw_epsilon(n_effective, delta / lines.max(1) as f64)
}

/// Product grid helper.
pub fn grid_product(us: &[f64], vs: &[f64]) -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(us.len() * vs.len());
    for &u in us {
        for &v in vs {
            g.push((u, v));
        }
    }
    g
}

/// Uniform 17×17 grid on [0, q]² with q = 4 × mean job size.
pub fn default_grid(model: &LevyModel) -> Vec<(f64, f64)> {
    let m = model.up.as_ref().map_or(1.0, |c| c.dist.mean());
    let q = 4.0 * m;
    let axis: Vec<f64> = (0..17).map(|i| q * i as f64 / 16.0).collect();
    grid_product(&axis, &axis)
}

/// Number of distinct grid lines (u-levels plus v-levels) of a point set.
pub fn grid_lines(grid: &[(f64, f64)]) -> usize {
    let mut us: Vec<f64> = grid.iter().map(|p| p.0).collect();
    let mut vs: Vec<f64> = grid.iter().map(|p| p.1).collect();
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();
    vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vs.dedup();
    us.len() + vs.len()
}

/// Largest absolute gap between the empirical CCDF and an analytic law over
/// the grid.
pub fn sup_distance(
    emp: &EmpiricalCcdf,
    law: impl Fn(f64, f64) -> f64,
    grid: &[(f64, f64)],
) -> f64 {
    let emp_vals = emp.eval_many(grid);
    grid.iter()
        .zip(emp_vals)
        .map(|(&(u, v), e)| (e - law(u, v)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub u: f64,
    pub v: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub residual: f64,
}

/// Verdict of one empirical-vs-analytic comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub n_effective: f64,
    pub delta: f64,
    pub grid_lines: usize,
    pub sup_distance: f64,
    pub dkw_epsilon: f64,
    pub bias_allowance: f64,
    pub pass: bool,
    pub residuals: Vec<ResidualRow>,
}

/// Compare an empirical CCDF to a law on a grid: pass iff the sup distance
/// is within the Bonferroni DKW band plus the bias allowance.
pub fn compare(
    emp: &EmpiricalCcdf,
    law: impl Fn(f64, f64) -> f64,
    grid: &[(f64, f64)],
    delta: f64,
    bias_allowance: f64,
) -> ComparisonReport {
    let emp_vals = emp.eval_many(grid);
    let mut residuals = Vec::with_capacity(grid.len());
    let mut sup = 0.0f64;
    for (&(u, v), e) in grid.iter().zip(emp_vals) {
        let a = law(u, v);
        let r = e - a;
        sup = sup.max(r.abs());
        residuals.push(ResidualRow { u, v, empirical: e, analytic: a, residual: r });
    }
    let lines = grid_lines(grid);
    let eps = dkw_epsilon_grid(emp.n_effective(), delta, lines);
    ComparisonReport {
        n_effective: emp.n_effective(),
        delta,
        grid_lines: lines,
        sup_distance: sup,
        dkw_epsilon: eps,
        bias_allowance,
        pass: sup <= eps + bias_allowance,
        residuals,
    }
}

/// Finite-level convergence: sample at each barrier in `x_list` and report
/// the sup distance to the limit law. Positive-drift models use the plain
/// reflected sampler; Cramér models use the tilted passage sampler (whose
/// target coincides with the reflected limit).
pub fn convergence_study(
    model: &LevyModel,
    x_list: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, StatsError> {
    let law = limitlaw::joint_law(model)?;
    let grid = default_grid(model);
    let mut out = Vec::with_capacity(x_list.len());
    for (i, &x) in x_list.iter().enumerate() {
        let samples = match model.classify_regime() {
            Regime::Cramer { .. } => {
                simulate::sample_first_passage_tilted(model, x, n, seed.wrapping_add(i as u64))?
            }
            _ => simulate::sample_overflow(model, x, n, seed.wrapping_add(i as u64))?,
        };
        let emp = EmpiricalCcdf::from_overflow(&samples)?;
        out.push((x, sup_distance(&emp, |u, v| law.ccdf(u, v), &grid)));
    }
    Ok(out)
}
