//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with its runtime. Oracles are symbolic closed forms and
//! exact classical formulas, independent of the evaluator code paths.
//!
//! Run with `cargo test -p levyq --test acceptance -- --nocapture`.

use std::time::Instant;

use levyq::limitlaw::{self, LawOptions};
use levyq::model::{JumpComponent, JumpDistribution, LevyModel, Regime};
use levyq::renewal;
use levyq::simulate;
use levyq::stats::{self, EmpiricalCcdf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mm1_stable() -> LevyModel {
    LevyModel::mm1(1.0, 2.0).validated().unwrap()
}

fn mm1_unstable() -> LevyModel {
    LevyModel::mm1(2.0, 1.0).validated().unwrap()
}

/// Symbolic-integration oracle for exponential jobs: the joint limit CCDF is
/// `(2e^{−u} − e^{−2u}) e^{−μ̃ v}` with `μ̃ = μ` stable, `μ̃ = μ` unstable
/// (rates 2 and 1 for the two standard models).
fn oracle_mm1(u: f64, v: f64, vtail_rate: f64) -> f64 {
    (2.0 * (-u).exp() - (-2.0 * u).exp()) * (-vtail_rate * v).exp()
}

fn grid_axis() -> Vec<f64> {
    (0..17).map(|i| i as f64 * 0.25).collect()
}

fn finish(name: &str, started: Instant, budget_s: f64) {
    let dt = started.elapsed().as_secs_f64();
    println!("[acceptance] {name}: PASS ({dt:.2} s)");
    assert!(
        dt < budget_s,
        "{name} exceeded its runtime budget: {dt:.2} s >= {budget_s} s"
    );
}

#[test]
fn c01_mm1_cramer_closed_form() {
    let t0 = Instant::now();
    let law = limitlaw::joint_law(&mm1_stable()).unwrap();
    for u in grid_axis() {
        for v in grid_axis() {
            let got = law.ccdf(u, v);
            let want = oracle_mm1(u, v, 2.0);
            assert!(
                (got - want).abs() < 1e-8,
                "Ψ∞({u},{v}) = {got}, oracle {want}"
            );
        }
    }
    finish("C1 stable M/M/1 closed form", t0, 1.0);
}

#[test]
fn c02_mm1_positive_drift_closed_form() {
    let t0 = Instant::now();
    let law = limitlaw::joint_law(&mm1_unstable()).unwrap();
    for u in grid_axis() {
        for v in grid_axis() {
            let got = law.ccdf(u, v);
            let want = oracle_mm1(u, v, 1.0);
            assert!(
                (got - want).abs() < 1e-8,
                "Ψ∞({u},{v}) = {got}, oracle {want}"
            );
        }
    }
    finish("C2 unstable M/M/1 closed form", t0, 1.0);
}

/// Random hyperexponential M/G/1 model with a decay margin so Cramér
/// kernels stay comfortably integrable.
fn random_hyperexp_queue(rng: &mut ChaCha8Rng, want_stable: bool) -> LevyModel {
    loop {
        let k = if rng.random::<f64>() < 0.5 { 2 } else { 3 };
        let mut rates: Vec<f64> = (0..k).map(|_| rng.random_range(0.6..5.0)).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
        let s: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= s;
        }
        let dist = JumpDistribution::Hyperexponential { weights, rates: rates.clone() };
        let m = dist.mean();
        let load = if want_stable {
            rng.random_range(0.35..0.8)
        } else {
            rng.random_range(1.3..2.5)
        };
        let model = LevyModel::queue(load / m, dist);
        let Ok(model) = model.validated() else { continue };
        match model.classify_regime() {
            Regime::Cramer { gamma } if want_stable => {
                if gamma < 0.8 * rates[0] {
                    return model;
                }
            }
            Regime::PositiveDrift { .. } if !want_stable => return model,
            _ => {}
        }
    }
}

#[test]
fn c03_route_consistency_hyperexponential() {
    let t0 = Instant::now();
    let us = grid_axis();
    let vs = grid_axis();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for want_stable in [true, false] {
        for _ in 0..10 {
            let model = random_hyperexp_queue(&mut rng, want_stable);
            let thm = limitlaw::joint_law(&model).unwrap();
            let closed = limitlaw::joint_law_closed(&model).unwrap();
            let dens = limitlaw::queue_ccdf_by_double_integral(&model, &us, &vs, 1e-8).unwrap();
            for (i, &u) in us.iter().enumerate() {
                for (j, &v) in vs.iter().enumerate() {
                    let a = thm.ccdf(u, v);
                    let b = closed.ccdf(u, v);
                    let c = dens[i][j];
                    assert!(
                        (a - b).abs() < 1e-6 && (a - c).abs() < 1e-6 && (b - c).abs() < 1e-6,
                        "routes disagree at ({u},{v}) for {model:?}: thm {a}, closed {b}, density {c}"
                    );
                }
            }
        }
    }
    finish("C3 route consistency (thm/closed/density)", t0, 30.0);
}

fn random_cramer_model(rng: &mut ChaCha8Rng) -> LevyModel {
    loop {
        let kind = rng.random_range(0..3u32);
        let dist = match kind {
            0 => JumpDistribution::Exponential { rate: rng.random_range(0.8..4.0) },
            1 => {
                let rates = vec![rng.random_range(0.8..2.0), rng.random_range(2.0..6.0)];
                let w0 = rng.random_range(0.2..0.8);
                JumpDistribution::Hyperexponential { weights: vec![w0, 1.0 - w0], rates }
            }
            _ => JumpDistribution::Erlang {
                shape: rng.random_range(1..4u32),
                rate: rng.random_range(1.5..6.0),
            },
        };
        let m = dist.mean();
        let load = rng.random_range(0.35..0.8);
        let Ok(model) = LevyModel::queue(load / m, dist).validated() else { continue };
        if let Regime::Cramer { gamma } = model.classify_regime() {
            if gamma < 0.8 * model.cumulant_boundary() {
                return model;
            }
        }
    }
}

#[test]
fn c04_marginal_overshoot_identity() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..10 {
        let model = random_cramer_model(&mut rng);
        let law = limitlaw::joint_law(&model).unwrap();
        for v in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let joint = law.ccdf(0.0, v);
            let marginal = limitlaw::marginal_overshoot_ccdf(&model, v).unwrap();
            assert!(
                (joint - marginal).abs() < 1e-8,
                "Ψ∞(0,{v}) = {joint} vs ladder-tail marginal {marginal} for {model:?}"
            );
        }
    }
    finish("C4 marginal overshoot identity", t0, 10.0);
}

#[test]
fn c05_simulation_vs_thm1() {
    let t0 = Instant::now();
    let model = mm1_unstable();
    let law = limitlaw::joint_law(&model).unwrap();
    let grid = stats::grid_product(&grid_axis(), &grid_axis());
    let mut passes = 0;
    for seed in 0..10u64 {
        let samples = simulate::sample_overflow(&model, 10.0, 1_000_000, seed).unwrap();
        let emp = EmpiricalCcdf::from_overflow(&samples).unwrap();
        let report = stats::compare(&emp, |u, v| law.ccdf(u, v), &grid, 0.01, 0.002);
        if report.pass {
            passes += 1;
        } else {
            println!(
                "[acceptance] C5 seed {seed}: sup {:.5} vs band {:.5}",
                report.sup_distance,
                report.dkw_epsilon + report.bias_allowance
            );
        }
    }
    assert!(passes >= 8, "only {passes}/10 seeds inside the DKW band");
    finish("C5 plain MC vs positive-drift law (x=10, n=1e6)", t0, 120.0);
}

#[test]
fn c06_simulation_vs_thm2() {
    let t0 = Instant::now();
    let model = mm1_stable();
    let law = limitlaw::joint_law(&model).unwrap();
    let grid = stats::grid_product(&grid_axis(), &grid_axis());
    let samples = simulate::sample_overflow(&model, 6.0, 200_000, 11).unwrap();
    let emp = EmpiricalCcdf::from_overflow(&samples).unwrap();
    let report = stats::compare(&emp, |u, v| law.ccdf(u, v), &grid, 0.01, 0.01);
    assert!(
        report.pass,
        "sup {} vs band {}",
        report.sup_distance,
        report.dkw_epsilon + report.bias_allowance
    );
    finish("C6 reflected MC vs Cramér law (x=6, n=2e5)", t0, 300.0);
}

#[test]
fn c07_importance_sampled_ruin() {
    let t0 = Instant::now();
    let model = mm1_stable();
    for x in [4.0, 8.0, 12.0] {
        let (est, se) = simulate::estimate_ruin_is(&model, x, 1_000_000, 21).unwrap();
        let exact = 0.5 * (-x).exp();
        assert!(
            (est - exact).abs() <= 3.0 * se,
            "ruin({x}): est {est} vs exact {exact} (se {se})"
        );
        // Equivalently the prefactor is recovered: e^{γx}·est ≈ C_γ = 1/2.
        let c_hat = x.exp() * est;
        assert!(
            (c_hat - 0.5).abs() <= 3.0 * x.exp() * se,
            "C_γ from x={x}: {c_hat}"
        );
        assert!(se / est < 0.01, "relative error should stay O(1) in x");
    }
    finish("C7 importance-sampled overflow probability", t0, 60.0);
}

#[test]
fn c08_finite_level_identity_mm1() {
    let t0 = Instant::now();
    let model = mm1_stable();
    for x in [1.0, 2.0, 4.0, 8.0] {
        let got = limitlaw::passage_ccdf_finite_mm1(&model, x, 0.0, 0.0).unwrap();
        let exact = 0.5 * (-x).exp();
        assert!(
            (got - exact).abs() < 1e-9,
            "Φ_x(0,0) at x={x}: {got} vs {exact}"
        );
    }
    // e^{γx} Φ_x(u,v) / C_γ approaches the conditional limit law.
    let cond = limitlaw::conditional_passage_law(&model).unwrap();
    let x = 12.0;
    let c_gamma = 0.5;
    for u in [0.0, 1.0] {
        for v in [0.0, 1.0] {
            let finite = limitlaw::passage_ccdf_finite_mm1(&model, x, u, v).unwrap();
            let scaled = x.exp() * finite / c_gamma;
            let lim = cond.ccdf(u, v);
            assert!(
                (scaled - lim).abs() / lim < 0.02,
                "finite-x vs limit at ({u},{v}): {scaled} vs {lim}"
            );
        }
    }
    finish("C8 finite-level passage identity", t0, 5.0);
}

#[test]
fn c09_tilt_correctness() {
    let t0 = Instant::now();
    let tilted = simulate::tilt(&mm1_stable()).unwrap();
    let expect = mm1_unstable();
    let (a, b) = (tilted.up.as_ref().unwrap(), expect.up.as_ref().unwrap());
    assert!((a.rate - b.rate).abs() < 1e-12);
    match (&a.dist, &b.dist) {
        (
            JumpDistribution::Exponential { rate: ra },
            JumpDistribution::Exponential { rate: rb },
        ) => assert!((ra - rb).abs() < 1e-12),
        other => panic!("tilted law mismatch: {other:?}"),
    }
    assert_eq!(tilted.drift, expect.drift);

    // Weighted tilted samples reproduce the conditional limit law.
    let model = mm1_stable();
    let cond = limitlaw::conditional_passage_law(&model).unwrap();
    let samples = simulate::sample_first_passage_tilted(&model, 8.0, 1_000_000, 33).unwrap();
    let emp = EmpiricalCcdf::from_overflow(&samples).unwrap();
    let grid = stats::grid_product(&grid_axis(), &grid_axis());
    let report = stats::compare(&emp, |u, v| cond.ccdf(u, v), &grid, 0.01, 0.0);
    assert!(
        report.pass,
        "sup {} vs DKW band {}",
        report.sup_distance, report.dkw_epsilon
    );
    finish("C9 tilt correctness and weighted CCDF", t0, 60.0);
}

#[test]
fn c10_mc_renewal_estimator() {
    let t0 = Instant::now();
    let model = mm1_unstable();
    let grid = [0.5, 1.0, 2.0];
    let est = renewal::estimate_dual_renewal_mc(&model, &grid, 1_000_000, 7).unwrap();
    for &y in &grid {
        let exact = 1.0 - (-y).exp();
        let se = est.standard_error(y).unwrap();
        assert!(
            (est.eval(y) - exact).abs() <= 3.0 * se,
            "V̂({y}) = {} vs {exact} (se {se})",
            est.eval(y)
        );
    }
    finish("C10 Monte Carlo renewal estimator", t0, 120.0);
}

#[test]
fn c11_heavy_tail_positive_drift() {
    let t0 = Instant::now();
    let model = LevyModel::queue(1.0, JumpDistribution::Pareto { scale: 1.0, index: 2.5 })
        .validated()
        .unwrap();
    assert!(model.mean_x1() > 0.0);
    let law = limitlaw::joint_law(&model).unwrap();
    let samples = simulate::sample_overflow(&model, 50.0, 1_000_000, 3).unwrap();
    let emp = EmpiricalCcdf::from_overflow(&samples).unwrap();
    let grid = stats::default_grid(&model);
    let report = stats::compare(&emp, |u, v| law.ccdf(u, v), &grid, 0.01, 0.01);
    assert!(
        report.pass,
        "sup {} vs band {}",
        report.sup_distance,
        report.dkw_epsilon + report.bias_allowance
    );
    finish("C11 heavy-tailed positive drift (x=50, n=1e6)", t0, 300.0);
}

#[test]
fn c12_property_suite_model_zoo() {
    let t0 = Instant::now();
    let zoo: Vec<LevyModel> = vec![
        mm1_stable(),
        mm1_unstable(),
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
        LevyModel::queue(1.0, JumpDistribution::Pareto { scale: 1.0, index: 2.5 })
            .validated()
            .unwrap(),
    ];
    for model in &zoo {
        let regime = model.classify_regime();
        assert!(regime != Regime::Neither, "zoo model fell outside both regimes");
        let law = limitlaw::joint_law(model).unwrap();

        // Monotonicity in both arguments and total mass one.
        let q = 4.0 * model.up.as_ref().unwrap().dist.mean();
        let axis: Vec<f64> = (0..9).map(|i| q * i as f64 / 8.0).collect();
        assert!((law.ccdf(0.0, 0.0) - 1.0).abs() < 1e-7);
        for &u in &axis {
            for &v in &axis {
                let base = law.ccdf(u, v);
                let h = q / 8.0;
                assert!(law.ccdf(u + h, v) <= base + 1e-9);
                assert!(law.ccdf(u, v + h) <= base + 1e-9);
            }
        }

        // Density route integrates to one when a density exists.
        let has_density = model.up.as_ref().unwrap().dist.has_density();
        if has_density {
            let mass = limitlaw::queue_ccdf_by_double_integral(model, &[0.0], &[0.0], 1e-8)
                .unwrap()[0][0];
            assert!(
                (mass - 1.0).abs() < 1e-7,
                "density mass {mass} for {model:?}"
            );
        }

        // Strict positivity of samples and determinism across thread counts.
        let x = 1.5 * q;
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| simulate::sample_overflow(model, x, 2_000, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        for (s, t) in a.iter().zip(&b) {
            assert!(s.undershoot > 0.0 && s.undershoot <= x);
            assert!(s.overshoot > 0.0);
            assert_eq!(s.undershoot.to_bits(), t.undershoot.to_bits());
            assert_eq!(s.overshoot.to_bits(), t.overshoot.to_bits());
        }
    }

    // Two-sided model: the MC-renewal-backed law is normalised and monotone.
    let two_sided = LevyModel {
        drift: -1.0,
        up: Some(JumpComponent {
            rate: 2.2,
            dist: JumpDistribution::Exponential { rate: 1.0 },
        }),
        down: Some(JumpComponent {
            rate: 0.4,
            dist: JumpDistribution::Exponential { rate: 2.0 },
        }),
        u0: 0.0,
    }
    .validated()
    .unwrap();
    let law = limitlaw::joint_law_with(
        &two_sided,
        LawOptions { mc_paths: 50_000, ..LawOptions::default() },
    )
    .unwrap();
    assert!((law.ccdf(0.0, 0.0) - 1.0).abs() < 1e-9);
    assert!(law.ccdf(2.0, 2.0) < law.ccdf(1.0, 1.0));

    finish("C12 property suite over the model zoo", t0, 300.0);
}
