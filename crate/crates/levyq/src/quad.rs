//! Adaptive quadrature used by the limit-law evaluators.
//!
//! Two entry points:
//!
//! * [`integrate_interval`] — finite interval, Gauss–Legendre panels with
//!   adaptive bisection and optional split points for integrands with kinks
//!   or steps (deterministic job laws produce both).
//! * [`integrate_tail`] — semi-infinite `[lower, ∞)` for kernels that are
//!   eventually monotone decaying. Panels of doubling width are accumulated
//!   until successive contributions stabilise and a geometric bound on the
//!   truncated tail drops below the tolerance. Doubling widths make the
//!   panel-contribution ratio strictly less than one for both exponential
//!   and polynomial (`z^{-α}`, α > 1) decay, so the bound is valid for every
//!   kernel in scope.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("tail quadrature did not converge after {0} panel doublings")]
    NoConvergence(usize),
}

/// 16-point Gauss–Legendre abscissae (positive half) and weights on [-1, 1].
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

fn gl16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        let dx = h * GL16_X[i];
        acc += GL16_W[i] * (f(c + dx) + f(c - dx));
    }
    acc * h
}

fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let whole = gl16(f, a, b);
    let m = 0.5 * (a + b);
    let halves = gl16(f, a, m) + gl16(f, m, b);
    let err = (halves - whole).abs();
    if err <= tol.max(1e-15 * halves.abs()) || depth == 0 || (b - a) < 1e-14 * (1.0 + m.abs()) {
        return halves;
    }
    adaptive_gl(f, a, m, 0.5 * tol, depth - 1) + adaptive_gl(f, m, b, 0.5 * tol, depth - 1)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`, splitting first at
/// any `breakpoints` that fall strictly inside the interval.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    breakpoints: &[f64],
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut acc = 0.0;
    let mut lo = a;
    let n = cuts.len() + 1;
    for &cut in &cuts {
        acc += adaptive_gl(f, lo, cut, tol / n as f64, 48);
        lo = cut;
    }
    acc + adaptive_gl(f, lo, b, tol / n as f64, 48)
}

/// Integrate `f` over `[lower, ∞)` to absolute tolerance `tol`.
///
/// `breakpoints` lists known kink/step locations of the kernel (absolute
/// coordinates); they are folded into the panel edges.
pub fn integrate_tail_split<F: Fn(f64) -> f64>(
    f: &F,
    lower: f64,
    tol: f64,
    breakpoints: &[f64],
) -> Result<f64, QuadError> {
    const MAX_DOUBLINGS: usize = 60;
    let panel_tol = tol / 64.0;

    let mut total = 0.0;
    let mut edge = lower;
    let mut width = 1.0_f64.max(1e-3 * lower.abs());
    let mut prev_contrib = f64::INFINITY;
    let mut zero_streak = 0usize;

    for _ in 0..MAX_DOUBLINGS {
        let next = edge + width;
        let contrib = integrate_interval(f, edge, next, panel_tol, breakpoints);
        total += contrib;

        let c = contrib.abs();
        if c == 0.0 {
            zero_streak += 1;
            // Two consecutive empty panels: compact support (step tails).
            if zero_streak >= 2 {
                return Ok(total);
            }
        } else {
            zero_streak = 0;
            if prev_contrib.is_finite() && prev_contrib > 0.0 {
                let ratio = c / prev_contrib;
                if ratio < 0.99 {
                    let tail_bound = c * ratio / (1.0 - ratio);
                    if c < 0.25 * tol && tail_bound < 0.5 * tol {
                        return Ok(total);
                    }
                }
            }
            prev_contrib = c;
        }
        edge = next;
        width *= 2.0;
    }
    Err(QuadError::NoConvergence(MAX_DOUBLINGS))
}

/// Adaptive quadrature of an eventually-decaying kernel over `[lower, ∞)`.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, lower: f64, tol: f64) -> Result<f64, QuadError> {
    integrate_tail_split(&f, lower, tol, &[])
}

/// Tail quadrature to relative tolerance: a rough pass fixes the scale, a
/// second pass refines to `rel · |I|`.
pub fn integrate_tail_rel<F: Fn(f64) -> f64>(
    f: &F,
    lower: f64,
    rel: f64,
    breakpoints: &[f64],
) -> Result<f64, QuadError> {
    let rough = integrate_tail_split(f, lower, 1e-6, breakpoints)?;
    if rough == 0.0 {
        return Ok(0.0);
    }
    let tol = (rough.abs() * rel).max(1e-300);
    integrate_tail_split(f, lower, tol, breakpoints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_kernel_from_zero() {
        let v = integrate_tail(|z| (-z).exp(), 0.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn shifted_product_kernel() {
        // ∫_1^∞ e^{-2z}(e^z - 1) dz = e^{-1} - e^{-2}/2
        let v = integrate_tail(|z| (-2.0 * z).exp() * (z.exp() - 1.0), 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 0.300211799553135976, epsilon = 1e-10);
    }

    #[test]
    fn power_law_kernel() {
        let v = integrate_tail(|z| z.powi(-3), 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn step_kernel_with_breakpoint() {
        // ∫_0^∞ 1{z < 1.5} dz with the step location declared.
        let v = integrate_tail_split(&|z| if z < 1.5 { 1.0 } else { 0.0 }, 0.0, 1e-10, &[1.5]);
        assert_abs_diff_eq!(v.unwrap(), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn finite_interval_with_kink() {
        // ∫_0^2 |z - 1| dz = 1
        let v = integrate_interval(&|z: f64| (z - 1.0).abs(), 0.0, 2.0, 1e-12, &[1.0]);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tight_tolerance_smooth_kernel() {
        let v = integrate_tail(|z| (-0.37 * z).exp(), 0.25, 1e-13).unwrap();
        let exact = (-0.37 * 0.25f64).exp() / 0.37;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-12);
    }
}
