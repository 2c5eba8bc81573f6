//! Closed-form Plücker correction via Lagrange multipliers.
//!
//! For an input pair (a, b) with p = aᵀb and q = ‖a‖² + ‖b‖², the
//! stationarity conditions of the constrained problem reduce to the
//! quadratic pλ² − qλ + p = 0. Its smaller root
//!
//! ```text
//! α = 2p / (q + √(q² − 4p²))
//! ```
//!
//! yields the global minimizer
//!
//! ```text
//! x = (a − αb) / (1 − α²),    y = (b − αa) / (1 − α²),
//! ```
//!
//! valid in any dimension n ≥ 2 since only the scalars p and q enter the
//! multiplier. The inputs a = ±b and a = b = 0 are poles of the formula and
//! get dedicated branches.

use crate::error::{Error, Result};
use crate::geometry::{dot, norm_sq, objective_raw, Branch, CorrectionResult, Method, VecPair};

/// Default relative threshold below which ‖a ∓ b‖ is treated as a = ±b.
///
/// 2⁻²⁶ ≈ √ε for f64: below it the factor 1/(1 − α²) has lost every
/// significant digit, while the limiting branch value is exact.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1.0 / 67_108_864.0;

/// Relative floor on (q² − 4p²)/q² under which the discriminant is
/// recomputed as ‖a−b‖²·‖a+b‖² to dodge the cancellation in q² − 4p².
const DISC_DIRECT_MIN: f64 = 1.0 / (1u64 << 40) as f64;

/// The scalar pipeline behind the closed form: p, q, the discriminant,
/// both roots of pλ² − qλ + p = 0, and the output scale 1/(1 − α²).
#[derive(Debug, Clone, PartialEq)]
pub struct LmpcIntermediates {
    /// aᵀb.
    pub p: f64,
    /// ‖a‖² + ‖b‖².
    pub q: f64,
    /// q² − 4p² ≥ 0.
    pub disc: f64,
    /// Larger root (q + √disc)/(2p); absent when p = 0.
    pub lambda1: Option<f64>,
    /// Smaller root α = 2p/(q + √disc); the selected multiplier.
    pub lambda2: f64,
    /// 1/(1 − α²).
    pub scale: f64,
}

impl LmpcIntermediates {
    /// Compute the pipeline for a non-degenerate input.
    ///
    /// Errors with `DegenerateInput` when q = 0 or a = ±b within
    /// `degeneracy_tol` (the multiplier and scale are undefined there).
    pub fn compute(input: &VecPair, degeneracy_tol: f64) -> Result<Self> {
        let a = input.a().as_slice();
        let b = input.b().as_slice();
        let p = dot(a, b);
        let q = norm_sq(a) + norm_sq(b);
        if q == 0.0 {
            return Err(Error::DegenerateInput("both vectors zero"));
        }
        let thr = degeneracy_tol * norm_sq(a).max(norm_sq(b)).sqrt();
        if diff_norm_sq(a, b).sqrt() <= thr || sum_norm_sq(a, b).sqrt() <= thr {
            return Err(Error::DegenerateInput(
                "a = ±b: multiplier at a pole, use the correction branches",
            ));
        }
        let (lambda1, lambda2) = lambda_roots(p, q)?;
        Ok(Self {
            p,
            q,
            disc: (q * q - 4.0 * p * p).max(0.0),
            lambda1,
            lambda2,
            scale: 1.0 / (1.0 - lambda2 * lambda2),
        })
    }
}

/// Roots of the multiplier quadratic pλ² − qλ + p = 0.
///
/// The returned pair is (λ₁, λ₂) with λ₁ = (q + √(q² − 4p²))/(2p) (absent
/// when p = 0) and λ₂ = 2p/(q + √(q² − 4p²)). The second form is the
/// cancellation-free equivalent of (q − √(q² − 4p²))/(2p); it stays exact
/// as p → 0 and equals 0 at p = 0.
pub fn lambda_roots(p: f64, q: f64) -> Result<(Option<f64>, f64)> {
    if q == 0.0 {
        return Err(Error::DegenerateInput("both vectors zero (q = 0)"));
    }
    if q < 2.0 * p.abs() {
        return Err(Error::InvariantViolation(format!(
            "q = {q} < 2|p| = {}: impossible for real inputs",
            2.0 * p.abs()
        )));
    }
    // q ≥ 2|p| so the true discriminant is nonnegative; clamp the rounding.
    let disc = (q * q - 4.0 * p * p).max(0.0);
    let root = q + disc.sqrt();
    let lambda2 = 2.0 * p / root;
    let lambda1 = (p != 0.0).then(|| root / (2.0 * p));
    Ok((lambda1, lambda2))
}

/// The objective along the stationarity curve:
/// g(λ) = (λ/(1 − λ²))² (qλ² − 4pλ + q).
///
/// At a root λᵢ of the multiplier quadratic, g(λᵢ) equals the objective at
/// the corresponding candidate pair.
pub fn g_value(lambda: f64, p: f64, q: f64) -> Result<f64> {
    if lambda == 1.0 || lambda == -1.0 {
        return Err(Error::Pole(lambda));
    }
    let phi = lambda / (1.0 - lambda * lambda);
    Ok(phi * phi * (q * lambda * lambda - 4.0 * p * lambda + q))
}

/// Correct (a, b) to the nearest pair on the Klein quadric.
///
/// `degeneracy_tol` is the relative threshold for the a = ±b branches;
/// [`DEFAULT_DEGENERACY_TOL`] is the sensible default. The returned
/// objective is always recomputed from the actual output pair.
pub fn correct_lmpc(input: &VecPair, degeneracy_tol: f64) -> Result<CorrectionResult> {
    if !degeneracy_tol.is_finite() || degeneracy_tol < 0.0 {
        return Err(Error::InvalidInput(format!(
            "degeneracy tolerance must be finite and nonnegative, got {degeneracy_tol}"
        )));
    }
    let n = input.dim();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let (branch, lambda) = lmpc_kernel(
        input.a().as_slice(),
        input.b().as_slice(),
        degeneracy_tol,
        &mut x,
        &mut y,
    );
    let objective = objective_raw(input.a().as_slice(), input.b().as_slice(), &x, &y);
    Ok(CorrectionResult {
        x: crate::geometry::RealVec::new(x)?,
        y: crate::geometry::RealVec::new(y)?,
        objective,
        lambda,
        branch,
        method: Method::Lmpc,
    })
}

/// Allocation-free core shared by [`correct_lmpc`] and the timing harness.
///
/// Branch order: q = 0 (both zero), p = 0 exactly (input already on the
/// quadric, returned bit-identically), then for near-degenerate inputs the
/// a = ±b representatives, otherwise the closed form. The direct
/// discriminant q² − 4p² is used only when it is far enough from zero to
/// carry full relative accuracy AND provably outside the degeneracy
/// threshold; otherwise √disc is rebuilt as ‖a−b‖·‖a+b‖, which is exact
/// to rounding for any input.
#[inline]
pub(crate) fn lmpc_kernel(
    a: &[f64],
    b: &[f64],
    tol: f64,
    x: &mut [f64],
    y: &mut [f64],
) -> (Branch, Option<f64>) {
    let mut p = 0.0;
    let mut na2 = 0.0;
    let mut nb2 = 0.0;
    for (ai, bi) in a.iter().zip(b) {
        p += ai * bi;
        na2 += ai * ai;
        nb2 += bi * bi;
    }
    let q = na2 + nb2;
    if q == 0.0 {
        x.fill(0.0);
        y.fill(0.0);
        return (Branch::BothZero, None);
    }
    if p == 0.0 {
        x.copy_from_slice(a);
        y.copy_from_slice(b);
        return (Branch::OrthogonalInput, Some(0.0));
    }
    let disc = q * q - 4.0 * p * p;
    // 2·tol² guards the branch order when callers pass a large tolerance.
    let floor = DISC_DIRECT_MIN.max(2.0 * tol * tol);
    if disc > floor * (q * q) {
        let alpha = 2.0 * p / (q + disc.sqrt());
        write_solution(a, b, alpha, x, y);
        return (Branch::Generic, Some(alpha));
    }
    let dm = diff_norm_sq(a, b);
    let dp = sum_norm_sq(a, b);
    let thr = tol * na2.max(nb2).sqrt();
    if dm.sqrt() <= thr {
        x.copy_from_slice(a);
        y.fill(0.0);
        return (Branch::EqualVectors, None);
    }
    if dp.sqrt() <= thr {
        x.copy_from_slice(a);
        y.fill(0.0);
        return (Branch::OppositeVectors, None);
    }
    let alpha = 2.0 * p / (q + dm.sqrt() * dp.sqrt());
    write_solution(a, b, alpha, x, y);
    (Branch::Generic, Some(alpha))
}

#[inline]
fn write_solution(a: &[f64], b: &[f64], alpha: f64, x: &mut [f64], y: &mut [f64]) {
    let scale = 1.0 / (1.0 - alpha * alpha);
    for (((xi, yi), ai), bi) in x.iter_mut().zip(y.iter_mut()).zip(a).zip(b) {
        *xi = (ai - alpha * bi) * scale;
        *yi = (bi - alpha * ai) * scale;
    }
}

#[inline]
fn diff_norm_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(ai, bi)| (ai - bi) * (ai - bi)).sum()
}

#[inline]
fn sum_norm_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(ai, bi)| (ai + bi) * (ai + bi)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{klein_residual, objective, RealVec};
    use approx::assert_relative_eq;

    const SQRT5: f64 = 2.23606797749979;

    fn pair(a: &[f64], b: &[f64]) -> VecPair {
        VecPair::from_slices(a, b).unwrap()
    }

    #[test]
    fn lambda_roots_orthogonal_input() {
        let (l1, l2) = lambda_roots(0.0, 2.0).unwrap();
        assert!(l1.is_none());
        assert_eq!(l2, 0.0);
    }

    #[test]
    fn lambda_roots_worked_example() {
        let (l1, l2) = lambda_roots(1.0, 3.0).unwrap();
        let l1 = l1.unwrap();
        assert_relative_eq!(l1, (3.0 + SQRT5) / 2.0, max_relative = 1e-15);
        // λ₂ must be the stable form 2/(q + √disc), bit for bit.
        assert_eq!(l2, 2.0 / (3.0 + 5.0f64.sqrt()));
        for l in [l1, l2] {
            let residual = l * l - 3.0 * l + 1.0;
            assert!(residual.abs() < 1e-12, "root residual {residual}");
        }
    }

    #[test]
    fn lambda_roots_double_root_at_equality() {
        // p = q/2 is the a = b case; callers must have branched already.
        let (l1, l2) = lambda_roots(3.0, 6.0).unwrap();
        assert_eq!(l1, Some(1.0));
        assert_eq!(l2, 1.0);
    }

    #[test]
    fn lambda_roots_errors() {
        assert!(matches!(
            lambda_roots(0.0, 0.0),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            lambda_roots(2.0, 3.0),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn g_value_examples() {
        assert_eq!(g_value(0.0, 5.0, 11.0).unwrap(), 0.0);
        let l2 = (3.0 - SQRT5) / 2.0;
        let l1 = (3.0 + SQRT5) / 2.0;
        assert_relative_eq!(g_value(l2, 1.0, 3.0).unwrap(), 0.3819660112501051, max_relative = 1e-12);
        assert_relative_eq!(g_value(l1, 1.0, 3.0).unwrap(), 2.618033988749895, max_relative = 1e-12);
        assert!(g_value(l1, 1.0, 3.0).unwrap() <= 3.0);
        assert!(matches!(g_value(1.0, 1.0, 3.0), Err(Error::Pole(_))));
        assert!(matches!(g_value(-1.0, 1.0, 3.0), Err(Error::Pole(_))));
    }

    #[test]
    fn g_matches_objective_at_both_candidates() {
        // Candidates (xᵢ, yᵢ) built from the raw root formula, independent
        // of the solver path.
        let input = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        let (p, q) = (1.0, 3.0);
        let (l1, l2) = lambda_roots(p, q).unwrap();
        for lambda in [l1.unwrap(), l2] {
            let s = 1.0 / (1.0 - lambda * lambda);
            let x: Vec<f64> = input
                .a()
                .iter()
                .zip(input.b().iter())
                .map(|(ai, bi)| (ai - lambda * bi) * s)
                .collect();
            let y: Vec<f64> = input
                .a()
                .iter()
                .zip(input.b().iter())
                .map(|(ai, bi)| (bi - lambda * ai) * s)
                .collect();
            let x = RealVec::new(x).unwrap();
            let y = RealVec::new(y).unwrap();
            let f = objective(&input, &x, &y).unwrap();
            let g = g_value(lambda, p, q).unwrap();
            assert_relative_eq!(f, g, max_relative = 1e-9);
        }
    }

    #[test]
    fn correct_orthogonal_input_is_identity() {
        let input = pair(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::OrthogonalInput);
        assert_eq!(r.x.as_slice(), input.a().as_slice());
        assert_eq!(r.y.as_slice(), input.b().as_slice());
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.lambda, Some(0.0));
    }

    #[test]
    fn correct_equal_vectors() {
        let input = pair(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::EqualVectors);
        assert_eq!(r.x.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(r.y.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(r.objective, 3.0);
        assert_eq!(r.lambda, None);
    }

    #[test]
    fn correct_opposite_vectors() {
        let input = pair(&[2.0, -1.0, 0.5], &[-2.0, 1.0, -0.5]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::OppositeVectors);
        assert_eq!(r.x.as_slice(), &[2.0, -1.0, 0.5]);
        assert_eq!(r.y.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(r.objective, input.b().norm_sq());
    }

    #[test]
    fn correct_both_zero() {
        let input = pair(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::BothZero);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.lambda, None);
    }

    #[test]
    fn correct_worked_example() {
        let input = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::Generic);
        assert_relative_eq!(r.lambda.unwrap(), 0.3819660112501051, max_relative = 1e-15);
        let expect_x = [0.7236067977499792, -0.447213595499958, 0.0];
        let expect_y = [0.7236067977499792, 1.170820393249937, 0.0];
        for i in 0..3 {
            assert_relative_eq!(r.x[i], expect_x[i], epsilon = 1e-15);
            assert_relative_eq!(r.y[i], expect_y[i], epsilon = 1e-15);
        }
        assert_relative_eq!(r.objective, 0.3819660112501051, max_relative = 1e-12);
        let res = klein_residual(&r.x, &r.y).unwrap().abs();
        assert!(res <= 1e-10 * (1.0 + r.x.norm() * r.y.norm()));
    }

    #[test]
    fn correct_is_dimension_generic() {
        // Same scalars p, q as the 3D worked example; the trailing zero
        // components must pass through untouched.
        let input3 = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        let input4 = pair(&[1.0, 0.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 0.0]);
        let r3 = correct_lmpc(&input3, DEFAULT_DEGENERACY_TOL).unwrap();
        let r4 = correct_lmpc(&input4, DEFAULT_DEGENERACY_TOL).unwrap();
        for i in 0..3 {
            assert_eq!(r4.x[i], r3.x[i]);
            assert_eq!(r4.y[i], r3.y[i]);
        }
        assert_eq!(r4.x[3], 0.0);
        assert_eq!(r4.y[3], 0.0);
        assert_relative_eq!(r4.objective, r3.objective, max_relative = 1e-15);
    }

    #[test]
    fn correct_parallel_keeps_dominant_vector() {
        // b = 2a: the closed form degrades gracefully to (0, b).
        let input = pair(&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::Generic);
        for i in 0..3 {
            assert_relative_eq!(r.x[i], 0.0, epsilon = 1e-14);
            assert_relative_eq!(r.y[i], input.b()[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn correct_rejects_bad_tolerance() {
        let input = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        assert!(matches!(
            correct_lmpc(&input, -1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            correct_lmpc(&input, f64::NAN),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn intermediates_invariants() {
        let input = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        let im = LmpcIntermediates::compute(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(im.p, 1.0);
        assert_eq!(im.q, 3.0);
        assert_eq!(im.disc, 5.0);
        assert_relative_eq!(im.lambda1.unwrap() * im.lambda2, 1.0, max_relative = 1e-10);
        assert!(im.lambda2.abs() < 1.0);
        assert_relative_eq!(im.scale, 1.0 / (1.0 - im.lambda2 * im.lambda2));

        assert!(matches!(
            LmpcIntermediates::compute(&pair(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]), 1e-8),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            LmpcIntermediates::compute(&pair(&[0.0, 0.0], &[0.0, 0.0]), 1e-8),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn near_degenerate_slow_path_still_satisfies_constraint() {
        // ‖a−b‖/‖a‖ ≈ 1e-7: above the default threshold, inside the
        // stable-discriminant region.
        let input = pair(&[1.0, 1.0, 1.0], &[1.0 + 1e-7, 1.0, 1.0]);
        let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(r.branch, Branch::Generic);
        let res = r.klein_residual().abs();
        assert!(
            res <= 1e-10 * (1.0 + r.x.norm() * r.y.norm()),
            "residual {res}"
        );
    }
}
