//! The Bartoli–Sturm reference corrections.
//!
//! Both variants project [a b] onto the quadric through two small singular
//! value decompositions: a thin SVD of the n×2 input matrix A = [a b], then
//! an SVD of the 2×2 matrix
//!
//! ```text
//! T = | z12  z22 |          with  Z = S·Vᵀ,
//!     | z21 -z11 |
//! ```
//!
//! whose second right singular vector v̂ builds the rotation
//! V̂ = [[v̂₁, −v̂₂], [v̂₂, v̂₁]] and the output R = U·V̂·diag(diag(V̂ᵀ·S·Vᵀ)).
//!
//! `correct_bs` computes both decompositions in closed form from 2×2 Gram
//! matrices; `correct_bs_iter` computes them with an iterative one-sided
//! Jacobi SVD (the analogue of calling a general-purpose SVD routine);
//! `correct_bs_lsvd` is the fully expanded scalar version for n = 3.

use crate::error::{Error, Result};
use crate::geometry::{
    dot, norm_sq, objective_raw, Branch, CorrectionResult, Method, RealVec, VecPair,
};
use crate::lmpc::DEFAULT_DEGENERACY_TOL;

/// Relative cutoff under which s₂ is treated as zero (a ∥ b).
///
/// The Gram-matrix route cannot certify a second singular value below
/// ~√ε·s₁ ≈ 1.5e-8·s₁; delegating below 1e-7·s₁ costs at most ~1e-14·q in
/// objective, far inside every agreement tolerance.
const RANK1_REL_TOL: f64 = 1e-7;

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_REL_TOL: f64 = 1e-15;

/// Thin SVD of A = [a b]: A = U·S·Vᵀ with s₁ ≥ s₂ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    /// First column of U (unit).
    pub u1: RealVec,
    /// Second column of U (unit, orthogonal to u1).
    pub u2: RealVec,
    /// Singular values, descending.
    pub s: [f64; 2],
    /// Right singular vectors as columns: v[0] pairs with s[0].
    pub v: [[f64; 2]; 2],
}

/// Every matrix of the Bartoli–Sturm pipeline, for inspection and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BsIntermediates {
    pub u1: RealVec,
    pub u2: RealVec,
    /// Singular values of A, descending.
    pub s: [f64; 2],
    /// Right singular vectors of A as columns.
    pub v: [[f64; 2]; 2],
    /// Z = S·Vᵀ, row-major.
    pub z: [[f64; 2]; 2],
    /// T rebuilt from Z, row-major: [[z12, z22], [z21, −z11]].
    pub t: [[f64; 2]; 2],
    /// Rotation from the second right singular vector of T, row-major.
    pub vhat: [[f64; 2]; 2],
}

/// Closed-form thin SVD of the n×2 matrix [a b] via the eigen-decomposition
/// of its 2×2 Gram matrix.
///
/// When s₂/s₁ falls below the detectable floor the second singular value is
/// truncated to zero and u2 is completed to an orthonormal basis of the
/// column space; the accuracy of a genuinely tiny nonzero s₂ is limited to
/// ~√ε·‖A‖ by the Gram route itself.
pub fn svd_thin_n2(input: &VecPair) -> Result<ThinSvd> {
    let n = input.dim();
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let (s, v) = closed_svd_into(
        input.a().as_slice(),
        input.b().as_slice(),
        &mut u1,
        &mut u2,
    )?;
    Ok(ThinSvd {
        u1: RealVec::new(u1)?,
        u2: RealVec::new(u2)?,
        s,
        v,
    })
}

/// The full matrix pipeline of the BS method on this input.
pub fn bs_intermediates(input: &VecPair) -> Result<BsIntermediates> {
    let svd = svd_thin_n2(input)?;
    let (s, v) = (svd.s, svd.v);
    let z = [
        [s[0] * v[0][0], s[0] * v[0][1]],
        [s[1] * v[1][0], s[1] * v[1][1]],
    ];
    let t = [[z[0][1], z[1][1]], [z[1][0], -z[0][0]]];
    let hv = t_second_rsv_closed(&t);
    let vhat = [[hv[0], -hv[1]], [hv[1], hv[0]]];
    Ok(BsIntermediates {
        u1: svd.u1,
        u2: svd.u2,
        s,
        v,
        z,
        t,
        vhat,
    })
}

/// Bartoli–Sturm correction with closed-form decompositions.
pub fn correct_bs(input: &VecPair) -> Result<CorrectionResult> {
    correct_bs_impl(input, SvdEngine::ClosedForm, Method::Bs)
}

/// Bartoli–Sturm correction with both SVDs computed iteratively
/// (one-sided Jacobi), mirroring the cost profile of a general-purpose
/// SVD routine.
pub fn correct_bs_iter(input: &VecPair) -> Result<CorrectionResult> {
    correct_bs_impl(input, SvdEngine::Jacobi, Method::BsIter)
}

fn correct_bs_impl(input: &VecPair, engine: SvdEngine, method: Method) -> Result<CorrectionResult> {
    let n = input.dim();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut c1 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    let branch = bs_kernel(
        input.a().as_slice(),
        input.b().as_slice(),
        engine,
        &mut x,
        &mut y,
        &mut c1,
        &mut c2,
    )?;
    let objective = objective_raw(input.a().as_slice(), input.b().as_slice(), &x, &y);
    Ok(CorrectionResult {
        x: RealVec::new(x)?,
        y: RealVec::new(y)?,
        objective,
        lambda: None,
        branch,
        method,
    })
}

/// Scalar closed-form expansion of the BS method for n = 3.
pub fn correct_bs_lsvd(input: &VecPair) -> Result<CorrectionResult> {
    if input.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: input.dim(),
        });
    }
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    let branch = bs_lsvd_kernel(
        input.a().as_slice(),
        input.b().as_slice(),
        &mut x,
        &mut y,
    )?;
    let objective = objective_raw(input.a().as_slice(), input.b().as_slice(), &x, &y);
    Ok(CorrectionResult {
        x: RealVec::from_slice(&x)?,
        y: RealVec::from_slice(&y)?,
        objective,
        lambda: None,
        branch,
        method: Method::BsLsvd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SvdEngine {
    ClosedForm,
    Jacobi,
}

/// Allocation-free BS core. `c1`/`c2` are n-sized scratch for the U columns.
pub(crate) fn bs_kernel(
    a: &[f64],
    b: &[f64],
    engine: SvdEngine,
    x: &mut [f64],
    y: &mut [f64],
    c1: &mut [f64],
    c2: &mut [f64],
) -> Result<Branch> {
    let (s, v) = match engine {
        SvdEngine::ClosedForm => closed_svd_into(a, b, c1, c2)?,
        SvdEngine::Jacobi => jacobi_svd_into(a, b, c1, c2)?,
    };
    if s[1] <= RANK1_REL_TOL * s[0] {
        return Ok(rank1_fallback(a, b, x, y));
    }
    let z = [
        [s[0] * v[0][0], s[0] * v[0][1]],
        [s[1] * v[1][0], s[1] * v[1][1]],
    ];
    let t = [[z[0][1], z[1][1]], [z[1][0], -z[0][0]]];
    let hv = match engine {
        SvdEngine::ClosedForm => t_second_rsv_closed(&t),
        SvdEngine::Jacobi => t_second_rsv_jacobi(&t),
    };
    // R = U·V̂·diag(diag(V̂ᵀ·Z)); column 1 is x, column 2 is y.
    let d1 = hv[0] * z[0][0] + hv[1] * z[1][0];
    let d2 = -hv[1] * z[0][1] + hv[0] * z[1][1];
    for i in 0..a.len() {
        x[i] = (hv[0] * c1[i] + hv[1] * c2[i]) * d1;
        y[i] = (-hv[1] * c1[i] + hv[0] * c2[i]) * d2;
    }
    Ok(Branch::Generic)
}

/// Transliterated scalar BS-LSVD core (n = 3).
pub(crate) fn bs_lsvd_kernel(a: &[f64], b: &[f64], x: &mut [f64], y: &mut [f64]) -> Result<Branch> {
    // A = [a b] entries: column 1 is a, column 2 is b.
    let (a11, a21, a31) = (a[0], a[1], a[2]);
    let (a12, a22, a32) = (b[0], b[1], b[2]);

    // Gram matrix of A and its eigenvalues = squared singular values.
    let g11 = a11 * a11 + a21 * a21 + a31 * a31;
    let g12 = a11 * a12 + a21 * a22 + a31 * a32;
    let g22 = a12 * a12 + a22 * a22 + a32 * a32;
    let tr = g11 + g22;
    if tr == 0.0 {
        return Err(Error::DegenerateInput("input matrix [a b] is zero"));
    }
    let dg = ((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12).sqrt();
    let e1 = 0.5 * (tr + dg);
    let e2 = (0.5 * (tr - dg)).max(0.0);
    let s1 = e1.sqrt();
    let s2 = e2.sqrt();
    if s2 <= RANK1_REL_TOL * s1 {
        return Ok(rank1_fallback(a, b, x, y));
    }

    // First right singular vector; the second is its 90° rotation. The
    // original single-form expression v11 = −g12/(g11 − s1²) breaks when
    // g12 = 0, so the eigenvector form is selected by magnitude.
    let [v11, v21] = sym_eigvec2(g11, g12, g22, e1);
    let [v12, v22] = pin_sign2([v21, -v11]);

    // U columns via uᵢⱼ = (A·vⱼ)/sⱼ.
    let u11 = (a12 * v21 + a11 * v11) / s1;
    let u12 = (a12 * v22 + a11 * v12) / s2;
    let u21 = (a21 * v11 + a22 * v21) / s1;
    let u22 = (a21 * v12 + a22 * v22) / s2;
    let u31 = (a31 * v11 + a32 * v21) / s1;
    let u32 = (a31 * v12 + a32 * v22) / s2;

    // Z = S·Vᵀ and the corrected T.
    let z11 = s1 * v11;
    let z12 = s1 * v21;
    let z21 = s2 * v12;
    let z22 = s2 * v22;
    let (t11, t12, t21, t22) = (z12, z22, z21, -z11);

    // Smaller-singular-value right singular vector of T, from the
    // eigenproblem of TᵀT. st1 carries the − branch so st1 ≤ st2 always;
    // a tie (TᵀT ∝ I) keeps the st1 branch.
    let m11 = t11 * t11 + t21 * t21;
    let m12 = t11 * t12 + t21 * t22;
    let m22 = t12 * t12 + t22 * t22;
    let dt = ((m11 - m22) * (m11 - m22) + 4.0 * m12 * m12).sqrt();
    let st1 = (0.5 * (m11 + m22 - dt)).max(0.0);
    let st2 = 0.5 * (m11 + m22 + dt);
    let st_small = if st1 < st2 { st1 } else { st1 };
    let [hv1, hv2] = sym_eigvec2(m11, m12, m22, st_small);

    let (h11, h12, h21, h22) = (hv1, -hv2, hv2, hv1);
    let xf = h11 * s1 * v11 + h21 * s2 * v12;
    let yf = h12 * s1 * v21 + h22 * s2 * v22;
    x[0] = (u11 * h11 + u12 * h21) * xf;
    y[0] = (u11 * h12 + u12 * h22) * yf;
    x[1] = (u21 * h11 + u22 * h21) * xf;
    y[1] = (u21 * h12 + u22 * h22) * yf;
    x[2] = (u31 * h11 + u32 * h21) * xf;
    y[2] = (u31 * h12 + u32 * h22) * yf;
    Ok(Branch::Generic)
}

/// Limit answer when [a b] is (numerically) rank one: keep the longer
/// vector, zero the other — the value the closed form converges to.
fn rank1_fallback(a: &[f64], b: &[f64], x: &mut [f64], y: &mut [f64]) -> Branch {
    let na2 = norm_sq(a);
    let nb2 = norm_sq(b);
    if na2 >= nb2 {
        x.copy_from_slice(a);
        y.fill(0.0);
    } else {
        x.fill(0.0);
        y.copy_from_slice(b);
    }
    let thr = DEFAULT_DEGENERACY_TOL * na2.max(nb2).sqrt();
    let dm: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    let dp: f64 = a.iter().zip(b).map(|(p, q)| (p + q) * (p + q)).sum();
    if dm.sqrt() <= thr {
        Branch::EqualVectors
    } else if dp.sqrt() <= thr {
        Branch::OppositeVectors
    } else {
        Branch::Generic
    }
}

/// Closed-form thin SVD writing the U columns into `u1`/`u2`.
fn closed_svd_into(
    a: &[f64],
    b: &[f64],
    u1: &mut [f64],
    u2: &mut [f64],
) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let g11 = norm_sq(a);
    let g12 = dot(a, b);
    let g22 = norm_sq(b);
    let tr = g11 + g22;
    if tr == 0.0 {
        return Err(Error::DegenerateInput("input matrix [a b] is zero"));
    }
    let d = ((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12).sqrt();
    let e1 = 0.5 * (tr + d);
    let e2 = (0.5 * (tr - d)).max(0.0);
    let s1 = e1.sqrt();
    let mut s2 = e2.sqrt();

    let v1 = sym_eigvec2(g11, g12, g22, e1);
    let v2 = pin_sign2([v1[1], -v1[0]]);

    for (u, (ai, bi)) in u1.iter_mut().zip(a.iter().zip(b)) {
        *u = (v1[0] * ai + v1[1] * bi) / s1;
    }
    normalize(u1);
    if s2 > RANK1_REL_TOL * s1 {
        for (u, (ai, bi)) in u2.iter_mut().zip(a.iter().zip(b)) {
            *u = (v2[0] * ai + v2[1] * bi) / s2;
        }
        // One Gram–Schmidt pass keeps U orthonormal when s2 ≪ s1.
        let c = dot(u1, u2);
        for (u2i, u1i) in u2.iter_mut().zip(u1.iter()) {
            *u2i -= c * u1i;
        }
        normalize(u2);
    } else {
        s2 = 0.0;
        complete_orthonormal(u1, u2);
    }
    Ok(([s1, s2], [v1, v2]))
}

/// One-sided Jacobi thin SVD: rotate the two columns until orthogonal,
/// then read off norms and directions.
fn jacobi_svd_into(
    a: &[f64],
    b: &[f64],
    c1: &mut [f64],
    c2: &mut [f64],
) -> Result<([f64; 2], [[f64; 2]; 2])> {
    c1.copy_from_slice(a);
    c2.copy_from_slice(b);
    let mut v1 = [1.0, 0.0];
    let mut v2 = [0.0, 1.0];
    if norm_sq(c1) + norm_sq(c2) == 0.0 {
        return Err(Error::DegenerateInput("input matrix [a b] is zero"));
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let gpp = norm_sq(c1);
        let gqq = norm_sq(c2);
        let gpq = dot(c1, c2);
        if gpq.abs() <= JACOBI_REL_TOL * (gpp * gqq).sqrt() {
            break;
        }
        let tau = (gqq - gpp) / (2.0 * gpq);
        let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = c * t;
        for (p, q) in c1.iter_mut().zip(c2.iter_mut()) {
            let (pi, qi) = (*p, *q);
            *p = c * pi - s * qi;
            *q = s * pi + c * qi;
        }
        for (p, q) in v1.iter_mut().zip(v2.iter_mut()) {
            let (pi, qi) = (*p, *q);
            *p = c * pi - s * qi;
            *q = s * pi + c * qi;
        }
    }
    let mut s1 = norm_sq(c1).sqrt();
    let mut s2 = norm_sq(c2).sqrt();
    if s1 < s2 {
        std::mem::swap(&mut s1, &mut s2);
        c1.swap_with_slice(c2);
        std::mem::swap(&mut v1, &mut v2);
    }
    scale(c1, 1.0 / s1);
    if s2 > RANK1_REL_TOL * s1 {
        scale(c2, 1.0 / s2);
        let c = dot(c1, c2);
        for (u2i, u1i) in c2.iter_mut().zip(c1.iter()) {
            *u2i -= c * u1i;
        }
        normalize(c2);
    } else {
        s2 = 0.0;
        complete_orthonormal(c1, c2);
    }
    // Pin the right-singular-vector signs, flipping the paired U column.
    if needs_flip(&v1) {
        v1 = [-v1[0], -v1[1]];
        negate(c1);
    }
    if needs_flip(&v2) {
        v2 = [-v2[0], -v2[1]];
        negate(c2);
    }
    Ok(([s1, s2], [v1, v2]))
}

/// Second (smaller-σ) right singular vector of a 2×2 matrix via the
/// eigenproblem of TᵀT.
fn t_second_rsv_closed(t: &[[f64; 2]; 2]) -> [f64; 2] {
    let m11 = t[0][0] * t[0][0] + t[1][0] * t[1][0];
    let m12 = t[0][0] * t[0][1] + t[1][0] * t[1][1];
    let m22 = t[0][1] * t[0][1] + t[1][1] * t[1][1];
    let d = ((m11 - m22) * (m11 - m22) + 4.0 * m12 * m12).sqrt();
    let e2 = (0.5 * (m11 + m22 - d)).max(0.0);
    sym_eigvec2(m11, m12, m22, e2)
}

/// Second right singular vector of a 2×2 matrix via one-sided Jacobi.
fn t_second_rsv_jacobi(t: &[[f64; 2]; 2]) -> [f64; 2] {
    let mut c1 = [t[0][0], t[1][0]];
    let mut c2 = [t[0][1], t[1][1]];
    if let Ok((_, v)) = jacobi_svd_into(
        &[t[0][0], t[1][0]],
        &[t[0][1], t[1][1]],
        &mut c1,
        &mut c2,
    ) {
        v[1]
    } else {
        // T = 0 only when Z = 0, excluded by the rank checks upstream.
        [0.0, 1.0]
    }
}

/// Unit eigenvector of the symmetric matrix [[m11, m12], [m12, m22]] for
/// the eigenvalue `eig`, taken from whichever algebraic form has the larger
/// magnitude, with the first nonzero entry made nonnegative.
fn sym_eigvec2(m11: f64, m12: f64, m22: f64, eig: f64) -> [f64; 2] {
    let fa = [m12, eig - m11];
    let fb = [eig - m22, m12];
    let na = fa[0] * fa[0] + fa[1] * fa[1];
    let nb = fb[0] * fb[0] + fb[1] * fb[1];
    let mut v = if na >= nb { fa } else { fb };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n == 0.0 {
        // The matrix is a multiple of the identity; any direction works.
        return [1.0, 0.0];
    }
    v = [v[0] / n, v[1] / n];
    pin_sign2(v)
}

fn pin_sign2(v: [f64; 2]) -> [f64; 2] {
    if needs_flip(&v) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

fn needs_flip(v: &[f64]) -> bool {
    match v.iter().find(|c| **c != 0.0) {
        Some(first) => *first < 0.0,
        None => false,
    }
}

fn normalize(v: &mut [f64]) {
    let n = norm_sq(v).sqrt();
    if n > 0.0 {
        scale(v, 1.0 / n);
    }
}

fn scale(v: &mut [f64], c: f64) {
    for vi in v {
        *vi *= c;
    }
}

fn negate(v: &mut [f64]) {
    for vi in v {
        *vi = -*vi;
    }
}

/// Write into `out` a unit vector orthogonal to the unit vector `u`.
fn complete_orthonormal(u: &[f64], out: &mut [f64]) {
    // Start from the axis where u is smallest, then Gram–Schmidt.
    let mut k = 0;
    for (i, ui) in u.iter().enumerate() {
        if ui.abs() < u[k].abs() {
            k = i;
        }
    }
    out.fill(0.0);
    out[k] = 1.0;
    let c = u[k];
    for (oi, ui) in out.iter_mut().zip(u.iter()) {
        *oi -= c * ui;
    }
    normalize(out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmpc::correct_lmpc;
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;

    fn pair(a: &[f64], b: &[f64]) -> VecPair {
        VecPair::from_slices(a, b).unwrap()
    }

    fn random_pair(rng: &mut SplitMix64, n: usize) -> VecPair {
        let a: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        VecPair::from_slices(&a, &b).unwrap()
    }

    #[test]
    fn svd_orthonormal_columns_input() {
        let svd = svd_thin_n2(&pair(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0])).unwrap();
        assert_relative_eq!(svd.s[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(svd.s[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn svd_rank_one() {
        let svd = svd_thin_n2(&pair(&[2.0, 0.0, 0.0], &[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(svd.s, [2.0, 0.0]);
        // u2 is an orthonormal completion.
        assert!(dot(&svd.u1, &svd.u2).abs() < 1e-14);
        assert_relative_eq!(svd.u2.norm(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn svd_known_gram_eigenvalues() {
        // A = [[1,1],[0,1],[0,0]]: Gram [[1,1],[1,2]], eigenvalues (3±√5)/2.
        let svd = svd_thin_n2(&pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0])).unwrap();
        assert_relative_eq!(svd.s[0], 1.618033988749895, max_relative = 1e-14);
        assert_relative_eq!(svd.s[1], 0.6180339887498948, max_relative = 1e-14);
        // s1²s2² = det = 1, s1²+s2² = trace = 3.
        let (e1, e2) = (svd.s[0] * svd.s[0], svd.s[1] * svd.s[1]);
        assert_relative_eq!(e1 * e2, 1.0, max_relative = 1e-12);
        assert_relative_eq!(e1 + e2, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn svd_reconstruction_and_orthonormality() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..500 {
            let input = random_pair(&mut rng, 3);
            let svd = svd_thin_n2(&input).unwrap();
            assert!(dot(&svd.u1, &svd.u2).abs() < 1e-10);
            assert_relative_eq!(svd.u1.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(svd.u2.norm(), 1.0, epsilon = 1e-12);
            // Frobenius preservation: s1² + s2² = ‖A‖².
            let fro = input.a().norm_sq() + input.b().norm_sq();
            assert_relative_eq!(
                svd.s[0] * svd.s[0] + svd.s[1] * svd.s[1],
                fro,
                max_relative = 1e-12
            );
            // Reconstruction, column by column.
            let norm_a = fro.sqrt();
            for i in 0..3 {
                let a_rec = svd.u1[i] * svd.s[0] * svd.v[0][0] + svd.u2[i] * svd.s[1] * svd.v[1][0];
                let b_rec = svd.u1[i] * svd.s[0] * svd.v[0][1] + svd.u2[i] * svd.s[1] * svd.v[1][1];
                assert!((a_rec - input.a()[i]).abs() <= 1e-12 * norm_a + 1e-14);
                assert!((b_rec - input.b()[i]).abs() <= 1e-12 * norm_a + 1e-14);
            }
        }
    }

    #[test]
    fn svd_rejects_zero_matrix() {
        assert!(matches!(
            svd_thin_n2(&pair(&[0.0, 0.0], &[0.0, 0.0])),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn t_matrix_layout_matches_correction() {
        let im = bs_intermediates(&pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(im.t[0][0], im.z[0][1]);
        assert_eq!(im.t[0][1], im.z[1][1]);
        assert_eq!(im.t[1][0], im.z[1][0]);
        assert_eq!(im.t[1][1], -im.z[0][0]);
        // V̂ is a rotation built from one unit vector.
        let det = im.vhat[0][0] * im.vhat[1][1] - im.vhat[0][1] * im.vhat[1][0];
        assert_relative_eq!(det, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn bs_orthogonal_input_is_identity() {
        let input = pair(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        let r = correct_bs(&input).unwrap();
        assert!(r.objective < 1e-28);
        for i in 0..3 {
            assert_relative_eq!(r.x[i], input.a()[i], epsilon = 1e-14);
            assert_relative_eq!(r.y[i], input.b()[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn bs_worked_example_matches_lmpc() {
        let input = pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]);
        let r = correct_bs(&input).unwrap();
        assert_relative_eq!(r.objective, 0.3819660112501051, max_relative = 1e-12);
        let l = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((r.objective - l.objective).abs() < 1e-8);
        for i in 0..3 {
            assert!((r.x[i] - l.x[i]).abs() < 1e-10);
            assert!((r.y[i] - l.y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn bs_seeded_cross_check() {
        let input = pair(&[0.5, 0.2, -0.3], &[0.1, -0.7, 0.4]);
        let r = correct_bs(&input).unwrap();
        let l = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((r.objective - l.objective).abs() < 1e-8);
    }

    #[test]
    fn bs_random_sweep_agrees_with_lmpc() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..2000 {
            let input = random_pair(&mut rng, 3);
            let r = correct_bs(&input).unwrap();
            let l = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
            let q = input.a().norm_sq() + input.b().norm_sq();
            assert!(
                (r.objective - l.objective).abs() <= 1e-8 * (1.0 + q),
                "objective mismatch {} vs {}",
                r.objective,
                l.objective
            );
            let klein = r.klein_residual().abs();
            assert!(klein <= 1e-9 * (1.0 + r.x.norm() * r.y.norm()));
            let scale = 1.0 + input.a().norm() + input.b().norm();
            for i in 0..3 {
                assert!((r.x[i] - l.x[i]).abs() <= 1e-8 * scale);
                assert!((r.y[i] - l.y[i]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn bs_iter_matches_bs() {
        let mut rng = SplitMix64::new(55);
        for _ in 0..500 {
            let input = random_pair(&mut rng, 3);
            let r = correct_bs(&input).unwrap();
            let it = correct_bs_iter(&input).unwrap();
            assert!(
                (r.objective - it.objective).abs() <= 1e-10 * (1.0 + r.objective),
                "{} vs {}",
                r.objective,
                it.objective
            );
        }
    }

    #[test]
    fn bs_generic_dimension() {
        let mut rng = SplitMix64::new(77);
        for &n in &[2usize, 4, 8] {
            for _ in 0..200 {
                let input = random_pair(&mut rng, n);
                let r = correct_bs(&input).unwrap();
                let l = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
                let q = input.a().norm_sq() + input.b().norm_sq();
                assert!((r.objective - l.objective).abs() <= 1e-8 * (1.0 + q));
            }
        }
    }

    #[test]
    fn lsvd_examples() {
        let r = correct_bs_lsvd(&pair(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0])).unwrap();
        assert!(r.objective < 1e-28);

        let r = correct_bs_lsvd(&pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0])).unwrap();
        assert_relative_eq!(r.objective, 0.3819660112501051, max_relative = 1e-12);

        let input = pair(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]);
        let r = correct_bs_lsvd(&input).unwrap();
        let l = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((r.objective - l.objective).abs() < 1e-8);
    }

    #[test]
    fn lsvd_agrees_with_bs_randomly() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..2000 {
            let input = random_pair(&mut rng, 3);
            let r = correct_bs(&input).unwrap();
            let v = correct_bs_lsvd(&input).unwrap();
            let q = input.a().norm_sq() + input.b().norm_sq();
            assert!((r.objective - v.objective).abs() <= 1e-8 * (1.0 + q));
        }
    }

    #[test]
    fn lsvd_requires_dim3() {
        let input = pair(&[1.0, 0.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            correct_bs_lsvd(&input),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank_one_inputs_keep_dominant_vector() {
        // b = 2a: limit answer is (0, b), matching the closed form.
        let input = pair(&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0]);
        for r in [
            correct_bs(&input).unwrap(),
            correct_bs_lsvd(&input).unwrap(),
            correct_bs_iter(&input).unwrap(),
        ] {
            assert_eq!(r.x.as_slice(), &[0.0, 0.0, 0.0]);
            assert_eq!(r.y.as_slice(), input.b().as_slice());
        }
        // a = b: the (a, 0) representative.
        let input = pair(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let r = correct_bs(&input).unwrap();
        assert_eq!(r.branch, Branch::EqualVectors);
        assert_eq!(r.x.as_slice(), input.a().as_slice());
        assert_eq!(r.objective, 3.0);
        // b = 0.
        let input = pair(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]);
        let r = correct_bs(&input).unwrap();
        assert_eq!(r.x.as_slice(), input.a().as_slice());
        assert_eq!(r.y.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_input_errors() {
        let input = pair(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]);
        assert!(matches!(
            correct_bs(&input),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            correct_bs_lsvd(&input),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            correct_bs_iter(&input),
            Err(Error::DegenerateInput(_))
        ));
    }
}
