//! Independent verification machinery.
//!
//! The global-minimum oracle never touches the multiplier algebra: it
//! reparameterizes the feasible set as pairs of orthonormal directions
//! (s, t) and evaluates the objective at the orthogonal projections
//! x = (aᵀs)s, y = (bᵀt)t. Sampling that compact set upper-bounds the true
//! minimum from above, so no correction method may ever land above the
//! sampled best by more than floating-point slack — and a correct global
//! method is never beaten by any sample.
//!
//! Also here: KKT residual evaluation, the candidate ordering check
//! g(λ₂) ≤ g(λ₁) ≤ q, and the Frobenius identity gap
//! ‖UA − B‖ − ‖A − UᵀB‖ that the corrected derivation hinges on.

use crate::error::{Error, Result};
use crate::geometry::{dot, norm_sq, CorrectionResult, RealVec, VecPair};
use crate::lmpc::{g_value, lambda_roots};
use crate::rng::SplitMix64;

/// Redraw budget for the rejection steps of the sampler.
const MAX_DRAW_ATTEMPTS: usize = 100;

/// A pair of unit, mutually orthogonal directions — one point of the
/// feasible set the oracle searches.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalPair {
    s: RealVec,
    t: RealVec,
}

impl OrthonormalPair {
    /// Validate ‖s‖ = ‖t‖ = 1 and sᵀt = 0, each within 1e-12.
    pub fn new(s: RealVec, t: RealVec) -> Result<Self> {
        if s.dim() != t.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                actual: t.dim(),
            });
        }
        if (s.norm() - 1.0).abs() > 1e-12 || (t.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "orthonormal pair: vectors must be unit length".into(),
            ));
        }
        if dot(&s, &t).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "orthonormal pair: vectors must be orthogonal".into(),
            ));
        }
        Ok(Self { s, t })
    }

    pub fn s(&self) -> &RealVec {
        &self.s
    }

    pub fn t(&self) -> &RealVec {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    /// Distance from `a` to the line through the origin with direction s.
    pub fn d1(&self, a: &RealVec) -> Result<f64> {
        line_distance(&self.s, a)
    }

    /// Distance from `b` to the line through the origin with direction t.
    pub fn d2(&self, b: &RealVec) -> Result<f64> {
        line_distance(&self.t, b)
    }
}

fn line_distance(dir: &RealVec, point: &RealVec) -> Result<f64> {
    if dir.dim() != point.dim() {
        return Err(Error::DimensionMismatch {
            expected: dir.dim(),
            actual: point.dim(),
        });
    }
    let c = dot(dir, point);
    let d2: f64 = point
        .iter()
        .zip(dir.iter())
        .map(|(pi, di)| (pi - c * di) * (pi - c * di))
        .sum();
    Ok(d2.max(0.0).sqrt())
}

/// Outcome of a sampled global-minimum search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Smallest projected objective found.
    pub best_objective: f64,
    /// The pair achieving it.
    pub best_pair: OrthonormalPair,
    /// Number of raw samples evaluated (refinement steps not included).
    pub samples: usize,
    /// Objective value of the method under test, as provided by the caller.
    pub method_objective: f64,
    /// method_objective − best_objective. Negative is the expected outcome:
    /// the method beats every sample.
    pub gap: f64,
}

/// Draw a uniformly oriented orthonormal pair by Gram–Schmidt on two
/// standard-normal vectors, redrawing when they come out nearly parallel.
pub fn sample_orthonormal_pair(rng: &mut SplitMix64, dim: usize) -> Result<OrthonormalPair> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!(
            "orthonormal pairs need dim >= 2, got {dim}"
        )));
    }
    let mut s = vec![0.0; dim];
    let mut t = vec![0.0; dim];
    sample_pair_into(rng, &mut s, &mut t)?;
    Ok(OrthonormalPair {
        s: RealVec::new(s)?,
        t: RealVec::new(t)?,
    })
}

fn sample_pair_into(rng: &mut SplitMix64, s: &mut [f64], t: &mut [f64]) -> Result<()> {
    for _ in 0..MAX_DRAW_ATTEMPTS {
        for si in s.iter_mut() {
            *si = rng.normal();
        }
        let ns = norm_sq(s).sqrt();
        if ns < 1e-100 {
            continue;
        }
        for si in s.iter_mut() {
            *si /= ns;
        }
        for ti in t.iter_mut() {
            *ti = rng.normal();
        }
        let ng = norm_sq(t).sqrt();
        let c = dot(s, t);
        for (ti, si) in t.iter_mut().zip(s.iter()) {
            *ti -= c * si;
        }
        let nt = norm_sq(t).sqrt();
        if nt >= 1e-6 * ng {
            for ti in t.iter_mut() {
                *ti /= nt;
            }
            return Ok(());
        }
    }
    Err(Error::Rng("exhausted redraws sampling an orthonormal pair"))
}

/// Objective at the projections x = (aᵀs)s, y = (bᵀt)t.
pub fn projected_objective(input: &VecPair, pair: &OrthonormalPair) -> Result<f64> {
    if pair.dim() != input.dim() {
        return Err(Error::DimensionMismatch {
            expected: input.dim(),
            actual: pair.dim(),
        });
    }
    Ok(projected_objective_raw(
        input.a(),
        input.b(),
        &pair.s,
        &pair.t,
    ))
}

#[inline]
fn projected_objective_raw(a: &[f64], b: &[f64], s: &[f64], t: &[f64]) -> f64 {
    let das = dot(a, s);
    let dbt = dot(b, t);
    let mut f = 0.0;
    for i in 0..a.len() {
        let dx = a[i] - das * s[i];
        let dy = b[i] - dbt * t[i];
        f += dx * dx + dy * dy;
    }
    f
}

/// Brute-force search over `samples` random orthonormal pairs, optionally
/// followed by 1000 accept-if-better perturbation steps with a shrinking
/// step size. `method_objective` is the value to report the gap against.
pub fn global_min_search(
    input: &VecPair,
    samples: usize,
    rng: &mut SplitMix64,
    refine: bool,
    method_objective: f64,
) -> Result<OracleReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let n = input.dim();
    let a = input.a().as_slice();
    let b = input.b().as_slice();
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut best_s = vec![0.0; n];
    let mut best_t = vec![0.0; n];
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        sample_pair_into(rng, &mut s, &mut t)?;
        let f = projected_objective_raw(a, b, &s, &t);
        if f < best {
            best = f;
            best_s.copy_from_slice(&s);
            best_t.copy_from_slice(&t);
        }
    }
    if refine {
        let mut sigma = 0.1;
        for _ in 0..1000 {
            for (si, bi) in s.iter_mut().zip(best_s.iter()) {
                *si = bi + sigma * rng.normal();
            }
            let ns = norm_sq(&s).sqrt();
            if ns < 1e-100 {
                continue;
            }
            for si in s.iter_mut() {
                *si /= ns;
            }
            for (ti, bi) in t.iter_mut().zip(best_t.iter()) {
                *ti = bi + sigma * rng.normal();
            }
            let c = dot(&s, &t);
            for (ti, si) in t.iter_mut().zip(s.iter()) {
                *ti -= c * si;
            }
            let nt = norm_sq(&t).sqrt();
            sigma *= 0.99;
            if nt < 1e-12 {
                continue;
            }
            for ti in t.iter_mut() {
                *ti /= nt;
            }
            let f = projected_objective_raw(a, b, &s, &t);
            if f < best {
                best = f;
                best_s.copy_from_slice(&s);
                best_t.copy_from_slice(&t);
            }
        }
    }
    Ok(OracleReport {
        best_objective: best,
        best_pair: OrthonormalPair {
            s: RealVec::new(best_s)?,
            t: RealVec::new(best_t)?,
        },
        samples,
        method_objective,
        gap: method_objective - best,
    })
}

/// First-order optimality residuals of a correction that carries a
/// multiplier: r1 = ‖a − x − λy‖, r2 = ‖b − y − λx‖, r3 = |xᵀy|.
pub fn kkt_residuals(input: &VecPair, result: &CorrectionResult) -> Result<(f64, f64, f64)> {
    let lambda = result
        .lambda
        .ok_or(Error::NotApplicable("result carries no multiplier"))?;
    if result.x.dim() != input.dim() || result.y.dim() != input.dim() {
        return Err(Error::DimensionMismatch {
            expected: input.dim(),
            actual: result.x.dim(),
        });
    }
    let (a, b) = (input.a().as_slice(), input.b().as_slice());
    let (x, y) = (result.x.as_slice(), result.y.as_slice());
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for i in 0..a.len() {
        let e1 = a[i] - x[i] - lambda * y[i];
        let e2 = b[i] - y[i] - lambda * x[i];
        r1 += e1 * e1;
        r2 += e2 * e2;
    }
    Ok((r1.sqrt(), r2.sqrt(), dot(x, y).abs()))
}

/// Result of the candidate ordering check g(λ₂) ≤ g(λ₁) ≤ q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingCheck {
    pub g2: f64,
    pub g1: f64,
    pub q: f64,
    pub ok: bool,
}

/// Evaluate the objective at both multiplier candidates and verify the
/// ordering that selects λ₂, with 1e-12·q of slack.
pub fn check_candidate_ordering(input: &VecPair) -> Result<OrderingCheck> {
    let a = input.a().as_slice();
    let b = input.b().as_slice();
    let p = dot(a, b);
    if p == 0.0 {
        return Err(Error::NotApplicable(
            "p = 0 leaves a single candidate; nothing to order",
        ));
    }
    let q = norm_sq(a) + norm_sq(b);
    let (lambda1, lambda2) = lambda_roots(p, q)?;
    let lambda1 = lambda1.expect("p != 0 guarantees the larger root");
    let g1 = g_value(lambda1, p, q)?;
    let g2 = g_value(lambda2, p, q)?;
    let slack = 1e-12 * q;
    Ok(OrderingCheck {
        g2,
        g1,
        q,
        ok: g2 <= g1 + slack && g1 <= q + slack,
    })
}

/// A dense column-major matrix, just big enough for the identity-gap check.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    /// Build from column-major data; all entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Stack column slices into a matrix.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidInput("ragged columns".into()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            data.extend_from_slice(c);
        }
        Self::new(rows, cols, data)
    }

    pub fn identity(k: usize) -> Result<Self> {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self::new(k, k, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sq(&self.data).sqrt()
    }

    fn mul(&self, rhs: &ColMatrix) -> ColMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut data = vec![0.0; self.rows * rhs.cols];
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let r = rhs.get(k, j);
                for i in 0..self.rows {
                    data[j * self.rows + i] += self.get(i, k) * r;
                }
            }
        }
        ColMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }

    fn transpose(&self) -> ColMatrix {
        let mut data = vec![0.0; self.rows * self.cols];
        for j in 0..self.cols {
            for i in 0..self.rows {
                data[i * self.cols + j] = self.get(i, j);
            }
        }
        ColMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn sub(&self, rhs: &ColMatrix) -> ColMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ColMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }
}

/// ‖U·A − B‖ − ‖A − UᵀB‖ for U with orthonormal columns (n×k, n > k),
/// A k×k, B n×k.
///
/// The gap is zero exactly when B lies in the column space of U
/// (B = U·F); otherwise the left norm also carries the out-of-column-space
/// energy of B and the gap is positive.
pub fn frobenius_identity_gap(u: &ColMatrix, a: &ColMatrix, b: &ColMatrix) -> Result<f64> {
    let (n, k) = (u.rows(), u.cols());
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "U must be tall: got {n}x{k}"
        )));
    }
    if a.rows() != k || a.cols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: a.rows(),
        });
    }
    if b.rows() != n || b.cols() != k {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.rows(),
        });
    }
    let ut = u.transpose();
    let gram = ut.mul(u);
    let eye = ColMatrix::identity(k)?;
    let ortho_err = gram.sub(&eye).frobenius_norm();
    if ortho_err > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "U does not have orthonormal columns: ‖UᵀU − I‖ = {ortho_err:e}"
        )));
    }
    let left = u.mul(a).sub(b).frobenius_norm();
    let right = a.sub(&ut.mul(b)).frobenius_norm();
    Ok(left - right)
}
