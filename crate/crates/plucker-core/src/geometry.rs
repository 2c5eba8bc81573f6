//! Shared vocabulary: validated real vectors, input pairs, Plücker lines,
//! the Klein residual xᵀy, and the correction objective
//! f(x, y) = ‖a − x‖² + ‖b − y‖².
//!
//! All types are immutable after construction and all operations are pure,
//! so everything here is safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for the Klein quadric constraint check,
/// normalized by 1 + ‖u‖‖v‖.
pub const KLEIN_TOL: f64 = 1e-9;

/// A finite real vector of dimension ≥ 2.
///
/// Construction is the validation boundary: NaN and infinity are rejected
/// here and never propagate into the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVec {
    data: Vec<f64>,
}

impl RealVec {
    /// Build a vector, rejecting non-finite components and dim < 2.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "vector dimension must be >= 2, got {}",
                components.len()
            )));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite component {bad} in vector"
            )));
        }
        Ok(Self { data: components })
    }

    /// Copy from a slice.
    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    /// The zero vector of the given dimension.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean norm ‖v‖.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared Euclidean norm ‖v‖² = vᵀv.
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.data)
    }
}

impl std::ops::Deref for RealVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<usize> for RealVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// The unconstrained input (a, b): an ordered pair of equal-dimension vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VecPair {
    a: RealVec,
    b: RealVec,
}

impl VecPair {
    pub fn new(a: RealVec, b: RealVec) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                actual: b.dim(),
            });
        }
        Ok(Self { a, b })
    }

    /// Build directly from component slices.
    pub fn from_slices(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(RealVec::from_slice(a)?, RealVec::from_slice(b)?)
    }

    pub fn a(&self) -> &RealVec {
        &self.a
    }

    pub fn b(&self) -> &RealVec {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// A 3D line in Plücker coordinates: direction u and moment v with
/// |uᵀv| ≤ tolerance · (1 + ‖u‖‖v‖).
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerLine {
    direction: RealVec,
    moment: RealVec,
    tolerance: f64,
}

impl PluckerLine {
    /// Validate the Klein constraint at the default tolerance [`KLEIN_TOL`].
    pub fn new(direction: RealVec, moment: RealVec) -> Result<Self> {
        Self::with_tolerance(direction, moment, KLEIN_TOL)
    }

    /// Validate the Klein constraint at a caller-chosen relative tolerance.
    pub fn with_tolerance(direction: RealVec, moment: RealVec, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be nonnegative, got {tolerance}"
            )));
        }
        if direction.dim() != 3 || moment.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                actual: if direction.dim() != 3 {
                    direction.dim()
                } else {
                    moment.dim()
                },
            });
        }
        let residual = dot(&direction, &moment).abs();
        let bound = tolerance * (1.0 + direction.norm() * moment.norm());
        if residual > bound {
            return Err(Error::InvalidInput(format!(
                "Klein constraint violated: |u'v| = {residual:e} exceeds {bound:e}"
            )));
        }
        Ok(Self {
            direction,
            moment,
            tolerance,
        })
    }

    pub fn direction(&self) -> &RealVec {
        &self.direction
    }

    pub fn moment(&self) -> &RealVec {
        &self.moment
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Which case of the correction a solver took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// The closed-form solution with a nontrivial multiplier.
    Generic,
    /// aᵀb == 0 exactly: (a, b) already minimizes.
    OrthogonalInput,
    /// a == b (within the degeneracy tolerance): the representative (a, 0).
    EqualVectors,
    /// a == −b: the representative (a, 0).
    OppositeVectors,
    /// a == b == 0: the zero pair.
    BothZero,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::Generic => "generic",
            Branch::OrthogonalInput => "orthogonal-input",
            Branch::EqualVectors => "equal-vectors",
            Branch::OppositeVectors => "opposite-vectors",
            Branch::BothZero => "both-zero",
        };
        f.write_str(s)
    }
}

/// Which algorithm produced a correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Closed-form Lagrange-multiplier correction.
    Lmpc,
    /// Bartoli–Sturm projection with closed-form thin SVD.
    Bs,
    /// Bartoli–Sturm with every decomposition expanded in scalar closed form.
    BsLsvd,
    /// Bartoli–Sturm backed by an iterative one-sided Jacobi SVD.
    BsIter,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lmpc, Method::Bs, Method::BsLsvd, Method::BsIter];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Lmpc => "lmpc",
            Method::Bs => "bs",
            Method::BsLsvd => "bs-lsvd",
            Method::BsIter => "bs-iter",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmpc" => Ok(Method::Lmpc),
            "bs" => Ok(Method::Bs),
            "bs-lsvd" | "bs_lsvd" | "bslsvd" => Ok(Method::BsLsvd),
            "bs-iter" | "bs_iter" | "bsiter" => Ok(Method::BsIter),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// A corrected pair (x, y) on the Klein quadric, with the recomputed
/// objective value and the branch/method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub x: RealVec,
    pub y: RealVec,
    /// ‖a − x‖² + ‖b − y‖², recomputed from the stored output.
    pub objective: f64,
    /// The Lagrange multiplier, when the branch defines one.
    pub lambda: Option<f64>,
    pub branch: Branch,
    pub method: Method,
}

impl CorrectionResult {
    /// Residual xᵀy of the corrected pair.
    pub fn klein_residual(&self) -> f64 {
        dot(&self.x, &self.y)
    }
}

/// The Klein quadric residual xᵀy, the plain sum of componentwise products.
pub fn klein_residual(x: &RealVec, y: &RealVec) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(dot(x, y))
}

/// The correction objective f(x, y) = ‖a − x‖² + ‖b − y‖².
pub fn objective(input: &VecPair, x: &RealVec, y: &RealVec) -> Result<f64> {
    if x.dim() != input.dim() {
        return Err(Error::DimensionMismatch {
            expected: input.dim(),
            actual: x.dim(),
        });
    }
    if y.dim() != input.dim() {
        return Err(Error::DimensionMismatch {
            expected: input.dim(),
            actual: y.dim(),
        });
    }
    Ok(objective_raw(input.a(), input.b(), x, y))
}

// ── unchecked slice kernels shared by the solvers ──────────────────────────

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(xi, yi)| xi * yi).sum()
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|xi| xi * xi).sum()
}

#[inline]
pub(crate) fn objective_raw(a: &[f64], b: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let fa: f64 = a.iter().zip(x).map(|(ai, xi)| (ai - xi) * (ai - xi)).sum();
    let fb: f64 = b.iter().zip(y).map(|(bi, yi)| (bi - yi) * (bi - yi)).sum();
    fa + fb
}
