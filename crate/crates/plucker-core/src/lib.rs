//! Plücker correction: projection of unconstrained vector pairs onto the
//! Klein quadric xᵀy = 0.
//!
//! The primary solver is a closed-form Lagrange-multiplier formula that
//! needs one square root and no matrix decompositions, works in any
//! dimension n ≥ 2, and always returns the global minimizer of
//! ‖a − x‖² + ‖b − y‖². Two SVD-based reference methods (the Bartoli–Sturm
//! projection and its fully scalar closed-form variant) are included for
//! cross-validation and speed comparison, together with a brute-force
//! sampled optimality oracle and a batch timing harness.
//!
//! ```
//! use plucker_core::{correct_lmpc, VecPair, DEFAULT_DEGENERACY_TOL};
//!
//! let input = VecPair::from_slices(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]).unwrap();
//! let r = correct_lmpc(&input, DEFAULT_DEGENERACY_TOL).unwrap();
//! assert!(r.klein_residual().abs() < 1e-12);
//! assert!((r.objective - 0.3819660112501051).abs() < 1e-12);
//! ```

pub mod bench;
pub mod bs;
pub mod error;
pub mod geometry;
pub mod lmpc;
pub mod oracle;
pub mod rng;

pub use bench::{
    emit_report, parse_report_csv, parse_report_json, run_benchmark, BenchConfig,
    BenchEnvironment, BenchReport, InputDistribution, MethodTiming, ReportFormat, SpeedupRatio,
};
pub use bs::{correct_bs, correct_bs_iter, correct_bs_lsvd, svd_thin_n2, BsIntermediates, ThinSvd};
pub use error::{Error, Result};
pub use geometry::{
    klein_residual, objective, Branch, CorrectionResult, Method, PluckerLine, RealVec, VecPair,
    KLEIN_TOL,
};
pub use lmpc::{
    correct_lmpc, g_value, lambda_roots, LmpcIntermediates, DEFAULT_DEGENERACY_TOL,
};
pub use oracle::{
    check_candidate_ordering, frobenius_identity_gap, global_min_search, kkt_residuals,
    projected_objective, sample_orthonormal_pair, ColMatrix, OracleReport, OrderingCheck,
    OrthonormalPair,
};
pub use rng::SplitMix64;

/// Run the correction with the given method.
///
/// `degeneracy_tol` applies to the LMPC branches; the BS variants carry
/// their own fixed rank thresholds. BS-LSVD requires dimension 3.
pub fn correct(input: &VecPair, method: Method, degeneracy_tol: f64) -> Result<CorrectionResult> {
    match method {
        Method::Lmpc => correct_lmpc(input, degeneracy_tol),
        Method::Bs => correct_bs(input),
        Method::BsLsvd => correct_bs_lsvd(input),
        Method::BsIter => correct_bs_iter(input),
    }
}
