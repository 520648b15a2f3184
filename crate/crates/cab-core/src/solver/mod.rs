//! Linear-programming l1 decoders.
//!
//! * [`solve_extended_l1`]: `min |x|_1 + |e|_1  s.t.  A x + e = y`, the
//!   extended program. `x` is not sign-constrained; nonnegativity of the
//!   true signal is a model assumption, not a solver constraint.
//! * [`solve_basis_pursuit`]: `min |e|_1  s.t.  B e = c`, shared by the
//!   orthogonal-complement baseline and exact certificate checks.
//! * [`judge_success`]: the experiment success rule
//!   `max(|x_hat - x0|_inf, |e_hat - e0|_inf) < threshold`.

pub mod ipm;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::numerics::{least_squares_min_norm, DenseMatrix, DenseVector};
use ipm::{CabOperator, LpOptions, LpStatus, SplitOperator};

/// Decoder options.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative duality-gap (and residual) tolerance of the interior-point
    /// method.
    pub primal_dual_tolerance: f64,
    pub max_iterations: usize,
    /// Success threshold for [`judge_success`].
    pub success_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            primal_dual_tolerance: 1e-8,
            max_iterations: 200,
            success_threshold: 0.01,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.primal_dual_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be > 0".to_string()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidParameter("success threshold must be > 0".to_string()));
        }
        Ok(())
    }

    fn lp(&self) -> LpOptions {
        LpOptions {
            tolerance: self.primal_dual_tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    Infeasible,
    NumericalFailure,
}

impl From<LpStatus> for SolveStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::IterationLimit => SolveStatus::IterationLimit,
            LpStatus::NumericalFailure => SolveStatus::NumericalFailure,
        }
    }
}

/// Decoder output with optimality diagnostics.
#[derive(Debug, Clone)]
pub struct RecoverySolution {
    pub x_hat: DenseVector,
    pub e_hat: DenseVector,
    /// `|x_hat|_1 + |e_hat|_1`.
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Absolute equation residual `|A x_hat + e_hat - y|_2`.
    pub primal_residual: f64,
    /// Relative duality gap at termination.
    pub duality_gap: f64,
}

/// Solves the extended program by variable splitting
/// (`x = x+ - x-`, `e = e+ - e-`, all nonnegative).
pub fn solve_extended_l1(
    a: &DenseMatrix,
    y: &DenseVector,
    opts: &SolveOptions,
) -> Result<RecoverySolution> {
    opts.validate()?;
    if a.rows() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, y has dim {}",
            a.rows(),
            a.cols(),
            y.dim()
        )));
    }
    let (m, n) = (a.rows(), a.cols());
    let op = CabOperator::new(a.inner().clone());
    let cost = DVector::from_element(2 * (n + m), 1.0);
    let lp = ipm::solve_lp(&op, y.inner(), &cost, &opts.lp());

    let x_hat = DenseVector::from_na_unchecked(DVector::from_fn(n, |i, _| lp.z[i] - lp.z[n + i]));
    let e_hat = DenseVector::from_na_unchecked(DVector::from_fn(m, |r, _| {
        lp.z[2 * n + r] - lp.z[2 * n + m + r]
    }));
    let residual = (a.inner() * x_hat.inner() + e_hat.inner() - y.inner()).norm();
    Ok(RecoverySolution {
        objective: x_hat.norm_l1() + e_hat.norm_l1(),
        x_hat,
        e_hat,
        status: lp.status.into(),
        iterations: lp.iterations,
        primal_residual: residual,
        duality_gap: lp.duality_gap,
    })
}

/// Basis pursuit output.
#[derive(Debug, Clone)]
pub struct BasisPursuitSolution {
    pub e: DenseVector,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub duality_gap: f64,
}

/// `min |e|_1 s.t. B e = c` for a wide `B`. Returns
/// [`Error::Infeasible`] when `c` is not in the range of `B` (checked with
/// a least-squares residual before running the LP).
pub fn solve_basis_pursuit(
    b: &DenseMatrix,
    c: &DenseVector,
    opts: &SolveOptions,
) -> Result<BasisPursuitSolution> {
    opts.validate()?;
    if b.rows() > b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "basis pursuit expects rows <= cols, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if b.rows() != c.dim() {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, c has dim {}",
            b.rows(),
            b.cols(),
            c.dim()
        )));
    }
    let ls = least_squares_min_norm(b, c)?;
    let ls_residual = (b.inner() * ls.inner() - c.inner()).norm();
    if ls_residual > 1e-8 * (1.0 + c.norm_l2()) {
        return Err(Error::Infeasible(format!(
            "rhs is outside range(B): least-squares residual {ls_residual:.3e}"
        )));
    }

    let cols = b.cols();
    let op = SplitOperator::new(b.inner().clone());
    let cost = DVector::from_element(2 * cols, 1.0);
    let lp = ipm::solve_lp(&op, c.inner(), &cost, &opts.lp());
    let e = DenseVector::from_na_unchecked(DVector::from_fn(cols, |i, _| {
        lp.z[i] - lp.z[cols + i]
    }));
    let residual = (b.inner() * e.inner() - c.inner()).norm();
    Ok(BasisPursuitSolution {
        objective: e.norm_l1(),
        e,
        status: lp.status.into(),
        iterations: lp.iterations,
        primal_residual: residual,
        duality_gap: lp.duality_gap,
    })
}

/// True iff both deviations from the ground truth are strictly below the
/// threshold in the infinity norm.
pub fn judge_success(sol: &RecoverySolution, inst: &ProblemInstance, threshold: f64) -> bool {
    assert_eq!(sol.x_hat.dim(), inst.x0.dim(), "x dimension");
    assert_eq!(sol.e_hat.dim(), inst.e0.dim(), "e dimension");
    let dx = (sol.x_hat.inner() - inst.x0.inner()).amax();
    let de = (sol.e_hat.inner() - inst.e0.inner()).amax();
    dx < threshold && de < threshold
}
