//! Constructive l1-recoverability certificates.
//!
//! For a sign-and-support pattern `(I, J, sigma)` the instance is
//! recoverable exactly when a separator `q` exists with `G'q = w` and
//! `|q|_inf < 1`, where
//!
//! ```text
//! G = [ A[Jc, I]  A[Jc, Ic] ]       w[i] = sum_{j in J} A(j,i) sigma_j - [i in I]
//!     [    0       I_{n-k1} ]       p = m + n - k1 - k2
//! ```
//!
//! (columns ordered signal-support first; `w` is permuted consistently).
//! This module builds `(G, w)`, computes the minimum-norm initial separator
//! `q0`, runs the soft-threshold refinement iteration until the separator is
//! valid, decides recoverability exactly with an infinity-norm LP, and
//! measures the diagnostic quantities (projection ratio, separator norms,
//! retained mean mass) that govern when the refinement contracts.

use serde::Serialize;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, SupportPattern};
use crate::numerics::{self, DenseMatrix, DenseVector, QrFactors};
use crate::par;
use crate::rng::{domain, sub_seed, CabRng};
use crate::solver::ipm::{self, DenseOperator, LpOptions, LpStatus};
use nalgebra::{DMatrix, DVector};

/// Strict inequalities like `|q|_inf < 1` are decided with this slack.
pub const STRICTNESS_SLACK: f64 = 1e-6;
/// The refinement declares a separator valid slightly inside the exact
/// slack, so a converged certificate is always confirmed by the LP check.
const REFINE_SLACK: f64 = 2e-6;
/// Stall detection: the iteration stops when `|theta q|` shrinks by less
/// than this factor for five consecutive iterations.
const STALL_IMPROVEMENT: f64 = 1e-6;
const STALL_WINDOW: usize = 5;

/// Separator feasibility problem for one pattern.
#[derive(Debug)]
pub struct SeparatorProblem {
    g: DenseMatrix,
    w: DenseVector,
    eps: f64,
    qr: QrFactors,
}

impl SeparatorProblem {
    /// Wraps `(G, w, eps)` directly, checking shape, margin and rank.
    pub fn new(g: DenseMatrix, w: DenseVector, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must be in (0,1), got {eps}")));
        }
        if w.dim() != g.cols() {
            return Err(Error::DimensionMismatch(format!(
                "G is {}x{}, w has dim {}",
                g.rows(),
                g.cols(),
                w.dim()
            )));
        }
        if g.rows() < g.cols() {
            return Err(Error::Degenerate(format!(
                "G is {}x{}: cannot have full column rank",
                g.rows(),
                g.cols()
            )));
        }
        let qr = numerics::qr_factorize(&g)?;
        if !qr.is_full_rank(1e-12) {
            return Err(Error::RankDeficient(format!(
                "G has numerical rank {} < {}",
                qr.rank(1e-12),
                g.cols()
            )));
        }
        Ok(SeparatorProblem { g, w, eps, qr })
    }

    pub fn g(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn w(&self) -> &DenseVector {
        &self.w
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Separator dimension `p = m + n - k1 - k2`.
    pub fn p(&self) -> usize {
        self.g.rows()
    }

    pub fn constraint_residual(&self, q: &DenseVector) -> f64 {
        (self.g.inner().tr_mul(q.inner()) - self.w.inner()).norm()
    }
}

/// Assembles `(G, w)` for a pattern on the bouquet `a`.
pub fn build_separator_problem(
    a: &DenseMatrix,
    pattern: &SupportPattern,
    eps: f64,
) -> Result<SeparatorProblem> {
    let (m, n) = (a.rows(), a.cols());
    let (k1, k2) = (pattern.i.len(), pattern.j.len());
    pattern.validate(m, n, k1, k2)?;
    if k1 + k2 >= m + n {
        return Err(Error::Degenerate(format!(
            "p = m + n - k1 - k2 = {} is not positive",
            (m + n) as isize - (k1 + k2) as isize
        )));
    }
    let p = m + n - k1 - k2;
    if p < n {
        return Err(Error::Degenerate(format!(
            "p = {p} < n = {n}: G cannot have full column rank (k2 > m - k1)"
        )));
    }

    let in_j = {
        let mut mask = vec![false; m];
        for &j in &pattern.j {
            mask[j] = true;
        }
        mask
    };
    let j_complement: Vec<usize> = (0..m).filter(|&r| !in_j[r]).collect();
    let in_i = {
        let mut mask = vec![false; n];
        for &i in &pattern.i {
            mask[i] = true;
        }
        mask
    };
    // columns in signal-support-first order
    let column_order: Vec<usize> = pattern
        .i
        .iter()
        .cloned()
        .chain((0..n).filter(|&c| !in_i[c]))
        .collect();

    let rows_top = j_complement.len();
    let mut g = DMatrix::zeros(p, n);
    for (gc, &col) in column_order.iter().enumerate() {
        for (gr, &row) in j_complement.iter().enumerate() {
            g[(gr, gc)] = a.get(row, col);
        }
    }
    for r in 0..(n - k1) {
        g[(rows_top + r, k1 + r)] = 1.0;
    }

    // w[i] = sum_{j in J} A(j, i) sigma_j - [i in I], in column order
    let w = DVector::from_fn(n, |gc, _| {
        let col = column_order[gc];
        let mut acc = 0.0;
        for (&row, &s) in pattern.j.iter().zip(&pattern.sigma) {
            acc += a.get(row, col) * s as f64;
        }
        if gc < k1 {
            acc -= 1.0;
        }
        acc
    });

    SeparatorProblem::new(DenseMatrix::from_na(g)?, DenseVector::from_na(w)?, eps)
}

/// Minimum l2-norm solution of `G'q = w`, via the QR of `G`:
/// `q0 = Q R^{-T} w`.
pub fn initial_separator(prob: &SeparatorProblem) -> Result<DenseVector> {
    let z = prob.qr.solve_r_transpose(&prob.w)?;
    Ok(DenseVector::from_na_unchecked(
        prob.qr.q().inner() * z.inner(),
    ))
}

/// Soft extraction of the part of `q` protruding above `1 - eps`:
/// zero where `|q_i| <= 1 - eps`, else `sgn(q_i) (|q_i| - 1 + eps)`.
pub fn theta(q: &DenseVector, eps: f64) -> DenseVector {
    let cut = 1.0 - eps;
    DenseVector::from_na_unchecked(DVector::from_fn(q.dim(), |i, _| {
        let v = q.get(i);
        if v.abs() <= cut {
            0.0
        } else {
            v.signum() * (v.abs() - cut)
        }
    }))
}

/// Separator refinement outcome with its iteration trace.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub q: DenseVector,
    pub converged: bool,
    pub iterations: usize,
    /// Entries with `|q_i| > 1 - eps`, per recorded iterate.
    pub violation_counts: Vec<usize>,
    /// `|theta q_k|_2` per recorded iterate.
    pub theta_norms: Vec<f64>,
    pub q_inf_norm: f64,
    /// Worst `|G'q_k - w|_2` across all recorded iterates.
    pub constraint_residual: f64,
}

/// Per-iterate data for plotting refinement traces.
#[derive(Debug, Clone, Serialize)]
pub struct RefineTrace {
    /// Sorted `|q|` profile of each iterate (nonincreasing).
    pub sorted_abs_profiles: Vec<Vec<f64>>,
    pub q_inf_norms: Vec<f64>,
    pub constraint_residuals: Vec<f64>,
}

/// Iterates `q <- q - theta q + proj_{range(G)} theta q` until the separator
/// is valid (`|q|_inf < 1`, with slack), the residual norms stall, or
/// `max_iter` is reached.
pub fn refine_separator(prob: &SeparatorProblem, max_iter: usize) -> Result<Certificate> {
    refine_separator_traced(prob, max_iter, false).map(|(cert, _)| cert)
}

/// [`refine_separator`] variant that also records sorted-profile traces.
pub fn refine_separator_traced(
    prob: &SeparatorProblem,
    max_iter: usize,
    record_profiles: bool,
) -> Result<(Certificate, RefineTrace)> {
    if max_iter < 1 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".to_string()));
    }
    let mut q = initial_separator(prob)?;
    let q_basis = prob.qr.q();

    let mut violation_counts = Vec::new();
    let mut theta_norms: Vec<f64> = Vec::new();
    let mut trace = RefineTrace {
        sorted_abs_profiles: Vec::new(),
        q_inf_norms: Vec::new(),
        constraint_residuals: Vec::new(),
    };
    let mut worst_residual: f64 = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut stall = 0usize;

    for step in 0..=max_iter {
        iterations = step;
        let tq = theta(&q, prob.eps);
        let violations = tq.iter().filter(|&&v| v != 0.0).count();
        let tq_norm = tq.norm_l2();
        let residual = prob.constraint_residual(&q);
        worst_residual = worst_residual.max(residual);
        violation_counts.push(violations);
        theta_norms.push(tq_norm);
        trace.q_inf_norms.push(q.norm_inf());
        trace.constraint_residuals.push(residual);
        if record_profiles {
            let mut profile: Vec<f64> = q.iter().map(|v| v.abs()).collect();
            profile.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            trace.sorted_abs_profiles.push(profile);
        }

        if q.norm_inf() < 1.0 - REFINE_SLACK {
            converged = true;
            break;
        }
        if theta_norms.len() >= 2 {
            let len = theta_norms.len();
            let prev = theta_norms[len - 2];
            if prev > 0.0 && theta_norms[len - 1] > (1.0 - STALL_IMPROVEMENT) * prev {
                stall += 1;
                if stall >= STALL_WINDOW {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if step == max_iter {
            break;
        }
        let projected = numerics::project_onto_range(q_basis, &tq)?;
        q = DenseVector::from_na_unchecked(q.inner() - tq.inner() + projected.inner());
    }

    let certificate = Certificate {
        q_inf_norm: q.norm_inf(),
        q,
        converged,
        iterations,
        violation_counts,
        theta_norms,
        constraint_residual: worst_residual,
    };
    Ok((certificate, trace))
}

/// Exact recoverability verdict from the infinity-norm LP.
#[derive(Debug, Clone)]
pub struct ExactVerdict {
    pub recoverable: bool,
    /// The optimum sits within the strictness slack of 1: reported rather
    /// than silently classified either way.
    pub marginal: bool,
    /// Optimal value of `min |q|_inf s.t. G'q = w`.
    pub min_inf_norm: f64,
    pub q: DenseVector,
}

/// Decides recoverability exactly: solves `min t s.t. G'q = w, -t <= q_i
/// <= t` and compares the optimum against 1 (with the strictness slack).
///
/// Standard form uses `u = t 1 - q >= 0`, `v = t 1 + q >= 0`:
/// `G'(v - u)/2 = w` and `u + v - 2 t 1 = 0`.
pub fn verify_recoverability_exact(prob: &SeparatorProblem) -> Result<ExactVerdict> {
    let p = prob.p();
    let n = prob.g.cols();
    let mut e = DMatrix::zeros(n + p, 2 * p + 1);
    let g = prob.g.inner();
    for col in 0..n {
        for row in 0..p {
            e[(col, row)] = -0.5 * g[(row, col)];
            e[(col, p + row)] = 0.5 * g[(row, col)];
        }
    }
    for row in 0..p {
        e[(n + row, row)] = 1.0;
        e[(n + row, p + row)] = 1.0;
        e[(n + row, 2 * p)] = -2.0;
    }
    let mut b = DVector::zeros(n + p);
    for i in 0..n {
        b[i] = prob.w.get(i);
    }
    let mut cost = DVector::zeros(2 * p + 1);
    cost[2 * p] = 1.0;

    let op = DenseOperator::new(e);
    let lp = ipm::solve_lp(
        &op,
        &b,
        &cost,
        &LpOptions {
            tolerance: 1e-9,
            max_iterations: 200,
        },
    );
    if lp.status == LpStatus::NumericalFailure {
        return Err(Error::Numerical("infinity-norm LP broke down".to_string()));
    }
    let t_star = lp.objective;
    let q = DenseVector::from_na_unchecked(DVector::from_fn(p, |i, _| {
        0.5 * (lp.z[p + i] - lp.z[i])
    }));
    Ok(ExactVerdict {
        recoverable: t_star < 1.0 - STRICTNESS_SLACK,
        marginal: (t_star - 1.0).abs() <= STRICTNESS_SLACK,
        min_inf_norm: t_star,
        q,
    })
}

/// How a projection-ratio estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum XiMethod {
    /// All supports enumerated; the estimate is exact.
    ExhaustiveSmall,
    /// Uniformly sampled supports; the estimate is a lower bound.
    RandomizedSampling,
}

/// Estimate of `xi = sup |proj_{range(G)} s| / |s|` over `k`-sparse `s`.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionRatioEstimate {
    pub c: f64,
    pub k: usize,
    pub xi_hat: f64,
    pub method: XiMethod,
    pub trials: usize,
}

const XI_EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Per-support projection ratio: the top singular value of the rows of the
/// orthonormal range basis restricted to the support. Exact per support.
fn support_ratio(q_basis: &DenseMatrix, support: &[usize]) -> f64 {
    let n = q_basis.cols();
    let k = support.len();
    let mut sub = DMatrix::zeros(k, n);
    for (r, &row) in support.iter().enumerate() {
        for c in 0..n {
            sub[(r, c)] = q_basis.get(row, c);
        }
    }
    let sv = DenseMatrix::from_na_unchecked(sub);
    numerics::operator_norm(&sv).min(1.0)
}

/// Exact projection ratio by enumerating every size-`k` support.
/// Feasible only while `C(p, k)` stays within the enumeration limit.
pub fn projection_ratio_exhaustive(g: &DenseMatrix, c: f64) -> Result<ProjectionRatioEstimate> {
    let (k, qr) = xi_setup(g, c)?;
    let p = g.rows();
    let count = binomial(p, k)
        .filter(|&cnt| cnt <= XI_EXHAUSTIVE_LIMIT)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "C({p},{k}) exceeds the exhaustive enumeration limit"
            ))
        })?;
    let q_basis = qr.q();
    let ratios = par::map_indexed(count as usize, |rank| {
        let support =
            crate::combinatorics::unrank(p, k, rank as u128).expect("rank below binomial count");
        support_ratio(q_basis, &support)
    });
    let xi_hat = ratios.into_iter().fold(0.0_f64, f64::max);
    Ok(ProjectionRatioEstimate {
        c,
        k,
        xi_hat,
        method: XiMethod::ExhaustiveSmall,
        trials: count as usize,
    })
}

/// Lower bound on the projection ratio from uniformly sampled supports.
/// Falls back to exhaustive enumeration when `trials` covers every support.
pub fn projection_ratio_sampled(
    g: &DenseMatrix,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<ProjectionRatioEstimate> {
    let (k, qr) = xi_setup(g, c)?;
    let p = g.rows();
    if let Some(count) = binomial(p, k) {
        if count <= trials as u128 && count <= XI_EXHAUSTIVE_LIMIT {
            return projection_ratio_exhaustive(g, c);
        }
    }
    let q_basis = qr.q();
    let ratios = par::map_indexed(trials, |t| {
        let mut rng = CabRng::new(sub_seed(seed, &[domain::XI_SUPPORT, t as u64]));
        let support = rng.subset(p, k);
        support_ratio(q_basis, &support)
    });
    let xi_hat = ratios.into_iter().fold(0.0_f64, f64::max);
    Ok(ProjectionRatioEstimate {
        c,
        k,
        xi_hat,
        method: XiMethod::RandomizedSampling,
        trials,
    })
}

/// Exhaustive when feasible, sampled otherwise.
pub fn estimate_projection_ratio(
    g: &DenseMatrix,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<ProjectionRatioEstimate> {
    let p = g.rows();
    let k = xi_sparsity(p, c)?;
    match binomial(p, k) {
        Some(count) if count <= XI_EXHAUSTIVE_LIMIT => projection_ratio_exhaustive(g, c),
        _ => projection_ratio_sampled(g, c, trials, seed),
    }
}

fn xi_sparsity(p: usize, c: f64) -> Result<usize> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!("c must be in (0,1), got {c}")));
    }
    Ok(((c * p as f64).floor() as usize).max(1))
}

fn xi_setup(g: &DenseMatrix, c: f64) -> Result<(usize, QrFactors)> {
    let k = xi_sparsity(g.rows(), c)?;
    let qr = numerics::qr_factorize(g)?;
    if !qr.is_full_rank(1e-12) {
        return Err(Error::RankDeficient("G in projection ratio".to_string()));
    }
    Ok((k, qr))
}

/// Outcome of the contraction precondition check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma2Check {
    pub holds: bool,
    /// `|q0|_2 + |theta q0|_2 / (1 - xi)`
    pub lhs: f64,
    /// `(1 - eps) sqrt(c p)`
    pub rhs: f64,
}

/// Checks the sufficient condition for geometric decay of the refinement:
/// `|q0|_2 + |theta q0|_2 / (1 - xi) <= (1 - eps) sqrt(c p)`.
pub fn check_lemma2_conditions(
    q0: &DenseVector,
    xi_hat: f64,
    eps: f64,
    c: f64,
    p: usize,
) -> Result<Lemma2Check> {
    if !(xi_hat < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "xi = {xi_hat} >= 1: the condition is unverifiable"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) || !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter("eps and c must be in (0,1)".to_string()));
    }
    let tq = theta(q0, eps);
    let lhs = q0.norm_l2() + tq.norm_l2() / (1.0 - xi_hat);
    let rhs = (1.0 - eps) * (c * p as f64).sqrt();
    Ok(Lemma2Check {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// Raw measurements used by the empirical-scaling experiments. No bound is
/// asserted here.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRecord {
    pub q0_norm: f64,
    pub theta_q0_norm: f64,
    /// `|q0|_2 / sqrt(m)`
    pub q0_norm_scaled: f64,
    /// `|theta q0|_2 / sqrt(m)`
    pub theta_q0_norm_scaled: f64,
    /// Mean mass retained off the error support, `|mu_{Jc}|_2^2`.
    pub mu_jc_norm_sq: f64,
    pub xi: ProjectionRatioEstimate,
}

/// Options for [`measure_diagnostics`].
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsOptions {
    pub xi_c: f64,
    pub xi_trials: usize,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            xi_c: 0.05,
            xi_trials: 200,
        }
    }
}

pub fn measure_diagnostics(
    inst: &ProblemInstance,
    prob: &SeparatorProblem,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticRecord> {
    let q0 = initial_separator(prob)?;
    let tq0 = theta(&q0, prob.eps);
    let sqrt_m = (inst.params.m as f64).sqrt();
    let in_j = {
        let mut mask = vec![false; inst.params.m];
        for &j in &inst.pattern.j {
            mask[j] = true;
        }
        mask
    };
    let mu_jc_norm_sq: f64 = (0..inst.params.m)
        .filter(|&r| !in_j[r])
        .map(|r| inst.mu.get(r).powi(2))
        .sum();
    let xi = projection_ratio_sampled(
        &prob.g,
        opts.xi_c,
        opts.xi_trials,
        sub_seed(inst.params.seed, &[domain::XI_SUPPORT]),
    )?;
    Ok(DiagnosticRecord {
        q0_norm: q0.norm_l2(),
        theta_q0_norm: tq0.norm_l2(),
        q0_norm_scaled: q0.norm_l2() / sqrt_m,
        theta_q0_norm_scaled: tq0.norm_l2() / sqrt_m,
        mu_jc_norm_sq,
        xi,
    })
}
