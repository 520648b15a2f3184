//! Primal-dual interior-point method for standard-form linear programs
//! `min c'z  s.t.  E z = b, z >= 0`.
//!
//! Mehrotra predictor-corrector with normal-equations steps. The constraint
//! matrix is abstracted behind [`ConstraintOperator`] so each program can
//! exploit its structure when forming and factoring `M = E D E'`:
//!
//! * [`DenseOperator`] - generic dense `E`, Cholesky of the full `M`;
//! * [`SplitOperator`] - `E = [B, -B]` from l1 variable splitting;
//! * [`CabOperator`] - `E = [A, -A, I, -I]`: `M = A S A' + T` with diagonal
//!   `S`, `T`, inverted through the Woodbury identity so the factored system
//!   is only `n x n` instead of `m x m`.
//!
//! Everything is deterministic for fixed inputs: single-threaded dense
//! kernels, no randomized pivoting.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Solver knobs. `tolerance` bounds the relative primal/dual residuals and
/// the relative duality gap at termination.
#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub z: DVector<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// `|b - E z| / (1 + |b|)` at termination.
    pub primal_residual: f64,
    /// `|c'z - b'y| / (1 + |c'z|)` at termination.
    pub duality_gap: f64,
}

/// Factored normal-equations matrix `M = E D E'`, reused for the predictor
/// and corrector solves of one iteration.
pub trait NormalFactor {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64>;
}

/// Abstract constraint matrix of a standard-form LP.
pub trait ConstraintOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `E z`
    fn apply(&self, z: &DVector<f64>) -> DVector<f64>;
    /// `E' y`
    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64>;
    /// Column `j` of `E` (used by the crossover polish).
    fn column(&self, j: usize) -> DVector<f64>;
    /// Factors `M = E diag(d) E'`; `None` means numerical breakdown.
    fn normal_factor(&self, d: &DVector<f64>) -> Option<Box<dyn NormalFactor + '_>>;
}

struct CholeskyFactor {
    chol: Cholesky<f64, Dyn>,
}

impl NormalFactor for CholeskyFactor {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }
}

/// Cholesky with an escalating ridge when the bare factorization fails.
fn cholesky_with_ridge(mut m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = m.nrows();
    let mean_diag = (m.diagonal().sum() / n as f64).abs().max(1e-30);
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Some(chol);
    }
    let mut ridge = 1e-14 * mean_diag;
    for _ in 0..8 {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += ridge;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            return Some(chol);
        }
        ridge *= 100.0;
    }
    // last resort: normalize any non-finite entries away and give up
    m.iter_mut().for_each(|v| {
        if !v.is_finite() {
            *v = 0.0;
        }
    });
    Cholesky::new(m)
}

/// Generic dense constraint matrix.
pub struct DenseOperator {
    e: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(e: DMatrix<f64>) -> Self {
        DenseOperator { e }
    }
}

impl ConstraintOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.e.nrows()
    }

    fn cols(&self) -> usize {
        self.e.ncols()
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.e * z
    }

    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        self.e.tr_mul(y)
    }

    fn column(&self, j: usize) -> DVector<f64> {
        self.e.column(j).into_owned()
    }

    fn normal_factor(&self, d: &DVector<f64>) -> Option<Box<dyn NormalFactor + '_>> {
        let mut scaled = self.e.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j].sqrt();
        }
        let m = &scaled * scaled.transpose();
        let chol = cholesky_with_ridge(m)?;
        Some(Box::new(CholeskyFactor { chol }))
    }
}

/// `E = [B, -B]` with `B` dense: the constraint matrix of
/// `min |e|_1 s.t. B e = c` after splitting `e = e+ - e-`.
pub struct SplitOperator {
    b: DMatrix<f64>,
}

impl SplitOperator {
    pub fn new(b: DMatrix<f64>) -> Self {
        SplitOperator { b }
    }

    pub fn base_cols(&self) -> usize {
        self.b.ncols()
    }
}

impl ConstraintOperator for SplitOperator {
    fn rows(&self) -> usize {
        self.b.nrows()
    }

    fn cols(&self) -> usize {
        2 * self.b.ncols()
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let c = self.b.ncols();
        let diff = DVector::from_fn(c, |i, _| z[i] - z[c + i]);
        &self.b * diff
    }

    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        let bty = self.b.tr_mul(y);
        let c = self.b.ncols();
        DVector::from_fn(2 * c, |i, _| if i < c { bty[i] } else { -bty[i - c] })
    }

    fn column(&self, j: usize) -> DVector<f64> {
        let c = self.b.ncols();
        if j < c {
            self.b.column(j).into_owned()
        } else {
            -self.b.column(j - c).into_owned()
        }
    }

    fn normal_factor(&self, d: &DVector<f64>) -> Option<Box<dyn NormalFactor + '_>> {
        let c = self.b.ncols();
        let mut scaled = self.b.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= (d[j] + d[c + j]).sqrt();
        }
        let m = &scaled * scaled.transpose();
        let chol = cholesky_with_ridge(m)?;
        Some(Box::new(CholeskyFactor { chol }))
    }
}

/// `E = [A, -A, I, -I]`: the constraint matrix of the extended program
/// `min |x|_1 + |e|_1 s.t. A x + e = y` after variable splitting.
pub struct CabOperator {
    a: DMatrix<f64>,
}

impl CabOperator {
    pub fn new(a: DMatrix<f64>) -> Self {
        CabOperator { a }
    }

    pub fn signal_cols(&self) -> usize {
        self.a.ncols()
    }
}

struct WoodburyFactor<'a> {
    a: &'a DMatrix<f64>,
    t_inv: DVector<f64>,
    sqrt_s: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl NormalFactor for WoodburyFactor<'_> {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        // (T + A S A')^{-1} r
        //   = T^{-1} r - T^{-1} A S^{1/2} K^{-1} S^{1/2} A' T^{-1} r
        // with K = I + S^{1/2} A' T^{-1} A S^{1/2}
        let u = rhs.component_mul(&self.t_inv);
        let v = self.a.tr_mul(&u).component_mul(&self.sqrt_s);
        let w = self.chol.solve(&v);
        let z = self.a * w.component_mul(&self.sqrt_s);
        u - z.component_mul(&self.t_inv)
    }
}

impl ConstraintOperator for CabOperator {
    fn rows(&self) -> usize {
        self.a.nrows()
    }

    fn cols(&self) -> usize {
        2 * (self.a.ncols() + self.a.nrows())
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        let x_diff = DVector::from_fn(n, |i, _| z[i] - z[n + i]);
        let mut out = &self.a * x_diff;
        for r in 0..m {
            out[r] += z[2 * n + r] - z[2 * n + m + r];
        }
        out
    }

    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        let aty = self.a.tr_mul(y);
        let mut out = DVector::zeros(2 * (n + m));
        for i in 0..n {
            out[i] = aty[i];
            out[n + i] = -aty[i];
        }
        for r in 0..m {
            out[2 * n + r] = y[r];
            out[2 * n + m + r] = -y[r];
        }
        out
    }

    fn column(&self, j: usize) -> DVector<f64> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        if j < n {
            self.a.column(j).into_owned()
        } else if j < 2 * n {
            -self.a.column(j - n).into_owned()
        } else if j < 2 * n + m {
            let mut e = DVector::zeros(m);
            e[j - 2 * n] = 1.0;
            e
        } else {
            let mut e = DVector::zeros(m);
            e[j - 2 * n - m] = -1.0;
            e
        }
    }

    fn normal_factor(&self, d: &DVector<f64>) -> Option<Box<dyn NormalFactor + '_>> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        let s = DVector::from_fn(n, |i, _| d[i] + d[n + i]);
        let t = DVector::from_fn(m, |r, _| d[2 * n + r] + d[2 * n + m + r]);
        let t_inv = t.map(|v| 1.0 / v);
        let sqrt_s = s.map(f64::sqrt);

        // K = I + S^{1/2} A' T^{-1} A S^{1/2}
        let mut w = self.a.clone();
        for (j, mut col) in w.column_iter_mut().enumerate() {
            col *= sqrt_s[j];
        }
        let mut tw = w.clone();
        for (r, mut row) in tw.row_iter_mut().enumerate() {
            row *= t_inv[r];
        }
        let mut k = w.tr_mul(&tw);
        for i in 0..n {
            k[(i, i)] += 1.0;
        }
        let chol = cholesky_with_ridge(k)?;
        Some(Box::new(WoodburyFactor {
            a: &self.a,
            t_inv,
            sqrt_s,
            chol,
        }))
    }
}

/// Largest step in `[0, cap]` keeping `v + alpha dv` nonnegative.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>, cap: f64) -> f64 {
    let mut alpha = cap;
    for i in 0..v.nrows() {
        if dv[i] < 0.0 {
            alpha = alpha.min(-v[i] / dv[i]);
        }
    }
    alpha
}

struct NewtonStep {
    dz: DVector<f64>,
    dy: DVector<f64>,
    ds: DVector<f64>,
}

/// Solves `(E D E') x = rhs` with up to two rounds of iterative refinement.
/// The normal equations get very ill-conditioned near the optimum; the
/// refinement recovers the digits lost in the factored solve.
fn solve_normal_refined(
    op: &dyn ConstraintOperator,
    factor: &dyn NormalFactor,
    d: &DVector<f64>,
    rhs: &DVector<f64>,
) -> DVector<f64> {
    let apply_m = |v: &DVector<f64>| op.apply(&d.component_mul(&op.apply_transpose(v)));
    let mut x = factor.solve(rhs);
    let scale = rhs.norm().max(1e-300);
    for _ in 0..2 {
        let residual = rhs - apply_m(&x);
        if residual.norm() <= 1e-14 * scale {
            break;
        }
        let correction = factor.solve(&residual);
        if !correction.iter().all(|v| v.is_finite()) {
            break;
        }
        x += correction;
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn newton_raw(
    op: &dyn ConstraintOperator,
    factor: &dyn NormalFactor,
    d: &DVector<f64>,
    z: &DVector<f64>,
    r_p: &DVector<f64>,
    r_d: &DVector<f64>,
    r_zs: &DVector<f64>,
    s: &DVector<f64>,
) -> NewtonStep {
    let tmp = DVector::from_fn(z.nrows(), |i, _| r_zs[i] / z[i] - r_d[i]);
    let rhs = r_p - op.apply(&d.component_mul(&tmp));
    let dy = solve_normal_refined(op, factor, d, &rhs);
    let dz = d.component_mul(&(op.apply_transpose(&dy) + tmp));
    let ds = DVector::from_fn(z.nrows(), |i, _| (r_zs[i] - s[i] * dz[i]) / z[i]);
    NewtonStep { dz, dy, ds }
}

/// Newton step with full-KKT iterative refinement. Recovering `dz` from the
/// normal-equations `dy` multiplies rounding errors by `d` (which spans many
/// orders of magnitude near the optimum); re-solving against the true KKT
/// residuals restores the lost digits at the cost of one cheap extra solve.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    op: &dyn ConstraintOperator,
    factor: &dyn NormalFactor,
    d: &DVector<f64>,
    z: &DVector<f64>,
    r_p: &DVector<f64>,
    r_d: &DVector<f64>,
    r_zs: &DVector<f64>,
    s: &DVector<f64>,
) -> NewtonStep {
    let mut step = newton_raw(op, factor, d, z, r_p, r_d, r_zs, s);
    let scale = r_p.norm().max(r_d.norm()).max(r_zs.norm()).max(1e-300);
    for _ in 0..2 {
        let r1 = r_p - op.apply(&step.dz);
        let r2 = r_d - op.apply_transpose(&step.dy) - &step.ds;
        let r3 = DVector::from_fn(z.nrows(), |i, _| {
            r_zs[i] - s[i] * step.dz[i] - z[i] * step.ds[i]
        });
        let defect = r1.norm().max(r2.norm()).max(r3.norm());
        if defect <= 1e-13 * scale {
            break;
        }
        let corr = newton_raw(op, factor, d, z, &r1, &r2, &r3, s);
        if !corr.dz.iter().all(|v| v.is_finite())
            || !corr.dy.iter().all(|v| v.is_finite())
            || !corr.ds.iter().all(|v| v.is_finite())
        {
            break;
        }
        step.dz += corr.dz;
        step.dy += corr.dy;
        step.ds += corr.ds;
    }
    step
}

/// Mehrotra's starting-point heuristic.
fn starting_point(
    op: &dyn ConstraintOperator,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let ones = DVector::from_element(op.cols(), 1.0);
    let factor = op.normal_factor(&ones)?;
    let z_tilde = op.apply_transpose(&factor.solve(b));
    let y_tilde = factor.solve(&op.apply(c));
    let s_tilde = c - op.apply_transpose(&y_tilde);

    let dz = (-1.5 * z_tilde.min()).max(0.0);
    let ds = (-1.5 * s_tilde.min()).max(0.0);
    let z_hat = z_tilde.add_scalar(dz);
    let s_hat = s_tilde.add_scalar(ds);

    let ip = z_hat.dot(&s_hat);
    let sum_s = s_hat.sum();
    let sum_z = z_hat.sum();
    let dz_hat = if ip > 0.0 && sum_s > 0.0 { 0.5 * ip / sum_s } else { 1.0 };
    let ds_hat = if ip > 0.0 && sum_z > 0.0 { 0.5 * ip / sum_z } else { 1.0 };
    let mut z = z_hat.add_scalar(dz_hat);
    let mut s = s_hat.add_scalar(ds_hat);

    let z_min = z.min();
    if !(z_min > 0.0) {
        z = z.add_scalar(1.0 - z_min);
    }
    let s_min = s.min();
    if !(s_min > 0.0) {
        s = s.add_scalar(1.0 - s_min);
    }
    Some((z, y_tilde, s))
}

const STEP_FRACTION: f64 = 0.99995;
const SCALING_CLAMP: f64 = 1e14;
/// Relative gap below which the active set is considered identified and the
/// crossover polish is attempted.
const POLISH_GAP: f64 = 1e-4;

/// Crossover polish: read the optimal support off the scaling vector
/// (`z_i >= s_i`), solve the active-set least-squares system exactly and
/// verify optimality from scratch. Succeeds with machine-precision gaps on
/// cleanly identified optima, where the normal equations of the interior
/// iteration have long run out of accurate digits.
fn try_polish(
    op: &dyn ConstraintOperator,
    b: &DVector<f64>,
    c: &DVector<f64>,
    z: &DVector<f64>,
    y_interior: &DVector<f64>,
    s: &DVector<f64>,
    opts: &LpOptions,
    iteration: usize,
) -> Option<LpSolution> {
    let rows = op.rows();
    let norm_b = b.norm();
    let norm_c = c.norm();
    let basic: Vec<usize> = (0..op.cols()).filter(|&i| z[i] >= s[i]).collect();

    // The dual is the interior dual projected onto {E_B' y = c_B}: the
    // correction is tiny (the interior reduced costs on B are already
    // near zero), so near-feasibility of s is preserved even on degenerate
    // optima, while the projection zeroes the gap against the primal fit.
    let (z_basic, y) = if basic.is_empty() {
        (DVector::zeros(0), y_interior.clone())
    } else {
        let mut eb = DMatrix::zeros(rows, basic.len());
        for (k, &j) in basic.iter().enumerate() {
            eb.set_column(k, &op.column(j));
        }
        let c_basic = DVector::from_fn(basic.len(), |k, _| c[basic[k]]);
        let dual_defect = &c_basic - eb.tr_mul(y_interior);
        if basic.len() <= rows {
            // tall case: thin QR solves the primal fit and the projection
            let qr = eb.clone().qr();
            let (q, r) = (qr.q(), qr.r());
            let min_diag = (0..basic.len()).fold(f64::INFINITY, |acc, i| acc.min(r[(i, i)].abs()));
            let max_diag = (0..basic.len()).fold(0.0_f64, |acc, i| acc.max(r[(i, i)].abs()));
            if !(min_diag > 1e-12 * max_diag.max(1e-300)) {
                return None;
            }
            let zb = r.solve_upper_triangular(&q.tr_mul(b))?;
            let w = r.transpose().solve_lower_triangular(&dual_defect)?;
            (zb, y_interior + &q * w)
        } else {
            // degenerate wide case (optimal face): minimum-norm via SVD
            let svd = eb.svd(true, true);
            let smax = svd.singular_values.max();
            let eps = smax * rows.max(basic.len()) as f64 * f64::EPSILON;
            let zb_mat = svd.solve(b, eps).ok()?;
            let zb = DVector::from_column_slice(zb_mat.as_slice());
            // y += U S^{-1} V' (c_B - E_B' y) on the active subspace
            let u = svd.u.as_ref()?;
            let vt = svd.v_t.as_ref()?;
            let mut coeff = vt * &dual_defect;
            for (i, sv) in svd.singular_values.iter().enumerate() {
                coeff[i] = if *sv > eps { coeff[i] / sv } else { 0.0 };
            }
            (zb, y_interior + u * coeff)
        }
    };

    // assemble the polished primal point
    let mut z_pol = DVector::zeros(op.cols());
    let z_scale = 1.0 + z_basic.amax();
    for (k, &j) in basic.iter().enumerate() {
        let v = z_basic[k];
        if v < -1e-7 * z_scale {
            return None;
        }
        z_pol[j] = v.max(0.0);
    }

    let s_pol = c - op.apply_transpose(&y);
    let obj_p = c.dot(&z_pol);
    let obj_d = b.dot(&y);
    let primal_res = (b - op.apply(&z_pol)).norm() / (1.0 + norm_b);
    let gap = (obj_p - obj_d).abs() / (1.0 + obj_p.abs());
    if std::env::var_os("CAB_LP_TRACE").is_some() {
        eprintln!(
            "lp polish iter {iteration}: |B| {} rp {primal_res:.3e} gap {gap:.3e} s_min {:.3e}",
            basic.len(),
            s_pol.min()
        );
    }
    if s_pol.min() < -10.0 * opts.tolerance * (1.0 + norm_c) {
        return None;
    }
    if primal_res <= opts.tolerance && gap <= opts.tolerance {
        Some(LpSolution {
            z: z_pol,
            objective: obj_p,
            status: LpStatus::Optimal,
            iterations: iteration,
            primal_residual: primal_res,
            duality_gap: gap,
        })
    } else {
        None
    }
}

/// Solves the standard-form LP defined by `op`, `b`, `c`.
pub fn solve_lp(
    op: &dyn ConstraintOperator,
    b: &DVector<f64>,
    c: &DVector<f64>,
    opts: &LpOptions,
) -> LpSolution {
    assert_eq!(b.nrows(), op.rows(), "rhs dimension");
    assert_eq!(c.nrows(), op.cols(), "cost dimension");
    let n_v = op.cols() as f64;
    let norm_b = b.norm();
    let norm_c = c.norm();

    let fail = |z: DVector<f64>, iterations: usize| {
        let objective = c.dot(&z);
        LpSolution {
            z,
            objective,
            status: LpStatus::NumericalFailure,
            iterations,
            primal_residual: f64::INFINITY,
            duality_gap: f64::INFINITY,
        }
    };

    let Some((mut z, mut y, mut s)) = starting_point(op, b, c) else {
        return fail(DVector::zeros(op.cols()), 0);
    };

    // best iterate so far by worst-case optimality measure; returned if the
    // iteration degrades instead of converging
    let mut best_z = z.clone();
    let mut best_metrics = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut best_score = f64::INFINITY;

    let mut stall_count = 0usize;
    let mut iterations_done = 0usize;
    for iteration in 0..opts.max_iterations {
        iterations_done = iteration;
        let r_p = b - op.apply(&z);
        let r_d = c - op.apply_transpose(&y) - &s;
        let mu = z.dot(&s) / n_v;

        let obj_p = c.dot(&z);
        let obj_d = b.dot(&y);
        let primal_res = r_p.norm() / (1.0 + norm_b);
        let dual_res = r_d.norm() / (1.0 + norm_c);
        let gap = (obj_p - obj_d).abs() / (1.0 + obj_p.abs());
        if std::env::var_os("CAB_LP_TRACE").is_some() {
            eprintln!(
                "lp iter {iteration:3}: obj {obj_p:+.9e} rp {primal_res:.3e} rd {dual_res:.3e} gap {gap:.3e} mu {mu:.3e}"
            );
        }
        if primal_res <= opts.tolerance && dual_res <= opts.tolerance && gap <= opts.tolerance {
            return LpSolution {
                z,
                objective: obj_p,
                status: LpStatus::Optimal,
                iterations: iteration,
                primal_residual: primal_res,
                duality_gap: gap,
            };
        }
        if gap <= POLISH_GAP && primal_res <= POLISH_GAP {
            if let Some(polished) = try_polish(op, b, c, &z, &y, &s, opts, iteration) {
                return polished;
            }
        }
        let score = primal_res.max(dual_res).max(gap);
        if score < best_score {
            best_score = score;
            best_z = z.clone();
            best_metrics = (primal_res, dual_res, gap);
        } else if score > 1e3 * best_score && best_score.is_finite() {
            // numerical breakdown past the attainable accuracy; keep the
            // best iterate instead of wandering off
            break;
        }

        let d = DVector::from_fn(z.nrows(), |i, _| {
            (z[i] / s[i]).clamp(1.0 / SCALING_CLAMP, SCALING_CLAMP)
        });
        let Some(factor) = op.normal_factor(&d) else {
            break;
        };

        // predictor (affine scaling) direction
        let r_zs_aff = DVector::from_fn(z.nrows(), |i, _| -z[i] * s[i]);
        let aff = newton_step(op, factor.as_ref(), &d, &z, &r_p, &r_d, &r_zs_aff, &s);
        let alpha_p_aff = max_step(&z, &aff.dz, 1.0);
        let alpha_d_aff = max_step(&s, &aff.ds, 1.0);
        let mu_aff = (&z + &aff.dz * alpha_p_aff).dot(&(&s + &aff.ds * alpha_d_aff)) / n_v;
        // Mehrotra's heuristic, floored so a single step never aims orders
        // of magnitude below the accuracy the gap tolerance asks for; the
        // normal equations cannot deliver directions for such targets.
        let mu_floor = 0.2 * opts.tolerance * (1.0 + obj_p.abs()) / n_v;
        let sigma_floor = (mu_floor / mu.max(1e-300)).min(0.5);
        let sigma = if mu > 0.0 {
            (mu_aff / mu).powi(3).clamp(sigma_floor.max(1e-8), 1.0)
        } else {
            0.0
        };

        // corrector
        let r_zs = DVector::from_fn(z.nrows(), |i, _| {
            sigma * mu - z[i] * s[i] - aff.dz[i] * aff.ds[i]
        });
        let step = newton_step(op, factor.as_ref(), &d, &z, &r_p, &r_d, &r_zs, &s);

        let alpha_p = STEP_FRACTION * max_step(&z, &step.dz, 1.0 / STEP_FRACTION);
        let alpha_d = STEP_FRACTION * max_step(&s, &step.ds, 1.0 / STEP_FRACTION);
        z += &step.dz * alpha_p;
        y += &step.dy * alpha_d;
        s += &step.ds * alpha_d;

        if !z.iter().all(|v| v.is_finite())
            || !y.iter().all(|v| v.is_finite())
            || !s.iter().all(|v| v.is_finite())
        {
            break;
        }
        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            stall_count += 1;
            if stall_count >= 3 {
                break;
            }
        } else {
            stall_count = 0;
        }
    }

    let (primal_res, dual_res, gap) = best_metrics;
    let status = if primal_res <= opts.tolerance && dual_res <= opts.tolerance && gap <= opts.tolerance
    {
        LpStatus::Optimal
    } else if best_score.is_finite() {
        LpStatus::IterationLimit
    } else {
        return fail(best_z, iterations_done);
    };
    let objective = c.dot(&best_z);
    LpSolution {
        z: best_z,
        objective,
        status,
        iterations: iterations_done,
        primal_residual: primal_res,
        duality_gap: gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> DVector<f64> {
        DVector::from_element(n, 1.0)
    }

    #[test]
    fn dense_lp_simple() {
        // min x0 + x1 s.t. x0 + x1 = 1, x >= 0: optimum 1
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let op = DenseOperator::new(e);
        let sol = solve_lp(
            &op,
            &DVector::from_element(1, 1.0),
            &ones(2),
            &LpOptions::default(),
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() <= 1e-7);
    }

    #[test]
    fn dense_lp_weighted() {
        // min 2a + b s.t. a + b = 1 -> put all mass on b
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let op = DenseOperator::new(e);
        let c = DVector::from_vec(vec![2.0, 1.0]);
        let sol = solve_lp(&op, &DVector::from_element(1, 1.0), &c, &LpOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() <= 1e-7);
        assert!(sol.z[1] > 0.999);
    }

    #[test]
    fn operators_agree_on_matvec() {
        use crate::rng::CabRng;
        let mut rng = CabRng::new(11);
        let a = DMatrix::from_fn(4, 3, |_, _| rng.standard_normal());
        let cab = CabOperator::new(a.clone());
        // dense replica [A, -A, I, -I]
        let mut dense = DMatrix::zeros(4, 14);
        dense.view_mut((0, 0), (4, 3)).copy_from(&a);
        dense.view_mut((0, 3), (4, 3)).copy_from(&(-&a));
        dense.view_mut((0, 6), (4, 4)).copy_from(&DMatrix::identity(4, 4));
        dense
            .view_mut((0, 10), (4, 4))
            .copy_from(&(-DMatrix::<f64>::identity(4, 4)));
        let dense_op = DenseOperator::new(dense);

        let z = DVector::from_fn(14, |i, _| 0.1 * (i as f64 + 1.0));
        let y = DVector::from_fn(4, |i, _| (i as f64) - 1.5);
        assert!((cab.apply(&z) - dense_op.apply(&z)).norm() < 1e-12);
        assert!((cab.apply_transpose(&y) - dense_op.apply_transpose(&y)).norm() < 1e-12);

        let d = DVector::from_fn(14, |i, _| 0.5 + (i % 5) as f64);
        let rhs = DVector::from_fn(4, |i, _| 1.0 + i as f64);
        let f1 = cab.normal_factor(&d).unwrap();
        let f2 = dense_op.normal_factor(&d).unwrap();
        assert!((f1.solve(&rhs) - f2.solve(&rhs)).norm() < 1e-9);
    }

    #[test]
    fn split_operator_matches_dense() {
        use crate::rng::CabRng;
        let mut rng = CabRng::new(13);
        let b = DMatrix::from_fn(3, 5, |_, _| rng.standard_normal());
        let split = SplitOperator::new(b.clone());
        let mut dense = DMatrix::zeros(3, 10);
        dense.view_mut((0, 0), (3, 5)).copy_from(&b);
        dense.view_mut((0, 5), (3, 5)).copy_from(&(-&b));
        let dense_op = DenseOperator::new(dense);

        let z = DVector::from_fn(10, |i, _| (i as f64 * 0.3).sin() + 2.0);
        assert!((split.apply(&z) - dense_op.apply(&z)).norm() < 1e-12);
        let y = DVector::from_fn(3, |i, _| i as f64 + 0.5);
        assert!((split.apply_transpose(&y) - dense_op.apply_transpose(&y)).norm() < 1e-12);
        let d = DVector::from_fn(10, |i, _| 1.0 + (i as f64) * 0.1);
        let rhs = DVector::from_fn(3, |i, _| 1.0 - i as f64);
        let f1 = split.normal_factor(&d).unwrap();
        let f2 = dense_op.normal_factor(&d).unwrap();
        assert!((f1.solve(&rhs) - f2.solve(&rhs)).norm() < 1e-10);
    }
}
