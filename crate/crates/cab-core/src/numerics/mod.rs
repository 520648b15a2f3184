//! Dense linear algebra kernel shared by all other modules.
//!
//! [`DenseMatrix`] and [`DenseVector`] are thin validated wrappers around
//! `nalgebra` types: entries are 64-bit floats, stored column-major, and
//! finite by construction. Factorizations (Householder QR, SVD) come from
//! `nalgebra`; this module pins the contracts the rest of the crate relies
//! on: min-norm least squares, range projections, and rank reporting via
//! the R diagonal.

mod text;

pub use text::{read_matrix, read_vector, write_matrix, write_vector};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Column-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

/// Dense vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    inner: DVector<f64>,
}

fn ensure_finite_slice(entries: &[f64], what: &str) -> Result<()> {
    if entries.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

impl DenseMatrix {
    /// Builds a matrix from column-major entries.
    pub fn from_column_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        ensure_finite_slice(&entries, "matrix entries")?;
        Ok(DenseMatrix {
            inner: DMatrix::from_vec(rows, cols, entries),
        })
    }

    /// Wraps an existing `nalgebra` matrix, validating finiteness.
    pub fn from_na(inner: DMatrix<f64>) -> Result<Self> {
        ensure_finite_slice(inner.as_slice(), "matrix entries")?;
        Ok(DenseMatrix { inner })
    }

    /// Wraps a matrix known to be finite (checked in debug builds only).
    pub(crate) fn from_na_unchecked(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.as_slice().iter().all(|x| x.is_finite()));
        DenseMatrix { inner }
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.inner
    }

    /// Column-major entry slice.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn column(&self, j: usize) -> DenseVector {
        DenseVector::from_na_unchecked(self.inner.column(j).into_owned())
    }

    pub fn mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        if self.cols() != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, vector has dim {}",
                self.rows(),
                self.cols(),
                v.dim()
            )));
        }
        Ok(DenseVector::from_na_unchecked(&self.inner * v.inner()))
    }

    pub fn tr_mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        if self.rows() != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, vector has dim {}",
                self.rows(),
                self.cols(),
                v.dim()
            )));
        }
        Ok(DenseVector::from_na_unchecked(
            self.inner.tr_mul(v.inner()),
        ))
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.inner.norm()
    }
}

impl DenseVector {
    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        ensure_finite_slice(&entries, "vector entries")?;
        Ok(DenseVector {
            inner: DVector::from_vec(entries),
        })
    }

    pub fn from_na(inner: DVector<f64>) -> Result<Self> {
        ensure_finite_slice(inner.as_slice(), "vector entries")?;
        Ok(DenseVector { inner })
    }

    pub(crate) fn from_na_unchecked(inner: DVector<f64>) -> Self {
        debug_assert!(inner.as_slice().iter().all(|x| x.is_finite()));
        DenseVector { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            inner: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.inner[i]
    }

    pub fn inner(&self) -> &DVector<f64> {
        &self.inner
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.inner
    }

    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.inner.iter()
    }

    pub fn norm_l1(&self) -> f64 {
        self.inner.iter().map(|x| x.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner.norm()
    }

    pub fn norm_inf(&self) -> f64 {
        self.inner.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        self.inner.dot(other.inner())
    }

    /// Support of the vector: indices with nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.inner
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Householder QR factors of a tall matrix.
#[derive(Debug)]
pub struct QrFactors {
    q: DenseMatrix,
    r: DenseMatrix,
}

impl QrFactors {
    /// Orthonormal basis of the column range, `rows x cols`.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Upper triangular factor, `cols x cols`.
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// Numerical rank: count of R diagonal entries above `rel_tol` times
    /// the largest diagonal magnitude.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let n = self.r.cols();
        let diag: Vec<f64> = (0..n).map(|i| self.r.get(i, i).abs()).collect();
        let largest = diag.iter().cloned().fold(0.0_f64, f64::max);
        if largest == 0.0 {
            return 0;
        }
        diag.iter().filter(|&&d| d > rel_tol * largest).count()
    }

    pub fn is_full_rank(&self, rel_tol: f64) -> bool {
        self.rank(rel_tol) == self.r.cols()
    }

    /// Solves `R^T z = w` by forward substitution (R is upper triangular).
    pub fn solve_r_transpose(&self, w: &DenseVector) -> Result<DenseVector> {
        if w.dim() != self.r.cols() {
            return Err(Error::DimensionMismatch(format!(
                "R is {0}x{0}, rhs has dim {1}",
                self.r.cols(),
                w.dim()
            )));
        }
        let rt = self.r.inner().transpose();
        let z = rt.solve_lower_triangular(w.inner()).ok_or_else(|| {
            Error::RankDeficient("triangular solve hit a zero pivot".to_string())
        })?;
        if !z.iter().all(|x| x.is_finite()) {
            return Err(Error::RankDeficient(
                "triangular solve produced non-finite values".to_string(),
            ));
        }
        Ok(DenseVector::from_na_unchecked(z))
    }
}

/// Householder QR of a tall matrix (`rows >= cols`).
pub fn qr_factorize(m: &DenseMatrix) -> Result<QrFactors> {
    if m.rows() < m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "qr_factorize expects rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let qr = m.inner.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    Ok(QrFactors {
        q: DenseMatrix::from_na_unchecked(q),
        r: DenseMatrix::from_na_unchecked(r),
    })
}

/// Orthogonal projection of `s` onto the column span of `q`: `q (q^T s)`.
pub fn project_onto_range(q: &DenseMatrix, s: &DenseVector) -> Result<DenseVector> {
    if q.rows() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis is {}x{}, vector has dim {}",
            q.rows(),
            q.cols(),
            s.dim()
        )));
    }
    let coeffs = q.inner.tr_mul(s.inner());
    Ok(DenseVector::from_na_unchecked(&q.inner * coeffs))
}

/// Minimum-norm least squares solution of `M x = b` via SVD.
///
/// Handles both orientations: for overdetermined systems this is the usual
/// least-squares solution, for underdetermined or rank-deficient systems it
/// is the minimum l2-norm solution among the minimizers.
pub fn least_squares_min_norm(m: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if m.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, rhs has dim {}",
            m.rows(),
            m.cols(),
            b.dim()
        )));
    }
    let svd = m.inner.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return Ok(DenseVector::zeros(m.cols()));
    }
    let eps = smax * m.rows().max(m.cols()) as f64 * f64::EPSILON;
    let x = svd
        .solve(b.inner(), eps)
        .map_err(|e| Error::Numerical(format!("svd solve: {e}")))?;
    DenseVector::from_na(DVector::from_column_slice(x.as_slice()))
}

/// Singular values of `m`, sorted nonincreasing; length `min(rows, cols)`.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.inner.clone().svd(false, false).singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Largest singular value (operator norm).
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

/// Orthonormal basis of the orthogonal complement of `range(a)` for a tall
/// full-rank `a` (`rows > cols`), returned as a `rows x (rows-cols)` matrix.
///
/// Computed by a column-pivoted QR of the projector `I - Q Q^T`; pivoting
/// keeps the Householder steps away from the numerically exhausted rank.
pub fn range_complement_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows <= cols {
        return Err(Error::DimensionMismatch(format!(
            "complement basis requires rows > cols, got {rows}x{cols}"
        )));
    }
    let qr = qr_factorize(a)?;
    if !qr.is_full_rank(1e-12) {
        return Err(Error::RankDeficient(
            "complement basis requires full column rank".to_string(),
        ));
    }
    let q = qr.q().inner();
    let projector = DMatrix::identity(rows, rows) - q * q.transpose();
    let piv = projector.col_piv_qr();
    let full_q = piv.q();
    let complement = full_q.columns(0, rows - cols).into_owned();
    Ok(DenseMatrix::from_na_unchecked(complement))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CabRng;
    use approx::assert_abs_diff_eq;

    pub(crate) fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = CabRng::new(seed);
        let entries: Vec<f64> = (0..rows * cols).map(|_| rng.standard_normal()).collect();
        DenseMatrix::from_column_major(rows, cols, entries).unwrap()
    }

    pub(crate) fn random_vector(dim: usize, seed: u64) -> DenseVector {
        let mut rng = CabRng::new(seed);
        DenseVector::from_entries((0..dim).map(|_| rng.standard_normal()).collect()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(DenseMatrix::from_column_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::from_entries(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_bad_entry_count() {
        assert!(DenseMatrix::from_column_major(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn qr_identity() {
        let m = DenseMatrix::identity(2);
        let qr = qr_factorize(&m).unwrap();
        assert_abs_diff_eq!(qr.q().inner(), m.inner(), epsilon = 1e-14);
        assert_abs_diff_eq!(qr.r().inner(), m.inner(), epsilon = 1e-14);
    }

    #[test]
    fn qr_single_column() {
        let m = DenseMatrix::from_column_major(2, 1, vec![3.0, 4.0]).unwrap();
        let qr = qr_factorize(&m).unwrap();
        // sign convention: Q column is +-[0.6, 0.8], R is +-5
        let q0 = qr.q().get(0, 0);
        let q1 = qr.q().get(1, 0);
        let r = qr.r().get(0, 0);
        let s = if r > 0.0 { 1.0 } else { -1.0 };
        assert_abs_diff_eq!(s * q0, 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(s * q1, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(r.abs(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn qr_reconstructs_and_is_orthonormal() {
        let m = random_matrix(8, 3, 17);
        let qr = qr_factorize(&m).unwrap();
        let reconstructed = qr.q().inner() * qr.r().inner();
        let rel = (reconstructed - m.inner()).norm() / m.inner().norm();
        assert!(rel <= 1e-10, "reconstruction error {rel}");
        let gram = qr.q().inner().tr_mul(qr.q().inner());
        let orth = (gram - DMatrix::<f64>::identity(3, 3)).norm();
        assert!(orth <= 1e-10, "orthonormality defect {orth}");
    }

    #[test]
    fn qr_rank_detects_deficiency() {
        // second column is twice the first
        let m =
            DenseMatrix::from_column_major(3, 2, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        let qr = qr_factorize(&m).unwrap();
        assert_eq!(qr.rank(1e-10), 1);
        assert!(!qr.is_full_rank(1e-10));
    }

    #[test]
    fn projection_full_range_is_identity() {
        let q = DenseMatrix::identity(4);
        let s = random_vector(4, 3);
        let p = project_onto_range(&q, &s).unwrap();
        assert_abs_diff_eq!(p.inner(), s.inner(), epsilon = 1e-14);
    }

    #[test]
    fn projection_of_orthogonal_vector_is_zero() {
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let q = DenseMatrix::from_column_major(2, 1, vec![inv_sqrt2, inv_sqrt2]).unwrap();
        let s = DenseVector::from_entries(vec![1.0, -1.0]).unwrap();
        let p = project_onto_range(&q, &s).unwrap();
        assert!(p.norm_l2() <= 1e-14);
    }

    #[test]
    fn projection_hand_example() {
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let q = DenseMatrix::from_column_major(2, 1, vec![inv_sqrt2, inv_sqrt2]).unwrap();
        let s = DenseVector::from_entries(vec![1.0, 0.0]).unwrap();
        let p = project_onto_range(&q, &s).unwrap();
        assert_abs_diff_eq!(p.get(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p.get(1), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn projection_idempotent_and_contractive() {
        let m = random_matrix(20, 6, 5);
        let qr = qr_factorize(&m).unwrap();
        let s = random_vector(20, 7);
        let p1 = project_onto_range(qr.q(), &s).unwrap();
        let p2 = project_onto_range(qr.q(), &p1).unwrap();
        let diff = (p1.inner() - p2.inner()).norm();
        assert!(diff <= 1e-10, "projection not idempotent: {diff}");
        assert!(p1.norm_l2() <= s.norm_l2() + 1e-12);
    }

    #[test]
    fn least_squares_identity() {
        let m = DenseMatrix::identity(3);
        let b = random_vector(3, 11);
        let x = least_squares_min_norm(&m, &b).unwrap();
        assert_abs_diff_eq!(x.inner(), b.inner(), epsilon = 1e-12);
    }

    #[test]
    fn least_squares_consistent_pair_mean() {
        let m = DenseMatrix::from_column_major(2, 1, vec![1.0, 1.0]).unwrap();
        let b = DenseVector::from_entries(vec![1.0, 3.0]).unwrap();
        let x = least_squares_min_norm(&m, &b).unwrap();
        assert_abs_diff_eq!(x.get(0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn least_squares_recovers_known_solution() {
        let m = random_matrix(6, 4, 23);
        let x_true = random_vector(4, 29);
        let b = m.mul_vec(&x_true).unwrap();
        let x = least_squares_min_norm(&m, &b).unwrap();
        let err = (x.inner() - x_true.inner()).norm();
        assert!(err <= 1e-9, "recovery error {err}");
    }

    #[test]
    fn least_squares_min_norm_underdetermined() {
        // 1x2 system x0 + x1 = 2: min-norm solution is (1, 1)
        let m = DenseMatrix::from_column_major(1, 2, vec![1.0, 1.0]).unwrap();
        let b = DenseVector::from_entries(vec![2.0]).unwrap();
        let x = least_squares_min_norm(&m, &b).unwrap();
        assert_abs_diff_eq!(x.get(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x.get(1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_values_diagonal() {
        let m = DenseMatrix::from_column_major(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let sv = singular_values(&m);
        assert_abs_diff_eq!(sv[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_values_zero_matrix() {
        let m = DenseMatrix::zeros(3, 2);
        let sv = singular_values(&m);
        assert_eq!(sv.len(), 2);
        assert!(sv.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn singular_values_frobenius_identity() {
        let m = random_matrix(10, 10, 31);
        let sv = singular_values(&m);
        assert_eq!(sv.len(), 10);
        let sum_sq: f64 = sv.iter().map(|s| s * s).sum();
        let fro_sq = m.norm_frobenius().powi(2);
        assert!((sum_sq - fro_sq).abs() <= 1e-8 * fro_sq.max(1.0));
        assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn complement_basis_annihilates_range() {
        let a = random_matrix(12, 5, 41);
        let b = range_complement_basis(&a).unwrap();
        assert_eq!(b.rows(), 12);
        assert_eq!(b.cols(), 7);
        let ba = b.inner().tr_mul(a.inner());
        assert!(ba.norm() <= 1e-10, "B^T A = {}", ba.norm());
        let gram = b.inner().tr_mul(b.inner());
        let orth = (gram - DMatrix::<f64>::identity(7, 7)).norm();
        assert!(orth <= 1e-10, "complement not orthonormal: {orth}");
    }

    #[test]
    fn pythagoras_for_projection() {
        let m = random_matrix(15, 4, 53);
        let qr = qr_factorize(&m).unwrap();
        let s = random_vector(15, 59);
        let p = project_onto_range(qr.q(), &s).unwrap();
        let resid = DenseVector::from_na_unchecked(s.inner() - p.inner());
        let lhs = s.norm_l2().powi(2);
        let rhs = p.norm_l2().powi(2) + resid.norm_l2().powi(2);
        assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
    }

    #[test]
    fn residual_orthogonality() {
        let m = random_matrix(9, 4, 61);
        let b = random_vector(9, 67);
        let x = least_squares_min_norm(&m, &b).unwrap();
        let resid = DenseVector::from_na_unchecked(m.inner() * x.inner() - b.inner());
        let grad = m.tr_mul_vec(&resid).unwrap();
        let bound = 1e-8 * operator_norm(&m) * b.norm_l2();
        assert!(grad.norm_l2() <= bound.max(1e-12), "gradient {}", grad.norm_l2());
    }
}
