//! Competitor decoders.
//!
//! * [`orthogonal_complement_decode`]: premultiplies by an orthonormal basis
//!   `B` of `range(A)-perp` (so `B A = 0`), recovers the error by basis
//!   pursuit on `B e = B y`, then the signal by least squares. Needs
//!   `n < m` and breaks down once errors are dense.
//! * [`greedy_decode`]: (regularized) orthogonal matching pursuit on the
//!   column-normalized combined dictionary `[A I]`.

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, DenseVector};
use crate::solver::{self, RecoverySolution, SolveOptions, SolveStatus};
use nalgebra::{DMatrix, DVector};

/// Greedy decoder knobs.
#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    /// Upper bound on the selected support size.
    pub max_atoms: usize,
    /// Stop once the residual norm falls below this.
    pub residual_tolerance: f64,
    pub variant: GreedyVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyVariant {
    Omp,
    Romp,
}

impl GreedyOptions {
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.max_atoms > m + n {
            return Err(Error::InvalidParameter(format!(
                "max_atoms {} exceeds dictionary size {}",
                self.max_atoms,
                m + n
            )));
        }
        if self.max_atoms == 0 {
            return Err(Error::InvalidParameter("max_atoms must be >= 1".to_string()));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(Error::InvalidParameter("residual tolerance must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Error-correction decoder that first annihilates the signal:
/// `B = basis(range(A)-perp)'`, `e_hat = argmin |e|_1 s.t. B e = B y`,
/// `x_hat = lstsq(A, y - e_hat)`.
pub fn orthogonal_complement_decode(
    a: &DenseMatrix,
    y: &DenseVector,
    opts: &SolveOptions,
) -> Result<RecoverySolution> {
    let (m, n) = (a.rows(), a.cols());
    if n >= m {
        return Err(Error::DimensionMismatch(format!(
            "orthogonal complement method needs n < m, got {m}x{n}"
        )));
    }
    if y.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "A is {m}x{n}, y has dim {}",
            y.dim()
        )));
    }
    let complement = numerics::range_complement_basis(a)?;
    let b = DenseMatrix::from_na_unchecked(complement.inner().transpose());
    let by = b.mul_vec(y)?;
    let bp = solver::solve_basis_pursuit(&b, &by, opts)?;
    let e_hat = bp.e;
    let clean = DenseVector::from_na_unchecked(y.inner() - e_hat.inner());
    let x_hat = numerics::least_squares_min_norm(a, &clean)?;
    let residual = (a.inner() * x_hat.inner() + e_hat.inner() - y.inner()).norm();
    Ok(RecoverySolution {
        objective: x_hat.norm_l1() + e_hat.norm_l1(),
        x_hat,
        e_hat,
        status: bp.status,
        iterations: bp.iterations,
        primal_residual: residual,
        duality_gap: bp.duality_gap,
    })
}

/// Greedy pursuit on the normalized dictionary `[A I]`.
///
/// OMP picks the single best-correlated atom per round. ROMP picks, among
/// the `max_atoms` largest correlations, the contiguous comparable-magnitude
/// group (max/min ratio <= 2 in the sorted order) with the largest energy.
/// After support selection the raw (unnormalized) atoms are least-squares
/// fitted and split back into `(x_hat, e_hat)`.
pub fn greedy_decode(
    a: &DenseMatrix,
    y: &DenseVector,
    opts: &GreedyOptions,
) -> Result<RecoverySolution> {
    let (m, n) = (a.rows(), a.cols());
    if y.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "A is {m}x{n}, y has dim {}",
            y.dim()
        )));
    }
    opts.validate(m, n)?;

    // unit-normalization factors for the bouquet atoms; cross atoms already
    // have unit norm
    let col_norms: Vec<f64> = (0..n)
        .map(|j| a.inner().column(j).norm().max(1e-300))
        .collect();

    let mut support: Vec<usize> = Vec::new();
    let mut in_support = vec![false; n + m];
    let mut residual = y.inner().clone();
    let mut residual_norm = residual.norm();
    let mut rounds = 0usize;

    while support.len() < opts.max_atoms && residual_norm > opts.residual_tolerance {
        rounds += 1;
        // correlations with every normalized atom
        let at_r = a.inner().tr_mul(&residual);
        let mut correlations: Vec<(usize, f64)> = Vec::with_capacity(n + m);
        for j in 0..n {
            correlations.push((j, (at_r[j] / col_norms[j]).abs()));
        }
        for r in 0..m {
            correlations.push((n + r, residual[r].abs()));
        }
        correlations.retain(|&(idx, _)| !in_support[idx]);
        if correlations.is_empty() {
            break;
        }

        let picked: Vec<usize> = match opts.variant {
            GreedyVariant::Omp => {
                let best = correlations
                    .iter()
                    .cloned()
                    .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite correlations"))
                    .expect("nonempty");
                if best.1 == 0.0 {
                    break;
                }
                vec![best.0]
            }
            GreedyVariant::Romp => {
                correlations
                    .sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite correlations"));
                let top: Vec<(usize, f64)> = correlations
                    .into_iter()
                    .take(opts.max_atoms)
                    .filter(|&(_, v)| v > 0.0)
                    .collect();
                if top.is_empty() {
                    break;
                }
                // maximal-energy window with comparable magnitudes
                // (ratio <= 2) in the sorted order
                let mut best_window = (0usize, 1usize);
                let mut best_energy = 0.0f64;
                let mut lo = 0usize;
                let mut energy = 0.0f64;
                let mut hi = 0usize;
                while lo < top.len() {
                    if hi < top.len() && top[lo].1 <= 2.0 * top[hi].1 {
                        energy += top[hi].1 * top[hi].1;
                        hi += 1;
                        if energy > best_energy {
                            best_energy = energy;
                            best_window = (lo, hi);
                        }
                    } else {
                        energy -= top[lo].1 * top[lo].1;
                        lo += 1;
                        if lo > hi {
                            hi = lo;
                            energy = 0.0;
                        }
                    }
                }
                let budget = opts.max_atoms - support.len();
                top[best_window.0..best_window.1]
                    .iter()
                    .take(budget)
                    .map(|&(idx, _)| idx)
                    .collect()
            }
        };
        if picked.is_empty() {
            break;
        }
        for idx in picked {
            if !in_support[idx] {
                in_support[idx] = true;
                support.push(idx);
            }
        }

        // least-squares refit on the raw selected atoms
        let fitted = fit_on_support(a, y, &support)?;
        let new_residual = y.inner() - assemble(a, &fitted, &support);
        let new_norm = new_residual.norm();
        if new_norm >= residual_norm {
            // residual failed to decrease: keep the previous support state
            break;
        }
        residual = new_residual;
        residual_norm = new_norm;
    }

    let coeffs = fit_on_support(a, y, &support)?;
    let mut x_hat = DVector::zeros(n);
    let mut e_hat = DVector::zeros(m);
    for (k, &idx) in support.iter().enumerate() {
        if idx < n {
            x_hat[idx] = coeffs[k];
        } else {
            e_hat[idx - n] = coeffs[k];
        }
    }
    let final_residual = (y.inner() - assemble(a, &coeffs, &support)).norm();
    let x_hat = DenseVector::from_na_unchecked(x_hat);
    let e_hat = DenseVector::from_na_unchecked(e_hat);
    Ok(RecoverySolution {
        objective: x_hat.norm_l1() + e_hat.norm_l1(),
        x_hat,
        e_hat,
        status: SolveStatus::Optimal,
        iterations: rounds,
        primal_residual: final_residual,
        duality_gap: f64::NAN,
    })
}

/// Least-squares coefficients of `y` on the raw atoms listed in `support`.
fn fit_on_support(a: &DenseMatrix, y: &DenseVector, support: &[usize]) -> Result<DVector<f64>> {
    if support.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let (m, n) = (a.rows(), a.cols());
    let mut sub = DMatrix::zeros(m, support.len());
    for (k, &idx) in support.iter().enumerate() {
        if idx < n {
            sub.set_column(k, &a.inner().column(idx));
        } else {
            sub[(idx - n, k)] = 1.0;
        }
    }
    let sub = DenseMatrix::from_na_unchecked(sub);
    let coeffs = numerics::least_squares_min_norm(&sub, y)?;
    Ok(coeffs.into_inner())
}

fn assemble(a: &DenseMatrix, coeffs: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut out = DVector::zeros(m);
    for (k, &idx) in support.iter().enumerate() {
        if idx < n {
            out += a.inner().column(idx) * coeffs[k];
        } else {
            out[idx - n] += coeffs[k];
        }
    }
    out
}
