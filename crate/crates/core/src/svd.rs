//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of the matrix are rotated pairwise until every
//! pair is orthogonal to within a relative tolerance. The column norms are
//! then the singular values, the normalized columns the left singular
//! vectors, and the accumulated rotations the right singular vectors.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    /// Relative off-diagonal threshold `|w_p·w_q| / (‖w_p‖‖w_q‖)`.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tolerance: 1e-10,
            max_sweeps: 100,
        }
    }
}

/// `A = U · diag(singular_values) · Vᵀ` with `r = min(m, n)` triples,
/// singular values non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    /// Number of singular values above the usual round-off threshold.
    pub fn numerical_rank(&self) -> usize {
        let largest = self.singular_values.first().copied().unwrap_or(0.0);
        let dim = self.u.rows().max(self.v.rows()) as f64;
        let cutoff = largest * dim * f64::EPSILON * 4.0;
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    /// `U_k · diag(σ_1..σ_k) · V_kᵀ`.
    pub fn reconstruct(&self, k: usize) -> DenseMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for idx in 0..k.min(self.singular_values.len()) {
            let s = self.singular_values[idx];
            let u = self.u.column(idx);
            for j in 0..n {
                let w = s * self.v.get(j, idx);
                if w == 0.0 {
                    continue;
                }
                for (o, &ui) in out.column_mut(j).iter_mut().zip(u) {
                    *o += ui * w;
                }
            }
        }
        out
    }
}

pub fn compute_svd(a: &DenseMatrix, options: SvdOptions) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::Domain("SVD input contains non-finite entries".into()));
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a, options)
    } else {
        let t = jacobi_tall(&a.transpose(), options)?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn jacobi_tall(a: &DenseMatrix, options: SvdOptions) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(n);

    // columns below this squared norm count as zero
    let negligible = (a.frobenius_norm() * f64::EPSILON).powi(2);
    let mut converged = n < 2;
    for _ in 0..options.max_sweeps {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(w.column(p), w.column(p));
                let beta = dot(w.column(q), w.column(q));
                let gamma = dot(w.column(p), w.column(q));
                if gamma == 0.0 || alpha <= negligible || beta <= negligible {
                    continue;
                }
                if gamma.abs() <= options.tolerance * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w.column_pair_mut(p, q), c, s);
                rotate(v.column_pair_mut(p, q), c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            sweeps: options.max_sweeps,
        });
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, dot(w.column(j), w.column(j)).sqrt())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let largest = order.first().map_or(0.0, |o| o.1);
    let cutoff = largest * (m.max(n) as f64) * f64::EPSILON;

    let mut u = DenseMatrix::zeros(m, n);
    let mut sorted_v = DenseMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &(src, sigma)) in order.iter().enumerate() {
        sorted_v.column_mut(dst).copy_from_slice(v.column(src));
        if sigma > cutoff && sigma > 0.0 {
            for (o, &x) in u.column_mut(dst).iter_mut().zip(w.column(src)) {
                *o = x / sigma;
            }
            singular_values.push(sigma);
        } else {
            singular_values.push(0.0);
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut u, &missing);

    Ok(Svd {
        u,
        singular_values,
        v: sorted_v,
    })
}

fn rotate((p, q): (&mut [f64], &mut [f64]), c: f64, s: f64) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to every
/// other column, drawing candidates from the standard basis.
fn complete_orthonormal(u: &mut DenseMatrix, missing: &[usize]) {
    let m = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|c| !missing.contains(c)).collect();
    for &target in missing {
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for i in 0..m {
            let mut cand = vec![0.0; m];
            cand[i] = 1.0;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for &c in &filled {
                    let col = u.column(c);
                    let proj = dot(&cand, col);
                    cand.iter_mut().zip(col).for_each(|(x, &y)| *x -= proj * y);
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand);
            }
        }
        if let Some(cand) = best {
            for (o, x) in u.column_mut(target).iter_mut().zip(cand) {
                *o = x / best_norm;
            }
        }
        filled.push(target);
    }
}
