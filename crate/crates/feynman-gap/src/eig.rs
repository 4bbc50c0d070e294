//! Dense Hermitian eigensolver: cyclic Jacobi with complex rotations.
//!
//! Each rotation strips the phase of the pivot entry and then applies a real
//! Jacobi rotation, so the similarity transform stays unitary and the
//! diagonal stays real. Convergence is quadratic once the off-diagonal mass
//! is small; we iterate sweeps until the largest off-diagonal entry falls to
//! the rounding floor of the input.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as matrix columns: A = V Λ V†.
pub fn hermitian_eigen(a: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }

    // Work on the Hermitian part; callers validate the defect separately.
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)].conj());
        }
    }

    let scale = w
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale * (n as f64).sqrt().max(1.0);
    let floor = tol * 1e-2;

    let mut v: DMatrix<Complex64> = DMatrix::identity(n, n);

    let mut off = off_max(&w);
    let mut sweeps = 0;
    while off > tol {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = w[(p, q)];
                let mag = beta.norm();
                if mag <= floor {
                    continue;
                }
                let phase = beta / mag; // e^{iφ}
                let alpha = w[(p, p)].re;
                let gamma = w[(q, q)].re;
                let tau = (alpha - gamma) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // R differs from the identity only on (p,q):
                //   R_pp = c, R_pq = -s, R_qp = s·e^{-iφ}, R_qq = c·e^{-iφ}
                let r_qp = Complex64::new(s, 0.0) * phase.conj();
                let r_qq = Complex64::new(c, 0.0) * phase.conj();

                // A <- A R (columns p and q)
                for k in 0..n {
                    let akp = w[(k, p)];
                    let akq = w[(k, q)];
                    w[(k, p)] = akp * c + akq * r_qp;
                    w[(k, q)] = akp * (-s) + akq * r_qq;
                }
                // A <- R† A (rows p and q)
                for k in 0..n {
                    let apk = w[(p, k)];
                    let aqk = w[(q, k)];
                    w[(p, k)] = apk * c + aqk * r_qp.conj();
                    w[(q, k)] = apk * (-s) + aqk * r_qq.conj();
                }
                // V <- V R
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * r_qp;
                    v[(k, q)] = vkp * (-s) + vkq * r_qq;
                }
                // Pin the pivot and keep the diagonal exactly real.
                w[(p, q)] = Complex64::new(0.0, 0.0);
                w[(q, p)] = Complex64::new(0.0, 0.0);
                w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
                w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
            }
        }
        off = off_max(&w);
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    Ok((values, vectors))
}

/// Max |A_ij − conj(A_ji)| over all entries.
pub fn hermiticity_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    defect
}

fn off_max(w: &DMatrix<Complex64>) -> f64 {
    let n = w.nrows();
    let mut m = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            m = m.max(w[(p, q)].norm());
        }
    }
    m
}
