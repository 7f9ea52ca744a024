//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Matrices in this crate never exceed ~60x60, so a tight O(n^3)-per-sweep
//! Jacobi beats anything fancier and gives good relative accuracy on graded
//! spectra, which the interior-point iterates produce near convergence.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix: `values` ascending, `vectors`
/// column-orthonormal with `H v_k = values[k] v_k`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS: usize = 60;

/// Eigendecompose a complex Hermitian matrix by cyclic Jacobi rotations.
pub fn eigh_complex(h: &ComplexMatrix) -> Result<Eigh> {
    assert!(h.is_square(), "eigh requires a square matrix");
    let n = h.rows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let mut a = h.clone();
    // Enforce exact Hermitian symmetry up front; the sweep maintains it.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let frob = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = 1e-15 * frob;

    let mut sweeps = 0;
    loop {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        let off = (2.0 * off).sqrt();
        if off <= target || n == 1 {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::EighNonConvergence { sweeps, off });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase e^{i phi} of the pivot entry; the rotation absorbs it so
                // the 2x2 problem reduces to the real symmetric case.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary J: J[p][p]=c, J[p][q]=s, J[q][p]=-s*conj(phase),
                // J[q][q]=c*conj(phase). Apply A <- J^dagger A J, V <- V J.
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                // Column update M <- M J.
                for k in 0..n {
                    let mkp = a[(k, p)];
                    let mkq = a[(k, q)];
                    a[(k, p)] = mkp * c + mkq * jqp;
                    a[(k, q)] = mkp * s + mkq * jqq;
                }
                // Row update M <- J^dagger M.
                for k in 0..n {
                    let mpk = a[(p, k)];
                    let mqk = a[(q, k)];
                    a[(p, k)] = mpk * c + mqk * jqp.conj();
                    a[(q, k)] = mpk * s + mqk * jqq.conj();
                }
                // Clean the pivot pair to kill rounding drift.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * jqp;
                    v[(k, q)] = vkp * s + vkq * jqq;
                }
            }
        }
    }

    // Sort ascending; stable order makes runs deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigh { values, vectors })
}
