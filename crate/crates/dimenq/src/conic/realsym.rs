//! Dense real matrix kernels for the interior-point solver: Cholesky,
//! triangular inverses, Jacobi eigendecomposition, pivoted LU, and the
//! svec/smat encoding of symmetric matrices.

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn matmul(&self, other: &RealMat) -> RealMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RealMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RealMat {
        RealMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Congruence P X P^T.
    pub fn congr(&self, x: &RealMat) -> RealMat {
        self.matmul(x).matmul(&self.transpose())
    }

    /// Congruence P^T X P.
    pub fn congr_t(&self, x: &RealMat) -> RealMat {
        self.transpose().matmul(x).matmul(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for RealMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Returns `None` when a pivot drops below zero (matrix not PD).
pub fn cholesky_lower(a: &RealMat) -> Option<RealMat> {
    let n = a.rows;
    let mut l = RealMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn invert_lower(l: &RealMat) -> RealMat {
    let n = l.rows;
    let mut inv = RealMat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let mut sum = 0.0;
            for k in j..i {
                sum += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -sum / l[(i, i)];
        }
    }
    inv
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi for real symmetric matrices. Returns eigenvalues ascending
/// and the matching orthonormal eigenvector columns.
pub fn jacobi_eigh(a_in: &RealMat) -> (Vec<f64>, RealMat) {
    let n = a_in.rows;
    let mut a = a_in.clone();
    a.symmetrize();
    let mut v = RealMat::identity(n);
    let frob: f64 = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-15 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= target || n <= 1 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = RealMat::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Minimum eigenvalue of a symmetric matrix.
pub fn min_eig(a: &RealMat) -> f64 {
    jacobi_eigh(a).0.first().copied().unwrap_or(0.0)
}

/// LU factorization with partial pivoting and row equilibration (the
/// interior-point KKT systems are badly row-scaled near convergence).
pub struct LuFactor {
    n: usize,
    lu: RealMat,
    piv: Vec<usize>,
    row_scale: Vec<f64>,
}

impl LuFactor {
    /// Factor a square matrix; fails only on an exactly singular pivot.
    pub fn factor(a: &RealMat) -> Option<LuFactor> {
        let n = a.rows;
        assert_eq!(a.rows, a.cols);
        let mut lu = a.clone();
        // Equilibrate rows to unit max-norm.
        let mut row_scale = vec![1.0; n];
        for i in 0..n {
            let row = &lu.data[i * n..(i + 1) * n];
            let m = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if m > 0.0 && m.is_finite() {
                row_scale[i] = 1.0 / m;
            }
        }
        for i in 0..n {
            for j in 0..n {
                lu[(i, j)] *= row_scale[i];
            }
        }
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 0.0 || !best.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] -= f * v;
                    }
                }
            }
        }
        Some(LuFactor { n, lu, piv, row_scale })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p] * self.row_scale[p]).collect();
        for i in 1..n {
            let mut sum = x[i];
            for k in 0..i {
                sum -= self.lu[(i, k)] * x[k];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in (i + 1)..n {
                sum -= self.lu[(i, k)] * x[k];
            }
            x[i] = sum / self.lu[(i, i)];
        }
        x
    }
}

pub fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Pack a symmetric matrix so that `dot(svec a, svec b) = Tr(a b)`:
/// diagonal entries as-is, off-diagonal scaled by sqrt(2).
pub fn svec(x: &RealMat) -> Vec<f64> {
    let m = x.rows;
    let mut out = Vec::with_capacity(svec_len(m));
    for i in 0..m {
        out.push(x[(i, i)]);
        for j in (i + 1)..m {
            out.push(SQRT2 * 0.5 * (x[(i, j)] + x[(j, i)]));
        }
    }
    out
}

pub fn smat(v: &[f64], m: usize) -> RealMat {
    assert_eq!(v.len(), svec_len(m));
    let mut out = RealMat::zeros(m, m);
    let mut idx = 0;
    for i in 0..m {
        out[(i, i)] = v[idx];
        idx += 1;
        for j in (i + 1)..m {
            let w = v[idx] / SQRT2;
            out[(i, j)] = w;
            out[(j, i)] = w;
            idx += 1;
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
