//! Dense complex linear algebra: matrices, Hermitian operators, pure states,
//! tensor/partial operations, eigendecomposition, and Schmidt decomposition.
//!
//! Everything here is sized for desk-scale problems (dimensions well under a
//! hundred); all storage is dense and row-major.

mod eigh;

pub use eigh::{eigh_complex, Eigh};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Tolerance below which a Hermitian eigenvalue counts as zero, relative to
/// `max(|lambda|_max, 1)`.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major complex entries.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "entries.length = {} but rows x cols = {}",
                entries.len(),
                rows * cols
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidValue("matrix entry is NaN or infinite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_entries(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Rank-one matrix |v><w|.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(v.iter()) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    /// Kronecker product; dimensions multiply.
    pub fn tensor(&self, other: &Self) -> Self {
        let (ra, ca, rb, cb) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self[(i, j)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product of two matrices.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// Which tensor factor an operation keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Hermitian operator on a `dim`-dimensional space. Construction symmetrizes
/// `(H + H^dagger)/2`, since solver iterates accumulate asymmetry at machine
/// precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidValue("non-finite entry in Hermitian operator".into()));
        }
        let dim = matrix.rows();
        let sym = ComplexMatrix::from_fn(dim, dim, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5);
        Ok(Self { dim, matrix: sym })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim) }
    }

    /// |v><v| for a (not necessarily normalized) vector.
    pub fn projector(v: &[Complex64]) -> Self {
        Self { dim: v.len(), matrix: ComplexMatrix::outer(v, v) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: &self.matrix + &other.matrix }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: &self.matrix - &other.matrix }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale_re(s) }
    }

    /// Real Hilbert-Schmidt pairing `Re Tr(self . other)`.
    pub fn pairing(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                // Tr(AB) = sum_ij A_ij B_ji; both Hermitian so the result is real.
                acc += (self.matrix[(i, j)] * other.matrix[(j, i)]).re;
            }
        }
        acc
    }

    /// Conjugation `U . self . U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        let m = &(u * &self.matrix) * &u.dagger();
        Self::new(m).expect("conjugation preserves Hermiticity")
    }

    /// Eigendecomposition with eigenvalues ascending.
    pub fn eigh(&self) -> Result<Eigh> {
        eigh_complex(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Count of eigenvalues with `|lambda| > rel_tol * max(|lambda|_max, 1)`.
    /// Returns 0 for the zero matrix.
    pub fn numerical_rank(&self, rel_tol: f64) -> Result<usize> {
        assert!(rel_tol > 0.0, "rank tolerance must be positive");
        let vals = self.eigh()?.values;
        let max_abs = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let cut = rel_tol * max_abs.max(1.0);
        Ok(vals.iter().filter(|v| v.abs() > cut).count())
    }

    /// Maximum absolute entry of `self - other`.
    pub fn distance_max(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).max_abs()
    }
}

/// Partial trace over the complement of `keep`, for an operator on a
/// `dims.0 x dims.1` bipartite space. Preserves the total trace.
pub fn partial_trace(h: &HermitianOperator, dims: (usize, usize), keep: Subsystem) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if h.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} != {} x {}",
            h.dim(),
            da,
            db
        )));
    }
    let m = h.matrix();
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()
        }),
    };
    HermitianOperator::new(out)
}

/// Transpose on the A tensor factor. Involutive and trace preserving.
pub fn partial_transpose(h: &HermitianOperator, dims: (usize, usize)) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if h.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} != {} x {}",
            h.dim(),
            da,
            db
        )));
    }
    let m = h.matrix();
    let out = ComplexMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        m[(j * db + k, i * db + l)]
    });
    HermitianOperator::new(out)
}

/// Normalized pure state on a `dim_a x dim_b` bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector length {} != {} x {}",
                amplitudes.len(),
                dim_a,
                dim_b
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "pure state norm^2 = {norm2}, expected 1 within 1e-10"
            )));
        }
        Ok(Self { dim_a, dim_b, amplitudes })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Density matrix |psi><psi|.
    pub fn density(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.amplitudes)
    }

    /// Reduced state on A.
    pub fn reduced_a(&self) -> Result<HermitianOperator> {
        partial_trace(&self.density(), (self.dim_a, self.dim_b), Subsystem::A)
    }
}

/// Schmidt decomposition of a bipartite pure state: positive coefficients in
/// descending order with the matching orthonormal local bases
/// (`left_basis.column(k)` pairs with `right_basis.column(k)`).
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: ComplexMatrix,
    pub right_basis: ComplexMatrix,
}

/// Schmidt-decompose via the eigendecomposition of the reduced density matrix;
/// reuses the one eigensolver rather than a general SVD.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    let (da, db) = psi.dims();
    let rho_a = psi.reduced_a()?;
    let eig = rho_a.eigh()?;
    // Keep eigenvalues above the rank cutoff, largest first.
    let max_val = eig.values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_REL_TOL * max_val.max(1.0);
    let mut kept: Vec<usize> = (0..da).filter(|&k| eig.values[k] > cut).collect();
    kept.sort_by(|&a, &b| eig.values[b].partial_cmp(&eig.values[a]).unwrap());

    let mut coefficients = Vec::with_capacity(kept.len());
    let mut left = ComplexMatrix::zeros(da, kept.len());
    let mut right = ComplexMatrix::zeros(db, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let lam = eig.values[k].max(0.0).sqrt();
        coefficients.push(lam);
        let e = eig.vectors.column(k);
        for i in 0..da {
            left[(i, col)] = e[i];
        }
        // |f_k> = (<e_k| ⊗ I)|psi> / lambda_k
        for j in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..da {
                acc += e[i].conj() * psi.amplitudes()[i * db + j];
            }
            right[(j, col)] = acc / lam;
        }
    }
    Ok(SchmidtDecomposition { coefficients, left_basis: left, right_basis: right })
}

/// Orthonormal basis (as isometry columns) of the intersection of the
/// supports of the given PSD operators; `None` when the intersection is the
/// whole space. Supports are read off at a relative eigenvalue cutoff of
/// 1e-9.
pub fn support_intersection(ops: &[&HermitianOperator], dim: usize) -> Result<Option<ComplexMatrix>> {
    const SUPPORT_TOL: f64 = 1e-9;
    let mut comp_sum = ComplexMatrix::zeros(dim, dim);
    let mut any = false;
    for op in ops {
        let eig = op.eigh()?;
        let max = eig.values.iter().cloned().fold(0.0, f64::max);
        let cut = SUPPORT_TOL * max.max(1.0);
        let mut p = ComplexMatrix::zeros(dim, dim);
        let mut full = true;
        for (k, &v) in eig.values.iter().enumerate() {
            if v > cut {
                p = &p + HermitianOperator::projector(&eig.vectors.column(k)).matrix();
            } else {
                full = false;
            }
        }
        if !full {
            any = true;
            comp_sum = &comp_sum + &(&ComplexMatrix::identity(dim) - &p);
        }
    }
    if !any {
        return Ok(None);
    }
    // The intersection is the kernel of the summed complement projectors.
    let eig = HermitianOperator::new(comp_sum)?.eigh()?;
    let cols: Vec<Vec<Complex64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 1e-7)
        .map(|(k, _)| eig.vectors.column(k))
        .collect();
    if cols.len() == dim {
        return Ok(None);
    }
    let mut v = ComplexMatrix::zeros(dim, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..dim {
            v[(i, j)] = col[i];
        }
    }
    Ok(Some(v))
}

/// Maximally entangled state (1/sqrt(d)) sum_i |ii> on d x d.
pub fn max_entangled(d: usize) -> PureState {
    let mut amp = vec![Complex64::new(0.0, 0.0); d * d];
    let c = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        amp[i * d + i] = c;
    }
    PureState::new(d, d, amp).expect("maximally entangled state is normalized")
}
