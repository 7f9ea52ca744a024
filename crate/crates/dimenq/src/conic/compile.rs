//! Lowering of block-Hermitian programs to the real conic standard form
//! `min c^T x  s.t.  A x = b,  G x + s = h,  s in a product of PSD cones`,
//! with every PSD block realified.

use super::realsym::{svec, svec_len, RealMat};
use super::{ConstraintKind, LinMap, ObjCoeff, SdpProblem, Sense, VarKind, VarValue};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, partial_transpose, ComplexMatrix, HermitianOperator, Subsystem};
use num_complex::Complex64;

use super::MAX_TOTAL_REALIFIED_DIM;

/// One realified PSD cone block of the compiled program.
pub struct BlockData {
    /// Realified symmetric dimension (2 x complex dim).
    pub m: usize,
    /// Index of the source constraint.
    pub constraint: usize,
    /// svec of the realified constant term.
    pub h: Vec<f64>,
    /// Sparse columns of G restricted to this block: (variable coordinate,
    /// svec segment).
    pub cols: Vec<(usize, Vec<f64>)>,
}

/// Where a variable's real coordinates live in x.
pub struct VarLayout {
    pub offset: usize,
    pub kind: VarKind,
}

pub struct Compiled {
    pub n: usize,
    pub c: Vec<f64>,
    /// True when the user's problem was a maximization (objective negated).
    pub flip: bool,
    pub obj_offset: f64,
    pub layouts: Vec<VarLayout>,
    pub blocks: Vec<BlockData>,
    /// Equality rows after redundancy pruning.
    pub eq_a: RealMat,
    pub eq_b: Vec<f64>,
    /// Original (constraint, component) provenance of each kept equality row.
    pub eq_rows_src: Vec<(usize, usize)>,
}

struct EqGroup {
    constraint: usize,
    /// Dense rows (component-major) over all x coordinates.
    rows: RealMat,
    rhs: Vec<f64>,
}

/// Orthonormal Hermitian basis element `ell` for dimension `d`, paired with
/// coordinates so that `X = sum_ell x_ell B_ell` and `x_ell = Re Tr(B_ell X)`.
pub fn hermitian_basis_element(d: usize, ell: usize) -> ComplexMatrix {
    // Layout: for i in 0..d: diagonal E_ii, then for j>i the real pair
    // (E_ij+E_ji)/sqrt2 and the imaginary pair i(E_ij-E_ji)/sqrt2.
    let mut m = ComplexMatrix::zeros(d, d);
    let mut idx = 0;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        if idx == ell {
            m[(i, i)] = Complex64::new(1.0, 0.0);
            return m;
        }
        idx += 1;
        for j in (i + 1)..d {
            if idx == ell {
                m[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
                m[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
                return m;
            }
            idx += 1;
            if idx == ell {
                m[(i, j)] = Complex64::new(0.0, inv_sqrt2);
                m[(j, i)] = Complex64::new(0.0, -inv_sqrt2);
                return m;
            }
            idx += 1;
        }
    }
    panic!("basis index {ell} out of range for dim {d}");
}

pub fn hermitian_from_coords(d: usize, coords: &[f64]) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d, d);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = 0;
    for i in 0..d {
        m[(i, i)] = Complex64::new(coords[idx], 0.0);
        idx += 1;
        for j in (i + 1)..d {
            let re = coords[idx] * inv_sqrt2;
            idx += 1;
            let im = coords[idx] * inv_sqrt2;
            idx += 1;
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
        }
    }
    HermitianOperator::new(m).expect("coordinates define a Hermitian matrix")
}

/// Apply a linear map to a concrete variable value.
pub fn apply_map(map: &LinMap, v: &VarValue) -> Result<ComplexMatrix> {
    match (map, v) {
        (LinMap::Id, VarValue::Matrix(h)) => Ok(h.matrix().clone()),
        (LinMap::TransposeA { da, db }, VarValue::Matrix(h)) => {
            Ok(partial_transpose(h, (*da, *db))?.into_matrix())
        }
        (LinMap::TraceB { da, db }, VarValue::Matrix(h)) => {
            Ok(partial_trace(h, (*da, *db), Subsystem::A)?.into_matrix())
        }
        (LinMap::TraceA { da, db }, VarValue::Matrix(h)) => {
            Ok(partial_trace(h, (*da, *db), Subsystem::B)?.into_matrix())
        }
        (LinMap::Conjugate(v), VarValue::Matrix(h)) => Ok(&(v * h.matrix()) * &v.dagger()),
        (LinMap::Chain(first, second), VarValue::Matrix(_)) => {
            let mid = apply_map(first, v)?;
            apply_map(second, &VarValue::Matrix(HermitianOperator::new(mid)?))
        }
        (LinMap::ScalarMat(c), VarValue::Scalar(s)) => Ok(c.scale_re(*s)),
        _ => Err(Error::InvalidValue("variable value incompatible with linear map".into())),
    }
}

fn apply_map_to_basis(map: &LinMap, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = HermitianOperator::new(b.clone())?;
    apply_map(map, &VarValue::Matrix(h))
}

/// Adjoint of a map under the `Re Tr` pairing, applied to a Hermitian
/// multiplier. `Id* = Id`, `T_A* = T_A`, `(Tr_B)* = . (x) I_B`,
/// `(Tr_A)* = I_A (x) .`.
pub fn apply_adjoint(map: &LinMap, y: &HermitianOperator) -> Result<HermitianOperator> {
    match map {
        LinMap::Id => Ok(y.clone()),
        LinMap::TransposeA { da, db } => partial_transpose(y, (*da, *db)),
        LinMap::TraceB { da, db } => {
            if y.dim() != *da {
                return Err(Error::DimensionMismatch("adjoint of TraceB".into()));
            }
            HermitianOperator::new(y.matrix().tensor(&ComplexMatrix::identity(*db)))
        }
        LinMap::TraceA { da, db } => {
            if y.dim() != *db {
                return Err(Error::DimensionMismatch("adjoint of TraceA".into()));
            }
            HermitianOperator::new(ComplexMatrix::identity(*da).tensor(y.matrix()))
        }
        LinMap::Conjugate(v) => HermitianOperator::new(&(&v.dagger() * y.matrix()) * v),
        LinMap::Chain(first, second) => apply_adjoint(first, &apply_adjoint(second, y)?),
        LinMap::ScalarMat(_) => Err(Error::InvalidValue("scalar adjoint handled separately".into())),
    }
}

/// Realify a complex matrix that is Hermitian into its 2m x 2m real symmetric
/// embedding.
pub fn realify_to_real(h: &ComplexMatrix) -> RealMat {
    let d = h.rows();
    RealMat::from_fn(2 * d, 2 * d, |i, j| {
        let v = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

pub fn compile(problem: &SdpProblem) -> Result<Compiled> {
    // Variable layout.
    let mut layouts = Vec::with_capacity(problem.vars.len());
    let mut n = 0usize;
    for v in &problem.vars {
        layouts.push(VarLayout { offset: n, kind: v.kind.clone() });
        n += match v.kind {
            VarKind::Block(d) => d * d,
            VarKind::Scalar => 1,
        };
    }

    // Objective (internal convention: minimize).
    let flip = problem.sense == Sense::Maximize;
    let sign = if flip { -1.0 } else { 1.0 };
    let mut c = vec![0.0; n];
    for (var, coeff) in &problem.obj_linear {
        let layout = &layouts[var.0];
        match (coeff, &layout.kind) {
            (ObjCoeff::Trace(cm, w), VarKind::Block(d)) => {
                let hm = HermitianOperator::new(cm.clone())?;
                if hm.dim() != *d {
                    return Err(Error::DimensionMismatch("objective coefficient dim".into()));
                }
                for ell in 0..d * d {
                    let b = hermitian_basis_element(*d, ell);
                    let hb = HermitianOperator::new(b)?;
                    c[layout.offset + ell] += sign * w * hm.pairing(&hb);
                }
            }
            (ObjCoeff::Scalar(w), VarKind::Scalar) => {
                c[layout.offset] += sign * w;
            }
            _ => return Err(Error::InvalidValue("objective coefficient incompatible with variable".into())),
        }
    }

    let mut blocks = Vec::new();
    let mut eq_groups = Vec::new();
    let mut total_realified = 0usize;

    for (cidx, con) in problem.constraints.iter().enumerate() {
        let dim = con.expr.dim;
        // Per-coordinate coefficient matrices of this constraint.
        let mut coeff_cols: Vec<(usize, ComplexMatrix)> = Vec::new();
        for t in &con.expr.terms {
            let layout = &layouts[t.var.0];
            match &layout.kind {
                VarKind::Block(d) => {
                    for ell in 0..d * d {
                        let img = apply_map_to_basis(&t.map, &hermitian_basis_element(*d, ell))?
                            .scale_re(t.scale);
                        merge_coeff(&mut coeff_cols, layout.offset + ell, img);
                    }
                }
                VarKind::Scalar => {
                    let LinMap::ScalarMat(cm) = &t.map else {
                        return Err(Error::InvalidValue("scalar variable needs a matrix coefficient".into()));
                    };
                    merge_coeff(&mut coeff_cols, layout.offset, cm.scale_re(t.scale));
                }
            }
        }

        match con.kind {
            ConstraintKind::PositiveSemidefinite => {
                let m = 2 * dim;
                total_realified += m;
                let h = svec(&realify_to_real(&con.expr.constant));
                let mut cols = Vec::with_capacity(coeff_cols.len());
                for (col, coef) in coeff_cols {
                    let seg: Vec<f64> = svec(&realify_to_real(&coef)).iter().map(|v| -v).collect();
                    cols.push((col, seg));
                }
                cols.sort_by_key(|(c, _)| *c);
                blocks.push(BlockData { m, constraint: cidx, h, cols });
            }
            ConstraintKind::Zero => {
                // One real row per Hermitian component, paired against the
                // orthonormal basis so rows are in complex pairing units.
                let comps = dim * dim;
                let mut rows = RealMat::zeros(comps, n);
                let mut rhs = vec![0.0; comps];
                let const_h = HermitianOperator::new(con.expr.constant.clone())?;
                for k in 0..comps {
                    let bk = HermitianOperator::new(hermitian_basis_element(dim, k))?;
                    rhs[k] = -const_h.pairing(&bk);
                    for (col, coef) in &coeff_cols {
                        let ch = HermitianOperator::new(coef.clone())?;
                        rows[(k, *col)] = ch.pairing(&bk);
                    }
                }
                eq_groups.push(EqGroup { constraint: cidx, rows, rhs });
            }
        }
    }

    if total_realified > MAX_TOTAL_REALIFIED_DIM {
        return Err(Error::InvariantViolation(format!(
            "total realified LMI dimension {total_realified} exceeds the {MAX_TOTAL_REALIFIED_DIM} guard rail"
        )));
    }

    // Stack equality rows and prune redundant ones; inconsistent dependent
    // rows mean the equalities alone are unsatisfiable.
    let total_rows: usize = eq_groups.iter().map(|g| g.rows.rows).sum();
    let mut stacked = RealMat::zeros(total_rows, n + 1);
    let mut src = Vec::with_capacity(total_rows);
    {
        let mut r = 0;
        for g in &eq_groups {
            for k in 0..g.rows.rows {
                for j in 0..n {
                    stacked[(r, j)] = g.rows[(k, j)];
                }
                stacked[(r, n)] = g.rhs[k];
                src.push((g.constraint, k));
                r += 1;
            }
        }
    }
    let (kept, inconsistent) = prune_rows(&mut stacked.clone(), n);
    if inconsistent {
        return Err(Error::Solver("equality constraints are inconsistent (no solution exists)".into()));
    }
    let p = kept.len();
    let mut eq_a = RealMat::zeros(p, n);
    let mut eq_b = vec![0.0; p];
    let mut eq_rows_src = Vec::with_capacity(p);
    // Re-stack only kept original rows (better conditioned than echelon rows).
    {
        let mut r_all = 0;
        let mut out = 0;
        for g in &eq_groups {
            for k in 0..g.rows.rows {
                if kept.contains(&r_all) {
                    for j in 0..n {
                        eq_a[(out, j)] = g.rows[(k, j)];
                    }
                    eq_b[out] = g.rhs[k];
                    eq_rows_src.push((g.constraint, k));
                    out += 1;
                }
                r_all += 1;
            }
        }
        debug_assert_eq!(out, p);
    }

    Ok(Compiled {
        n,
        c,
        flip,
        obj_offset: problem.obj_offset,
        layouts,
        blocks,
        eq_a,
        eq_b,
        eq_rows_src,
    })
}

fn merge_coeff(cols: &mut Vec<(usize, ComplexMatrix)>, col: usize, img: ComplexMatrix) {
    if let Some((_, existing)) = cols.iter_mut().find(|(c, _)| *c == col) {
        *existing = &*existing + &img;
    } else {
        cols.push((col, img));
    }
}

/// Gaussian elimination with row pivoting on the augmented matrix [A|b];
/// returns the set of original row indices that carry pivots, and whether a
/// dependent row was inconsistent.
fn prune_rows(aug: &mut RealMat, n: usize) -> (std::collections::BTreeSet<usize>, bool) {
    let rows = aug.rows;
    let scale = aug.max_abs().max(1.0);
    let tol = 1e-11 * scale;
    let mut kept = std::collections::BTreeSet::new();
    let mut used = vec![false; rows];
    for col in 0..n {
        // Largest remaining entry in this column.
        let mut best = tol;
        let mut pr = usize::MAX;
        for r in 0..rows {
            if used[r] {
                continue;
            }
            if aug[(r, col)].abs() > best {
                best = aug[(r, col)].abs();
                pr = r;
            }
        }
        if pr == usize::MAX {
            continue;
        }
        used[pr] = true;
        kept.insert(pr);
        let pivot = aug[(pr, col)];
        for r in 0..rows {
            if used[r] {
                continue;
            }
            let f = aug[(r, col)] / pivot;
            if f != 0.0 {
                for j in col..=n {
                    let v = aug[(pr, j)];
                    aug[(r, j)] -= f * v;
                }
            }
        }
    }
    // Any unused row must now be all-zero; a nonzero rhs leftover is an
    // inconsistency.
    let mut inconsistent = false;
    for r in 0..rows {
        if used[r] {
            continue;
        }
        if aug[(r, n)].abs() > 1e-8 * scale {
            inconsistent = true;
        }
    }
    (kept, inconsistent)
}

/// Number of svec components of a realified block of complex dimension d.
#[allow(dead_code)]
pub fn realified_svec_len(d: usize) -> usize {
    svec_len(2 * d)
}
