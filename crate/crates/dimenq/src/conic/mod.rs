//! A small dense semidefinite-program solver for block-Hermitian linear
//! matrix inequalities with a scalar linear objective.
//!
//! Problems are stated over complex Hermitian matrix variables and real
//! scalars; each constraint is an affine Hermitian-matrix-valued expression
//! required positive semidefinite or zero. Internally every PSD constraint is
//! realified (complex dim m embeds as a real symmetric 2m block) and the
//! whole program is solved by a homogeneous self-dual embedding with
//! Nesterov-Todd scaling, so infeasible and unbounded instances come back
//! with certificates instead of garbage.

mod compile;
mod realsym;
mod solver;

pub use compile::realify_to_real;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use std::collections::BTreeMap;

/// Upper bound on the sum of realified LMI block dimensions.
pub const MAX_TOTAL_REALIFIED_DIM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(pub(crate) usize);

#[derive(Debug, Clone)]
pub(crate) enum VarKind {
    /// Hermitian matrix variable of the given dimension.
    Block(usize),
    Scalar,
}

#[derive(Debug, Clone)]
pub(crate) struct VarDecl {
    pub name: String,
    pub kind: VarKind,
}

/// Linear maps from a variable into a constraint space.
#[derive(Debug, Clone)]
pub enum LinMap {
    /// Block variable enters as itself.
    Id,
    /// Transpose on the A tensor factor of the variable's `da x db` space.
    TransposeA { da: usize, db: usize },
    /// Partial trace over B; image has dimension `da`.
    TraceB { da: usize, db: usize },
    /// Partial trace over A; image has dimension `db`.
    TraceA { da: usize, db: usize },
    /// Block variable X (r x r) enters as `V X V^dagger` for a fixed d x r
    /// isometry-like matrix V.
    Conjugate(ComplexMatrix),
    /// Composition: apply the first map, then the second to its image.
    Chain(Box<LinMap>, Box<LinMap>),
    /// Scalar variable times a fixed Hermitian coefficient.
    ScalarMat(ComplexMatrix),
}

impl LinMap {
    /// Image dimension for a Hermitian input of dimension `input`.
    pub(crate) fn image_dim(&self, input: usize) -> Result<usize> {
        match self {
            LinMap::Id => Ok(input),
            LinMap::TransposeA { da, db } => {
                if da * db != input {
                    return Err(Error::DimensionMismatch("partial transpose dims".into()));
                }
                Ok(input)
            }
            LinMap::TraceB { da, db } => {
                if da * db != input {
                    return Err(Error::DimensionMismatch("partial trace dims".into()));
                }
                Ok(*da)
            }
            LinMap::TraceA { da, db } => {
                if da * db != input {
                    return Err(Error::DimensionMismatch("partial trace dims".into()));
                }
                Ok(*db)
            }
            LinMap::Conjugate(v) => {
                if v.cols() != input {
                    return Err(Error::DimensionMismatch("conjugation map dims".into()));
                }
                Ok(v.rows())
            }
            LinMap::Chain(first, second) => second.image_dim(first.image_dim(input)?),
            LinMap::ScalarMat(_) => Err(Error::InvalidValue("scalar map applied to a block variable".into())),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub var: VarId,
    pub map: LinMap,
    pub scale: f64,
}

/// Affine Hermitian-matrix-valued expression in the declared variables.
#[derive(Debug, Clone)]
pub struct MatrixExpr {
    pub(crate) dim: usize,
    pub(crate) constant: ComplexMatrix,
    pub(crate) terms: Vec<Term>,
}

impl MatrixExpr {
    /// Expression with the given constant term (must be Hermitian).
    pub fn constant(c: ComplexMatrix) -> Self {
        assert!(c.is_square());
        let dim = c.rows();
        Self { dim, constant: c, terms: vec![] }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(ComplexMatrix::zeros(dim, dim))
    }

    pub fn term(mut self, var: VarId, map: LinMap, scale: f64) -> Self {
        self.terms.push(Term { var, map, scale });
        self
    }

    /// Add `scale * X` for a block variable of this expression's dimension.
    pub fn var(self, var: VarId, scale: f64) -> Self {
        self.term(var, LinMap::Id, scale)
    }

    /// Add `scale * s * C` for a scalar variable.
    pub fn scalar(self, var: VarId, coeff: ComplexMatrix, scale: f64) -> Self {
        self.term(var, LinMap::ScalarMat(coeff), scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    PositiveSemidefinite,
    Zero,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub name: String,
    pub expr: MatrixExpr,
    pub kind: ConstraintKind,
}

/// Block-Hermitian linear-matrix-inequality program with a scalar linear
/// objective.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub(crate) sense: Sense,
    pub(crate) vars: Vec<VarDecl>,
    pub(crate) obj_linear: Vec<(VarId, ObjCoeff)>,
    pub(crate) obj_offset: f64,
    pub(crate) constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub(crate) enum ObjCoeff {
    /// Contributes `w * Re Tr(C X)`.
    Trace(ComplexMatrix, f64),
    /// Contributes `w * s`.
    Scalar(f64),
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self { sense, vars: vec![], obj_linear: vec![], obj_offset: 0.0, constraints: vec![] }
    }

    /// Declare a Hermitian matrix variable.
    pub fn add_block(&mut self, name: impl Into<String>, dim: usize) -> VarId {
        assert!(dim >= 1);
        self.vars.push(VarDecl { name: name.into(), kind: VarKind::Block(dim) });
        VarId(self.vars.len() - 1)
    }

    /// Declare a real scalar variable.
    pub fn add_scalar(&mut self, name: impl Into<String>) -> VarId {
        self.vars.push(VarDecl { name: name.into(), kind: VarKind::Scalar });
        VarId(self.vars.len() - 1)
    }

    /// Add `w * Re Tr(C X)` to the objective.
    pub fn objective_trace(&mut self, var: VarId, coeff: &HermitianOperator, w: f64) {
        self.obj_linear.push((var, ObjCoeff::Trace(coeff.matrix().clone(), w)));
    }

    /// Add `w * s` to the objective for a scalar variable.
    pub fn objective_scalar(&mut self, var: VarId, w: f64) {
        self.obj_linear.push((var, ObjCoeff::Scalar(w)));
    }

    /// Add a constant to the objective (reported in `primal_value`).
    pub fn objective_offset(&mut self, w: f64) {
        self.obj_offset += w;
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, expr: MatrixExpr, kind: ConstraintKind) -> Result<()> {
        let c = &expr.constant;
        let asym = (0..expr.dim)
            .flat_map(|i| (0..expr.dim).map(move |j| (i, j)))
            .map(|(i, j)| (c[(i, j)] - c[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "constant term of constraint is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        for t in &expr.terms {
            self.check_term(t, expr.dim)?;
        }
        self.constraints.push(Constraint { name: name.into(), expr, kind });
        Ok(())
    }

    fn check_term(&self, t: &Term, expr_dim: usize) -> Result<()> {
        let decl = self.vars.get(t.var.0).ok_or_else(|| {
            Error::InvariantViolation("constraint references an undeclared variable".into())
        })?;
        let image_dim = match (&decl.kind, &t.map) {
            (VarKind::Scalar, LinMap::ScalarMat(c)) => c.rows(),
            (VarKind::Scalar, _) | (VarKind::Block(_), LinMap::ScalarMat(_)) => {
                return Err(Error::InvariantViolation(
                    "linear map incompatible with variable kind".into(),
                ))
            }
            (VarKind::Block(d), map) => map.image_dim(*d)?,
        };
        if image_dim != expr_dim {
            return Err(Error::DimensionMismatch(format!(
                "term image dim {image_dim} != constraint dim {expr_dim}"
            )));
        }
        Ok(())
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Evaluate a constraint expression at concrete variable values.
    pub fn eval_constraint(&self, idx: usize, values: &BTreeMap<String, VarValue>) -> Result<HermitianOperator> {
        let c = &self.constraints[idx];
        let mut acc = c.expr.constant.clone();
        for t in &c.expr.terms {
            let decl = &self.vars[t.var.0];
            let v = values.get(&decl.name).ok_or_else(|| {
                Error::InvalidValue(format!("missing value for variable '{}'", decl.name))
            })?;
            let img = compile::apply_map(&t.map, v)?;
            acc = &acc + &img.scale_re(t.scale);
        }
        HermitianOperator::new(acc)
    }

    /// Plain-text dump of the program, one constraint per line, for bug
    /// reports.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "sense: {:?}", self.sense);
        for v in &self.vars {
            match &v.kind {
                VarKind::Block(d) => {
                    let _ = writeln!(out, "var {} : hermitian {d}x{d}", v.name);
                }
                VarKind::Scalar => {
                    let _ = writeln!(out, "var {} : scalar", v.name);
                }
            }
        }
        for c in &self.constraints {
            let op = match c.kind {
                ConstraintKind::PositiveSemidefinite => ">= 0",
                ConstraintKind::Zero => "= 0",
            };
            let mut parts = vec![format!("{}", crate::io::matrix_to_json(&c.expr.constant))];
            for t in &c.expr.terms {
                let vname = &self.vars[t.var.0].name;
                let desc = match &t.map {
                    LinMap::Id => format!("{:+.6} * {}", t.scale, vname),
                    LinMap::TransposeA { .. } => format!("{:+.6} * T_A({})", t.scale, vname),
                    LinMap::TraceB { .. } => format!("{:+.6} * Tr_B({})", t.scale, vname),
                    LinMap::TraceA { .. } => format!("{:+.6} * Tr_A({})", t.scale, vname),
                    LinMap::Conjugate(v) => {
                        format!("{:+.6} * V {} V^+ with V = {}", t.scale, vname, crate::io::matrix_to_json(v))
                    }
                    LinMap::Chain(..) => format!("{:+.6} * chain({})", t.scale, vname),
                    LinMap::ScalarMat(m) => {
                        format!("{:+.6} * {} * {}", t.scale, vname, crate::io::matrix_to_json(m))
                    }
                };
                parts.push(desc);
            }
            let _ = writeln!(out, "{}: {} {}", c.name, parts.join(" + "), op);
        }
        out
    }
}

/// Value of a variable in a solution.
#[derive(Debug, Clone)]
pub enum VarValue {
    Matrix(HermitianOperator),
    Scalar(f64),
}

impl VarValue {
    pub fn as_matrix(&self) -> Option<&HermitianOperator> {
        match self {
            VarValue::Matrix(h) => Some(h),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            VarValue::Scalar(s) => Some(*s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

/// Farkas-type certificate for an infeasible or unbounded verdict.
#[derive(Debug, Clone)]
pub enum RayCertificate {
    /// Dual improving ray `(Y_i, Theta_j)`: PSD multipliers per LMI and free
    /// Hermitian multipliers per equality with
    /// `sum_i L_i^*(Y_i) + sum_j M_j^*(Theta_j) = 0` and
    /// `sum_i <F0_i, Y_i> + sum_j <const_j, Theta_j> < 0`.
    PrimalInfeasible {
        lmi_multipliers: BTreeMap<String, HermitianOperator>,
        eq_multipliers: BTreeMap<String, HermitianOperator>,
    },
    /// Primal improving ray: direction of unbounded objective decrease.
    DualInfeasible { ray: BTreeMap<String, VarValue> },
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Objective value in the problem's stated sense (NaN when infeasible).
    pub primal_value: f64,
    pub dual_value: f64,
    /// |primal - dual| as recomputed at the returned point.
    pub gap: f64,
    pub variables: BTreeMap<String, VarValue>,
    pub iterations: usize,
    pub certificate: Option<RayCertificate>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Append a plain-text listing of each solved program to this file.
    pub dump: Option<std::path::PathBuf>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, max_iter: 200, dump: None }
    }
}

/// Solve the program. On `Optimal` the returned point is primal feasible
/// within `feas_tol` with `|primal - dual| <= gap_tol * max(1, |primal|)`;
/// on `Infeasible`/`Unbounded` a certificate ray is exposed; hitting the
/// iteration cap returns the best iterate with the honest status.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    if let Some(path) = &opts.dump {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        writeln!(f, "{}", problem.dump_text()).map_err(|e| Error::Io(e.to_string()))?;
    }
    let compiled = compile::compile(problem)?;
    solver::solve_compiled(problem, &compiled, opts)
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// operator; `H >= 0` iff the image is, and every eigenvalue of `H` appears
/// twice in the image.
pub fn realify(h: &HermitianOperator) -> HermitianOperator {
    let d = h.dim();
    let m = h.matrix();
    let out = ComplexMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let re = i < d;
        let ce = j < d;
        let (a, b) = (i % d, j % d);
        let v = m[(a, b)];
        num_complex::Complex64::new(
            match (re, ce) {
                (true, true) | (false, false) => v.re,
                (true, false) => -v.im,
                (false, true) => v.im,
            },
            0.0,
        )
    });
    HermitianOperator::new(out).expect("realified matrix is symmetric")
}

/// Report from re-checking a solution against its problem.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    /// Per-constraint residual: minimum eigenvalue for LMIs (>= 0 means
    /// satisfied), negated max-abs entry for equalities.
    pub feasibility_residuals: Vec<(String, f64)>,
    pub gap: f64,
    pub verdict: bool,
}

/// Independently re-evaluate every constraint at the returned variable values
/// and recompute the duality gap. Verdict passes iff all LMI minimum
/// eigenvalues are `>= -feas_tol` and the gap is `<= 10 * gap_tol`.
pub fn check_certificate(problem: &SdpProblem, sol: &SdpSolution, opts: &SolveOptions) -> Result<CertificateReport> {
    let mut residuals = Vec::new();
    let mut ok = true;
    for (idx, c) in problem.constraints.iter().enumerate() {
        let val = problem.eval_constraint(idx, &sol.variables)?;
        let r = match c.kind {
            ConstraintKind::PositiveSemidefinite => val.min_eigenvalue()?,
            ConstraintKind::Zero => -val.matrix().max_abs(),
        };
        if r < -opts.feas_tol {
            ok = false;
        }
        residuals.push((c.name.clone(), r));
    }
    let gap = (sol.primal_value - sol.dual_value).abs();
    if gap > 10.0 * opts.gap_tol * sol.primal_value.abs().max(1.0) {
        ok = false;
    }
    Ok(CertificateReport { feasibility_residuals: residuals, gap, verdict: ok })
}

/// Verify a primal-infeasibility ray against the problem's own expressions:
/// adjoint stationarity and a strictly negative objective slope. Returns the
/// pair (stationarity residual, slope).
pub fn verify_infeasibility(problem: &SdpProblem, cert: &RayCertificate) -> Result<(f64, f64)> {
    let RayCertificate::PrimalInfeasible { lmi_multipliers, eq_multipliers } = cert else {
        return Err(Error::InvalidValue("not a primal infeasibility certificate".into()));
    };
    // Stationarity: for every variable, sum of adjoint images vanishes.
    let mut worst = 0.0f64;
    for (vidx, decl) in problem.vars.iter().enumerate() {
        let acc_dim = match decl.kind {
            VarKind::Block(d) => d,
            VarKind::Scalar => 1,
        };
        let mut acc = ComplexMatrix::zeros(acc_dim, acc_dim);
        let mut acc_scalar = 0.0;
        for c in &problem.constraints {
            let mult = match c.kind {
                ConstraintKind::PositiveSemidefinite => lmi_multipliers.get(&c.name),
                ConstraintKind::Zero => eq_multipliers.get(&c.name),
            };
            let Some(y) = mult else { continue };
            for t in &c.expr.terms {
                if t.var.0 != vidx {
                    continue;
                }
                match &t.map {
                    LinMap::ScalarMat(cm) => {
                        let hm = HermitianOperator::new(cm.clone())?;
                        acc_scalar += t.scale * hm.pairing(y);
                    }
                    other => {
                        let adj = compile::apply_adjoint(other, y)?;
                        acc = &acc + &adj.matrix().scale_re(t.scale);
                    }
                }
            }
        }
        worst = worst.max(acc.max_abs()).max(acc_scalar.abs());
    }
    // Slope: pairing of constants with multipliers must be negative.
    let mut slope = 0.0;
    for c in &problem.constraints {
        let mult = match c.kind {
            ConstraintKind::PositiveSemidefinite => lmi_multipliers.get(&c.name),
            ConstraintKind::Zero => eq_multipliers.get(&c.name),
        };
        if let Some(y) = mult {
            slope += HermitianOperator::new(c.expr.constant.clone())?.pairing(y);
        }
    }
    Ok((worst, slope))
}

#[cfg(test)]
mod tests;
