//! Steering assemblages: the local-hidden-state / steering-weight SDP (exact
//! Schmidt measure for qubit assemblages), the log d upper bound, the
//! explicit family where that bound is arbitrarily loose, and pretty-good
//! measurements.

use crate::conic::{
    self, CertificateReport, ConstraintKind, LinMap, MatrixExpr, SdpProblem, SdpSolution,
    SdpStatus, Sense, SolveOptions, VarId,
};
use crate::error::{Error, Result};
use crate::io::Violation;
use crate::linalg::{partial_trace, ComplexMatrix, HermitianOperator, Subsystem};
use crate::measurements::{enumerate_strategies, DeterministicStrategy, PovmSet};
use crate::states::DensityMatrix;
use num_complex::Complex64;

pub const ELEMENT_PSD_TOL: f64 = 1e-10;
pub const MARGINAL_TOL: f64 = 1e-9;
/// Pseudoinverse cutoff for the marginal's inverse square root.
pub const PGM_KERNEL_TOL: f64 = 1e-10;

/// Family of subnormalized states `sigma_{a|x}` with an input-independent
/// unit-trace marginal.
#[derive(Debug, Clone)]
pub struct Assemblage {
    dim: usize,
    n_inputs: usize,
    n_outcomes: usize,
    elements: Vec<Vec<HermitianOperator>>,
}

impl Assemblage {
    pub fn new(dim: usize, elements: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        if let Some(v) = Self::violations(dim, &elements).into_iter().next() {
            return Err(Error::InvariantViolation(format!(
                "{} ({}, residual {:.3e})",
                v.message, v.location, v.residual
            )));
        }
        let n_inputs = elements.len();
        let n_outcomes = elements[0].len();
        Ok(Self { dim, n_inputs, n_outcomes, elements })
    }

    pub fn violations(dim: usize, elements: &[Vec<HermitianOperator>]) -> Vec<Violation> {
        let mut out = vec![];
        if elements.is_empty() || elements[0].is_empty() {
            out.push(Violation {
                location: "elements".into(),
                residual: f64::NAN,
                message: "empty assemblage".into(),
            });
            return out;
        }
        let n_outcomes = elements[0].len();
        let mut marginal: Option<HermitianOperator> = None;
        for (x, row) in elements.iter().enumerate() {
            if row.len() != n_outcomes {
                out.push(Violation {
                    location: format!("elements[{x}]"),
                    residual: f64::NAN,
                    message: "ragged outcome count".into(),
                });
                return out;
            }
            let mut sum = HermitianOperator::zero(dim);
            for (a, e) in row.iter().enumerate() {
                if e.dim() != dim {
                    out.push(Violation {
                        location: format!("elements[{x}][{a}]"),
                        residual: f64::NAN,
                        message: format!("element dim {} != {dim}", e.dim()),
                    });
                    return out;
                }
                if let Ok(min) = e.min_eigenvalue() {
                    if min < -ELEMENT_PSD_TOL {
                        out.push(Violation {
                            location: format!("elements[{x}][{a}]"),
                            residual: -min,
                            message: "assemblage element is not positive semidefinite".into(),
                        });
                    }
                }
                sum = sum.add(e);
            }
            match &marginal {
                None => {
                    let tr = sum.trace();
                    if (tr - 1.0).abs() > MARGINAL_TOL {
                        out.push(Violation {
                            location: format!("elements[{x}]"),
                            residual: (tr - 1.0).abs(),
                            message: format!("marginal trace {tr} differs from 1"),
                        });
                    }
                    marginal = Some(sum);
                }
                Some(m) => {
                    let resid = m.distance_max(&sum);
                    if resid > MARGINAL_TOL {
                        out.push(Violation {
                            location: format!("elements[{x}]"),
                            residual: resid,
                            message: format!(
                                "input {x} marginal differs from input 0 (no-signalling violation)"
                            ),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn element(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.elements[x][a]
    }

    pub fn marginal(&self) -> HermitianOperator {
        self.elements[0].iter().fold(HermitianOperator::zero(self.dim), |acc, e| acc.add(e))
    }

    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if (self.dim, self.n_inputs, self.n_outcomes)
            != (other.dim, other.n_inputs, other.n_outcomes)
        {
            return Err(Error::DimensionMismatch("mixing assemblages of different scenarios".into()));
        }
        let elements = (0..self.n_inputs)
            .map(|x| {
                (0..self.n_outcomes)
                    .map(|a| self.elements[x][a].scale(t).add(&other.elements[x][a].scale(1.0 - t)))
                    .collect()
            })
            .collect();
        Assemblage::new(self.dim, elements)
    }

    /// Uniform-input-average trace-norm distance
    /// `(1/|X|) sum_{a,x} || sigma_{a|x} - tau_{a|x} ||_1`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if (self.dim, self.n_inputs, self.n_outcomes)
            != (other.dim, other.n_inputs, other.n_outcomes)
        {
            return Err(Error::DimensionMismatch("assemblage distance".into()));
        }
        let mut acc = 0.0;
        for x in 0..self.n_inputs {
            for a in 0..self.n_outcomes {
                let diff = self.elements[x][a].sub(&other.elements[x][a]);
                acc += diff.eigh()?.values.iter().map(|v| v.abs()).sum::<f64>();
            }
        }
        Ok(acc / self.n_inputs as f64)
    }
}

/// Assemblage observed on Bob's side when Alice measures `m` on a shared
/// state: `sigma_{a|x} = Tr_A[(M_{a|x} (x) I) rho_AB]`.
pub fn from_state_and_povms(rho: &DensityMatrix, m: &PovmSet) -> Result<Assemblage> {
    let (da, db) = rho.dims();
    if m.dim() != da {
        return Err(Error::DimensionMismatch(format!(
            "Alice dim {} != POVM dim {}",
            da,
            m.dim()
        )));
    }
    let mut elements = Vec::with_capacity(m.n_inputs());
    for x in 0..m.n_inputs() {
        let mut row = Vec::with_capacity(m.n_outcomes());
        for a in 0..m.n_outcomes() {
            let op = m.effect(x, a).matrix().tensor(&ComplexMatrix::identity(db));
            let weighted = HermitianOperator::new(&op * rho.operator().matrix())?;
            row.push(partial_trace(&weighted, (da, db), Subsystem::B)?);
        }
        elements.push(row);
    }
    Assemblage::new(db, elements)
}

/// Strategy variables for the local-hidden-state SDP, with each tau_lambda
/// restricted to the joint support of the elements above it.
struct LhsVars {
    strategies: Vec<DeterministicStrategy>,
    vars: Vec<Option<(VarId, Option<ComplexMatrix>)>>,
}

impl LhsVars {
    fn declare(p: &mut SdpProblem, s: &Assemblage) -> Result<Self> {
        let strategies = enumerate_strategies(s.n_inputs(), s.n_outcomes())?;
        let mut vars = Vec::with_capacity(strategies.len());
        for (li, lam) in strategies.iter().enumerate() {
            let ops: Vec<&HermitianOperator> =
                (0..s.n_inputs()).map(|x| s.element(x, lam.assignment[x])).collect();
            match crate::linalg::support_intersection(&ops, s.dim())? {
                Some(v) if v.cols() == 0 => vars.push(None),
                red => {
                    let rdim = red.as_ref().map_or(s.dim(), |v| v.cols());
                    let var = p.add_block(format!("tau_{li}"), rdim);
                    p.add_constraint(
                        format!("tau_{li}_psd"),
                        MatrixExpr::zero(rdim).var(var, 1.0),
                        ConstraintKind::PositiveSemidefinite,
                    )?;
                    vars.push(Some((var, red)));
                }
            }
        }
        Ok(Self { strategies, vars })
    }
}

/// Result of the assemblage Schmidt-measure SDP.
#[derive(Debug, Clone)]
pub struct AssemblageMeasureResult {
    /// Measure (or its log d upper bound) in bits.
    pub value: f64,
    /// Optimal local-hidden-state components tau_lambda, full dimension.
    pub lhs_parts: Vec<HermitianOperator>,
    pub solution: SdpSolution,
    pub certificate: CertificateReport,
}

fn lhs_weight_sdp(s: &Assemblage, opts: &SolveOptions) -> Result<AssemblageMeasureResult> {
    let d = s.dim();
    let mut p = SdpProblem::new(Sense::Minimize);
    let sv = LhsVars::declare(&mut p, s)?;
    // Objective: 1 - Tr(sum tau_lambda).
    p.objective_offset(1.0);
    for (li, entry) in sv.vars.iter().enumerate() {
        if let Some((var, red)) = entry {
            let rdim = red.as_ref().map_or(d, |v| v.cols());
            p.objective_trace(*var, &HermitianOperator::identity(rdim), -1.0);
        }
        let _ = li;
    }
    // sum_{lambda(x)=a} tau_lambda <= sigma_{a|x}.
    for x in 0..s.n_inputs() {
        for a in 0..s.n_outcomes() {
            let mut expr = MatrixExpr::constant(s.element(x, a).matrix().clone());
            for (li, lam) in sv.strategies.iter().enumerate() {
                if lam.assignment[x] != a {
                    continue;
                }
                if let Some((var, red)) = &sv.vars[li] {
                    expr = match red {
                        None => expr.var(*var, -1.0),
                        Some(v) => expr.term(*var, LinMap::Conjugate(v.clone()), -1.0),
                    };
                }
            }
            p.add_constraint(format!("slack_{x}_{a}"), expr, ConstraintKind::PositiveSemidefinite)?;
        }
    }
    let sol = conic::solve(&p, opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("steering SDP ended with status {:?}", sol.status)));
    }
    let certificate = conic::check_certificate(&p, &sol, opts)?;
    let lhs_parts = sv
        .vars
        .iter()
        .enumerate()
        .map(|(li, entry)| match entry {
            None => HermitianOperator::zero(d),
            Some((_, red)) => {
                let val = sol
                    .variables
                    .get(&format!("tau_{li}"))
                    .and_then(|v| v.as_matrix())
                    .cloned()
                    .unwrap_or_else(|| HermitianOperator::zero(d));
                match red {
                    None => val,
                    Some(v) => HermitianOperator::new(&(v * val.matrix()) * &v.dagger())
                        .expect("conjugation preserves Hermiticity"),
                }
            }
        })
        .collect();
    Ok(AssemblageMeasureResult {
        value: sol.primal_value.clamp(0.0, 1.0),
        lhs_parts,
        solution: sol,
        certificate,
    })
}

/// Schmidt measure of a qubit assemblage in bits, equal to its steering
/// weight: `min 1 - Tr(sum tau_lambda)` over local-hidden-state parts with
/// `sum_{lambda(x)=a} tau_lambda <= sigma_{a|x}`.
pub fn schmidt_measure_qubit_assemblage(s: &Assemblage, opts: &SolveOptions) -> Result<AssemblageMeasureResult> {
    if s.dim() != 2 {
        return Err(Error::InvalidValue(format!(
            "exact assemblage Schmidt measure requires dim 2, got {}; use schmidt_measure_upper_bound",
            s.dim()
        )));
    }
    lhs_weight_sdp(s, opts)
}

/// Upper bound `log2(d) (1 - Tr sum tau_lambda)` on the assemblage Schmidt
/// measure; coincides with the exact value at d = 2.
pub fn schmidt_measure_upper_bound(s: &Assemblage, opts: &SolveOptions) -> Result<AssemblageMeasureResult> {
    let mut r = lhs_weight_sdp(s, opts)?;
    r.value *= (s.dim() as f64).log2();
    Ok(r)
}

/// The gap family together with its certified qubit decomposition.
#[derive(Debug, Clone)]
pub struct GapExample {
    pub assemblage: Assemblage,
    /// Schmidt measure certified by the decomposition (log 2 = 1 bit).
    pub true_value: f64,
    /// Convex decomposition (weight, qubit-supported assemblage) verified to
    /// reproduce the assemblage exactly.
    pub decomposition: Vec<(f64, Assemblage)>,
    /// Max-entry residual of the decomposition identity.
    pub residual: f64,
}

/// Assemblage `sigma_{a|0} = |a><a|/d`, `sigma_{a|1} = (|+_a><+_a| +
/// |-_{a+1}><-_{a+1}|)/2d` with `|+-_a> = (|a> +- |a+1>)/sqrt2` (indices mod
/// d), plus the uniform mixture of extremal qubit-supported assemblages that
/// realizes it; the decomposition identity is verified at construction.
pub fn gap_example(d: usize) -> Result<GapExample> {
    if d < 2 {
        return Err(Error::InvalidValue("gap example needs d >= 2".into()));
    }
    let ket = |a: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[a % d] = Complex64::new(1.0, 0.0);
        v
    };
    let plus = |a: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        v[a % d] = Complex64::new(s, 0.0);
        v[(a + 1) % d] += Complex64::new(s, 0.0);
        v
    };
    let minus = |a: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        v[a % d] = Complex64::new(s, 0.0);
        v[(a + 1) % d] -= Complex64::new(s, 0.0);
        v
    };
    let dd = d as f64;
    let mut x0 = Vec::with_capacity(d);
    let mut x1 = Vec::with_capacity(d);
    for a in 0..d {
        x0.push(HermitianOperator::projector(&ket(a)).scale(1.0 / dd));
        let m = HermitianOperator::projector(&plus(a))
            .add(&HermitianOperator::projector(&minus((a + 1) % d)))
            .scale(1.0 / (2.0 * dd));
        x1.push(m);
    }
    let assemblage = Assemblage::new(d, vec![x0, x1])?;

    // tau^a supported on span{|a>, |a+1>}, normalized to unit marginal trace.
    let zero = HermitianOperator::zero(d);
    let mut decomposition = Vec::with_capacity(d);
    for a in 0..d {
        let mut t0 = vec![zero.clone(); d];
        let mut t1 = vec![zero.clone(); d];
        t0[a] = HermitianOperator::projector(&ket(a)).scale(0.5);
        t0[(a + 1) % d] = HermitianOperator::projector(&ket(a + 1)).scale(0.5);
        t1[a] = HermitianOperator::projector(&plus(a)).scale(0.5);
        t1[(a + d - 1) % d] = HermitianOperator::projector(&minus(a)).scale(0.5);
        decomposition.push((1.0 / dd, Assemblage::new(d, vec![t0, t1])?));
    }

    // Verify the summation identity element-wise before returning.
    let mut residual = 0.0f64;
    for x in 0..2 {
        for a in 0..d {
            let mut acc = HermitianOperator::zero(d);
            for (w, t) in &decomposition {
                acc = acc.add(&t.element(x, a).scale(*w));
            }
            residual = residual.max(acc.distance_max(assemblage.element(x, a)));
        }
    }
    if residual > 1e-10 {
        return Err(Error::InvariantViolation(format!(
            "gap example decomposition failed verification (residual {residual:.3e})"
        )));
    }
    Ok(GapExample { assemblage, true_value: 1.0, decomposition, residual })
}

/// Pretty-good measurements `M_{a|x} = rho^{-1/2} sigma_{a|x} rho^{-1/2}`
/// with the pseudoinverse on the marginal's support; the kernel projector is
/// assigned to outcome 0 of every input so the effects sum to the identity.
pub fn pretty_good_measurements(s: &Assemblage) -> Result<PovmSet> {
    let d = s.dim();
    let rho = s.marginal();
    let eig = rho.eigh()?;
    let mut inv_sqrt = ComplexMatrix::zeros(d, d);
    let mut kernel = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        let v = eig.values[k];
        let col = eig.vectors.column(k);
        let p = HermitianOperator::projector(&col);
        if v > PGM_KERNEL_TOL {
            inv_sqrt = &inv_sqrt + &p.matrix().scale_re(1.0 / v.sqrt());
        } else {
            kernel = &kernel + p.matrix();
        }
    }
    let mut effects = Vec::with_capacity(s.n_inputs());
    for x in 0..s.n_inputs() {
        let mut row = Vec::with_capacity(s.n_outcomes());
        for a in 0..s.n_outcomes() {
            let mut m = &(&inv_sqrt * s.element(x, a).matrix()) * &inv_sqrt;
            if a == 0 {
                m = &m + &kernel;
            }
            row.push(HermitianOperator::new(m)?);
        }
        effects.push(row);
    }
    PovmSet::new(d, effects)
}

/// Both sides of the assemblage-measure vs measurement-measure comparison for
/// qubit assemblages.
#[derive(Debug, Clone)]
pub struct PgmBoundReport {
    pub s_m_assemblage: f64,
    pub d_m_pgm_bound: f64,
}

/// Compute the qubit assemblage Schmidt measure and the dimension measure of
/// its pretty-good measurements; the former never exceeds the latter.
pub fn schmidt_measure_pgm_bound(s: &Assemblage, opts: &SolveOptions) -> Result<PgmBoundReport> {
    if s.dim() != 2 {
        return Err(Error::InvalidValue("PGM comparison requires qubit assemblages".into()));
    }
    let sm = schmidt_measure_qubit_assemblage(s, opts)?;
    let pgm = pretty_good_measurements(s)?;
    let dm = crate::measurements::dimension_measure_qubit(&pgm, opts)?;
    Ok(PgmBoundReport { s_m_assemblage: sm.value, d_m_pgm_bound: dm.value })
}

/// Unsteerable reference assemblage `sigma_{a|x} = rho / n_outcomes` built
/// from a fixed marginal.
pub fn unsteerable_uniform(dim: usize, n_inputs: usize, n_outcomes: usize) -> Result<Assemblage> {
    let rho = HermitianOperator::identity(dim).scale(1.0 / dim as f64);
    let el = rho.scale(1.0 / n_outcomes as f64);
    Assemblage::new(dim, vec![vec![el; n_outcomes]; n_inputs])
}
