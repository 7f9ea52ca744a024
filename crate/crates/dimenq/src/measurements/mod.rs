//! POVM sets and their dimensionality: joint measurability and its noise
//! robustness, the exact qubit dimension-measure SDP, the alpha log d upper
//! bound in higher dimension, the incompatibility weight, symmetry twirling,
//! and the heuristic noisy-MUB constructions from low-compression-dimension
//! pseudo-measurements.

mod symmetry;

pub use symmetry::{
    automorphism_perm, fourier, is_prime, mub_symmetry_group, weyl_twirl_state, weyl_x, weyl_z,
    GroupElement, SymmetryGroup,
};

use crate::conic::{
    self, CertificateReport, ConstraintKind, LinMap, MatrixExpr, SdpProblem, SdpSolution,
    SdpStatus, Sense, SolveOptions, VarId,
};
use crate::error::{Error, Result};
use crate::io::Violation;
use crate::linalg::{ComplexMatrix, HermitianOperator};
use num_complex::Complex64;

pub const EFFECT_PSD_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-9;
pub const MARGINAL_TOL: f64 = 1e-9;
/// Guard on the deterministic-strategy count.
pub const MAX_STRATEGIES: usize = 10_000;

/// Indexed family of effects `M_{a|x}` summing to the identity per input.
#[derive(Debug, Clone)]
pub struct PovmSet {
    dim: usize,
    n_inputs: usize,
    n_outcomes: usize,
    effects: Vec<Vec<HermitianOperator>>,
}

impl PovmSet {
    pub fn new(dim: usize, effects: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let violations = Self::violations(dim, &effects);
        if let Some(v) = violations.into_iter().next() {
            return Err(Error::InvariantViolation(format!(
                "{} ({}, residual {:.3e})",
                v.message, v.location, v.residual
            )));
        }
        let n_inputs = effects.len();
        let n_outcomes = effects[0].len();
        Ok(Self { dim, n_inputs, n_outcomes, effects })
    }

    pub fn violations(dim: usize, effects: &[Vec<HermitianOperator>]) -> Vec<Violation> {
        let mut out = vec![];
        if effects.is_empty() || effects[0].is_empty() {
            out.push(Violation {
                location: "effects".into(),
                residual: f64::NAN,
                message: "empty effect family".into(),
            });
            return out;
        }
        let n_outcomes = effects[0].len();
        for (x, row) in effects.iter().enumerate() {
            if row.len() != n_outcomes {
                out.push(Violation {
                    location: format!("effects[{x}]"),
                    residual: f64::NAN,
                    message: "ragged outcome count".into(),
                });
                return out;
            }
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for (a, e) in row.iter().enumerate() {
                if e.dim() != dim {
                    out.push(Violation {
                        location: format!("effects[{x}][{a}]"),
                        residual: f64::NAN,
                        message: format!("effect dim {} != {dim}", e.dim()),
                    });
                    return out;
                }
                if let Ok(min) = e.min_eigenvalue() {
                    if min < -EFFECT_PSD_TOL {
                        out.push(Violation {
                            location: format!("effects[{x}][{a}]"),
                            residual: -min,
                            message: "effect is not positive semidefinite".into(),
                        });
                    }
                }
                sum = &sum + e.matrix();
            }
            let resid = (&sum - &ComplexMatrix::identity(dim)).max_abs();
            if resid > COMPLETENESS_TOL {
                out.push(Violation {
                    location: format!("effects[{x}]"),
                    residual: resid,
                    message: format!("input {x}: effects sum differs from identity"),
                });
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

    pub fn effect(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.effects[x][a]
    }

    pub fn effects(&self) -> &[Vec<HermitianOperator>] {
        &self.effects
    }

    /// Convex mixture of two sets on the same scenario.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if (self.dim, self.n_inputs, self.n_outcomes)
            != (other.dim, other.n_inputs, other.n_outcomes)
        {
            return Err(Error::DimensionMismatch("mixing POVM sets of different scenarios".into()));
        }
        let effects = (0..self.n_inputs)
            .map(|x| {
                (0..self.n_outcomes)
                    .map(|a| self.effects[x][a].scale(t).add(&other.effects[x][a].scale(1.0 - t)))
                    .collect()
            })
            .collect();
        PovmSet::new(self.dim, effects)
    }

    /// Drop one input (measurement setting).
    pub fn without_input(&self, x: usize) -> Result<Self> {
        if self.n_inputs < 2 || x >= self.n_inputs {
            return Err(Error::InvalidValue("cannot drop input".into()));
        }
        let effects: Vec<Vec<HermitianOperator>> = self
            .effects
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != x)
            .map(|(_, row)| row.clone())
            .collect();
        PovmSet::new(self.dim, effects)
    }
}

/// Effect family with an input-independent marginal that is not required to
/// be the identity.
#[derive(Debug, Clone)]
pub struct PseudoMeasurement {
    dim: usize,
    n_inputs: usize,
    n_outcomes: usize,
    effects: Vec<Vec<HermitianOperator>>,
    marginal: HermitianOperator,
}

impl PseudoMeasurement {
    pub fn new(dim: usize, effects: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        if effects.is_empty() || effects[0].is_empty() {
            return Err(Error::InvariantViolation("empty pseudo-measurement".into()));
        }
        let n_inputs = effects.len();
        let n_outcomes = effects[0].len();
        let mut marginal: Option<HermitianOperator> = None;
        for (x, row) in effects.iter().enumerate() {
            if row.len() != n_outcomes {
                return Err(Error::DimensionMismatch("ragged outcome count".into()));
            }
            let mut sum = HermitianOperator::zero(dim);
            for (a, e) in row.iter().enumerate() {
                if e.dim() != dim {
                    return Err(Error::DimensionMismatch(format!("effect [{x}][{a}] dim")));
                }
                let min = e.min_eigenvalue()?;
                if min < -EFFECT_PSD_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "effect [{x}][{a}] not PSD (min eigenvalue {min:.3e})"
                    )));
                }
                sum = sum.add(e);
            }
            match &marginal {
                None => marginal = Some(sum),
                Some(m) => {
                    let resid = m.distance_max(&sum);
                    if resid > MARGINAL_TOL {
                        return Err(Error::InvariantViolation(format!(
                            "marginal of input {x} differs from input 0 by {resid:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(Self { dim, n_inputs, n_outcomes, effects, marginal: marginal.unwrap() })
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

    pub fn effect(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.effects[x][a]
    }

    pub fn marginal(&self) -> &HermitianOperator {
        &self.marginal
    }
}

/// Deterministic assignment of one outcome per input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub assignment: Vec<usize>,
}

/// Complete, duplicate-free enumeration in lexicographic order; guarded at
/// `n_outcomes^n_inputs <= 10^4`.
pub fn enumerate_strategies(n_inputs: usize, n_outcomes: usize) -> Result<Vec<DeterministicStrategy>> {
    let count = (n_outcomes as f64).powi(n_inputs as i32);
    if count > MAX_STRATEGIES as f64 {
        return Err(Error::InvalidValue(format!(
            "{n_outcomes}^{n_inputs} deterministic strategies exceed the {MAX_STRATEGIES} guard"
        )));
    }
    let count = count as usize;
    let mut out = Vec::with_capacity(count);
    for mut idx in 0..count {
        let mut assignment = vec![0usize; n_inputs];
        for x in (0..n_inputs).rev() {
            assignment[x] = idx % n_outcomes;
            idx /= n_outcomes;
        }
        out.push(DeterministicStrategy { assignment });
    }
    Ok(out)
}

/// Noisy pair of mutually unbiased bases in prime dimension d:
/// `M^p_{a|x} = p |e^x_a><e^x_a| + (1-p) I/d` with x = 0 the X (Fourier)
/// eigenbasis and x = 1 the computational Z basis.
pub fn mub_pair(d: usize, p: f64) -> Result<PovmSet> {
    if !is_prime(d) {
        return Err(Error::InvalidValue(format!("mub_pair requires prime d, got {d}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidValue(format!("visibility {p} outside [0, 1]")));
    }
    let f = fourier(d);
    let noise = HermitianOperator::identity(d).scale((1.0 - p) / d as f64);
    let mut effects = vec![vec![], vec![]];
    for a in 0..d {
        let col = f.column(a);
        effects[0].push(HermitianOperator::projector(&col).scale(p).add(&noise));
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        e[a] = Complex64::new(1.0, 0.0);
        effects[1].push(HermitianOperator::projector(&e).scale(p).add(&noise));
    }
    PovmSet::new(d, effects)
}

/// Strategy-indexed SDP variables with facial reduction: each `G_lambda` is
/// restricted to the joint support of the effects it sits under.
struct StrategyVars {
    strategies: Vec<DeterministicStrategy>,
    /// Per strategy: `None` when the joint support is trivial (variable
    /// eliminated); otherwise the variable and an optional reduction isometry.
    vars: Vec<Option<(VarId, Option<ComplexMatrix>)>>,
}

impl StrategyVars {
    fn declare(p: &mut SdpProblem, m: &PovmSet, reduce: bool) -> Result<Self> {
        let strategies = enumerate_strategies(m.n_inputs(), m.n_outcomes())?;
        let mut vars = Vec::with_capacity(strategies.len());
        for (li, lam) in strategies.iter().enumerate() {
            let reduction = if reduce {
                let ops: Vec<&HermitianOperator> =
                    (0..m.n_inputs()).map(|x| m.effect(x, lam.assignment[x])).collect();
                crate::linalg::support_intersection(&ops, m.dim())?
            } else {
                None
            };
            match reduction {
                Some(v) if v.cols() == 0 => {
                    vars.push(None);
                    continue;
                }
                red => {
                    let rdim = red.as_ref().map_or(m.dim(), |v| v.cols());
                    let var = p.add_block(format!("G_{li}"), rdim);
                    p.add_constraint(
                        format!("G_{li}_psd"),
                        MatrixExpr::zero(rdim).var(var, 1.0),
                        ConstraintKind::PositiveSemidefinite,
                    )?;
                    vars.push(Some((var, red)));
                }
            }
        }
        Ok(Self { strategies, vars })
    }

    /// Add `scale * G_lambda` to an expression of the full dimension.
    fn add_to_expr(&self, mut expr: MatrixExpr, li: usize, scale: f64) -> MatrixExpr {
        if let Some((var, red)) = &self.vars[li] {
            expr = match red {
                None => expr.var(*var, scale),
                Some(v) => expr.term(*var, LinMap::Conjugate(v.clone()), scale),
            };
        }
        expr
    }

    /// Recover full-dimension values of all strategy operators.
    fn unpack(&self, dim: usize, sol: &SdpSolution) -> Vec<HermitianOperator> {
        self.vars
            .iter()
            .enumerate()
            .map(|(li, entry)| match entry {
                None => HermitianOperator::zero(dim),
                Some((_, red)) => {
                    let val = sol
                        .variables
                        .get(&format!("G_{li}"))
                        .and_then(|v| v.as_matrix())
                        .cloned()
                        .unwrap_or_else(|| HermitianOperator::zero(dim));
                    match red {
                        None => val,
                        Some(v) => HermitianOperator::new(&(v * val.matrix()) * &v.dagger())
                            .expect("conjugated value stays Hermitian"),
                    }
                }
            })
            .collect()
    }
}

/// Shared builder for the three strategy SDPs: adds the constraints
/// `sum_{lambda(x)=a} G_lambda <= M_{a|x}` (or `= target` for the robustness
/// form) and returns the strategy variables.
fn add_parent_constraints(
    p: &mut SdpProblem,
    m: &PovmSet,
    sv: &StrategyVars,
    rhs: impl Fn(usize, usize) -> MatrixExpr,
    kind: ConstraintKind,
) -> Result<()> {
    for x in 0..m.n_inputs() {
        for a in 0..m.n_outcomes() {
            let mut expr = rhs(x, a);
            for (li, lam) in sv.strategies.iter().enumerate() {
                if lam.assignment[x] == a {
                    let scale = match kind {
                        // RHS already carries M; subtract the partial sum.
                        ConstraintKind::PositiveSemidefinite => -1.0,
                        ConstraintKind::Zero => 1.0,
                    };
                    expr = sv.add_to_expr(expr, li, scale);
                }
            }
            p.add_constraint(format!("parent_{x}_{a}"), expr, kind)?;
        }
    }
    Ok(())
}

/// Joint-measurability verdict with the white-noise robustness
/// `max { t : t M + (1-t) (trivial noise set) is jointly measurable }`,
/// capped at 1.
#[derive(Debug, Clone)]
pub struct JointMeasurability {
    pub jointly_measurable: bool,
    pub robustness: f64,
    pub solution: SdpSolution,
    pub certificate: CertificateReport,
}

pub fn joint_measurability(m: &PovmSet, opts: &SolveOptions) -> Result<JointMeasurability> {
    if m.n_inputs() == 1 {
        // A single POVM is trivially its own parent.
        return Ok(JointMeasurability {
            jointly_measurable: true,
            robustness: 1.0,
            solution: SdpSolution {
                status: SdpStatus::Optimal,
                primal_value: 1.0,
                dual_value: 1.0,
                gap: 0.0,
                variables: Default::default(),
                iterations: 0,
                certificate: None,
            },
            certificate: CertificateReport { feasibility_residuals: vec![], gap: 0.0, verdict: true },
        });
    }
    let d = m.dim();
    let noise = HermitianOperator::identity(d).scale(1.0 / m.n_outcomes() as f64);
    let mut p = SdpProblem::new(Sense::Maximize);
    let t = p.add_scalar("t");
    p.objective_scalar(t, 1.0);
    let sv = StrategyVars::declare(&mut p, m, false)?;
    // t <= 1 keeps the program bounded for deep-inside-JM sets.
    p.add_constraint(
        "t_cap",
        MatrixExpr::constant(ComplexMatrix::identity(1)).scalar(t, ComplexMatrix::identity(1), -1.0),
        ConstraintKind::PositiveSemidefinite,
    )?;
    add_parent_constraints(
        &mut p,
        m,
        &sv,
        |x, a| {
            // sum G - t M_{a|x} - (1-t) noise = 0
            let m_minus_noise = m.effect(x, a).sub(&noise);
            MatrixExpr::constant(noise.matrix().scale_re(-1.0))
                .scalar(t, m_minus_noise.into_matrix(), -1.0)
        },
        ConstraintKind::Zero,
    )?;
    let sol = conic::solve(&p, opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("JM robustness SDP ended with status {:?}", sol.status)));
    }
    let certificate = conic::check_certificate(&p, &sol, opts)?;
    let robustness = sol.primal_value.clamp(0.0, 1.0);
    Ok(JointMeasurability {
        jointly_measurable: robustness >= 1.0 - 1e-6,
        robustness,
        solution: sol,
        certificate,
    })
}

/// Result of a dimension-measure or incompatibility-weight SDP over
/// strategy-indexed pseudo-measurement parts.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// Optimal value in bits.
    pub value: f64,
    /// Optimal strategy operators `G_lambda` in the full dimension.
    pub parents: Vec<HermitianOperator>,
    pub solution: SdpSolution,
    pub certificate: CertificateReport,
}

fn dimension_measure_sdp(m: &PovmSet, closure: ConstraintKind, opts: &SolveOptions) -> Result<MeasureResult> {
    let d = m.dim();
    let mut p = SdpProblem::new(Sense::Minimize);
    let alpha = p.add_scalar("alpha");
    p.objective_scalar(alpha, 1.0);
    let sv = StrategyVars::declare(&mut p, m, true)?;
    add_parent_constraints(
        &mut p,
        m,
        &sv,
        |x, a| MatrixExpr::constant(m.effect(x, a).matrix().clone()),
        ConstraintKind::PositiveSemidefinite,
    )?;
    // (alpha - 1) I + sum_lambda G_lambda  (>= 0 or = 0 for the weight).
    let mut expr = MatrixExpr::constant(ComplexMatrix::identity(d).scale_re(-1.0))
        .scalar(alpha, ComplexMatrix::identity(d), 1.0);
    for li in 0..sv.strategies.len() {
        expr = sv.add_to_expr(expr, li, 1.0);
    }
    p.add_constraint("closure", expr, closure)?;
    let sol = conic::solve(&p, opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("measure SDP ended with status {:?}", sol.status)));
    }
    let certificate = conic::check_certificate(&p, &sol, opts)?;
    let parents = sv.unpack(d, &sol);
    Ok(MeasureResult { value: sol.primal_value.clamp(0.0, 1.0), parents, solution: sol, certificate })
}

/// Exact dimension measure of a qubit POVM set in bits:
///
/// ```text
/// min alpha  s.t.  G_lambda >= 0,
///                  sum_{lambda(x)=a} G_lambda <= M_{a|x},
///                  (alpha - 1) I_2 + sum_lambda G_lambda >= 0.
/// ```
pub fn dimension_measure_qubit(m: &PovmSet, opts: &SolveOptions) -> Result<MeasureResult> {
    if m.dim() != 2 {
        return Err(Error::InvalidValue(format!(
            "exact dimension measure requires qubit effects; use dimension_measure_upper_bound for dim {}",
            m.dim()
        )));
    }
    dimension_measure_sdp(m, ConstraintKind::PositiveSemidefinite, opts)
}

/// Upper bound `alpha log2(d)` on the dimension measure in any dimension,
/// from the same SDP with `I_d` in place of `I_2`. Coincides with the exact
/// value at d = 2.
pub fn dimension_measure_upper_bound(m: &PovmSet, opts: &SolveOptions) -> Result<MeasureResult> {
    let mut r = dimension_measure_sdp(m, ConstraintKind::PositiveSemidefinite, opts)?;
    r.value *= (m.dim() as f64).log2();
    Ok(r)
}

/// Incompatibility weight: the same program with the closure constraint
/// `(gamma - 1) I + sum G_lambda = 0`, forcing the jointly measurable part to
/// be a true measurement. Upper-bounds the qubit dimension measure.
pub fn incompatibility_weight(m: &PovmSet, opts: &SolveOptions) -> Result<MeasureResult> {
    dimension_measure_sdp(m, ConstraintKind::Zero, opts)
}

/// Twirl a POVM set under a symmetry group.
pub fn twirl_povm(m: &PovmSet, g: &SymmetryGroup) -> Result<PovmSet> {
    if g.dim != m.dim() || g.n_inputs != m.n_inputs() || g.n_outcomes != m.n_outcomes() {
        return Err(Error::DimensionMismatch("group scenario vs POVM scenario".into()));
    }
    PovmSet::new(m.dim(), g.twirl_effects(m.effects())?)
}

/// Twirl a pseudo-measurement under a symmetry group.
pub fn twirl_pseudo(m: &PseudoMeasurement, g: &SymmetryGroup) -> Result<PseudoMeasurement> {
    if g.dim != m.dim() || g.n_inputs != m.n_inputs() || g.n_outcomes != m.n_outcomes() {
        return Err(Error::DimensionMismatch("group scenario vs pseudo-measurement scenario".into()));
    }
    PseudoMeasurement::new(m.dim(), g.twirl_effects(&m.effects)?)
}

/// Recover the visibility p of a noisy MUB pair, rejecting inputs that are
/// not of that form (structural check at 1e-6).
pub fn extract_visibility(m: &PovmSet) -> Result<f64> {
    let d = m.dim();
    if m.n_inputs() != 2 || m.n_outcomes() != d {
        return Err(Error::InvalidValue("visibility extraction needs a 2-input d-outcome set".into()));
    }
    let sharp = mub_pair(d, 1.0)?;
    let mut overlap = 0.0;
    for x in 0..2 {
        for a in 0..d {
            overlap += sharp.effect(x, a).pairing(m.effect(x, a));
        }
    }
    let dd = d as f64;
    let p = dd * overlap / ((dd - 1.0) * 2.0 * dd) - 1.0 / (dd - 1.0);
    let rebuilt = mub_pair(d, p.clamp(0.0, 1.0))?;
    let mut resid = 0.0f64;
    for x in 0..2 {
        for a in 0..d {
            resid = resid.max(rebuilt.effect(x, a).distance_max(m.effect(x, a)));
        }
    }
    if resid > 1e-6 {
        return Err(Error::InvalidValue(format!(
            "input is not of noisy-MUB form (structural residual {resid:.3e})"
        )));
    }
    Ok(p)
}

/// Output of the rank-k pseudo-measurement construction.
#[derive(Debug, Clone)]
pub struct HeuristicConstruction {
    /// Twirled pseudo-measurement, rescaled so its marginal is the identity.
    pub pseudo: PseudoMeasurement,
    /// Visibility of the resulting noisy MUB pair.
    pub p_k: f64,
    /// True when the k-th eigenvalue of the seed operator was degenerate and
    /// the deterministic tie-break was applied.
    pub tie_broken: bool,
}

/// Build the rank-k seed `S_k = sum_{a in O1} |a_X><a_X| + sum_{a in O2}
/// |a_Z><a_Z|`, project onto its top-k eigenspace, form the raw effects
/// `Pi_k |a_i><a_i| Pi_k`, twirl under the MUB symmetry group, and rescale to
/// a valid noisy MUB pair. Returns the achieved visibility `p_k`.
pub fn heuristic_mub_construction(
    d: usize,
    k: usize,
    o1: &[usize],
    o2: &[usize],
) -> Result<HeuristicConstruction> {
    if !is_prime(d) {
        return Err(Error::InvalidValue(format!("construction requires prime d, got {d}")));
    }
    if k < 1 || k > d || o1.len() != k || o2.len() != k {
        return Err(Error::InvalidValue(format!(
            "subset sizes must equal k with 1 <= k <= d (k = {k}, |O1| = {}, |O2| = {})",
            o1.len(),
            o2.len()
        )));
    }
    if o1.iter().chain(o2).any(|&a| a >= d) {
        return Err(Error::InvalidValue("subset outcome out of range".into()));
    }
    let f = fourier(d);
    let basis_x: Vec<Vec<Complex64>> = (0..d).map(|a| f.column(a)).collect();
    let basis_z: Vec<Vec<Complex64>> = (0..d)
        .map(|a| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[a] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();

    let mut seed = ComplexMatrix::zeros(d, d);
    for &a in o1 {
        seed = &seed + HermitianOperator::projector(&basis_x[a]).matrix();
    }
    for &a in o2 {
        seed = &seed + HermitianOperator::projector(&basis_z[a]).matrix();
    }
    let eig = HermitianOperator::new(seed)?.eigh()?;

    // Rank eigenvectors: descending eigenvalue; ties prefer larger overlap
    // onto span{|a_Z> : a in O2}, then lexicographic index.
    let overlap = |col: &[Complex64]| -> f64 { o2.iter().map(|&a| col[a].norm_sqr()).sum() };
    let mut order: Vec<usize> = (0..d).collect();
    let cols: Vec<Vec<Complex64>> = (0..d).map(|k| eig.vectors.column(k)).collect();
    order.sort_by(|&i, &j| {
        let (li, lj) = (eig.values[i], eig.values[j]);
        if (li - lj).abs() > 1e-9 {
            lj.partial_cmp(&li).unwrap()
        } else {
            let (oi, oj) = (overlap(&cols[i]), overlap(&cols[j]));
            oj.partial_cmp(&oi).unwrap().then(i.cmp(&j))
        }
    });
    let tie_broken = if k < d {
        (eig.values[order[k - 1]] - eig.values[order[k]]).abs() <= 1e-9
    } else {
        false
    };
    let mut proj = ComplexMatrix::zeros(d, d);
    for &idx in order.iter().take(k) {
        proj = &proj + HermitianOperator::projector(&cols[idx]).matrix();
    }

    let zero = HermitianOperator::zero(d);
    let mut raw = vec![vec![zero.clone(); d], vec![zero; d]];
    for &a in o1 {
        let m = &(&proj * HermitianOperator::projector(&basis_x[a]).matrix()) * &proj;
        raw[0][a] = HermitianOperator::new(m)?;
    }
    for &a in o2 {
        let m = &(&proj * HermitianOperator::projector(&basis_z[a]).matrix()) * &proj;
        raw[1][a] = HermitianOperator::new(m)?;
    }

    let group = mub_symmetry_group(d)?;
    let twirled = group.twirl_effects(&raw)?;
    // The twirl lands on a multiple of a noisy MUB pair; normalize the
    // marginal to the identity.
    let marginal_trace: f64 = twirled[0].iter().map(|e| e.trace()).sum();
    if marginal_trace <= 1e-12 {
        return Err(Error::InvalidValue("construction collapsed to zero".into()));
    }
    let scale = d as f64 / marginal_trace;
    let rescaled: Vec<Vec<HermitianOperator>> = twirled
        .iter()
        .map(|row| row.iter().map(|e| e.scale(scale)).collect())
        .collect();
    let povm = PovmSet::new(d, rescaled.clone())?;
    let p_k = extract_visibility(&povm)?;
    let pseudo = PseudoMeasurement::new(d, rescaled)?;
    Ok(HeuristicConstruction { pseudo, p_k, tie_broken })
}

/// Exhaustive search over outcome subsets (canonicalized to contain 0 via the
/// label-shift symmetry) maximizing the achieved visibility.
pub fn best_heuristic_construction(d: usize, k: usize) -> Result<(Vec<usize>, Vec<usize>, HeuristicConstruction)> {
    if d > 7 {
        return Err(Error::InvalidValue("exhaustive subset search is limited to d <= 7".into()));
    }
    let subsets = subsets_containing_zero(d, k);
    let mut best: Option<(Vec<usize>, Vec<usize>, HeuristicConstruction)> = None;
    for o1 in &subsets {
        for o2 in &subsets {
            let r = heuristic_mub_construction(d, k, o1, o2)?;
            if best.as_ref().is_none_or(|(_, _, b)| r.p_k > b.p_k + 1e-12) {
                best = Some((o1.clone(), o2.clone(), r));
            }
        }
    }
    best.ok_or_else(|| Error::InvalidValue("no subsets enumerated".into()))
}

fn subsets_containing_zero(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut current = vec![0usize];
    fn rec(d: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for a in start..d {
            current.push(a);
            rec(d, k, a + 1, current, out);
            current.pop();
        }
    }
    rec(d, k, 1, &mut current, &mut out);
    out
}

/// Upper bound on the dimension measure of the noisy MUB pair from mixing the
/// k = 1 (jointly measurable) and k = d (sharp) constructions: 0 up to the
/// k = 1 visibility `p1`, then `log2(d) (p - p1)/(1 - p1)`.
pub fn dimension_measure_curve_from_constructions(d: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidValue(format!("visibility {p} outside [0, 1]")));
    }
    let p1 = best_heuristic_construction(d, 1)?.2.p_k;
    if p <= p1 {
        Ok(0.0)
    } else {
        Ok((d as f64).log2() * (p - p1) / (1.0 - p1))
    }
}

/// Product of two POVM sets on the joint system: inputs and outcomes pair up
/// lexicographically, dimensions multiply.
pub fn tensor_povm(m1: &PovmSet, m2: &PovmSet) -> Result<PovmSet> {
    let dim = m1.dim() * m2.dim();
    let mut effects = Vec::with_capacity(m1.n_inputs() * m2.n_inputs());
    for x1 in 0..m1.n_inputs() {
        for x2 in 0..m2.n_inputs() {
            let mut row = Vec::with_capacity(m1.n_outcomes() * m2.n_outcomes());
            for a1 in 0..m1.n_outcomes() {
                for a2 in 0..m2.n_outcomes() {
                    row.push(HermitianOperator::new(
                        m1.effect(x1, a1).matrix().tensor(m2.effect(x2, a2).matrix()),
                    )?);
                }
            }
            effects.push(row);
        }
    }
    PovmSet::new(dim, effects)
}

/// Trivial single-input, single-outcome POVM (the identity).
pub fn trivial_povm(dim: usize) -> PovmSet {
    PovmSet::new(dim, vec![vec![HermitianOperator::identity(dim)]]).unwrap()
}

#[cfg(test)]
mod tests;
