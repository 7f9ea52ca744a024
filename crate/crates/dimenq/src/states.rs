//! Bipartite state dimensionality: PPT test, Schmidt rank, and the Schmidt
//! measure via the best-separable-approximation SDP in 2x2 and 2x3, where
//! positivity of the partial transpose is equivalent to separability.

use crate::conic::{
    self, CertificateReport, ConstraintKind, LinMap, MatrixExpr, SdpProblem, SdpSolution,
    SdpStatus, Sense, SolveOptions,
};
use crate::error::{Error, Result};
use crate::io::Violation;
use crate::linalg::{partial_transpose, schmidt_decompose, HermitianOperator, PureState};

pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PPT_TOL: f64 = 1e-9;

/// Bipartite density matrix on a `dims.0 x dims.1` space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: (usize, usize),
    operator: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(dims: (usize, usize), operator: HermitianOperator) -> Result<Self> {
        let rho = Self { dims, operator };
        if let Some(v) = rho.violations().into_iter().next() {
            return Err(Error::InvariantViolation(format!("{} ({}, residual {:.3e})", v.message, v.location, v.residual)));
        }
        Ok(rho)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = vec![];
        if self.operator.dim() != self.dims.0 * self.dims.1 {
            out.push(Violation {
                location: "rho".into(),
                residual: f64::NAN,
                message: format!(
                    "operator dim {} != dims product {}",
                    self.operator.dim(),
                    self.dims.0 * self.dims.1
                ),
            });
            return out;
        }
        if let Ok(min) = self.operator.min_eigenvalue() {
            if min < -PSD_TOL {
                out.push(Violation {
                    location: "rho".into(),
                    residual: -min,
                    message: "density matrix is not positive semidefinite".into(),
                });
            }
        }
        let tr = self.operator.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            out.push(Violation {
                location: "rho".into(),
                residual: (tr - 1.0).abs(),
                message: format!("trace {} differs from 1", tr),
            });
        }
        out
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    /// Convex mixture `t self + (1-t) other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("mixing states of different dims".into()));
        }
        DensityMatrix::new(self.dims, self.operator.scale(t).add(&other.operator.scale(1.0 - t)))
    }
}

/// Werner-type two-qubit family `lambda |psi+><psi+| + (1-lambda) I/4` with
/// `|psi+> = (|01> + |10>)/sqrt(2)`.
pub fn werner_state(lambda: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidValue(format!("werner parameter {lambda} outside [0, 1]")));
    }
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let psi = vec![
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(inv, 0.0),
        num_complex::Complex64::new(inv, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
    ];
    let op = HermitianOperator::projector(&psi)
        .scale(lambda)
        .add(&HermitianOperator::identity(4).scale((1.0 - lambda) / 4.0));
    DensityMatrix::new((2, 2), op)
}

/// True iff the minimum eigenvalue of the partial transpose is `>= -1e-9`.
pub fn is_ppt(rho: &DensityMatrix) -> Result<bool> {
    let pt = partial_transpose(rho.operator(), rho.dims())?;
    Ok(pt.min_eigenvalue()? >= -PPT_TOL)
}

/// Schmidt rank of a pure state: the Schmidt coefficient count at the default
/// relative tolerance.
pub fn schmidt_rank(psi: &PureState) -> Result<usize> {
    Ok(schmidt_decompose(psi)?.coefficients.len())
}

/// Result of the best-separable-approximation SDP.
#[derive(Debug, Clone)]
pub struct SchmidtMeasureResult {
    /// Schmidt measure in bits.
    pub value: f64,
    /// Optimal subnormalized separable part.
    pub separable_part: HermitianOperator,
    pub solution: SdpSolution,
    pub certificate: CertificateReport,
}

/// Schmidt measure of a 2x2 or 2x3 state in bits:
/// `1 - max { Tr sigma0 : 0 <= sigma0 <= rho, sigma0^{T_A} >= 0 }`.
///
/// In this regime PPT equals separability and every entangled pure component
/// has log-rank exactly 1, so the SDP value is the Schmidt measure.
pub fn schmidt_measure_2xn(rho: &DensityMatrix, opts: &SolveOptions) -> Result<SchmidtMeasureResult> {
    let (da, db) = rho.dims();
    if da != 2 || !(db == 2 || db == 3) {
        return Err(Error::InvalidValue(format!(
            "schmidt measure SDP requires 2x2 or 2x3 dims, got {da}x{db}"
        )));
    }
    let d = da * db;
    // A rank-deficient rho pins sigma0 to its support; reduce up front to
    // keep the interior-point path well conditioned.
    let support = crate::linalg::support_intersection(&[rho.operator()], d)?;
    let rdim = support.as_ref().map_or(d, |v| v.cols());
    let embed = |map: LinMap| -> LinMap {
        match &support {
            None => map,
            Some(v) => LinMap::Chain(Box::new(LinMap::Conjugate(v.clone())), Box::new(map)),
        }
    };
    let mut p = SdpProblem::new(Sense::Maximize);
    let sigma0 = p.add_block("sigma0", rdim);
    p.objective_trace(sigma0, &HermitianOperator::identity(rdim), 1.0);
    p.add_constraint(
        "sigma0_psd",
        MatrixExpr::zero(rdim).var(sigma0, 1.0),
        ConstraintKind::PositiveSemidefinite,
    )?;
    let rho_const = match &support {
        None => rho.operator().matrix().clone(),
        Some(v) => &(&v.dagger() * rho.operator().matrix()) * v,
    };
    p.add_constraint(
        "rho_minus_sigma0",
        MatrixExpr::constant(rho_const).var(sigma0, -1.0),
        ConstraintKind::PositiveSemidefinite,
    )?;
    p.add_constraint(
        "sigma0_ppt",
        MatrixExpr::zero(d).term(sigma0, embed(LinMap::TransposeA { da, db }), 1.0),
        ConstraintKind::PositiveSemidefinite,
    )?;
    let sol = conic::solve(&p, opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("schmidt measure SDP ended with status {:?}", sol.status)));
    }
    let certificate = conic::check_certificate(&p, &sol, opts)?;
    let sep_reduced = sol
        .variables
        .get("sigma0")
        .and_then(|v| v.as_matrix())
        .cloned()
        .ok_or_else(|| Error::Solver("missing sigma0 in solution".into()))?;
    let sep = match &support {
        None => sep_reduced,
        Some(v) => HermitianOperator::new(&(v * sep_reduced.matrix()) * &v.dagger())?,
    };
    Ok(SchmidtMeasureResult {
        value: (1.0 - sol.primal_value).clamp(0.0, 1.0),
        separable_part: sep,
        solution: sol,
        certificate,
    })
}

/// Maximally mixed state on the given bipartite dims.
pub fn maximally_mixed(dims: (usize, usize)) -> DensityMatrix {
    let d = dims.0 * dims.1;
    DensityMatrix::new(dims, HermitianOperator::identity(d).scale(1.0 / d as f64)).unwrap()
}

/// Density matrix from a pure state.
pub fn pure_density(psi: &PureState) -> Result<DensityMatrix> {
    DensityMatrix::new(psi.dims(), psi.density())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_entangled;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn ppt_product_state_true() {
        let rho = maximally_mixed((2, 2));
        assert!(is_ppt(&rho).unwrap());
    }

    #[test]
    fn ppt_werner_boundary() {
        // Entangled exactly when lambda > 1/3.
        assert!(!is_ppt(&werner_state(0.5).unwrap()).unwrap());
        assert!(is_ppt(&werner_state(1.0 / 3.0).unwrap()).unwrap());
        assert!(is_ppt(&werner_state(0.2).unwrap()).unwrap());
    }

    #[test]
    fn schmidt_rank_cases() {
        let mut amp = vec![num_complex::Complex64::new(0.0, 0.0); 4];
        amp[1] = num_complex::Complex64::new(1.0, 0.0);
        let psi01 = PureState::new(2, 2, amp).unwrap();
        assert_eq!(schmidt_rank(&psi01).unwrap(), 1);
        assert_eq!(schmidt_rank(&max_entangled(3)).unwrap(), 3);
        let mut amp = vec![num_complex::Complex64::new(0.0, 0.0); 4];
        amp[0] = num_complex::Complex64::new(0.99f64.sqrt(), 0.0);
        amp[3] = num_complex::Complex64::new(0.01f64.sqrt(), 0.0);
        assert_eq!(schmidt_rank(&PureState::new(2, 2, amp).unwrap()).unwrap(), 2);
    }

    #[test]
    fn werner_schmidt_measure_formula() {
        // (3 lambda - 1)/2 for lambda >= 1/3, 0 otherwise.
        for &(lam, expect) in
            &[(1.0, 1.0), (0.6, 0.4), (0.2, 0.0), (1.0 / 3.0, 0.0), (0.5, 0.25), (0.8, 0.7)]
        {
            let r = schmidt_measure_2xn(&werner_state(lam).unwrap(), &opts()).unwrap();
            assert!(
                (r.value - expect).abs() < 1e-5,
                "lambda={lam}: got {}, expected {expect}",
                r.value
            );
        }
    }

    #[test]
    fn schmidt_measure_rejects_large_dims() {
        let rho = maximally_mixed((3, 3));
        assert!(schmidt_measure_2xn(&rho, &opts()).is_err());
    }
}
