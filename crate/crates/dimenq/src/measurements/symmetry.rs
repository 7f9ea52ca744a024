//! Weyl-Heisenberg operators, the unitary-relabelling symmetry group of the
//! canonical mutually unbiased basis pair, and twirling.
//!
//! Conventions: `X|k> = |k+1 mod d>`, `Z|k> = exp(2 pi i k / d)|k>`, Fourier
//! `F|k> = (1/sqrt d) sum_j w^{jk} |j>`. Input x = 0 carries the X eigenbasis
//! (Fourier columns), x = 1 the computational Z eigenbasis.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use num_complex::Complex64;

pub fn weyl_x(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn weyl_z(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / d as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn fourier(d: usize) -> ComplexMatrix {
    let s = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        Complex64::from_polar(s, 2.0 * std::f64::consts::PI * (j * k % d) as f64 / d as f64)
    })
}

/// Permutation matrix of the automorphism `|k> -> |alpha k mod d>`.
pub fn automorphism_perm(d: usize, alpha: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (alpha * j) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn matrix_power(m: &ComplexMatrix, mut k: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(m.rows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// Multiplicative inverse mod a prime.
pub fn mod_inverse(a: usize, d: usize) -> usize {
    // d is prime and a in 1..d, so a^(d-2) works.
    let mut result = 1usize;
    let mut base = a % d;
    let mut exp = d - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % d;
        }
        base = base * base % d;
        exp >>= 1;
    }
    result
}

pub fn is_prime(d: usize) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// One unitary-relabelling symmetry: acting on a labelled effect family by
/// `(g . M)_{a|x} = U M_{sigma_x(a) | tau(x)} U^dagger`.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub unitary: ComplexMatrix,
    /// tau: new input -> source input.
    pub input_perm: Vec<usize>,
    /// sigma_x: new outcome -> source outcome, indexed by the new input x.
    pub output_perms: Vec<Vec<usize>>,
}

impl GroupElement {
    fn compose(&self, inner: &GroupElement) -> GroupElement {
        // (g o h) . M = g . (h . M)
        let n_in = self.input_perm.len();
        let n_out = self.output_perms[0].len();
        let unitary = &self.unitary * &inner.unitary;
        let input_perm: Vec<usize> = (0..n_in).map(|x| inner.input_perm[self.input_perm[x]]).collect();
        let output_perms: Vec<Vec<usize>> = (0..n_in)
            .map(|x| {
                (0..n_out)
                    .map(|a| inner.output_perms[self.input_perm[x]][self.output_perms[x][a]])
                    .collect()
            })
            .collect();
        GroupElement { unitary, input_perm, output_perms }
    }
}

/// Group of unitary-relabelling symmetries for a fixed (n_inputs, n_outcomes)
/// scenario.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub dim: usize,
    pub n_inputs: usize,
    pub n_outcomes: usize,
    pub elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn new(dim: usize, n_inputs: usize, n_outcomes: usize, elements: Vec<GroupElement>) -> Result<Self> {
        for (k, g) in elements.iter().enumerate() {
            let u = &g.unitary;
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch(format!("group element {k} unitary dim")));
            }
            let resid = (&(&u.dagger() * u) - &ComplexMatrix::identity(dim)).max_abs();
            if resid > 1e-10 {
                return Err(Error::InvariantViolation(format!(
                    "group element {k} is not unitary (residual {resid:.3e})"
                )));
            }
            if g.input_perm.len() != n_inputs || g.output_perms.len() != n_inputs {
                return Err(Error::DimensionMismatch(format!("group element {k} permutation shape")));
            }
            let mut seen = vec![false; n_inputs];
            for &x in &g.input_perm {
                if x >= n_inputs || seen[x] {
                    return Err(Error::InvariantViolation(format!(
                        "group element {k} input relabelling is not a permutation"
                    )));
                }
                seen[x] = true;
            }
            for perm in &g.output_perms {
                let mut seen = vec![false; n_outcomes];
                for &a in perm {
                    if a >= n_outcomes || seen[a] {
                        return Err(Error::InvariantViolation(format!(
                            "group element {k} output relabelling is not a permutation"
                        )));
                    }
                    seen[a] = true;
                }
            }
        }
        Ok(Self { dim, n_inputs, n_outcomes, elements })
    }

    /// Average of `g . effects` over the group.
    pub fn twirl_effects(&self, effects: &[Vec<HermitianOperator>]) -> Result<Vec<Vec<HermitianOperator>>> {
        if effects.len() != self.n_inputs || effects.iter().any(|row| row.len() != self.n_outcomes) {
            return Err(Error::DimensionMismatch("effect family shape vs group scenario".into()));
        }
        let d = self.dim;
        let w = 1.0 / self.elements.len() as f64;
        let mut out =
            vec![vec![ComplexMatrix::zeros(d, d); self.n_outcomes]; self.n_inputs];
        for g in &self.elements {
            let ud = g.unitary.dagger();
            for x in 0..self.n_inputs {
                for a in 0..self.n_outcomes {
                    let src = effects[g.input_perm[x]][g.output_perms[x][a]].matrix();
                    let term = &(&g.unitary * src) * &ud;
                    out[x][a] = &out[x][a] + &term.scale_re(w);
                }
            }
        }
        out.into_iter()
            .map(|row| row.into_iter().map(HermitianOperator::new).collect::<Result<Vec<_>>>())
            .collect()
    }
}

fn identity_element(d: usize, n_inputs: usize, n_outcomes: usize) -> GroupElement {
    GroupElement {
        unitary: ComplexMatrix::identity(d),
        input_perm: (0..n_inputs).collect(),
        output_perms: vec![(0..n_outcomes).collect(); n_inputs],
    }
}

/// Symmetry group of the canonical X/Z mutually unbiased basis pair in prime
/// dimension d: Weyl shifts, multiplicative automorphisms, and the Fourier
/// swap, each composed with the outcome relabelling that fixes the noisy MUB
/// family element-wise.
pub fn mub_symmetry_group(d: usize) -> Result<SymmetryGroup> {
    if !is_prime(d) {
        return Err(Error::InvalidValue(format!("MUB symmetry group requires prime d, got {d}")));
    }
    let x_op = weyl_x(d);
    let z_op = weyl_z(d);
    let f_op = fourier(d);

    let elem_z = |i0: usize| GroupElement {
        unitary: matrix_power(&z_op, i0),
        input_perm: vec![0, 1],
        output_perms: vec![
            (0..d).map(|a| (a + d - i0) % d).collect(),
            (0..d).collect(),
        ],
    };
    let elem_x = |i1: usize| GroupElement {
        unitary: matrix_power(&x_op, i1),
        input_perm: vec![0, 1],
        output_perms: vec![
            (0..d).collect(),
            (0..d).map(|a| (a + d - i1) % d).collect(),
        ],
    };
    let elem_p = |alpha: usize| GroupElement {
        unitary: automorphism_perm(d, alpha),
        input_perm: vec![0, 1],
        output_perms: vec![
            (0..d).map(|a| alpha * a % d).collect(),
            (0..d).map(|a| mod_inverse(alpha, d) * a % d).collect(),
        ],
    };
    let elem_f = GroupElement {
        unitary: f_op,
        input_perm: vec![1, 0],
        output_perms: vec![(0..d).collect(), (0..d).map(|a| (d - a) % d).collect()],
    };

    let mut elements = Vec::with_capacity(2 * (d - 1) * d * d);
    for f in 0..2usize {
        for alpha in 1..d {
            for i1 in 0..d {
                for i0 in 0..d {
                    let mut g = identity_element(d, 2, d);
                    if f == 1 {
                        g = g.compose(&elem_f);
                    }
                    g = g.compose(&elem_p(alpha));
                    g = g.compose(&elem_x(i1));
                    g = g.compose(&elem_z(i0));
                    elements.push(g);
                }
            }
        }
    }
    SymmetryGroup::new(d, 2, d, elements)
}

/// Weyl twirl of a state: `(1/d^2) sum_{i,j} Z^{-j} X^{-i} rho X^i Z^j`,
/// which maps every state to I/d.
pub fn weyl_twirl_state(rho: &HermitianOperator) -> Result<HermitianOperator> {
    let d = rho.dim();
    let x_op = weyl_x(d);
    let z_op = weyl_z(d);
    let mut acc = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let u = &matrix_power(&x_op, i) * &matrix_power(&z_op, j);
            let term = &(&u.dagger() * rho.matrix()) * &u;
            acc = &acc + &term;
        }
    }
    HermitianOperator::new(acc.scale_re(1.0 / (d * d) as f64))
}
