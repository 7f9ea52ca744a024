//! Shared random-instance samplers for the integration suites. Every sampler
//! takes an explicit seeded RNG so runs are reproducible.

#![allow(dead_code)]

use dimenq::channels::Channel;
use dimenq::conic::SolveOptions;
use dimenq::linalg::{ComplexMatrix, HermitianOperator};
use dimenq::measurements::PovmSet;
use dimenq::states::DensityMatrix;
use dimenq::steering::{from_state_and_povms, Assemblage};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn opts() -> SolveOptions {
    SolveOptions::default()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let g = random_complex_matrix(rng, dim, dim);
    HermitianOperator::new(&g + &g.dagger()).unwrap()
}

pub fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let g = random_complex_matrix(rng, dim, dim);
    HermitianOperator::new(&g * &g.dagger()).unwrap()
}

pub fn random_density(rng: &mut ChaCha8Rng, dims: (usize, usize)) -> DensityMatrix {
    let d = dims.0 * dims.1;
    let p = random_psd(rng, d);
    DensityMatrix::new(dims, p.scale(1.0 / p.trace())).unwrap()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    random_hermitian(rng, dim).eigh().unwrap().vectors
}

pub fn random_state_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> =
        (0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// Random two-outcome qubit effect pair (E, I - E) with E = u P + v (I - P)
/// for a random projector P: covers every qubit effect.
pub fn random_qubit_binary_povm(rng: &mut ChaCha8Rng) -> Vec<HermitianOperator> {
    let psi = random_state_vector(rng, 2);
    let p = HermitianOperator::projector(&psi);
    let pc = HermitianOperator::identity(2).sub(&p);
    let u: f64 = rng.gen_range(0.0..1.0);
    let v: f64 = rng.gen_range(0.0..1.0);
    let e = p.scale(u).add(&pc.scale(v));
    let ec = HermitianOperator::identity(2).sub(&e);
    vec![e, ec]
}

/// Random pair of two-outcome qubit measurements.
pub fn random_qubit_pair(rng: &mut ChaCha8Rng) -> PovmSet {
    PovmSet::new(2, vec![random_qubit_binary_povm(rng), random_qubit_binary_povm(rng)]).unwrap()
}

/// Random three-outcome qubit POVM (trine-like): two subnormalized rank-1
/// pieces plus the completion; rejection-sampled until the completion is PSD.
pub fn random_trine_like_povm(rng: &mut ChaCha8Rng) -> Vec<HermitianOperator> {
    loop {
        let p1 = HermitianOperator::projector(&random_state_vector(rng, 2));
        let p2 = HermitianOperator::projector(&random_state_vector(rng, 2));
        let e1 = p1.scale(rng.gen_range(0.2..0.9));
        let e2 = p2.scale(rng.gen_range(0.2..0.9));
        let e3 = HermitianOperator::identity(2).sub(&e1).sub(&e2);
        if e3.min_eigenvalue().unwrap() >= 0.0 {
            return vec![e1, e2, e3];
        }
    }
}

/// Random pair of three-outcome qubit measurements.
pub fn random_trine_pair(rng: &mut ChaCha8Rng) -> PovmSet {
    PovmSet::new(2, vec![random_trine_like_povm(rng), random_trine_like_povm(rng)]).unwrap()
}

/// Random channel with a fixed number of Kraus operators, normalized through
/// `T^{-1/2}` with `T = sum K^dagger K`.
pub fn random_channel(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, n_kraus: usize) -> Channel {
    let raw: Vec<ComplexMatrix> = (0..n_kraus).map(|_| random_complex_matrix(rng, d_out, d_in)).collect();
    let mut t = ComplexMatrix::zeros(d_in, d_in);
    for k in &raw {
        t = &t + &(&k.dagger() * k);
    }
    let eig = HermitianOperator::new(t).unwrap().eigh().unwrap();
    let mut inv_sqrt = ComplexMatrix::zeros(d_in, d_in);
    for i in 0..d_in {
        inv_sqrt[(i, i)] = c(1.0 / eig.values[i].sqrt(), 0.0);
    }
    let tinv = &(&eig.vectors * &inv_sqrt) * &eig.vectors.dagger();
    Channel::new(d_in, d_out, raw.iter().map(|k| k * &tinv).collect()).unwrap()
}

/// Random qubit assemblage from a random two-qubit state and random
/// measurements on Alice's side.
pub fn random_qubit_assemblage(rng: &mut ChaCha8Rng) -> Assemblage {
    let rho = random_density(rng, (2, 2));
    let m = random_qubit_pair(rng);
    from_state_and_povms(&rho, &m).unwrap()
}
