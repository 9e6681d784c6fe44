//! Seeded random generation of Ginibre matrices, vectors and PSD operators.
//! Every stream is derived from (seed, salt) so parallel consumers stay
//! reproducible regardless of scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::matrix::{vec_normalize, ComplexMatrix, HermitianOperator};

/// Reproducible source of Ginibre-style randomness.
#[derive(Clone, Copy, Debug)]
pub struct RandomModel {
    pub seed: u64,
}

impl RandomModel {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent stream for worker `salt`, stable across runs.
    pub fn stream(&self, salt: u64) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&salt.to_le_bytes());
        key[16..24].copy_from_slice(&0x5eed_cafe_u64.to_le_bytes());
        ChaCha12Rng::from_seed(key)
    }
}

/// One standard complex Gaussian sample (Box-Muller).
pub fn standard_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin()) / Complex64::new(2.0f64.sqrt(), 0.0)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| standard_complex(rng)).collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

pub fn ginibre_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| standard_complex(rng)).collect()
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v = ginibre_vector(rng, n);
        if let Ok(u) = vec_normalize(&v) {
            return u;
        }
    }
}

/// Random PSD operator G G^dag from a square Ginibre G.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize) -> HermitianOperator {
    let g = ginibre_matrix(rng, n, n);
    let p = g.mul(&g.dagger()).unwrap();
    HermitianOperator::symmetrize(&p).unwrap()
}

/// Random PSD operator normalized to unit trace.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> HermitianOperator {
    let p = random_psd(rng, n);
    let t = p.matrix().trace().re;
    HermitianOperator::certify(p.matrix().scale_re(1.0 / t)).unwrap()
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> HermitianOperator {
    let g = ginibre_matrix(rng, n, n);
    HermitianOperator::symmetrize(&g).unwrap()
}
