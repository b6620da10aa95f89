#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparse_grassmann::linalg::{qr_orthonormalize, CMatrix, C64};
use sparse_grassmann::Codeword;

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

pub fn stiefel(t: usize, m: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    qr_orthonormalize(&gaussian(t, m, &mut rng)).unwrap()
}

pub fn codeword(t: usize, m: usize, seed: u64) -> Codeword {
    Codeword::new(stiefel(t, m, seed)).unwrap()
}

pub fn unitary(m: usize, seed: u64) -> CMatrix {
    stiefel(m, m, seed)
}
