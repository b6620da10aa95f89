//! Exponential-map baseline: codewords `exp([[0, Θ], [−Θᴴ, 0]]) I_{T,M}` with
//! `Θ` drawn entrywise from a scaled 4-QAM alphabet.

use std::f64::consts::FRAC_1_SQRT_2;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ForgeError, OptimizerConfig};
use crate::grassmann::{chordal_unchecked, Codebook, CodebookMeta, Codeword};
use crate::linalg::{matexp_skew_hermitian, CMatrix, C64};

/// Codewords closer than this to an earlier one are redrawn.
const DUPLICATE_DISTANCE: f64 = 1e-6;
/// Consecutive rejected draws before giving up.
const MAX_REDRAWS: usize = 10_000;

/// `exp([[0, Θ], [−Θᴴ, 0]])` restricted to its first `M` columns, for an
/// `M×(T−M)` block `Θ`.
pub fn expmap_codeword(theta: &CMatrix) -> Result<Codeword, ForgeError> {
    let (m, rest) = theta.shape();
    let t = m + rest;
    let mut a = CMatrix::zeros(t, t);
    for r in 0..m {
        for c in 0..rest {
            a[(r, m + c)] = theta[(r, c)];
            a[(m + c, r)] = -theta[(r, c)].conj();
        }
    }
    let u = matexp_skew_hermitian(&a)?;
    Ok(Codeword::new(u.leading_columns(m))?)
}

fn draw_theta(m: usize, rest: usize, spread: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    let amp = spread * FRAC_1_SQRT_2;
    CMatrix::from_fn(m, rest, |_, _| {
        let re = if rng.random::<bool>() { amp } else { -amp };
        let im = if rng.random::<bool>() { amp } else { -amp };
        C64::new(re, im)
    })
}

/// `size` distinct codewords with `Θ` entries in `σ{±1 ± j}/sqrt(2)`,
/// `σ = cfg.expmap_spread`; deterministic in `cfg.seed`.
pub fn build_expmap(
    t: usize,
    m: usize,
    size: usize,
    cfg: &OptimizerConfig,
) -> Result<Codebook, ForgeError> {
    cfg.validate()?;
    if size < 2 {
        return Err(ForgeError::InvalidConfig(format!(
            "codebook size must be >= 2, got {size}"
        )));
    }
    if m == 0 || m >= t {
        return Err(ForgeError::InvalidConfig(format!(
            "need 1 <= M < T, got T={t}, M={m}"
        )));
    }
    let capacity = BigUint::from(4u8).pow((m * (t - m)) as u32);
    if BigUint::from(size) > capacity {
        return Err(ForgeError::AlphabetExhausted {
            requested: size,
            capacity: capacity.to_string(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut words: Vec<Codeword> = Vec::with_capacity(size);
    let mut misses = 0;
    while words.len() < size {
        let w = expmap_codeword(&draw_theta(m, t - m, cfg.expmap_spread, &mut rng))?;
        let duplicate = words
            .iter()
            .any(|v| chordal_unchecked(v.matrix(), w.matrix()) < DUPLICATE_DISTANCE);
        if duplicate {
            misses += 1;
            if misses >= MAX_REDRAWS {
                return Err(ForgeError::AlphabetExhausted {
                    requested: size,
                    capacity: capacity.to_string(),
                });
            }
            continue;
        }
        misses = 0;
        words.push(w);
    }
    let meta = CodebookMeta::new("expmap")
        .with_seed(cfg.seed)
        .param("T", t)
        .param("M", m)
        .param("size", size)
        .param("spread", cfg.expmap_spread);
    Ok(Codebook::new(words, meta)?)
}
