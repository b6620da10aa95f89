//! Limited-feedback link simulation: fading channels, achievable rate,
//! codeword selection and paired Monte Carlo curves.
//!
//! Every trial draws its channel from its own ChaCha8 stream
//! (`seed_from_u64(seed)` with `set_stream(trial)`), and trials are reduced
//! in fixed chunks, so results do not depend on the thread count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::audit::{Ellpack, OpTrace};
use crate::grassmann::{Codebook, Codeword};
use crate::linalg::{hermitian_eigenvalues, CMatrix, C64};

/// Trials per reduction chunk.
const CHUNK: usize = 1024;
/// Ties within this slack go to the smaller index.
pub const SELECTION_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Rician K must be nonnegative (or infinite), got {0}")]
    InvalidK(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel {
    Rayleigh,
    /// `k = f64::INFINITY` is pure line of sight.
    Rician {
        k: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub model: ChannelModel,
}

impl ChannelRealization {
    /// Receive antennas.
    pub fn n(&self) -> usize {
        self.h.rows()
    }

    /// Transmit antennas.
    pub fn t(&self) -> usize {
        self.h.cols()
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn cn01(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rayleigh_matrix(n: usize, t: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, t, |_, _| cn01(rng))
}

/// Half-wavelength ULA response `e^{jπ k sin φ}`.
pub fn steering_vector(len: usize, angle: f64) -> Vec<C64> {
    let s = angle.sin();
    (0..len)
        .map(|k| C64::from_polar(1.0, PI * k as f64 * s))
        .collect()
}

fn los_matrix(n: usize, t: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let ar = steering_vector(n, rng.random_range(-FRAC_PI_2..=FRAC_PI_2));
    let at = steering_vector(t, rng.random_range(-FRAC_PI_2..=FRAC_PI_2));
    CMatrix::from_fn(n, t, |r, c| ar[r] * at[c].conj())
}

fn check_k(k: f64) -> Result<(), LinkError> {
    if k.is_nan() || k < 0.0 {
        return Err(LinkError::InvalidK(k));
    }
    Ok(())
}

/// Draws one channel of `model` from `rng`. `normalize` scales by
/// `1/sqrt(NT)` so that `E‖H‖_F² = 1`.
pub fn sample_channel(
    n: usize,
    t: usize,
    model: ChannelModel,
    normalize: bool,
    rng: &mut ChaCha8Rng,
) -> Result<ChannelRealization, LinkError> {
    if n == 0 || t == 0 {
        return Err(LinkError::InvalidArgument(
            "antenna counts must be positive".into(),
        ));
    }
    let h = match model {
        ChannelModel::Rayleigh => rayleigh_matrix(n, t, rng),
        ChannelModel::Rician { k } => {
            check_k(k)?;
            if k.is_infinite() {
                los_matrix(n, t, rng)
            } else {
                let nlos = rayleigh_matrix(n, t, rng);
                let los = los_matrix(n, t, rng);
                &los.scale_real((k / (k + 1.0)).sqrt()) + &nlos.scale_real((1.0 / (k + 1.0)).sqrt())
            }
        }
    };
    let h = if normalize {
        h.scale_real(1.0 / ((n * t) as f64).sqrt())
    } else {
        h
    };
    Ok(ChannelRealization { h, model })
}

/// `N×T` i.i.d. CN(0, 1) channel.
pub fn sample_rayleigh(n: usize, t: usize, seed: u64) -> Result<ChannelRealization, LinkError> {
    sample_channel(n, t, ChannelModel::Rayleigh, false, &mut trial_rng(seed, 0))
}

/// `sqrt(K/(K+1))·a_r a_tᴴ + sqrt(1/(K+1))·H_NLoS` with uniform ULA angles.
pub fn sample_rician(
    n: usize,
    t: usize,
    k: f64,
    seed: u64,
    normalize: bool,
) -> Result<ChannelRealization, LinkError> {
    sample_channel(
        n,
        t,
        ChannelModel::Rician { k },
        normalize,
        &mut trial_rng(seed, 0),
    )
}

/// `(HW)ᴴ(HW)` with explicit loops, recording `NTM + NM²` multiplies.
pub fn gram_dense(h: &CMatrix, w: &CMatrix, trace: &mut OpTrace) -> CMatrix {
    let (n, t) = h.shape();
    let m = w.cols();
    let mut hw = CMatrix::zeros(n, m);
    for r in 0..n {
        for k in 0..t {
            let hv = h[(r, k)];
            for c in 0..m {
                hw[(r, c)] += hv * w[(k, c)];
            }
        }
    }
    trace.record((n * t * m) as u64);
    gram_of(&hw, trace)
}

/// `(HW)ᴴ(HW)` for `W` in ELLPACK form, recording `NT·width + NM²`
/// multiplies (padding slots included).
pub fn gram_sparse(h: &CMatrix, w: &Ellpack, trace: &mut OpTrace) -> CMatrix {
    let (n, t) = h.shape();
    let mut hw = CMatrix::zeros(n, w.cols());
    for k in 0..t {
        for (v, c) in w.row(k) {
            for r in 0..n {
                hw[(r, c)] += h[(r, k)] * v;
            }
            trace.record(n as u64);
        }
    }
    gram_of(&hw, trace)
}

fn gram_of(hw: &CMatrix, trace: &mut OpTrace) -> CMatrix {
    let (n, m) = hw.shape();
    let mut g = CMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..n {
                acc += hw[(r, a)].conj() * hw[(r, b)];
            }
            g[(a, b)] = acc;
        }
    }
    trace.record((n * m * m) as u64);
    g
}

fn rate_from_gram(g: &CMatrix, rho: f64) -> f64 {
    let scale = rho / g.rows() as f64;
    hermitian_eigenvalues(g)
        .iter()
        .map(|&l| (1.0 + scale * l.max(0.0)).log2())
        .sum()
}

fn check_dims(h: &CMatrix, w: &Codeword) -> Result<(), LinkError> {
    if h.cols() != w.t() {
        return Err(LinkError::DimensionMismatch(format!(
            "channel has {} transmit antennas, codeword has {} rows",
            h.cols(),
            w.t()
        )));
    }
    Ok(())
}

/// `log2 det(I + (ρ/M)·WᴴHᴴHW)` via the eigenvalues of the `M×M` Gram.
pub fn achievable_rate(h: &CMatrix, w: &Codeword, rho: f64) -> Result<f64, LinkError> {
    check_dims(h, w)?;
    if rho.is_nan() || rho < 0.0 {
        return Err(LinkError::InvalidArgument(format!(
            "SNR must be nonnegative, got {rho}"
        )));
    }
    Ok(rate_from_gram(
        &gram_dense(h, w.matrix(), &mut OpTrace::disabled()),
        rho,
    ))
}

/// `‖HW‖_F²`.
pub fn effective_gain(h: &CMatrix, w: &Codeword) -> Result<f64, LinkError> {
    check_dims(h, w)?;
    Ok(h.matmul(w.matrix()).fro_norm_sqr())
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let v: Vec<f64> = values.collect();
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.iter()
        .position(|&x| x >= best - SELECTION_SLACK)
        .unwrap_or(0)
}

/// Per-trial `HᴴH`, shared by every codeword evaluation.
fn channel_gram(h: &CMatrix) -> CMatrix {
    h.adjoint_mul(h)
}

fn rate_with(hh: &CMatrix, w: &CMatrix, rho: f64) -> f64 {
    rate_from_gram(&w.adjoint_mul(&hh.matmul(w)), rho)
}

fn gain_with(hh: &CMatrix, w: &CMatrix) -> f64 {
    w.adjoint_mul(&hh.matmul(w))
        .as_slice()
        .iter()
        .step_by(w.cols() + 1)
        .map(|z| z.re)
        .sum()
}

/// Smallest (0-based) index whose rate is within [`SELECTION_SLACK`] of the
/// best.
pub fn select_index(h: &CMatrix, book: &Codebook, rho: f64) -> Result<usize, LinkError> {
    let rates = book
        .codewords()
        .iter()
        .map(|w| achievable_rate(h, w, rho))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(argmax_first(rates.into_iter()))
}

/// As [`select_index`] with `‖HW‖_F²` as the criterion.
pub fn select_index_gain(h: &CMatrix, book: &Codebook) -> Result<usize, LinkError> {
    let gains = book
        .codewords()
        .iter()
        .map(|w| effective_gain(h, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(argmax_first(gains.into_iter()))
}

/// Mean and standard error of `rate(first) − rate(second)` over the same
/// channels.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedDifference {
    pub first: usize,
    pub second: usize,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub snr_db: Vec<f64>,
    /// `mean_rates[codebook][snr]` in bits/s/Hz.
    pub mean_rates: Vec<Vec<f64>>,
    /// Every ordered pair `first < second`.
    pub differences: Vec<PairedDifference>,
    pub trials: usize,
    pub seed: u64,
}

impl RateCurve {
    pub fn difference(&self, first: usize, second: usize) -> Option<&PairedDifference> {
        self.differences
            .iter()
            .find(|d| d.first == first && d.second == second)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone)]
struct RateSums {
    rates: Vec<Vec<f64>>,
    diff: Vec<Vec<f64>>,
    diff_sq: Vec<Vec<f64>>,
}

impl RateSums {
    fn zeros(books: usize, pairs: usize, snrs: usize) -> Self {
        Self {
            rates: vec![vec![0.0; snrs]; books],
            diff: vec![vec![0.0; snrs]; pairs],
            diff_sq: vec![vec![0.0; snrs]; pairs],
        }
    }

    fn add(&mut self, other: &RateSums) {
        let add = |a: &mut Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
            for (x, y) in a.iter_mut().zip(b) {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
            }
        };
        add(&mut self.rates, &other.rates);
        add(&mut self.diff, &other.diff);
        add(&mut self.diff_sq, &other.diff_sq);
    }
}

fn check_books(books: &[&Codebook]) -> Result<usize, LinkError> {
    let first = books
        .first()
        .ok_or_else(|| LinkError::InvalidArgument("no codebooks".into()))?;
    for b in books {
        if b.t() != first.t() {
            return Err(LinkError::DimensionMismatch("codebooks differ in T".into()));
        }
    }
    Ok(first.t())
}

/// Paired Monte Carlo rate curves over i.i.d. Rayleigh `N×T` channels: each
/// trial's channel is shared by every codebook, and each codebook selects its
/// best codeword by rate at every SNR point.
pub fn rate_curve(
    books: &[&Codebook],
    n: usize,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<RateCurve, LinkError> {
    let t = check_books(books)?;
    if trials == 0 {
        return Err(LinkError::InvalidArgument("need at least one trial".into()));
    }
    if n == 0 {
        return Err(LinkError::InvalidArgument(
            "need at least one receive antenna".into(),
        ));
    }
    let rhos: Vec<f64> = snr_db.iter().map(|&d| db_to_linear(d)).collect();
    let pairs: Vec<(usize, usize)> = (0..books.len())
        .flat_map(|i| (i + 1..books.len()).map(move |j| (i, j)))
        .collect();
    let chunks = trials.div_ceil(CHUNK);

    let partial: Vec<RateSums> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = RateSums::zeros(books.len(), pairs.len(), rhos.len());
            let mut best = vec![vec![0.0; rhos.len()]; books.len()];
            for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(seed, trial as u64);
                let ch = sample_channel(n, t, ChannelModel::Rayleigh, false, &mut rng)
                    .expect("valid dims");
                let hh = channel_gram(&ch.h);
                for (b, book) in books.iter().enumerate() {
                    for (s, &rho) in rhos.iter().enumerate() {
                        best[b][s] = book
                            .codewords()
                            .iter()
                            .map(|w| rate_with(&hh, w.matrix(), rho))
                            .fold(f64::NEG_INFINITY, f64::max);
                        sums.rates[b][s] += best[b][s];
                    }
                }
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    for (s, (a, b)) in best[i].iter().zip(&best[j]).enumerate() {
                        let d = a - b;
                        sums.diff[p][s] += d;
                        sums.diff_sq[p][s] += d * d;
                    }
                }
            }
            sums
        })
        .collect();
    let mut total = RateSums::zeros(books.len(), pairs.len(), rhos.len());
    for p in &partial {
        total.add(p);
    }

    let nt = trials as f64;
    let mean_rates = total
        .rates
        .iter()
        .map(|r| r.iter().map(|x| x / nt).collect())
        .collect();
    let differences = pairs
        .iter()
        .enumerate()
        .map(|(p, &(first, second))| {
            let mean: Vec<f64> = total.diff[p].iter().map(|x| x / nt).collect();
            let std_error = total.diff_sq[p]
                .iter()
                .zip(&mean)
                .map(|(sq, mu)| {
                    if trials < 2 {
                        return 0.0;
                    }
                    let var = ((sq - nt * mu * mu) / (nt - 1.0)).max(0.0);
                    (var / nt).sqrt()
                })
                .collect();
            PairedDifference {
                first,
                second,
                mean,
                std_error,
            }
        })
        .collect();
    Ok(RateCurve {
        snr_db: snr_db.to_vec(),
        mean_rates,
        differences,
        trials,
        seed,
    })
}

/// Per-trial selected gains `max_i ‖HW_i‖_F²` under normalized channels of
/// `model`, for every codebook on the same channel sequence:
/// `result[codebook][trial]`.
pub fn gain_samples(
    books: &[&Codebook],
    n: usize,
    model: ChannelModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, LinkError> {
    let t = check_books(books)?;
    if trials == 0 {
        return Err(LinkError::InvalidArgument("need at least one trial".into()));
    }
    if let ChannelModel::Rician { k } = model {
        check_k(k)?;
    }
    sample_channel(n, t, model, true, &mut trial_rng(seed, 0))?;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let ch = sample_channel(n, t, model, true, &mut rng).expect("validated");
            let hh = channel_gram(&ch.h);
            books
                .iter()
                .map(|b| {
                    b.codewords()
                        .iter()
                        .map(|w| gain_with(&hh, w.matrix()))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    Ok((0..books.len())
        .map(|b| per_trial.iter().map(|v| v[b]).collect())
        .collect())
}

/// Sorted selected-gain samples of one codebook under normalized Rician
/// channels with factor `k` (`0` is Rayleigh, `∞` pure line of sight).
pub fn gain_cdf(
    book: &Codebook,
    n: usize,
    k: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, LinkError> {
    let mut samples = gain_samples(&[book], n, ChannelModel::Rician { k }, trials, seed)?.remove(0);
    samples.sort_by(f64::total_cmp);
    Ok(samples)
}

/// Empirical `Pr(X ≤ x)` of sorted samples.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

/// Median of sorted samples (mean of the two middle values for even length).
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
