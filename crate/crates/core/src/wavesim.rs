//! Per-antenna OFDM and DFT-s-OFDM waveforms and their PAPR statistics.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::grassmann::Codebook;
use crate::linalg::{dft_unitary, CMatrix, CVector, Transform, C64};
use crate::linksim::{sample_channel, select_index_gain, trial_rng, ChannelModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("invalid waveform configuration: {0}")]
    Config(String),
    #[error("signal is identically zero")]
    ZeroSignal,
    #[error("row sparsity must satisfy 1 <= ell <= M, got ell={ell}, M={m}")]
    InvalidEll { ell: usize, m: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Modulation {
    /// Gray-mapped `{±1 ± j}/sqrt(2)`.
    #[default]
    Qam4,
    /// `{1, j, −1, −j}`.
    Qpsk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Waveform {
    Ofdm,
    #[default]
    DftsOfdm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveformConfig {
    pub used_subcarriers: usize,
    pub fft_size: usize,
    pub oversampling: usize,
    pub modulation: Modulation,
    pub waveform: Waveform,
}

impl WaveformConfig {
    pub fn new(
        used_subcarriers: usize,
        fft_size: usize,
        oversampling: usize,
        waveform: Waveform,
    ) -> Self {
        Self {
            used_subcarriers,
            fft_size,
            oversampling,
            modulation: Modulation::Qam4,
            waveform,
        }
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        let bad = |m: String| Err(WaveError::Config(m));
        if self.used_subcarriers == 0 {
            return bad("need at least one used subcarrier".into());
        }
        if !self.fft_size.is_power_of_two() {
            return bad(format!("FFT size {} is not a power of two", self.fft_size));
        }
        if self.used_subcarriers > self.fft_size {
            return bad(format!(
                "{} subcarriers exceed FFT size {}",
                self.used_subcarriers, self.fft_size
            ));
        }
        if self.oversampling == 0 || !(self.oversampling * self.fft_size).is_power_of_two() {
            return bad(format!(
                "oversampled length {}x{} is not a power of two",
                self.oversampling, self.fft_size
            ));
        }
        Ok(())
    }

    /// Time-domain samples per frame, `Q·N_fft`.
    pub fn frame_len(&self) -> usize {
        self.oversampling * self.fft_size
    }
}

pub fn modulate_with(count: usize, modulation: Modulation, rng: &mut ChaCha8Rng) -> CVector {
    (0..count)
        .map(|_| {
            let bits: u8 = rng.random_range(0..4);
            match modulation {
                Modulation::Qam4 => {
                    let b0 = f64::from(bits & 1);
                    let b1 = f64::from(bits >> 1);
                    C64::new(
                        (1.0 - 2.0 * b0) * FRAC_1_SQRT_2,
                        (1.0 - 2.0 * b1) * FRAC_1_SQRT_2,
                    )
                }
                Modulation::Qpsk => [
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 1.0),
                    C64::new(-1.0, 0.0),
                    C64::new(0.0, -1.0),
                ][bits as usize],
            }
        })
        .collect()
}

/// Unit-power i.i.d. symbols; deterministic in `seed`.
pub fn modulate(count: usize, modulation: Modulation, seed: u64) -> CVector {
    modulate_with(count, modulation, &mut trial_rng(seed, 0))
}

/// Unitary DFT of one stream block.
pub fn dft_spread(symbols: &[C64]) -> CVector {
    dft_unitary(symbols, Transform::Forward)
}

/// `W·S` for an `M×K` block of stream symbols: the same precoder on every
/// subcarrier.
pub fn precode_grid(w: &CMatrix, streams: &CMatrix) -> Result<CMatrix, WaveError> {
    if w.cols() != streams.rows() {
        return Err(WaveError::DimensionMismatch(format!(
            "precoder has {} columns, grid has {} streams",
            w.cols(),
            streams.rows()
        )));
    }
    Ok(w.matmul(streams))
}

/// Frequency-to-time synthesizer holding a cached inverse FFT plan.
pub struct Synthesizer {
    cfg: WaveformConfig,
    plan: Arc<dyn Fft<f64>>,
}

impl Synthesizer {
    pub fn new(cfg: &WaveformConfig) -> Result<Self, WaveError> {
        cfg.validate()?;
        let plan = FftPlanner::<f64>::new().plan_fft_inverse(cfg.frame_len());
        Ok(Self {
            cfg: cfg.clone(),
            plan,
        })
    }

    /// Places symbol `k` on frequency `k − floor(K/2)` of the oversampled
    /// grid (negative frequencies wrap to the top) and applies a unitary
    /// inverse FFT.
    pub fn synthesize(&self, row: &[C64]) -> Result<CVector, WaveError> {
        let k_used = self.cfg.used_subcarriers;
        if row.len() != k_used {
            return Err(WaveError::DimensionMismatch(format!(
                "{} symbols for {k_used} subcarriers",
                row.len()
            )));
        }
        let len = self.cfg.frame_len();
        let mut buf = vec![C64::new(0.0, 0.0); len];
        let half = (k_used / 2) as isize;
        for (k, &z) in row.iter().enumerate() {
            let f = k as isize - half;
            buf[f.rem_euclid(len as isize) as usize] = z;
        }
        self.plan.process(&mut buf);
        let s = 1.0 / (len as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= s);
        Ok(buf)
    }
}

/// One-shot form of [`Synthesizer::synthesize`].
pub fn to_time_domain(row: &[C64], cfg: &WaveformConfig) -> Result<CVector, WaveError> {
    Synthesizer::new(cfg)?.synthesize(row)
}

/// `max |x|² / mean |x|²`.
pub fn papr(x: &[C64]) -> Result<f64, WaveError> {
    let mut peak: f64 = 0.0;
    let mut total = 0.0;
    for z in x {
        let p = z.norm_sqr();
        peak = peak.max(p);
        total += p;
    }
    if total == 0.0 {
        return Err(WaveError::ZeroSignal);
    }
    Ok(peak * x.len() as f64 / total)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `(threshold_db, Pr(PAPR > threshold))` for linear PAPR samples.
pub fn ccdf(samples: &[f64], thresholds_db: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = samples.iter().map(|&s| to_db(s)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    thresholds_db
        .iter()
        .map(|&t| {
            (
                t,
                (sorted.len() - sorted.partition_point(|&s| s <= t)) as f64 / n,
            )
        })
        .collect()
}

/// Smallest sample level in dB whose exceedance probability is at most
/// `prob`.
pub fn papr_at_ccdf(samples: &[f64], prob: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let k = ((n - 1.0 - n * prob).ceil().max(0.0) as usize).min(sorted.len() - 1);
    to_db(sorted[k])
}

/// `T×M` precoder whose row `t` has `ℓ` nonzeros, on streams
/// `(t + i) mod M` for `i < ℓ`, each of magnitude `sqrt(M/(ℓT))`.
///
/// `thetas`, when given, holds one phase per stream shared by every row;
/// otherwise each nonzero draws a uniform phase from `seed`.
pub fn row_sparse_precoder(
    t: usize,
    m: usize,
    ell: usize,
    thetas: Option<&[f64]>,
    seed: u64,
) -> Result<CMatrix, WaveError> {
    row_sparse_with(t, m, ell, thetas, &mut trial_rng(seed, 0))
}

fn row_sparse_with(
    t: usize,
    m: usize,
    ell: usize,
    thetas: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> Result<CMatrix, WaveError> {
    if ell == 0 || ell > m {
        return Err(WaveError::InvalidEll { ell, m });
    }
    if let Some(th) = thetas {
        if th.len() != m {
            return Err(WaveError::DimensionMismatch(format!(
                "{} phases for {m} streams",
                th.len()
            )));
        }
    }
    let amp = (m as f64 / (ell * t) as f64).sqrt();
    let mut w = CMatrix::zeros(t, m);
    for r in 0..t {
        for i in 0..ell {
            let s = (r + i) % m;
            let phase = match thetas {
                Some(th) => th[s],
                None => rng.random_range(-PI..PI),
            };
            w[(r, s)] = C64::from_polar(amp, phase);
        }
    }
    Ok(w)
}

/// Where each frame's precoder comes from.
#[derive(Clone, Debug)]
pub enum PrecoderSource<'a> {
    /// A uniformly random codeword per frame.
    Codebook(&'a Codebook),
    /// The codeword maximizing `‖HW‖_F²` for a fresh `rx × T` Rayleigh
    /// channel each frame.
    CodebookByChannel {
        book: &'a Codebook,
        rx: usize,
    },
    /// Row-sparse precoder; fixed phases, or fresh random phases per frame.
    RowSparse {
        t: usize,
        m: usize,
        ell: usize,
        thetas: Option<Vec<f64>>,
    },
    Fixed(CMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pooling {
    /// One sample per transmitting antenna per frame.
    #[default]
    PerAntenna,
    /// One sample per frame: the mean PAPR over its transmitting antennas.
    AntennaMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaprSamples {
    /// Linear PAPR values, frame-major.
    pub values: Vec<f64>,
    pub config: WaveformConfig,
    pub trials: usize,
    pub seed: u64,
}

impl PaprSamples {
    pub fn ccdf(&self, thresholds_db: &[f64]) -> Vec<(f64, f64)> {
        ccdf(&self.values, thresholds_db)
    }

    pub fn at_ccdf(&self, prob: f64) -> f64 {
        papr_at_ccdf(&self.values, prob)
    }
}

fn frame_precoder(source: &PrecoderSource, rng: &mut ChaCha8Rng) -> Result<CMatrix, WaveError> {
    match source {
        PrecoderSource::Codebook(book) => {
            let i = rng.random_range(0..book.len());
            Ok(book.codewords()[i].matrix().clone())
        }
        PrecoderSource::CodebookByChannel { book, rx } => {
            let ch = sample_channel(*rx, book.t(), ChannelModel::Rayleigh, false, rng)
                .map_err(|e| WaveError::Config(e.to_string()))?;
            let i = select_index_gain(&ch.h, book).map_err(|e| WaveError::Config(e.to_string()))?;
            Ok(book.codewords()[i].matrix().clone())
        }
        PrecoderSource::RowSparse { t, m, ell, thetas } => {
            row_sparse_with(*t, *m, *ell, thetas.as_deref(), rng)
        }
        PrecoderSource::Fixed(w) => Ok(w.clone()),
    }
}

fn stream_count(source: &PrecoderSource) -> usize {
    match source {
        PrecoderSource::Codebook(book) | PrecoderSource::CodebookByChannel { book, .. } => book.m(),
        PrecoderSource::RowSparse { m, .. } => *m,
        PrecoderSource::Fixed(w) => w.cols(),
    }
}

/// Frequency-domain antenna grid of one frame (`T×K_u`).
fn frame_grid(
    source: &PrecoderSource,
    cfg: &WaveformConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CMatrix, WaveError> {
    let m = stream_count(source);
    let k = cfg.used_subcarriers;
    let mut data = Vec::with_capacity(m * k);
    for _ in 0..m {
        let symbols = modulate_with(k, cfg.modulation, rng);
        match cfg.waveform {
            Waveform::Ofdm => data.extend(symbols),
            Waveform::DftsOfdm => data.extend(dft_spread(&symbols)),
        }
    }
    let streams = CMatrix::new(m, k, data).expect("m x k block");
    let w = frame_precoder(source, rng)?;
    precode_grid(&w, &streams)
}

/// Monte Carlo PAPR: each frame draws fresh symbols (DFT-spread for
/// DFT-s-OFDM), picks its precoder, and measures every antenna whose signal
/// is not identically zero.
pub fn papr_experiment(
    source: &PrecoderSource,
    cfg: &WaveformConfig,
    trials: usize,
    seed: u64,
    pooling: Pooling,
) -> Result<PaprSamples, WaveError> {
    let synth = Synthesizer::new(cfg)?;
    if trials == 0 {
        return Err(WaveError::Config("need at least one frame".into()));
    }
    if let PrecoderSource::RowSparse { m, ell, .. } = source {
        if *ell == 0 || ell > m {
            return Err(WaveError::InvalidEll { ell: *ell, m: *m });
        }
    }
    let per_frame: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|frame| -> Result<Vec<f64>, WaveError> {
            let mut rng = trial_rng(seed, frame as u64);
            let grid = frame_grid(source, cfg, &mut rng)?;
            let mut out = Vec::with_capacity(grid.rows());
            for r in 0..grid.rows() {
                let x = synth.synthesize(grid.row(r))?;
                match papr(&x) {
                    Ok(p) => out.push(p),
                    Err(WaveError::ZeroSignal) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(match pooling {
                Pooling::PerAntenna => out,
                Pooling::AntennaMean if out.is_empty() => out,
                Pooling::AntennaMean => vec![out.iter().sum::<f64>() / out.len() as f64],
            })
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = per_frame.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(WaveError::ZeroSignal);
    }
    Ok(PaprSamples {
        values,
        config: cfg.clone(),
        trials,
        seed,
    })
}

/// Nyquist-rate (`Q = 1`) time samples of every antenna for one frame, for
/// constellation scatter plots.
pub fn scatter_frame(
    source: &PrecoderSource,
    cfg: &WaveformConfig,
    seed: u64,
) -> Result<CMatrix, WaveError> {
    let nyquist = WaveformConfig {
        oversampling: 1,
        ..cfg.clone()
    };
    let synth = Synthesizer::new(&nyquist)?;
    let grid = frame_grid(source, &nyquist, &mut trial_rng(seed, 0))?;
    let rows: Vec<Vec<C64>> = (0..grid.rows())
        .map(|r| synth.synthesize(grid.row(r)))
        .collect::<Result<_, _>>()?;
    Ok(CMatrix::from_rows(&rows).expect("equal-length rows"))
}
