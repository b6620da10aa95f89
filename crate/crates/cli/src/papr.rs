use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use sparse_grassmann::forge::load_codebook;
use sparse_grassmann::wavesim::{
    papr_experiment, scatter_frame, Modulation, Pooling, PrecoderSource, Waveform, WaveformConfig,
};
use sparse_grassmann::Codebook;

use crate::output::{emit, parse_grid, write_manifest, Table};

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformArg {
    Ofdm,
    DftsOfdm,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolingArg {
    PerAntenna,
    AntennaMean,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationArg {
    Qam4,
    Qpsk,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionArg {
    /// Uniformly random codeword per frame.
    Random,
    /// Best-gain codeword for a fresh Rayleigh channel per frame.
    Channel,
}

#[derive(Debug, Args, Serialize)]
pub struct PaprArgs {
    /// Codebook JSON files; each frame uses a uniformly drawn codeword.
    files: Vec<PathBuf>,
    /// How codebook schemes pick each frame's codeword.
    #[arg(long, value_enum, default_value_t = SelectionArg::Random)]
    selection: SelectionArg,
    /// Receive antennas for `--selection channel`.
    #[arg(short = 'N', long = "rx", default_value_t = 32)]
    n: usize,
    /// Row-sparse precoder `T,M,ell`; may be repeated.
    #[arg(long = "row-sparse")]
    row_sparse: Vec<String>,
    /// Per-stream phases for row-sparse precoders (random per frame if omitted).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    thetas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = WaveformArg::Both)]
    waveform: WaveformArg,
    #[arg(long, default_value_t = 624)]
    subcarriers: usize,
    #[arg(long, default_value_t = 1024)]
    fft_size: usize,
    #[arg(long, default_value_t = 8)]
    oversampling: usize,
    #[arg(long, value_enum, default_value_t = ModulationArg::Qam4)]
    modulation: ModulationArg,
    #[arg(long, default_value_t = 10_000)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PoolingArg::PerAntenna)]
    pooling: PoolingArg,
    /// CCDF thresholds in dB: `a:b:step` or a comma list.
    #[arg(long, default_value = "0:14:0.1")]
    thresholds: String,
    /// Also write Nyquist-rate time samples of one frame per scheme.
    #[arg(long)]
    scatter: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Scheme<'a> {
    label: String,
    source: PrecoderSource<'a>,
}

fn row_sparse(text: &str, thetas: Option<&Vec<f64>>) -> Result<(String, PrecoderSource<'static>)> {
    let dims: Vec<usize> = text
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --row-sparse {text:?}"))?;
    let [t, m, ell] = dims[..] else {
        bail!("--row-sparse expects T,M,ell, got {text:?}");
    };
    Ok((
        format!("rs{t}x{m}l{ell}"),
        PrecoderSource::RowSparse {
            t,
            m,
            ell,
            thetas: thetas.cloned(),
        },
    ))
}

pub fn run(args: &PaprArgs) -> Result<()> {
    let started = Instant::now();
    let thresholds = parse_grid(&args.thresholds).map_err(anyhow::Error::msg)?;
    let books: Vec<Codebook> = args
        .files
        .iter()
        .map(|f| load_codebook(f).with_context(|| format!("loading {}", f.display())))
        .collect::<Result<_>>()?;
    let mut schemes: Vec<Scheme> = books
        .iter()
        .enumerate()
        .map(|(i, book)| Scheme {
            label: format!("cb{}", i + 1),
            source: match args.selection {
                SelectionArg::Random => PrecoderSource::Codebook(book),
                SelectionArg::Channel => PrecoderSource::CodebookByChannel { book, rx: args.n },
            },
        })
        .collect();
    for text in &args.row_sparse {
        let (label, source) = row_sparse(text, args.thetas.as_ref())?;
        schemes.push(Scheme { label, source });
    }
    if schemes.is_empty() {
        bail!("give at least one codebook file or --row-sparse precoder");
    }
    let waveforms: Vec<(&str, Waveform)> = match args.waveform {
        WaveformArg::Ofdm => vec![("ofdm", Waveform::Ofdm)],
        WaveformArg::DftsOfdm => vec![("dfts", Waveform::DftsOfdm)],
        WaveformArg::Both => vec![("ofdm", Waveform::Ofdm), ("dfts", Waveform::DftsOfdm)],
    };
    let modulation = match args.modulation {
        ModulationArg::Qam4 => Modulation::Qam4,
        ModulationArg::Qpsk => Modulation::Qpsk,
    };
    let pooling = match args.pooling {
        PoolingArg::PerAntenna => Pooling::PerAntenna,
        PoolingArg::AntennaMean => Pooling::AntennaMean,
    };

    let mut header = vec!["papr_db".to_string()];
    let mut curves = Vec::new();
    let mut scatter = Table::new(&["waveform", "scheme", "antenna", "sample", "re", "im"]);
    for (wname, waveform) in &waveforms {
        let mut cfg = WaveformConfig::new(
            args.subcarriers,
            args.fft_size,
            args.oversampling,
            *waveform,
        );
        cfg.modulation = modulation;
        for scheme in &schemes {
            let samples = papr_experiment(&scheme.source, &cfg, args.frames, args.seed, pooling)?;
            eprintln!(
                "{wname} {}: PAPR at CCDF 1e-2 = {:.3} dB",
                scheme.label,
                samples.at_ccdf(1e-2)
            );
            header.push(format!("ccdf_{wname}_{}", scheme.label));
            curves.push(samples.ccdf(&thresholds));
            if args.scatter.is_some() {
                let frame = scatter_frame(&scheme.source, &cfg, args.seed)?;
                for a in 0..frame.rows() {
                    for (k, z) in frame.row(a).iter().enumerate() {
                        scatter.row(&[wname, &scheme.label, &(a + 1), &k, &z.re, &z.im]);
                    }
                }
            }
        }
    }
    let mut table = Table::new(&header);
    for (i, thr) in thresholds.iter().enumerate() {
        let mut cells = vec![thr.to_string()];
        cells.extend(curves.iter().map(|c| c[i].1.to_string()));
        table.row_strings(cells);
    }
    emit(&table.into_string(), args.out.as_deref())?;
    if let Some(path) = &args.scatter {
        fs::write(path, scatter.into_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(out) = &args.out {
        let mut outputs = vec![out.as_path()];
        outputs.extend(args.scatter.as_deref());
        write_manifest("papr", args, Some(args.seed), &outputs, started)?;
    }
    Ok(())
}
