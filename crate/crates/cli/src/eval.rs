use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use sparse_grassmann::forge::load_codebook;
use sparse_grassmann::linksim::{gain_samples, median, rate_curve, ChannelModel};
use sparse_grassmann::{min_chordal_distance, Codebook};

use crate::output::{emit, parse_grid, write_manifest, Table};

fn load_all(files: &[PathBuf]) -> Result<Vec<Codebook>> {
    files
        .iter()
        .map(|f| load_codebook(f).with_context(|| format!("loading {}", f.display())))
        .collect()
}

fn finish<P: Serialize>(
    command: &str,
    params: &P,
    seed: Option<u64>,
    text: &str,
    out: Option<&Path>,
    started: Instant,
) -> Result<()> {
    emit(text, out)?;
    if let Some(o) = out {
        write_manifest(command, params, seed, &[o], started)?;
    }
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct McdArgs {
    /// Codebook JSON files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// CSV destination (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn mcd(args: &McdArgs) -> Result<()> {
    let started = Instant::now();
    let mut table = Table::new(&["file", "size", "mcd", "first", "second"]);
    for (file, book) in args.files.iter().zip(load_all(&args.files)?) {
        let d = min_chordal_distance(&book).with_context(|| format!("{}", file.display()))?;
        let (i, j) = d.pair;
        table.row(&[&file.display(), &book.len(), &d.value, &(i + 1), &(j + 1)]);
    }
    finish(
        "mcd",
        args,
        None,
        &table.into_string(),
        args.out.as_deref(),
        started,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct RateArgs {
    /// Codebook JSON files, compared pairwise on shared channels.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Receive antennas.
    #[arg(short = 'N', long = "rx", default_value_t = 32)]
    n: usize,
    /// SNR points in dB: `a:b:step` or a comma list.
    #[arg(long, default_value = "0:20:2")]
    snr: String,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn rate(args: &RateArgs) -> Result<()> {
    let started = Instant::now();
    let snr = parse_grid(&args.snr).map_err(anyhow::Error::msg)?;
    let books = load_all(&args.files)?;
    let refs: Vec<&Codebook> = books.iter().collect();
    let curve = rate_curve(&refs, args.n, &snr, args.trials, args.seed)?;

    let mut header = vec!["snr_db".to_string()];
    header.extend((1..=books.len()).map(|b| format!("rate_{b}")));
    for d in &curve.differences {
        header.push(format!("diff_{}_{}", d.first + 1, d.second + 1));
        header.push(format!("se_{}_{}", d.first + 1, d.second + 1));
    }
    let mut table = Table::new(&header);
    for (s, db) in curve.snr_db.iter().enumerate() {
        let mut cells = vec![db.to_string()];
        cells.extend(curve.mean_rates.iter().map(|r| r[s].to_string()));
        for d in &curve.differences {
            cells.push(d.mean[s].to_string());
            cells.push(d.std_error[s].to_string());
        }
        table.row_strings(cells);
    }
    finish(
        "rate",
        args,
        Some(args.seed),
        &table.into_string(),
        args.out.as_deref(),
        started,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct GainCdfArgs {
    /// Codebook JSON files, evaluated on shared channels.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(short = 'N', long = "rx", default_value_t = 32)]
    n: usize,
    /// Rician K factors; `inf` is pure line of sight.
    #[arg(long, value_delimiter = ',', default_value = "0,1,inf")]
    k: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn gain_cdf(args: &GainCdfArgs) -> Result<()> {
    let started = Instant::now();
    let books = load_all(&args.files)?;
    let refs: Vec<&Codebook> = books.iter().collect();
    let mut header = vec!["k".to_string(), "cdf".to_string()];
    header.extend((1..=books.len()).map(|b| format!("gain_{b}")));
    let mut table = Table::new(&header);
    for label in &args.k {
        let k: f64 = label.parse().with_context(|| format!("bad K {label:?}"))?;
        let mut samples = gain_samples(
            &refs,
            args.n,
            ChannelModel::Rician { k },
            args.trials,
            args.seed,
        )?;
        for s in &mut samples {
            s.sort_by(f64::total_cmp);
        }
        let medians: Vec<String> = samples
            .iter()
            .map(|s| format!("{:.6}", median(s)))
            .collect();
        eprintln!("K={label}: medians {}", medians.join(" "));
        let n = args.trials as f64;
        for r in 0..args.trials {
            let mut cells = vec![label.clone(), ((r + 1) as f64 / n).to_string()];
            cells.extend(samples.iter().map(|s| s[r].to_string()));
            table.row_strings(cells);
        }
    }
    finish(
        "gain-cdf",
        args,
        Some(args.seed),
        &table.into_string(),
        args.out.as_deref(),
        started,
    )
}
