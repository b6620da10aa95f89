use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use sparse_grassmann::forge::{
    build_expmap, build_general_sparse, build_sparse_2m, nr_codebook_4_2, optimize_manopt,
    proposed_codebook_4_2, quarter_grid, save_codebook,
};
use sparse_grassmann::{min_chordal_distance, Codebook, OptimizerConfig, PatternFilter};

use crate::output::{parse_grid, write_manifest};

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sparse2m,
    SparseGeneral,
    Manopt,
    Expmap,
    Nr42,
    Prop42,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    NearBalanced,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Transmit antennas (implied for sparse2m, nr42, prop42).
    #[arg(short = 'T', long = "tx")]
    t: Option<usize>,
    /// Streams.
    #[arg(short = 'M', long = "streams")]
    m: Option<usize>,
    /// Codebook size.
    #[arg(long)]
    size: Option<usize>,
    /// Nonzeros per codeword for sparse-general (default T).
    #[arg(short = 's', long)]
    sparsity: Option<usize>,
    /// Phase alphabet: `quarter`, `uniform:<n>`, or comma-separated radians.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum, default_value_t = Filter::NearBalanced)]
    filter: Filter,
    /// Codebook JSON to write.
    #[arg(long, short)]
    out: PathBuf,
}

fn phase_grid(text: &str) -> Result<Vec<f64>> {
    if text == "quarter" {
        return Ok(quarter_grid());
    }
    if let Some(n) = text.strip_prefix("uniform:") {
        let n: usize = n.parse()?;
        if n == 0 {
            bail!("uniform grid needs at least one level");
        }
        return Ok((0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect());
    }
    parse_grid(text).map_err(anyhow::Error::msg)
}

fn require(v: Option<usize>, flag: &str, method: Method) -> Result<usize> {
    v.ok_or_else(|| anyhow::anyhow!("{method:?} needs {flag}"))
}

fn fixed_table(args: &DesignArgs, book: Codebook) -> Result<Codebook> {
    for (given, want, flag) in [
        (args.t, 4, "-T"),
        (args.m, 2, "-M"),
        (args.size, 22, "--size"),
    ] {
        if given.is_some_and(|g| g != want) {
            bail!("{:?} is fixed at {flag} {want}", args.method);
        }
    }
    Ok(book)
}

pub fn build(args: &DesignArgs) -> Result<Codebook> {
    let mut cfg = OptimizerConfig::default().with_seed(args.seed);
    if let Some(g) = &args.grid {
        cfg = cfg.with_grid(phase_grid(g)?);
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    if let Some(it) = args.max_iters {
        cfg.max_iters = it;
    }
    cfg.pattern_filter = match args.filter {
        Filter::NearBalanced => PatternFilter::NearBalanced,
        Filter::All => PatternFilter::All,
    };
    let method = args.method;
    Ok(match method {
        Method::Sparse2m => {
            let m = require(args.m, "-M", method)?;
            if args.t.is_some_and(|t| t != 2 * m) {
                bail!("sparse2m requires T = 2M");
            }
            build_sparse_2m(m, require(args.size, "--size", method)?, &cfg)?
        }
        Method::SparseGeneral => {
            let t = require(args.t, "-T", method)?;
            let s = args.sparsity.unwrap_or(t);
            build_general_sparse(
                t,
                require(args.m, "-M", method)?,
                s,
                require(args.size, "--size", method)?,
                &cfg,
            )?
        }
        Method::Manopt => {
            let (t, m, size) = (
                require(args.t, "-T", method)?,
                require(args.m, "-M", method)?,
                require(args.size, "--size", method)?,
            );
            optimize_manopt(t, m, size, &cfg)?.0
        }
        Method::Expmap => build_expmap(
            require(args.t, "-T", method)?,
            require(args.m, "-M", method)?,
            require(args.size, "--size", method)?,
            &cfg,
        )?,
        Method::Nr42 => fixed_table(args, nr_codebook_4_2())?,
        Method::Prop42 => fixed_table(args, proposed_codebook_4_2())?,
    })
}

pub fn run(args: &DesignArgs) -> Result<()> {
    let started = Instant::now();
    let book = build(args)?;
    save_codebook(&book, &args.out)?;
    write_manifest("design", args, Some(args.seed), &[&args.out], started)?;
    let mcd = min_chordal_distance(&book)
        .map(|d| d.value)
        .unwrap_or(f64::INFINITY);
    println!(
        "T={} M={} size={} MCD {mcd}",
        book.t(),
        book.m(),
        book.len()
    );
    Ok(())
}
