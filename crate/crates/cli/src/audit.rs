use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use sparse_grassmann::audit::{complexity_report, real_variable_count, OptimizerKind};

use crate::output::{emit, write_manifest, Table};

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(short = 'T', long = "tx", default_value_t = 4)]
    t: usize,
    #[arg(short = 'M', long = "streams", default_value_t = 2)]
    m: usize,
    #[arg(short = 'N', long = "rx", default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 22)]
    size: usize,
    /// Sweep real-variable counts over codebook sizes `a:b` instead.
    #[arg(long)]
    sweep: Option<String>,
    /// Optimizers for the sweep.
    #[arg(long, value_delimiter = ',', default_value = "manopt,proposed2m")]
    methods: Vec<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn sweep(args: &AuditArgs, range: &str) -> Result<String> {
    let kinds: Vec<OptimizerKind> = args
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_, _>>()?;
    let (a, b) = range
        .split_once(':')
        .ok_or_else(|| anyhow::anyhow!("--sweep expects a:b, got {range:?}"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    anyhow::ensure!(1 <= a && a <= b, "--sweep needs 1 <= a <= b");
    let mut header = vec!["size".to_string()];
    header.extend(kinds.iter().map(|k| format!("real_variables_{k}")));
    let mut table = Table::new(&header);
    for size in a..=b {
        let mut cells = vec![size.to_string()];
        for k in &kinds {
            cells.push(real_variable_count(*k, args.t, args.m, size)?.to_string());
        }
        table.row_strings(cells);
    }
    Ok(table.into_string())
}

pub fn run(args: &AuditArgs) -> Result<()> {
    let started = Instant::now();
    let text = match &args.sweep {
        Some(range) => sweep(args, range)?,
        None => {
            let mut json = serde_json::to_string_pretty(&complexity_report(
                args.t, args.m, args.n, args.size,
            )?)?;
            json.push('\n');
            json
        }
    };
    emit(&text, args.out.as_deref())?;
    if let Some(out) = &args.out {
        write_manifest("audit", args, None, &[out], started)?;
    }
    Ok(())
}
