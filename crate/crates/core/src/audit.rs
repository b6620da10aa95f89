//! Complexity accounting: complex-multiply counts for index selection and
//! precoding, codebook storage, and optimizer variable counts.
//!
//! Multiplies are counted in complex units. The instrumented Gram paths in
//! [`crate::linksim`] feed an [`OpTrace`] so the formulas can be checked
//! against what the code actually does.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{CMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("dimensions must be positive with M < T, got T={t}, M={m}")]
    InvalidDims { t: usize, m: usize },
    #[error("{method} requires T = 2M, got T={t}, M={m}")]
    InvalidForMethod {
        method: OptimizerKind,
        t: usize,
        m: usize,
    },
    #[error("operation trace was not enabled")]
    InstrumentationDisabled,
    #[error("unknown optimizer {0:?} (expected manopt or proposed2m)")]
    UnknownMethod(String),
}

/// Optimizer whose free real variables are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OptimizerKind {
    Manopt,
    Proposed2M,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Manopt => "manopt",
            OptimizerKind::Proposed2M => "proposed2m",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "manopt" => Ok(OptimizerKind::Manopt),
            "proposed2m" | "proposed" | "sparse2m" => Ok(OptimizerKind::Proposed2M),
            _ => Err(AuditError::UnknownMethod(s.to_string())),
        }
    }
}

fn check(t: usize, m: usize) -> Result<(), AuditError> {
    if m == 0 || m >= t {
        return Err(AuditError::InvalidDims { t, m });
    }
    Ok(())
}

/// Multiplies to form `(HW)ᴴ(HW)` for an `N×T` channel: `NTM + NM²` dense,
/// `NT + NM²` when every row of `W` has one nonzero.
pub fn gram_mult_count(t: usize, m: usize, n: usize, sparse: bool) -> u64 {
    let (t, m, n) = (t as u64, m as u64, n as u64);
    let product = if sparse { n * t } else { n * t * m };
    product + n * m * m
}

/// Multiplies to apply `W` to one stream vector: `MT` dense, `T` sparse.
pub fn precode_mult_count(t: usize, m: usize, sparse: bool) -> u64 {
    if sparse {
        t as u64
    } else {
        (m * t) as u64
    }
}

/// Stored scalars: `size·T·M` complex values dense, `size·T`
/// (value, column) records sparse.
pub fn storage_count(t: usize, m: usize, size: usize, sparse: bool) -> u64 {
    if sparse {
        (size * t) as u64
    } else {
        (size * t * m) as u64
    }
}

/// Free real scalars: `2·size·M(T−M)` for manifold descent,
/// `ceil(size/(2M−1))·M` for the matching construction (needs `T = 2M`).
pub fn real_variable_count(
    kind: OptimizerKind,
    t: usize,
    m: usize,
    size: usize,
) -> Result<u64, AuditError> {
    check(t, m)?;
    match kind {
        OptimizerKind::Manopt => Ok((2 * size * m * (t - m)) as u64),
        OptimizerKind::Proposed2M => {
            if t != 2 * m {
                return Err(AuditError::InvalidForMethod { method: kind, t, m });
            }
            Ok((size.div_ceil(2 * m - 1) * m) as u64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub size: usize,
    pub gram_dense: u64,
    pub gram_sparse: u64,
    pub selection_dense: u64,
    pub selection_sparse: u64,
    pub precode_dense: u64,
    pub precode_sparse: u64,
    pub storage_dense: u64,
    pub storage_sparse: u64,
    pub real_variables_manopt: u64,
    /// Present only when `T = 2M`.
    pub real_variables_proposed: Option<u64>,
}

/// All counts for one scenario; index selection is one Gram per codeword.
pub fn complexity_report(
    t: usize,
    m: usize,
    n: usize,
    size: usize,
) -> Result<ComplexityReport, AuditError> {
    check(t, m)?;
    let gram_dense = gram_mult_count(t, m, n, false);
    let gram_sparse = gram_mult_count(t, m, n, true);
    Ok(ComplexityReport {
        t,
        m,
        n,
        size,
        gram_dense,
        gram_sparse,
        selection_dense: gram_dense * size as u64,
        selection_sparse: gram_sparse * size as u64,
        precode_dense: precode_mult_count(t, m, false),
        precode_sparse: precode_mult_count(t, m, true),
        storage_dense: storage_count(t, m, size, false),
        storage_sparse: storage_count(t, m, size, true),
        real_variables_manopt: real_variable_count(OptimizerKind::Manopt, t, m, size)?,
        real_variables_proposed: real_variable_count(OptimizerKind::Proposed2M, t, m, size).ok(),
    })
}

/// Explicit multiply counter threaded through instrumented kernels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpTrace {
    pub enabled: bool,
    pub complex_mults: u64,
}

impl OpTrace {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            complex_mults: 0,
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record(&mut self, mults: u64) {
        if self.enabled {
            self.complex_mults += mults;
        }
    }
}

pub fn measured_mult_count(trace: &OpTrace) -> Result<u64, AuditError> {
    if !trace.enabled {
        return Err(AuditError::InstrumentationDisabled);
    }
    Ok(trace.complex_mults)
}

/// ELLPACK storage: a fixed number of (value, column) slots per row, padded
/// with explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellpack {
    rows: usize,
    cols: usize,
    width: usize,
    values: Vec<C64>,
    columns: Vec<usize>,
}

impl Ellpack {
    /// Width is the largest row population, at least one.
    pub fn from_dense(a: &CMatrix) -> Self {
        let (rows, cols) = a.shape();
        let width = (0..rows).map(|r| a.row_nnz(r)).max().unwrap_or(0).max(1);
        let mut values = Vec::with_capacity(rows * width);
        let mut columns = Vec::with_capacity(rows * width);
        for r in 0..rows {
            let mut filled = 0;
            for (c, z) in a.row(r).iter().enumerate() {
                if *z != C64::new(0.0, 0.0) {
                    values.push(*z);
                    columns.push(c);
                    filled += 1;
                }
            }
            for _ in filled..width {
                values.push(C64::new(0.0, 0.0));
                columns.push(0);
            }
        }
        Self {
            rows,
            cols,
            width,
            values,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Slots per row.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored records, padding included.
    pub fn records(&self) -> usize {
        self.values.len()
    }

    /// `(value, column)` slots of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (C64, usize)> + '_ {
        let span = r * self.width..(r + 1) * self.width;
        self.values[span.clone()]
            .iter()
            .copied()
            .zip(self.columns[span].iter().copied())
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut a = CMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (v, c) in self.row(r) {
                a[(r, c)] += v;
            }
        }
        a
    }
}
