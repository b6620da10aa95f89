//! Grassmann-manifold geometry on Stiefel representatives.
//!
//! A [`Codeword`] is a `T×M` matrix with orthonormal columns standing in for
//! the subspace it spans. Distances are chordal:
//! `d(A, B) = sqrt(M − ‖AᴴB‖_F²) = ‖AAᴴ − BBᴴ‖_F / sqrt(2)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMatrix;

/// Default Stiefel tolerance on `‖WᴴW − I‖_F`.
pub const STIEFEL_TOL: f64 = 1e-8;

/// Slack used when reporting which pair attains the minimum distance.
pub const ARGMIN_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not on the Stiefel manifold (residual {residual:.3e} > {tol:.1e})")]
    NotStiefel { residual: f64, tol: f64 },
    #[error("codeword must have 1 <= M < T, got T={t}, M={m}")]
    InvalidShape { t: usize, m: usize },
    #[error("codebook needs at least two codewords, got {0}")]
    TooFewCodewords(usize),
    #[error("codebook is empty")]
    EmptyCodebook,
}

/// A Stiefel point `W` with `WᴴW = I_M`, representing a point of G(T, M).
#[derive(Clone, Debug, PartialEq)]
pub struct Codeword {
    matrix: CMatrix,
}

impl Codeword {
    /// Validates orthonormality at [`STIEFEL_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self, GrassmannError> {
        Self::with_tolerance(matrix, STIEFEL_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self, GrassmannError> {
        let (t, m) = matrix.shape();
        if m >= t {
            return Err(GrassmannError::InvalidShape { t, m });
        }
        let residual = matrix.orthonormality_residual();
        if residual > tol {
            return Err(GrassmannError::NotStiefel { residual, tol });
        }
        Ok(Self { matrix })
    }

    /// Transmit dimension `T`.
    pub fn t(&self) -> usize {
        self.matrix.rows()
    }

    /// Stream count `M`.
    pub fn m(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Right-multiplies by an `M×M` matrix (a unitary one keeps the subspace).
    pub fn rotate(&self, u: &CMatrix) -> Result<Codeword, GrassmannError> {
        Codeword::new(self.matrix.matmul(u))
    }
}

/// Construction provenance stored alongside a codebook.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodebookMeta {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl CodebookMeta {
    pub fn new(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            seed: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Ordered codewords sharing the same `(T, M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    t: usize,
    m: usize,
    codewords: Vec<Codeword>,
    pub meta: CodebookMeta,
}

impl Codebook {
    pub fn new(codewords: Vec<Codeword>, meta: CodebookMeta) -> Result<Self, GrassmannError> {
        let first = codewords.first().ok_or(GrassmannError::EmptyCodebook)?;
        let (t, m) = (first.t(), first.m());
        for w in &codewords {
            if (w.t(), w.m()) != (t, m) {
                return Err(GrassmannError::DimensionMismatch {
                    left: (t, m),
                    right: (w.t(), w.m()),
                });
            }
        }
        Ok(Self {
            t,
            m,
            codewords,
            meta,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn get(&self, index: usize) -> Option<&Codeword> {
        self.codewords.get(index)
    }

    /// A codebook made of the codewords at `indices` (0-based), in order.
    pub fn subset(
        &self,
        indices: &[usize],
        meta: CodebookMeta,
    ) -> Result<Codebook, GrassmannError> {
        let picked = indices.iter().map(|&i| self.codewords[i].clone()).collect();
        Codebook::new(picked, meta)
    }
}

/// True iff `‖WᴴW − I_M‖_F ≤ tol`.
pub fn validate_stiefel(w: &CMatrix, tol: f64) -> bool {
    w.orthonormality_residual() <= tol
}

fn check_dims(a: &Codeword, b: &Codeword) -> Result<(), GrassmannError> {
    if (a.t(), a.m()) != (b.t(), b.m()) {
        return Err(GrassmannError::DimensionMismatch {
            left: (a.t(), a.m()),
            right: (b.t(), b.m()),
        });
    }
    Ok(())
}

/// Chordal distance `sqrt(M − ‖AᴴB‖_F²)`.
pub fn chordal_distance(a: &Codeword, b: &Codeword) -> Result<f64, GrassmannError> {
    check_dims(a, b)?;
    Ok(chordal_unchecked(a.matrix(), b.matrix()))
}

/// Chordal distance of two Stiefel matrices, validating both at [`STIEFEL_TOL`].
pub fn chordal_distance_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64, GrassmannError> {
    chordal_distance(&Codeword::new(a.clone())?, &Codeword::new(b.clone())?)
}

/// `sqrt(max(0, M − ‖AᴴB‖_F²))` taken literally; smooth off the manifold,
/// which gradient-based code relies on.
pub(crate) fn chordal_overlap_form(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = a.adjoint_mul(b).fro_norm_sqr();
    (a.cols() as f64 - overlap).max(0.0).sqrt()
}

/// Evaluates `M − ‖AᴴB‖_F²` as the mean of the two projection residuals
/// `‖B − AAᴴB‖_F²` and `‖A − BBᴴA‖_F²`, which avoids cancellation near zero
/// and is bitwise symmetric in its arguments.
pub(crate) fn chordal_unchecked(a: &CMatrix, b: &CMatrix) -> f64 {
    let x = a.adjoint_mul(b);
    let off_a = (b - &a.matmul(&x)).fro_norm_sqr();
    let off_b = (a - &b.matmul(&x.adjoint())).fro_norm_sqr();
    (0.5 * (off_a + off_b)).sqrt()
}

/// `‖AAᴴ − BBᴴ‖_F`, the projector distance (equal to `sqrt(2)` times the
/// chordal distance for Stiefel inputs).
pub fn projector_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (&a.projector() - &b.projector()).fro_norm()
}

/// Minimum pairwise chordal distance of a codebook and the first pair
/// (0-based, lexicographic) attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinDistance {
    pub value: f64,
    pub pair: (usize, usize),
}

pub fn min_chordal_distance(book: &Codebook) -> Result<MinDistance, GrassmannError> {
    let words = book.codewords();
    if words.len() < 2 {
        return Err(GrassmannError::TooFewCodewords(words.len()));
    }
    let n = words.len();
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            distances.push((
                (i, j),
                chordal_unchecked(words[i].matrix(), words[j].matrix()),
            ));
        }
    }
    let value = distances
        .iter()
        .map(|&(_, d)| d)
        .fold(f64::INFINITY, f64::min);
    let pair = distances
        .iter()
        .find(|&&(_, d)| d <= value + ARGMIN_SLACK)
        .map(|&(p, _)| p)
        .expect("at least one pair");
    Ok(MinDistance { value, pair })
}

/// Equal subspaces up to `tol` on the projector distance.
pub fn subspace_equal(a: &Codeword, b: &Codeword, tol: f64) -> Result<bool, GrassmannError> {
    check_dims(a, b)?;
    Ok(projector_distance(a.matrix(), b.matrix()) <= tol)
}
