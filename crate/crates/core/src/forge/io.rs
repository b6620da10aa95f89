//! Codebook JSON:
//! `{"T": int, "M": int, "codewords": [[[re, im], ...], ...], "meta": {...}}`
//! with each codeword flattened row-major. Floats are written with 17
//! significant digits so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::ForgeError;
use crate::grassmann::{Codebook, CodebookMeta, Codeword, STIEFEL_TOL};
use crate::linalg::{CMatrix, C64};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCodebook {
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "M")]
    m: usize,
    codewords: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    meta: CodebookMeta,
}

fn push_float(out: &mut String, x: f64) {
    if x == 0.0 && x.is_sign_negative() {
        out.push_str("-0.0");
    } else if x == 0.0 {
        out.push_str("0.0");
    } else {
        write!(out, "{x:.16e}").expect("write to string");
    }
}

/// Serializes with canonical field order and a trailing newline.
pub fn codebook_to_json(book: &Codebook) -> String {
    let mut out = String::new();
    write!(
        out,
        "{{\n  \"T\": {},\n  \"M\": {},\n  \"codewords\": [",
        book.t(),
        book.m()
    )
    .unwrap();
    for (k, word) in book.codewords().iter().enumerate() {
        out.push_str(if k == 0 { "\n    [" } else { ",\n    [" });
        for (i, z) in word.matrix().as_slice().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push('[');
            push_float(&mut out, z.re);
            out.push_str(", ");
            push_float(&mut out, z.im);
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("\n  ],\n  \"meta\": ");
    out.push_str(&serde_json::to_string(&book.meta).expect("meta is plain JSON"));
    out.push_str("\n}\n");
    out
}

/// Parses and validates every codeword at the default Stiefel tolerance.
pub fn codebook_from_json(text: &str) -> Result<Codebook, ForgeError> {
    let raw: RawCodebook =
        serde_json::from_str(text).map_err(|e| ForgeError::Parse(e.to_string()))?;
    if raw.m == 0 || raw.m >= raw.t {
        return Err(ForgeError::DimensionMismatch(format!(
            "need 1 <= M < T, got T={}, M={}",
            raw.t, raw.m
        )));
    }
    if raw.codewords.is_empty() {
        return Err(ForgeError::Parse("codebook has no codewords".into()));
    }
    let mut words = Vec::with_capacity(raw.codewords.len());
    for (index, entries) in raw.codewords.into_iter().enumerate() {
        if entries.len() != raw.t * raw.m {
            return Err(ForgeError::DimensionMismatch(format!(
                "codeword {index} has {} entries, expected {}",
                entries.len(),
                raw.t * raw.m
            )));
        }
        let data = entries
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        let matrix = CMatrix::new(raw.t, raw.m, data)?;
        let residual = matrix.orthonormality_residual();
        if residual.is_nan() || residual > STIEFEL_TOL {
            return Err(ForgeError::NotStiefel { index, residual });
        }
        words.push(Codeword::new(matrix)?);
    }
    Ok(Codebook::new(words, raw.meta)?)
}

pub fn save_codebook(book: &Codebook, path: impl AsRef<Path>) -> Result<(), ForgeError> {
    fs::write(path, codebook_to_json(book))?;
    Ok(())
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook, ForgeError> {
    codebook_from_json(&fs::read_to_string(path)?)
}
