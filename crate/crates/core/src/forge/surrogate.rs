//! Log-sum-exp surrogate of the minimum pairwise projector distance and its
//! Euclidean gradient with respect to every codeword.

use std::f64::consts::SQRT_2;

use super::ForgeError;
use crate::grassmann::{chordal_overlap_form, Codebook};
use crate::linalg::CMatrix;

/// `log Σ_{i<j} exp(−‖P_i − P_j‖_F / ε)`, stabilized by the largest exponent.
pub fn smooth_mcd_objective(book: &Codebook, epsilon: f64) -> Result<f64, ForgeError> {
    if book.len() < 2 {
        return Err(ForgeError::TooFewCodewords(book.len()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ForgeError::InvalidConfig("epsilon must be positive".into()));
    }
    let mats: Vec<&CMatrix> = book.codewords().iter().map(|w| w.matrix()).collect();
    Ok(objective(&mats, epsilon))
}

fn log_sum_exp(exponents: &[f64]) -> f64 {
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + exponents.iter().map(|e| (e - max).exp()).sum::<f64>().ln()
}

pub(crate) fn objective(ws: &[&CMatrix], epsilon: f64) -> f64 {
    let n = ws.len();
    let mut exponents = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            exponents.push(-SQRT_2 * chordal_overlap_form(ws[i], ws[j]) / epsilon);
        }
    }
    log_sum_exp(&exponents)
}

/// Surrogate value and per-codeword Euclidean gradients `G_i`, in the sense
/// `dF = Σ_i Re tr(G_iᴴ dW_i)`.
pub(crate) fn objective_and_gradient(ws: &[CMatrix], epsilon: f64) -> (f64, Vec<CMatrix>) {
    let n = ws.len();
    let m = ws[0].cols() as f64;
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let cross = ws[i].adjoint_mul(&ws[j]);
            let dist = (m - cross.fro_norm_sqr()).max(0.0).sqrt();
            pairs.push((i, j, cross, dist));
        }
    }
    let exponents: Vec<f64> = pairs.iter().map(|p| -SQRT_2 * p.3 / epsilon).collect();
    let value = log_sum_exp(&exponents);

    let mut grads: Vec<CMatrix> = ws
        .iter()
        .map(|w| CMatrix::zeros(w.rows(), w.cols()))
        .collect();
    for ((i, j, cross, dist), e) in pairs.iter().zip(&exponents) {
        if *dist < 1e-12 {
            continue;
        }
        let weight = (e - value).exp();
        if weight < 1e-300 {
            continue;
        }
        // ∇_{W_i} ‖P_i − P_j‖_F = −sqrt(2)·W_j·Xᴴ / d with X = W_iᴴW_j.
        let coeff = weight * SQRT_2 / (epsilon * dist);
        let gi = ws[*j].matmul(&cross.adjoint()).scale_real(coeff);
        let gj = ws[*i].matmul(cross).scale_real(coeff);
        grads[*i] = &grads[*i] + &gi;
        grads[*j] = &grads[*j] + &gj;
    }
    (value, grads)
}
