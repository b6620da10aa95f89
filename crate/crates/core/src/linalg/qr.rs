use super::{CMatrix, CVector, LinalgError, C64};

/// Columns whose residual after projection drops below this (relative to
/// the input's Frobenius norm) are treated as linearly dependent.
const RANK_TOL: f64 = 1e-12;

/// Q factor of a thin QR decomposition with a real nonnegative R diagonal.
///
/// Gram-Schmidt with one re-orthogonalization pass, which keeps `QᴴQ = I`
/// at machine precision for the well-conditioned inputs produced by
/// retractions.
pub fn qr_orthonormalize(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(LinalgError::WideMatrix { rows, cols });
    }
    let scale = a.fro_norm().max(1.0);
    let mut q: Vec<CVector> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = a.column(j);
        for _ in 0..2 {
            for basis in &q {
                let coeff: C64 = basis.iter().zip(&v).map(|(b, x)| b.conj() * x).sum();
                for (x, b) in v.iter_mut().zip(basis) {
                    *x -= coeff * b;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= RANK_TOL * scale {
            return Err(LinalgError::RankDeficient {
                column: j,
                residual: norm,
            });
        }
        v.iter_mut().for_each(|z| *z /= norm);
        q.push(v);
    }
    CMatrix::from_columns(&q)
}
