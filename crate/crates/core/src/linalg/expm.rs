use super::{CMatrix, LinalgError, C64, SKEW_HERMITIAN_TOL};

/// Matrix exponential of a skew-Hermitian matrix.
///
/// Scaling and squaring: the input is halved until its 1-norm is at most
/// 1/2, exponentiated with a Taylor series truncated once the terms fall
/// below machine precision, then squared back. For skew-Hermitian input the
/// result is unitary to roughly `1e-14` for the sizes used here.
pub fn matexp_skew_hermitian(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let residual = (a + &a.adjoint()).fro_norm();
    if residual > SKEW_HERMITIAN_TOL {
        return Err(LinalgError::NotSkewHermitian { residual });
    }

    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.fro_norm() <= f64::EPSILON * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}
