use rustfft::FftPlanner;

use super::{CVector, LinalgError, C64};

/// Direction of a discrete Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Forward,
    Inverse,
}

/// Unitary power-of-two FFT: both directions scale by `1/sqrt(N)`.
pub fn fft(x: &[C64], direction: Transform) -> Result<CVector, LinalgError> {
    if !x.len().is_power_of_two() {
        return Err(LinalgError::NonPowerOfTwoLength(x.len()));
    }
    Ok(dft_unitary(x, direction))
}

/// Unitary DFT of any nonzero length (mixed radix / Bluestein inside rustfft).
pub fn dft_unitary(x: &[C64], direction: Transform) -> CVector {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = match direction {
        Transform::Forward => planner.plan_fft_forward(n),
        Transform::Inverse => planner.plan_fft_inverse(n),
    };
    let mut buf = x.to_vec();
    plan.process(&mut buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}
