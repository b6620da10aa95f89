use super::{CMatrix, C64};

/// Eigen-decomposition of a Hermitian matrix, `A = V·diag(values)·Vᴴ`.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

const MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi eigensolver. The input is assumed Hermitian; only
/// the upper triangle drives the rotations.
pub fn hermitian_eig(a: &CMatrix) -> HermitianEig {
    assert!(a.is_square(), "hermitian_eig needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.fro_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEig { values, vectors }
}

/// Eigenvalues only, ascending. Closed form for 1×1 and 2×2.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    match a.rows() {
        1 => vec![a[(0, 0)].re],
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let b = a[(0, 1)].norm();
            let mean = 0.5 * (p + q);
            let radius = (0.25 * (p - q) * (p - q) + b * b).sqrt();
            vec![mean - radius, mean + radius]
        }
        _ => hermitian_eig(a).values,
    }
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    // Phase the q-th basis vector so that the (p, q) entry becomes real.
    let phase = (apq / mag).conj();
    if phase != C64::new(1.0, 0.0) {
        for k in 0..n {
            m[(k, q)] *= phase;
        }
        for k in 0..n {
            m[(q, k)] *= phase.conj();
        }
        for k in 0..n {
            v[(k, q)] *= phase;
        }
    }

    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * s;
        m[(k, q)] = mkp * s + mkq * c;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * s;
        m[(q, k)] = mpk * s + mqk * c;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
}
