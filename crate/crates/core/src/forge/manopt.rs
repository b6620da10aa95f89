//! Dense baseline: Riemannian gradient descent on the product of
//! Grassmannians, minimizing the log-sum-exp surrogate with an ε
//! continuation schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::surrogate::{objective, objective_and_gradient};
use super::{ForgeError, OptimizerConfig};
use crate::audit::{real_variable_count, OptimizerKind};
use crate::grassmann::{chordal_unchecked, Codebook, CodebookMeta, Codeword};
use crate::linalg::{qr_orthonormalize, CMatrix, C64};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;

/// Diagnostics of the winning restart.
#[derive(Clone, Debug, PartialEq)]
pub struct ManoptReport {
    pub restart: usize,
    pub initial_mcd: f64,
    pub final_mcd: f64,
    pub accepted_steps: usize,
}

fn min_distance(ws: &[CMatrix]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..ws.len() {
        for j in i + 1..ws.len() {
            best = best.min(chordal_unchecked(&ws[i], &ws[j]));
        }
    }
    best
}

pub(crate) fn random_stiefel(t: usize, m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    loop {
        let a = CMatrix::from_fn(t, m, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        if let Ok(q) = qr_orthonormalize(&a) {
            return q;
        }
    }
}

fn retract(ws: &[CMatrix], dirs: &[CMatrix], step: f64) -> Option<Vec<CMatrix>> {
    ws.iter()
        .zip(dirs)
        .map(|(w, d)| qr_orthonormalize(&(w - &d.scale_real(step))).ok())
        .collect()
}

struct Run {
    codewords: Vec<CMatrix>,
    report: ManoptReport,
}

fn single_run(t: usize, m: usize, size: usize, cfg: &OptimizerConfig, restart: usize) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
    let mut ws: Vec<CMatrix> = (0..size).map(|_| random_stiefel(t, m, &mut rng)).collect();
    let initial_mcd = min_distance(&ws);
    let mut best = ws.clone();
    let mut best_mcd = initial_mcd;
    let mut accepted_steps = 0;

    for &eps in &cfg.epsilons {
        let mut step = cfg.initial_step * eps;
        let (mut value, mut grads) = objective_and_gradient(&ws, eps);
        for _ in 0..cfg.max_iters {
            // Tangent projection (I − WWᴴ)G.
            let dirs: Vec<CMatrix> = ws
                .iter()
                .zip(&grads)
                .map(|(w, g)| g - &w.matmul(&w.adjoint_mul(g)))
                .collect();
            let slope: f64 = dirs.iter().map(CMatrix::fro_norm_sqr).sum();
            if slope.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            while step >= MIN_STEP * eps {
                if let Some(candidate) = retract(&ws, &dirs, step) {
                    let refs: Vec<&CMatrix> = candidate.iter().collect();
                    if objective(&refs, eps) <= value - ARMIJO * step * slope {
                        ws = candidate;
                        accepted = true;
                        break;
                    }
                }
                step *= cfg.backtrack;
            }
            if !accepted {
                break;
            }
            accepted_steps += 1;
            step /= cfg.backtrack;
            (value, grads) = objective_and_gradient(&ws, eps);
            let mcd = min_distance(&ws);
            if mcd > best_mcd {
                best_mcd = mcd;
                best = ws.clone();
            }
        }
    }
    Run {
        codewords: best,
        report: ManoptReport {
            restart,
            initial_mcd,
            final_mcd: best_mcd,
            accepted_steps,
        },
    }
}

/// Optimizes `size` points of G(T, M) from random starts and returns the
/// restart with the largest minimum distance (ties go to the lower restart
/// index). The returned iterate is the best one seen, so its MCD never falls
/// below that of its random initialization.
pub fn optimize_manopt(
    t: usize,
    m: usize,
    size: usize,
    cfg: &OptimizerConfig,
) -> Result<(Codebook, ManoptReport), ForgeError> {
    cfg.validate()?;
    if size < 2 {
        return Err(ForgeError::InvalidConfig(format!(
            "codebook size must be >= 2, got {size}"
        )));
    }
    if m == 0 || m >= t {
        return Err(ForgeError::InvalidConfig(format!(
            "need 1 <= M < T, got T={t}, M={m}"
        )));
    }
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| single_run(t, m, size, cfg, r))
        .collect();
    let winner = runs
        .into_iter()
        .reduce(|a, b| {
            if b.report.final_mcd > a.report.final_mcd {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");

    let codewords = winner
        .codewords
        .into_iter()
        .map(Codeword::new)
        .collect::<Result<Vec<_>, _>>()?;
    let meta = CodebookMeta::new("manopt")
        .with_seed(cfg.seed)
        .param("T", t)
        .param("M", m)
        .param("size", size)
        .param("restarts", cfg.restarts)
        .param("epsilons", cfg.epsilons.clone())
        .param("max_iters", cfg.max_iters)
        .param(
            "real_variables",
            real_variable_count(OptimizerKind::Manopt, t, m, size)?,
        )
        .param("initial_mcd", winner.report.initial_mcd)
        .param("mcd", winner.report.final_mcd);
    Ok((Codebook::new(codewords, meta)?, winner.report))
}
