//! Sparse constructors: the perfect-matching design for `T = 2M` and a
//! general one over Schubert-cell sparsity patterns.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::phases::{optimize_phases_2m, PhaseAssignment};
use super::surrogate::objective_and_gradient;
use super::{wrap_phase, ForgeError, OptimizerConfig, PatternFilter};
use crate::audit::{real_variable_count, OptimizerKind};
use crate::grassmann::{chordal_unchecked, Codebook, CodebookMeta, Codeword};
use crate::linalg::CMatrix;
use crate::schubert::{
    enumerate_patterns, matching_patterns, pair_pattern_codeword, pattern_to_codeword,
    SparsityPattern,
};

const ARMIJO: f64 = 1e-4;

/// Phase instances per matching: the first `r` patterns get `L`, the rest
/// `L − 1`, with `L = ceil(size / (2M − 1))`.
pub fn instances_per_pattern(m: usize, size: usize) -> Vec<usize> {
    let patterns = 2 * m - 1;
    let l = size.div_ceil(patterns);
    if l == 0 {
        return vec![0; patterns];
    }
    let full = size - (l - 1) * patterns;
    (0..patterns)
        .map(|p| if p < full { l } else { l - 1 })
        .collect()
}

/// `T = 2M` codebook: every perfect matching of the `2M` rows carries up to
/// `L` equal-amplitude codewords that differ only in their phases.
pub fn build_sparse_2m(
    m: usize,
    size: usize,
    cfg: &OptimizerConfig,
) -> Result<Codebook, ForgeError> {
    cfg.validate()?;
    if m < 2 {
        return Err(ForgeError::InvalidConfig(format!("need M >= 2, got {m}")));
    }
    if size == 0 {
        return Err(ForgeError::InvalidConfig(
            "codebook size must be >= 1".into(),
        ));
    }
    let patterns = matching_patterns(m)?;
    let counts = instances_per_pattern(m, size);
    let l = counts[0];
    let solution = optimize_phases_2m(m, l, cfg)?;

    let assignments: Vec<PhaseAssignment> = counts
        .iter()
        .enumerate()
        .flat_map(|(p, &c)| {
            solution.thetas[..c].iter().map(move |th| PhaseAssignment {
                pattern: p,
                thetas: th.clone(),
            })
        })
        .collect();
    let words = assignments
        .iter()
        .map(|a| pair_pattern_codeword(&patterns[a.pattern], &a.thetas))
        .collect::<Result<Vec<_>, _>>()?;

    let mut meta = CodebookMeta::new("sparse2m")
        .with_seed(cfg.seed)
        .param("T", 2 * m)
        .param("M", m)
        .param("size", size)
        .param("L", l)
        .param(
            "real_variables",
            real_variable_count(OptimizerKind::Proposed2M, 2 * m, m, size)?,
        );
    if solution.thetas.len() > 1 {
        meta = meta.param("intra_pattern_distance", solution.min_distance());
    }
    if let Some(grid) = &cfg.phase_grid {
        meta = meta
            .param("phase_grid", grid.clone())
            .param("grid_optimal", solution.exact);
    }
    Ok(Codebook::new(words, meta)?)
}

fn near_balanced(p: &SparsityPattern) -> bool {
    let (lo, hi) = (p.sparsity() / p.m(), p.sparsity().div_ceil(p.m()));
    p.supports().iter().all(|s| (lo..=hi).contains(&s.len()))
}

fn equal_amplitudes(p: &SparsityPattern) -> Vec<Vec<f64>> {
    p.supports().iter().map(|s| vec![1.0; s.len()]).collect()
}

fn materialize(p: &SparsityPattern, phases: &[f64]) -> Result<Codeword, ForgeError> {
    Ok(pattern_to_codeword(p, phases, &equal_amplitudes(p))?)
}

/// Positions `(row, col)` (0-based) of the free, non-pivot entries of a
/// pattern together with their index in the phase vector.
fn free_entries(p: &SparsityPattern) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (col, support) in p.supports().iter().enumerate() {
        for (k, &row) in support.iter().enumerate().skip(1) {
            out.push((row - 1, col, offset + k));
        }
        offset += support.len();
    }
    out
}

/// Minimum distance and the number of pairs attaining it.
type Score = (f64, usize);

fn min_distance(words: &[CMatrix]) -> Score {
    let mut min = f64::INFINITY;
    let mut count = 0;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = chordal_unchecked(&words[i], &words[j]);
            if d < min - 1e-12 {
                min = d;
                count = 1;
            } else if d <= min + 1e-12 {
                count += 1;
            }
        }
    }
    (min, count)
}

fn better(a: Score, b: Score) -> bool {
    a.0 > b.0 + 1e-12 || ((a.0 - b.0).abs() <= 1e-12 && a.1 < b.1)
}

struct Layout<'a> {
    patterns: Vec<&'a SparsityPattern>,
    free: Vec<Vec<(usize, usize, usize)>>,
}

impl Layout<'_> {
    fn build(&self, phases: &[Vec<f64>]) -> Vec<CMatrix> {
        self.patterns
            .iter()
            .zip(phases)
            .map(|(p, ph)| materialize(p, ph).expect("unit amplitudes").into_matrix())
            .collect()
    }
}

fn continuous_run(
    layout: &Layout,
    cfg: &OptimizerConfig,
    restart: usize,
) -> (Score, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
    let mut phases: Vec<Vec<f64>> = layout
        .patterns
        .iter()
        .zip(&layout.free)
        .map(|(p, free)| {
            let mut ph = vec![0.0; p.sparsity()];
            for &(_, _, idx) in free {
                ph[idx] = rng.random_range(-PI..PI);
            }
            ph
        })
        .collect();
    let mut words = layout.build(&phases);
    let mut best = phases.clone();
    let mut best_score = min_distance(&words);

    let phase_gradient = |words: &[CMatrix], grads: &[CMatrix]| -> Vec<Vec<f64>> {
        layout
            .free
            .iter()
            .enumerate()
            .map(|(i, free)| {
                let mut g = vec![0.0; layout.patterns[i].sparsity()];
                for &(r, c, idx) in free {
                    g[idx] = -(grads[i][(r, c)].conj() * words[i][(r, c)]).im;
                }
                g
            })
            .collect()
    };

    for &eps in &cfg.epsilons {
        let mut step = cfg.initial_step * eps;
        let (mut value, grads) = objective_and_gradient(&words, eps);
        let mut grad = phase_gradient(&words, &grads);
        for _ in 0..cfg.max_iters {
            let slope: f64 = grad.iter().flatten().map(|g| g * g).sum();
            if slope.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            while step >= 1e-14 * eps {
                let trial: Vec<Vec<f64>> = phases
                    .iter()
                    .zip(&grad)
                    .map(|(ph, g)| {
                        ph.iter()
                            .zip(g)
                            .map(|(a, d)| wrap_phase(a - step * d))
                            .collect()
                    })
                    .collect();
                let trial_words = layout.build(&trial);
                let (trial_value, trial_grads) = objective_and_gradient(&trial_words, eps);
                if trial_value <= value - ARMIJO * step * slope {
                    phases = trial;
                    words = trial_words;
                    value = trial_value;
                    grad = phase_gradient(&words, &trial_grads);
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if !accepted {
                break;
            }
            step /= cfg.backtrack;
            let score = min_distance(&words);
            if better(score, best_score) {
                best_score = score;
                best = phases.clone();
            }
        }
    }
    (best_score, best)
}

fn grid_run(layout: &Layout, grid: &[f64], seed: u64, restart: usize) -> (Score, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
    let mut phases: Vec<Vec<f64>> = layout
        .patterns
        .iter()
        .zip(&layout.free)
        .map(|(p, free)| {
            let mut ph = vec![0.0; p.sparsity()];
            for &(_, _, idx) in free {
                ph[idx] = grid[rng.random_range(0..grid.len())];
            }
            ph
        })
        .collect();
    let mut words = layout.build(&phases);
    let mut current = min_distance(&words);
    loop {
        let mut improved = false;
        for i in 0..phases.len() {
            for &(_, _, idx) in &layout.free[i] {
                for &g in grid {
                    let old = phases[i][idx];
                    if old == g {
                        continue;
                    }
                    phases[i][idx] = g;
                    let candidate =
                        materialize(layout.patterns[i], &phases[i]).expect("unit amplitudes");
                    let previous = std::mem::replace(&mut words[i], candidate.into_matrix());
                    let score = min_distance(&words);
                    if better(score, current) {
                        current = score;
                        improved = true;
                    } else {
                        phases[i][idx] = old;
                        words[i] = previous;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (current, phases)
}

/// General sparse codebook on `T×M` patterns with `s` nonzeros.
///
/// Patterns are taken round-robin from the lexicographic enumeration
/// (restricted by `cfg.pattern_filter`), entries have equal magnitude per
/// column, and the non-pivot phases are optimized jointly: by descent on the
/// smooth minimum-distance surrogate, or by coordinate search when
/// `cfg.phase_grid` is set. The best of `cfg.restarts` runs is kept.
pub fn build_general_sparse(
    t: usize,
    m: usize,
    s: usize,
    size: usize,
    cfg: &OptimizerConfig,
) -> Result<Codebook, ForgeError> {
    cfg.validate()?;
    if !(t > m && m > 1 && m <= s && s <= t) {
        return Err(ForgeError::InvalidConfig(format!(
            "need T > M > 1 and M <= s <= T, got T={t}, M={m}, s={s}"
        )));
    }
    if size < 2 {
        return Err(ForgeError::InvalidConfig(format!(
            "codebook size must be >= 2, got {size}"
        )));
    }
    let all = enumerate_patterns(t, m, s)?;
    let pool: Vec<SparsityPattern> = match cfg.pattern_filter {
        PatternFilter::All => all,
        PatternFilter::NearBalanced => all.into_iter().filter(near_balanced).collect(),
    };
    let patterns: Vec<&SparsityPattern> = (0..size).map(|k| &pool[k % pool.len()]).collect();
    let free = patterns.iter().map(|p| free_entries(p)).collect();
    let layout = Layout { patterns, free };

    let runs: Vec<(Score, Vec<Vec<f64>>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| match &cfg.phase_grid {
            Some(grid) => grid_run(&layout, grid, cfg.seed, r),
            None => continuous_run(&layout, cfg, r),
        })
        .collect();
    let (score, phases) = runs
        .into_iter()
        .reduce(|a, b| if better(b.0, a.0) { b } else { a })
        .expect("at least one restart");

    let words = layout
        .patterns
        .iter()
        .zip(&phases)
        .map(|(p, ph)| materialize(p, ph))
        .collect::<Result<Vec<_>, _>>()?;
    let mut meta = CodebookMeta::new("sparse-general")
        .with_seed(cfg.seed)
        .param("T", t)
        .param("M", m)
        .param("s", s)
        .param("size", size)
        .param("patterns_available", pool.len())
        .param("mcd", score.0);
    if let Some(grid) = &cfg.phase_grid {
        meta = meta.param("phase_grid", grid.clone());
    }
    Ok(Codebook::new(words, meta)?)
}
