//! Phase instances for the `T = 2M` construction.
//!
//! Two codewords on the same perfect matching with second-row phases `a` and
//! `b` sit at squared chordal distance `Σ_m sin²((a_m − b_m)/2)`, so packing
//! `L` instances on one pattern is a max-min problem on the torus.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{wrap_phase, ForgeError, OptimizerConfig};

/// Largest vertex set (`grid^M`) handled by the exact clique search.
const MAX_CLIQUE_VERTICES: usize = 4096;
/// Search-tree nodes per threshold before falling back to local search.
const CLIQUE_NODE_BUDGET: usize = 2_000_000;
const ARMIJO: f64 = 1e-4;

/// Phase vector of one codeword on pattern `pattern` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseAssignment {
    pub pattern: usize,
    pub thetas: Vec<f64>,
}

/// `L` phase vectors for one pattern and the smallest pairwise squared
/// distance they achieve.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSolution {
    pub thetas: Vec<Vec<f64>>,
    pub min_distance_sqr: f64,
    /// True when a discrete search proved the grid optimum.
    pub exact: bool,
}

impl PhaseSolution {
    fn from_thetas(thetas: Vec<Vec<f64>>, exact: bool) -> Self {
        let min_distance_sqr = min_pair_sqr(&thetas);
        Self {
            thetas,
            min_distance_sqr,
            exact,
        }
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance_sqr.sqrt()
    }
}

/// `Σ_m sin²((a_m − b_m)/2)`.
pub fn pair_distance_sqr(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| ((x - y) / 2.0).sin().powi(2))
        .sum()
}

fn min_pair_sqr(thetas: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..thetas.len() {
        for j in i + 1..thetas.len() {
            best = best.min(pair_distance_sqr(&thetas[i], &thetas[j]));
        }
    }
    best
}

/// `L` phase vectors for `M` columns maximizing the minimum pairwise
/// distance. The first vector is all zeros. With `cfg.phase_grid` set the
/// search is over grid values, otherwise the phases are continuous.
pub fn optimize_phases_2m(
    m: usize,
    l: usize,
    cfg: &OptimizerConfig,
) -> Result<PhaseSolution, ForgeError> {
    cfg.validate()?;
    if m < 2 {
        return Err(ForgeError::InvalidConfig(format!("need M >= 2, got {m}")));
    }
    if l == 0 {
        return Err(ForgeError::InvalidConfig(
            "need at least one phase instance".into(),
        ));
    }
    if l == 1 {
        return Ok(PhaseSolution {
            thetas: vec![vec![0.0; m]],
            min_distance_sqr: f64::INFINITY,
            exact: true,
        });
    }
    match &cfg.phase_grid {
        Some(grid) => Ok(discrete(m, l, &normalize_grid(grid))),
        None => Ok(continuous(m, l, cfg)),
    }
}

fn normalize_grid(grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = grid.iter().map(|&x| wrap_phase(x)).collect();
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    g
}

fn same_phase(a: f64, b: f64) -> bool {
    wrap_phase(a - b).abs() < 1e-9
}

fn closed_under_differences(grid: &[f64]) -> bool {
    grid.iter().any(|&g| same_phase(g, 0.0))
        && grid.iter().all(|&a| {
            grid.iter()
                .all(|&b| grid.iter().any(|&c| same_phase(c, a - b)))
        })
}

// ---------------------------------------------------------------- continuous

fn continuous(m: usize, l: usize, cfg: &OptimizerConfig) -> PhaseSolution {
    let runs: Vec<(f64, Vec<Vec<f64>>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| continuous_run(m, l, cfg, r))
        .collect();
    let (_, thetas) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart");
    PhaseSolution::from_thetas(thetas, false)
}

/// LSE surrogate of `−min √2·d_ij` over free instances `1..L`, with its
/// gradient.
fn surrogate(thetas: &[Vec<f64>], eps: f64, grad: Option<&mut [Vec<f64>]>) -> f64 {
    let l = thetas.len();
    let mut pairs = Vec::with_capacity(l * (l - 1) / 2);
    for i in 0..l {
        for j in i + 1..l {
            let d = pair_distance_sqr(&thetas[i], &thetas[j]).sqrt();
            pairs.push((i, j, d, -SQRT_2 * d / eps));
        }
    }
    let max = pairs.iter().map(|p| p.3).fold(f64::NEG_INFINITY, f64::max);
    let value = max + pairs.iter().map(|p| (p.3 - max).exp()).sum::<f64>().ln();
    if let Some(grad) = grad {
        for g in grad.iter_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for &(i, j, d, e) in &pairs {
            if d < 1e-12 {
                continue;
            }
            // d(d)/dθ_i,m = sin(Δ_m) / (4d).
            let coeff = -(e - value).exp() * SQRT_2 / eps / (4.0 * d);
            for k in 0..thetas[i].len() {
                let s = (thetas[i][k] - thetas[j][k]).sin();
                grad[i][k] += coeff * s;
                grad[j][k] -= coeff * s;
            }
        }
        grad[0].iter_mut().for_each(|x| *x = 0.0);
    }
    value
}

fn continuous_run(
    m: usize,
    l: usize,
    cfg: &OptimizerConfig,
    restart: usize,
) -> (f64, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
    let mut x: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..m)
                .map(|_| {
                    if i == 0 {
                        0.0
                    } else {
                        rng.random_range(-PI..PI)
                    }
                })
                .collect()
        })
        .collect();
    let mut best = x.clone();
    let mut best_min = min_pair_sqr(&x);
    let mut grad = vec![vec![0.0; m]; l];

    for &eps in &cfg.epsilons {
        let mut step = cfg.initial_step * eps;
        let mut value = surrogate(&x, eps, Some(&mut grad));
        for _ in 0..cfg.max_iters {
            let slope: f64 = grad.iter().flatten().map(|g| g * g).sum();
            if slope.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            while step >= 1e-14 * eps {
                let trial: Vec<Vec<f64>> = x
                    .iter()
                    .zip(&grad)
                    .map(|(xi, gi)| {
                        xi.iter()
                            .zip(gi)
                            .map(|(a, g)| wrap_phase(a - step * g))
                            .collect()
                    })
                    .collect();
                if surrogate(&trial, eps, None) <= value - ARMIJO * step * slope {
                    x = trial;
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if !accepted {
                break;
            }
            step /= cfg.backtrack;
            value = surrogate(&x, eps, Some(&mut grad));
            let current = min_pair_sqr(&x);
            if current > best_min {
                best_min = current;
                best = x.clone();
            }
        }
    }
    (best_min, best)
}

// ------------------------------------------------------------------ discrete

struct Graph {
    vertices: Vec<Vec<f64>>,
    dist: Vec<f64>,
}

impl Graph {
    fn new(m: usize, grid: &[f64]) -> Self {
        let n = grid.len().pow(m as u32);
        let vertices: Vec<Vec<f64>> = (0..n)
            .map(|mut code| {
                (0..m)
                    .map(|_| {
                        let v = grid[code % grid.len()];
                        code /= grid.len();
                        v
                    })
                    .collect()
            })
            .collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = pair_distance_sqr(&vertices[i], &vertices[j]);
            }
        }
        Self { vertices, dist }
    }

    fn len(&self) -> usize {
        self.vertices.len()
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }
}

fn discrete(m: usize, l: usize, grid: &[f64]) -> PhaseSolution {
    let vertex_count = grid.len().checked_pow(m as u32).unwrap_or(usize::MAX);
    if vertex_count > MAX_CLIQUE_VERTICES {
        return coordinate_search(m, l, grid);
    }
    let graph = Graph::new(m, grid);
    let zero = graph
        .vertices
        .iter()
        .position(|v| v.iter().all(|&x| same_phase(x, 0.0)));
    let closed = closed_under_differences(grid);
    let anchor = if closed { zero } else { None };
    let fix = |t: Vec<Vec<f64>>| if closed { gauge(t) } else { t };

    let mut levels: Vec<f64> = graph.dist.iter().copied().filter(|&d| d > 1e-12).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    for &tau in &levels {
        match find_clique(&graph, l, tau - 1e-12, anchor) {
            CliqueResult::Found(clique) => {
                let thetas = clique
                    .into_iter()
                    .map(|v| graph.vertices[v].clone())
                    .collect();
                return PhaseSolution::from_thetas(fix(thetas), true);
            }
            CliqueResult::None => {}
            CliqueResult::OutOfBudget => break,
        }
    }
    let mut fallback = local_search(&graph, l, zero.unwrap_or(0));
    fallback.thetas = fix(fallback.thetas);
    fallback
}

/// Shifts every vector by the first so it becomes zero.
fn gauge(mut thetas: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let first = thetas[0].clone();
    for t in thetas.iter_mut() {
        for (x, f) in t.iter_mut().zip(&first) {
            *x = wrap_phase(*x - f);
        }
    }
    thetas
}

enum CliqueResult {
    Found(Vec<usize>),
    None,
    OutOfBudget,
}

fn find_clique(graph: &Graph, l: usize, tau: f64, anchor: Option<usize>) -> CliqueResult {
    let n = graph.len();
    let mut budget = CLIQUE_NODE_BUDGET;
    let starts: Vec<usize> = match anchor {
        Some(a) => vec![a],
        None => (0..n).collect(),
    };
    for start in starts {
        let candidates: Vec<usize> = (0..n)
            .filter(|&v| v != start && graph.d(start, v) >= tau && (anchor.is_some() || v > start))
            .collect();
        let mut clique = vec![start];
        match extend(graph, l, tau, &mut clique, &candidates, &mut budget) {
            Some(true) => return CliqueResult::Found(clique),
            Some(false) => {}
            None => return CliqueResult::OutOfBudget,
        }
    }
    CliqueResult::None
}

fn extend(
    graph: &Graph,
    l: usize,
    tau: f64,
    clique: &mut Vec<usize>,
    candidates: &[usize],
    budget: &mut usize,
) -> Option<bool> {
    if clique.len() == l {
        return Some(true);
    }
    for (k, &v) in candidates.iter().enumerate() {
        if clique.len() + candidates.len() - k < l {
            return Some(false);
        }
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let next: Vec<usize> = candidates[k + 1..]
            .iter()
            .copied()
            .filter(|&u| graph.d(v, u) >= tau)
            .collect();
        clique.push(v);
        if extend(graph, l, tau, clique, &next, budget)? {
            return Some(true);
        }
        clique.pop();
    }
    Some(false)
}

/// (min distance, number of pairs attaining it) of a vertex selection.
fn score(graph: &Graph, chosen: &[usize]) -> (f64, usize) {
    let mut min = f64::INFINITY;
    let mut count = 0;
    for i in 0..chosen.len() {
        for j in i + 1..chosen.len() {
            let d = graph.d(chosen[i], chosen[j]);
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

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 + 1e-12 || ((a.0 - b.0).abs() <= 1e-12 && a.1 < b.1)
}

/// Greedy farthest-point selection from `first`, then single-swap descent.
fn local_search(graph: &Graph, l: usize, first: usize) -> PhaseSolution {
    let n = graph.len();
    let mut chosen = vec![first];
    while chosen.len() < l {
        let pick = (0..n)
            .max_by(|&a, &b| {
                let da = chosen
                    .iter()
                    .map(|&c| graph.d(a, c))
                    .fold(f64::INFINITY, f64::min);
                let db = chosen
                    .iter()
                    .map(|&c| graph.d(b, c))
                    .fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("nonempty graph");
        chosen.push(pick);
    }
    let mut current = score(graph, &chosen);
    loop {
        let mut improved = false;
        for slot in 1..l {
            for v in 0..n {
                let old = chosen[slot];
                chosen[slot] = v;
                let s = score(graph, &chosen);
                if better(s, current) {
                    current = s;
                    improved = true;
                } else {
                    chosen[slot] = old;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let thetas = chosen
        .into_iter()
        .map(|v| graph.vertices[v].clone())
        .collect();
    PhaseSolution::from_thetas(thetas, false)
}

/// Grid search for large `grid^M`: greedy coordinate moves on the phase
/// vectors without materializing the vertex set.
fn coordinate_search(m: usize, l: usize, grid: &[f64]) -> PhaseSolution {
    let zero = grid.iter().position(|&g| same_phase(g, 0.0)).unwrap_or(0);
    let mut idx: Vec<Vec<usize>> = (0..l)
        .map(|i| {
            (0..m)
                .map(|k| {
                    if i == 0 {
                        zero
                    } else {
                        (i * (k + 1)) % grid.len()
                    }
                })
                .collect()
        })
        .collect();
    let eval = |idx: &[Vec<usize>]| {
        let thetas: Vec<Vec<f64>> = idx
            .iter()
            .map(|v| v.iter().map(|&k| grid[k]).collect())
            .collect();
        let mut min = f64::INFINITY;
        let mut count = 0;
        for i in 0..l {
            for j in i + 1..l {
                let d = pair_distance_sqr(&thetas[i], &thetas[j]);
                if d < min - 1e-12 {
                    min = d;
                    count = 1;
                } else if d <= min + 1e-12 {
                    count += 1;
                }
            }
        }
        (min, count)
    };
    let mut current = eval(&idx);
    loop {
        let mut improved = false;
        for i in 1..l {
            for k in 0..m {
                for g in 0..grid.len() {
                    let old = idx[i][k];
                    idx[i][k] = g;
                    let s = eval(&idx);
                    if better(s, current) {
                        current = s;
                        improved = true;
                    } else {
                        idx[i][k] = old;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    let thetas = idx
        .iter()
        .map(|v| v.iter().map(|&k| grid[k]).collect())
        .collect();
    PhaseSolution::from_thetas(thetas, false)
}
