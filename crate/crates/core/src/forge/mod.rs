//! Codebook constructors: the sparse designs, the dense baselines they are
//! compared against, the two reference (4, 2) tables, and JSON storage.

mod expmap;
mod io;
mod manopt;
mod phases;
mod sparse;
mod surrogate;
mod tables;

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::audit::AuditError;
use crate::grassmann::GrassmannError;
use crate::linalg::LinalgError;
use crate::schubert::SchubertError;

pub use expmap::{build_expmap, expmap_codeword};
pub use io::{codebook_from_json, codebook_to_json, load_codebook, save_codebook};
pub use manopt::{optimize_manopt, ManoptReport};
pub use phases::{optimize_phases_2m, pair_distance_sqr, PhaseAssignment, PhaseSolution};
pub use sparse::{build_general_sparse, build_sparse_2m, instances_per_pattern};
pub use surrogate::smooth_mcd_objective;
pub use tables::{nr_codebook_4_2, proposed_codebook_4_2};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("codebook needs at least two codewords, got {0}")]
    TooFewCodewords(usize),
    #[error("requested {requested} distinct codewords but the alphabet only yields {capacity}")]
    AlphabetExhausted { requested: usize, capacity: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("codeword {index} is not on the Stiefel manifold (residual {residual:.3e})")]
    NotStiefel { index: usize, residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Schubert(#[from] SchubertError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

/// Which sparsity patterns `build_general_sparse` draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PatternFilter {
    /// Column supports differ in size by at most one.
    #[default]
    NearBalanced,
    /// Every disjoint-support pattern.
    All,
}

/// Knobs shared by the optimizers and constructors.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Smoothing constants, strictly decreasing.
    pub epsilons: Vec<f64>,
    pub max_iters: usize,
    /// First trial step, relative to the current smoothing constant.
    pub initial_step: f64,
    /// Step shrink factor on a rejected Armijo trial, in (0, 1).
    pub backtrack: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Optional discrete phase alphabet in radians.
    pub phase_grid: Option<Vec<f64>>,
    /// Scale of the QAM entries of Θ for the exponential-map baseline.
    pub expmap_spread: f64,
    pub pattern_filter: PatternFilter,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![1.0, 0.3, 0.1, 0.03, 0.01],
            max_iters: 500,
            initial_step: 1.0,
            backtrack: 0.5,
            restarts: 4,
            seed: 0,
            phase_grid: None,
            expmap_spread: 0.5,
            pattern_filter: PatternFilter::NearBalanced,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.phase_grid = Some(grid);
        self
    }

    pub fn validate(&self) -> Result<(), ForgeError> {
        let bad = |msg: &str| Err(ForgeError::InvalidConfig(msg.to_string()));
        if self.epsilons.is_empty() {
            return bad("epsilon schedule is empty");
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("epsilons must be positive and finite");
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilon schedule must be strictly decreasing");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return bad("initial step must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.expmap_spread.is_finite() && self.expmap_spread > 0.0) {
            return bad("expmap spread must be positive");
        }
        if let Some(grid) = &self.phase_grid {
            if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
                return bad("phase grid must be a nonempty set of finite phases");
            }
        }
        Ok(())
    }
}

/// The quarter-turn alphabet `{−π/2, 0, π/2, π}`.
pub fn quarter_grid() -> Vec<f64> {
    vec![-FRAC_PI_2, 0.0, FRAC_PI_2, PI]
}

/// Wraps a phase into `(−π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let y = theta.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        OptimizerConfig::default().validate().unwrap();
    }

    #[test]
    fn config_rejections() {
        let base = OptimizerConfig::default();
        let cases = [
            OptimizerConfig {
                epsilons: vec![],
                ..base.clone()
            },
            OptimizerConfig {
                epsilons: vec![0.1, 0.3],
                ..base.clone()
            },
            OptimizerConfig {
                epsilons: vec![0.1, 0.1],
                ..base.clone()
            },
            OptimizerConfig {
                epsilons: vec![1.0, -0.1],
                ..base.clone()
            },
            OptimizerConfig {
                max_iters: 0,
                ..base.clone()
            },
            OptimizerConfig {
                backtrack: 1.0,
                ..base.clone()
            },
            OptimizerConfig {
                restarts: 0,
                ..base.clone()
            },
            OptimizerConfig {
                phase_grid: Some(vec![]),
                ..base.clone()
            },
        ];
        for cfg in cases {
            assert!(
                matches!(cfg.validate(), Err(ForgeError::InvalidConfig(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }
}
