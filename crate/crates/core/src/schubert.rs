//! Sparsity patterns from the Schubert-cell skeleton of G(T, M).
//!
//! A pattern assigns each of the `M` columns a nonempty set of row indices,
//! with the sets pairwise disjoint, so any matrix supported on it has
//! structurally orthogonal columns. Row indices are 1-based throughout this
//! module to match the usual matrix notation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use crate::grassmann::{Codeword, GrassmannError};
use crate::linalg::{CMatrix, C64};

/// Default cap on the number of enumerated patterns.
pub const DEFAULT_PATTERN_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchubertError {
    #[error("invalid range: need 1 <= M < T and M <= s <= T (T={t}, M={m}, s={s})")]
    InvalidRange { t: usize, m: usize, s: usize },
    #[error("pattern count {count} exceeds the cap {cap}")]
    SizeLimit { count: String, cap: usize },
    #[error("perfect matchings need M >= 2, got {0}")]
    InvalidM(usize),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// Disjoint per-column row supports, kept in echelon order (columns sorted
/// by their smallest row).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsityPattern {
    t: usize,
    supports: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Validates and normalizes the supports (rows sorted, columns sorted by pivot).
    pub fn new(t: usize, mut supports: Vec<Vec<usize>>) -> Result<Self, SchubertError> {
        let m = supports.len();
        if m == 0 || m >= t {
            return Err(SchubertError::InvalidPattern(format!(
                "need 1 <= M < T, got M={m}, T={t}"
            )));
        }
        let mut seen = vec![false; t + 1];
        for support in &mut supports {
            if support.is_empty() {
                return Err(SchubertError::InvalidPattern("empty column support".into()));
            }
            support.sort_unstable();
            for &row in support.iter() {
                if row == 0 || row > t {
                    return Err(SchubertError::InvalidPattern(format!(
                        "row {row} outside 1..={t}"
                    )));
                }
                if seen[row] {
                    return Err(SchubertError::InvalidPattern(format!(
                        "row {row} used twice"
                    )));
                }
                seen[row] = true;
            }
        }
        supports.sort_by_key(|s| s[0]);
        Ok(Self { t, supports })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    /// Total number of nonzeros `s`.
    pub fn sparsity(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }
}

impl fmt::Display for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self
            .supports
            .iter()
            .map(|s| {
                format!(
                    "{{{}}}",
                    s.iter()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        write!(f, "{{{}}}", cols.join(","))
    }
}

/// A perfect matching of rows `1..=2M`: one unordered pair per column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairPattern {
    pairs: Vec<(usize, usize)>,
}

impl PairPattern {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self, SchubertError> {
        let m = pairs.len();
        let mut seen = vec![false; 2 * m + 1];
        let mut normalized = Vec::with_capacity(m);
        for (a, b) in pairs {
            let (a, b) = (a.min(b), a.max(b));
            for row in [a, b] {
                if row == 0 || row > 2 * m || seen[row] {
                    return Err(SchubertError::InvalidPattern(format!(
                        "pairs do not form a perfect matching of 1..={}",
                        2 * m
                    )));
                }
                seen[row] = true;
            }
            normalized.push((a, b));
        }
        normalized.sort_unstable();
        Ok(Self { pairs: normalized })
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn to_sparsity_pattern(&self) -> SparsityPattern {
        SparsityPattern::new(
            2 * self.m(),
            self.pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
        )
        .expect("perfect matching is a valid pattern")
    }
}

fn check_range(t: usize, m: usize, s: usize) -> Result<(), SchubertError> {
    if m == 0 || m >= t || s < m || s > t {
        return Err(SchubertError::InvalidRange { t, m, s });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of disjoint-support patterns: `C(T,s)/M! · Σ_k (−1)^k C(M,k) (M−k)^s`.
pub fn count_patterns(t: usize, m: usize, s: usize) -> Result<BigUint, SchubertError> {
    check_range(t, m, s)?;
    let mut surjections = BigInt::from(0);
    for k in 0..=m {
        let term = BigInt::from(binomial(m, k)) * BigInt::from(m - k).pow(s as u32);
        if k % 2 == 0 {
            surjections += term;
        } else {
            surjections -= term;
        }
    }
    let surjections = surjections
        .to_biguint()
        .expect("surjection count is nonnegative");
    let factorial: BigUint = (1..=m).map(BigUint::from).product();
    debug_assert_eq!(&surjections % &factorial, BigUint::from(0u32));
    Ok(binomial(t, s) * surjections / factorial)
}

/// All patterns of `(T, M, s)` in lexicographic order of their normalized
/// supports.
pub fn enumerate_patterns(
    t: usize,
    m: usize,
    s: usize,
) -> Result<Vec<SparsityPattern>, SchubertError> {
    enumerate_patterns_capped(t, m, s, DEFAULT_PATTERN_CAP)
}

pub fn enumerate_patterns_capped(
    t: usize,
    m: usize,
    s: usize,
    cap: usize,
) -> Result<Vec<SparsityPattern>, SchubertError> {
    let count = count_patterns(t, m, s)?;
    if count > BigUint::from(cap) {
        return Err(SchubertError::SizeLimit {
            count: count.to_string(),
            cap,
        });
    }
    let mut out = Vec::new();
    let mut rows = Vec::with_capacity(s);
    for_each_combination(t, s, 1, &mut rows, &mut |chosen| {
        // Restricted growth strings give each set partition exactly once,
        // with blocks numbered by first appearance (i.e. by minimal row).
        let mut labels = vec![0usize; s];
        set_partitions(chosen, m, 0, 0, &mut labels, &mut |labels| {
            let mut supports = vec![Vec::new(); m];
            for (row, &label) in chosen.iter().zip(labels) {
                supports[label].push(*row);
            }
            out.push(SparsityPattern { t, supports });
        });
    });
    out.sort();
    Ok(out)
}

fn for_each_combination(
    t: usize,
    s: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == s {
        visit(chosen);
        return;
    }
    let remaining = s - chosen.len();
    for row in start..=t + 1 - remaining {
        chosen.push(row);
        for_each_combination(t, s, row + 1, chosen, visit);
        chosen.pop();
    }
}

fn set_partitions(
    rows: &[usize],
    blocks: usize,
    pos: usize,
    used: usize,
    labels: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    let n = rows.len();
    if pos == n {
        if used == blocks {
            visit(labels);
        }
        return;
    }
    // Not enough rows left to open the remaining blocks.
    if blocks - used > n - pos {
        return;
    }
    for label in 0..used {
        labels[pos] = label;
        set_partitions(rows, blocks, pos + 1, used, labels, visit);
    }
    if used < blocks {
        labels[pos] = used;
        set_partitions(rows, blocks, pos + 1, used + 1, labels, visit);
    }
}

/// `2M − 1` pairwise pair-disjoint perfect matchings of `1..=2M` (a
/// 1-factorization of K_2M), built with the circle method: row `2M` stays
/// fixed while the others rotate.
pub fn matching_patterns(m: usize) -> Result<Vec<PairPattern>, SchubertError> {
    if m < 2 {
        return Err(SchubertError::InvalidM(m));
    }
    let n = 2 * m - 1;
    let fixed = 2 * m;
    let patterns = (0..n)
        .map(|round| {
            let mut pairs = vec![(round + 1, fixed)];
            for k in 1..m {
                let a = (round + k) % n;
                let b = (round + n - k) % n;
                pairs.push((a + 1, b + 1));
            }
            PairPattern::new(pairs).expect("circle method yields a perfect matching")
        })
        .collect();
    Ok(patterns)
}

/// Exact unit phasor for multiples of π/2, `e^{jθ}` otherwise.
pub fn unit_phasor(theta: f64) -> C64 {
    let quarter = theta / std::f64::consts::FRAC_PI_2;
    let k = quarter.round();
    if (quarter - k).abs() < 1e-12 {
        match (k as i64).rem_euclid(4) {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, theta)
    }
}

/// Materializes a codeword on `pattern`.
///
/// `phases` lists one phase per nonzero, column by column with rows
/// ascending; `amplitudes` lists the nonnegative magnitudes the same way,
/// grouped per column. The pivot (first row) of every column is forced to
/// phase 0 whatever the caller passes, and each column is normalized to
/// unit norm.
pub fn pattern_to_codeword(
    pattern: &SparsityPattern,
    phases: &[f64],
    amplitudes: &[Vec<f64>],
) -> Result<Codeword, SchubertError> {
    let supports = pattern.supports();
    if phases.len() != pattern.sparsity() {
        return Err(SchubertError::ShapeMismatch(format!(
            "{} phases for {} nonzeros",
            phases.len(),
            pattern.sparsity()
        )));
    }
    if amplitudes.len() != supports.len()
        || amplitudes
            .iter()
            .zip(supports)
            .any(|(a, s)| a.len() != s.len())
    {
        return Err(SchubertError::ShapeMismatch(
            "amplitude lists do not match supports".into(),
        ));
    }
    let mut matrix = CMatrix::zeros(pattern.t(), pattern.m());
    let mut offset = 0;
    for (col, (support, amps)) in supports.iter().zip(amplitudes).enumerate() {
        if amps.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(SchubertError::ShapeMismatch(format!(
                "column {col} has a negative or non-finite amplitude"
            )));
        }
        let energy: f64 = amps.iter().map(|a| a * a).sum();
        if energy <= 0.0 {
            return Err(SchubertError::ZeroColumn(col));
        }
        // sqrt(1/energy) rounds to the nearest double of 1/sqrt(2) for pairs.
        let norm = (1.0 / energy).sqrt();
        for (k, (&row, &amp)) in support.iter().zip(amps).enumerate() {
            let phase = if k == 0 { 0.0 } else { phases[offset + k] };
            matrix[(row - 1, col)] = unit_phasor(phase) * (amp * norm);
        }
        offset += support.len();
    }
    Ok(Codeword::new(matrix)?)
}

/// Equal-amplitude codeword on a perfect matching; `thetas[m]` is the phase
/// of the second row of column `m`.
pub fn pair_pattern_codeword(
    pattern: &PairPattern,
    thetas: &[f64],
) -> Result<Codeword, SchubertError> {
    if thetas.len() != pattern.m() {
        return Err(SchubertError::ShapeMismatch(format!(
            "{} phases for {} columns",
            thetas.len(),
            pattern.m()
        )));
    }
    let phases: Vec<f64> = thetas.iter().flat_map(|&th| [0.0, th]).collect();
    let amplitudes = vec![vec![1.0, 1.0]; pattern.m()];
    pattern_to_codeword(&pattern.to_sparsity_pattern(), &phases, &amplitudes)
}
