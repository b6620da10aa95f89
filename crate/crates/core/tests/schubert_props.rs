use num_bigint::BigUint;
use proptest::prelude::*;
use sparse_grassmann::grassmann::{chordal_distance, validate_stiefel};
use sparse_grassmann::schubert::{
    count_patterns, enumerate_patterns, matching_patterns, pair_pattern_codeword,
    pattern_to_codeword,
};

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

fn surjections(s: u64, m: u64) -> BigUint {
    // Inclusion-exclusion with signed terms accumulated separately.
    let (mut plus, mut minus) = (BigUint::from(0u32), BigUint::from(0u32));
    for k in 0..=m {
        let term = binomial(m, k) * BigUint::from(m - k).pow(s as u32);
        if k % 2 == 0 {
            plus += term;
        } else {
            minus += term;
        }
    }
    plus - minus
}

#[test]
fn full_support_count_times_factorial_is_surjection_count() {
    for t in 2..=12u64 {
        for m in 1..t {
            let count = count_patterns(t as usize, m as usize, t as usize).unwrap();
            let fact: BigUint = (1..=m).map(BigUint::from).product();
            assert_eq!(count * fact, surjections(t, m), "T={t} M={m}");
        }
    }
}

#[test]
fn counts_stay_exact_for_large_dimensions() {
    let big = count_patterns(64, 8, 40).unwrap();
    let fact: BigUint = (1..=8u64).map(BigUint::from).product();
    assert_eq!(big * fact, binomial(64, 40) * surjections(40, 8));
}

#[test]
fn enumerated_patterns_are_canonical() {
    for t in 2..=6 {
        for m in 1..t {
            for s in m..=t {
                for p in enumerate_patterns(t, m, s).unwrap() {
                    let sup = p.supports();
                    let mins: Vec<usize> = sup.iter().map(|c| c[0]).collect();
                    assert!(mins.windows(2).all(|w| w[0] < w[1]), "{sup:?} not echelon");
                    let mut rows: Vec<usize> = sup.iter().flatten().copied().collect();
                    let total = rows.len();
                    rows.sort_unstable();
                    rows.dedup();
                    assert_eq!(rows.len(), total, "{sup:?} overlaps");
                    assert_eq!(total, s);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn pattern_codewords_are_structurally_orthonormal(
        t in 2usize..=6,
        m_off in 0usize..5,
        s_off in 0usize..6,
        pick: usize,
        phases in prop::collection::vec(-10.0f64..10.0, 6),
        amps in prop::collection::vec(0.01f64..5.0, 6),
    ) {
        let m = 1 + m_off % (t - 1);
        let s = m + s_off % (t - m + 1);
        let patterns = enumerate_patterns(t, m, s).unwrap();
        let p = &patterns[pick % patterns.len()];
        let mut k = 0;
        let amplitudes: Vec<Vec<f64>> = p
            .supports()
            .iter()
            .map(|sup| sup.iter().map(|_| { k += 1; amps[k - 1] }).collect())
            .collect();
        let w = pattern_to_codeword(p, &phases[..s], &amplitudes).unwrap();
        prop_assert!(validate_stiefel(w.matrix(), 1e-14));
        prop_assert_eq!(w.matrix().nnz(), s);
    }

    #[test]
    fn cross_pattern_distance_is_phase_free(
        m in 2usize..=5,
        a: usize,
        b_off: usize,
        th in prop::collection::vec(-7.0f64..7.0, 10),
    ) {
        let pats = matching_patterns(m).unwrap();
        let ia = a % pats.len();
        let ib = (ia + 1 + b_off % (pats.len() - 1)) % pats.len();
        let wa = pair_pattern_codeword(&pats[ia], &th[..m]).unwrap();
        let wb = pair_pattern_codeword(&pats[ib], &th[m..2 * m]).unwrap();
        let d = chordal_distance(&wa, &wb).unwrap();
        prop_assert!((d - (m as f64 / 2.0).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn same_pattern_distance_follows_half_angle_law(
        m in 2usize..=5,
        a: usize,
        th in prop::collection::vec(-7.0f64..7.0, 10),
    ) {
        let pats = matching_patterns(m).unwrap();
        let p = &pats[a % pats.len()];
        let wa = pair_pattern_codeword(p, &th[..m]).unwrap();
        let wb = pair_pattern_codeword(p, &th[m..2 * m]).unwrap();
        let law: f64 = (0..m).map(|i| ((th[i] - th[m + i]) / 2.0).sin().powi(2)).sum::<f64>().sqrt();
        prop_assert!((chordal_distance(&wa, &wb).unwrap() - law).abs() <= 1e-10);
    }
}
