mod common;

use proptest::prelude::*;
use sparse_grassmann::audit::{real_variable_count, OptimizerKind};
use sparse_grassmann::forge::{
    build_expmap, build_general_sparse, build_sparse_2m, codebook_from_json, codebook_to_json,
    load_codebook, optimize_manopt, optimize_phases_2m, quarter_grid, save_codebook,
};
use sparse_grassmann::grassmann::{chordal_distance, validate_stiefel, STIEFEL_TOL};
use sparse_grassmann::{min_chordal_distance, Codebook, CodebookMeta, ForgeError, OptimizerConfig};

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        max_iters: 60,
        restarts: 2,
        ..OptimizerConfig::default()
    }
}

fn assert_stiefel(book: &Codebook) {
    for (i, w) in book.codewords().iter().enumerate() {
        assert!(
            validate_stiefel(w.matrix(), STIEFEL_TOL),
            "codeword {i} leaves the manifold"
        );
    }
}

fn same_book(a: &Codebook, b: &Codebook) -> bool {
    a.len() == b.len()
        && a.codewords()
            .iter()
            .zip(b.codewords())
            .all(|(x, y)| x.matrix() == y.matrix())
}

fn support(w: &sparse_grassmann::Codeword) -> Vec<bool> {
    w.matrix()
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr() > 0.0)
        .collect()
}

/// Exhaustive scan: `sqrt(M/2)` across patterns, the phase law within one.
fn predicted_mcd(book: &Codebook) -> f64 {
    let m = book.m() as f64;
    let words = book.codewords();
    let mut best = f64::INFINITY;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = if support(&words[i]) == support(&words[j]) {
                chordal_distance(&words[i], &words[j]).unwrap()
            } else {
                (m / 2.0).sqrt()
            };
            best = best.min(d);
        }
    }
    best
}

#[test]
fn sparse_mcd_is_min_of_cross_and_intra_pattern_distances() {
    for m in 2..=4 {
        for size in [3, 5, 2 * (2 * m - 1), 4 * (2 * m - 1) + 1] {
            for cfg in [quick(), quick().with_grid(quarter_grid())] {
                let book = build_sparse_2m(m, size, &cfg).unwrap();
                assert_eq!(book.len(), size);
                let got = min_chordal_distance(&book).unwrap().value;
                assert!(
                    (got - predicted_mcd(&book)).abs() < 1e-10,
                    "M={m} size={size}"
                );
            }
        }
    }
}

#[test]
fn constructors_are_stiefel_and_deterministic() {
    let cfg = quick().with_seed(17);
    let builds: Vec<Box<dyn Fn() -> Codebook>> = vec![
        Box::new(|| build_sparse_2m(3, 12, &cfg).unwrap()),
        Box::new(|| build_sparse_2m(2, 9, &cfg.clone().with_grid(quarter_grid())).unwrap()),
        Box::new(|| build_general_sparse(5, 2, 4, 10, &cfg).unwrap()),
        Box::new(|| {
            build_general_sparse(6, 3, 6, 8, &cfg.clone().with_grid(quarter_grid())).unwrap()
        }),
        Box::new(|| build_expmap(4, 2, 12, &cfg).unwrap()),
        Box::new(|| optimize_manopt(4, 2, 6, &cfg).unwrap().0),
    ];
    for build in &builds {
        let a = build();
        assert_stiefel(&a);
        assert!(
            same_book(&a, &build()),
            "{} is not reproducible",
            a.meta.method
        );
    }
}

#[test]
fn manopt_never_ends_below_its_start() {
    for seed in 0..4 {
        let (book, report) = optimize_manopt(3, 1, 5, &quick().with_seed(seed)).unwrap();
        assert!(report.final_mcd >= report.initial_mcd);
        assert!((min_chordal_distance(&book).unwrap().value - report.final_mcd).abs() < 1e-12);
    }
}

#[test]
fn real_variable_accounting_matches_audit() {
    for (m, size) in [(2, 22), (3, 17), (4, 24)] {
        let book = build_sparse_2m(m, size, &quick()).unwrap();
        let l = size.div_ceil(2 * m - 1);
        let touched: usize = optimize_phases_2m(m, l, &quick())
            .unwrap()
            .thetas
            .iter()
            .map(Vec::len)
            .sum();
        let expected = real_variable_count(OptimizerKind::Proposed2M, 2 * m, m, size).unwrap();
        assert_eq!(touched as u64, expected);
        assert_eq!(book.meta.params["real_variables"], expected);
    }
    let (book, _) = optimize_manopt(4, 2, 5, &quick()).unwrap();
    let free: usize = book
        .codewords()
        .iter()
        .map(|w| 2 * w.m() * (w.t() - w.m()))
        .sum();
    assert_eq!(
        real_variable_count(OptimizerKind::Manopt, 4, 2, 5).unwrap(),
        free as u64
    );
    assert_eq!(book.meta.params["real_variables"], free as u64);
}

#[test]
fn config_rejects_bad_schedules() {
    let bad = [
        OptimizerConfig {
            epsilons: vec![0.1, 0.3],
            ..OptimizerConfig::default()
        },
        OptimizerConfig {
            epsilons: vec![],
            ..OptimizerConfig::default()
        },
        OptimizerConfig {
            epsilons: vec![1.0, 0.0],
            ..OptimizerConfig::default()
        },
        OptimizerConfig {
            restarts: 0,
            ..OptimizerConfig::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(
            build_sparse_2m(2, 4, &cfg),
            Err(ForgeError::InvalidConfig(_))
        ));
    }
}

#[test]
fn codebook_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("book.json");
    let book = build_general_sparse(6, 2, 5, 9, &quick()).unwrap();
    save_codebook(&book, &path).unwrap();
    let back = load_codebook(&path).unwrap();
    assert!(same_book(&book, &back));
    assert_eq!(book.meta, back.meta);
    assert!(matches!(
        load_codebook(dir.path().join("missing.json")),
        Err(ForgeError::Io(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_bit_exact(t in 2usize..7, m_off in 0usize..5, size in 1usize..6, seed: u64) {
        let m = 1 + m_off % (t - 1);
        let words = (0..size).map(|i| common::codeword(t, m, seed.wrapping_add(i as u64))).collect();
        let book = Codebook::new(words, CodebookMeta::new("random").with_seed(seed)).unwrap();
        let text = codebook_to_json(&book);
        let back = codebook_from_json(&text).unwrap();
        prop_assert!(same_book(&book, &back));
        prop_assert_eq!(codebook_to_json(&back), text);
    }
}
