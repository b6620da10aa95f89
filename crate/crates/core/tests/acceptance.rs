//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparse_grassmann::audit::{
    gram_mult_count, measured_mult_count, real_variable_count, Ellpack, OpTrace, OptimizerKind,
};
use sparse_grassmann::forge::{
    build_expmap, build_sparse_2m, nr_codebook_4_2, optimize_manopt, proposed_codebook_4_2,
};
use sparse_grassmann::grassmann::{
    chordal_distance, min_chordal_distance, projector_distance, validate_stiefel, Codebook,
    CodebookMeta, Codeword,
};
use sparse_grassmann::linalg::{qr_orthonormalize, CMatrix, C64};
use sparse_grassmann::linksim::{
    gain_samples, gram_dense, gram_sparse, median, rate_curve, ChannelModel,
};
use sparse_grassmann::schubert::{
    count_patterns, enumerate_patterns, matching_patterns, pair_pattern_codeword,
};
use sparse_grassmann::wavesim::{
    papr_experiment, row_sparse_precoder, Pooling, PrecoderSource, Waveform, WaveformConfig,
};
use sparse_grassmann::OptimizerConfig;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_stiefel(t: usize, m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(t, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    qr_orthonormalize(&a).expect("full rank with probability one")
}

fn mcd(book: &Codebook) -> f64 {
    min_chordal_distance(book)
        .expect("at least two codewords")
        .value
}

// 1 -------------------------------------------------------------------------

fn distance_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_cross: f64 = 0.0;
    let mut worst_same: f64 = 0.0;
    for m in 2..=4 {
        let patterns = matching_patterns(m).map_err(|e| e.to_string())?;
        let target = (m as f64 / 2.0).sqrt();
        for _ in 0..200 {
            let a = rng.random_range(0..patterns.len());
            let b = (a + rng.random_range(1..patterns.len())) % patterns.len();
            let th_a: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
            let th_b: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
            let wa = pair_pattern_codeword(&patterns[a], &th_a).unwrap();
            let wb = pair_pattern_codeword(&patterns[b], &th_b).unwrap();
            worst_cross = worst_cross.max((chordal_distance(&wa, &wb).unwrap() - target).abs());

            let wb_same = pair_pattern_codeword(&patterns[a], &th_b).unwrap();
            let law: f64 = th_a
                .iter()
                .zip(&th_b)
                .map(|(x, y)| ((x - y) / 2.0).sin().powi(2))
                .sum::<f64>()
                .sqrt();
            worst_same = worst_same.max((chordal_distance(&wa, &wb_same).unwrap() - law).abs());
        }
    }
    ensure(worst_cross <= 1e-12, || {
        format!("cross-pattern error {worst_cross:.2e} > 1e-12")
    })?;
    ensure(worst_same <= 1e-10, || {
        format!("same-pattern error {worst_same:.2e} > 1e-10")
    })?;
    Ok(format!(
        "max errors cross {worst_cross:.1e}, same {worst_same:.1e}"
    ))
}

// 2 -------------------------------------------------------------------------

fn dual_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = rng.random_range(2..=8);
        let m = rng.random_range(1..t);
        let a = Codeword::new(random_stiefel(t, m, &mut rng)).unwrap();
        let b = Codeword::new(random_stiefel(t, m, &mut rng)).unwrap();
        let chordal = chordal_distance(&a, &b).unwrap();
        let proj = projector_distance(a.matrix(), b.matrix()) / 2f64.sqrt();
        worst = worst.max((chordal - proj).abs());
    }
    ensure(worst <= 1e-9, || format!("forms differ by {worst:.2e}"))?;
    Ok(format!("max difference {worst:.1e} over 1000 pairs"))
}

// 3 -------------------------------------------------------------------------

/// Labeled row assignments to {unused, column 1..M} with every column used,
/// divided by M! for column relabeling.
fn brute_count(t: usize, m: usize, s: usize) -> u64 {
    let base = m + 1;
    let mut labeled = 0u64;
    for code in 0..base.pow(t as u32) {
        let mut c = code;
        let mut used = vec![0usize; m];
        let mut nnz = 0;
        for _ in 0..t {
            let label = c % base;
            c /= base;
            if label > 0 {
                used[label - 1] += 1;
                nnz += 1;
            }
        }
        if nnz == s && used.iter().all(|&u| u > 0) {
            labeled += 1;
        }
    }
    let fact: u64 = (1..=m as u64).product();
    labeled / fact
}

fn pattern_counting() -> Outcome {
    let mut cases = 0;
    for t in 2..=6 {
        for m in 1..t {
            for s in m..=t {
                let formula = count_patterns(t, m, s).map_err(|e| e.to_string())?;
                let brute = brute_count(t, m, s);
                let listed = enumerate_patterns(t, m, s)
                    .map_err(|e| e.to_string())?
                    .len() as u64;
                ensure(formula == brute.into() && listed == brute, || {
                    format!("(T,M,s)=({t},{m},{s}): formula {formula}, brute {brute}, enumerated {listed}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (T,M,s) cases agree"))
}

// 4 -------------------------------------------------------------------------

fn one_factorization() -> Outcome {
    for m in 2..=8 {
        let matchings = matching_patterns(m).map_err(|e| e.to_string())?;
        ensure(matchings.len() == 2 * m - 1, || {
            format!("M={m}: {} matchings", matchings.len())
        })?;
        let mut seen = HashSet::new();
        for mt in &matchings {
            let rows: HashSet<usize> = mt.pairs().iter().flat_map(|&(a, b)| [a, b]).collect();
            ensure(rows.len() == 2 * m && mt.pairs().len() == m, || {
                format!("M={m}: not a perfect matching")
            })?;
            for &p in mt.pairs() {
                ensure(seen.insert(p), || format!("M={m}: pair {p:?} repeated"))?;
            }
        }
        ensure(seen.len() == m * (2 * m - 1), || {
            format!("M={m}: {} pairs covered", seen.len())
        })?;
    }
    Ok("M = 2..8 factorize K_2M".into())
}

// 5 -------------------------------------------------------------------------

fn embedded_tables() -> Outcome {
    let nr = nr_codebook_4_2();
    let prop = proposed_codebook_4_2();
    for (name, book) in [("NR", &nr), ("proposed", &prop)] {
        for (i, w) in book.codewords().iter().enumerate() {
            ensure(validate_stiefel(w.matrix(), 1e-12), || {
                format!("{name} index {} not Stiefel", i + 1)
            })?;
        }
    }
    let p = min_chordal_distance(&prop).unwrap();
    ensure((p.value - 1.0).abs() <= 1e-9, || {
        format!("proposed MCD {:.12}", p.value)
    })?;
    let n = min_chordal_distance(&nr).unwrap();
    let (i, j) = n.pair;
    let pd = projector_distance(nr.get(i).unwrap().matrix(), nr.get(j).unwrap().matrix());
    // Frozen from the brute-force run: indices 15 and 16 span one subspace.
    ensure(n.value < 1e-9 && n.pair == (14, 15) && pd < 1e-9, || {
        format!("NR MCD {:.3e} at indices {}/{}", n.value, i + 1, j + 1)
    })?;
    Ok(format!(
        "proposed MCD {:.9}; NR MCD {:.1e} at indices {}/{} (projector distance {:.1e})",
        p.value,
        n.value,
        i + 1,
        j + 1,
        pd
    ))
}

// 6 -------------------------------------------------------------------------

fn real_variables() -> Outcome {
    let rv = |k, t, m, s| real_variable_count(k, t, m, s).map_err(|e| e.to_string());
    ensure(rv(OptimizerKind::Manopt, 4, 2, 22)? == 176, || {
        "Manopt(4,2,22) != 176".into()
    })?;
    ensure(rv(OptimizerKind::Proposed2M, 4, 2, 22)? == 16, || {
        "Proposed2M(2,22) != 16".into()
    })?;
    ensure(rv(OptimizerKind::Proposed2M, 8, 4, 24)? == 16, || {
        "Proposed2M(4,24) != 16".into()
    })?;
    let mut checked = 0;
    for m in 2..=4usize {
        let t = 2 * m;
        for size in 4..=1024usize {
            let manopt = 2 * size * m * (t - m);
            let proposed = (size + 2 * m - 2) / (2 * m - 1) * m;
            ensure(
                rv(OptimizerKind::Manopt, t, m, size)? == manopt as u64,
                || format!("Manopt({t},{m},{size})"),
            )?;
            ensure(
                rv(OptimizerKind::Proposed2M, t, m, size)? == proposed as u64,
                || format!("Proposed2M({m},{size})"),
            )?;
            checked += 1;
        }
    }
    Ok(format!("anchor values and {checked} sweep points match"))
}

// 7 -------------------------------------------------------------------------

fn complexity_counters() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for scenario in 0..100 {
        let t = rng.random_range(2..=8);
        let m = rng.random_range(1..t);
        let n = rng.random_range(1..=64);
        let h = CMatrix::from_fn(n, t, |_, _| C64::new(rng.random(), rng.random()));
        let dense = random_stiefel(t, m, &mut rng);
        let sparse = row_sparse_precoder(t, m, 1, None, rng.random()).unwrap();

        let mut trace = OpTrace::enabled();
        let g1 = gram_dense(&h, &dense, &mut trace);
        let got = measured_mult_count(&trace).unwrap();
        ensure(got == gram_mult_count(t, m, n, false), || {
            format!("scenario {scenario}: dense count {got}")
        })?;

        let mut trace = OpTrace::enabled();
        let g2 = gram_sparse(&h, &Ellpack::from_dense(&sparse), &mut trace);
        let got = measured_mult_count(&trace).unwrap();
        ensure(got == gram_mult_count(t, m, n, true), || {
            format!("scenario {scenario}: sparse count {got}")
        })?;

        let hw = h.matmul(&dense);
        let hs = h.matmul(&sparse);
        ensure(
            (&g1 - &hw.adjoint_mul(&hw)).fro_norm() < 1e-9
                && (&g2 - &hs.adjoint_mul(&hs)).fro_norm() < 1e-9,
            || format!("scenario {scenario}: traced Gram differs from direct product"),
        )?;
    }
    Ok("100 scenarios, dense and 1-sparse counts exact".into())
}

// 8 -------------------------------------------------------------------------

fn mcd_ordering() -> Outcome {
    let cfg = OptimizerConfig::default();
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (t, m) in [(4usize, 2usize), (6, 3)] {
        for size in [4usize, 8, 16, 32] {
            let sparse = mcd(&build_sparse_2m(m, size, &cfg).map_err(|e| e.to_string())?);
            let expmap = mcd(&build_expmap(t, m, size, &cfg).map_err(|e| e.to_string())?);
            let manopt = mcd(&optimize_manopt(t, m, size, &cfg)
                .map_err(|e| e.to_string())?
                .0);
            lines.push(format!(
                "({t},{m},{size}) sparse {sparse:.4} expmap {expmap:.4} manopt {manopt:.4}"
            ));
            if sparse < expmap {
                failures.push(format!(
                    "({t},{m},{size}): sparse {sparse:.4} < expmap {expmap:.4}"
                ));
            }
            if manopt < sparse - 0.05 {
                failures.push(format!(
                    "({t},{m},{size}): manopt {manopt:.4} < sparse {sparse:.4} - 0.05"
                ));
            }
        }
    }
    for l in &lines {
        println!("      {l}");
    }
    if failures.is_empty() {
        Ok("ordering holds for all 8 cases".into())
    } else {
        Err(failures.join("; "))
    }
}

fn manopt_4_2_22() -> Result<Codebook, String> {
    Ok(optimize_manopt(4, 2, 22, &OptimizerConfig::default())
        .map_err(|e| e.to_string())?
        .0)
}

// 9 -------------------------------------------------------------------------

fn rate_ordering(manopt: &Codebook) -> Outcome {
    let prop = proposed_codebook_4_2();
    let nr = nr_codebook_4_2();
    let curve = rate_curve(&[&prop, &nr, manopt], 32, &[10.0, 10.01], 100_000, 9)
        .map_err(|e| e.to_string())?;
    let pn = curve.difference(0, 1).unwrap();
    let pm = curve.difference(0, 2).unwrap();
    let (d_pn, se_pn) = (pn.mean[0], pn.std_error[0]);
    let (d_pm, se_pm) = (pm.mean[0], pm.std_error[0]);
    let slope_001db = curve.mean_rates[0][1] - curve.mean_rates[0][0];
    ensure(d_pn > 0.0 && d_pn > 3.0 * se_pn, || {
        format!("proposed - NR = {d_pn:.3e} (se {se_pn:.3e})")
    })?;
    ensure(d_pm.abs() < 3.0 * se_pm || d_pm.abs() < slope_001db, || {
        format!(
            "|manopt - proposed| = {:.3e} (se {se_pm:.3e}, 0.01 dB = {slope_001db:.3e})",
            d_pm.abs()
        )
    })?;
    Ok(format!(
        "proposed-NR {d_pn:.4e} ({:.1} se); |proposed-manopt| {:.2e} (se {se_pm:.2e}, 0.01 dB = {slope_001db:.2e})",
        d_pn / se_pn,
        d_pm.abs()
    ))
}

// 10 ------------------------------------------------------------------------

fn rician_ordering(manopt: &Codebook) -> Outcome {
    let prop = proposed_codebook_4_2();
    let nr = nr_codebook_4_2();
    let medians = |k: f64| -> Result<Vec<f64>, String> {
        let s = gain_samples(
            &[&prop, &nr, manopt],
            32,
            ChannelModel::Rician { k },
            100_000,
            10,
        )
        .map_err(|e| e.to_string())?;
        Ok(s.into_iter()
            .map(|mut v| {
                v.sort_by(f64::total_cmp);
                median(&v)
            })
            .collect())
    };
    let k0 = medians(0.0)?;
    let kinf = medians(f64::INFINITY)?;
    let detail = format!(
        "K=0 medians prop {:.4} nr {:.4} manopt {:.4}; K=inf prop {:.4} nr {:.4} manopt {:.4}",
        k0[0], k0[1], k0[2], kinf[0], kinf[1], kinf[2]
    );
    let ok = k0[0] >= k0[1]
        && (k0[0] - k0[2]).abs() <= 0.01 * k0[2]
        && kinf[1] >= kinf[0]
        && kinf[0] >= kinf[2];
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 11 ------------------------------------------------------------------------

fn papr_gap() -> Outcome {
    let cfg = OptimizerConfig::default();
    let sparse = build_sparse_2m(2, 8, &cfg).map_err(|e| e.to_string())?;
    let nr = nr_codebook_4_2();
    let nr_dense = nr
        .subset(
            &(14..22).collect::<Vec<_>>(),
            CodebookMeta::new("nr-dense-8"),
        )
        .unwrap();
    let manopt = optimize_manopt(4, 2, 8, &cfg).map_err(|e| e.to_string())?.0;
    let level = |book: &Codebook, waveform| -> Result<f64, String> {
        let wc = WaveformConfig::new(624, 1024, 8, waveform);
        let s = papr_experiment(
            &PrecoderSource::Codebook(book),
            &wc,
            10_000,
            11,
            Pooling::PerAntenna,
        )
        .map_err(|e| e.to_string())?;
        Ok(s.at_ccdf(1e-2))
    };
    let d = [
        level(&sparse, Waveform::DftsOfdm)?,
        level(&nr_dense, Waveform::DftsOfdm)?,
        level(&manopt, Waveform::DftsOfdm)?,
    ];
    let o = [
        level(&sparse, Waveform::Ofdm)?,
        level(&nr_dense, Waveform::Ofdm)?,
        level(&manopt, Waveform::Ofdm)?,
    ];
    let spread = o.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - o.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!(
        "DFT-s-OFDM @1e-2: sparse {:.2} nr {:.2} manopt {:.2} dB; OFDM spread {spread:.2} dB",
        d[0], d[1], d[2]
    );
    if d[0] <= d[1] - 1.0 && d[0] <= d[2] - 1.0 && spread <= 0.3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 12 ------------------------------------------------------------------------

fn sparsity_study() -> Outcome {
    let thetas = vec![1.91, -2.21, -1.71, 0.636];
    let level = |ell: usize, waveform| -> Result<f64, String> {
        let wc = WaveformConfig::new(512, 1024, 8, waveform);
        let src = PrecoderSource::RowSparse {
            t: 8,
            m: 4,
            ell,
            thetas: Some(thetas.clone()),
        };
        let s = papr_experiment(&src, &wc, 10_000, 12, Pooling::PerAntenna)
            .map_err(|e| e.to_string())?;
        Ok(s.at_ccdf(1e-2))
    };
    let mut dfts = Vec::new();
    let mut ofdm = Vec::new();
    for ell in 1..=4 {
        dfts.push(level(ell, Waveform::DftsOfdm)?);
        ofdm.push(level(ell, Waveform::Ofdm)?);
    }
    let spread = ofdm.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - ofdm.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!(
        "DFT-s-OFDM @1e-2 by ell: {}; OFDM spread {spread:.2} dB",
        dfts.iter()
            .map(|x| format!("{x:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if dfts.windows(2).all(|w| w[1] > w[0]) && spread <= 0.3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let mut failed = 0;
    let mut run = |id: usize, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = elapsed > budget;
        let (tag, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; took {elapsed:.1?} > {budget:?}")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} [{id:>2}] {name}: {detail} ({:.2}s)",
            elapsed.as_secs_f64()
        );
    };
    let secs = Duration::from_secs;
    run(1, "closed-form distance laws", secs(5), &mut distance_laws);
    run(2, "dual-form chordal distance", secs(5), &mut dual_form);
    run(3, "pattern counting", secs(10), &mut pattern_counting);
    run(4, "1-factorization", secs(1), &mut one_factorization);
    run(5, "embedded (4,2) tables", secs(1), &mut embedded_tables);
    run(6, "real-variable formulas", secs(1), &mut real_variables);
    run(7, "complexity counters", secs(5), &mut complexity_counters);
    run(8, "MCD ordering", secs(600), &mut mcd_ordering);
    let manopt = manopt_4_2_22();
    run(9, "achievable-rate ordering", secs(600), &mut || {
        rate_ordering(manopt.as_ref()?)
    });
    run(10, "Rician gain ordering", secs(600), &mut || {
        rician_ordering(manopt.as_ref()?)
    });
    run(11, "PAPR gap", secs(1200), &mut papr_gap);
    run(12, "sparsity study", secs(1200), &mut sparsity_study);
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
