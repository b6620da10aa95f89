use proptest::prelude::*;
use sparse_grassmann::linalg::{CMatrix, C64};
use sparse_grassmann::linksim::trial_rng;
use sparse_grassmann::wavesim::{
    ccdf, dft_spread, modulate, modulate_with, papr, papr_experiment, Modulation, Pooling,
    PrecoderSource, Synthesizer, Waveform, WaveformConfig,
};

fn kolmogorov_p(stat: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * stat;
    let mut p = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        p += 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oversampling_never_lowers_papr(seed: u64, dfts: bool) {
        let waveform = if dfts { Waveform::DftsOfdm } else { Waveform::Ofdm };
        let coarse = Synthesizer::new(&WaveformConfig::new(48, 64, 1, waveform)).unwrap();
        let fine = Synthesizer::new(&WaveformConfig::new(48, 64, 8, waveform)).unwrap();
        let mut row = modulate(48, Modulation::Qam4, seed);
        if dfts {
            row = dft_spread(&row);
        }
        let p1 = papr(&coarse.synthesize(&row).unwrap()).unwrap();
        let p8 = papr(&fine.synthesize(&row).unwrap()).unwrap();
        prop_assert!(p1 >= 1.0 && p8 >= p1 - 1e-9);
    }

    #[test]
    fn ccdf_is_nonincreasing(
        samples in prop::collection::vec(1.0f64..100.0, 1..200),
        mut thresholds in prop::collection::vec(-5.0f64..25.0, 1..40),
    ) {
        thresholds.sort_by(f64::total_cmp);
        let curve = ccdf(&samples, &thresholds);
        prop_assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
        prop_assert!(curve.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
    }
}

#[test]
fn qam_symbols_have_unit_power() {
    let s = modulate(100_000, Modulation::Qam4, 9);
    let power = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64;
    assert!((power - 1.0).abs() < 0.01);
}

#[test]
fn experiments_are_reproducible() {
    let cfg = WaveformConfig::new(60, 128, 4, Waveform::DftsOfdm);
    let src = PrecoderSource::RowSparse {
        t: 4,
        m: 2,
        ell: 2,
        thetas: None,
    };
    let a = papr_experiment(&src, &cfg, 300, 21, Pooling::PerAntenna).unwrap();
    let b = papr_experiment(&src, &cfg, 300, 21, Pooling::PerAntenna).unwrap();
    assert_eq!(a, b);
    assert!(a.values.iter().all(|&p| p >= 1.0));
    assert_eq!(a.values.len(), 300 * 4);
}

#[test]
fn ofdm_samples_look_gaussian_at_every_sparsity() {
    let cfg = WaveformConfig::new(256, 512, 1, Waveform::Ofdm);
    let synth = Synthesizer::new(&cfg).unwrap();
    for ell in 1..=4usize {
        let mut re = Vec::new();
        let mut frame = 0u64;
        while re.len() < 100_000 {
            let mut rng = trial_rng(ell as u64, frame);
            let streams: Vec<Vec<C64>> = (0..4)
                .map(|_| modulate_with(256, Modulation::Qam4, &mut rng))
                .collect();
            // Antenna 0 of a (4,4) row-sparse precoder mixes streams 0..ell.
            let row: Vec<C64> = (0..256)
                .map(|k| (0..ell).map(|s| streams[s][k]).sum::<C64>() / (ell as f64).sqrt())
                .collect();
            re.extend(synth.synthesize(&row).unwrap().iter().map(|z| z.re));
            frame += 1;
        }
        let n = re.len() as f64;
        let mean = re.iter().sum::<f64>() / n;
        let var = re.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let kurt = re.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / (var * var);
        assert!((kurt - 3.0).abs() <= 0.2, "ell={ell}: kurtosis {kurt}");
    }
}

#[test]
fn one_sparse_dfts_matches_unprecoded_single_stream() {
    let cfg = WaveformConfig::new(64, 128, 4, Waveform::DftsOfdm);
    let sparse = PrecoderSource::RowSparse {
        t: 2,
        m: 2,
        ell: 1,
        thetas: None,
    };
    let single = PrecoderSource::Fixed(CMatrix::identity(1));
    let a = papr_experiment(&sparse, &cfg, 2000, 1, Pooling::PerAntenna)
        .unwrap()
        .values;
    let b = papr_experiment(&single, &cfg, 4000, 2, Pooling::PerAntenna)
        .unwrap()
        .values;
    let (n, m) = (a.len(), b.len());
    let p = kolmogorov_p(ks_statistic(a, b), n, m);
    assert!(p > 0.01, "KS p-value {p}");
}

#[test]
fn rejects_bad_configs() {
    assert!(WaveformConfig::new(600, 512, 8, Waveform::Ofdm)
        .validate()
        .is_err());
    assert!(WaveformConfig::new(64, 96, 8, Waveform::Ofdm)
        .validate()
        .is_err());
    let src = PrecoderSource::RowSparse {
        t: 4,
        m: 2,
        ell: 3,
        thetas: None,
    };
    assert!(papr_experiment(
        &src,
        &WaveformConfig::new(32, 64, 2, Waveform::Ofdm),
        4,
        0,
        Pooling::PerAntenna
    )
    .is_err());
}

#[test]
fn codeword_selection_rule_does_not_move_sparse_papr() {
    use sparse_grassmann::forge::build_sparse_2m;
    use sparse_grassmann::OptimizerConfig;

    let book = build_sparse_2m(2, 8, &OptimizerConfig::default()).unwrap();
    let cfg = WaveformConfig::new(96, 128, 4, Waveform::DftsOfdm);
    let random = papr_experiment(
        &PrecoderSource::Codebook(&book),
        &cfg,
        2000,
        3,
        Pooling::PerAntenna,
    )
    .unwrap();
    let driven = papr_experiment(
        &PrecoderSource::CodebookByChannel { book: &book, rx: 4 },
        &cfg,
        2000,
        3,
        Pooling::PerAntenna,
    )
    .unwrap();
    assert_eq!(random.values.len(), driven.values.len());
    assert!((random.at_ccdf(0.5) - driven.at_ccdf(0.5)).abs() < 0.1);
}
