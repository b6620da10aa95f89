mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_grassmann::forge::{nr_codebook_4_2, proposed_codebook_4_2};
use sparse_grassmann::linksim::{
    achievable_rate, gain_cdf, rate_curve, sample_channel, sample_rayleigh, select_index,
    trial_rng, ChannelModel,
};
use sparse_grassmann::Codeword;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=8).prop_flat_map(|t| (Just(t), 1..t))
}

proptest! {
    #[test]
    fn rate_grows_with_snr((t, m) in dims(), n in 1usize..12, seed: u64, r1 in 0.0f64..1e3, r2 in 0.0f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::gaussian(n, t, &mut rng);
        let w = common::codeword(t, m, seed ^ 1);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = achievable_rate(&h, &w, lo).unwrap();
        let b = achievable_rate(&h, &w, hi).unwrap();
        prop_assert!(a >= 0.0 && b >= a - 1e-12);
    }

    #[test]
    fn rate_depends_only_on_the_subspace((t, m) in dims(), n in 1usize..12, seed: u64, rho in 0.0f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::gaussian(n, t, &mut rng);
        let w = common::codeword(t, m, seed ^ 1);
        let wu = Codeword::new(w.matrix().matmul(&common::unitary(m, seed ^ 2))).unwrap();
        let a = achievable_rate(&h, &w, rho).unwrap();
        let b = achievable_rate(&h, &wu, rho).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn selection_attains_the_maximum(seed: u64, rho in 0.01f64..100.0) {
        let book = proposed_codebook_4_2();
        let h = sample_rayleigh(8, 4, seed).unwrap().h;
        let pick = select_index(&h, &book, rho).unwrap();
        let rates: Vec<f64> = book.codewords().iter().map(|w| achievable_rate(&h, w, rho).unwrap()).collect();
        let best = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(rates[pick] >= best - 1e-12);
        prop_assert!(rates[..pick].iter().all(|&r| r < best - 1e-12));
    }
}

#[test]
fn rate_curves_ignore_thread_count() {
    let prop = proposed_codebook_4_2();
    let nr = nr_codebook_4_2();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rate_curve(&[&prop, &nr], 8, &[0.0, 10.0], 5000, 3).unwrap())
    };
    let one = run(1);
    let many = run(4);
    for (a, b) in one
        .mean_rates
        .iter()
        .flatten()
        .zip(many.mean_rates.iter().flatten())
    {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(one, many);
}

#[test]
fn mean_rates_are_nonnegative_and_nondecreasing() {
    let prop = proposed_codebook_4_2();
    let curve = rate_curve(&[&prop], 4, &[-10.0, -5.0, 0.0, 5.0, 10.0, 20.0], 2000, 11).unwrap();
    for rates in &curve.mean_rates {
        assert!(rates[0] >= 0.0);
        assert!(rates.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn channels_have_unit_average_entry_power() {
    let trials = 20_000u64;
    let (n, t) = (4, 4);
    for model in [
        ChannelModel::Rayleigh,
        ChannelModel::Rician { k: 0.0 },
        ChannelModel::Rician { k: 1.0 },
        ChannelModel::Rician { k: f64::INFINITY },
    ] {
        let normalize = model != ChannelModel::Rayleigh;
        let total: f64 = (0..trials)
            .map(|i| {
                sample_channel(n, t, model, normalize, &mut trial_rng(5, i))
                    .unwrap()
                    .h
                    .fro_norm_sqr()
            })
            .sum();
        let mean = total / trials as f64;
        let target = if normalize { 1.0 } else { (n * t) as f64 };
        assert!((mean / target - 1.0).abs() < 0.02, "{model:?}: mean {mean}");
    }
}

#[test]
fn duplicate_codebooks_share_a_cdf() {
    let book = proposed_codebook_4_2();
    let copy = book.clone();
    assert_eq!(
        gain_cdf(&book, 8, 1.0, 3000, 4).unwrap(),
        gain_cdf(&copy, 8, 1.0, 3000, 4).unwrap()
    );
}

#[test]
fn rician_rejects_negative_k() {
    assert!(gain_cdf(&proposed_codebook_4_2(), 8, -1.0, 10, 0).is_err());
}
