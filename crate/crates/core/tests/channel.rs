use latsec_core::channel::*;
use latsec_core::codebook::{enumerate_codebook, Codebook};
use latsec_core::error::Error;
use latsec_core::experiments::{layered_for_powers, loopback_check};
use latsec_core::lattice::LatticeSpec;
use latsec_core::point::LatticePoint;
use latsec_core::DEFAULT_BUDGET;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn codebook(p: u64, k: usize, n: usize, seed: u64) -> Codebook {
    enumerate_codebook(&LatticeSpec::seeded(p, k, n, seed).build().unwrap(), DEFAULT_BUDGET).unwrap()
}

fn analytic_variance(alpha: f64, p: f64, a: f64, n: f64) -> f64 {
    (1.0 - alpha).powi(2) * p + alpha * alpha * a * a * p + alpha * alpha * n
}

#[test]
fn regime_examples() {
    assert_eq!(classify_regime(1.5, 1.0).unwrap().regime, Regime::VeryStrong);
    assert_eq!(classify_regime(0.3, 1.0).unwrap().regime, Regime::Weak);
    assert_eq!(classify_regime(0.8, 1.0).unwrap().regime, Regime::General);
    assert_eq!(classify_regime(1.0, 1.0).unwrap_err(), Error::UnityGain);
}

#[test]
fn formula_examples() {
    assert!((mmse_alpha(1.0, 0.5, 1.0) - 1.0 / 2.25).abs() < 1e-12);
    assert_eq!(mmse_alpha(1.0, 0.0, 0.0), 1.0);
    assert!((mmse_alpha(1e9, 0.0, 1.0) - 1.0).abs() < 1e-8);
    assert!((effective_noise_variance(1.0, 0.5, 1.0) - 1.25 / 2.25).abs() < 1e-12);
    assert_eq!(effective_noise_variance(1.0, 0.0, 0.0), 0.0);
    assert!((effective_noise_variance(1.0, 0.3, 1.0) - 1.09 / 2.09).abs() < 1e-12);
    assert!((achievable_rate_weak(1.0, 0.5, 1.0) - 0.5 * 1.8f64.log2()).abs() < 1e-12);
    assert!((achievable_rate_weak(1.0, 0.0, 1.0) - 0.5).abs() < 1e-12);
    assert!(achievable_rate_weak(1e-12, 0.3, 1.0) < 1e-11);
}

proptest! {
    #[test]
    fn mmse_alpha_is_the_argmin(p in 0.1f64..10.0, a in 0.1f64..10.0, n in 0.1f64..10.0) {
        let alpha = mmse_alpha(p, a, n);
        let v = effective_noise_variance(p, a, n);
        let best = (0..=1000)
            .map(|i| analytic_variance(i as f64 * 1e-3, p, a, n))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(best >= v - 1e-6);
        let at = analytic_variance(alpha, p, a, n);
        prop_assert!((at - v).abs() <= 1e-12 * v);
        prop_assert!((effective_noise_at(alpha, p, a, n) - v).abs() <= 1e-12 * v);
    }
}

#[test]
fn transmit_examples() {
    let params = ChannelParams::noiseless(0.5, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = transmit(&[1.0], &[2.0], &params, &mut rng).unwrap();
    assert_eq!((out.y1, out.y2, out.z), (vec![2.0], vec![2.5], vec![3.0]));
    let noisy = ChannelParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
    let out = transmit(&[0.0; 3], &[0.0; 3], &noisy, &mut rng).unwrap();
    assert!(out.y1.iter().chain(&out.y2).chain(&out.z).all(|v| *v != 0.0));
}

#[test]
fn received_power_matches_channel_model() {
    let c = codebook(3, 1, 2, 0).fit_dither_power(1.0).unwrap();
    let params = ChannelParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
    let mut samples = Vec::with_capacity(200_000);
    for t in 0..100_000 {
        let mut rng = trial_rng(42, t);
        let m1 = rng.random_range(0..c.len());
        let m2 = rng.random_range(0..c.len());
        let tr = dithered_round(&c, m1, m2, &params, &mut rng).unwrap();
        samples.extend(tr.out.y1.iter().map(|y| y * y));
    }
    let est = MeanEstimate::from_samples(&samples);
    let m = c.lattice().dither_second_moment();
    let p = *m.numer() as f64 / *m.denom() as f64;
    let target = p + 0.25 * p + 1.0;
    assert!(est.within(target, 3.0), "{est:?} vs {target}");
}

#[test]
fn dither_examples() {
    let lat = codebook(2, 1, 1, 0).lattice().clone();
    let l = LatticePoint::new(vec![-1], 2);
    assert_eq!(encode_dithered(&l, &[0.0], &lat), vec![-0.5]);
    assert_eq!(encode_dithered(&LatticePoint::zero(1), &[0.25], &lat), vec![0.25]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..100_000).map(|_| dither_sample(&lat, &mut rng)[0]).collect();
    assert!(xs.iter().all(|x| (-0.5..0.5).contains(x)));
    assert!(MeanEstimate::from_samples(&xs).within(0.0, 3.0));
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    assert!(MeanEstimate::from_samples(&sq).within(1.0 / 12.0, 3.0));
}

#[test]
fn dithered_signal_is_uniform_for_every_message() {
    let c = codebook(3, 1, 2, 7);
    let lat = c.lattice();
    let chi = ChiSquared::new(15.0).unwrap();
    for (m, l) in c.points().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + m as u64);
        let mut counts = [0u64; 16];
        let draws = 100_000;
        for _ in 0..draws {
            let x = encode_dithered(l, &dither_sample(lat, &mut rng), lat);
            let cell = |v: f64| (((v + 0.5) * 4.0).floor() as usize).min(3);
            counts[cell(x[0]) * 4 + cell(x[1])] += 1;
        }
        let expected = draws as f64 / 16.0;
        let stat: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(p_value > 1e-3, "message {m}: chi-square {stat}, p = {p_value}");
    }
}

#[test]
fn weak_residual_matches_formula() {
    let c = codebook(2, 1, 2, 0).fit_dither_power(1.0).unwrap();
    let params = ChannelParams::new(0.3, 1.0, 1.0, 1.0).unwrap();
    let run = simulate_weak(&c, &params, 100_000, 2024).unwrap();
    assert!((run.formula_variance - 0.5215).abs() < 1e-4);
    assert!((run.transmit_power - 1.0).abs() < 1e-5);
    assert!(run.effective_noise.within(run.formula_variance, 3.0), "{run:?}");
    println!("folded residual {:?}", run.folded_residual);
}

#[test]
fn weak_noiseless_loopback() {
    let c = codebook(5, 2, 3, 1);
    let cw = c.points_f64();
    let params = ChannelParams::noiseless(0.0, 1.0, 1.0).unwrap();
    for m in 0..c.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        let tr = dithered_round(&c, m, (m * 7) % c.len(), &params, &mut rng).unwrap();
        assert_eq!(decode_weak(&tr.out.y1, &tr.u1, 1.0, &c, &cw), m);
    }
}

#[test]
fn weak_error_rate_at_smallest_rate_is_reported() {
    let c = codebook(2, 1, 2, 0).fit_dither_power(1.0).unwrap();
    let params = ChannelParams::new(0.3, 1.0, 1.0, 1.0).unwrap();
    let run = simulate_weak(&c, &params, 10_000, 3).unwrap();
    let r = run.errors.rate();
    println!("rate {} (achievable {:.4}): error rate {r:.4}", c.rate(), achievable_rate_weak(1.0, 0.3, 1.0));
    assert!(r > 0.0 && r < 1.0);
}

fn very_strong_errors(c: &Codebook, a: f64, order: DecodeOrder) -> f64 {
    let params = ChannelParams::new(a, 1.0, 1.0, 1.0).unwrap();
    simulate_very_strong(c, &params, order, 10_000, 77).unwrap().own_errors.rate()
}

#[test]
fn very_strong_gain_helps_and_order_matters() {
    for (k, n) in [(1, 2), (1, 4)] {
        let c = codebook(2, k, n, 0).fit_codeword_power(1.0).unwrap();
        let strong = very_strong_errors(&c, 10.0, DecodeOrder::InterferenceFirst);
        let weaker = very_strong_errors(&c, 1.5, DecodeOrder::InterferenceFirst);
        let own_first = very_strong_errors(&c, 10.0, DecodeOrder::OwnFirst);
        println!("n={n} rate={}: a=10 {strong:.4}, a=1.5 {weaker:.4}, own first {own_first:.4}", c.rate());
        assert!(strong < weaker);
        assert!(own_first > strong);
    }
}

#[test]
fn very_strong_noiseless_loopback() {
    let c = codebook(3, 2, 2, 4).fit_codeword_power(1.0).unwrap();
    let cw = c.points_f64();
    let params = ChannelParams::noiseless(10.0, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for m1 in 0..c.len() {
        for m2 in 0..c.len() {
            let out = transmit(&cw[m1], &cw[m2], &params, &mut rng).unwrap();
            let d = decode_very_strong(&out.y1, 10.0, &cw, DecodeOrder::InterferenceFirst);
            assert_eq!((d.own, d.interference), (m1, m2));
        }
    }
}

#[test]
fn layered_decoding_examples() {
    let spec = LatticeSpec::seeded(2, 1, 2, 3);
    let powers = layered_power_allocation(1.5, 4.0, 4).unwrap();
    assert!(powers.len() >= 2);
    let lc = layered_for_powers(&spec, &powers, DEFAULT_BUDGET).unwrap();
    assert!(LayeredDecoder::new(&lc, 1.5).is_ok());
    let report = loopback_check(&spec, 0, 64, DEFAULT_BUDGET).unwrap();
    let layered = report.layered.expect("small codebook gets a layered check");
    assert!(layered.ok && layered.tuples > 0);

    let one = layered_for_powers(&spec, &[1.0], DEFAULT_BUDGET).unwrap();
    let single = LayeredDecoder::new(&one, 2.0).unwrap();
    let cw1 = single.layer_codewords()[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let noisy = ChannelParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
    for _ in 0..200 {
        let (m1, m2) = (rng.random_range(0..cw1.len()), rng.random_range(0..cw1.len()));
        let out = transmit(&cw1[m1], &cw1[m2], &noisy, &mut rng).unwrap();
        let d = decode_very_strong(&out.y1, 2.0, &cw1, DecodeOrder::InterferenceFirst);
        assert_eq!(single.decode(&out.y1), vec![d.own]);
    }

    let err = check_stage_conditions(1.2, &[0.1, 5.0]).unwrap_err();
    assert_eq!(err, Error::StageConditionViolated { stage: 2 });
}

/// Error rates at a fixed rate of 1/2 bit per dimension as n grows. The
/// codes here are far from capacity-achieving, so the sequence is printed
/// rather than required to decrease.
#[test]
fn reliability_versus_dimension() {
    let params = ChannelParams::new(10.0, 1.0, 1.0, 1.0).unwrap();
    let mut rates = Vec::new();
    for (k, n) in [(1, 2), (2, 4), (3, 6)] {
        let c = codebook(2, k, n, 0).fit_codeword_power(1.0).unwrap();
        let run = simulate_very_strong(&c, &params, DecodeOrder::InterferenceFirst, 10_000, 9).unwrap();
        rates.push((n, run.own_errors.rate()));
    }
    let monotone = rates.windows(2).all(|w| w[1].1 <= w[0].1);
    println!("error rate by n: {rates:?}, non-increasing: {monotone}");
    assert!(rates.iter().all(|&(_, r)| (0.0..=1.0).contains(&r)));
}
