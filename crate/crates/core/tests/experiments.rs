use std::collections::HashMap;

use latsec_core::channel::{ChannelParams, Regime};
use latsec_core::codebook::{assign_bins, enumerate_codebook};
use latsec_core::experiments::*;
use latsec_core::lattice::LatticeSpec;
use latsec_core::point::{LatticePoint, Rational};
use latsec_core::DEFAULT_BUDGET;

fn entropy(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    counts.map(|c| c as f64 / total as f64).map(|q| -q * q.log2()).sum()
}

#[test]
fn nine_point_codebook_three_bins() {
    let spec = LatticeSpec::seeded(3, 2, 2, 1);
    let c = enumerate_codebook(&spec.build().unwrap(), DEFAULT_BUDGET).unwrap();
    let b = assign_bins(&c, 3, 0).unwrap();
    let mut joint: HashMap<(usize, LatticePoint), u64> = HashMap::new();
    let mut sums: HashMap<LatticePoint, u64> = HashMap::new();
    for (i, x) in c.points().iter().enumerate() {
        for y in c.points() {
            *joint.entry((b.bin_of(i), x.add(y))).or_default() += 1;
            *sums.entry(x.add(y)).or_default() += 1;
        }
    }
    let oracle = 3f64.log2() + entropy(sums.into_values(), 81) - entropy(joint.into_values(), 81);

    let r = secrecy_report(&c, 3, 0, DEFAULT_BUDGET).unwrap();
    assert!((r.leakage.to_f64() - oracle).abs() < 1e-12);
    assert!(r.onebit_pass && r.equivocation_identity && r.chain_rule);
    assert_eq!(&r.equivocation_per_dim + &r.leakage_per_dim, r.bin_rate);
    assert_eq!(r.sum_gap_bits, r.leakage_per_dim.scale(Rational::from_integer(2)));
}

#[test]
fn layered_suite_examples() {
    let configs = default_layered_configs();
    assert!(configs.len() >= 10);
    let r = run_layered_suite(&configs, DEFAULT_BUDGET);
    assert!(suite_passed(&r));
    let first = r[0].result.as_ref().unwrap();
    // Both layers are {0, -1/2}: sums {0, -1/2, -1} with law (1/4, 1/2, 1/4).
    assert_eq!(first.sum_size, 3);
    assert_eq!(first.tv_to_uniform, latsec_core::info::Prob::new(1, 6));
    let second = r[1].result.as_ref().unwrap();
    assert!(second.unique_sums);
    assert_eq!(second.tv_f64(), 0.0);
}

#[test]
fn one_layer_reduces_to_lemma_checks() {
    let cfg = LayeredConfig {
        fine: LatticeSpec::seeded(3, 1, 1, 0),
        layers: vec![latsec_core::codebook::LayerSpec { k: 1, scale: Rational::from_integer(1) }],
        powers: None,
    };
    let l = layered_report(&cfg, DEFAULT_BUDGET).unwrap();
    let c = enumerate_codebook(&cfg.fine.build().unwrap(), DEFAULT_BUDGET).unwrap();
    let lemma = lemma_report(&c, DEFAULT_BUDGET).unwrap();
    assert_eq!(l.h_pair_sum, lemma.h_sum);
    assert_eq!(l.entropy_bound, lemma.entropy_bound);
    assert_eq!(l.tv_f64(), 0.0);
}

#[test]
fn baseline_matches_counting_oracle() {
    let b = random_codebook_baseline(16, 2, &[0, 1, 2, 3, 4], DEFAULT_BUDGET).unwrap();
    for seed in &b.random {
        let c = random_grid_codebook(16, 2, seed.seed);
        let mut sums: HashMap<LatticePoint, u64> = HashMap::new();
        for x in &c {
            for y in &c {
                *sums.entry(x.add(y)).or_default() += 1;
            }
        }
        let oracle = entropy(sums.into_values(), 256) - 4.0;
        assert!((seed.leakage.to_f64() - oracle).abs() < 1e-12);
    }
    assert!(b.lattice_leak_per_dim() <= 1.0);
    let one = random_codebook_baseline(1, 2, &[7], DEFAULT_BUDGET).unwrap();
    assert!(one.random[0].leakage.is_zero());
}

fn pipeline(a: f64, b: f64, ne: f64) -> PipelineConfig {
    PipelineConfig {
        params: ChannelParams::new(a, b, 1.0, ne).unwrap(),
        lattice: LatticeSpec::seeded(3, 2, 2, 6),
        num_bins: 3,
        bin_seed: 4,
        trials: 500,
        seed: 8,
        max_layers: 8,
        budget: DEFAULT_BUDGET,
    }
}

#[test]
fn leakage_does_not_depend_on_eavesdropper_channel() {
    let reference = run_regime_pipeline(&pipeline(1.5, 1.0, 1.0)).unwrap();
    assert_eq!(reference.regime.regime, Regime::VeryStrong);
    for b in [0.1, 1.0, 10.0] {
        for ne in [0.0, 1.0] {
            let r = run_regime_pipeline(&pipeline(1.5, b, ne)).unwrap();
            assert_eq!(r.secrecy, reference.secrecy);
        }
    }
}

#[test]
fn pipeline_is_deterministic() {
    for a in [0.3, 0.8, 1.5, 1.2] {
        let x = run_regime_pipeline(&pipeline(a, 1.0, 1.0)).unwrap();
        let y = run_regime_pipeline(&pipeline(a, 1.0, 1.0)).unwrap();
        assert_eq!(x, y);
    }
    let r = run_regime_pipeline(&pipeline(0.3, 1.0, 1.0)).unwrap();
    assert_eq!(r.regime.regime, Regime::Weak);
    assert!(r.secrecy.leakage_per_dim.to_f64() <= 1.0);
}
