//! Verification suites: sum-set and entropy bounds, binned leakage, layered
//! codebooks, the random-codebook comparison and the end-to-end regime
//! pipeline.
//!
//! Bounds on entropies are compared after converting the exact difference
//! to a float, with the fixed slack [`BOUND_TOLERANCE`].

mod baseline;
mod pipeline;

use alloc::vec::Vec;

use crate::codebook::{
    assign_bins, build_layered, enumerate_codebook, verify_sum_bound, Codebook, LayerSpec, LayeredCodebook,
    SumBoundReport,
};
use crate::error::Result;
use crate::info::{layered_sum_distribution, leakage_binned, tv_to_uniform, uniform_dist, ExactBits, Prob};
use crate::lattice::{rational_to_f64, LatticeSpec};
use crate::point::Rational;

pub use baseline::{
    mac_sum_rate_bound, matched_lattice_codebook, random_codebook_baseline, random_grid_codebook,
    BaselineComparison, BaselineSeed, RANDOM_GRID_BITS,
};
pub use pipeline::{
    layered_for_powers, loopback_check, run_regime_pipeline, LayeredLoopback, LoopbackReport, PipelineConfig,
    PipelineReport, Reliability,
};

/// Slack allowed when an exact entropy difference is compared to a bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// `a <= b` up to [`BOUND_TOLERANCE`]; exact when the difference vanishes.
pub fn bits_le(a: &ExactBits, b: &ExactBits) -> bool {
    let d = a - b;
    d.is_zero() || d.to_f64() <= BOUND_TOLERANCE
}

/// One configuration of a suite and what happened to it. Errors (budget,
/// bad parameters) are kept per configuration instead of aborting the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<C, T> {
    pub config: C,
    pub result: Result<T>,
}

pub trait Verdict {
    fn passed(&self) -> bool;
}

/// True when every configuration ran and passed. An empty suite passes.
pub fn suite_passed<C, T: Verdict>(outcomes: &[Outcome<C, T>]) -> bool {
    outcomes
        .iter()
        .all(|o| o.result.as_ref().map(Verdict::passed).unwrap_or(false))
}

/// Seeded lattices for every `p` in `primes` and `1 <= k <= n <= max_n`
/// with `p^k <= max_size`, one per seed.
pub fn lattice_grid(primes: &[u64], max_n: usize, max_size: u64, seeds: &[u64]) -> Vec<LatticeSpec> {
    let mut out = Vec::new();
    for &p in primes {
        for n in 1..=max_n {
            for k in 1..=n {
                match p.checked_pow(k as u32) {
                    Some(size) if size <= max_size => {}
                    _ => continue,
                }
                for &seed in seeds {
                    out.push(LatticeSpec::seeded(p, k, n, seed));
                }
            }
        }
    }
    out
}

/// `p in {2, 3, 5, 7}`, `n <= 6`, `p^k <= 512`, seeds 0..5.
pub fn default_grid() -> Vec<LatticeSpec> {
    lattice_grid(&[2, 3, 5, 7], 6, 512, &[0, 1, 2, 3, 4])
}

/// Sum-set, entropy and mutual-information checks for one codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub n: usize,
    pub size: usize,
    pub sum_bound: SumBoundReport,
    /// `H(X1 + X2)`.
    pub h_sum: ExactBits,
    /// `log2 |C| + n`.
    pub entropy_bound: ExactBits,
    pub entropy_pass: bool,
    /// `I(X1; X1 + X2)`.
    pub mutual_info: ExactBits,
    pub mutual_info_pass: bool,
}

impl LemmaReport {
    pub fn mutual_info_per_dim(&self) -> f64 {
        self.mutual_info.to_f64() / self.n as f64
    }
}

impl Verdict for LemmaReport {
    fn passed(&self) -> bool {
        self.sum_bound.pass && self.entropy_pass && self.mutual_info_pass
    }
}

pub fn lemma_report(c: &Codebook, budget: u64) -> Result<LemmaReport> {
    let n = c.n();
    let sum_bound = verify_sum_bound(c, budget)?;
    let d = uniform_dist(c)?;
    let h_sum = d.convolve(&d, budget)?.entropy();
    let n_bits = ExactBits::constant(Rational::from_integer(n as i128));
    let entropy_bound = &ExactBits::log2_int(c.len() as u128) + &n_bits;
    let mutual_info = &h_sum - &d.entropy();
    Ok(LemmaReport {
        n,
        size: c.len(),
        sum_bound,
        entropy_pass: bits_le(&h_sum, &entropy_bound),
        mutual_info_pass: bits_le(&mutual_info, &n_bits),
        h_sum,
        entropy_bound,
        mutual_info,
    })
}

pub fn run_lemma_suite(grid: &[LatticeSpec], budget: u64) -> Vec<Outcome<LatticeSpec, LemmaReport>> {
    grid.iter()
        .map(|spec| Outcome {
            config: spec.clone(),
            result: spec
                .build()
                .and_then(|lat| enumerate_codebook(&lat, budget))
                .and_then(|c| lemma_report(&c, budget)),
        })
        .collect()
}

/// A lattice together with a binning of its codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinningConfig {
    pub spec: LatticeSpec,
    pub num_bins: usize,
    pub bin_seed: u64,
}

/// Every divisor `p^j`, `0 <= j <= k`, of `|C|` as a bin count.
pub fn binning_grid(specs: &[LatticeSpec], bin_seed: u64) -> Vec<BinningConfig> {
    let mut out = Vec::new();
    for spec in specs {
        let mut bins = 1usize;
        for _ in 0..=spec.k {
            out.push(BinningConfig {
                spec: spec.clone(),
                num_bins: bins,
                bin_seed,
            });
            bins *= spec.p as usize;
        }
    }
    out
}

/// Leakage and equivocation of one binned codebook against the same
/// codebook at the other transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub n: usize,
    pub size: usize,
    pub num_bins: usize,
    /// `(1/n) log2 |C|`.
    pub rate: f64,
    /// `(1/n) log2 #bins`.
    pub bin_rate: ExactBits,
    /// `I(W1; X1 + X2)`, an upper bound on `I(W1; Z)` for every `b`, `Ne`.
    pub leakage: ExactBits,
    pub leakage_per_dim: ExactBits,
    /// `(1/n) H(W1 | X1 + X2)`.
    pub equivocation_per_dim: ExactBits,
    /// Leakage per dimension at most one bit.
    pub onebit_pass: bool,
    /// Both users' leakage together, `2 * leakage_per_dim`.
    pub sum_gap_bits: ExactBits,
    /// `equivocation_per_dim == bin_rate - leakage_per_dim`, exactly.
    pub equivocation_identity: bool,
    /// `H(W) - H(W|S) == H(S) - H(S|W)`, exactly.
    pub chain_rule: bool,
}

impl Verdict for SecrecyReport {
    fn passed(&self) -> bool {
        self.onebit_pass && self.equivocation_identity && self.chain_rule
    }
}

pub fn secrecy_report(c: &Codebook, num_bins: usize, bin_seed: u64, budget: u64) -> Result<SecrecyReport> {
    let binned = assign_bins(c, num_bins, bin_seed)?;
    let lb = leakage_binned(&binned, c, budget)?;
    let leakage_per_dim = lb.leakage_per_dim();
    let bin_rate = lb.bin_rate();
    let equivocation_per_dim = lb.equivocation_per_dim();
    let one = ExactBits::constant(Rational::from_integer(1));
    Ok(SecrecyReport {
        n: c.n(),
        size: c.len(),
        num_bins,
        rate: c.rate(),
        onebit_pass: bits_le(&leakage_per_dim, &one),
        sum_gap_bits: leakage_per_dim.scale(Rational::from_integer(2)),
        equivocation_identity: equivocation_per_dim == &bin_rate - &leakage_per_dim,
        chain_rule: lb.chain_rule_holds(),
        bin_rate,
        leakage: lb.leakage,
        leakage_per_dim,
        equivocation_per_dim,
    })
}

pub fn run_theorem1_suite(configs: &[BinningConfig], budget: u64) -> Vec<Outcome<BinningConfig, SecrecyReport>> {
    let mut cache: Option<(LatticeSpec, Result<Codebook>)> = None;
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        if cache.as_ref().map(|(s, _)| s != &cfg.spec).unwrap_or(true) {
            let c = cfg.spec.build().and_then(|lat| enumerate_codebook(&lat, budget));
            cache = Some((cfg.spec.clone(), c));
        }
        let c = &cache.as_ref().expect("filled above").1;
        let result = match c {
            Ok(c) => secrecy_report(c, cfg.num_bins, cfg.bin_seed, budget),
            Err(e) => Err(e.clone()),
        };
        out.push(Outcome {
            config: cfg.clone(),
            result,
        });
    }
    out
}

/// A fine lattice and its layers. Layer powers default to the layers' own
/// dither second moments, so no layer is rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredConfig {
    pub fine: LatticeSpec,
    pub layers: Vec<LayerSpec>,
    pub powers: Option<Vec<f64>>,
}

impl LayeredConfig {
    pub fn powers(&self) -> Vec<f64> {
        match &self.powers {
            Some(p) => p.clone(),
            None => self
                .layers
                .iter()
                .map(|l| rational_to_f64(l.scale * l.scale / Rational::from_integer(12)))
                .collect(),
        }
    }
}

/// Twelve two-layer configurations. The second layer sits at an integer
/// multiple of the fine scale so it stays inside the fine lattice.
pub fn default_layered_configs() -> Vec<LayeredConfig> {
    let shapes: [(u64, usize, usize, u64, usize, i128); 12] = [
        (2, 1, 1, 0, 1, 1),
        (2, 1, 1, 0, 1, 2),
        (3, 1, 1, 0, 1, 3),
        (3, 1, 1, 0, 1, 2),
        (2, 1, 2, 1, 1, 1),
        (2, 2, 2, 2, 2, 2),
        (3, 1, 2, 3, 1, 2),
        (5, 1, 2, 4, 1, 5),
        (2, 2, 3, 5, 1, 3),
        (3, 2, 3, 6, 2, 1),
        (7, 1, 2, 8, 1, 2),
        (2, 3, 4, 9, 2, 2),
    ];
    shapes
        .iter()
        .map(|&(p, k, n, seed, k2, m)| LayeredConfig {
            fine: LatticeSpec::seeded(p, k, n, seed),
            layers: alloc::vec![
                LayerSpec {
                    k,
                    scale: Rational::from_integer(1),
                },
                LayerSpec {
                    k: k2,
                    scale: Rational::from_integer(m),
                },
            ],
            powers: None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredReport {
    pub n: usize,
    pub layer_sizes: Vec<usize>,
    /// `|C_1 ⊕ ... ⊕ C_N|`.
    pub sum_size: usize,
    /// Every tuple of layer codewords has a distinct sum.
    pub unique_sums: bool,
    /// `H(L1 + L2)` with `L1`, `L2` independent sums of uniform layers.
    pub h_pair_sum: ExactBits,
    /// `log2 |C_1 ⊕ ... ⊕ C_N| + n`.
    pub entropy_bound: ExactBits,
    pub entropy_pass: bool,
    /// Total variation between the sum-of-layers law and the uniform law on
    /// the sum set. Reported only.
    pub tv_to_uniform: Prob,
}

impl LayeredReport {
    pub fn tv_f64(&self) -> f64 {
        *self.tv_to_uniform.numer() as f64 / *self.tv_to_uniform.denom() as f64
    }
}

impl Verdict for LayeredReport {
    fn passed(&self) -> bool {
        self.entropy_pass
    }
}

pub fn layered_report(cfg: &LayeredConfig, budget: u64) -> Result<LayeredReport> {
    let fine = cfg.fine.build()?;
    layered_report_for(&build_layered(&fine, &cfg.layers, &cfg.powers(), budget)?, budget)
}

pub fn layered_report_for(lc: &LayeredCodebook, budget: u64) -> Result<LayeredReport> {
    let n = lc.n();
    let sum_points = lc.sum_points(budget)?;
    let x = layered_sum_distribution(lc, budget)?;
    let h_pair_sum = x.convolve(&x, budget)?.entropy();
    let entropy_bound = &ExactBits::log2_int(sum_points.len() as u128)
        + &ExactBits::constant(Rational::from_integer(n as i128));
    let layer_sizes: Vec<usize> = lc.layers().iter().map(Codebook::len).collect();
    Ok(LayeredReport {
        n,
        unique_sums: sum_points.len() == layer_sizes.iter().product::<usize>(),
        sum_size: sum_points.len(),
        entropy_pass: bits_le(&h_pair_sum, &entropy_bound),
        tv_to_uniform: tv_to_uniform(&x, &sum_points)?,
        layer_sizes,
        h_pair_sum,
        entropy_bound,
    })
}

pub fn run_layered_suite(configs: &[LayeredConfig], budget: u64) -> Vec<Outcome<LayeredConfig, LayeredReport>> {
    configs
        .iter()
        .map(|cfg| Outcome {
            config: cfg.clone(),
            result: layered_report(cfg, budget),
        })
        .collect()
}
