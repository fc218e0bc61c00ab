//! Structured versus random codebooks, both measured by `I(X1; X1 + X2)`
//! with the two users sharing one codebook.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codebook::{build_layered, enumerate_codebook, LayerSpec};
use crate::error::{Error, Result};
use crate::gfp::is_prime;
use crate::info::{mutual_info_sum, ExactBits};
use crate::lattice::{rational_to_f64, GPrimeSpec, GSpec, LatticeSpec};
use crate::point::{LatticePoint, Rational};

/// Random codewords live on the grid `δ Z^n` with `δ = 2^-10 √P`.
pub const RANDOM_GRID_BITS: u32 = 10;

/// `size` i.i.d. points, uniform on the grid `δ Z^n` inside the cube
/// `[-√(3P), √(3P)]^n` (per-dimension power about `P`). Points are returned
/// as integer multiples of `δ`; the leakage only depends on which sums
/// coincide, so the common factor `δ` is dropped.
pub fn random_grid_codebook(size: usize, n: usize, seed: u64) -> Vec<LatticePoint> {
    let half = libm::floor(libm::sqrt(3.0) * (1u64 << RANDOM_GRID_BITS) as f64) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| LatticePoint::from_integers((0..n).map(|_| rng.random_range(-half..=half)).collect()))
        .collect()
}

/// A nested-lattice codebook of exactly `size` points in dimension `n`.
///
/// `size = p^k` with `k <= n` gives one Construction-A codebook
/// (`G = [I_k; 0]`, `G' = I`). For `k > n` the exponent is split into layers
/// of at most `n` digits at scales `1, p, p^2, ...`; their sums are distinct
/// and form the Voronoi codebook of `p^-1 Z^n` modulo a coarser cube.
pub fn matched_lattice_codebook(size: usize, n: usize, budget: u64) -> Result<Vec<LatticePoint>> {
    let (p, k) = prime_power(size).ok_or(Error::NoMatchedLattice(size))?;
    if n == 0 {
        return Err(Error::InvalidDimensions("n must be positive"));
    }
    let full = k.min(n);
    let mut g = alloc::vec![0u64; n * full];
    for i in 0..full {
        g[i * full + i] = 1;
    }
    let spec = LatticeSpec {
        p,
        k: full,
        n,
        g: GSpec::Explicit(g),
        gprime: GPrimeSpec::Identity,
        scale: Rational::from_integer(1),
    };
    let fine = spec.build()?;
    if k <= n {
        return Ok(enumerate_codebook(&fine, budget)?.points().to_vec());
    }
    let mut layers = Vec::new();
    let mut left = k;
    let mut scale = 1i128;
    while left > 0 {
        let kk = left.min(n);
        layers.push(LayerSpec {
            k: kk,
            scale: Rational::from_integer(scale),
        });
        left -= kk;
        scale *= p as i128;
    }
    let powers: Vec<f64> = layers
        .iter()
        .map(|l| rational_to_f64(l.scale * l.scale / Rational::from_integer(12)))
        .collect();
    build_layered(&fine, &layers, &powers, budget)?.sum_points(budget)
}

fn prime_power(size: usize) -> Option<(u64, usize)> {
    if size < 2 {
        return None;
    }
    let mut p = 2u64;
    let s = size as u64;
    while s % p != 0 {
        p += 1;
    }
    if !is_prime(p) {
        return None;
    }
    let (mut rest, mut k) = (s, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// `½ log2(1 + b² (P1 + P2) / Ne)`, the eavesdropper's multiple-access
/// sum-rate bound. Infinite when `Ne = 0`.
pub fn mac_sum_rate_bound(b: f64, p1: f64, p2: f64, ne: f64) -> f64 {
    if ne == 0.0 {
        return f64::INFINITY;
    }
    0.5 * libm::log2(1.0 + b * b * (p1 + p2) / ne)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSeed {
    pub seed: u64,
    /// `I(X1; X1 + X2)` for the random codebook.
    pub leakage: ExactBits,
    /// Distinct codewords whose sums `x + y`, over unordered pairs, are all
    /// distinct. Since `x + y = y + x`, this is the most a sum set can
    /// separate.
    pub unique_sums: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineComparison {
    pub size: usize,
    pub n: usize,
    pub lattice_leakage: ExactBits,
    pub random: Vec<BaselineSeed>,
}

impl BaselineComparison {
    pub fn lattice_leak_per_dim(&self) -> f64 {
        self.lattice_leakage.to_f64() / self.n as f64
    }

    pub fn random_leak_per_dim(&self) -> Vec<f64> {
        self.random
            .iter()
            .map(|r| r.leakage.to_f64() / self.n as f64)
            .collect()
    }

    /// Seeds whose random codebook leaks more than one bit per dimension.
    pub fn random_exceeding_one_bit(&self) -> usize {
        self.random_leak_per_dim()
            .iter()
            .filter(|&&l| l > 1.0 + super::BOUND_TOLERANCE)
            .count()
    }

    /// Seeds where the random codebook leaks strictly more than the lattice.
    pub fn random_exceeding_lattice(&self) -> usize {
        let lat = self.lattice_leak_per_dim();
        self.random_leak_per_dim().iter().filter(|&&l| l > lat).count()
    }
}

pub fn random_codebook_baseline(size: usize, n: usize, seeds: &[u64], budget: u64) -> Result<BaselineComparison> {
    if size == 0 {
        return Err(Error::EmptyCodebook);
    }
    let pairs = size as u128 * size as u128;
    if pairs > budget as u128 {
        return Err(Error::BudgetExceeded { needed: pairs, budget });
    }
    let lattice_leakage = if size == 1 {
        ExactBits::zero()
    } else {
        let c = matched_lattice_codebook(size, n, budget)?;
        mutual_info_sum(&c, &c, budget)?
    };
    let mut random = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let c = random_grid_codebook(size, n, seed);
        let leakage = mutual_info_sum(&c, &c, budget)?;
        let mut sums: Vec<LatticePoint> = Vec::with_capacity(size * (size + 1) / 2);
        for (i, x) in c.iter().enumerate() {
            for y in &c[i..] {
                sums.push(x.add(y));
            }
        }
        sums.sort();
        sums.dedup();
        random.push(BaselineSeed {
            seed,
            leakage,
            unique_sums: sums.len() == size * (size + 1) / 2,
        });
    }
    Ok(BaselineComparison {
        size,
        n,
        lattice_leakage,
        random,
    })
}
