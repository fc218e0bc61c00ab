//! Exact information measures on finite-support distributions.
//!
//! Distributions carry integer weights over a common total, so every
//! probability is an exact rational. Entropies come back as [`ExactBits`],
//! i.e. in closed form; the only floating-point step is the final
//! [`ExactBits::to_f64`].
//!
//! Leakage is always measured on the noiseless sum `S = X1 + X2`: the
//! eavesdropper's observation `b S + N_e` is a degraded version of it, so by
//! data processing `I(W; Z) <= I(W; S)` for every `b` and `N_e`.

mod bits;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_rational::Ratio;

pub use bits::ExactBits;

use crate::codebook::{BinnedCodebook, Codebook, LayeredCodebook};
use crate::error::{Error, Result};
use crate::point::{LatticePoint, Rational};

/// Exact probability.
pub type Prob = Ratio<u128>;

/// Finite distribution over exact points: `P(x) = weight(x) / total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMassDist {
    weights: BTreeMap<LatticePoint, u128>,
    total: u128,
    n: usize,
}

impl PointMassDist {
    /// Uniform over the listed points, counting repeats with multiplicity.
    pub fn uniform(points: &[LatticePoint]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyCodebook);
        };
        let n = first.dim();
        let mut weights = BTreeMap::new();
        for p in points {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { left: n, right: p.dim() });
            }
            *weights.entry(p.clone()).or_insert(0u128) += 1;
        }
        Ok(PointMassDist {
            weights,
            total: points.len() as u128,
            n,
        })
    }

    pub fn point_mass(p: LatticePoint) -> Self {
        let n = p.dim();
        let mut weights = BTreeMap::new();
        weights.insert(p, 1);
        PointMassDist { weights, total: 1, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &LatticePoint> {
        self.weights.keys()
    }

    pub fn total_weight(&self) -> u128 {
        self.total
    }

    pub fn prob(&self, x: &LatticePoint) -> Prob {
        Prob::new(self.weights.get(x).copied().unwrap_or(0), self.total)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, Prob)> {
        self.weights.iter().map(|(p, &w)| (p, Prob::new(w, self.total)))
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &PointMassDist, budget: u64) -> Result<PointMassDist> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let needed = self.weights.len() as u128 * other.weights.len() as u128;
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let mut weights = BTreeMap::new();
        for (x, &wx) in &self.weights {
            for (y, &wy) in &other.weights {
                *weights.entry(x.add(y)).or_insert(0u128) += wx * wy;
            }
        }
        Ok(PointMassDist {
            weights,
            total: self.total * other.total,
            n: self.n,
        })
    }

    /// Exact Shannon entropy.
    pub fn entropy(&self) -> ExactBits {
        entropy_of_weights(self.weights.values().copied(), self.total)
    }
}

/// `uniform_dist(C)`.
pub fn uniform_dist(c: &Codebook) -> Result<PointMassDist> {
    PointMassDist::uniform(c.points())
}

pub fn convolve(a: &PointMassDist, b: &PointMassDist, budget: u64) -> Result<PointMassDist> {
    a.convolve(b, budget)
}

/// Shannon entropy in bits as a float.
pub fn entropy_bits(d: &PointMassDist) -> f64 {
    d.entropy().to_f64()
}

/// `H = log2 D - (1/D) Σ w log2 w`, grouping equal weights so each distinct
/// weight is factorized once.
fn entropy_of_weights(weights: impl Iterator<Item = u128>, total: u128) -> ExactBits {
    let mut by_weight: BTreeMap<u128, u128> = BTreeMap::new();
    for w in weights {
        if w > 0 {
            *by_weight.entry(w).or_insert(0) += 1;
        }
    }
    let mut h = ExactBits::log2_int(total);
    for (w, mult) in by_weight {
        let coef = Rational::new(-((w * mult) as i128), total as i128);
        h = &h + &ExactBits::scaled_log2(w, coef);
    }
    h
}

/// `I(X1; X1 + X2)` for independent uniform `X1` on `c1` and `X2` on `c2`,
/// computed as `H(X1 + X2) - H(X2)`.
pub fn mutual_info_sum(c1: &[LatticePoint], c2: &[LatticePoint], budget: u64) -> Result<ExactBits> {
    let d1 = PointMassDist::uniform(c1)?;
    let d2 = PointMassDist::uniform(c2)?;
    let sum = d1.convolve(&d2, budget)?;
    Ok(&sum.entropy() - &d2.entropy())
}

/// Joint law of a uniform bin index `W` and the sum `S = X1 + X2`, where
/// `X1` is uniform inside bin `W` and `X2` is uniform on a second codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointBinSumDist {
    weights: BTreeMap<(usize, LatticePoint), u128>,
    total: u128,
    num_bins: usize,
}

impl JointBinSumDist {
    pub fn build(binned: &BinnedCodebook, other: &[LatticePoint], budget: u64) -> Result<Self> {
        let c = binned.codebook();
        if other.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if other[0].dim() != c.n() {
            return Err(Error::DimensionMismatch {
                left: c.n(),
                right: other[0].dim(),
            });
        }
        let needed = c.len() as u128 * other.len() as u128;
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        // Every (bin, codeword, other codeword) triple has probability
        // (1/B) * (B/|C|) * (1/|other|) = 1 / (|C| |other|).
        let mut weights = BTreeMap::new();
        for (w, members) in binned.bins().iter().enumerate() {
            for &i in members {
                let x1 = &c.points()[i];
                for x2 in other {
                    *weights.entry((w, x1.add(x2))).or_insert(0u128) += 1;
                }
            }
        }
        Ok(JointBinSumDist {
            weights,
            total: needed,
            num_bins: binned.num_bins(),
        })
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn total_weight(&self) -> u128 {
        self.total
    }

    pub fn prob(&self, w: usize, s: &LatticePoint) -> Prob {
        Prob::new(
            self.weights.get(&(w, s.clone())).copied().unwrap_or(0),
            self.total,
        )
    }

    /// Marginal weights of `W`, one per bin.
    pub fn bin_marginal(&self) -> Vec<u128> {
        let mut m = alloc::vec![0u128; self.num_bins];
        for ((w, _), &c) in &self.weights {
            m[*w] += c;
        }
        m
    }

    fn sum_marginal(&self) -> BTreeMap<&LatticePoint, u128> {
        let mut m = BTreeMap::new();
        for ((_, s), &c) in &self.weights {
            *m.entry(s).or_insert(0) += c;
        }
        m
    }

    pub fn entropy_joint(&self) -> ExactBits {
        entropy_of_weights(self.weights.values().copied(), self.total)
    }

    pub fn entropy_bin(&self) -> ExactBits {
        entropy_of_weights(self.bin_marginal().into_iter(), self.total)
    }

    pub fn entropy_sum(&self) -> ExactBits {
        entropy_of_weights(self.sum_marginal().into_values(), self.total)
    }

    /// `H(W | S) = Σ_s P(s) H(W | S = s)`, from the conditional laws.
    pub fn entropy_bin_given_sum(&self) -> ExactBits {
        let mut by_sum: BTreeMap<&LatticePoint, Vec<u128>> = BTreeMap::new();
        for ((_, s), &c) in &self.weights {
            by_sum.entry(s).or_default().push(c);
        }
        let mut h = ExactBits::zero();
        for ws in by_sum.into_values() {
            let mass: u128 = ws.iter().sum();
            let cond = entropy_of_weights(ws.into_iter(), mass);
            h = &h + &cond.scale(Rational::new(mass as i128, self.total as i128));
        }
        h
    }

    /// `H(S | W) = Σ_w P(w) H(S | W = w)`, from the conditional laws.
    pub fn entropy_sum_given_bin(&self) -> ExactBits {
        let mut by_bin: BTreeMap<usize, Vec<u128>> = BTreeMap::new();
        for ((w, _), &c) in &self.weights {
            by_bin.entry(*w).or_default().push(c);
        }
        let mut h = ExactBits::zero();
        for ws in by_bin.into_values() {
            let mass: u128 = ws.iter().sum();
            let cond = entropy_of_weights(ws.into_iter(), mass);
            h = &h + &cond.scale(Rational::new(mass as i128, self.total as i128));
        }
        h
    }
}

/// Exact pieces of `I(W1; X1 + X2)` for a binned codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakageBreakdown {
    pub n: usize,
    pub num_bins: usize,
    pub h_bin: ExactBits,
    pub h_sum: ExactBits,
    pub h_bin_given_sum: ExactBits,
    pub h_sum_given_bin: ExactBits,
    /// `H(W) - H(W | S)`.
    pub leakage: ExactBits,
    /// `H(S) - H(S | W)`; must equal `leakage`.
    pub leakage_via_sum: ExactBits,
    /// The bin marginal is exactly uniform.
    pub bins_uniform: bool,
}

impl LeakageBreakdown {
    pub fn leakage_bits(&self) -> f64 {
        self.leakage.to_f64()
    }

    pub fn leakage_per_dim(&self) -> ExactBits {
        self.leakage.scale(Rational::new(1, self.n as i128))
    }

    /// `(1/n) H(W | S)`.
    pub fn equivocation_per_dim(&self) -> ExactBits {
        self.h_bin_given_sum.scale(Rational::new(1, self.n as i128))
    }

    /// `(1/n) log2 #bins`.
    pub fn bin_rate(&self) -> ExactBits {
        ExactBits::log2_int(self.num_bins as u128).scale(Rational::new(1, self.n as i128))
    }

    pub fn chain_rule_holds(&self) -> bool {
        self.leakage == self.leakage_via_sum
    }
}

/// `I(W1; X1 + X2)` with `W1` uniform over bins, `X1` uniform in the bin and
/// `X2` uniform over `other`.
pub fn leakage_binned(binned: &BinnedCodebook, other: &Codebook, budget: u64) -> Result<LeakageBreakdown> {
    let joint = JointBinSumDist::build(binned, other.points(), budget)?;
    let h_bin = joint.entropy_bin();
    let h_sum = joint.entropy_sum();
    let h_bin_given_sum = joint.entropy_bin_given_sum();
    let h_sum_given_bin = joint.entropy_sum_given_bin();
    let marginal = joint.bin_marginal();
    let bins_uniform = marginal.iter().all(|&m| m == marginal[0]);
    Ok(LeakageBreakdown {
        n: other.n(),
        num_bins: binned.num_bins(),
        leakage: &h_bin - &h_bin_given_sum,
        leakage_via_sum: &h_sum - &h_sum_given_bin,
        h_bin,
        h_sum,
        h_bin_given_sum,
        h_sum_given_bin,
        bins_uniform,
    })
}

/// `(1/n) H(W1 | X1 + X2)`.
pub fn equivocation_rate(binned: &BinnedCodebook, other: &Codebook, budget: u64) -> Result<ExactBits> {
    Ok(leakage_binned(binned, other, budget)?.equivocation_per_dim())
}

/// Total-variation distance from `d` to the uniform law on `set`.
pub fn tv_to_uniform(d: &PointMassDist, set: &[LatticePoint]) -> Result<Prob> {
    let set: BTreeSet<&LatticePoint> = set.iter().collect();
    if set.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    if d.support().any(|x| !set.contains(x)) {
        return Err(Error::SupportMismatch);
    }
    let m = set.len() as u128;
    let total = d.total_weight();
    // Σ |w/D - 1/m| = Σ |w m - D| / (D m)
    let mut acc: u128 = 0;
    for s in set {
        let w = d.weights.get(s).copied().unwrap_or(0);
        acc += (w * m).abs_diff(total);
    }
    Ok(Prob::new(acc, 2 * total * m))
}

/// Law of `X_1 + ... + X_N` with independent uniform layer codewords.
pub fn layered_sum_distribution(lc: &LayeredCodebook, budget: u64) -> Result<PointMassDist> {
    let mut acc = PointMassDist::point_mass(LatticePoint::zero(lc.n()));
    for layer in lc.layers() {
        acc = acc.convolve(&uniform_dist(layer)?, budget)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{assign_bins, enumerate_codebook};
    use crate::lattice::LatticeSpec;
    use crate::DEFAULT_BUDGET;
    use alloc::vec;

    fn pt(num: i64, den: i64) -> LatticePoint {
        LatticePoint::new(vec![num], den)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Independent float oracle: `-Σ p log2 p` straight from a list of
    /// probabilities.
    fn plain_entropy(ps: &[f64]) -> f64 {
        ps.iter().filter(|&&p| p > 0.0).map(|p| -p * libm::log2(*p)).sum()
    }

    #[test]
    fn uniform_examples() {
        let d = PointMassDist::uniform(&[pt(0, 1), pt(-1, 2)]).unwrap();
        assert_eq!(d.prob(&pt(0, 1)), Prob::new(1, 2));
        let d1 = PointMassDist::uniform(&[pt(0, 1)]).unwrap();
        assert_eq!(d1.prob(&pt(0, 1)), Prob::from_integer(1));
        let d3 = PointMassDist::uniform(&[pt(-1, 3), pt(0, 1), pt(1, 3)]).unwrap();
        assert!(d3.iter().all(|(_, p)| p == Prob::new(1, 3)));
        assert_eq!(PointMassDist::uniform(&[]), Err(Error::EmptyCodebook));
    }

    #[test]
    fn convolution_examples() {
        let d = PointMassDist::uniform(&[pt(0, 1), pt(-1, 2)]).unwrap();
        let s = d.convolve(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.prob(&pt(0, 1)), Prob::new(1, 4));
        assert_eq!(s.prob(&pt(-1, 2)), Prob::new(1, 2));
        assert_eq!(s.prob(&pt(-1, 1)), Prob::new(1, 4));
        assert_eq!(s.support_size(), 3);

        let id = d.convolve(&PointMassDist::point_mass(pt(0, 1)), DEFAULT_BUDGET).unwrap();
        assert!(id.iter().all(|(x, p)| p == d.prob(x)));

        let d3 = PointMassDist::uniform(&[pt(-1, 3), pt(0, 1), pt(1, 3)]).unwrap();
        let s3 = d3.convolve(&d3, DEFAULT_BUDGET).unwrap();
        assert_eq!(s3.prob(&pt(2, 3)), Prob::new(1, 9));
        assert_eq!(s3.prob(&pt(-2, 3)), Prob::new(1, 9));
        assert_eq!(s3.prob(&pt(1, 3)), Prob::new(2, 9));
        assert_eq!(s3.prob(&pt(0, 1)), Prob::new(3, 9));

        let two = PointMassDist::point_mass(LatticePoint::zero(2));
        assert!(matches!(d.convolve(&two, DEFAULT_BUDGET), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_examples() {
        assert!(PointMassDist::point_mass(pt(3, 1)).entropy().is_zero());
        let four: Vec<_> = (0..4).map(|i| pt(i, 1)).collect();
        assert_eq!(entropy_bits(&PointMassDist::uniform(&four).unwrap()), 2.0);
        let d = PointMassDist::uniform(&[pt(0, 1), pt(-1, 2)]).unwrap();
        let s = d.convolve(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.entropy(), ExactBits::constant(Rational::new(3, 2)));
        assert!(close(entropy_bits(&s), plain_entropy(&[0.25, 0.5, 0.25]), 1e-15));
    }

    #[test]
    fn lemma_two_spot_values() {
        let c2 = [pt(0, 1), pt(-1, 2)];
        let i2 = mutual_info_sum(&c2, &c2, DEFAULT_BUDGET).unwrap();
        assert_eq!(i2, ExactBits::constant(Rational::new(1, 2)));

        let c3 = [pt(-1, 3), pt(0, 1), pt(1, 3)];
        let i3 = mutual_info_sum(&c3, &c3, DEFAULT_BUDGET).unwrap();
        let oracle = plain_entropy(&[1.0 / 9.0, 2.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0, 1.0 / 9.0]) - libm::log2(3.0);
        assert!(close(i3.to_f64(), oracle, 1e-12));
        assert!(close(i3.to_f64(), 0.6121, 1e-4));

        let single = [pt(0, 1)];
        assert!(mutual_info_sum(&single, &c2, DEFAULT_BUDGET).unwrap().is_zero());
    }

    fn codebook(p: u64, k: usize, n: usize, seed: u64) -> Codebook {
        enumerate_codebook(&LatticeSpec::seeded(p, k, n, seed).build().unwrap(), DEFAULT_BUDGET).unwrap()
    }

    /// Exhaustive oracle for `I(W; X1 + X2)`: enumerate all (x1, x2) pairs,
    /// build p(w, s) with float counts, evaluate `Σ p log p(w,s)/(p(w)p(s))`.
    fn oracle_leakage(binned: &BinnedCodebook, other: &Codebook) -> f64 {
        let c = binned.codebook();
        let total = (c.len() * other.len()) as f64;
        let mut joint: BTreeMap<(usize, LatticePoint), f64> = BTreeMap::new();
        let mut ps: BTreeMap<LatticePoint, f64> = BTreeMap::new();
        for (i, x1) in c.points().iter().enumerate() {
            for x2 in other.points() {
                let s = x1.add(x2);
                *joint.entry((binned.bin_of(i), s.clone())).or_insert(0.0) += 1.0 / total;
                *ps.entry(s).or_insert(0.0) += 1.0 / total;
            }
        }
        let pw = 1.0 / binned.num_bins() as f64;
        joint
            .iter()
            .map(|((_, s), &p)| p * libm::log2(p / (pw * ps[s])))
            .sum()
    }

    #[test]
    fn leakage_examples() {
        let c = codebook(2, 1, 1, 0);
        let one = assign_bins(&c, 1, 0).unwrap();
        let l1 = leakage_binned(&one, &c, DEFAULT_BUDGET).unwrap();
        assert!(l1.leakage.is_zero());
        assert!(equivocation_rate(&one, &c, DEFAULT_BUDGET).unwrap().is_zero());

        let id = assign_bins(&c, 2, 0).unwrap();
        let lid = leakage_binned(&id, &c, DEFAULT_BUDGET).unwrap();
        assert_eq!(lid.leakage, mutual_info_sum(c.points(), c.points(), DEFAULT_BUDGET).unwrap());
        assert_eq!(lid.leakage, ExactBits::constant(Rational::new(1, 2)));
        assert_eq!(lid.equivocation_per_dim(), ExactBits::constant(Rational::new(1, 2)));

        let c4 = codebook(2, 2, 2, 3);
        for seed in 0..5 {
            let b = assign_bins(&c4, 2, seed).unwrap();
            let l = leakage_binned(&b, &c4, DEFAULT_BUDGET).unwrap();
            assert!(close(l.leakage_bits(), oracle_leakage(&b, &c4), 1e-12));
            assert!(l.chain_rule_holds());
            assert!(l.bins_uniform);
            // R_e = R̂ - leak / n exactly.
            assert_eq!(l.equivocation_per_dim(), &l.bin_rate() - &l.leakage_per_dim());
        }
    }

    #[test]
    fn tv_examples() {
        let set = [pt(0, 1), pt(1, 1)];
        let u = PointMassDist::uniform(&set).unwrap();
        assert_eq!(tv_to_uniform(&u, &set).unwrap(), Prob::from_integer(0));
        let pm = PointMassDist::point_mass(pt(0, 1));
        assert_eq!(tv_to_uniform(&pm, &set).unwrap(), Prob::new(1, 2));
        let off = PointMassDist::point_mass(pt(5, 1));
        assert_eq!(tv_to_uniform(&off, &set), Err(Error::SupportMismatch));
    }
}
