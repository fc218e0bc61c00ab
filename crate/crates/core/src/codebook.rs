//! Voronoi codebooks `C = Λ ∩ V_L`, Minkowski sums, power scaling, binning
//! and layered codebooks.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{rational_to_f64, ConstructionALattice};
use crate::point::{LatticePoint, Rational};

/// Denominator of the rational shrink factor chosen by [`scale_to_power`].
const SHRINK_DENOM_BITS: u32 = 20;

/// An ordered list of codewords; the index of a point is its message.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    points: Vec<LatticePoint>,
    lattice: ConstructionALattice,
    average_power: Rational,
    voronoi_shaped: bool,
}

impl Codebook {
    /// Wraps an arbitrary point set living in `lattice` (e.g. a sum of
    /// layers). Such codebooks are not shaped by the coarse Voronoi region.
    pub fn from_points(points: Vec<LatticePoint>, lattice: ConstructionALattice) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if let Some(bad) = points.iter().find(|p| p.dim() != lattice.n()) {
            return Err(Error::DimensionMismatch {
                left: bad.dim(),
                right: lattice.n(),
            });
        }
        let average_power = average_power(&points);
        Ok(Codebook {
            points,
            lattice,
            average_power,
            voronoi_shaped: false,
        })
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn lattice(&self) -> &ConstructionALattice {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `log2 |C|`.
    pub fn size_log2(&self) -> f64 {
        libm::log2(self.points.len() as f64)
    }

    /// Rate in bits per dimension, `log2 |C| / n`.
    pub fn rate(&self) -> f64 {
        self.size_log2() / self.n() as f64
    }

    /// Exact empirical second moment per dimension of the codewords.
    pub fn average_power(&self) -> Rational {
        self.average_power
    }

    pub fn is_voronoi_shaped(&self) -> bool {
        self.voronoi_shaped
    }

    pub fn points_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(LatticePoint::to_f64).collect()
    }

    /// Multiplies lattice scale and every codeword by `factor`; message
    /// indexing is unchanged.
    pub fn rescaled(&self, factor: Rational) -> Result<Self> {
        if factor <= Rational::from_integer(0) {
            return Err(Error::NonPositiveScale);
        }
        let lattice = self.lattice.with_scale(self.lattice.scale() * factor)?;
        Ok(Codebook {
            points: self.points.iter().map(|p| p.scaled(factor)).collect(),
            lattice,
            average_power: self.average_power * factor * factor,
            voronoi_shaped: self.voronoi_shaped,
        })
    }

    /// Rescales (up or down) so that the codewords themselves, sent without
    /// dither, have average power as close to `power` as a dyadic factor
    /// allows without exceeding it.
    pub fn fit_codeword_power(&self, power: f64) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter("power"));
        }
        let current = rational_to_f64(self.average_power);
        if current == 0.0 {
            return Err(Error::DegenerateCodebook);
        }
        self.rescaled(dyadic_floor(libm::sqrt(power / current)))
    }

    /// Rescales (up or down) so that the dither second moment
    /// `scale^2 / 12` is as close to `power` as a dyadic factor allows
    /// without exceeding it.
    pub fn fit_dither_power(&self, power: f64) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter("power"));
        }
        if self.points.iter().all(LatticePoint::is_zero) {
            return Err(Error::DegenerateCodebook);
        }
        let moment = rational_to_f64(self.lattice.dither_second_moment());
        self.rescaled(dyadic_floor(libm::sqrt(power / moment)))
    }
}

fn average_power(points: &[LatticePoint]) -> Rational {
    let n = points[0].dim() as i128;
    let total = points
        .iter()
        .fold(Rational::from_integer(0), |acc, p| acc + p.norm_sq());
    total / Rational::from_integer(n * points.len() as i128)
}

/// Largest dyadic rational `m / 2^20` not exceeding `f` (with more bits
/// when `f` is tiny).
fn dyadic_floor(f: f64) -> Rational {
    let mut bits = SHRINK_DENOM_BITS;
    loop {
        let den = 1i128 << bits;
        let num = libm::floor(f * den as f64) as i128;
        if num >= 1 << 10 || bits >= 60 {
            return Rational::new(num.max(1), den);
        }
        bits += 4;
    }
}

/// Enumerates one representative per coset of `Λ / L`, reduced into the
/// half-open Voronoi region of the coarse lattice.
///
/// Message `m` corresponds to the GF(p)^k vector of its base-p digits
/// (least significant first).
pub fn enumerate_codebook(lat: &ConstructionALattice, budget: u64) -> Result<Codebook> {
    let count = lat.num_cosets();
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: count,
            budget,
        });
    }
    let p = lat.p();
    let k = lat.k();
    let mut z = vec![0u64; k];
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        points.push(lat.mod_coarse_exact(&lat.coset_leader(&z)));
        for digit in z.iter_mut() {
            *digit += 1;
            if *digit < p {
                break;
            }
            *digit = 0;
        }
    }
    let average_power = average_power(&points);
    Ok(Codebook {
        points,
        lattice: lat.clone(),
        average_power,
        voronoi_shaped: true,
    })
}

fn check_pairs(a: usize, b: usize, budget: u64) -> Result<()> {
    let needed = a as u128 * b as u128;
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Exact, de-duplicated `A ⊕ B = {a + b}`.
pub fn minkowski_sum(
    a: &[LatticePoint],
    b: &[LatticePoint],
    budget: u64,
) -> Result<Vec<LatticePoint>> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: y.dim(),
            });
        }
    }
    check_pairs(a.len(), b.len(), budget)?;
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(x.add(y));
        }
    }
    Ok(out.into_iter().collect())
}

/// Outcome of the sum-set size check `|C ⊕ C| <= 2^n |C|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumBoundReport {
    pub sum_size: usize,
    pub bound: u128,
    pub pass: bool,
}

pub fn verify_sum_bound(c: &Codebook, budget: u64) -> Result<SumBoundReport> {
    let sum = minkowski_sum(c.points(), c.points(), budget)?;
    let bound = (1u128 << c.n()) * c.len() as u128;
    Ok(SumBoundReport {
        sum_size: sum.len(),
        bound,
        pass: sum.len() as u128 <= bound,
    })
}

/// Shrinks the lattice scale so that the dithered transmit signal, which is
/// uniform on the coarse Voronoi region, has per-dimension second moment at
/// most `power`. A codebook already within the budget is returned as is.
pub fn scale_to_power(c: &Codebook, power: f64) -> Result<Codebook> {
    if !(power > 0.0) {
        return Err(Error::InvalidParameter("power"));
    }
    if c.points().iter().all(LatticePoint::is_zero) {
        return Err(Error::DegenerateCodebook);
    }
    let moment = rational_to_f64(c.lattice().dither_second_moment());
    if moment <= power {
        return Ok(c.clone());
    }
    c.rescaled(dyadic_floor(libm::sqrt(power / moment)))
}

/// Equal-size partition of a codebook's indices; the bin index is the
/// secret message.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCodebook {
    codebook: Codebook,
    bins: Vec<Vec<usize>>,
    bin_of: Vec<usize>,
    seed: u64,
}

impl BinnedCodebook {
    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_of(&self, index: usize) -> usize {
        self.bin_of[index]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Codeword rate `(1/n) log2 |C|`.
    pub fn rate(&self) -> f64 {
        self.codebook.rate()
    }

    /// Secret-message rate `(1/n) log2 #bins`.
    pub fn bin_rate(&self) -> f64 {
        libm::log2(self.bins.len() as f64) / self.codebook.n() as f64
    }
}

/// Seeded uniform shuffle of the codeword indices, cut into `num_bins`
/// contiguous slices.
pub fn assign_bins(c: &Codebook, num_bins: usize, seed: u64) -> Result<BinnedCodebook> {
    if num_bins == 0 || c.len() % num_bins != 0 {
        return Err(Error::NonDivisibleBins {
            size: c.len(),
            bins: num_bins,
        });
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let per_bin = c.len() / num_bins;
    let bins: Vec<Vec<usize>> = order.chunks(per_bin).map(|s| s.to_vec()).collect();
    let mut bin_of = vec![0; c.len()];
    for (b, members) in bins.iter().enumerate() {
        for &i in members {
            bin_of[i] = b;
        }
    }
    Ok(BinnedCodebook {
        codebook: c.clone(),
        bins,
        bin_of,
        seed,
    })
}

/// One layer request: use the first `k` columns of the fine generator at
/// the given lattice scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub k: usize,
    pub scale: Rational,
}

/// `N` codebooks in one shared fine lattice; both transmitters use the same
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredCodebook {
    fine: ConstructionALattice,
    layers: Vec<Codebook>,
    powers: Vec<f64>,
}

impl LayeredCodebook {
    pub fn fine_lattice(&self) -> &ConstructionALattice {
        &self.fine
    }

    pub fn layers(&self) -> &[Codebook] {
        &self.layers
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n(&self) -> usize {
        self.fine.n()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// `C_1 ⊕ ... ⊕ C_N`.
    pub fn sum_points(&self, budget: u64) -> Result<Vec<LatticePoint>> {
        let mut acc = vec![LatticePoint::zero(self.n())];
        for layer in &self.layers {
            acc = minkowski_sum(&acc, layer.points(), budget)?;
        }
        Ok(acc)
    }

    /// The sum set as a codebook in the shared fine lattice.
    pub fn sum_codebook(&self, budget: u64) -> Result<Codebook> {
        Codebook::from_points(self.sum_points(budget)?, self.fine.clone())
    }
}

/// Builds `N` Construction-A layer codebooks inside the fine lattice, each
/// scaled to its power, and checks that every layer (points and coarse
/// basis) stays inside the fine lattice.
pub fn build_layered(
    fine: &ConstructionALattice,
    specs: &[LayerSpec],
    powers: &[f64],
    budget: u64,
) -> Result<LayeredCodebook> {
    if specs.is_empty() || specs.len() != powers.len() {
        return Err(Error::InvalidParameter("powers"));
    }
    if powers.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter("powers"));
    }
    let mut layers = Vec::with_capacity(specs.len());
    for (i, (spec, &power)) in specs.iter().zip(powers).enumerate() {
        let g = fine.g().column_prefix(spec.k)?;
        let lat = ConstructionALattice::new(g, fine.gprime().clone(), spec.scale)?;
        let cb = scale_to_power(&enumerate_codebook(&lat, budget)?, power)?;
        let nested = cb.points().iter().all(|p| fine.is_in_fine(p))
            && cb.lattice().coarse_basis().iter().all(|b| fine.is_in_fine(b));
        if !nested {
            return Err(Error::LayerNotNested { layer: i + 1 });
        }
        layers.push(cb);
    }
    Ok(LayeredCodebook {
        fine: fine.clone(),
        layers,
        powers: powers.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{FieldMatrixG, TransformGPrime};
    use crate::DEFAULT_BUDGET;

    fn scalar(p: u64, scale: i128) -> ConstructionALattice {
        let g = FieldMatrixG::new(p, 1, 1, vec![1]).unwrap();
        ConstructionALattice::new(g, TransformGPrime::identity(1), Rational::from_integer(scale)).unwrap()
    }

    fn pt(num: i64, den: i64) -> LatticePoint {
        LatticePoint::new(vec![num], den)
    }

    /// Brute-force coset reduction used as an independent oracle: walk a
    /// window of fine points `j/p`, keep those in [-1/2, 1/2).
    fn oracle_scalar_codebook(p: i64) -> BTreeSet<LatticePoint> {
        (-2 * p..=2 * p)
            .filter(|j| 2 * j >= -p && 2 * j < p)
            .map(|j| pt(j, p))
            .collect()
    }

    #[test]
    fn scalar_codebooks_match_oracle() {
        for p in [2u64, 3, 5, 7] {
            let cb = enumerate_codebook(&scalar(p, 1), DEFAULT_BUDGET).unwrap();
            let got: BTreeSet<_> = cb.points().iter().cloned().collect();
            assert_eq!(got, oracle_scalar_codebook(p as i64));
            assert_eq!(cb.len(), p as usize);
        }
        let c2 = enumerate_codebook(&scalar(2, 1), DEFAULT_BUDGET).unwrap();
        assert_eq!(c2.points(), &[pt(0, 1), pt(-1, 2)]);
        assert_eq!(c2.average_power(), Rational::new(1, 8));
    }

    #[test]
    fn minkowski_examples() {
        let c2 = [pt(0, 1), pt(-1, 2)];
        let s = minkowski_sum(&c2, &c2, DEFAULT_BUDGET).unwrap();
        let set: BTreeSet<_> = s.into_iter().collect();
        assert_eq!(set, [pt(0, 1), pt(-1, 2), pt(-1, 1)].into_iter().collect());

        let zero = [LatticePoint::zero(1)];
        let mut id = minkowski_sum(&c2, &zero, DEFAULT_BUDGET).unwrap();
        id.sort();
        let mut expect = c2.to_vec();
        expect.sort();
        assert_eq!(id, expect);

        let c3 = [pt(-1, 3), pt(0, 1), pt(1, 3)];
        assert_eq!(minkowski_sum(&c3, &c3, DEFAULT_BUDGET).unwrap().len(), 5);

        let two_d = [LatticePoint::zero(2)];
        assert_eq!(
            minkowski_sum(&c2, &two_d, DEFAULT_BUDGET),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        );
        assert!(matches!(
            minkowski_sum(&c3, &c3, 8),
            Err(Error::BudgetExceeded { needed: 9, budget: 8 })
        ));
    }

    #[test]
    fn sum_bound_examples() {
        let r2 = verify_sum_bound(&enumerate_codebook(&scalar(2, 1), DEFAULT_BUDGET).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!((r2.sum_size, r2.bound, r2.pass), (3, 4, true));
        let r3 = verify_sum_bound(&enumerate_codebook(&scalar(3, 1), DEFAULT_BUDGET).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!((r3.sum_size, r3.bound, r3.pass), (5, 6, true));
        let single = Codebook::from_points(vec![LatticePoint::zero(3)], scalar_n(3)).unwrap();
        let rs = verify_sum_bound(&single, DEFAULT_BUDGET).unwrap();
        assert_eq!((rs.sum_size, rs.bound, rs.pass), (1, 8, true));
    }

    fn scalar_n(n: usize) -> ConstructionALattice {
        let g = FieldMatrixG::new(2, n, 1, vec![1; n]).unwrap();
        ConstructionALattice::new(g, TransformGPrime::identity(n), Rational::from_integer(1)).unwrap()
    }

    #[test]
    fn scale_to_power_branches() {
        let c = enumerate_codebook(&scalar(2, 1), DEFAULT_BUDGET).unwrap();
        // Unit cube has second moment 1/12 < 1: nothing to do.
        assert_eq!(scale_to_power(&c, 1.0).unwrap(), c);
        assert_eq!(scale_to_power(&c, f64::INFINITY).unwrap(), c);

        let big = enumerate_codebook(&scalar(2, 10), DEFAULT_BUDGET).unwrap();
        let fitted = scale_to_power(&big, 1.0).unwrap();
        let s = rational_to_f64(fitted.lattice().scale());
        // Exact cube moment s^2 / 12 must sit just under the target.
        assert!(s * s / 12.0 <= 1.0 + 5e-3, "scale {s}");
        assert!(s * s / 12.0 >= 0.99, "scale {s}");
        assert_eq!(fitted.len(), big.len());
        // Idempotent at the same target.
        assert_eq!(scale_to_power(&fitted, 1.0).unwrap(), fitted);

        let degenerate = Codebook::from_points(vec![LatticePoint::zero(1)], scalar(2, 1)).unwrap();
        assert_eq!(scale_to_power(&degenerate, 1.0), Err(Error::DegenerateCodebook));
    }

    #[test]
    fn binning_is_a_reproducible_partition() {
        let lat = crate::lattice::LatticeSpec::seeded(2, 2, 2, 1).build().unwrap();
        let c = enumerate_codebook(&lat, DEFAULT_BUDGET).unwrap();
        let b1 = assign_bins(&c, 2, 9).unwrap();
        let b2 = assign_bins(&c, 2, 9).unwrap();
        assert_eq!(b1.bins(), b2.bins());
        assert!(b1.bins().iter().all(|b| b.len() == 2));
        assert_eq!(assign_bins(&c, 1, 0).unwrap().bin_rate(), 0.0);
        let id = assign_bins(&c, 4, 0).unwrap();
        assert_eq!(id.bin_rate(), id.rate());
        assert_eq!(
            assign_bins(&c, 3, 0),
            Err(Error::NonDivisibleBins { size: 4, bins: 3 })
        );
        assert!(assign_bins(&c, 0, 0).is_err());
    }

    #[test]
    fn layered_two_point_layers() {
        let fine = scalar(2, 1);
        let specs = [
            LayerSpec { k: 1, scale: Rational::from_integer(1) },
            LayerSpec { k: 1, scale: Rational::from_integer(4) },
        ];
        let lc = build_layered(&fine, &specs, &[1.0, 2.0], DEFAULT_BUDGET).unwrap();
        assert_eq!(lc.num_layers(), 2);
        assert!(lc.layers().iter().all(|l| l.len() == 2));
        let sum = lc.sum_points(DEFAULT_BUDGET).unwrap();
        assert!(sum.len() <= 4);
        assert_eq!(sum.len(), 4);

        let single = build_layered(&fine, &specs[..1], &[1.0], DEFAULT_BUDGET).unwrap();
        assert_eq!(single.layers()[0], enumerate_codebook(&fine, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn layered_rejects_non_nested_scale() {
        let fine = scalar(2, 1);
        let specs = [LayerSpec { k: 1, scale: Rational::new(1, 3) }];
        assert_eq!(
            build_layered(&fine, &specs, &[1.0], DEFAULT_BUDGET),
            Err(Error::LayerNotNested { layer: 1 })
        );
        // Shrinking to fit a tiny power also breaks nesting.
        let specs = [LayerSpec { k: 1, scale: Rational::from_integer(2) }];
        assert_eq!(
            build_layered(&fine, &specs, &[1e-3], DEFAULT_BUDGET),
            Err(Error::LayerNotNested { layer: 1 })
        );
    }
}
