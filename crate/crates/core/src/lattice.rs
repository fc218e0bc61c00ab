//! Construction-A lattices and their nested coarse sublattices.
//!
//! The fine lattice is `scale * G' (p^-1 G Z_p^k + Z^n)` and the coarse
//! lattice is `scale * G' Z^n`, where `G` is an `n x k` generator over GF(p)
//! and `G'` a unimodular integer matrix. Every point of either lattice has
//! coordinates with denominator dividing `p * denom(scale)`, which keeps all
//! geometry exact.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cvp::CoarseSearch;
use crate::error::{Error, Result};
use crate::gfp;
use crate::point::{LatticePoint, Rational};

/// `n x k` generator matrix over GF(p), stored row-major, full column rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrixG {
    p: u64,
    n: usize,
    k: usize,
    entries: Vec<u64>,
}

impl FieldMatrixG {
    pub fn new(p: u64, n: usize, k: usize, entries: Vec<u64>) -> Result<Self> {
        if !gfp::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidDimensions("need 1 <= k <= n"));
        }
        if entries.len() != n * k {
            return Err(Error::InvalidDimensions("G must have n*k entries"));
        }
        if let Some(&entry) = entries.iter().find(|&&e| e >= p) {
            return Err(Error::EntryOutOfRange { entry, p });
        }
        let rank = gfp::rank_mod_p(&entries, n, k, p);
        if rank < k {
            return Err(Error::RankDeficientG { rank, k });
        }
        Ok(FieldMatrixG { p, n, k, entries })
    }

    /// Rejection-samples a uniformly random full-rank generator.
    pub fn random<R: Rng + ?Sized>(p: u64, n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if !gfp::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidDimensions("need 1 <= k <= n"));
        }
        loop {
            let entries: Vec<u64> = (0..n * k).map(|_| rng.random_range(0..p)).collect();
            if gfp::rank_mod_p(&entries, n, k, p) == k {
                return Ok(FieldMatrixG { p, n, k, entries });
            }
        }
    }

    /// The generator made of the first `k` columns.
    pub fn column_prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::InvalidDimensions("layer k exceeds the fine generator"));
        }
        let entries = (0..self.n)
            .flat_map(|r| self.entries[r * self.k..r * self.k + k].iter().copied())
            .collect();
        // A prefix of independent columns is independent.
        Ok(FieldMatrixG {
            p: self.p,
            n: self.n,
            k,
            entries,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        gfp::rank_mod_p(&self.entries, self.n, self.k, self.p)
    }

    /// `G z mod p`.
    pub fn encode(&self, z: &[u64]) -> Vec<u64> {
        gfp::mat_vec_mod(&self.entries, self.n, self.k, z, self.p)
    }

    pub fn contains_codeword(&self, v: &[u64]) -> bool {
        gfp::in_column_space(&self.entries, self.n, self.k, v, self.p)
    }
}

/// Unimodular `n x n` integer transform, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformGPrime {
    n: usize,
    entries: Vec<i64>,
    inverse: Vec<i64>,
    det: i128,
}

impl TransformGPrime {
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidDimensions("G' must be n x n"));
        }
        let det = gfp::det_i128(&entries, n);
        if det.abs() != 1 {
            return Err(Error::NotUnimodular { det });
        }
        let inverse = gfp::inverse_unimodular(&entries, n).ok_or(Error::NotUnimodular { det })?;
        Ok(TransformGPrime {
            n,
            entries,
            inverse,
            det,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        TransformGPrime {
            n,
            inverse: entries.clone(),
            entries,
            det: 1,
        }
    }

    /// Random unimodular matrix from `2n` elementary row operations with
    /// unit multipliers, plus random row swaps and sign flips.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = Self::identity(n).entries;
        if n > 1 {
            for _ in 0..2 * n {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let c: i64 = if rng.random_bool(0.5) { 1 } else { -1 };
                for col in 0..n {
                    m[i * n + col] += c * m[j * n + col];
                }
            }
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            for col in 0..n {
                m.swap(a * n + col, b * n + col);
            }
        }
        let flip = rng.random_range(0..n);
        for col in 0..n {
            m[flip * n + col] = -m[flip * n + col];
        }
        Self::new(n, m).expect("elementary operations preserve unimodularity")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn determinant(&self) -> i128 {
        self.det
    }

    pub fn inverse(&self) -> &[i64] {
        &self.inverse
    }
}

/// A validated nested pair: fine Construction-A lattice and its coarse
/// sublattice `scale * G' Z^n`.
#[derive(Debug, Clone)]
pub struct ConstructionALattice {
    g: FieldMatrixG,
    gprime: TransformGPrime,
    scale: Rational,
    search: CoarseSearch,
}

impl PartialEq for ConstructionALattice {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.gprime == other.gprime && self.scale == other.scale
    }
}

/// Validates parameters and assembles the nested lattice pair.
pub fn build_lattice(
    p: u64,
    k: usize,
    n: usize,
    g: FieldMatrixG,
    gprime: TransformGPrime,
    scale: Rational,
) -> Result<ConstructionALattice> {
    if !gfp::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if g.p() != p || g.k() != k || g.n() != n || gprime.n() != n {
        return Err(Error::InvalidDimensions("G and G' must match (p, k, n)"));
    }
    ConstructionALattice::new(g, gprime, scale)
}

impl ConstructionALattice {
    pub fn new(g: FieldMatrixG, gprime: TransformGPrime, scale: Rational) -> Result<Self> {
        if g.n() != gprime.n() {
            return Err(Error::InvalidDimensions("G and G' disagree on n"));
        }
        if g.rank() < g.k() {
            return Err(Error::RankDeficientG {
                rank: g.rank(),
                k: g.k(),
            });
        }
        if scale <= Rational::from_integer(0) {
            return Err(Error::NonPositiveScale);
        }
        let search = CoarseSearch::new(gprime.entries(), g.n(), rational_to_f64(scale));
        Ok(ConstructionALattice {
            g,
            gprime,
            scale,
            search,
        })
    }

    /// Same lattice with a different scale.
    pub fn with_scale(&self, scale: Rational) -> Result<Self> {
        Self::new(self.g.clone(), self.gprime.clone(), scale)
    }

    pub fn p(&self) -> u64 {
        self.g.p()
    }

    pub fn k(&self) -> usize {
        self.g.k()
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn g(&self) -> &FieldMatrixG {
        &self.g
    }

    pub fn gprime(&self) -> &TransformGPrime {
        &self.gprime
    }

    pub fn scale(&self) -> Rational {
        self.scale
    }

    /// `|Λ / L| = p^k`.
    pub fn num_cosets(&self) -> u128 {
        (self.p() as u128).pow(self.k() as u32)
    }

    /// Basis of the coarse lattice (columns of `scale * G'`).
    pub fn coarse_basis(&self) -> Vec<LatticePoint> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let col = (0..n).map(|i| self.gprime.entries()[i * n + j]).collect();
                LatticePoint::from_integers(col).scaled(self.scale)
            })
            .collect()
    }

    /// Fine-lattice point `scale * G' (G z mod p) / p` for a message vector
    /// `z` in GF(p)^k. Not reduced modulo the coarse lattice.
    pub fn coset_leader(&self, z: &[u64]) -> LatticePoint {
        let v: Vec<i128> = self.g.encode(z).into_iter().map(|x| x as i128).collect();
        let n = self.n();
        let w = gfp::mat_vec_i128(self.gprime.entries(), n, n, &v);
        let num = w.into_iter().map(|x| x * self.scale.numer()).collect();
        LatticePoint::from_i128(num, self.p() as i128 * self.scale.denom())
    }

    fn coarse_point_exact(&self, z: &[i64]) -> LatticePoint {
        let num = self
            .search
            .combine_int(z)
            .into_iter()
            .map(|x| x * self.scale.numer())
            .collect();
        LatticePoint::from_i128(num, *self.scale.denom())
    }

    /// Nearest coarse-lattice point to a real vector. Among equidistant
    /// points the one leaving the lexicographically smallest residual wins,
    /// which makes the fundamental region half-open.
    pub fn quantize_coarse(&self, x: &[f64]) -> LatticePoint {
        let z = self.nearest_coeffs_f64(x);
        self.coarse_point_exact(&z)
    }

    /// Float version of [`Self::quantize_coarse`], for simulation loops.
    pub fn quantize_coarse_f64(&self, x: &[f64]) -> Vec<f64> {
        let z = self.nearest_coeffs_f64(x);
        self.search.combine_f64(&z)
    }

    fn nearest_coeffs_f64(&self, x: &[f64]) -> Vec<i64> {
        assert_eq!(x.len(), self.n(), "dimension mismatch");
        let mut best: Option<(f64, Vec<f64>, Vec<i64>)> = None;
        for z in self.search.candidates(x) {
            let c = self.search.combine_f64(&z);
            let resid: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            let d: f64 = resid.iter().map(|r| r * r).sum();
            let better = match &best {
                None => true,
                Some((bd, br, _)) => match d.partial_cmp(bd) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => lex_less_f64(&resid, br),
                    _ => false,
                },
            };
            if better {
                best = Some((d, resid, z));
            }
        }
        best.expect("at least one candidate").2
    }

    /// Exact nearest coarse point with the same tie rule.
    pub fn quantize_coarse_exact(&self, x: &LatticePoint) -> LatticePoint {
        assert_eq!(x.dim(), self.n(), "dimension mismatch");
        let mut best: Option<(Rational, LatticePoint, LatticePoint)> = None;
        for z in self.search.candidates(&x.to_f64()) {
            let c = self.coarse_point_exact(&z);
            let resid = x.sub(&c);
            let d = resid.norm_sq();
            let better = match &best {
                None => true,
                Some((bd, br, _)) => match d.cmp(bd) {
                    Ordering::Less => true,
                    Ordering::Equal => resid.cmp_lex(br) == Ordering::Less,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((d, resid, c));
            }
        }
        best.expect("at least one candidate").2
    }

    /// `x - Q_L(x)`: the representative of `x` in the half-open Voronoi
    /// region of the coarse lattice.
    pub fn mod_coarse(&self, x: &[f64]) -> Vec<f64> {
        let q = self.quantize_coarse_f64(x);
        x.iter().zip(&q).map(|(a, b)| a - b).collect()
    }

    pub fn mod_coarse_exact(&self, x: &LatticePoint) -> LatticePoint {
        x.sub(&self.quantize_coarse_exact(x))
    }

    /// Whether `x` belongs to the fine lattice.
    pub fn is_in_fine(&self, x: &LatticePoint) -> bool {
        if x.dim() != self.n() {
            return false;
        }
        let n = self.n();
        let p = self.p() as i128;
        let num: Vec<i128> = x.numerators().iter().map(|&v| v as i128).collect();
        let v = gfp::mat_vec_i128(self.gprime.inverse(), n, n, &num);
        // Real coordinates of G'^-1 x / scale are v * sd / (den * sn).
        let (sn, sd) = (*self.scale.numer(), *self.scale.denom());
        let div = x.denominator() as i128 * sn;
        let mut residue = Vec::with_capacity(n);
        for vi in v {
            let t = p * vi * sd;
            if t % div != 0 {
                return false;
            }
            residue.push((t / div).rem_euclid(p) as u64);
        }
        self.g.contains_codeword(&residue)
    }

    /// Whether `x` belongs to the coarse lattice.
    pub fn is_in_coarse(&self, x: &LatticePoint) -> bool {
        if x.dim() != self.n() {
            return false;
        }
        let n = self.n();
        let num: Vec<i128> = x.numerators().iter().map(|&v| v as i128).collect();
        let v = gfp::mat_vec_i128(self.gprime.inverse(), n, n, &num);
        let (sn, sd) = (*self.scale.numer(), *self.scale.denom());
        let div = x.denominator() as i128 * sn;
        v.into_iter().all(|vi| (vi * sd) % div == 0)
    }

    /// Uniform sample from the half-open coarse Voronoi region: a uniform
    /// point of the fundamental parallelepiped folded by `mod_coarse`.
    pub fn sample_voronoi<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n();
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b = self.search.basis();
        let x: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| b[i * n + j] * u[j]).sum())
            .collect();
        self.mod_coarse(&x)
    }

    /// Per-dimension second moment of the coarse Voronoi region, `scale^2 / 12`.
    ///
    /// A unimodular `G'` maps `Z^n` onto itself, so the coarse lattice is
    /// `scale * Z^n` and its Voronoi region is a cube of side `scale`.
    pub fn dither_second_moment(&self) -> Rational {
        self.scale * self.scale / Rational::from_integer(12)
    }

    /// Monte Carlo estimate of the per-dimension second moment of the coarse
    /// Voronoi region.
    pub fn voronoi_second_moment(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        for _ in 0..samples {
            let u = self.sample_voronoi(&mut rng);
            acc += u.iter().map(|x| x * x).sum::<f64>();
        }
        acc / (samples as f64 * self.n() as f64)
    }
}

fn lex_less_f64(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// How a generator matrix is supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GSpec {
    /// Row-major `n x k` entries.
    Explicit(Vec<u64>),
    Seeded(u64),
}

/// How the unimodular transform is supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GPrimeSpec {
    Identity,
    /// Row-major `n x n` entries.
    Explicit(Vec<i64>),
    Seeded(u64),
}

/// Recipe for a lattice: parameters plus explicit or seeded matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub p: u64,
    pub k: usize,
    pub n: usize,
    pub g: GSpec,
    pub gprime: GPrimeSpec,
    pub scale: Rational,
}

impl LatticeSpec {
    pub fn seeded(p: u64, k: usize, n: usize, seed: u64) -> Self {
        LatticeSpec {
            p,
            k,
            n,
            g: GSpec::Seeded(seed),
            gprime: GPrimeSpec::Seeded(seed),
            scale: Rational::from_integer(1),
        }
    }

    pub fn build(&self) -> Result<ConstructionALattice> {
        let g = match &self.g {
            GSpec::Explicit(e) => FieldMatrixG::new(self.p, self.n, self.k, e.clone())?,
            GSpec::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                FieldMatrixG::random(self.p, self.n, self.k, &mut rng)?
            }
        };
        let gprime = match &self.gprime {
            GPrimeSpec::Identity => TransformGPrime::identity(self.n),
            GPrimeSpec::Explicit(e) => TransformGPrime::new(self.n, e.clone())?,
            GPrimeSpec::Seeded(seed) => {
                // Separate stream from G's so the two draws are independent.
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(1);
                TransformGPrime::random(self.n, &mut rng)
            }
        };
        build_lattice(self.p, self.k, self.n, g, gprime, self.scale)
    }
}
