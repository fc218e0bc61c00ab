//! The two-user symmetric Gaussian interference channel with an external
//! eavesdropper, the dithered modulo-lattice transceiver and the successive
//! decoders.
//!
//! ```text
//! Y1 = X1 + a X2 + N1
//! Y2 = X2 + a X1 + N2
//! Z  = b (X1 + X2) + Ne
//! ```

mod sim;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codebook::{Codebook, LayeredCodebook};
use crate::error::{Error, Result};
use crate::lattice::ConstructionALattice;
use crate::point::LatticePoint;

pub use sim::{
    simulate_layered, simulate_very_strong, simulate_weak, trial_rng, ErrorRate, LayeredRun,
    MeanEstimate, VeryStrongRun, WeakRun,
};

/// Gains, per-user power and noise variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub a: f64,
    pub b: f64,
    pub power: f64,
    pub n1: f64,
    pub n2: f64,
    pub ne: f64,
}

impl ChannelParams {
    /// Unit-variance legitimate noise, as in the channel model.
    pub fn new(a: f64, b: f64, power: f64, ne: f64) -> Result<Self> {
        let params = ChannelParams {
            a,
            b,
            power,
            n1: 1.0,
            n2: 1.0,
            ne,
        };
        params.validate()?;
        Ok(params)
    }

    /// All three noise variances set to zero.
    pub fn noiseless(a: f64, b: f64, power: f64) -> Result<Self> {
        Self::new(a, b, power, 0.0)?.with_legit_noise(0.0, 0.0)
    }

    pub fn with_legit_noise(mut self, n1: f64, n2: f64) -> Result<Self> {
        self.n1 = n1;
        self.n2 = n2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::InvalidParameter("a"));
        }
        if self.a == 1.0 {
            return Err(Error::UnityGain);
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter("b"));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidParameter("power"));
        }
        for (v, name) in [(self.n1, "n1"), (self.n2, "n2"), (self.ne, "ne")] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regime {
    VeryStrong,
    Weak,
    General,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::VeryStrong => "VeryStrong",
            Regime::Weak => "Weak",
            Regime::General => "General",
        }
    }
}

/// The inequality values behind a classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeWitness {
    /// `a^2`.
    pub a_squared: f64,
    /// `P + 1`; very strong iff `a^2` reaches it.
    pub very_strong_threshold: f64,
    /// `|a + a^3 P|`; weak iff at most 1/2.
    pub weak_value: f64,
    /// `(P + 1)^2 / P`, the stricter multi-user threshold. Reported only.
    pub multiuser_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClass {
    pub regime: Regime,
    pub witness: RegimeWitness,
}

pub fn classify_regime(a: f64, power: f64) -> Result<RegimeClass> {
    if a == 1.0 {
        return Err(Error::UnityGain);
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("a"));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter("power"));
    }
    let witness = RegimeWitness {
        a_squared: a * a,
        very_strong_threshold: power + 1.0,
        weak_value: libm::fabs(a + a * a * a * power),
        multiuser_threshold: (power + 1.0) * (power + 1.0) / power,
    };
    let regime = if witness.a_squared >= witness.very_strong_threshold {
        Regime::VeryStrong
    } else if witness.weak_value <= 0.5 {
        Regime::Weak
    } else {
        Regime::General
    };
    Ok(RegimeClass { regime, witness })
}

/// `α = P / ((1 + a²) P + N)`.
pub fn mmse_alpha(power: f64, a: f64, noise: f64) -> f64 {
    power / ((1.0 + a * a) * power + noise)
}

/// Per-dimension variance of `-(1 - α) X1 + α a X2 + α N1` for a given `α`.
pub fn effective_noise_at(alpha: f64, power: f64, a: f64, noise: f64) -> f64 {
    let one_minus = 1.0 - alpha;
    one_minus * one_minus * power + alpha * alpha * (a * a * power + noise)
}

/// `P (a² P + N) / ((1 + a²) P + N)`, the effective noise variance at the
/// MMSE `α`.
pub fn effective_noise_variance(power: f64, a: f64, noise: f64) -> f64 {
    power * (a * a * power + noise) / ((1.0 + a * a) * power + noise)
}

/// `½ log2(1 + P / (a² P + N))`, treating interference as noise.
pub fn achievable_rate_weak(power: f64, a: f64, noise: f64) -> f64 {
    0.5 * libm::log2(1.0 + power / (a * a * power + noise))
}

/// Uniform dither over the half-open coarse Voronoi region.
pub fn dither_sample<R: Rng + ?Sized>(lat: &ConstructionALattice, rng: &mut R) -> Vec<f64> {
    lat.sample_voronoi(rng)
}

/// `X = [L + U] mod L_c`.
pub fn encode_dithered(l: &LatticePoint, u: &[f64], lat: &ConstructionALattice) -> Vec<f64> {
    let x: Vec<f64> = l.to_f64().iter().zip(u).map(|(a, b)| a + b).collect();
    lat.mod_coarse(&x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub z: Vec<f64>,
}

/// One use of the channel. Noise is i.i.d. Gaussian per coordinate, drawn
/// for `Y1`, `Y2`, then `Z`; the draw count does not depend on the
/// variances, so zero-noise runs consume the stream identically.
pub fn transmit<R: Rng + ?Sized>(
    x1: &[f64],
    x2: &[f64],
    params: &ChannelParams,
    rng: &mut R,
) -> Result<ChannelOutput> {
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            left: x1.len(),
            right: x2.len(),
        });
    }
    let noise = |var: f64, rng: &mut R| -> Vec<f64> {
        let sd = libm::sqrt(var);
        (0..x1.len())
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, rng))
            .collect::<Vec<f64>>()
    };
    let n1 = noise(params.n1, rng);
    let n2 = noise(params.n2, rng);
    let ne = noise(params.ne, rng);
    let a = params.a;
    let y1 = (0..x1.len()).map(|i| x1[i] + a * x2[i] + n1[i]).collect();
    let y2 = (0..x1.len()).map(|i| x2[i] + a * x1[i] + n2[i]).collect();
    let z = (0..x1.len())
        .map(|i| params.b * (x1[i] + x2[i]) + ne[i])
        .collect();
    Ok(ChannelOutput { y1, y2, z })
}

/// Everything that happened in one dithered transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub m1: usize,
    pub m2: usize,
    pub l1: LatticePoint,
    pub l2: LatticePoint,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub out: ChannelOutput,
}

/// Draws dithers, encodes messages `m1`, `m2` and sends them.
pub fn dithered_round<R: Rng + ?Sized>(
    codebook: &Codebook,
    m1: usize,
    m2: usize,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Transcript> {
    let lat = codebook.lattice();
    let l1 = codebook.points()[m1].clone();
    let l2 = codebook.points()[m2].clone();
    let u1 = dither_sample(lat, rng);
    let u2 = dither_sample(lat, rng);
    let x1 = encode_dithered(&l1, &u1, lat);
    let x2 = encode_dithered(&l2, &u2, lat);
    let out = transmit(&x1, &x2, params, rng)?;
    Ok(Transcript {
        m1,
        m2,
        l1,
        l2,
        u1,
        u2,
        x1,
        x2,
        out,
    })
}

/// Modulo-lattice decoding: forms `[α Y - U] mod L_c` and returns the index
/// of the codeword nearest to it modulo the coarse lattice.
pub fn decode_weak(y: &[f64], u: &[f64], alpha: f64, codebook: &Codebook, codewords: &[Vec<f64>]) -> usize {
    let lat = codebook.lattice();
    let v: Vec<f64> = y.iter().zip(u).map(|(y, u)| alpha * y - u).collect();
    let v = lat.mod_coarse(&v);
    let mut best = (f64::INFINITY, 0);
    let mut diff = alloc::vec![0.0; v.len()];
    for (i, c) in codewords.iter().enumerate() {
        for j in 0..v.len() {
            diff[j] = v[j] - c[j];
        }
        let d: f64 = lat.mod_coarse(&diff).iter().map(|x| x * x).sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Index of the codeword `c` minimizing `|y - gain c|`; ties go to the
/// lowest index.
pub fn nearest_scaled(y: &[f64], gain: f64, codewords: &[Vec<f64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in codewords.iter().enumerate() {
        let d: f64 = y
            .iter()
            .zip(c)
            .map(|(y, c)| {
                let e = y - gain * c;
                e * e
            })
            .sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOrder {
    /// Decode `a X2` treating `X1 + N` as noise, subtract, then decode `X1`.
    InterferenceFirst,
    /// Decode `X1` treating `a X2 + N` as noise, subtract, then decode `X2`.
    OwnFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VeryStrongDecision {
    pub own: usize,
    pub interference: usize,
}

/// Two-stage successive decoding at receiver 1 when both users share the
/// codebook.
pub fn decode_very_strong(y: &[f64], a: f64, codewords: &[Vec<f64>], order: DecodeOrder) -> VeryStrongDecision {
    let subtract = |y: &[f64], gain: f64, c: &[f64]| -> Vec<f64> {
        y.iter().zip(c).map(|(y, c)| y - gain * c).collect()
    };
    match order {
        DecodeOrder::InterferenceFirst => {
            let interference = nearest_scaled(y, a, codewords);
            let rest = subtract(y, a, &codewords[interference]);
            let own = nearest_scaled(&rest, 1.0, codewords);
            VeryStrongDecision { own, interference }
        }
        DecodeOrder::OwnFirst => {
            let own = nearest_scaled(y, 1.0, codewords);
            let rest = subtract(y, 1.0, &codewords[own]);
            let interference = nearest_scaled(&rest, a, codewords);
            VeryStrongDecision { own, interference }
        }
    }
}

/// Checks `a² >= 1 + P_i / (1 + (1 + a²) Σ_{j>i} P_j)` for every stage.
///
/// At stage `i` the receiver decodes `a X_{2i}` treating its own layer,
/// all later layers of both users and unit-variance noise as noise; the
/// inequality says this is no harder than decoding its own layer `X_{1i}`
/// afterwards. For one layer it is exactly `a² >= P + 1`.
pub fn check_stage_conditions(a: f64, powers: &[f64]) -> Result<()> {
    let a2 = a * a;
    for i in 0..powers.len() {
        let rest: f64 = powers[i + 1..].iter().sum();
        if a2 < 1.0 + powers[i] / (1.0 + (1.0 + a2) * rest) {
            return Err(Error::StageConditionViolated { stage: i + 1 });
        }
    }
    Ok(())
}

/// Greedy power split for layered decoding, filling stages from the last
/// (weakest) one: each stage gets the largest power its condition allows
/// given the stages after it, until `power` is used up.
pub fn layered_power_allocation(a: f64, power: f64, max_layers: usize) -> Result<Vec<f64>> {
    let a2 = a * a;
    if !(a2 > 1.0) {
        return Err(Error::InvalidParameter("a"));
    }
    if !(power > 0.0) || max_layers == 0 {
        return Err(Error::InvalidParameter("power"));
    }
    let mut rev = Vec::new();
    let mut used = 0.0;
    while used < power {
        if rev.len() == max_layers {
            return Err(Error::InvalidParameter("max_layers"));
        }
        let cap = (a2 - 1.0) * (1.0 + (1.0 + a2) * used);
        let p = cap.min(power - used);
        rev.push(p);
        used += p;
    }
    rev.reverse();
    Ok(rev)
}

/// Receiver-side state for layered successive decoding.
#[derive(Debug, Clone)]
pub struct LayeredDecoder {
    a: f64,
    layers: Vec<Vec<Vec<f64>>>,
}

impl LayeredDecoder {
    /// Fails with the first stage whose very-strong condition does not hold
    /// for the codebook's power allocation.
    pub fn new(layered: &LayeredCodebook, a: f64) -> Result<Self> {
        check_stage_conditions(a, layered.powers())?;
        Ok(LayeredDecoder {
            a,
            layers: layered.layers().iter().map(Codebook::points_f64).collect(),
        })
    }

    /// Stage by stage: decode the interfering layer, subtract it, decode the
    /// own layer, subtract it. Returns the own-layer message estimates.
    pub fn decode(&self, y: &[f64]) -> Vec<usize> {
        let mut rest = y.to_vec();
        let mut out = Vec::with_capacity(self.layers.len());
        for cw in &self.layers {
            let j = nearest_scaled(&rest, self.a, cw);
            for (r, c) in rest.iter_mut().zip(&cw[j]) {
                *r -= self.a * c;
            }
            let i = nearest_scaled(&rest, 1.0, cw);
            for (r, c) in rest.iter_mut().zip(&cw[i]) {
                *r -= c;
            }
            out.push(i);
        }
        out
    }

    pub fn layer_codewords(&self) -> &[Vec<Vec<f64>>] {
        &self.layers
    }
}

/// One-shot layered decoding at receiver 1.
pub fn decode_layered(y: &[f64], layered: &LayeredCodebook, params: &ChannelParams) -> Result<Vec<usize>> {
    Ok(LayeredDecoder::new(layered, params.a)?.decode(y))
}

/// Sum of one codeword per layer.
pub fn layered_signal(codewords: &[Vec<Vec<f64>>], messages: &[usize]) -> Vec<f64> {
    let n = codewords[0][0].len();
    let mut x = alloc::vec![0.0; n];
    for (cw, &m) in codewords.iter().zip(messages) {
        for (xi, c) in x.iter_mut().zip(&cw[m]) {
            *xi += c;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::enumerate_codebook;
    use crate::lattice::LatticeSpec;
    use crate::DEFAULT_BUDGET;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn regimes() {
        let c = classify_regime(1.5, 1.0).unwrap();
        assert_eq!(c.regime, Regime::VeryStrong);
        assert_eq!(c.witness.a_squared, 2.25);
        assert_eq!(c.witness.very_strong_threshold, 2.0);
        assert_eq!(c.witness.multiuser_threshold, 4.0);
        let w = classify_regime(0.3, 1.0).unwrap();
        assert_eq!(w.regime, Regime::Weak);
        assert!(close(w.witness.weak_value, 0.327, 1e-12));
        assert_eq!(classify_regime(0.8, 1.0).unwrap().regime, Regime::General);
        assert_eq!(classify_regime(1.0, 1.0), Err(Error::UnityGain));
        assert_eq!(classify_regime(-0.3, 1.0).unwrap().regime, Regime::Weak);
    }

    #[test]
    fn formulas() {
        assert!(close(mmse_alpha(1.0, 0.5, 1.0), 1.0 / 2.25, 1e-15));
        assert_eq!(mmse_alpha(1.0, 0.0, 0.0), 1.0);
        assert!(close(mmse_alpha(1e12, 0.0, 1.0), 1.0, 1e-9));
        assert!(close(effective_noise_variance(1.0, 0.5, 1.0), 1.25 / 2.25, 1e-15));
        assert_eq!(effective_noise_variance(1.0, 0.0, 0.0), 0.0);
        assert!(close(effective_noise_variance(1.0, 0.3, 1.0), 1.09 / 2.09, 1e-15));
        assert!(close(achievable_rate_weak(1.0, 0.5, 1.0), 0.5 * libm::log2(1.8), 1e-15));
        assert_eq!(achievable_rate_weak(1.0, 0.0, 1.0), 0.5);
        assert!(achievable_rate_weak(1e-12, 0.5, 1.0) < 1e-11);
    }

    #[test]
    fn params_validation() {
        assert_eq!(ChannelParams::new(1.0, 1.0, 1.0, 1.0), Err(Error::UnityGain));
        assert_eq!(ChannelParams::new(0.5, 1.0, 0.0, 1.0), Err(Error::InvalidParameter("power")));
        assert_eq!(ChannelParams::new(0.5, 1.0, 1.0, -1.0), Err(Error::InvalidParameter("ne")));
        let p = ChannelParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!((p.n1, p.n2, p.ne), (1.0, 1.0, 0.0));
    }

    #[test]
    fn noiseless_transmit() {
        let params = ChannelParams::noiseless(0.5, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = transmit(&[1.0], &[2.0], &params, &mut rng).unwrap();
        assert_eq!(out.y1, vec![2.0]);
        assert_eq!(out.y2, vec![2.5]);
        assert_eq!(out.z, vec![3.0]);
        assert!(transmit(&[1.0], &[1.0, 2.0], &params, &mut rng).is_err());
    }

    #[test]
    fn dithered_encoding_corner_cases() {
        let lat = LatticeSpec::seeded(3, 1, 2, 4).build().unwrap();
        let cb = enumerate_codebook(&lat, DEFAULT_BUDGET).unwrap();
        let zero = vec![0.0; 2];
        for l in cb.points() {
            let x = encode_dithered(l, &zero, &lat);
            let lf = l.to_f64();
            assert!(close(x[0], lf[0], 1e-12) && close(x[1], lf[1], 1e-12));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = dither_sample(&lat, &mut rng);
        assert_eq!(encode_dithered(&LatticePoint::zero(2), &u, &lat), u);
    }

    #[test]
    fn stage_conditions() {
        assert!(check_stage_conditions(1.5, &[1.0]).is_ok());
        assert_eq!(
            check_stage_conditions(1.2, &[1.0]),
            Err(Error::StageConditionViolated { stage: 1 })
        );
        // Stage 1 is shielded by the power of stage 2; stage 2 is not.
        assert_eq!(
            check_stage_conditions(1.5, &[1.0, 5.0]),
            Err(Error::StageConditionViolated { stage: 2 })
        );
        let alloc = layered_power_allocation(1.2, 3.0, 16).unwrap();
        assert!(close(alloc.iter().sum::<f64>(), 3.0, 1e-12));
        assert!(check_stage_conditions(1.2, &alloc).is_ok());
        assert!(alloc.len() > 1);
        assert!(layered_power_allocation(0.8, 1.0, 16).is_err());
    }
}
