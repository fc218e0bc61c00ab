//! Regime classification, Monte Carlo reliability of the matching scheme and
//! exact secrecy figures, in one run; plus the zero-noise loopback check.

use alloc::vec::Vec;

use num_integer::Integer;

use super::{layered_report_for, secrecy_report, LayeredReport, SecrecyReport};
use crate::channel::{
    classify_regime, decode_very_strong, decode_weak, dithered_round, layered_power_allocation, layered_signal,
    mmse_alpha, simulate_layered, simulate_very_strong, simulate_weak, trial_rng, ChannelParams, DecodeOrder,
    LayeredDecoder, LayeredRun, Regime, RegimeClass, VeryStrongRun, WeakRun,
};
use crate::codebook::{build_layered, enumerate_codebook, Codebook, LayerSpec, LayeredCodebook};
use crate::error::{Error, Result};
use crate::lattice::{rational_to_f64, LatticeSpec};
use crate::point::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub params: ChannelParams,
    pub lattice: LatticeSpec,
    pub num_bins: usize,
    pub bin_seed: u64,
    pub trials: u64,
    pub seed: u64,
    /// Cap on the number of layers in the general regime.
    pub max_layers: usize,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reliability {
    Weak(WeakRun),
    VeryStrong {
        interference_first: VeryStrongRun,
        own_first: VeryStrongRun,
    },
    Layered {
        powers: Vec<f64>,
        run: LayeredRun,
        lemma: LayeredReport,
    },
    /// No scheme applies; the reason is given.
    Unavailable(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub regime: RegimeClass,
    /// `(1/n) log2 |C|` of the configured codebook.
    pub codebook_rate: f64,
    /// `½ log2(1 + P / (a² P + 1))`, for reference.
    pub achievable_rate_weak: f64,
    pub secrecy: SecrecyReport,
    pub reliability: Reliability,
}

/// Classifies the channel, simulates receiver 1 under the matching scheme
/// and computes exact leakage for the binned lattice codebook:
///
/// * weak: dithered modulo-lattice coding with dither power `P`;
/// * very strong: the shared codebook scaled so codewords have power `P`,
///   decoded interference-first and, for comparison, own-first;
/// * general: layered coding with a greedy power split, when `a² > 1`.
pub fn run_regime_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let params = cfg.params;
    params.validate()?;
    let regime = classify_regime(params.a, params.power)?;
    let base = enumerate_codebook(&cfg.lattice.build()?, cfg.budget)?;
    let reliability = match regime.regime {
        Regime::Weak => {
            let c = base.fit_dither_power(params.power)?;
            Reliability::Weak(simulate_weak(&c, &params, cfg.trials, cfg.seed)?)
        }
        Regime::VeryStrong => {
            let c = base.fit_codeword_power(params.power)?;
            Reliability::VeryStrong {
                interference_first: simulate_very_strong(
                    &c,
                    &params,
                    DecodeOrder::InterferenceFirst,
                    cfg.trials,
                    cfg.seed,
                )?,
                own_first: simulate_very_strong(&c, &params, DecodeOrder::OwnFirst, cfg.trials, cfg.seed)?,
            }
        }
        Regime::General if params.a * params.a > 1.0 => {
            let powers = layered_power_allocation(params.a, params.power, cfg.max_layers)?;
            let lc = layered_for_powers(&cfg.lattice, &powers, cfg.budget)?;
            Reliability::Layered {
                run: simulate_layered(&lc, &params, cfg.trials, cfg.seed)?,
                lemma: layered_report_for(&lc, cfg.budget)?,
                powers,
            }
        }
        Regime::General => Reliability::Unavailable("layered decoding needs a^2 > 1"),
    };
    Ok(PipelineReport {
        regime,
        codebook_rate: base.rate(),
        achievable_rate_weak: crate::channel::achievable_rate_weak(params.power, params.a, 1.0),
        secrecy: secrecy_report(&base, cfg.num_bins, cfg.bin_seed, cfg.budget)?,
        reliability,
    })
}

/// One layer per power, each a copy of the configured lattice scaled to its
/// power, inside a fine lattice whose scale divides all layer scales.
pub fn layered_for_powers(spec: &LatticeSpec, powers: &[f64], budget: u64) -> Result<LayeredCodebook> {
    let lat = spec.build()?;
    let base = enumerate_codebook(&lat, budget)?;
    let mut scales = Vec::with_capacity(powers.len());
    for &p in powers {
        scales.push(base.fit_dither_power(p)?.lattice().scale());
    }
    let num = scales.iter().fold(0i128, |g, s| g.gcd(s.numer()));
    let den = scales.iter().fold(1i128, |l, s| l.lcm(s.denom()));
    let fine = lat.with_scale(Rational::new(num, den))?;
    let specs: Vec<LayerSpec> = scales
        .into_iter()
        .map(|scale| LayerSpec { k: spec.k, scale })
        .collect();
    build_layered(&fine, &specs, powers, budget)
}

/// Largest codeword norm and smallest distance between distinct codewords.
fn geometry(c: &Codebook) -> (f64, f64) {
    let pts = c.points_f64();
    let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let r = pts.iter().map(|p| norm(p)).fold(0.0, f64::max);
    let mut d = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let diff: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
            d = d.min(norm(&diff));
        }
    }
    (r, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopbackReport {
    pub size: usize,
    /// Message pairs tried by the single-layer schemes.
    pub pairs: u64,
    pub weak_ok: bool,
    /// Cross gain used for the very-strong run.
    pub very_strong_gain: f64,
    pub very_strong_ok: bool,
    /// Two-layer run, only for `|C|^2 <= layered_max_size`.
    pub layered: Option<LayeredLoopback>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayeredLoopback {
    pub gain: f64,
    /// Scale ratio between the first and the second layer.
    pub multiple: i128,
    pub tuples: u64,
    pub ok: bool,
}

impl super::Verdict for LoopbackReport {
    fn passed(&self) -> bool {
        self.weak_ok && self.very_strong_ok && self.layered.map(|l| l.ok).unwrap_or(true)
    }
}

/// Every scheme, zero noise, every message combination, both receivers.
///
/// * Weak: `a = 0` so that `α = 1`; fresh dithers per pair.
/// * Very strong: `a = 2R/d + 1`, with `R` the largest codeword norm and
///   `d` the minimum distance, so the own codeword can never pull the
///   first-stage decision to a wrong interference codeword.
/// * Layered: layers at scales `M s` and `s`, `a = 4R/d + 1` and
///   `M = ⌈2(1 + a) R/d⌉ + 1`, which keeps every stage's residual inside half
///   a minimum distance. Only when `|C|^2 <= layered_max_size`.
pub fn loopback_check(spec: &LatticeSpec, seed: u64, layered_max_size: usize, budget: u64) -> Result<LoopbackReport> {
    let c = enumerate_codebook(&spec.build()?, budget)?;
    let size = c.len();
    let cw = c.points_f64();
    let power = rational_to_f64(c.lattice().dither_second_moment());

    let weak = ChannelParams::noiseless(0.0, 1.0, power)?;
    let alpha = mmse_alpha(power, 0.0, 0.0);
    let mut weak_ok = true;
    let mut idx = 0;
    for m1 in 0..size {
        for m2 in 0..size {
            let mut rng = trial_rng(seed, idx);
            idx += 1;
            let tr = dithered_round(&c, m1, m2, &weak, &mut rng)?;
            weak_ok &= decode_weak(&tr.out.y1, &tr.u1, alpha, &c, &cw) == m1;
            weak_ok &= decode_weak(&tr.out.y2, &tr.u2, alpha, &c, &cw) == m2;
        }
    }

    let (r, d) = geometry(&c);
    let (r, d) = if size == 1 { (0.0, 1.0) } else { (r, d) };
    let codeword_power = rational_to_f64(c.average_power());
    let a = (2.0 * r / d + 1.0).max(libm::sqrt(codeword_power + 1.0) + 1.0);
    let vs = ChannelParams::noiseless(a, 1.0, codeword_power.max(f64::MIN_POSITIVE))?;
    let mut very_strong_ok = classify_regime(a, vs.power)?.regime == Regime::VeryStrong;
    for m1 in 0..size {
        for m2 in 0..size {
            let y1: Vec<f64> = (0..c.n()).map(|i| cw[m1][i] + a * cw[m2][i]).collect();
            let y2: Vec<f64> = (0..c.n()).map(|i| cw[m2][i] + a * cw[m1][i]).collect();
            let d1 = decode_very_strong(&y1, vs.a, &cw, DecodeOrder::InterferenceFirst);
            let d2 = decode_very_strong(&y2, vs.a, &cw, DecodeOrder::InterferenceFirst);
            very_strong_ok &= d1.own == m1 && d1.interference == m2 && d2.own == m2 && d2.interference == m1;
        }
    }

    let layered = if size * size <= layered_max_size {
        Some(layered_loopback(spec, &c, r, d, budget)?)
    } else {
        None
    };
    Ok(LoopbackReport {
        size,
        pairs: (size * size) as u64,
        weak_ok,
        very_strong_gain: a,
        very_strong_ok,
        layered,
    })
}

fn layered_loopback(spec: &LatticeSpec, c: &Codebook, r: f64, d: f64, budget: u64) -> Result<LayeredLoopback> {
    let a = 4.0 * r / d + 1.0;
    let multiple = libm::ceil(2.0 * (1.0 + a) * r / d) as i128 + 1;
    let lat = c.lattice();
    let s = lat.scale();
    let specs = [
        LayerSpec {
            k: spec.k,
            scale: s * Rational::from_integer(multiple),
        },
        LayerSpec { k: spec.k, scale: s },
    ];
    let powers: Vec<f64> = specs
        .iter()
        .map(|l| rational_to_f64(l.scale * l.scale / Rational::from_integer(12)))
        .collect();
    let lc = build_layered(lat, &specs, &powers, budget)?;
    let dec = match LayeredDecoder::new(&lc, a) {
        Ok(dec) => dec,
        Err(Error::StageConditionViolated { .. }) => {
            return Ok(LayeredLoopback {
                gain: a,
                multiple,
                tuples: 0,
                ok: false,
            })
        }
        Err(e) => return Err(e),
    };
    let cw = dec.layer_codewords();
    let size = c.len();
    let tuples: Vec<[usize; 2]> = (0..size * size).map(|t| [t / size, t % size]).collect();
    let mut ok = true;
    for m1 in &tuples {
        let x1 = layered_signal(cw, m1);
        for m2 in &tuples {
            let x2 = layered_signal(cw, m2);
            let y1: Vec<f64> = x1.iter().zip(&x2).map(|(u, v)| u + a * v).collect();
            let y2: Vec<f64> = x2.iter().zip(&x1).map(|(u, v)| u + a * v).collect();
            ok &= dec.decode(&y1) == m1 && dec.decode(&y2) == m2;
        }
    }
    Ok(LayeredLoopback {
        gain: a,
        multiple,
        tuples: (tuples.len() * tuples.len()) as u64,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::ExactBits;
    use crate::DEFAULT_BUDGET;

    fn cfg(a: f64, num_bins: usize) -> PipelineConfig {
        PipelineConfig {
            params: ChannelParams::new(a, 1.0, 1.0, 1.0).unwrap(),
            lattice: LatticeSpec::seeded(2, 1, 1, 0),
            num_bins,
            bin_seed: 0,
            trials: 200,
            seed: 1,
            max_layers: 8,
            budget: DEFAULT_BUDGET,
        }
    }

    #[test]
    fn pipeline_examples() {
        let vs = run_regime_pipeline(&cfg(1.5, 2)).unwrap();
        assert_eq!(vs.regime.regime, Regime::VeryStrong);
        assert_eq!(vs.secrecy.leakage, ExactBits::constant(Rational::new(1, 2)));
        assert!(vs.secrecy.onebit_pass);
        assert!(matches!(vs.reliability, Reliability::VeryStrong { .. }));

        let weak = run_regime_pipeline(&cfg(0.3, 1)).unwrap();
        assert_eq!(weak.regime.regime, Regime::Weak);
        assert!(weak.secrecy.leakage.is_zero());
        assert!(weak.secrecy.equivocation_per_dim.is_zero());

        let general = run_regime_pipeline(&cfg(1.2, 2)).unwrap();
        assert!(matches!(general.reliability, Reliability::Layered { .. }));
        let low = run_regime_pipeline(&cfg(0.8, 2)).unwrap();
        assert!(matches!(low.reliability, Reliability::Unavailable(_)));

        let mut unity = cfg(0.5, 1);
        unity.params.a = 1.0;
        assert_eq!(run_regime_pipeline(&unity), Err(Error::UnityGain));
    }

    #[test]
    fn layered_powers_nest() {
        let lc = layered_for_powers(&LatticeSpec::seeded(3, 1, 2, 5), &[2.0, 0.3, 0.01], DEFAULT_BUDGET).unwrap();
        assert_eq!(lc.num_layers(), 3);
        for (layer, &p) in lc.layers().iter().zip(lc.powers()) {
            assert!(rational_to_f64(layer.lattice().dither_second_moment()) <= p);
        }
    }

    #[test]
    fn small_loopback() {
        for spec in [LatticeSpec::seeded(2, 1, 1, 0), LatticeSpec::seeded(3, 1, 2, 2)] {
            let r = loopback_check(&spec, 0, 64, DEFAULT_BUDGET).unwrap();
            assert!(r.weak_ok && r.very_strong_ok);
            assert!(r.layered.unwrap().ok);
        }
    }
}
