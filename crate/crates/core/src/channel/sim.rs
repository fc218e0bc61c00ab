//! Seeded Monte Carlo drivers. Trial `t` draws everything from its own
//! ChaCha stream `(seed, t)`, so results do not depend on how trials are
//! scheduled.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    decode_very_strong, decode_weak, dithered_round, effective_noise_variance, layered_signal, mmse_alpha, transmit,
    ChannelParams, DecodeOrder, LayeredDecoder,
};
use crate::codebook::{Codebook, LayeredCodebook};
use crate::error::{Error, Result};

/// Random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            stderr: libm::sqrt(var / m),
            samples: xs.len() as u64,
        }
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        libm::fabs(self.mean - target) <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorRate {
    pub errors: u64,
    pub trials: u64,
}

impl ErrorRate {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    pub fn stderr(&self) -> f64 {
        let r = self.rate();
        libm::sqrt(r * (1.0 - r) / self.trials as f64)
    }
}

/// Receiver-1 statistics of the dithered weak-interference scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRun {
    pub alpha: f64,
    /// `P (a² P + N) / ((1 + a²) P + N)` at the nominal power.
    pub formula_variance: f64,
    /// Per-dimension second moment of the transmit signal actually used.
    pub transmit_power: f64,
    pub errors: ErrorRate,
    /// Per-dimension mean square of `N'1 = α Y1 - X1`.
    pub effective_noise: MeanEstimate,
    /// Per-dimension mean square of `[α Y1 - U1 - L1] mod L_c`, the same
    /// noise after folding into the coarse Voronoi region.
    pub folded_residual: MeanEstimate,
}

/// Uniform random message pairs through the dithered transceiver; decoding
/// at receiver 1 with the MMSE `α` for the legitimate noise `n1`.
pub fn simulate_weak(codebook: &Codebook, params: &ChannelParams, trials: u64, seed: u64) -> Result<WeakRun> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials"));
    }
    let lat = codebook.lattice();
    let n = codebook.n();
    let alpha = mmse_alpha(params.power, params.a, params.n1);
    let codewords = codebook.points_f64();
    let mut errors = 0;
    let mut eff = Vec::with_capacity(trials as usize);
    let mut folded = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let m1 = rng.random_range(0..codebook.len());
        let m2 = rng.random_range(0..codebook.len());
        let tr = dithered_round(codebook, m1, m2, params, &mut rng)?;
        if decode_weak(&tr.out.y1, &tr.u1, alpha, codebook, &codewords) != m1 {
            errors += 1;
        }
        let l1 = &codewords[m1];
        let mut e = 0.0;
        let mut r = Vec::with_capacity(n);
        for i in 0..n {
            let ay = alpha * tr.out.y1[i];
            e += (ay - tr.x1[i]) * (ay - tr.x1[i]);
            r.push(ay - tr.u1[i] - l1[i]);
        }
        eff.push(e / n as f64);
        folded.push(lat.mod_coarse(&r).iter().map(|x| x * x).sum::<f64>() / n as f64);
    }
    Ok(WeakRun {
        alpha,
        formula_variance: effective_noise_variance(params.power, params.a, params.n1),
        transmit_power: crate::lattice::rational_to_f64(lat.dither_second_moment()),
        errors: ErrorRate { errors, trials },
        effective_noise: MeanEstimate::from_samples(&eff),
        folded_residual: MeanEstimate::from_samples(&folded),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeryStrongRun {
    pub order: DecodeOrder,
    /// Receiver 1 got its own message wrong.
    pub own_errors: ErrorRate,
    /// Receiver 1 got the interfering message wrong.
    pub interference_errors: ErrorRate,
}

/// Both users send codewords of the shared codebook directly; receiver 1
/// decodes in the given order.
pub fn simulate_very_strong(
    codebook: &Codebook,
    params: &ChannelParams,
    order: DecodeOrder,
    trials: u64,
    seed: u64,
) -> Result<VeryStrongRun> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials"));
    }
    let codewords = codebook.points_f64();
    let (mut own, mut interference) = (0, 0);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let m1 = rng.random_range(0..codebook.len());
        let m2 = rng.random_range(0..codebook.len());
        let out = transmit(&codewords[m1], &codewords[m2], params, &mut rng)?;
        let d = decode_very_strong(&out.y1, params.a, &codewords, order);
        own += (d.own != m1) as u64;
        interference += (d.interference != m2) as u64;
    }
    Ok(VeryStrongRun {
        order,
        own_errors: ErrorRate { errors: own, trials },
        interference_errors: ErrorRate {
            errors: interference,
            trials,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredRun {
    /// At least one own layer decoded wrongly.
    pub message_errors: ErrorRate,
    /// Per-layer own-message errors.
    pub layer_errors: Vec<u64>,
}

/// Both users send one codeword per layer, summed; receiver 1 decodes
/// layer by layer.
pub fn simulate_layered(layered: &LayeredCodebook, params: &ChannelParams, trials: u64, seed: u64) -> Result<LayeredRun> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials"));
    }
    let dec = LayeredDecoder::new(layered, params.a)?;
    let cw = dec.layer_codewords();
    let mut layer_errors = alloc::vec![0u64; cw.len()];
    let mut errors = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let m1: Vec<usize> = cw.iter().map(|c| rng.random_range(0..c.len())).collect();
        let m2: Vec<usize> = cw.iter().map(|c| rng.random_range(0..c.len())).collect();
        let x1 = layered_signal(cw, &m1);
        let x2 = layered_signal(cw, &m2);
        let out = transmit(&x1, &x2, params, &mut rng)?;
        let est = dec.decode(&out.y1);
        let mut any = false;
        for (i, (e, m)) in est.iter().zip(&m1).enumerate() {
            if e != m {
                layer_errors[i] += 1;
                any = true;
            }
        }
        errors += any as u64;
    }
    Ok(LayeredRun {
        message_errors: ErrorRate { errors, trials },
        layer_errors,
    })
}
