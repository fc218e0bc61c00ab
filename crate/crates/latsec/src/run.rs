//! Dispatch from a validated configuration to the core suites, collecting
//! one record per configuration in grid order.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use latsec_core::channel::{classify_regime, Regime};
use latsec_core::codebook::{enumerate_codebook, verify_sum_bound, LayerSpec};
use latsec_core::experiments::{
    binning_grid, default_layered_configs, lattice_grid, lemma_report, loopback_check, mac_sum_rate_bound,
    random_codebook_baseline, run_regime_pipeline, secrecy_report, LayeredConfig, LayeredReport, LemmaReport,
    LoopbackReport, PipelineConfig, Reliability, SecrecyReport, Verdict as _,
};
use latsec_core::info::ExactBits;
use latsec_core::lattice::{GPrimeSpec, GSpec, LatticeSpec};
use latsec_core::{Error as CoreError, Rational};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Kind, SweepOf, KEYS};
use crate::envelope::{ColumnType as T, Record, ResultEnvelope, Schema};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl RunError {
    fn core(context: impl Into<String>) -> impl FnOnce(CoreError) -> RunError {
        let context = context.into();
        move |source| RunError::Core { context, source }
    }

    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            RunError::Core {
                source: CoreError::BudgetExceeded { .. },
                ..
            }
        )
    }
}

const LATTICE_COLS: [(&str, T); 6] = [
    ("p", T::Text),
    ("k", T::Text),
    ("n", T::Text),
    ("g", T::Text),
    ("gprime", T::Text),
    ("scale", T::Text),
];

macro_rules! schema {
    ($($name:literal : $ty:ident),* $(,)?) => {
        &[
            LATTICE_COLS[0], LATTICE_COLS[1], LATTICE_COLS[2],
            LATTICE_COLS[3], LATTICE_COLS[4], LATTICE_COLS[5],
            $(($name, T::$ty)),*
        ]
    };
}

pub const LATTICE_SCHEMA: Schema = schema![
    "numCosets": Exact,
    "size": Exact,
    "rate": Exact,
    "averagePower": Exact,
    "ditherSecondMoment": Exact,
    "sumSize": Exact,
    "sumBound": Exact,
    "sumBoundPass": Flag,
    "generator": Text,
    "transform": Text,
    "codewords": Text,
];

pub const LEMMA_SCHEMA: Schema = schema![
    "size": Exact,
    "sumSize": Exact,
    "sumBound": Exact,
    "sumBoundPass": Flag,
    "hSum": Exact,
    "entropyBound": Exact,
    "entropyPass": Flag,
    "mutualInfo": Exact,
    "mutualInfoPerDim": Exact,
    "mutualInfoPass": Flag,
    "error": Text,
];

pub const THEOREM1_SCHEMA: Schema = schema![
    "size": Exact,
    "numBins": Exact,
    "binSeed": Text,
    "rate": Exact,
    "binRate": Exact,
    "leakage": Exact,
    "leakagePerDim": Exact,
    "equivocationPerDim": Exact,
    "onebitPass": Flag,
    "sumGapBits": Exact,
    "equivocationIdentity": Flag,
    "chainRule": Flag,
    "error": Text,
];

pub const LAYERED_SCHEMA: Schema = schema![
    "layers": Text,
    "layerSizes": Text,
    "sumSize": Exact,
    "uniqueSums": Flag,
    "hPairSum": Exact,
    "entropyBound": Exact,
    "entropyPass": Flag,
    "tvToUniform": Exact,
    "error": Text,
];

pub const BASELINE_SCHEMA: Schema = &[
    ("seed", T::Text),
    ("leakage", T::Exact),
    ("leakagePerDim", T::Exact),
    ("uniqueSums", T::Flag),
    ("exceedsOneBit", T::Flag),
    ("exceedsLattice", T::Flag),
];

pub const PIPELINE_SCHEMA: Schema = schema![
    "a": Text,
    "b": Text,
    "P": Text,
    "Ne": Text,
    "regime": Text,
    "aSquared": Formula,
    "veryStrongThreshold": Formula,
    "weakValue": Formula,
    "multiuserThreshold": Formula,
    "codebookRate": Exact,
    "achievableRateWeak": Formula,
    "numBins": Exact,
    "binRate": Exact,
    "leakage": Exact,
    "leakagePerDim": Exact,
    "equivocationPerDim": Exact,
    "onebitPass": Flag,
    "sumGapBits": Exact,
    "equivocationIdentity": Flag,
    "chainRule": Flag,
    "scheme": Text,
    "alpha": Formula,
    "formulaNoiseVariance": Formula,
    "transmitPower": Formula,
    "effectiveNoise": MonteCarlo,
    "foldedResidual": MonteCarlo,
    "errorRate": MonteCarlo,
    "interferenceErrorRate": MonteCarlo,
    "ownFirstErrorRate": MonteCarlo,
    "ownFirstInterferenceErrorRate": MonteCarlo,
    "layerPowers": Text,
    "layerErrors": Text,
    "layeredEntropyPass": Flag,
    "layeredTvToUniform": Exact,
    "note": Text,
];

pub const LOOPBACK_SCHEMA: Schema = schema![
    "size": Exact,
    "pairs": Exact,
    "weakOk": Flag,
    "veryStrongGain": Formula,
    "veryStrongOk": Flag,
    "layeredGain": Formula,
    "layeredMultiple": Exact,
    "layeredTuples": Exact,
    "layeredOk": Flag,
    "error": Text,
];

/// Runs the experiment and stamps the wall clock.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultEnvelope, RunError> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let t = Instant::now();
    let mut env = run_payload(cfg)?;
    env.wall_clock = Some(crate::envelope::WallClock {
        started_unix_ms: started,
        elapsed_ms: t.elapsed().as_millis() as u64,
    });
    Ok(env)
}

/// The deterministic part of [`run`].
pub fn run_payload(cfg: &ExperimentConfig) -> Result<ResultEnvelope, RunError> {
    cfg.validate()?;
    let echo: IndexMap<String, String> = KEYS
        .iter()
        .map(|k| (k.to_string(), cfg.get(k).expect("known key")))
        .collect();
    let mut env = match cfg.kind {
        Kind::Lattice => lattice(cfg, echo)?,
        Kind::Lemmas => lemmas(std::slice::from_ref(&cfg.lattice), cfg.budget, "lemmas", echo),
        Kind::Theorem1 => theorem1(std::slice::from_ref(&cfg.lattice), cfg, "theorem1", echo),
        Kind::Layered => layered(cfg, echo),
        Kind::Baseline => baseline(cfg, echo)?,
        Kind::Pipeline => pipeline(cfg, echo)?,
        Kind::Sweep => {
            let grid = lattice_grid(&cfg.primes, cfg.max_n, cfg.max_size, &cfg.seeds);
            let kind = format!("sweep:{}", cfg.sweep.as_str());
            match cfg.sweep {
                SweepOf::Lemmas => lemmas(&grid, cfg.budget, &kind, echo),
                SweepOf::Theorem1 => theorem1(&grid, cfg, &kind, echo),
                SweepOf::Loopback => loopback(&grid, cfg, &kind, echo),
            }
        }
    };
    let budget_hits = env
        .results
        .iter()
        .filter(|r| matches!(r.get("error"), Some(crate::envelope::Field::Text(e)) if e.starts_with("budget")))
        .count();
    env.verdict.budget_exceeded = budget_hits > 0;
    Ok(env)
}

fn lattice_record(spec: &LatticeSpec) -> Record {
    let mut r = Record::new();
    r.text("p", spec.p.to_string())
        .text("k", spec.k.to_string())
        .text("n", spec.n.to_string())
        .text(
            "g",
            match &spec.g {
                GSpec::Seeded(s) => format!("seed:{s}"),
                GSpec::Explicit(e) => join(e),
            },
        )
        .text(
            "gprime",
            match &spec.gprime {
                GPrimeSpec::Identity => "identity".to_string(),
                GPrimeSpec::Seeded(s) => format!("seed:{s}"),
                GPrimeSpec::Explicit(e) => join(e),
            },
        )
        .text("scale", spec.scale.to_string());
    r
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn error_text(e: &CoreError) -> String {
    match e {
        CoreError::BudgetExceeded { .. } => format!("budget: {e}"),
        _ => e.to_string(),
    }
}

fn rate_bits(size: usize, n: usize) -> ExactBits {
    ExactBits::log2_int(size as u128).scale(Rational::new(1, n as i128))
}

fn lattice(cfg: &ExperimentConfig, echo: IndexMap<String, String>) -> Result<ResultEnvelope, RunError> {
    let mut env = ResultEnvelope::new("lattice", echo, LATTICE_SCHEMA);
    let lat = cfg.lattice.build().map_err(RunError::core("building lattice"))?;
    let c = enumerate_codebook(&lat, cfg.budget).map_err(RunError::core("enumerating codebook"))?;
    let sb = verify_sum_bound(&c, cfg.budget).map_err(RunError::core("sum set"))?;
    let mut r = lattice_record(&cfg.lattice);
    r.count("numCosets", lat.num_cosets())
        .count("size", c.len() as u128)
        .bits("rate", &rate_bits(c.len(), c.n()))
        .rational("averagePower", c.average_power())
        .rational("ditherSecondMoment", lat.dither_second_moment())
        .count("sumSize", sb.sum_size as u128)
        .count("sumBound", sb.bound)
        .flag("sumBoundPass", sb.pass)
        .text("generator", join(lat.g().entries()))
        .text("transform", join(lat.gprime().entries()))
        .text(
            "codewords",
            c.points().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
        );
    env.verdict.check("sum-set bound", sb.pass, format!("{} <= {}", sb.sum_size, sb.bound));
    env.results.push(r);
    Ok(env)
}

fn lemma_record(spec: &LatticeSpec, res: &Result<LemmaReport, CoreError>) -> Record {
    let mut r = lattice_record(spec);
    match res {
        Ok(l) => {
            r.count("size", l.size as u128)
                .count("sumSize", l.sum_bound.sum_size as u128)
                .count("sumBound", l.sum_bound.bound)
                .flag("sumBoundPass", l.sum_bound.pass)
                .bits("hSum", &l.h_sum)
                .bits("entropyBound", &l.entropy_bound)
                .flag("entropyPass", l.entropy_pass)
                .bits("mutualInfo", &l.mutual_info)
                .bits("mutualInfoPerDim", &l.mutual_info.scale(Rational::new(1, l.n as i128)))
                .flag("mutualInfoPass", l.mutual_info_pass);
        }
        Err(e) => {
            r.text("error", error_text(e));
        }
    }
    r
}

fn run_lemma(spec: &LatticeSpec, budget: u64) -> Result<LemmaReport, CoreError> {
    let c = enumerate_codebook(&spec.build()?, budget)?;
    lemma_report(&c, budget)
}

fn lemmas(grid: &[LatticeSpec], budget: u64, kind: &str, echo: IndexMap<String, String>) -> ResultEnvelope {
    let mut env = ResultEnvelope::new(kind, echo, LEMMA_SCHEMA);
    let outcomes: Vec<Result<LemmaReport, CoreError>> = grid.par_iter().map(|s| run_lemma(s, budget)).collect();
    let count = |f: fn(&LemmaReport) -> bool| outcomes.iter().filter(|o| o.as_ref().map(f).unwrap_or(false)).count();
    let errors = outcomes.iter().filter(|o| o.is_err()).count();
    let total = grid.len();
    let sum = count(|l| l.sum_bound.pass);
    let ent = count(|l| l.entropy_pass);
    let mi = count(|l| l.mutual_info_pass);
    env.verdict.check("configurations ran", errors == 0, format!("{errors} of {total} failed to run"));
    env.verdict.check("sum-set bound", sum == total, format!("{sum} of {total} pass"));
    env.verdict.check("sum entropy bound", ent == total, format!("{ent} of {total} pass"));
    env.verdict.check("mutual information per dimension <= 1", mi == total, format!("{mi} of {total} pass"));
    env.summary.count("configurations", total as u128);
    env.results = grid.iter().zip(&outcomes).map(|(s, o)| lemma_record(s, o)).collect();
    env
}

fn secrecy_record(spec: &LatticeSpec, bin_seed: u64, res: &Result<SecrecyReport, CoreError>, bins: usize) -> Record {
    let mut r = lattice_record(spec);
    r.text("binSeed", bin_seed.to_string());
    match res {
        Ok(s) => {
            r.count("size", s.size as u128)
                .count("numBins", s.num_bins as u128)
                .bits("rate", &rate_bits(s.size, s.n));
            secrecy_fields(&mut r, s);
        }
        Err(e) => {
            r.count("numBins", bins as u128).text("error", error_text(e));
        }
    }
    r
}

fn secrecy_fields(r: &mut Record, s: &SecrecyReport) {
    r.bits("binRate", &s.bin_rate)
        .bits("leakage", &s.leakage)
        .bits("leakagePerDim", &s.leakage_per_dim)
        .bits("equivocationPerDim", &s.equivocation_per_dim)
        .flag("onebitPass", s.onebit_pass)
        .bits("sumGapBits", &s.sum_gap_bits)
        .flag("equivocationIdentity", s.equivocation_identity)
        .flag("chainRule", s.chain_rule);
}

fn theorem1(grid: &[LatticeSpec], cfg: &ExperimentConfig, kind: &str, echo: IndexMap<String, String>) -> ResultEnvelope {
    let mut env = ResultEnvelope::new(kind, echo, THEOREM1_SCHEMA);
    let per_spec: Vec<Vec<(usize, Result<SecrecyReport, CoreError>)>> = grid
        .par_iter()
        .map(|spec| {
            let bins: Vec<usize> = match cfg.num_bins {
                Some(b) => vec![b],
                None => binning_grid(std::slice::from_ref(spec), cfg.bin_seed)
                    .into_iter()
                    .map(|b| b.num_bins)
                    .collect(),
            };
            match spec.build().and_then(|lat| enumerate_codebook(&lat, cfg.budget)) {
                Ok(c) => bins
                    .into_iter()
                    .map(|b| (b, secrecy_report(&c, b, cfg.bin_seed, cfg.budget)))
                    .collect(),
                Err(e) => bins.into_iter().map(|b| (b, Err(e.clone()))).collect(),
            }
        })
        .collect();
    let mut total = 0;
    let mut errors = 0;
    let mut onebit = 0;
    let mut identity = 0;
    let mut chain = 0;
    for (spec, outs) in grid.iter().zip(&per_spec) {
        for (bins, o) in outs {
            total += 1;
            match o {
                Ok(s) => {
                    onebit += s.onebit_pass as usize;
                    identity += s.equivocation_identity as usize;
                    chain += s.chain_rule as usize;
                }
                Err(_) => errors += 1,
            }
            env.results.push(secrecy_record(spec, cfg.bin_seed, o, *bins));
        }
    }
    env.verdict.check("configurations ran", errors == 0, format!("{errors} of {total} failed to run"));
    env.verdict.check("leakage per dimension <= 1", onebit == total, format!("{onebit} of {total} pass"));
    env.verdict.check("equivocation identity", identity == total, format!("{identity} of {total} exact"));
    env.verdict.check("chain rule", chain == total, format!("{chain} of {total} exact"));
    env.summary.count("configurations", total as u128);
    env
}

fn layered(cfg: &ExperimentConfig, echo: IndexMap<String, String>) -> ResultEnvelope {
    let mut env = ResultEnvelope::new("layered", echo, LAYERED_SCHEMA);
    let configs = match &cfg.layers {
        Some(layers) => vec![LayeredConfig {
            fine: cfg.lattice.clone(),
            layers: layers.clone(),
            powers: None,
        }],
        None => default_layered_configs(),
    };
    let outcomes: Vec<Result<LayeredReport, CoreError>> = configs
        .par_iter()
        .map(|c| latsec_core::experiments::layered_report(c, cfg.budget))
        .collect();
    let total = configs.len();
    let errors = outcomes.iter().filter(|o| o.is_err()).count();
    let pass = outcomes.iter().filter(|o| o.as_ref().map(|l| l.passed()).unwrap_or(false)).count();
    for (c, o) in configs.iter().zip(&outcomes) {
        let mut r = lattice_record(&c.fine);
        r.text("layers", layer_text(&c.layers));
        match o {
            Ok(l) => {
                r.text("layerSizes", join(&l.layer_sizes))
                    .count("sumSize", l.sum_size as u128)
                    .flag("uniqueSums", l.unique_sums)
                    .bits("hPairSum", &l.h_pair_sum)
                    .bits("entropyBound", &l.entropy_bound)
                    .flag("entropyPass", l.entropy_pass)
                    .prob("tvToUniform", l.tv_to_uniform);
            }
            Err(e) => {
                r.text("error", error_text(e));
            }
        }
        env.results.push(r);
    }
    env.verdict.check("configurations ran", errors == 0, format!("{errors} of {total} failed to run"));
    env.verdict.check("layered sum entropy bound", pass == total, format!("{pass} of {total} pass"));
    env.summary.count("configurations", total as u128);
    env
}

fn layer_text(layers: &[LayerSpec]) -> String {
    layers
        .iter()
        .map(|l| format!("{}:{}", l.k, l.scale))
        .collect::<Vec<_>>()
        .join(",")
}

fn baseline(cfg: &ExperimentConfig, echo: IndexMap<String, String>) -> Result<ResultEnvelope, RunError> {
    let mut env = ResultEnvelope::new("baseline", echo, BASELINE_SCHEMA);
    let n = cfg.lattice.n;
    let seeds: Vec<u64> = (0..cfg.num_seeds).map(|i| cfg.root_seed.wrapping_add(i)).collect();
    let cmp = random_codebook_baseline(cfg.size, n, &seeds, cfg.budget)
        .map_err(RunError::core(format!("baseline with |C| = {}, n = {n}", cfg.size)))?;
    let per_dim = Rational::new(1, n as i128);
    let lattice_per_dim = cmp.lattice_leakage.scale(per_dim);
    let one = ExactBits::constant(Rational::from_integer(1));
    let lattice_ok = latsec_core::experiments::bits_le(&lattice_per_dim, &one);
    let mut above_one = 0usize;
    let mut above_lattice = 0usize;
    for s in &cmp.random {
        let leak = s.leakage.scale(per_dim);
        let exceeds_one = !latsec_core::experiments::bits_le(&leak, &one);
        let exceeds_lattice = (&leak - &lattice_per_dim).to_f64() > 0.0;
        above_one += exceeds_one as usize;
        above_lattice += exceeds_lattice as usize;
        let mut r = Record::new();
        r.text("seed", s.seed.to_string())
            .bits("leakage", &s.leakage)
            .bits("leakagePerDim", &leak)
            .flag("uniqueSums", s.unique_sums)
            .flag("exceedsOneBit", exceeds_one)
            .flag("exceedsLattice", exceeds_lattice);
        env.results.push(r);
    }
    let total = seeds.len();
    let needed = (95 * total).div_ceil(100);
    env.summary
        .count("size", cfg.size as u128)
        .count("n", n as u128)
        .bits("latticeLeakage", &cmp.lattice_leakage)
        .bits("latticeLeakPerDim", &lattice_per_dim)
        .count("seedsExceedingOneBit", above_one as u128)
        .count("seedsExceedingLattice", above_lattice as u128)
        .rational("fractionExceedingOneBit", Rational::new(above_one as i128, total as i128))
        .formula(
            "macSumRateBound",
            mac_sum_rate_bound(cfg.b, cfg.power, cfg.power, cfg.ne),
        );
    env.verdict.check(
        "lattice leakage per dimension <= 1",
        lattice_ok,
        format!("{:.6} bits", lattice_per_dim.to_f64()),
    );
    env.verdict.check(
        "random leakage per dimension > 1 in at least 95% of seeds",
        above_one >= needed,
        format!("{above_one} of {total}"),
    );
    Ok(env)
}

fn pipeline(cfg: &ExperimentConfig, echo: IndexMap<String, String>) -> Result<ResultEnvelope, RunError> {
    let mut env = ResultEnvelope::new("pipeline", echo, PIPELINE_SCHEMA);
    let params = cfg.channel()?;
    let size = (cfg.lattice.p as usize).pow(cfg.lattice.k as u32);
    let pc = PipelineConfig {
        params,
        lattice: cfg.lattice.clone(),
        num_bins: cfg.num_bins.unwrap_or(size),
        bin_seed: cfg.bin_seed,
        trials: cfg.trials,
        seed: cfg.root_seed,
        max_layers: cfg.max_layers,
        budget: cfg.budget,
    };
    let rep = run_regime_pipeline(&pc).map_err(RunError::core("regime pipeline"))?;
    debug_assert_eq!(classify_regime(params.a, params.power).map(|c| c.regime), Ok(rep.regime.regime));
    let w = rep.regime.witness;
    let mut r = lattice_record(&cfg.lattice);
    r.text("a", cfg.a.to_string())
        .text("b", cfg.b.to_string())
        .text("P", cfg.power.to_string())
        .text("Ne", cfg.ne.to_string())
        .text("regime", rep.regime.regime.as_str())
        .formula("aSquared", w.a_squared)
        .formula("veryStrongThreshold", w.very_strong_threshold)
        .formula("weakValue", w.weak_value)
        .formula("multiuserThreshold", w.multiuser_threshold)
        .bits("codebookRate", &rate_bits(rep.secrecy.size, rep.secrecy.n))
        .formula("achievableRateWeak", rep.achievable_rate_weak)
        .count("numBins", rep.secrecy.num_bins as u128);
    secrecy_fields(&mut r, &rep.secrecy);
    match &rep.reliability {
        Reliability::Weak(run) => {
            r.text("scheme", "dithered modulo-lattice")
                .formula("alpha", run.alpha)
                .formula("formulaNoiseVariance", run.formula_variance)
                .formula("transmitPower", run.transmit_power)
                .mean("effectiveNoise", &run.effective_noise)
                .mean("foldedResidual", &run.folded_residual)
                .error_rate("errorRate", &run.errors);
        }
        Reliability::VeryStrong {
            interference_first,
            own_first,
        } => {
            r.text("scheme", "successive, interference first")
                .error_rate("errorRate", &interference_first.own_errors)
                .error_rate("interferenceErrorRate", &interference_first.interference_errors)
                .error_rate("ownFirstErrorRate", &own_first.own_errors)
                .error_rate("ownFirstInterferenceErrorRate", &own_first.interference_errors);
        }
        Reliability::Layered { powers, run, lemma } => {
            r.text("scheme", "layered successive")
                .error_rate("errorRate", &run.message_errors)
                .text("layerPowers", join(powers))
                .text("layerErrors", join(&run.layer_errors))
                .flag("layeredEntropyPass", lemma.entropy_pass)
                .prob("layeredTvToUniform", lemma.tv_to_uniform);
        }
        Reliability::Unavailable(why) => {
            r.text("scheme", "none").text("note", *why);
        }
    }
    let s = &rep.secrecy;
    env.verdict.check(
        "leakage per dimension <= 1",
        s.onebit_pass,
        format!("{:.6} bits", s.leakage_per_dim.to_f64()),
    );
    env.verdict.check("equivocation identity", s.equivocation_identity, "exact");
    env.verdict.check("chain rule", s.chain_rule, "exact");
    if rep.regime.regime == Regime::Weak {
        env.summary.formula("alpha", latsec_core::channel::mmse_alpha(params.power, params.a, 1.0));
    }
    env.results.push(r);
    Ok(env)
}

fn loopback(grid: &[LatticeSpec], cfg: &ExperimentConfig, kind: &str, echo: IndexMap<String, String>) -> ResultEnvelope {
    let mut env = ResultEnvelope::new(kind, echo, LOOPBACK_SCHEMA);
    let selected: Vec<&LatticeSpec> = grid
        .iter()
        .filter(|s| (s.p as u128).pow(s.k as u32) <= cfg.layered_max_size as u128)
        .collect();
    let outcomes: Vec<Result<LoopbackReport, CoreError>> = selected
        .par_iter()
        .map(|s| loopback_check(s, cfg.root_seed, cfg.layered_max_size, cfg.budget))
        .collect();
    let total = selected.len();
    let errors = outcomes.iter().filter(|o| o.is_err()).count();
    let pass = outcomes.iter().filter(|o| o.as_ref().map(|l| l.passed()).unwrap_or(false)).count();
    for (s, o) in selected.iter().zip(&outcomes) {
        let mut r = lattice_record(s);
        match o {
            Ok(l) => {
                r.count("size", l.size as u128)
                    .count("pairs", l.pairs as u128)
                    .flag("weakOk", l.weak_ok)
                    .formula("veryStrongGain", l.very_strong_gain)
                    .flag("veryStrongOk", l.very_strong_ok);
                if let Some(ll) = &l.layered {
                    r.formula("layeredGain", ll.gain)
                        .count("layeredMultiple", ll.multiple as u128)
                        .count("layeredTuples", ll.tuples as u128)
                        .flag("layeredOk", ll.ok);
                }
            }
            Err(e) => {
                r.text("error", error_text(e));
            }
        }
        env.results.push(r);
    }
    env.verdict.check("configurations ran", errors == 0, format!("{errors} of {total} failed to run"));
    env.verdict.check("exact noiseless recovery", pass == total, format!("{pass} of {total} pass"));
    env.summary.count("configurations", total as u128);
    env
}
