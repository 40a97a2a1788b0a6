//! Monte Carlo link simulator used as ground truth for the analytic model.
//!
//! Each trial draws unit-mean exponential gains for the serving link and
//! every interferer at every antenna, forms the per-antenna SIRs, combines
//! them (maximum for SC, sum for MRC) and records an error.
//!
//! # Reproducibility
//!
//! Trials are cut into consecutive blocks of [`BLOCK_TRIALS`]. Block `b`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `b`, so
//! each block has its own independent substream. Blocks are summed in
//! index order, which makes a report a function of the spec alone: the
//! `workers` setting only sizes the thread pool.

use crate::error::{Error, Result};
use crate::finite_blocklength::fb_error_conditional;
use crate::rate_control::{threshold, Scheme};
use crate::sir_model::{SirDistribution, TopologyFile};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// Error iff the combined SIR is below `2^(k/n) - 1`.
    Asymptotic,
    /// Error drawn with the normal-approximation probability at the combined SIR.
    FiniteBlocklength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub topology: TopologyFile,
    pub antennas: u32,
    pub scheme: Scheme,
    pub threshold_bits: u64,
    pub blocklength: u32,
    pub semantics: Semantics,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Error level the run is meant to resolve; enables the trial-count check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_target: Option<f64>,
    #[serde(default)]
    pub allow_underpowered: bool,
    /// Average the conditional error probability instead of drawing Bernoulli errors.
    #[serde(default)]
    pub variance_reduced: bool,
}

fn default_workers() -> usize {
    1
}

impl SimSpec {
    pub fn validate(&self) -> Result<SirDistribution> {
        let dist = self.topology.sir_distribution()?;
        if self.antennas == 0 {
            return Err(Error::InvalidConfig("antenna count must be at least 1".into()));
        }
        if self.blocklength == 0 {
            return Err(Error::InvalidConfig("blocklength must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if self.variance_reduced && self.semantics != Semantics::FiniteBlocklength {
            return Err(Error::InvalidConfig(
                "variance-reduced estimation applies to finite-blocklength semantics only".into(),
            ));
        }
        if let Some(eps) = self.eps_target {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidConfig(format!("eps_target must lie in (0, 1), got {eps}")));
            }
            let required = (30.0 / eps).ceil() as u64;
            if self.trials < required && !self.allow_underpowered {
                return Err(Error::Underpowered {
                    trials: self.trials,
                    target: eps,
                    required,
                });
            }
        }
        Ok(dist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Bernoulli,
    ConditionalMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub errors: u64,
    pub epsilon_hat: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub estimator: Estimator,
    /// Wall-clock time; left out of the serialized record so it stays byte-stable.
    #[serde(skip)]
    pub elapsed: f64,
}

impl SimReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci95.0 <= p && p <= self.ci95.1
    }
}

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes; keep rounding from nudging them
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub fn wilson95(errors: u64, trials: u64) -> (f64, f64) {
    wilson_interval(errors, trials, Z95)
}

#[inline]
fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

/// Fills `out` with one SIR per antenna: `h_i / Σ_j g_{j,i} c_j`.
pub fn sample_sir<R: Rng + ?Sized>(ratios: &[f64], rng: &mut R, out: &mut [f64]) {
    for sir in out.iter_mut() {
        let h = unit_exponential(rng);
        let interference: f64 = ratios.iter().map(|c| c * unit_exponential(rng)).sum();
        *sir = h / interference;
    }
}

pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

#[derive(Default, Clone, Copy)]
struct Tally {
    errors: u64,
    sum: f64,
    sum_sq: f64,
}

fn run_block(spec: &SimSpec, ratios: &[f64], block: u64) -> Tally {
    let start = block * BLOCK_TRIALS;
    let count = BLOCK_TRIALS.min(spec.trials - start);
    let mut rng = block_rng(spec.seed, block);
    let mut sirs = vec![0.0; spec.antennas as usize];
    let theta = threshold(spec.threshold_bits as f64, spec.blocklength);
    let mut tally = Tally::default();
    for _ in 0..count {
        sample_sir(ratios, &mut rng, &mut sirs);
        let combined = match spec.scheme {
            Scheme::Sc => sirs.iter().copied().fold(0.0, f64::max),
            Scheme::Mrc => sirs.iter().sum(),
        };
        match spec.semantics {
            Semantics::Asymptotic => {
                if combined < theta {
                    tally.errors += 1;
                }
            }
            Semantics::FiniteBlocklength => {
                let p = fb_error_conditional(combined, spec.threshold_bits, spec.blocklength);
                if spec.variance_reduced {
                    tally.sum += p;
                    tally.sum_sq += p * p;
                } else if rng.random::<f64>() < p {
                    tally.errors += 1;
                }
            }
        }
    }
    tally
}

/// Runs the simulation described by `spec`.
pub fn run_sim(spec: &SimSpec) -> Result<SimReport> {
    let dist = spec.validate()?;
    let ratios = dist.ratios().ok_or(Error::MissingTopology)?.to_vec();
    let started = Instant::now();
    let blocks = spec.trials.div_ceil(BLOCK_TRIALS);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let tallies: Vec<Tally> = pool.install(|| (0..blocks).into_par_iter().map(|b| run_block(spec, &ratios, b)).collect());

    let n = spec.trials as f64;
    let report = if spec.variance_reduced {
        let (sum, sum_sq) = tallies.iter().fold((0.0, 0.0), |(s, q), t| (s + t.sum, q + t.sum_sq));
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let half = Z95 * (var / n).sqrt();
        SimReport {
            trials: spec.trials,
            errors: sum.round() as u64,
            epsilon_hat: mean,
            ci95: ((mean - half).max(0.0), (mean + half).min(1.0)),
            seed: spec.seed,
            estimator: Estimator::ConditionalMean,
            elapsed: 0.0,
        }
    } else {
        let errors: u64 = tallies.iter().map(|t| t.errors).sum();
        SimReport {
            trials: spec.trials,
            errors,
            epsilon_hat: errors as f64 / n,
            ci95: wilson95(errors, spec.trials),
            seed: spec.seed,
            estimator: Estimator::Bernoulli,
            elapsed: 0.0,
        }
    };
    Ok(SimReport {
        elapsed: started.elapsed().as_secs_f64(),
        ..report
    })
}
