//! Replication driver and selection/estimation metrics.

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DesignData, HyperParams, InstrumentMap, SparsityPattern};
use crate::rng::{replicate_seed, CHAIN_STREAM};
use crate::sampler::{run_chain, scad_initializer, ChainConfig, ChainResult, DEFAULT_SCAD_A};
use crate::simgen::{GroundTruth, Setup, SimScenario};

/// Median-probability model: `δ̂_j = 1` iff the inclusion probability is
/// strictly above `threshold`.
pub fn select_model(chain: &ChainResult, threshold: f64) -> Result<SparsityPattern> {
    if chain.delta_draws.is_empty() {
        return Err(Error::EmptyChain);
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold {threshold} outside (0, 1)")));
    }
    Ok(SparsityPattern::from_bits(
        chain.inclusion_prob.iter().map(|&pi| pi > threshold).collect(),
    ))
}

/// Posterior mean of the masked coefficients `δ ∘ θ`.
pub fn point_estimate(chain: &ChainResult) -> Result<DVector<f64>> {
    let draws = chain.theta_draws.as_ref().ok_or(Error::MissingThetaDraws)?;
    if draws.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut sum = DVector::zeros(chain.p());
    for d in draws {
        sum += d;
    }
    Ok(sum / draws.len() as f64)
}

/// Nearest-rank quantile of sorted values: the `⌈P·N⌉`-th order statistic.
fn nearest_rank(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    // the small offset keeps exact products such as 0.025 · 1000 on their integer rank
    let rank = (prob * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Equal-tailed interval of the masked coordinate-j draws.
pub fn credible_interval(chain: &ChainResult, j: usize, level: f64) -> Result<(f64, f64)> {
    let draws = chain.theta_draws.as_ref().ok_or(Error::MissingThetaDraws)?;
    if draws.is_empty() {
        return Err(Error::EmptyChain);
    }
    if j >= chain.p() {
        return Err(Error::dims(format!("coordinate {j} out of range for p = {}", chain.p())));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level {level} outside (0, 1)")));
    }
    let mut v: Vec<f64> = draws.iter().map(|d| d[j]).collect();
    v.sort_by(f64::total_cmp);
    Ok((
        nearest_rank(&v, (1.0 - level) / 2.0),
        nearest_rank(&v, (1.0 + level) / 2.0),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    /// Sum of squared errors over the true support.
    pub mse_s: f64,
    /// Sum of squared estimates off the support.
    pub mse_n: f64,
    pub support_size: usize,
    pub p: usize,
}

impl Metrics {
    /// `mse_s` divided by the support size.
    pub fn mse_s_per_coord(&self) -> f64 {
        self.mse_s / self.support_size.max(1) as f64
    }

    pub fn mse_n_per_coord(&self) -> f64 {
        self.mse_n / (self.p - self.support_size).max(1) as f64
    }
}

pub fn compute_metrics(
    theta_hat: &DVector<f64>,
    delta_hat: &SparsityPattern,
    truth: &GroundTruth,
) -> Result<Metrics> {
    let p = truth.theta_star.len();
    if theta_hat.len() != p || delta_hat.len() != p {
        return Err(Error::dims(format!(
            "theta_hat has {} entries, delta_hat {}, truth {p}",
            theta_hat.len(),
            delta_hat.len()
        )));
    }
    let mut in_support = vec![false; p];
    for &j in &truth.support {
        in_support[j] = true;
    }
    let mut m = Metrics {
        tp: 0,
        fp: 0,
        mse_s: 0.0,
        mse_n: 0.0,
        support_size: truth.support.len(),
        p,
    };
    for j in 0..p {
        if in_support[j] {
            m.tp += usize::from(delta_hat.get(j));
            let e = theta_hat[j] - truth.theta_star[j];
            m.mse_s += e * e;
        } else {
            m.fp += usize::from(delta_hat.get(j));
            m.mse_n += theta_hat[j] * theta_hat[j];
        }
    }
    Ok(m)
}

/// Scale on which the quasi-likelihood constant λ is stated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaScale {
    /// λ refers to the instruments as supplied, before unit-norm scaling.
    /// Since `Σ ⟨W_ℓ, r⟩² / λ = Σ ⟨w_ℓ, r⟩² s_ℓ² / λ`, the constant used with
    /// the normalized columns is `λ / mean(s_ℓ²)`, exact when all columns
    /// share one norm.
    Raw,
    /// λ is used as is with the unit-norm instruments.
    Normalized,
}

impl LambdaScale {
    pub fn as_str(&self) -> &'static str {
        match self {
            LambdaScale::Raw => "raw",
            LambdaScale::Normalized => "normalized",
        }
    }
}

/// How hyperparameters are chosen for each dataset. Unset fields fall back to
/// the defaults: slab variance `log(pq)/√n`, spike variance `10/p`, `λ = n`
/// for Setup 1 and `n^{1/3}` for Setup 2 (on the raw instrument scale),
/// `u = 1`, and the default sparsity cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperPolicy {
    pub slab_variance: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_scale: LambdaScale,
    pub u: f64,
    pub s_bar: Option<usize>,
    pub lambda_scad: f64,
    pub scad_a: f64,
    pub threshold: f64,
}

impl Default for HyperPolicy {
    fn default() -> Self {
        Self {
            slab_variance: None,
            gamma: None,
            lambda: None,
            lambda_scale: LambdaScale::Raw,
            u: 1.0,
            s_bar: None,
            lambda_scad: 1.0,
            scad_a: DEFAULT_SCAD_A,
            threshold: 0.5,
        }
    }
}

impl HyperPolicy {
    /// λ before any instrument rescaling.
    pub fn nominal_lambda(&self, setup: Setup, n: usize) -> f64 {
        let nf = n as f64;
        self.lambda.unwrap_or(match setup {
            Setup::Setup1 => nf,
            Setup::Setup2 => nf.cbrt(),
        })
    }

    pub fn resolve(&self, setup: Setup, data: &DesignData) -> HyperParams {
        let (n, p, q) = (data.n(), data.p(), data.q());
        let slab = self
            .slab_variance
            .unwrap_or_else(|| ((p * q) as f64).ln() / (n as f64).sqrt());
        let nominal = self.nominal_lambda(setup, n);
        let lambda = match self.lambda_scale {
            LambdaScale::Normalized => nominal,
            LambdaScale::Raw => {
                let s = &data.instrument_scales;
                nominal * s.len() as f64 / s.iter().map(|v| v * v).sum::<f64>()
            }
        };
        HyperParams {
            lambda,
            rho_sq: 1.0 / slab,
            gamma: self.gamma.unwrap_or(10.0 / p as f64),
            u: self.u,
            s_bar: self.s_bar.unwrap_or_else(|| HyperParams::default_s_bar(n, p)),
        }
    }
}

/// SCAD initialization followed by one chain.
pub fn fit(
    data: &DesignData,
    map: &InstrumentMap,
    hyper: &HyperParams,
    config: &ChainConfig,
    lambda_scad: f64,
    scad_a: f64,
) -> Result<ChainResult> {
    let init = scad_initializer(data, lambda_scad, scad_a);
    run_chain(data, hyper, map, config, &init.theta)
}

/// Share of recorded draws with `‖δ∘θ − θ★‖₂ ≤ outer` and, when raw draws
/// were kept, the share that also has `‖θ − δ∘θ‖₂ ≤ inner`.
pub fn ball_fractions(
    chain: &ChainResult,
    theta_star: &DVector<f64>,
    outer: f64,
    inner: f64,
) -> Result<(f64, Option<f64>)> {
    let masked = chain.theta_draws.as_ref().ok_or(Error::MissingThetaDraws)?;
    if masked.is_empty() {
        return Err(Error::EmptyChain);
    }
    if theta_star.len() != chain.p() {
        return Err(Error::dims(format!(
            "theta_star has length {}, chain has p = {}",
            theta_star.len(),
            chain.p()
        )));
    }
    let in_outer: Vec<bool> = masked.iter().map(|t| (t - theta_star).norm() <= outer).collect();
    let n = masked.len() as f64;
    let outer_frac = in_outer.iter().filter(|&&b| b).count() as f64 / n;
    let full = chain.raw_theta_draws.as_ref().map(|raw| {
        raw.iter()
            .zip(masked)
            .zip(&in_outer)
            .filter(|((r, m), &ok)| ok && (*r - *m).norm() <= inner)
            .count() as f64
            / n
    });
    Ok((outer_frac, full))
}

#[derive(Clone, Debug)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed: u64,
    pub outcome: std::result::Result<Metrics, String>,
    pub hyper: Option<HyperParams>,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 with fewer than two values.
    pub sd: f64,
}

#[derive(Clone, Debug)]
pub struct AggregateReport {
    pub scenario: SimScenario,
    pub replicates: usize,
    pub failures: usize,
    pub tp: Summary,
    pub fp: Summary,
    pub mse_s: Summary,
    pub mse_n: Summary,
    pub mse_s_per_coord: Summary,
    pub mse_n_per_coord: Summary,
    /// Hyperparameters of the first successful replicate (identical across
    /// replicates under a data-independent policy).
    pub hyper: Option<HyperParams>,
    pub records: Vec<ReplicateRecord>,
    pub wall_seconds: f64,
}

impl AggregateReport {
    pub fn seeds(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.seed).collect()
    }

    pub fn successes(&self) -> usize {
        self.replicates - self.failures
    }
}

/// Neumaier-compensated sum of the values in ascending order, so the result
/// does not depend on the order replicates finished in.
fn stable_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in v {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + comp
}

pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary {
            mean: f64::NAN,
            sd: f64::NAN,
        };
    }
    let n = values.len() as f64;
    let mean = stable_sum(values) / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (stable_sum(&sq) / (n - 1.0)).sqrt()
    };
    Summary { mean, sd }
}

fn run_one(
    scenario: &SimScenario,
    index: usize,
    chain_config: &ChainConfig,
    policy: &HyperPolicy,
) -> ReplicateRecord {
    let start = Instant::now();
    let seed = replicate_seed(scenario.seed, index as u64);
    let mut hyper_used = None;
    let outcome = (|| -> Result<Metrics> {
        let sim = SimScenario { seed, ..*scenario }.generate()?;
        let hyper = policy.resolve(scenario.setup, &sim.data);
        hyper_used = Some(hyper);
        let config = ChainConfig {
            seed,
            stream: CHAIN_STREAM,
            record_theta: true,
            ..chain_config.clone()
        };
        let chain = fit(&sim.data, &sim.map, &hyper, &config, policy.lambda_scad, policy.scad_a)?;
        let delta_hat = select_model(&chain, policy.threshold)?;
        let theta_hat = point_estimate(&chain)?;
        compute_metrics(&theta_hat, &delta_hat, &sim.truth)
    })();
    if let Err(e) = &outcome {
        log::warn!("replicate {index} (seed {seed:#018x}) failed: {e}");
    }
    ReplicateRecord {
        index,
        seed,
        outcome: outcome.map_err(|e| e.to_string()),
        hyper: hyper_used,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs `r` independent replicates concurrently and aggregates their metrics.
pub fn run_replications(
    scenario: &SimScenario,
    r: usize,
    chain_config: &ChainConfig,
    policy: &HyperPolicy,
) -> Result<AggregateReport> {
    if r < 1 {
        return Err(Error::param("need at least one replicate"));
    }
    scenario.validate()?;
    chain_config.validate()?;
    let start = Instant::now();
    let records: Vec<ReplicateRecord> = (0..r)
        .into_par_iter()
        .map(|i| run_one(scenario, i, chain_config, policy))
        .collect();
    Ok(aggregate(*scenario, records, start.elapsed().as_secs_f64()))
}

/// Reduces replicate records to means and standard deviations over successes.
pub fn aggregate(scenario: SimScenario, records: Vec<ReplicateRecord>, wall_seconds: f64) -> AggregateReport {
    let ok: Vec<&Metrics> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let col = |f: &dyn Fn(&Metrics) -> f64| summarize(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    AggregateReport {
        scenario,
        replicates: records.len(),
        failures: records.len() - ok.len(),
        tp: col(&|m| m.tp as f64),
        fp: col(&|m| m.fp as f64),
        mse_s: col(&|m| m.mse_s),
        mse_n: col(&|m| m.mse_n),
        mse_s_per_coord: col(&|m| m.mse_s_per_coord()),
        mse_n_per_coord: col(&|m| m.mse_n_per_coord()),
        hyper: records.iter().find_map(|r| r.hyper),
        records,
        wall_seconds,
    }
}
