//! Metropolis-Hastings-within-Gibbs sampler for the quasi-posterior.
//!
//! Each sweep proposes a single flip (probability `flip_mix`) or an
//! active/inactive swap for δ at fixed θ, then redraws the active block from its
//! Gaussian full conditional and the inactive coordinates from the spike prior.

mod kernel;
mod scad;

use nalgebra::DVector;

pub use kernel::{Move, MoveStats, Proposal, RefreshReport, Sampler, SamplerState, SweepOutcome, DRIFT_TOL};
pub use scad::{scad_initializer, scad_objective, scad_penalty, scad_threshold, ScadFit, DEFAULT_SCAD_A};

use crate::error::{Error, Result};
use crate::model::{DesignData, HyperParams, InstrumentMap, SparsityPattern};
use crate::rng::{stream_rng, CHAIN_STREAM, GENERATOR_ID};

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n_sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub stream: u64,
    pub refresh_every: u64,
    /// Probability of a single-flip move; the rest are swaps.
    pub flip_mix: f64,
    /// Record the masked coefficients `δ ∘ θ` for every kept draw.
    pub record_theta: bool,
    /// Also record the unmasked θ (spike draws included).
    pub record_raw_theta: bool,
    /// Keep a per-sweep move log.
    pub record_trace: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_sweeps: 10_000,
            burn_in: 5_000,
            thin: 5,
            seed: 1,
            stream: CHAIN_STREAM,
            refresh_every: 1_000,
            flip_mix: 0.5,
            record_theta: true,
            record_raw_theta: false,
            record_trace: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_sweeps {
            return Err(Error::param(format!(
                "burn_in ({}) must be smaller than n_sweeps ({})",
                self.burn_in, self.n_sweeps
            )));
        }
        if self.thin < 1 {
            return Err(Error::param("thin must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.flip_mix) {
            return Err(Error::param(format!("flip_mix {} outside [0, 1]", self.flip_mix)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Single,
    Double,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Single => "single",
            MoveKind::Double => "double",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub sweep: u64,
    pub active: usize,
    pub log_post: f64,
    pub move_kind: MoveKind,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
    pub generator: &'static str,
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    /// Post-burn-in, thinned δ draws.
    pub delta_draws: Vec<SparsityPattern>,
    /// Masked coefficient draws `δ ∘ θ`, aligned with `delta_draws`.
    pub theta_draws: Option<Vec<DVector<f64>>>,
    pub raw_theta_draws: Option<Vec<DVector<f64>>>,
    pub inclusion_prob: DVector<f64>,
    pub accept_rate_single: f64,
    pub accept_rate_double: f64,
    pub stats: MoveStats,
    /// Log density after every sweep.
    pub log_post_trace: Vec<f64>,
    pub trace: Option<Vec<TraceRow>>,
    pub seeds_used: SeedRecord,
    pub max_refresh_drift: f64,
    pub drift_warnings: usize,
    pub final_state: SamplerState,
}

impl ChainResult {
    pub fn p(&self) -> usize {
        self.inclusion_prob.len()
    }
}

fn rate(accepted: u64, proposed: u64) -> f64 {
    if proposed == 0 {
        0.0
    } else {
        accepted as f64 / proposed as f64
    }
}

/// Column means of the recorded δ draws.
pub fn inclusion_probabilities(draws: &[SparsityPattern], p: usize) -> DVector<f64> {
    let mut counts = vec![0u64; p];
    for d in draws {
        for j in d.active() {
            counts[j] += 1;
        }
    }
    let m = draws.len().max(1) as f64;
    DVector::from_iterator(p, counts.into_iter().map(|c| c as f64 / m))
}

/// Runs `n_sweeps` sweeps from the support of `theta0` and collects the
/// post-burn-in draws.
pub fn run_chain(
    data: &DesignData,
    hyper: &HyperParams,
    map: &InstrumentMap,
    config: &ChainConfig,
    theta0: &DVector<f64>,
) -> Result<ChainResult> {
    config.validate()?;
    let sampler = Sampler::new(data, *hyper, map)?;
    let mut rng = stream_rng(config.seed, config.stream);
    let mut state = sampler.init_state(theta0)?;
    let p = data.p();

    let kept = ((config.n_sweeps - config.burn_in) / config.thin) as usize;
    let mut delta_draws = Vec::with_capacity(kept);
    let mut theta_draws = config.record_theta.then(|| Vec::with_capacity(kept));
    let mut raw_theta_draws = config.record_raw_theta.then(|| Vec::with_capacity(kept));
    let mut trace = config.record_trace.then(|| Vec::with_capacity(config.n_sweeps as usize));
    let mut log_post_trace = Vec::with_capacity(config.n_sweeps as usize);
    let mut max_drift: f64 = 0.0;
    let mut warnings = 0;

    for _ in 0..config.n_sweeps {
        let outcome = sampler.sweep(&mut state, config.flip_mix, config.refresh_every, &mut rng)?;
        if let Some(report) = outcome.refresh {
            max_drift = max_drift.max(report.max_drift());
            warnings += usize::from(report.warned);
        }
        let sweep = state.sweep_index;
        log_post_trace.push(state.log_post);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                sweep,
                active: state.delta.count(),
                log_post: state.log_post,
                move_kind: if outcome.mv.is_single() {
                    MoveKind::Single
                } else {
                    MoveKind::Double
                },
                accepted: outcome.accepted,
            });
        }
        if sweep > config.burn_in && (sweep - config.burn_in).is_multiple_of(config.thin) {
            if let Some(d) = theta_draws.as_mut() {
                d.push(crate::model::masked_theta(&state.delta, &state.theta));
            }
            if let Some(d) = raw_theta_draws.as_mut() {
                d.push(state.theta.clone());
            }
            delta_draws.push(state.delta.clone());
        }
    }

    let inclusion_prob = inclusion_probabilities(&delta_draws, p);
    let stats = state.stats;
    Ok(ChainResult {
        delta_draws,
        theta_draws,
        raw_theta_draws,
        inclusion_prob,
        accept_rate_single: rate(stats.single_accepted, stats.single_proposed),
        accept_rate_double: rate(stats.double_accepted, stats.double_proposed),
        stats,
        log_post_trace,
        trace,
        seeds_used: SeedRecord {
            seed: config.seed,
            stream: config.stream,
            generator: GENERATOR_ID,
        },
        max_refresh_drift: max_drift,
        drift_warnings: warnings,
        final_state: state,
    })
}
