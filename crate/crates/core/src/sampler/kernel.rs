use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{
    self, log_normal_density, log_prior_sparsity, log_prior_sparsity_count, DesignData, HyperParams, InstrumentMap,
    SparsityPattern,
};

/// Tolerance above which a cache refresh logs a drift warning.
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct LogParts {
    pub sparsity: f64,
    pub lik: f64,
    pub coef: f64,
}

impl LogParts {
    fn total(&self) -> f64 {
        self.sparsity + self.lik + self.coef
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub single_proposed: u64,
    pub single_accepted: u64,
    pub double_proposed: u64,
    pub double_accepted: u64,
}

/// Current `(δ, θ)` with the incremental caches the moves rely on.
///
/// The public cache fields may be inspected freely; writing to them directly
/// leaves the state inconsistent until [`Sampler::refresh_caches`] runs.
#[derive(Clone, Debug)]
pub struct SamplerState {
    pub delta: SparsityPattern,
    pub theta: DVector<f64>,
    /// `y − X θ_δ`.
    pub residual: DVector<f64>,
    /// `⟨w_ℓ, residual⟩` for every instrument.
    pub scores: DVector<f64>,
    pub log_post: f64,
    pub sweep_index: u64,
    pub stats: MoveStats,
    /// Number of active groups containing each instrument; `ℓ ∈ T(δ)` iff positive.
    coverage: Vec<u32>,
    parts: LogParts,
}

impl SamplerState {
    pub fn in_instrument_set(&self, l: usize) -> bool {
        self.coverage[l] > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Single { j: usize },
    /// Deactivate `off`, activate `on`.
    Double { off: usize, on: usize },
}

impl Move {
    pub fn is_single(&self) -> bool {
        matches!(self, Move::Single { .. })
    }
}

/// A proposed flip with the caches it would produce if accepted.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub mv: Move,
    scores: Option<DVector<f64>>,
    parts: LogParts,
}

/// Outcome of a from-scratch cache recomputation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RefreshReport {
    pub residual_drift: f64,
    pub score_drift: f64,
    pub log_post_drift: f64,
    pub warned: bool,
}

impl RefreshReport {
    pub fn max_drift(&self) -> f64 {
        self.residual_drift.max(self.score_drift).max(self.log_post_drift)
    }
}

/// Metropolis-Hastings-within-Gibbs kernel for one dataset.
///
/// Holds `W'y` and `W'X` so a flip touching regressor j updates every score in
/// O(q) from column j of `W'X`, and the active-block precision is assembled
/// without touching the n rows.
pub struct Sampler<'a> {
    data: &'a DesignData,
    map: &'a InstrumentMap,
    hyper: HyperParams,
    wty: DVector<f64>,
    wtx: DMatrix<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(data: &'a DesignData, hyper: HyperParams, map: &'a InstrumentMap) -> Result<Self> {
        map.check_against(data)?;
        hyper.validate(data.p())?;
        let wty = data.w.transpose() * &data.y;
        let wtx = data.w.transpose() * &data.x;
        Ok(Self {
            data,
            map,
            hyper,
            wty,
            wtx,
        })
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn data(&self) -> &DesignData {
        self.data
    }

    pub fn map(&self) -> &InstrumentMap {
        self.map
    }

    fn p(&self) -> usize {
        self.data.p()
    }

    fn log_lik_from(&self, scores: &DVector<f64>, coverage: &[u32]) -> f64 {
        let sum: f64 = scores
            .iter()
            .zip(coverage)
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| s * s)
            .sum();
        -0.5 * sum / self.hyper.lambda
    }

    fn log_coef_term(&self, t: f64, active: bool) -> f64 {
        if active {
            log_normal_density(t, 1.0 / self.hyper.rho_sq)
        } else {
            log_normal_density(t, self.hyper.gamma)
        }
    }

    fn log_coef_from(&self, delta: &SparsityPattern, theta: &DVector<f64>) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(j, &t)| self.log_coef_term(t, delta.get(j)))
            .sum()
    }

    fn coverage_of(&self, delta: &SparsityPattern) -> Vec<u32> {
        let mut cov = vec![0u32; self.map.q()];
        for j in delta.active() {
            for &l in self.map.group(j) {
                cov[l] += 1;
            }
        }
        cov
    }

    fn build_state(&self, delta: SparsityPattern, theta: DVector<f64>) -> SamplerState {
        let residual = model::residual(self.data, &delta, &theta);
        let scores = self.data.w.transpose() * &residual;
        let coverage = self.coverage_of(&delta);
        let parts = LogParts {
            sparsity: log_prior_sparsity(&delta, &self.hyper, self.p()),
            lik: self.log_lik_from(&scores, &coverage),
            coef: self.log_coef_from(&delta, &theta),
        };
        SamplerState {
            delta,
            theta,
            residual,
            scores,
            log_post: parts.total(),
            sweep_index: 0,
            stats: MoveStats::default(),
            coverage,
            parts,
        }
    }

    /// Starts from the support of `theta0`, keeping only the s̄ largest
    /// magnitudes when the support is too large.
    pub fn init_state(&self, theta0: &DVector<f64>) -> Result<SamplerState> {
        let p = self.p();
        if theta0.len() != p {
            return Err(Error::dims(format!("theta0 has length {} but p = {p}", theta0.len())));
        }
        let mut support: Vec<usize> = (0..p).filter(|&j| theta0[j] != 0.0).collect();
        if support.len() > self.hyper.s_bar {
            support.sort_by(|&a, &b| theta0[b].abs().total_cmp(&theta0[a].abs()).then(a.cmp(&b)));
            support.truncate(self.hyper.s_bar);
        }
        let delta = SparsityPattern::from_indices(p, &support);
        let theta = DVector::from_fn(p, |j, _| if delta.get(j) { theta0[j] } else { 0.0 });
        Ok(self.build_state(delta, theta))
    }

    fn evaluate(&self, state: &SamplerState, mv: Move) -> (Proposal, f64) {
        let theta = &state.theta;
        let mut coverage = state.coverage.clone();
        let mut scores = state.scores.clone();
        let mut parts = state.parts;
        let mut toggle = |j: usize, on: bool, scores: &mut DVector<f64>, parts: &mut LogParts| {
            let sign = if on { -1.0 } else { 1.0 };
            scores.axpy(sign * theta[j], &self.wtx.column(j), 1.0);
            for &l in self.map.group(j) {
                if on {
                    coverage[l] += 1;
                } else {
                    coverage[l] -= 1;
                }
            }
            parts.coef += self.log_coef_term(theta[j], on) - self.log_coef_term(theta[j], !on);
        };
        let new_count = match mv {
            Move::Single { j } => {
                let on = !state.delta.get(j);
                if on && state.delta.count() + 1 > self.hyper.s_bar {
                    let parts = LogParts {
                        sparsity: f64::NEG_INFINITY,
                        ..state.parts
                    };
                    return (
                        Proposal {
                            mv,
                            scores: None,
                            parts,
                        },
                        f64::NEG_INFINITY,
                    );
                }
                toggle(j, on, &mut scores, &mut parts);
                if on {
                    state.delta.count() + 1
                } else {
                    state.delta.count() - 1
                }
            }
            Move::Double { off, on } => {
                toggle(off, false, &mut scores, &mut parts);
                toggle(on, true, &mut scores, &mut parts);
                state.delta.count()
            }
        };
        parts.sparsity = log_prior_sparsity_count(new_count, &self.hyper, self.p());
        parts.lik = self.log_lik_from(&scores, &coverage);
        let log_ratio = (parts.sparsity - state.parts.sparsity)
            + (parts.lik - state.parts.lik)
            + (parts.coef - state.parts.coef);
        (
            Proposal {
                mv,
                scores: Some(scores),
                parts,
            },
            log_ratio,
        )
    }

    /// Toggles a uniformly chosen coordinate at fixed θ.
    pub fn propose_single_flip<R: Rng + ?Sized>(&self, state: &SamplerState, rng: &mut R) -> (Proposal, f64) {
        let j = rng.random_range(0..self.p());
        self.evaluate(state, Move::Single { j })
    }

    /// Swaps a uniformly chosen active coordinate with a uniformly chosen
    /// inactive one. Falls back to a single flip when either set is empty.
    pub fn propose_double_flip<R: Rng + ?Sized>(&self, state: &SamplerState, rng: &mut R) -> (Proposal, f64) {
        let k = state.delta.count();
        if k == 0 || k == self.p() {
            return self.propose_single_flip(state, rng);
        }
        let a = rng.random_range(0..k);
        let b = rng.random_range(0..self.p() - k);
        let off = state.delta.active().nth(a).expect("active index in range");
        let on = state.delta.inactive().nth(b).expect("inactive index in range");
        self.evaluate(state, Move::Double { off, on })
    }

    /// Log ratio of an arbitrary move at the current state.
    pub fn log_ratio(&self, state: &SamplerState, mv: Move) -> f64 {
        self.evaluate(state, mv).1
    }

    /// Metropolis accept/reject; returns whether the move was taken.
    pub fn accept_reject<R: Rng + ?Sized>(
        &self,
        state: &mut SamplerState,
        proposal: Proposal,
        log_ratio: f64,
        rng: &mut R,
    ) -> bool {
        let u: f64 = rng.random();
        let accept = u < log_ratio.exp();
        match proposal.mv {
            Move::Single { .. } => state.stats.single_proposed += 1,
            Move::Double { .. } => state.stats.double_proposed += 1,
        }
        if !accept {
            return false;
        }
        match proposal.mv {
            Move::Single { .. } => state.stats.single_accepted += 1,
            Move::Double { .. } => state.stats.double_accepted += 1,
        }
        self.apply(state, proposal);
        true
    }

    fn apply(&self, state: &mut SamplerState, proposal: Proposal) {
        let flip = |state: &mut SamplerState, j: usize| {
            let on = !state.delta.get(j);
            let sign = if on { -1.0 } else { 1.0 };
            state.residual.axpy(sign * state.theta[j], &self.data.x.column(j), 1.0);
            for &l in self.map.group(j) {
                if on {
                    state.coverage[l] += 1;
                } else {
                    state.coverage[l] -= 1;
                }
            }
            state.delta.set(j, on);
        };
        match proposal.mv {
            Move::Single { j } => flip(state, j),
            Move::Double { off, on } => {
                flip(state, off);
                flip(state, on);
            }
        }
        state.scores = proposal.scores.expect("accepted proposal carries scores");
        state.parts = proposal.parts;
        state.log_post = state.parts.total();
    }

    /// Gaussian precision and linear term of the active block:
    /// `A = (1/λ) M'M + ρ² I`, `b = (1/λ) M' W'_T y`, `M = W'_T X_δ`.
    pub fn active_precision(&self, state: &SamplerState) -> (Vec<usize>, DMatrix<f64>, DVector<f64>) {
        let active = state.delta.active_indices();
        let k = active.len();
        let mut a = DMatrix::zeros(k, k);
        let mut b = DVector::zeros(k);
        let mut row = DVector::zeros(k);
        let inv_lambda = 1.0 / self.hyper.lambda;
        for l in (0..self.map.q()).filter(|&l| state.coverage[l] > 0) {
            for (c, &j) in active.iter().enumerate() {
                row[c] = self.wtx[(l, j)];
            }
            a.ger(inv_lambda, &row, &row, 1.0);
            b.axpy(inv_lambda * self.wty[l], &row, 1.0);
        }
        for c in 0..k {
            a[(c, c)] += self.hyper.rho_sq;
        }
        (active, a, b)
    }

    /// Draws `θ_δ` from its Gaussian full conditional `N(A⁻¹b, A⁻¹)` and rebuilds
    /// residual, scores and log density for the new values.
    pub fn draw_active_coefficients<R: Rng + ?Sized>(&self, state: &mut SamplerState, rng: &mut R) -> Result<()> {
        if state.delta.count() == 0 {
            return Ok(());
        }
        let (active, a, b) = self.active_precision(state);
        let chol = a.cholesky().ok_or_else(|| {
            Error::SingularSystem("active-block precision is not positive definite".into())
        })?;
        let mean = chol.solve(&b);
        let z = DVector::from_fn(active.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise = chol
            .l()
            .tr_solve_lower_triangular(&z)
            .ok_or_else(|| Error::SingularSystem("zero pivot in Cholesky factor".into()))?;
        let draw = mean + noise;
        for (c, &j) in active.iter().enumerate() {
            state.theta[j] = draw[c];
        }

        let mut residual = self.data.y.clone();
        let mut scores = self.wty.clone();
        for &j in &active {
            residual.axpy(-state.theta[j], &self.data.x.column(j), 1.0);
            scores.axpy(-state.theta[j], &self.wtx.column(j), 1.0);
        }
        state.residual = residual;
        state.scores = scores;
        state.parts.lik = self.log_lik_from(&state.scores, &state.coverage);
        state.parts.coef = self.log_coef_from(&state.delta, &state.theta);
        state.log_post = state.parts.total();
        Ok(())
    }

    /// Redraws every inactive coordinate from its prior `N(0, γ)`. The
    /// residual does not depend on these coordinates.
    pub fn draw_inactive_coefficients<R: Rng + ?Sized>(&self, state: &mut SamplerState, rng: &mut R) {
        let sd = self.hyper.gamma.sqrt();
        for j in 0..self.p() {
            if !state.delta.get(j) {
                state.theta[j] = sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        state.parts.coef = self.log_coef_from(&state.delta, &state.theta);
        state.log_post = state.parts.total();
    }

    /// Recomputes residual, scores and log density from the raw data and
    /// repairs the state, reporting how far the caches had drifted.
    pub fn refresh_caches(&self, state: &mut SamplerState) -> RefreshReport {
        let residual = model::residual(self.data, &state.delta, &state.theta);
        let scores = self.data.w.transpose() * &residual;
        let log_post = model::log_posterior_unnormalized(
            self.data,
            &state.delta,
            &state.theta,
            &self.hyper,
            self.map,
        )
        .expect("state dimensions are fixed at construction");
        let coverage = self.coverage_of(&state.delta);
        let drift = |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax();
        let mut report = RefreshReport {
            residual_drift: drift(&state.residual, &residual),
            score_drift: drift(&state.scores, &scores),
            log_post_drift: (state.log_post - log_post).abs(),
            warned: false,
        };
        if coverage != state.coverage {
            report.score_drift = f64::INFINITY;
        }
        if report.max_drift().is_nan() || report.max_drift() > DRIFT_TOL {
            report.warned = true;
            log::warn!(
                "cache drift at sweep {}: residual {:e}, scores {:e}, log_post {:e}",
                state.sweep_index,
                report.residual_drift,
                report.score_drift,
                report.log_post_drift
            );
        }
        state.residual = residual;
        state.scores = scores;
        state.coverage = coverage;
        state.parts = LogParts {
            sparsity: log_prior_sparsity(&state.delta, &self.hyper, self.p()),
            lik: self.log_lik_from(&state.scores, &state.coverage),
            coef: self.log_coef_from(&state.delta, &state.theta),
        };
        state.log_post = log_post;
        report
    }

    /// Probability that a sweep at a pattern with `k` active coordinates
    /// proposes a single flip. Swaps are impossible at `k = 0` and `k = p`, so
    /// their share falls back to single flips there; the sweep divides by this
    /// weight in the acceptance ratio to keep the δ-move reversible.
    pub fn single_flip_weight(&self, k: usize, flip_mix: f64) -> f64 {
        if k == 0 || k == self.p() {
            1.0
        } else {
            flip_mix
        }
    }

    /// One Gibbs cycle: δ-move, accept/reject, active block, inactive block.
    pub fn sweep<R: Rng + ?Sized>(
        &self,
        state: &mut SamplerState,
        flip_mix: f64,
        refresh_every: u64,
        rng: &mut R,
    ) -> Result<SweepOutcome> {
        let u: f64 = rng.random();
        let (proposal, log_ratio) = if u < flip_mix {
            self.propose_single_flip(state, rng)
        } else {
            self.propose_double_flip(state, rng)
        };
        let mv = proposal.mv;
        let log_ratio = match mv {
            Move::Single { j } => {
                let k = state.delta.count();
                let k_new = if state.delta.get(j) { k - 1 } else { k + 1 };
                log_ratio + (self.single_flip_weight(k_new, flip_mix) / self.single_flip_weight(k, flip_mix)).ln()
            }
            Move::Double { .. } => log_ratio,
        };
        let accepted = self.accept_reject(state, proposal, log_ratio, rng);
        self.draw_active_coefficients(state, rng)?;
        self.draw_inactive_coefficients(state, rng);
        state.sweep_index += 1;
        let refresh = if refresh_every > 0 && state.sweep_index.is_multiple_of(refresh_every) {
            Some(self.refresh_caches(state))
        } else {
            None
        };
        Ok(SweepOutcome {
            mv,
            accepted,
            refresh,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOutcome {
    pub mv: Move,
    pub accepted: bool,
    pub refresh: Option<RefreshReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_posterior_unnormalized, normalize_instruments};
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    fn instance(n: usize, p: usize, seed: u64) -> (DesignData, InstrumentMap) {
        let mut rng = stream_rng(seed, 7);
        let w = DMatrix::from_fn(n, 2 * p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = DMatrix::from_fn(n, p, |i, j| {
            w[(i, j)] + 0.5 * w[(i, p + j)] + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let beta = DVector::from_fn(p, |j, _| if j < 3 { 1.0 + j as f64 } else { 0.0 });
        let y = &x * beta + DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let data = normalize_instruments(DesignData::new(y, x, w).unwrap()).unwrap();
        (data, InstrumentMap::paired(p))
    }

    fn hyper(s_bar: usize) -> HyperParams {
        HyperParams {
            lambda: 2.0,
            rho_sq: 0.5,
            gamma: 0.05,
            u: 0.5,
            s_bar,
        }
    }

    fn random_theta(p: usize, seed: u64) -> DVector<f64> {
        let mut rng = stream_rng(seed, 9);
        DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn full(s: &Sampler, delta: &SparsityPattern, theta: &DVector<f64>) -> f64 {
        log_posterior_unnormalized(s.data, delta, theta, &s.hyper, s.map).unwrap()
    }

    fn moved(delta: &SparsityPattern, mv: Move) -> SparsityPattern {
        let mut d = delta.clone();
        match mv {
            Move::Single { j } => d.flip(j),
            Move::Double { off, on } => {
                d.flip(off);
                d.flip(on);
            }
        }
        d
    }

    #[test]
    fn init_truncates_to_largest_magnitudes() {
        let (data, map) = instance(20, 10, 1);
        let s = Sampler::new(&data, hyper(5), &map).unwrap();
        let theta0 = DVector::from_vec(vec![0.1, -3.0, 0.0, 2.0, -0.5, 0.0, 4.0, 0.2, 1.0, 0.0]);
        let st = s.init_state(&theta0).unwrap();
        assert_eq!(st.delta.active_indices(), vec![1, 3, 4, 6, 8]);
        let st0 = s.init_state(&DVector::zeros(10)).unwrap();
        assert_eq!(st0.delta.count(), 0);
        assert_eq!(st0.residual, data.y);
        assert!(st0.log_post.is_finite());
    }

    #[test]
    fn init_caches_match_refresh_exactly() {
        let (data, map) = instance(30, 8, 2);
        let s = Sampler::new(&data, hyper(8), &map).unwrap();
        let mut st = s.init_state(&random_theta(8, 3)).unwrap();
        let report = s.refresh_caches(&mut st);
        assert_eq!(report.residual_drift, 0.0);
        assert_eq!(report.score_drift, 0.0);
        assert!(report.log_post_drift < 1e-12);
        assert!(!report.warned);
    }

    #[test]
    fn zero_coefficient_flip_touches_only_prior_and_new_instruments() {
        let (data, map) = instance(30, 8, 4);
        let h = hyper(8);
        let s = Sampler::new(&data, h, &map).unwrap();
        let mut theta0 = DVector::zeros(8);
        theta0[0] = 1.0;
        theta0[1] = -0.5;
        let st = s.init_state(&theta0).unwrap();
        let j = 5;
        assert_eq!(st.theta[j], 0.0);
        let q = h.q_prior(8);
        let new_instr: f64 = map
            .group(j)
            .iter()
            .filter(|&&l| !st.in_instrument_set(l))
            .map(|&l| st.scores[l] * st.scores[l])
            .sum();
        let expected = (q / (1.0 - q)).ln() + log_normal_density(0.0, 1.0 / h.rho_sq)
            - log_normal_density(0.0, h.gamma)
            - 0.5 * new_instr / h.lambda;
        assert_abs_diff_eq!(s.log_ratio(&st, Move::Single { j }), expected, epsilon = 1e-10);
    }

    #[test]
    fn incremental_ratios_match_full_recomputation() {
        let (data, map) = instance(40, 12, 5);
        let s = Sampler::new(&data, hyper(6), &map).unwrap();
        let mut rng = stream_rng(11, 1);
        let mut st = s.init_state(&random_theta(12, 6)).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..2000 {
            let (prop, lr) = if i % 2 == 0 {
                s.propose_single_flip(&st, &mut rng)
            } else {
                s.propose_double_flip(&st, &mut rng)
            };
            let target = moved(&st.delta, prop.mv);
            let oracle = full(&s, &target, &st.theta) - full(&s, &st.delta, &st.theta);
            if oracle.is_finite() {
                worst = worst.max((lr - oracle).abs());
            } else {
                assert_eq!(lr, f64::NEG_INFINITY);
            }
            // accept every admissible move so the walk covers many patterns
            if lr.is_finite() {
                s.accept_reject(&mut st, prop, 0.0, &mut rng);
                assert!((st.log_post - full(&s, &st.delta, &st.theta)).abs() < 1e-8);
            }
            if i % 50 == 0 {
                s.draw_active_coefficients(&mut st, &mut rng).unwrap();
                s.draw_inactive_coefficients(&mut st, &mut rng);
            }
            assert!(st.delta.count() <= 6);
        }
        assert!(worst < 1e-8, "worst deviation {worst}");
    }

    #[test]
    fn exceeding_s_bar_is_impossible() {
        let (data, map) = instance(20, 6, 7);
        let s = Sampler::new(&data, hyper(2), &map).unwrap();
        let mut theta0 = DVector::zeros(6);
        theta0[0] = 1.0;
        theta0[1] = 1.0;
        let mut st = s.init_state(&theta0).unwrap();
        assert_eq!(s.log_ratio(&st, Move::Single { j: 4 }), f64::NEG_INFINITY);
        let mut rng = stream_rng(1, 1);
        let (prop, lr) = s.evaluate(&st, Move::Single { j: 4 });
        for _ in 0..100 {
            assert!(!s.accept_reject(&mut st, prop.clone(), lr, &mut rng));
        }
        assert_eq!(st.delta.count(), 2);
    }

    #[test]
    fn swap_of_identical_columns_is_neutral() {
        let (mut data, _) = instance(25, 6, 8);
        let col = data.x.column(1).into_owned();
        data.x.set_column(4, &col);
        // both regressors share one group
        let mut groups: Vec<Vec<usize>> = (0..6).map(|j| vec![j, 6 + j]).collect();
        groups[4] = groups[1].clone();
        let map = InstrumentMap::new(groups, 12).unwrap();
        let s = Sampler::new(&data, hyper(6), &map).unwrap();
        let mut theta0 = DVector::zeros(6);
        theta0[0] = 0.7;
        theta0[1] = 1.3;
        let mut st = s.init_state(&theta0).unwrap();
        st.theta[4] = 1.3;
        s.refresh_caches(&mut st);
        assert_abs_diff_eq!(s.log_ratio(&st, Move::Double { off: 1, on: 4 }), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn ratios_are_antisymmetric() {
        let (data, map) = instance(30, 10, 9);
        let s = Sampler::new(&data, hyper(10), &map).unwrap();
        let mut rng = stream_rng(2, 1);
        let st = s.init_state(&random_theta(10, 10).map(|v| if v.abs() > 0.6 { v } else { 0.0 })).unwrap();
        for _ in 0..300 {
            let (prop, lr) = if rng.random::<bool>() {
                s.propose_single_flip(&st, &mut rng)
            } else {
                s.propose_double_flip(&st, &mut rng)
            };
            let mut next = st.clone();
            s.accept_reject(&mut next, prop.clone(), 0.0, &mut rng);
            let back = match prop.mv {
                Move::Single { j } => Move::Single { j },
                Move::Double { off, on } => Move::Double { off: on, on: off },
            };
            assert_abs_diff_eq!(s.log_ratio(&next, back), -lr, epsilon = 1e-9);
        }
    }

    #[test]
    fn acceptance_frequency_matches_probability() {
        let (data, map) = instance(10, 4, 10);
        let s = Sampler::new(&data, hyper(4), &map).unwrap();
        let st = s.init_state(&DVector::zeros(4)).unwrap();
        let (prop, _) = s.evaluate(&st, Move::Single { j: 0 });
        let mut rng = stream_rng(3, 1);
        let trials = 100_000;
        let mut hits = 0;
        for _ in 0..trials {
            let mut tmp = st.clone();
            hits += usize::from(s.accept_reject(&mut tmp, prop.clone(), 0.3f64.ln(), &mut rng));
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.3).abs() <= 0.006, "frequency {freq}");
        let mut tmp = st.clone();
        assert!(s.accept_reject(&mut tmp, prop.clone(), 0.0, &mut rng));
        let mut tmp = st.clone();
        assert!(!s.accept_reject(&mut tmp, prop, f64::NEG_INFINITY, &mut rng));
    }

    #[test]
    fn scalar_conditional_matches_closed_form() {
        let (data, map) = instance(30, 5, 11);
        let h = hyper(5);
        let s = Sampler::new(&data, h, &map).unwrap();
        let mut theta0 = DVector::zeros(5);
        theta0[2] = 1.0;
        let st = s.init_state(&theta0).unwrap();
        let (_, a, b) = s.active_precision(&st);
        // one regressor, two instruments: a = Σ ⟨w, x⟩², b = Σ ⟨w, x⟩⟨w, y⟩
        let (mut c, mut d) = (0.0, 0.0);
        for &l in map.group(2) {
            let wx = data.w.column(l).dot(&data.x.column(2));
            c += wx * wx;
            d += wx * data.w.column(l).dot(&data.y);
        }
        assert_abs_diff_eq!(a[(0, 0)], c / h.lambda + h.rho_sq, epsilon = 1e-10);
        assert_abs_diff_eq!(b[0], d / h.lambda, epsilon = 1e-10);
        assert_abs_diff_eq!(b[0] / a[(0, 0)], d / (c + h.lambda * h.rho_sq), epsilon = 1e-10);
    }

    #[test]
    fn weak_data_term_leaves_the_slab_prior() {
        let (data, map) = instance(20, 4, 12);
        let h = HyperParams {
            lambda: 1e12,
            ..hyper(4)
        };
        let s = Sampler::new(&data, h, &map).unwrap();
        let mut st = s.init_state(&DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
        let mut rng = stream_rng(4, 1);
        let n = 40_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            s.draw_active_coefficients(&mut st, &mut rng).unwrap();
            m1 += st.theta[0];
            m2 += st.theta[0] * st.theta[0];
        }
        let var = m2 / n as f64 - (m1 / n as f64).powi(2);
        let slab = 1.0 / h.rho_sq;
        // SE of a sample variance is about var·√(2/n)
        assert!((var - slab).abs() < 4.0 * slab * (2.0 / n as f64).sqrt(), "variance {var}");
    }

    #[test]
    fn inactive_draws_have_spike_variance_and_leave_residual() {
        let (data, map) = instance(20, 6, 13);
        let h = hyper(6);
        let s = Sampler::new(&data, h, &map).unwrap();
        let mut st = s.init_state(&DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0, 2.0])).unwrap();
        let mut rng = stream_rng(5, 1);
        let before = st.residual.clone();
        let scores = st.scores.clone();
        let n = 25_000;
        let mut ss = 0.0;
        for _ in 0..n {
            s.draw_inactive_coefficients(&mut st, &mut rng);
            for j in 1..5 {
                ss += st.theta[j] * st.theta[j];
            }
        }
        assert_eq!(st.residual, before);
        assert_eq!(st.scores, scores);
        assert_eq!(st.theta[0], 1.0);
        let var = ss / (4 * n) as f64;
        let se = h.gamma * (2.0 / (4 * n) as f64).sqrt();
        assert!((var - h.gamma).abs() < 4.0 * se, "variance {var}");
        assert!((st.log_post - full(&s, &st.delta, &st.theta)).abs() < 1e-9);
    }

    #[test]
    fn tiny_spike_collapses_inactive_draws() {
        let (data, map) = instance(20, 4, 14);
        let h = HyperParams {
            gamma: 1e-300,
            ..hyper(4)
        };
        let s = Sampler::new(&data, h, &map).unwrap();
        let mut st = s.init_state(&DVector::zeros(4)).unwrap();
        s.draw_inactive_coefficients(&mut st, &mut stream_rng(1, 1));
        assert!(st.theta.amax() < 1e-140);
    }

    #[test]
    fn corrupted_score_is_reported_and_repaired() {
        let (data, map) = instance(20, 6, 15);
        let s = Sampler::new(&data, hyper(6), &map).unwrap();
        let mut st = s.init_state(&random_theta(6, 1)).unwrap();
        let good = st.scores.clone();
        st.scores[3] += 0.25;
        let report = s.refresh_caches(&mut st);
        assert!(report.warned);
        assert!((report.score_drift - 0.25).abs() < 1e-12);
        assert_eq!(st.scores, good);
        assert!(!s.refresh_caches(&mut st).warned);
    }

    #[test]
    fn sweeps_keep_caches_consistent() {
        let (data, map) = instance(50, 15, 16);
        let s = Sampler::new(&data, hyper(5), &map).unwrap();
        let mut st = s.init_state(&random_theta(15, 2).map(|v| if v.abs() > 1.0 { v } else { 0.0 })).unwrap();
        let mut rng = stream_rng(6, 1);
        for _ in 0..3000 {
            let out = s.sweep(&mut st, 0.5, 100, &mut rng).unwrap();
            assert!(st.delta.count() <= 5);
            if let Some(r) = out.refresh {
                assert!(r.max_drift() < 1e-8, "drift {}", r.max_drift());
            }
            if let Move::Double { .. } = out.mv {
                assert!(out.mv != Move::Single { j: 0 });
            }
        }
    }

    #[test]
    fn fallback_single_flips_carry_their_proposal_weight() {
        let (data, map) = instance(20, 4, 17);
        let s = Sampler::new(&data, hyper(4), &map).unwrap();
        assert_eq!(s.single_flip_weight(0, 0.3), 1.0);
        assert_eq!(s.single_flip_weight(4, 0.3), 1.0);
        assert_eq!(s.single_flip_weight(2, 0.3), 0.3);
    }
}
