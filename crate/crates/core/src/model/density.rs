use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::types::{DesignData, HyperParams, InstrumentMap, SparsityPattern, UNIT_NORM_TOL};
use crate::error::{Error, Result};

/// Scales every instrument column to unit Euclidean norm and records the
/// original norms. Columns already within [`UNIT_NORM_TOL`] of unit norm are
/// left bit-for-bit untouched with scale 1, which makes the operation idempotent.
pub fn normalize_instruments(data: DesignData) -> Result<DesignData> {
    let mut data = data;
    let q = data.q();
    let mut scales = data.instrument_scales.clone();
    for l in 0..q {
        let norm = data.w.column(l).norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn(l));
        }
        if (norm - 1.0).abs() <= UNIT_NORM_TOL {
            continue;
        }
        data.w.column_mut(l).unscale_mut(norm);
        scales[l] *= norm;
    }
    data.instrument_scales = scales;
    data.normalized = true;
    Ok(data)
}

/// Indicator of `T(δ) = ∪_{j: δ_j = 1} G_j` over the q instruments.
pub fn instrument_set(delta: &SparsityPattern, map: &InstrumentMap) -> Vec<bool> {
    let mut set = vec![false; map.q()];
    for j in delta.active() {
        for &l in map.group(j) {
            set[l] = true;
        }
    }
    set
}

/// `θ_δ`: θ with inactive coordinates set to zero.
pub fn masked_theta(delta: &SparsityPattern, theta: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(theta.len(), |j, _| if delta.get(j) { theta[j] } else { 0.0 })
}

/// `y − X θ_δ`.
pub fn residual(data: &DesignData, delta: &SparsityPattern, theta: &DVector<f64>) -> DVector<f64> {
    let mut r = data.y.clone();
    for j in delta.active() {
        r.axpy(-theta[j], &data.x.column(j), 1.0);
    }
    r
}

fn check_dims(
    data: &DesignData,
    delta: &SparsityPattern,
    theta: &DVector<f64>,
    map: &InstrumentMap,
) -> Result<()> {
    map.check_against(data)?;
    if delta.len() != data.p() || theta.len() != data.p() {
        return Err(Error::dims(format!(
            "p = {} but δ has length {} and θ has length {}",
            data.p(),
            delta.len(),
            theta.len()
        )));
    }
    Ok(())
}

/// `−(1/2λ) Σ_{ℓ ∈ T(δ)} ⟨w_ℓ, y − X θ_δ⟩²`.
pub fn log_quasi_likelihood(
    data: &DesignData,
    delta: &SparsityPattern,
    theta: &DVector<f64>,
    hyper: &HyperParams,
    map: &InstrumentMap,
) -> Result<f64> {
    check_dims(data, delta, theta, map)?;
    let selected = instrument_set(delta, map);
    if !selected.iter().any(|&b| b) {
        return Ok(0.0);
    }
    let r = residual(data, delta, theta);
    let sum: f64 = selected
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(l, _)| data.w.column(l).dot(&r).powi(2))
        .sum();
    Ok(-0.5 * sum / hyper.lambda)
}

/// Unnormalized log of `ω_δ`; `−∞` when `‖δ‖₀ > s̄`.
pub fn log_prior_sparsity(delta: &SparsityPattern, hyper: &HyperParams, p: usize) -> f64 {
    log_prior_sparsity_count(delta.count(), hyper, p)
}

pub(crate) fn log_prior_sparsity_count(k: usize, hyper: &HyperParams, p: usize) -> f64 {
    if k > hyper.s_bar {
        return f64::NEG_INFINITY;
    }
    let q = hyper.q_prior(p);
    let mut lp = 0.0;
    if k > 0 {
        lp += k as f64 * q.ln();
    }
    if p > k {
        lp += (p - k) as f64 * (-q).ln_1p();
    }
    lp
}

pub(crate) fn log_normal_density(x: f64, variance: f64) -> f64 {
    -0.5 * (2.0 * PI * variance).ln() - 0.5 * x * x / variance
}

/// Log density of θ under the spike-and-slab prior given δ, normalizing
/// constants included.
pub fn log_prior_coefficients(
    theta: &DVector<f64>,
    delta: &SparsityPattern,
    hyper: &HyperParams,
) -> Result<f64> {
    if theta.len() != delta.len() {
        return Err(Error::dims(format!(
            "θ has length {} but δ has length {}",
            theta.len(),
            delta.len()
        )));
    }
    let slab_var = 1.0 / hyper.rho_sq;
    Ok(theta
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let var = if delta.get(j) { slab_var } else { hyper.gamma };
            log_normal_density(t, var)
        })
        .sum())
}

/// Log of the joint quasi-posterior density of (δ, θ), up to a constant.
pub fn log_posterior_unnormalized(
    data: &DesignData,
    delta: &SparsityPattern,
    theta: &DVector<f64>,
    hyper: &HyperParams,
    map: &InstrumentMap,
) -> Result<f64> {
    let sparsity = log_prior_sparsity(delta, hyper, data.p());
    let lik = log_quasi_likelihood(data, delta, theta, hyper, map)?;
    let coef = log_prior_coefficients(theta, delta, hyper)?;
    Ok(sparsity + lik + coef)
}

/// Moments of the Gaussian full conditional of the active block: the precision
/// `A = (1/λ) M'M + ρ² I` and `b = (1/λ) M' W'_T y` with `M = W'_T X_δ`.
pub(crate) fn active_block_system(
    data: &DesignData,
    delta: &SparsityPattern,
    hyper: &HyperParams,
    map: &InstrumentMap,
) -> (DMatrix<f64>, DVector<f64>, f64) {
    let active = delta.active_indices();
    let k = active.len();
    let selected = instrument_set(delta, map);
    let mut a = DMatrix::zeros(k, k);
    let mut b = DVector::zeros(k);
    let mut wty_sq = 0.0;
    let mut row = DVector::zeros(k);
    for (l, _) in selected.iter().enumerate().filter(|(_, &s)| s) {
        let wl = data.w.column(l);
        for (c, &j) in active.iter().enumerate() {
            row[c] = wl.dot(&data.x.column(j));
        }
        let wy = wl.dot(&data.y);
        a.ger(1.0 / hyper.lambda, &row, &row, 1.0);
        b.axpy(wy / hyper.lambda, &row, 1.0);
        wty_sq += wy * wy;
    }
    for c in 0..k {
        a[(c, c)] += hyper.rho_sq;
    }
    (a, b, wty_sq)
}

/// `log ω̃_δ + log ∫ q_{δ,θ_δ}(z) N(θ_δ; 0, ρ⁻² I) dθ_δ`, the exact δ-marginal of
/// the quasi-posterior up to a δ-independent constant.
pub fn log_marginal_delta(
    data: &DesignData,
    delta: &SparsityPattern,
    hyper: &HyperParams,
    map: &InstrumentMap,
) -> Result<f64> {
    map.check_against(data)?;
    if delta.len() != data.p() {
        return Err(Error::dims("δ length differs from p"));
    }
    let log_omega = log_prior_sparsity(delta, hyper, data.p());
    if log_omega == f64::NEG_INFINITY {
        return Ok(log_omega);
    }
    let k = delta.count();
    if k == 0 {
        return Ok(log_omega);
    }
    let (a, b, wty_sq) = active_block_system(data, delta, hyper, map);
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("marginal precision not positive definite".into()))?;
    let a_inv_b = chol.solve(&b);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(log_omega - 0.5 * wty_sq / hyper.lambda + 0.5 * b.dot(&a_inv_b) - 0.5 * log_det
        + 0.5 * k as f64 * hyper.rho_sq.ln())
}

/// Every δ with `‖δ‖₀ ≤ s̄`, in binary-code order.
pub fn admissible_patterns(p: usize, s_bar: usize) -> Vec<SparsityPattern> {
    assert!(p < 64, "pattern enumeration needs p < 64");
    (0..(1u64 << p))
        .filter(|c| c.count_ones() as usize <= s_bar)
        .map(|c| SparsityPattern::from_code(p, c))
        .collect()
}

/// Exact δ-posterior by enumerating all admissible patterns; returns
/// `(pattern, probability)` pairs.
pub fn exact_delta_posterior(
    data: &DesignData,
    hyper: &HyperParams,
    map: &InstrumentMap,
) -> Result<Vec<(SparsityPattern, f64)>> {
    let patterns = admissible_patterns(data.p(), hyper.s_bar);
    let logs = patterns
        .iter()
        .map(|d| log_marginal_delta(data, d, hyper, map))
        .collect::<Result<Vec<_>>>()?;
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(patterns
        .into_iter()
        .zip(weights)
        .map(|(d, w)| (d, w / total))
        .collect())
}
