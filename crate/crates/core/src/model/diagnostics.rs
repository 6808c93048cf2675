//! Restricted eigenvalues of `M_δ = W'_{T(δ)} X` and the contraction radius
//! they control.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::density::{admissible_patterns, instrument_set};
use super::types::{DesignData, EigenDiagnostics, HyperParams, InstrumentMap, SparsityPattern};
use crate::error::{Error, Result};

/// Largest p for which exhaustive pattern enumeration is allowed.
pub const EXHAUSTIVE_MAX_P: usize = 12;

/// How admissible patterns are visited when estimating the design constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternSampling {
    /// `draws` patterns: size uniform on `1..=s̄`, then a uniform subset of that size.
    Random { draws: usize, seed: u64 },
    /// Every nonempty pattern with `‖δ‖₀ ≤ s̄`; only for `p ≤ EXHAUSTIVE_MAX_P`.
    Exhaustive,
}

impl Default for PatternSampling {
    fn default() -> Self {
        PatternSampling::Random {
            draws: 200,
            seed: 0x5eed,
        }
    }
}

/// `M'_δ M_δ / n` restricted to the active columns.
fn restricted_gram(data: &DesignData, delta: &SparsityPattern, map: &InstrumentMap) -> DMatrix<f64> {
    let active = delta.active_indices();
    let selected = instrument_set(delta, map);
    let rows: Vec<usize> = (0..map.q()).filter(|&l| selected[l]).collect();
    let m = DMatrix::from_fn(rows.len(), active.len(), |r, c| {
        data.w.column(rows[r]).dot(&data.x.column(active[c]))
    });
    (m.transpose() * m) / data.n() as f64
}

/// `(v_underline(δ), v̄(δ))`, the extreme eigenvalues of `M'_δ M_δ / n` over
/// vectors supported on δ.
pub fn restricted_eigen_diagnostics(
    data: &DesignData,
    delta: &SparsityPattern,
    map: &InstrumentMap,
) -> Result<(f64, f64)> {
    map.check_against(data)?;
    if delta.count() == 0 {
        return Err(Error::EmptyPattern);
    }
    let gram = restricted_gram(data, delta, map);
    let eig = SymmetricEigen::new(gram);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // round-off can push a zero eigenvalue slightly negative
    Ok((lo.max(0.0), hi.max(lo.max(0.0))))
}

/// Upper bound on `max_{‖δ‖₀ ≤ s̄} |T(δ)|`: the sum of the s̄ largest group
/// sizes. Exact when groups are disjoint.
pub fn t_bar_bound(map: &InstrumentMap, s_bar: usize) -> usize {
    let mut sizes: Vec<usize> = map.groups().iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.iter().take(s_bar).sum::<usize>().min(map.q())
}

/// `ε = 2√2 σ₀ (κ̄₁/κ_underline) √((s̄ + s★) t̄ log(pq) / n)`.
#[allow(clippy::too_many_arguments)]
pub fn epsilon_radius(
    sigma0: f64,
    kappa_1: f64,
    kappa_low: f64,
    s_bar: usize,
    s_star: usize,
    t_bar: usize,
    p: usize,
    q: usize,
    n: usize,
) -> f64 {
    let log_pq = ((p * q) as f64).ln();
    2.0 * 2f64.sqrt() * sigma0 * (kappa_1 / kappa_low)
        * (((s_bar + s_star) * t_bar) as f64 * log_pq / n as f64).sqrt()
}

fn random_pattern<R: Rng>(p: usize, s_bar: usize, rng: &mut R) -> SparsityPattern {
    let k = rng.random_range(1..=s_bar);
    let idx = sample(rng, p, k).into_vec();
    SparsityPattern::from_indices(p, &idx)
}

/// Estimates κ̄₁, κ_underline and t̄ over admissible patterns and returns the
/// resulting contraction radius ε.
pub fn contraction_radius(
    data: &DesignData,
    hyper: &HyperParams,
    map: &InstrumentMap,
    s_star: usize,
    sigma0: f64,
    sampling: PatternSampling,
) -> Result<EigenDiagnostics> {
    map.check_against(data)?;
    if s_star < 1 {
        return Err(Error::param("s_star must be at least 1"));
    }
    if sigma0.is_nan() || sigma0 <= 0.0 {
        return Err(Error::param("sigma0 must be positive"));
    }
    let (p, q, n) = (data.p(), data.q(), data.n());
    let s_bar = hyper.s_bar.min(p);
    let patterns: Vec<SparsityPattern> = match sampling {
        PatternSampling::Exhaustive => {
            if p > EXHAUSTIVE_MAX_P {
                return Err(Error::param(format!(
                    "exhaustive enumeration limited to p <= {EXHAUSTIVE_MAX_P}, got {p}"
                )));
            }
            admissible_patterns(p, s_bar)
                .into_iter()
                .filter(|d| d.count() > 0)
                .collect()
        }
        PatternSampling::Random { draws, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..draws.max(1)).map(|_| random_pattern(p, s_bar, &mut rng)).collect()
        }
    };

    let mut v_low = f64::INFINITY;
    let mut v_high: f64 = 0.0;
    let mut kappa_1: f64 = 0.0;
    let mut t_seen = 0;
    for delta in &patterns {
        let (lo, hi) = restricted_eigen_diagnostics(data, delta, map)?;
        v_low = v_low.min(lo);
        v_high = v_high.max(hi);
        let selected = instrument_set(delta, map);
        t_seen = t_seen.max(selected.iter().filter(|&&s| s).count());
        for j in 0..p {
            let sq: f64 = (0..q)
                .filter(|&l| selected[l])
                .map(|l| data.w.column(l).dot(&data.x.column(j)).powi(2))
                .sum();
            kappa_1 = kappa_1.max(sq.sqrt() / (n as f64).sqrt());
        }
    }
    if v_low <= f64::EPSILON {
        return Err(Error::DegenerateDesign(v_low));
    }
    let t_bar = match sampling {
        PatternSampling::Exhaustive => t_seen,
        PatternSampling::Random { .. } => t_bar_bound(map, s_bar),
    };
    let epsilon = epsilon_radius(sigma0, kappa_1, v_low, s_bar, s_star, t_bar, p, q, n);
    Ok(EigenDiagnostics {
        v_low,
        v_high,
        t_bar,
        kappa_1,
        epsilon,
        patterns_evaluated: patterns.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_instruments;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand_distr::StandardNormal;

    fn random_design(n: usize, p: usize, q: usize, seed: u64) -> DesignData {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut g = || rng.sample::<f64, _>(StandardNormal);
        let y = DVector::from_fn(n, |_, _| g());
        let x = DMatrix::from_fn(n, p, |_, _| g());
        let w = DMatrix::from_fn(n, q, |_, _| g());
        normalize_instruments(DesignData::new(y, x, w).unwrap()).unwrap()
    }

    #[test]
    fn singleton_is_one_dimensional_quotient() {
        let data = random_design(25, 4, 8, 1);
        let map = InstrumentMap::paired(4);
        let delta = SparsityPattern::from_indices(4, &[2]);
        let (lo, hi) = restricted_eigen_diagnostics(&data, &delta, &map).unwrap();
        let direct = (data.w.column(2).dot(&data.x.column(2)).powi(2)
            + data.w.column(6).dot(&data.x.column(2)).powi(2))
            / 25.0;
        assert_abs_diff_eq!(lo, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, direct, epsilon = 1e-12);
    }

    #[test]
    fn identity_design_gives_inverse_n() {
        // X with orthonormal columns and W = X
        let n = 6;
        let raw = DMatrix::from_fn(n, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        let data = normalize_instruments(DesignData::new(DVector::zeros(n), raw.clone(), raw).unwrap()).unwrap();
        let map = InstrumentMap::new(vec![vec![0], vec![1], vec![2]], 3).unwrap();
        let delta = SparsityPattern::from_indices(3, &[0, 1, 2]);
        let (lo, hi) = restricted_eigen_diagnostics(&data, &delta, &map).unwrap();
        assert_abs_diff_eq!(lo, 1.0 / n as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 1.0 / n as f64, epsilon = 1e-15);
    }

    #[test]
    fn matches_dense_rayleigh_quotient_extremes() {
        // Oracle: power iteration on the full 5x5 Gram for the top eigenvalue and
        // on (c I − Gram) for the bottom one.
        let data = random_design(40, 5, 10, 2);
        let map = InstrumentMap::paired(5);
        let delta = SparsityPattern::from_indices(5, &[0, 1, 2, 3, 4]);
        let (lo, hi) = restricted_eigen_diagnostics(&data, &delta, &map).unwrap();
        let m = data.w.transpose() * &data.x;
        let gram = m.transpose() * &m / 40.0;
        let power = |a: &DMatrix<f64>| {
            let mut v = DVector::from_element(5, 1.0);
            let mut val = 0.0;
            for _ in 0..20_000 {
                let next = a * &v;
                val = v.dot(&next) / v.dot(&v);
                v = next.normalize();
            }
            val
        };
        let top = power(&gram);
        let shift = top * 1.01;
        let bottom = shift - power(&(DMatrix::identity(5, 5) * shift - &gram));
        assert_abs_diff_eq!(hi, top, epsilon = 1e-8);
        assert_abs_diff_eq!(lo, bottom, epsilon = 1e-8);
        assert!(lo <= hi);
    }

    #[test]
    fn scaling_x_scales_eigenvalues_quadratically() {
        let data = random_design(30, 4, 8, 3);
        let map = InstrumentMap::paired(4);
        let delta = SparsityPattern::from_indices(4, &[0, 3]);
        let (lo, hi) = restricted_eigen_diagnostics(&data, &delta, &map).unwrap();
        let mut scaled = data.clone();
        scaled.x *= 3.0;
        let (lo3, hi3) = restricted_eigen_diagnostics(&scaled, &delta, &map).unwrap();
        assert_abs_diff_eq!(lo3, 9.0 * lo, epsilon = 1e-10 * lo3.abs().max(1.0));
        assert_abs_diff_eq!(hi3, 9.0 * hi, epsilon = 1e-10 * hi3.abs().max(1.0));
    }

    #[test]
    fn empty_pattern_rejected() {
        let data = random_design(10, 2, 4, 4);
        let map = InstrumentMap::paired(2);
        assert!(matches!(
            restricted_eigen_diagnostics(&data, &SparsityPattern::empty(2), &map),
            Err(Error::EmptyPattern)
        ));
    }

    #[test]
    fn epsilon_scales_as_inverse_root_n() {
        let e1 = epsilon_radius(1.0, 2.0, 0.5, 3, 2, 6, 10, 20, 100);
        let e2 = epsilon_radius(1.0, 2.0, 0.5, 3, 2, 6, 10, 20, 200);
        assert_abs_diff_eq!(e2 * e2, 0.5 * e1 * e1, epsilon = 1e-12);
    }

    #[test]
    fn t_bar_of_disjoint_pairs() {
        let map = InstrumentMap::paired(10);
        assert_eq!(t_bar_bound(&map, 3), 6);
    }

    #[test]
    fn sampled_estimate_equals_enumeration_when_exhaustive() {
        let data = random_design(30, 6, 12, 5);
        let map = InstrumentMap::paired(6);
        let hyper = HyperParams {
            lambda: 1.0,
            rho_sq: 1.0,
            gamma: 0.1,
            u: 1.0,
            s_bar: 3,
        };
        let diag = contraction_radius(&data, &hyper, &map, 2, 1.0, PatternSampling::Exhaustive).unwrap();
        // independent enumeration of κ_underline
        let mut brute = f64::INFINITY;
        for code in 1u64..64 {
            if code.count_ones() > 3 {
                continue;
            }
            let d = SparsityPattern::from_code(6, code);
            let active = d.active_indices();
            let rows: Vec<usize> = active.iter().flat_map(|&j| [j, j + 6]).collect();
            let m = DMatrix::from_fn(rows.len(), active.len(), |r, c| {
                data.w.column(rows[r]).dot(&data.x.column(active[c]))
            });
            let g = m.transpose() * m / 30.0;
            let ev = SymmetricEigen::new(g).eigenvalues;
            brute = brute.min(ev.iter().cloned().fold(f64::INFINITY, f64::min));
        }
        assert_abs_diff_eq!(diag.v_low, brute, epsilon = 1e-12);
        assert_eq!(diag.t_bar, 6);
        assert_eq!(diag.patterns_evaluated, 6 + 15 + 20);
        assert!(diag.v_low <= diag.v_high);
        assert!(diag.epsilon > 0.0);
    }

    #[test]
    fn random_sampling_is_seeded() {
        let data = random_design(30, 8, 16, 6);
        let map = InstrumentMap::paired(8);
        let hyper = HyperParams {
            lambda: 1.0,
            rho_sq: 1.0,
            gamma: 0.1,
            u: 1.0,
            s_bar: 4,
        };
        let s = PatternSampling::Random { draws: 50, seed: 11 };
        let a = contraction_radius(&data, &hyper, &map, 2, 1.0, s).unwrap();
        let b = contraction_radius(&data, &hyper, &map, 2, 1.0, s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.t_bar, 8);
    }
}
