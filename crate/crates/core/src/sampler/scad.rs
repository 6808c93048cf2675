//! SCAD-penalized least squares by cyclic coordinate descent, used to
//! initialize the chain.

use nalgebra::DVector;

use crate::model::DesignData;

pub const DEFAULT_SCAD_A: f64 = 3.7;
const MAX_PASSES: usize = 1000;
const REL_TOL: f64 = 1e-6;

/// SCAD penalty `P(|t|; λ, a)`.
pub fn scad_penalty(t: f64, lambda: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        0.5 * lambda * lambda * (a + 1.0)
    }
}

fn univariate_objective(t: f64, z: f64, v: f64, lambda: f64, a: f64) -> f64 {
    0.5 * v * (t - z) * (t - z) + scad_penalty(t, lambda, a)
}

/// Minimizer of `½ v (t − z)² + P(|t|; λ, a)`.
///
/// With `v = 1` this is the usual three-segment rule: soft threshold for
/// `|z| ≤ 2λ`, the linear interpolation `((a−1)z − aλ·sign z)/(a−2)` up to
/// `aλ`, and the identity beyond. For general `v` the segment boundaries move
/// to `λ(1 + 1/v)` and `aλ`; when `v(a−1) ≤ 1` the middle segment is concave
/// and the candidates are compared directly.
pub fn scad_threshold(z: f64, v: f64, lambda: f64, a: f64) -> f64 {
    let s = z.signum();
    let az = z.abs();
    let soft = |zz: f64, thr: f64| (zz.abs() - thr).max(0.0) * zz.signum();
    if v * (a - 1.0) > 1.0 {
        if az <= lambda * (1.0 + 1.0 / v) {
            soft(z, lambda / v)
        } else if az <= a * lambda {
            (v * (a - 1.0) * z - s * a * lambda) / (v * (a - 1.0) - 1.0)
        } else {
            z
        }
    } else {
        let mid = ((v * (a - 1.0) * az - a * lambda) / (v * (a - 1.0) - 1.0)).clamp(lambda, a * lambda);
        let candidates = [
            soft(z, lambda / v).clamp(-lambda, lambda),
            s * mid,
            s * lambda,
            s * a * lambda,
            if az > a * lambda { z } else { s * a * lambda },
            0.0,
        ];
        candidates
            .into_iter()
            .min_by(|x, y| {
                univariate_objective(*x, z, v, lambda, a)
                    .total_cmp(&univariate_objective(*y, z, v, lambda, a))
            })
            .unwrap_or(0.0)
    }
}

/// `½ n⁻¹ ‖y − Xθ‖² + Σ_j P(|θ_j|; λ, a)`.
pub fn scad_objective(data: &DesignData, theta: &DVector<f64>, lambda: f64, a: f64) -> f64 {
    let r = &data.y - &data.x * theta;
    0.5 * r.norm_squared() / data.n() as f64
        + theta.iter().map(|&t| scad_penalty(t, lambda, a)).sum::<f64>()
}

#[derive(Clone, Debug)]
pub struct ScadFit {
    pub theta: DVector<f64>,
    pub objective: f64,
    pub passes: usize,
    /// False when the pass limit was hit; `theta` is then the last iterate.
    pub converged: bool,
}

/// Coordinate-descent SCAD fit started from zero.
pub fn scad_initializer(data: &DesignData, lambda_scad: f64, a: f64) -> ScadFit {
    assert!(lambda_scad > 0.0, "lambda_scad must be positive");
    assert!(a > 2.0, "SCAD concavity parameter must exceed 2");
    let n = data.n() as f64;
    let p = data.p();
    let col_sq: Vec<f64> = (0..p).map(|j| data.x.column(j).norm_squared() / n).collect();
    let mut theta = DVector::zeros(p);
    let mut r = data.y.clone();
    let mut passes = 0;
    let mut converged = false;
    while passes < MAX_PASSES {
        passes += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let v = col_sq[j];
            if v == 0.0 {
                continue;
            }
            let xj = data.x.column(j);
            let old = theta[j];
            let z = xj.dot(&r) / n / v + old;
            let new = scad_threshold(z, v, lambda_scad, a);
            if new != old {
                r.axpy(old - new, &xj, 1.0);
                theta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        let scale = theta.amax().max(1.0);
        if max_change <= REL_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("SCAD coordinate descent stopped after {MAX_PASSES} passes without converging");
    }
    let objective = scad_objective(data, &theta, lambda_scad, a);
    ScadFit {
        theta,
        objective,
        passes,
        converged,
    }
}
