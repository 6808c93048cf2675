//! Seeded generators for the two simulation designs.
//!
//! Setup 1 (Fourier instruments): for each row draw `V ~ N(0, I₃)`, the error
//! `ε ~ N(0, 1)` and idiosyncratic `u_j ~ N(0, 1)`; then
//!
//! ```text
//! F_j = √2 Σ_k sin(jπV_k),   H_j = √2 Σ_k cos(jπV_k)
//! X_j = (F_j + H_j + 1)(3ε + 1)   for endogenous j
//! X_j =  F_j + H_j + u_j          otherwise
//! ```
//!
//! with instruments `W = [F, H]` and `G_j = {j, p + j}`.
//!
//! Setup 2 (AR(1) regressors, block instruments): `X̃ ~ N(0, Σ)` with
//! `Σ_ij = 0.3^{|i−j|}`, `z ~ N(0, I_{Tp})`, `ζ ~ N(0, 1/16)`,
//! `X_j = X̃_j + Σ_t z_{T(j−1)+t}`, `ε = ζ + X̃'γ₀`, and the z block of
//! regressor j instruments it.
//!
//! Draws happen row by row in the order listed above so that a given seed and
//! generator reproduce the data exactly.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{normalize_instruments, DesignData, InstrumentMap};
use crate::rng::{stream_rng, DATA_STREAM};

/// Nonzero block of the true coefficient vector before SNR scaling.
pub const SIGNAL: [f64; 5] = [5.0, -4.0, 7.0, -2.0, 1.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Setup {
    /// Fourier-basis instruments, `m` endogenous regressors.
    Setup1,
    /// AR(1) regressors, every regressor endogenous, `T` instruments each.
    Setup2,
}

impl Setup {
    pub fn number(&self) -> u8 {
        match self {
            Setup::Setup1 => 1,
            Setup::Setup2 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimScenario {
    pub setup: Setup,
    pub n: usize,
    pub p: usize,
    /// Endogenous count `m` for Setup 1, block size `T` for Setup 2.
    pub m_or_t: usize,
    pub snr: f64,
    pub seed: u64,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.p < 1 {
            return Err(Error::param("n and p must be positive"));
        }
        if self.p < SIGNAL.len() {
            return Err(Error::TooFewRegressors(self.p));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::param(format!("snr must be positive, got {}", self.snr)));
        }
        match self.setup {
            Setup::Setup1 => {
                if self.m_or_t < 3 || self.m_or_t + 2 > self.p {
                    return Err(Error::param(format!(
                        "Setup 1 needs 3 <= m <= p - 2, got m = {} with p = {}",
                        self.m_or_t, self.p
                    )));
                }
            }
            Setup::Setup2 => {
                if self.m_or_t < 1 {
                    return Err(Error::param("Setup 2 needs T >= 1"));
                }
            }
        }
        Ok(())
    }

    /// Generates the dataset from the scenario seed's data stream.
    pub fn generate(&self) -> Result<Simulated> {
        self.validate()?;
        let mut rng = stream_rng(self.seed, DATA_STREAM);
        let (data, truth, map) = match self.setup {
            Setup::Setup1 => generate_setup1(self.n, self.p, self.m_or_t, self.snr, &mut rng)?,
            Setup::Setup2 => generate_setup2(self.n, self.p, self.m_or_t, self.snr, &mut rng)?,
        };
        Ok(Simulated { data, truth, map })
    }
}

#[derive(Clone, Debug)]
pub struct Simulated {
    pub data: DesignData,
    pub truth: GroundTruth,
    pub map: InstrumentMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub theta_star: DVector<f64>,
    /// Zero-based indices of the nonzero coefficients.
    pub support: Vec<usize>,
    /// Zero-based indices of the endogenous regressors.
    pub endogenous: Vec<usize>,
}

impl GroundTruth {
    pub fn s_star(&self) -> usize {
        self.support.len()
    }
}

/// `θ★ = snr · (5, −4, 7, −2, 1.5, 0, …, 0)`.
pub fn make_theta_star(p: usize, snr: f64) -> Result<GroundTruth> {
    if p < SIGNAL.len() {
        return Err(Error::TooFewRegressors(p));
    }
    if snr.is_nan() || snr <= 0.0 {
        return Err(Error::param("snr must be positive"));
    }
    let theta_star = DVector::from_fn(p, |j, _| SIGNAL.get(j).map_or(0.0, |s| snr * s));
    Ok(GroundTruth {
        theta_star,
        support: (0..SIGNAL.len()).collect(),
        endogenous: Vec::new(),
    })
}

/// Zero-based endogenous set of Setup 1: regressors 1, 2, 3 and 6, …, m + 2.
pub fn setup1_endogenous(m: usize) -> Vec<usize> {
    (0..3).chain(5..m + 2).collect()
}

pub fn generate_setup1<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    m: usize,
    snr: f64,
    rng: &mut R,
) -> Result<(DesignData, GroundTruth, InstrumentMap)> {
    setup1_impl(n, p, m, snr, rng, false)
}

fn setup1_impl<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    m: usize,
    snr: f64,
    rng: &mut R,
    zero_error: bool,
) -> Result<(DesignData, GroundTruth, InstrumentMap)> {
    SimScenario {
        setup: Setup::Setup1,
        n,
        p,
        m_or_t: m,
        snr,
        seed: 0,
    }
    .validate()?;
    let mut truth = make_theta_star(p, snr)?;
    truth.endogenous = setup1_endogenous(m);
    let mut endo = vec![false; p];
    for &j in &truth.endogenous {
        endo[j] = true;
    }

    let mut x = DMatrix::zeros(n, p);
    let mut w = DMatrix::zeros(n, 2 * p);
    let mut eps = DVector::zeros(n);
    let mut u = vec![0.0; p];
    for i in 0..n {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let e: f64 = rng.sample(StandardNormal);
        for uj in u.iter_mut() {
            *uj = rng.sample(StandardNormal);
        }
        let e = if zero_error { 0.0 } else { e };
        eps[i] = e;
        for j in 0..p {
            let freq = (j + 1) as f64 * PI;
            let f = SQRT_2 * v.iter().map(|vk| (freq * vk).sin()).sum::<f64>();
            let h = SQRT_2 * v.iter().map(|vk| (freq * vk).cos()).sum::<f64>();
            w[(i, j)] = f;
            w[(i, p + j)] = h;
            x[(i, j)] = if endo[j] {
                (f + h + 1.0) * (3.0 * e + 1.0)
            } else {
                f + h + u[j]
            };
        }
    }
    let y = &x * &truth.theta_star + eps;
    let data = normalize_instruments(DesignData::new(y, x, w)?)?;
    Ok((data, truth, InstrumentMap::paired(p)))
}

/// Endogeneity coefficients `γ₀ = (0.1, 0.2, …, 1.0, 0, …)`, truncated to p.
pub fn gamma0(p: usize) -> DVector<f64> {
    DVector::from_fn(p, |j, _| if j < 10 { 0.1 * (j + 1) as f64 } else { 0.0 })
}

/// Sampler for `N(0, Σ)` with `Σ_ij = ρ^{|i−j|}` through the Cholesky factor of Σ.
#[derive(Clone, Debug)]
pub struct Ar1Gaussian {
    chol: DMatrix<f64>,
}

impl Ar1Gaussian {
    pub fn new(dim: usize, rho: f64) -> Self {
        let sigma = DMatrix::from_fn(dim, dim, |i, j| rho.powi((i as i32 - j as i32).abs()));
        let chol = sigma
            .cholesky()
            .expect("AR(1) covariance with |rho| < 1 is positive definite")
            .unpack();
        Self { chol }
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.chol * z
    }
}

pub fn generate_setup2<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    t: usize,
    snr: f64,
    rng: &mut R,
) -> Result<(DesignData, GroundTruth, InstrumentMap)> {
    SimScenario {
        setup: Setup::Setup2,
        n,
        p,
        m_or_t: t,
        snr,
        seed: 0,
    }
    .validate()?;
    let mut truth = make_theta_star(p, snr)?;
    truth.endogenous = (0..p).collect();
    let ar = Ar1Gaussian::new(p, 0.3);
    let g0 = gamma0(p);
    let q = t * p;

    let mut x = DMatrix::zeros(n, p);
    let mut w = DMatrix::zeros(n, q);
    let mut eps = DVector::zeros(n);
    for i in 0..n {
        let xt = ar.sample(rng);
        for l in 0..q {
            w[(i, l)] = rng.sample::<f64, _>(StandardNormal);
        }
        let zeta = 0.25 * rng.sample::<f64, _>(StandardNormal);
        eps[i] = zeta + xt.dot(&g0);
        for j in 0..p {
            let block: f64 = (t * j..t * (j + 1)).map(|l| w[(i, l)]).sum();
            x[(i, j)] = xt[j] + block;
        }
    }
    let y = &x * &truth.theta_star + eps;
    let data = normalize_instruments(DesignData::new(y, x, w)?)?;
    Ok((data, truth, InstrumentMap::blocks(p, t)))
}
