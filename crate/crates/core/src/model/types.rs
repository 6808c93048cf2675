use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on unit column norms after normalization.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Observed data `z = (y, X, W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignData {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub normalized: bool,
    /// Euclidean norms of the instrument columns before normalization
    /// (all ones until [`normalize_instruments`](super::normalize_instruments) runs).
    pub instrument_scales: DVector<f64>,
}

impl DesignData {
    /// Builds an unnormalized design after checking shapes and finiteness.
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::dims("design needs at least one row"));
        }
        if x.nrows() != n || w.nrows() != n {
            return Err(Error::dims(format!(
                "row counts differ: y has {n}, X has {}, W has {}",
                x.nrows(),
                w.nrows()
            )));
        }
        if x.ncols() == 0 || w.ncols() == 0 {
            return Err(Error::dims("X and W need at least one column"));
        }
        let finite = |s: &[f64]| s.iter().all(|v| v.is_finite());
        if !finite(y.as_slice()) || !finite(x.as_slice()) || !finite(w.as_slice()) {
            return Err(Error::param("design contains non-finite entries"));
        }
        let q = w.ncols();
        Ok(Self {
            y,
            x,
            w,
            normalized: false,
            instrument_scales: DVector::from_element(q, 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.w.ncols()
    }
}

/// Per-regressor instrument groups `G_j`; `T(δ)` is the union of the groups of
/// active regressors. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstrumentMap {
    groups: Vec<Vec<usize>>,
    q: usize,
}

impl InstrumentMap {
    pub fn new(groups: Vec<Vec<usize>>, q: usize) -> Result<Self> {
        let mut groups = groups;
        for (j, g) in groups.iter_mut().enumerate() {
            if g.is_empty() {
                return Err(Error::param(format!("instrument group of regressor {j} is empty")));
            }
            if let Some(&bad) = g.iter().find(|&&l| l >= q) {
                return Err(Error::dims(format!(
                    "regressor {j} references instrument {bad} but q = {q}"
                )));
            }
            g.sort_unstable();
            g.dedup();
        }
        Ok(Self { groups, q })
    }

    /// `G_j = {j, p + j}`: the sine/cosine pairing of the Fourier design.
    pub fn paired(p: usize) -> Self {
        Self {
            groups: (0..p).map(|j| vec![j, p + j]).collect(),
            q: 2 * p,
        }
    }

    /// `G_j = {T j, …, T j + T − 1}`: consecutive blocks of `block` instruments.
    pub fn blocks(p: usize, block: usize) -> Self {
        Self {
            groups: (0..p)
                .map(|j| (block * j..block * (j + 1)).collect())
                .collect(),
            q: block * p,
        }
    }

    pub fn group(&self, j: usize) -> &[usize] {
        &self.groups[j]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn p(&self) -> usize {
        self.groups.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn are_disjoint(&self) -> bool {
        let mut seen = vec![false; self.q];
        for g in &self.groups {
            for &l in g {
                if seen[l] {
                    return false;
                }
                seen[l] = true;
            }
        }
        true
    }

    pub(crate) fn check_against(&self, data: &DesignData) -> Result<()> {
        if self.p() != data.p() || self.q != data.q() {
            return Err(Error::dims(format!(
                "instrument map is {}x{} but data has p = {}, q = {}",
                self.p(),
                self.q,
                data.p(),
                data.q()
            )));
        }
        Ok(())
    }
}

/// Inclusion vector `δ ∈ {0,1}^p` with a cached `‖δ‖₀`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparsityPattern {
    bits: Vec<bool>,
    count: usize,
}

impl SparsityPattern {
    pub fn empty(p: usize) -> Self {
        Self {
            bits: vec![false; p],
            count: 0,
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let count = bits.iter().filter(|&&b| b).count();
        Self { bits, count }
    }

    pub fn from_indices(p: usize, active: &[usize]) -> Self {
        let mut pattern = Self::empty(p);
        for &j in active {
            pattern.set(j, true);
        }
        pattern
    }

    /// Pattern number `code` in the binary enumeration of `{0,1}^p` (bit j of `code` is δ_j).
    pub fn from_code(p: usize, code: u64) -> Self {
        Self::from_bits((0..p).map(|j| (code >> j) & 1 == 1).collect())
    }

    pub fn code(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |acc, (j, _)| acc | (1 << j))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        if self.bits[j] != value {
            self.bits[j] = value;
            if value {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub fn flip(&mut self, j: usize) {
        let v = self.bits[j];
        self.set(j, !v);
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j)
    }

    pub fn inactive(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| !b).map(|(j, _)| j)
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.active().collect()
    }
}

/// Tuning constants of the quasi-posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperParams {
    /// Quasi-likelihood scale λ.
    pub lambda: f64,
    /// Slab precision ρ² (slab variance is 1/ρ²).
    pub rho_sq: f64,
    /// Spike variance γ.
    pub gamma: f64,
    /// Prior exponent; the inclusion probability is `p^{-(u+1)}`.
    pub u: f64,
    /// Hard cap on `‖δ‖₀`.
    pub s_bar: usize,
}

impl HyperParams {
    /// `min(p, ⌊n / ln p⌋)`, never below 1.
    pub fn default_s_bar(n: usize, p: usize) -> usize {
        let cap = if p > 1 {
            (n as f64 / (p as f64).ln()).floor() as usize
        } else {
            p
        };
        cap.clamp(1, p.max(1))
    }

    pub fn q_prior(&self, p: usize) -> f64 {
        (p as f64).powf(-(self.u + 1.0))
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("rho_sq", self.rho_sq)?;
        positive("gamma", self.gamma)?;
        positive("u", self.u)?;
        if self.s_bar < 1 || self.s_bar > p {
            return Err(Error::param(format!(
                "s_bar must lie in [1, {p}], got {}",
                self.s_bar
            )));
        }
        let q = self.q_prior(p);
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::param(format!(
                "prior inclusion probability {q} outside (0, 1/2]; need p >= 2"
            )));
        }
        Ok(())
    }
}

/// Restricted-eigenvalue summary and contraction radius of a design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenDiagnostics {
    /// Smallest restricted eigenvalue found over the evaluated patterns.
    pub v_low: f64,
    /// Largest restricted eigenvalue found over the evaluated patterns.
    pub v_high: f64,
    /// Maximum number of instruments any admissible pattern can use.
    pub t_bar: usize,
    /// Largest `‖W'_{T(δ)} X_j‖₂ / √n` found.
    pub kappa_1: f64,
    pub epsilon: f64,
    pub patterns_evaluated: usize,
}
