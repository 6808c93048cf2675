//! Nested TOML configuration. Every field is optional; values given on the
//! command line override the file, and built-in defaults fill the rest.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Raw,
    Normalized,
}

impl From<ScaleArg> for qbiv::LambdaScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Raw => qbiv::LambdaScale::Raw,
            ScaleArg::Normalized => qbiv::LambdaScale::Normalized,
        }
    }
}

/// Fills unset fields of `self` from `other`.
macro_rules! overlay {
    ($t:ident { $($f:ident),* $(,)? }) => {
        impl $t {
            pub fn or(self, other: Self) -> Self {
                Self { $($f: self.$f.or(other.$f)),* }
            }
        }
    };
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub setup: Option<u8>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub m_or_t: Option<usize>,
    pub snr: Option<f64>,
    pub seed: Option<u64>,
}
overlay!(ScenarioSection { setup, n, p, m_or_t, snr, seed });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperSection {
    pub lambda: Option<f64>,
    pub lambda_scale: Option<ScaleArg>,
    pub slab_variance: Option<f64>,
    pub gamma: Option<f64>,
    pub u: Option<f64>,
    pub s_bar: Option<usize>,
    pub lambda_scad: Option<f64>,
    pub scad_a: Option<f64>,
    pub threshold: Option<f64>,
}
overlay!(HyperSection { lambda, lambda_scale, slab_variance, gamma, u, s_bar, lambda_scad, scad_a, threshold });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub sweeps: Option<u64>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    pub seed: Option<u64>,
    pub refresh_every: Option<u64>,
    pub flip_mix: Option<f64>,
}
overlay!(ChainSection { sweeps, burn_in, thin, seed, refresh_every, flip_mix });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicateSection {
    pub replicates: Option<usize>,
    pub per_coordinate_mse: Option<bool>,
}
overlay!(ReplicateSection { replicates, per_coordinate_mse });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub data: Option<PathBuf>,
    pub level: Option<f64>,
    pub emit_trace: Option<bool>,
    pub emit_plotdata: Option<bool>,
    /// 1-based regressor index for the plot data.
    pub coordinate: Option<usize>,
    pub bins: Option<usize>,
}
overlay!(FitSection { data, level, emit_trace, emit_plotdata, coordinate, bins });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    pub big_m: Option<f64>,
    pub small_m: Option<f64>,
    pub sigma0: Option<f64>,
    pub s_star: Option<usize>,
    pub patterns: Option<usize>,
    pub exhaustive: Option<bool>,
    pub truth: Option<PathBuf>,
}
overlay!(DiagnoseSection { big_m, small_m, sigma0, s_star, patterns, exhaustive, truth });

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub replicate: ReplicateSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub diagnose: DiagnoseSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn or(self, other: Self) -> Self {
        Self {
            output_dir: self.output_dir.or(other.output_dir),
            scenario: self.scenario.or(other.scenario),
            hyper: self.hyper.or(other.hyper),
            chain: self.chain.or(other.chain),
            replicate: self.replicate.or(other.replicate),
            fit: self.fit.or(other.fit),
            diagnose: self.diagnose.or(other.diagnose),
        }
    }

    /// Built-in defaults. The Setup 2 default for `m_or_t` is applied in
    /// [`Config::scenario`] because it depends on the chosen setup.
    pub fn defaults() -> Self {
        let chain = qbiv::ChainConfig::default();
        let policy = qbiv::HyperPolicy::default();
        Self {
            output_dir: Some(PathBuf::from("qbiv-out")),
            scenario: ScenarioSection {
                setup: Some(1),
                n: Some(100),
                p: Some(100),
                m_or_t: None,
                snr: Some(1.0),
                seed: Some(2024),
            },
            hyper: HyperSection {
                lambda: None,
                lambda_scale: Some(ScaleArg::Raw),
                slab_variance: None,
                gamma: None,
                u: Some(policy.u),
                s_bar: None,
                lambda_scad: Some(policy.lambda_scad),
                scad_a: Some(policy.scad_a),
                threshold: Some(policy.threshold),
            },
            chain: ChainSection {
                sweeps: Some(chain.n_sweeps),
                burn_in: Some(chain.burn_in),
                thin: Some(chain.thin),
                seed: Some(chain.seed),
                refresh_every: Some(chain.refresh_every),
                flip_mix: Some(chain.flip_mix),
            },
            replicate: ReplicateSection {
                replicates: Some(30),
                per_coordinate_mse: Some(false),
            },
            fit: FitSection {
                data: None,
                level: Some(0.95),
                emit_trace: Some(false),
                emit_plotdata: Some(false),
                coordinate: Some(1),
                bins: Some(40),
            },
            diagnose: DiagnoseSection {
                big_m: Some(12.0),
                small_m: Some(2.0),
                sigma0: Some(1.0),
                s_star: None,
                patterns: Some(200),
                exhaustive: Some(false),
                truth: None,
            },
        }
    }

    /// Canonical text hashed into the provenance block. The output directory
    /// is left out so that identical runs written to different places agree.
    pub fn canonical_text(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        toml::to_string(&c).expect("config serializes")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("qbiv-out"))
    }

    pub fn scenario(&self) -> Result<qbiv::SimScenario, CliError> {
        let s = &self.scenario;
        let setup = match s.setup.unwrap_or(1) {
            1 => qbiv::Setup::Setup1,
            2 => qbiv::Setup::Setup2,
            k => return Err(CliError::Usage(format!("setup must be 1 or 2, got {k}"))),
        };
        let default_m = if setup == qbiv::Setup::Setup1 { 10 } else { 2 };
        Ok(qbiv::SimScenario {
            setup,
            n: s.n.unwrap_or(100),
            p: s.p.unwrap_or(100),
            m_or_t: s.m_or_t.unwrap_or(default_m),
            snr: s.snr.unwrap_or(1.0),
            seed: s.seed.unwrap_or(2024),
        })
    }

    pub fn policy(&self) -> qbiv::HyperPolicy {
        let h = &self.hyper;
        let d = qbiv::HyperPolicy::default();
        qbiv::HyperPolicy {
            slab_variance: h.slab_variance,
            gamma: h.gamma,
            lambda: h.lambda,
            lambda_scale: h.lambda_scale.map(Into::into).unwrap_or(d.lambda_scale),
            u: h.u.unwrap_or(d.u),
            s_bar: h.s_bar,
            lambda_scad: h.lambda_scad.unwrap_or(d.lambda_scad),
            scad_a: h.scad_a.unwrap_or(d.scad_a),
            threshold: h.threshold.unwrap_or(d.threshold),
        }
    }

    pub fn chain(&self) -> qbiv::ChainConfig {
        let c = &self.chain;
        let d = qbiv::ChainConfig::default();
        qbiv::ChainConfig {
            n_sweeps: c.sweeps.unwrap_or(d.n_sweeps),
            burn_in: c.burn_in.unwrap_or(d.burn_in),
            thin: c.thin.unwrap_or(d.thin),
            seed: c.seed.unwrap_or(d.seed),
            refresh_every: c.refresh_every.unwrap_or(d.refresh_every),
            flip_mix: c.flip_mix.unwrap_or(d.flip_mix),
            ..d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_file_parses_and_cli_wins() {
        let file: Config = toml::from_str(
            "output_dir = \"o\"\n[scenario]\nsetup = 2\nn = 50\n[hyper]\nlambda_scale = \"normalized\"\nu = 0.5\n",
        )
        .unwrap();
        let cli = Config {
            scenario: ScenarioSection {
                n: Some(80),
                ..Default::default()
            },
            ..Default::default()
        };
        let c = cli.or(file).or(Config::defaults());
        let sc = c.scenario().unwrap();
        assert_eq!((sc.setup, sc.n, sc.p, sc.m_or_t), (qbiv::Setup::Setup2, 80, 100, 2));
        let pol = c.policy();
        assert_eq!(pol.lambda_scale, qbiv::LambdaScale::Normalized);
        assert_eq!(pol.u, 0.5);
        assert_eq!(c.output_dir(), PathBuf::from("o"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[hyper]\nlamda = 3.0\n").is_err());
    }

    #[test]
    fn canonical_text_ignores_output_dir() {
        let a = Config::defaults();
        let mut b = Config::defaults();
        b.output_dir = Some(PathBuf::from("elsewhere"));
        assert_eq!(a.canonical_text(), b.canonical_text());
        let round: Config = toml::from_str(&a.canonical_text()).unwrap();
        assert_eq!(round.scenario, a.scenario);
    }
}
