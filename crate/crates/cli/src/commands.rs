use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use qbiv::harness::{ball_fractions, credible_interval, fit as fit_chain, point_estimate, select_model};
use qbiv::io::{self, DatasetPaths, DiagnosticsRecord, PosteriorSummary, Provenance};
use qbiv::model::{contraction_radius, PatternSampling};
use qbiv::{run_replications, Setup, SimScenario};

use crate::config::Config;
use crate::CliError;

pub const TRUTH_FILE: &str = "theta_star.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RESULTS_FILE: &str = "results.csv";
pub const REPLICATES_FILE: &str = "replicates.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

fn output_dir(cfg: &Config) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).map_err(|source| qbiv::Error::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn scenario_entries(prov: Provenance, sc: &SimScenario) -> Provenance {
    prov.with("setup", sc.setup.number().to_string())
        .with("n", sc.n.to_string())
        .with("p", sc.p.to_string())
        .with("m_or_T", sc.m_or_t.to_string())
        .with("snr", io::fmt_f64(sc.snr))
}

fn load(dir: &Path) -> Result<io::Dataset, CliError> {
    Ok(io::load_dataset(&DatasetPaths::in_dir(dir))?)
}

fn read_truth(path: &Path, p: usize) -> Result<DVector<f64>, CliError> {
    let t = io::read_table(path)?;
    if t.values.ncols() != 1 || t.values.nrows() != p {
        return Err(qbiv::Error::DimensionMismatch(format!(
            "{}: expected one column of {p} values, got {}x{}",
            path.display(),
            t.values.nrows(),
            t.values.ncols()
        ))
        .into());
    }
    Ok(t.values.column(0).into_owned())
}

pub fn simulate(cfg: &Config) -> Result<(), CliError> {
    let sc = cfg.scenario()?;
    let sim = sc.generate()?;
    let dir = output_dir(cfg)?;
    let prov = scenario_entries(Provenance::new(&cfg.canonical_text(), vec![sc.seed]), &sc);
    let header = prov.lines();
    io::write_dataset(&dir, &sim.data, &sim.map, &header)?;
    let truth = DMatrix::from_column_slice(sc.p, 1, sim.truth.theta_star.as_slice());
    io::write_table(&dir.join(TRUTH_FILE), &["theta_star".to_owned()], &truth, &header)?;
    println!("wrote dataset (n = {}, p = {}, q = {}) to {}", sc.n, sc.p, sim.data.q(), dir.display());
    Ok(())
}

pub fn fit(cfg: &Config) -> Result<(), CliError> {
    let data_dir = cfg
        .fit
        .data
        .clone()
        .ok_or_else(|| CliError::Usage("fit needs --data DIR".into()))?;
    let ds = load(&data_dir)?;
    let policy = cfg.policy();
    let hyper = policy.resolve(Setup::Setup1, &ds.data);
    let mut chain_cfg = cfg.chain();
    let emit_trace = cfg.fit.emit_trace.unwrap_or(false);
    chain_cfg.record_trace = emit_trace;
    let chain = fit_chain(&ds.data, &ds.map, &hyper, &chain_cfg, policy.lambda_scad, policy.scad_a)?;

    let level = cfg.fit.level.unwrap_or(0.95);
    let p = ds.data.p();
    let selected = select_model(&chain, policy.threshold)?;
    let ci = (0..p)
        .map(|j| credible_interval(&chain, j, level))
        .collect::<qbiv::Result<Vec<_>>>()?;
    let summary = PosteriorSummary {
        names: ds.x_names.clone(),
        inclusion_prob: chain.inclusion_prob.clone(),
        selected: selected.bits().to_vec(),
        theta_hat: point_estimate(&chain)?,
        ci,
        level,
    };
    let prov = Provenance::new(&cfg.canonical_text(), vec![chain_cfg.seed])
        .with("lambda", io::fmt_f64(policy.nominal_lambda(Setup::Setup1, ds.data.n())))
        .with("lambda_scale", policy.lambda_scale.as_str())
        .with_hyper(&hyper, p)
        .with("accept_rate_single", io::fmt_f64(chain.accept_rate_single))
        .with("accept_rate_double", io::fmt_f64(chain.accept_rate_double))
        .with("max_refresh_drift", io::fmt_f64(chain.max_refresh_drift));

    let dir = output_dir(cfg)?;
    io::write_summary(&dir.join(SUMMARY_FILE), &summary, &prov)?;
    println!("wrote {}", dir.join(SUMMARY_FILE).display());
    if emit_trace {
        if let Some(rows) = &chain.trace {
            io::write_trace(&dir.join(TRACE_FILE), rows, &prov)?;
            println!("wrote {}", dir.join(TRACE_FILE).display());
        }
    }
    if cfg.fit.emit_plotdata.unwrap_or(false) {
        let j = cfg.fit.coordinate.unwrap_or(1);
        if j < 1 || j > p {
            return Err(CliError::Usage(format!("coordinate {j} outside 1..={p}")));
        }
        let name = &ds.x_names[j - 1];
        let draws: Vec<f64> = chain
            .theta_draws
            .as_ref()
            .ok_or(qbiv::Error::MissingThetaDraws)?
            .iter()
            .map(|t| t[j - 1])
            .collect();
        let plot = dir.join(format!("plotdata_{name}.csv"));
        let raw = dir.join(format!("draws_{name}.csv"));
        io::write_plotdata(&plot, name, &draws, cfg.fit.bins.unwrap_or(40), &prov)?;
        io::write_draws(&raw, name, &draws, &prov)?;
        println!("wrote {} and {}", plot.display(), raw.display());
    }
    Ok(())
}

pub fn replicate(cfg: &Config) -> Result<(), CliError> {
    let sc = cfg.scenario()?;
    let policy = cfg.policy();
    let r = cfg.replicate.replicates.unwrap_or(30);
    let report = run_replications(&sc, r, &cfg.chain(), &policy)?;
    if report.successes() == 0 {
        let first = report.records.first().and_then(|rec| rec.outcome.as_ref().err().cloned());
        return Err(CliError::Runtime(format!(
            "all {r} replicates failed; first error: {}",
            first.unwrap_or_default()
        )));
    }
    let mut prov = scenario_entries(Provenance::new(&cfg.canonical_text(), report.seeds()), &sc)
        .with("base_seed", sc.seed.to_string())
        .with("lambda", io::fmt_f64(policy.nominal_lambda(sc.setup, sc.n)))
        .with("lambda_scale", policy.lambda_scale.as_str());
    if let Some(h) = &report.hyper {
        prov = prov.with_hyper(h, sc.p);
    }
    let prov = prov
        .with("replicates", report.replicates.to_string())
        .with("failures", report.failures.to_string());

    let dir = output_dir(cfg)?;
    let per_coord = cfg.replicate.per_coordinate_mse.unwrap_or(false);
    io::write_results(&dir.join(RESULTS_FILE), &report, &prov, per_coord)?;
    io::write_replicates(&dir.join(REPLICATES_FILE), &report, &prov)?;
    log::info!("{} replicates in {:.1} s", report.replicates, report.wall_seconds);
    println!(
        "TP {:.3} ({:.3})  FP {:.3} ({:.3})  MSE_S {:.4} ({:.4})  MSE_N {:.4} ({:.4})  failures {}",
        report.tp.mean,
        report.tp.sd,
        report.fp.mean,
        report.fp.sd,
        report.mse_s.mean,
        report.mse_s.sd,
        report.mse_n.mean,
        report.mse_n.sd,
        report.failures
    );
    println!("wrote {}", dir.join(RESULTS_FILE).display());
    Ok(())
}

pub fn diagnose(cfg: &Config) -> Result<(), CliError> {
    let (data, map, truth, setup, seeds) = match &cfg.fit.data {
        Some(dir) => {
            let ds = load(dir)?;
            let truth = match &cfg.diagnose.truth {
                Some(path) => Some(read_truth(path, ds.data.p())?),
                None => None,
            };
            (ds.data, ds.map, truth, Setup::Setup1, vec![cfg.chain().seed])
        }
        None => {
            let sc = cfg.scenario()?;
            let sim = sc.generate()?;
            (sim.data, sim.map, Some(sim.truth.theta_star), sc.setup, vec![sc.seed])
        }
    };
    let policy = cfg.policy();
    let hyper = policy.resolve(setup, &data);
    let d = &cfg.diagnose;
    let s_star = match &truth {
        Some(t) => t.iter().filter(|v| **v != 0.0).count().max(1),
        None => d.s_star.unwrap_or(5),
    };
    let sigma0 = d.sigma0.unwrap_or(1.0);
    let sampling = if d.exhaustive.unwrap_or(false) {
        PatternSampling::Exhaustive
    } else {
        PatternSampling::Random {
            draws: d.patterns.unwrap_or(200),
            seed: seeds[0],
        }
    };
    let eigen = contraction_radius(&data, &hyper, &map, s_star, sigma0, sampling)?;
    let big_m = d.big_m.unwrap_or(12.0);
    let small_m = d.small_m.unwrap_or(2.0);

    let (ball, full) = match &truth {
        Some(theta_star) => {
            let mut chain_cfg = cfg.chain();
            chain_cfg.record_theta = true;
            chain_cfg.record_raw_theta = true;
            if cfg.fit.data.is_none() {
                chain_cfg.seed = seeds[0];
            }
            let chain = fit_chain(&data, &map, &hyper, &chain_cfg, policy.lambda_scad, policy.scad_a)?;
            let inner = small_m * (hyper.gamma * data.p() as f64).sqrt();
            let (b, f) = ball_fractions(&chain, theta_star, big_m * eigen.epsilon, inner)?;
            (Some(b), f)
        }
        None => (None, None),
    };
    let record = DiagnosticsRecord {
        eigen,
        big_m,
        small_m,
        sigma0,
        ball_fraction: ball,
        full_ball_fraction: full,
    };
    let prov = Provenance::new(&cfg.canonical_text(), seeds)
        .with("lambda", io::fmt_f64(policy.nominal_lambda(setup, data.n())))
        .with("lambda_scale", policy.lambda_scale.as_str())
        .with_hyper(&hyper, data.p())
        .with("s_star", s_star.to_string());
    let dir = output_dir(cfg)?;
    io::write_diagnostics(&dir.join(DIAGNOSTICS_FILE), &record, &prov)?;
    println!(
        "v_low {:.4e}  v_high {:.4e}  t_bar {}  epsilon {:.4e}  radius {:.4e}",
        eigen.v_low,
        eigen.v_high,
        eigen.t_bar,
        eigen.epsilon,
        big_m * eigen.epsilon
    );
    if let Some(b) = ball {
        println!("ball fraction {b:.4}");
    }
    println!("wrote {}", dir.join(DIAGNOSTICS_FILE).display());
    Ok(())
}
