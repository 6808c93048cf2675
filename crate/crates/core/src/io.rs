//! CSV dataset schema, instrument-map files and result emission.
//!
//! Datasets are four files: `y.csv` (one column), `x.csv` (p columns), `w.csv`
//! (q columns), each with a header row, and an optional map file with lines
//!
//! ```text
//! # comment
//! educ: qob1, qob2, qob3
//! 2: 4, 5
//! ```
//!
//! where either side may use column names or 1-based column numbers.
//! Regressors the map does not mention are instrumented by the W column with
//! the same name. Floats are written in shortest round-trip scientific
//! notation, so every file reads back to the identical bits.
//!
//! Output files start with `#` provenance lines (tool version, SHA-256 of the
//! effective configuration, seeds, generator and hyperparameters).

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::AggregateReport;
use crate::model::{normalize_instruments, DesignData, EigenDiagnostics, HyperParams, InstrumentMap};
use crate::sampler::TraceRow;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const Y_FILE: &str = "y.csv";
pub const X_FILE: &str = "x.csv";
pub const W_FILE: &str = "w.csv";
pub const MAP_FILE: &str = "map.txt";
/// Optional pre-normalization column norms of W.
pub const SCALES_FILE: &str = "w_scales.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Full-precision float rendering; `str::parse` recovers the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// A numeric table with its header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let names: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if names.is_empty() {
        return Err(parse_err(path, 1, "missing header row"));
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(Table {
        values: DMatrix::from_row_slice(rows, names.len(), &data),
        names,
    })
}

pub fn write_table(path: &Path, names: &[String], values: &DMatrix<f64>, header: &[String]) -> Result<()> {
    if names.len() != values.ncols() {
        return Err(Error::dims(format!(
            "{} column names for {} columns",
            names.len(),
            values.ncols()
        )));
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for line in header {
        writeln!(out, "# {line}").map_err(io_err(path))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    for i in 0..values.nrows() {
        w.write_record(values.row(i).iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Paths of one dataset on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetPaths {
    pub y: PathBuf,
    pub x: PathBuf,
    pub w: PathBuf,
    pub map: Option<PathBuf>,
    pub scales: Option<PathBuf>,
}

impl DatasetPaths {
    /// Standard file names inside `dir`; the map and scales files are used
    /// only when present.
    pub fn in_dir(dir: &Path) -> Self {
        let optional = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Self {
            y: dir.join(Y_FILE),
            x: dir.join(X_FILE),
            w: dir.join(W_FILE),
            map: optional(MAP_FILE),
            scales: optional(SCALES_FILE),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub data: DesignData,
    pub map: InstrumentMap,
    pub x_names: Vec<String>,
    pub w_names: Vec<String>,
}

fn resolve_column(token: &str, names: &HashMap<&str, usize>, count: usize) -> Option<usize> {
    if let Some(&i) = names.get(token) {
        return Some(i);
    }
    match token.parse::<usize>() {
        Ok(k) if (1..=count).contains(&k) => Some(k - 1),
        _ => None,
    }
}

/// Parses a map file into per-regressor instrument lists; regressors not
/// mentioned stay `None`.
pub fn parse_map(path: &Path, x_names: &[String], w_names: &[String]) -> Result<Vec<Option<Vec<usize>>>> {
    let file = File::open(path).map_err(io_err(path))?;
    let xi: HashMap<&str, usize> = x_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let wi: HashMap<&str, usize> = w_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut groups: Vec<Option<Vec<usize>>> = vec![None; x_names.len()];
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(io_err(path))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, rhs) = content
            .split_once(':')
            .ok_or_else(|| parse_err(path, lineno, "expected `regressor: instrument, ...`"))?;
        let j = resolve_column(lhs.trim(), &xi, x_names.len())
            .ok_or_else(|| parse_err(path, lineno, format!("unknown regressor {:?}", lhs.trim())))?;
        let mut list = Vec::new();
        for tok in rhs.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let l = resolve_column(tok, &wi, w_names.len())
                .ok_or_else(|| parse_err(path, lineno, format!("unknown instrument {tok:?}")))?;
            list.push(l);
        }
        if list.is_empty() {
            return Err(parse_err(path, lineno, "empty instrument list"));
        }
        if groups[j].is_some() {
            return Err(parse_err(path, lineno, format!("regressor {:?} mapped twice", x_names[j])));
        }
        groups[j] = Some(list);
    }
    Ok(groups)
}

/// Reads, validates and normalizes a dataset.
pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let y = read_table(&paths.y)?;
    let x = read_table(&paths.x)?;
    let w = read_table(&paths.w)?;
    if y.values.ncols() != 1 {
        return Err(Error::dims(format!("{} must have one column", paths.y.display())));
    }
    let n = y.values.nrows();
    if x.values.nrows() != n || w.values.nrows() != n {
        return Err(Error::dims(format!(
            "row counts differ: y {n}, X {}, W {}",
            x.values.nrows(),
            w.values.nrows()
        )));
    }
    let explicit = match &paths.map {
        Some(p) => parse_map(p, &x.names, &w.names)?,
        None => vec![None; x.names.len()],
    };
    let wi: HashMap<&str, usize> = w.names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let groups = explicit
        .into_iter()
        .enumerate()
        .map(|(j, g)| match g {
            Some(g) => Ok(g),
            None => wi
                .get(x.names[j].as_str())
                .map(|&l| vec![l])
                .ok_or(Error::UnmappedRegressor(j)),
        })
        .collect::<Result<Vec<_>>>()?;
    let map = InstrumentMap::new(groups, w.names.len())?;
    let yv = DVector::from_column_slice(y.values.as_slice());
    let mut data = normalize_instruments(DesignData::new(yv, x.values, w.values)?)?;
    if let Some(sp) = &paths.scales {
        let s = read_table(sp)?;
        if s.values.len() != data.q() || s.values.nrows() != 1 {
            return Err(Error::dims(format!(
                "{} must hold one row of {} scales",
                sp.display(),
                data.q()
            )));
        }
        for (l, v) in s.values.iter().enumerate() {
            data.instrument_scales[l] *= v;
        }
    }
    Ok(Dataset {
        data,
        map,
        x_names: x.names,
        w_names: w.names,
    })
}

/// Default column names `x1, …` and `w1, …`.
pub fn default_names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Writes a dataset in the schema read by [`load_dataset`]: W as stored (unit
/// columns when normalized), its scales, and the map by 1-based column number.
pub fn write_dataset(dir: &Path, data: &DesignData, map: &InstrumentMap, header: &[String]) -> Result<DatasetPaths> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let paths = DatasetPaths {
        y: dir.join(Y_FILE),
        x: dir.join(X_FILE),
        w: dir.join(W_FILE),
        map: Some(dir.join(MAP_FILE)),
        scales: Some(dir.join(SCALES_FILE)),
    };
    let y = DMatrix::from_column_slice(data.n(), 1, data.y.as_slice());
    write_table(&paths.y, &["y".to_owned()], &y, header)?;
    write_table(&paths.x, &default_names("x", data.p()), &data.x, header)?;
    write_table(&paths.w, &default_names("w", data.q()), &data.w, header)?;
    let scales = DMatrix::from_row_slice(1, data.q(), data.instrument_scales.as_slice());
    write_table(paths.scales.as_ref().unwrap(), &default_names("w", data.q()), &scales, header)?;
    let mp = paths.map.as_ref().unwrap();
    let mut out = BufWriter::new(File::create(mp).map_err(io_err(mp))?);
    for line in header {
        writeln!(out, "# {line}").map_err(io_err(mp))?;
    }
    for (j, g) in map.groups().iter().enumerate() {
        let list: Vec<String> = g.iter().map(|l| (l + 1).to_string()).collect();
        writeln!(out, "{}: {}", j + 1, list.join(", ")).map_err(io_err(mp))?;
    }
    out.flush().map_err(io_err(mp))?;
    Ok(paths)
}

/// Provenance block written at the top of every output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub generator: String,
    /// Extra `key = value` lines, e.g. the resolved hyperparameters.
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(config_text: &str, seeds: Vec<u64>) -> Self {
        Self {
            config_hash: config_hash(config_text),
            seeds,
            generator: crate::rng::GENERATOR_ID.to_owned(),
            entries: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.entries.push((key.into(), value.into()));
        self
    }

    /// Adds the resolved hyperparameters; `lambda_effective` is the constant
    /// applied to the unit-norm instruments.
    pub fn with_hyper(self, hyper: &HyperParams, p: usize) -> Self {
        self.with("lambda_effective", fmt_f64(hyper.lambda))
            .with("slab_variance", fmt_f64(1.0 / hyper.rho_sq))
            .with("rho_sq", fmt_f64(hyper.rho_sq))
            .with("gamma", fmt_f64(hyper.gamma))
            .with("u", fmt_f64(hyper.u))
            .with("q_prior", fmt_f64(hyper.q_prior(p)))
            .with("s_bar", hyper.s_bar.to_string())
    }

    pub fn lines(&self) -> Vec<String> {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = vec![
            format!("qbiv {VERSION}"),
            format!("config_sha256 = {}", self.config_hash),
            format!("generator = {}", self.generator),
            format!("seeds = {}", seeds.join(" ")),
        ];
        out.extend(self.entries.iter().map(|(k, v)| format!("{k} = {v}")));
        out
    }
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Reads the `key = value` provenance lines back from an output file.
pub fn read_provenance(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        let Some(rest) = line.strip_prefix("# ") else {
            break;
        };
        if let Some((k, v)) = rest.split_once(" = ") {
            out.push((k.to_owned(), v.to_owned()));
        }
    }
    Ok(out)
}

fn csv_writer(path: &Path, prov: &Provenance) -> Result<csv::Writer<BufWriter<File>>> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for line in prov.lines() {
        writeln!(out, "# {line}").map_err(io_err(path))?;
    }
    Ok(csv::Writer::from_writer(out))
}

pub const RESULTS_COLUMNS: [&str; 15] = [
    "setup", "n", "p", "m_or_T", "snr", "TP_mean", "TP_sd", "FP_mean", "FP_sd", "MSES_mean", "MSES_sd",
    "MSEN_mean", "MSEN_sd", "R", "seed",
];

/// One-row results table shaped like the simulation tables. With
/// `per_coordinate`, four columns with block-averaged MSEs are appended.
pub fn write_results(path: &Path, report: &AggregateReport, prov: &Provenance, per_coordinate: bool) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    let mut header: Vec<&str> = RESULTS_COLUMNS.to_vec();
    if per_coordinate {
        header.extend(["MSES_coord_mean", "MSES_coord_sd", "MSEN_coord_mean", "MSEN_coord_sd"]);
    }
    w.write_record(&header)?;
    let sc = &report.scenario;
    let mut row = vec![
        sc.setup.number().to_string(),
        sc.n.to_string(),
        sc.p.to_string(),
        sc.m_or_t.to_string(),
        fmt_f64(sc.snr),
    ];
    for s in [report.tp, report.fp, report.mse_s, report.mse_n] {
        row.push(fmt_f64(s.mean));
        row.push(fmt_f64(s.sd));
    }
    row.push(report.replicates.to_string());
    row.push(sc.seed.to_string());
    if per_coordinate {
        for s in [report.mse_s_per_coord, report.mse_n_per_coord] {
            row.push(fmt_f64(s.mean));
            row.push(fmt_f64(s.sd));
        }
    }
    w.write_record(&row)?;
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Per-replicate metric log.
pub fn write_replicates(path: &Path, report: &AggregateReport, prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["replicate", "seed", "TP", "FP", "MSES", "MSEN", "error"])?;
    for r in &report.records {
        let row = match &r.outcome {
            Ok(m) => vec![
                r.index.to_string(),
                r.seed.to_string(),
                m.tp.to_string(),
                m.fp.to_string(),
                fmt_f64(m.mse_s),
                fmt_f64(m.mse_n),
                String::new(),
            ],
            Err(e) => vec![
                r.index.to_string(),
                r.seed.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ],
        };
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Posterior summary of a single fit.
#[derive(Clone, Debug)]
pub struct PosteriorSummary {
    pub names: Vec<String>,
    pub inclusion_prob: DVector<f64>,
    pub selected: Vec<bool>,
    pub theta_hat: DVector<f64>,
    pub ci: Vec<(f64, f64)>,
    pub level: f64,
}

pub fn write_summary(path: &Path, s: &PosteriorSummary, prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["index", "name", "inclusion_prob", "selected", "theta_hat", "ci_lower", "ci_upper", "level"])?;
    for j in 0..s.names.len() {
        w.write_record([
            (j + 1).to_string(),
            s.names[j].clone(),
            fmt_f64(s.inclusion_prob[j]),
            u8::from(s.selected[j]).to_string(),
            fmt_f64(s.theta_hat[j]),
            fmt_f64(s.ci[j].0),
            fmt_f64(s.ci[j].1),
            fmt_f64(s.level),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_trace(path: &Path, rows: &[TraceRow], prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["sweep", "active", "log_post", "move", "accepted"])?;
    for r in rows {
        w.write_record([
            r.sweep.to_string(),
            r.active.to_string(),
            fmt_f64(r.log_post),
            r.move_kind.as_str().to_owned(),
            u8::from(r.accepted).to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Histogram of one coordinate's draws: equal-width bins over the draw range
/// with counts and densities.
pub fn histogram(draws: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if draws.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = draws.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![(lo, hi, draws.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &d in draws {
        let b = (((d - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, c))
        .collect()
}

/// Plot data for one coordinate: the draws and a histogram of them.
pub fn write_plotdata(path: &Path, coordinate: &str, draws: &[f64], bins: usize, prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["coordinate", "bin_lower", "bin_upper", "count", "density"])?;
    let n = draws.len() as f64;
    for (lo, hi, c) in histogram(draws, bins) {
        let width = hi - lo;
        let density = if width > 0.0 { c as f64 / (n * width) } else { f64::INFINITY };
        w.write_record([coordinate.to_owned(), fmt_f64(lo), fmt_f64(hi), c.to_string(), fmt_f64(density)])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_draws(path: &Path, coordinate: &str, draws: &[f64], prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["draw", coordinate])?;
    for (i, d) in draws.iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt_f64(*d)])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Contraction diagnostics with the optional ball-membership fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub eigen: EigenDiagnostics,
    pub big_m: f64,
    pub small_m: f64,
    pub sigma0: f64,
    /// Share of draws with `‖θ_δ − θ★‖₂ ≤ M ε`.
    pub ball_fraction: Option<f64>,
    /// Share that also satisfies `‖θ − θ_δ‖₂ ≤ m √(γ p)`.
    pub full_ball_fraction: Option<f64>,
}

pub fn write_diagnostics(path: &Path, d: &DiagnosticsRecord, prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["quantity", "value"])?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "NA".to_owned());
    let rows = [
        ("v_low", fmt_f64(d.eigen.v_low)),
        ("v_high", fmt_f64(d.eigen.v_high)),
        ("t_bar", d.eigen.t_bar.to_string()),
        ("kappa_1", fmt_f64(d.eigen.kappa_1)),
        ("epsilon", fmt_f64(d.eigen.epsilon)),
        ("patterns_evaluated", d.eigen.patterns_evaluated.to_string()),
        ("sigma0", fmt_f64(d.sigma0)),
        ("M", fmt_f64(d.big_m)),
        ("m", fmt_f64(d.small_m)),
        ("radius", fmt_f64(d.big_m * d.eigen.epsilon)),
        ("ball_fraction", opt(d.ball_fraction)),
        ("full_ball_fraction", opt(d.full_ball_fraction)),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 1.0 - f64::EPSILON] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn map_accepts_names_and_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.txt", "# groups\neduc: qob1, qob2, 3\n\n2: yob1 # trailing\n");
        let x = vec!["educ".to_owned(), "yob1".to_owned(), "yob2".to_owned()];
        let w: Vec<String> = ["qob1", "qob2", "qob3", "yob1", "yob2"].iter().map(|s| s.to_string()).collect();
        let g = parse_map(&p, &x, &w).unwrap();
        assert_eq!(g[0], Some(vec![0, 1, 2]));
        assert_eq!(g[1], Some(vec![3]));
        assert_eq!(g[2], None);
    }

    #[test]
    fn map_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let x = vec!["a".to_owned()];
        let w = vec!["b".to_owned()];
        let p = write(dir.path(), "m.txt", "\n\na b\n");
        assert!(matches!(parse_map(&p, &x, &w), Err(Error::Parse { line: 3, .. })));
        let p = write(dir.path(), "m2.txt", "a: zz\n");
        assert!(matches!(parse_map(&p, &x, &w), Err(Error::Parse { line: 1, .. })));
        let p = write(dir.path(), "m3.txt", "a: b\n1: 1\n");
        assert!(matches!(parse_map(&p, &x, &w), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn bad_number_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "a,b\n1,2\n3,oops\n");
        assert!(matches!(read_table(&p), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn histogram_counts_every_draw() {
        let d: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&d, 7);
        assert_eq!(h.len(), 7);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 100);
        assert_eq!(histogram(&[2.0, 2.0], 5), vec![(2.0, 2.0, 2)]);
    }

    #[test]
    fn config_hash_is_sha256() {
        assert_eq!(
            config_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
