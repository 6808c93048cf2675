use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use qbiv::io::{self, load_dataset, write_dataset, DatasetPaths, Provenance};
use qbiv::{Error, Setup, SimScenario};

fn write_csv(path: &Path, names: &[String], rows: usize, value: impl Fn(usize, usize) -> f64) {
    let m = DMatrix::from_fn(rows, names.len(), value);
    io::write_table(path, names, &m, &[]).unwrap();
}

#[test]
fn simulated_dataset_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    for (k, setup) in [Setup::Setup1, Setup::Setup2].into_iter().enumerate() {
        let sim = SimScenario {
            setup,
            n: 40,
            p: 12,
            m_or_t: 3,
            snr: 1.0,
            seed: 3,
        }
        .generate()
        .unwrap();
        let sub = dir.path().join(format!("d{k}"));
        let header = Provenance::new("cfg", vec![3]).lines();
        write_dataset(&sub, &sim.data, &sim.map, &header).unwrap();
        let back = load_dataset(&DatasetPaths::in_dir(&sub)).unwrap();
        assert_eq!(back.data, sim.data);
        assert_eq!(back.map, sim.map);
        for (a, b) in back.data.w.iter().zip(sim.data.w.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn grouped_census_shaped_design_is_accepted() {
    // education, 9 year dummies, 50 state dummies, 450 year×state interactions
    let n = 1020;
    let year = |i: usize| i % 10;
    let state = |i: usize| (i / 10) % 51;
    let mut x_names = vec!["educ".to_owned()];
    x_names.extend((1..10).map(|y| format!("yob{y}")));
    x_names.extend((1..51).map(|s| format!("sob{s}")));
    for y in 1..10 {
        for s in 1..51 {
            x_names.push(format!("yob{y}_sob{s}"));
        }
    }
    assert_eq!(x_names.len(), 510);
    let dummy = |name: &str, i: usize| -> f64 {
        let hit = if let Some((a, b)) = name.split_once('_') {
            a[3..].parse::<usize>().unwrap() == year(i) && b[3..].parse::<usize>().unwrap() == state(i)
        } else if let Some(y) = name.strip_prefix("yob") {
            y.parse::<usize>().unwrap() == year(i)
        } else if let Some(s) = name.strip_prefix("sob") {
            s.parse::<usize>().unwrap() == state(i)
        } else {
            unreachable!()
        };
        f64::from(u8::from(hit))
    };
    let qob = |i: usize| (i * 7 / 3) % 4;
    let mut w_names: Vec<String> = (1..4).map(|k| format!("qob{k}")).collect();
    w_names.extend(x_names[1..].iter().cloned());
    assert_eq!(w_names.len(), 512);

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_csv(&d.join("y.csv"), &["lwage".to_owned()], n, |i, _| 5.0 + 0.01 * (i % 17) as f64);
    write_csv(&d.join("x.csv"), &x_names, n, |i, j| {
        if j == 0 {
            12.0 + (qob(i) as f64) * 0.1 + (i % 5) as f64
        } else {
            dummy(&x_names[j], i)
        }
    });
    write_csv(&d.join("w.csv"), &w_names, n, |i, l| {
        if l < 3 {
            f64::from(u8::from(qob(i) == l + 1))
        } else {
            dummy(&w_names[l], i)
        }
    });
    fs::write(d.join("map.txt"), "educ: qob1, qob2, qob3\n").unwrap();
    let ds = load_dataset(&DatasetPaths::in_dir(d)).unwrap();
    assert_eq!((ds.data.p(), ds.data.q()), (510, 512));
    assert_eq!(ds.map.group(0), &[0, 1, 2]);
    for j in 1..510 {
        assert_eq!(ds.map.group(j), &[j + 2]);
    }

    // dropping an instrument column that a regressor relies on is an error
    let mut fewer = w_names.clone();
    fewer.retain(|s| s != "sob7");
    write_csv(&d.join("w.csv"), &fewer, n, |i, l| {
        if l < 3 {
            f64::from(u8::from(qob(i) == l + 1))
        } else {
            dummy(&fewer[l], i)
        }
    });
    let j = x_names.iter().position(|s| s == "sob7").unwrap();
    match load_dataset(&DatasetPaths::in_dir(d)) {
        Err(Error::UnmappedRegressor(k)) => assert_eq!(k, j),
        other => panic!("expected UnmappedRegressor, got {other:?}"),
    }
}

#[test]
fn mismatched_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_csv(&d.join("y.csv"), &["y".to_owned()], 5, |i, _| i as f64);
    write_csv(&d.join("x.csv"), &["a".to_owned()], 4, |i, _| i as f64 + 1.0);
    write_csv(&d.join("w.csv"), &["a".to_owned()], 5, |i, _| i as f64 + 1.0);
    let err = load_dataset(&DatasetPaths::in_dir(d)).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch(_)));
    assert!(err.is_data_error());
}

#[test]
fn provenance_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let prov = Provenance::new("a = 1", vec![7, 9]).with("lambda", "1e0");
    io::write_table(&p, &["v".to_owned()], &DMatrix::from_element(1, 1, 2.0), &prov.lines()).unwrap();
    let kv = io::read_provenance(&p).unwrap();
    assert!(kv.contains(&("seeds".to_owned(), "7 9".to_owned())));
    assert!(kv.contains(&("lambda".to_owned(), "1e0".to_owned())));
    assert!(kv.contains(&("config_sha256".to_owned(), io::config_hash("a = 1"))));
    assert_eq!(io::read_table(&p).unwrap().values[(0, 0)], 2.0);
}
