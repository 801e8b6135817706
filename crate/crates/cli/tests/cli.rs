use std::path::Path;
use std::process::{Command, Output};

fn wigmagic(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wigmagic"))
        .arg("--output")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn kappa_sweep_rx_is_flat_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = wigmagic(dir.path(), &["kappa-sweep", "--family", "rx", "--points", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("kappa-sweep.csv"));
    assert_eq!(rows.len(), 9);
    let k = column(&header, "kappa");
    for r in rows {
        assert!((r[k].parse::<f64>().unwrap() - 2.0).abs() < 1e-6, "{r:?}");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("kappa-sweep.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(summary["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn dichotomy_contains_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = wigmagic(dir.path(), &["dichotomy", "--phi", "1.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("dichotomy.csv"));
    let (t, cj, sa) = (
        column(&header, "theta_b"),
        column(&header, "c_joint"),
        column(&header, "superadditive"),
    );
    let reference = [
        (std::f64::consts::FRAC_PI_2, 0.427, "true"),
        (1.20, 0.454, "false"),
        (0.35, 0.332, "false"),
        (1.94, 0.590, "true"),
        (2.80, 0.450, "true"),
    ];
    for (theta, c, flag) in reference {
        let row = rows
            .iter()
            .find(|r| (r[t].parse::<f64>().unwrap() - theta).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no row at theta {theta}"));
        assert!((row[cj].parse::<f64>().unwrap() - c).abs() <= 0.002, "{row:?}");
        assert_eq!(row[sa], flag);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--seed", "3", "monotonicity", "--samples", "100"];
    wigmagic(a.path(), &args);
    wigmagic(b.path(), &args);
    let read = |d: &Path| std::fs::read(d.join("monotonicity.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["kappa-sweep"],
        &["kappa-sweep", "--family", "rz"],
        &["distance", "--state", "nonsense"],
        &["wigner", "--state", "[[1,0],[0,0],[0,0]]"],
        &["monotonicity", "--samples", "10"],
        &["--threads", "0", "wigner", "--state", "t"],
        &[],
    ] {
        let out = wigmagic(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_supplies_command_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let results = dir.path().join("results");
    std::fs::write(
        &cfg,
        format!(
            "command = \"kappa-sweep --family brz\"\nseed = 99\noutput = {:?}\n\n[grids]\npoints = 5\n",
            results.to_str().unwrap()
        ),
    )
    .unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_wigmagic"))
        .args(["--config", cfg.to_str().unwrap(), "--seed", "7"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let (_, rows) = read_csv(&results.join("kappa-sweep.csv"));
    assert_eq!(rows.len(), 5);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(results.join("kappa-sweep.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);

    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_wigmagic"))
        .args(["--config", cfg.to_str().unwrap(), "wigner", "--state", "t"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn json_format_and_single_qubit_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = wigmagic(dir.path(), &["--format", "json", "wigner", "--state", "t-state"]);
    assert_eq!(out.status.code(), Some(0));
    let w: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("wigner.json")).unwrap()).unwrap();
    let values: Vec<f64> = serde_json::from_value(w["values"].clone()).unwrap();
    assert_eq!(values.len(), 4);
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let out = wigmagic(dir.path(), &["verify", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (_, rows) = read_csv(&dir.path().join("verify.csv"));
    assert!(rows.iter().all(|r| r[3] == "true"));
}
