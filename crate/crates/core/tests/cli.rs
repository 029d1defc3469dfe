use std::path::Path;
use std::process::{Command, Output};

use bloch_qfi::channels::noisy_rotation;
use bloch_qfi::geometry::GateSpec;
use bloch_qfi::metrology::{evolve, noisy_rotation_derivative, qfi_from_bloch};
use bloch_qfi::{BlochVector, NoiseParams, Vec3};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloch-qfi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|c| c == name).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["qfi", "--theta", "pi/4"]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let bad = run(&["qfi", "--theta", "7"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("theta"));
    assert_eq!(run(&["qfi", "--theta", "pi/4", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["qfi", "--theta", "pi/4", "--k-tilt", "-2"]).status.code(), Some(1));
    assert_eq!(run(&["qfi"]).status.code(), Some(1));
    assert_eq!(run(&["optimal"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing").join("out.csv");
    let io = run(&["qfi", "--theta", "pi/4", "--output", unwritable.to_str().unwrap()]);
    assert_eq!(io.status.code(), Some(2));
    assert_eq!(run(&["qfi", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
    let v = run(&["validate", "--samples", "200", "--tolerance-scale", "0"]);
    assert_eq!(v.status.code(), Some(3));
    assert!(stdout(&v).contains("FAIL mc-vs-analytic"));
}

#[test]
fn validate_passes_with_few_samples() {
    let v = run(&["validate", "--samples", "100", "--seed", "11"]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert_eq!(stdout(&v).matches("PASS").count(), 6);
}

#[test]
fn optimal_reports_five_steps_at_k3() {
    let o = run(&["optimal", "--k-dephase", "3"]);
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows[0][column(&h, "t_int")], "5");
    let o = run(&["optimal", "--k-dephase", "inf"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbounded"));
    let o = run(&["optimal", "--k-dephase", "3", "--k-tilt", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("argmax"));
}

#[test]
fn optimal_matches_qfi_argmax_at_half() {
    let o = run(&["optimal", "--k-dephase", "0.5"]);
    let (h, rows) = parse_csv(&stdout(&o));
    let t_int: usize = rows[0][column(&h, "t_int")].parse().unwrap();
    let q = run(&["qfi", "--theta", "pi/4", "--k-dephase", "0.5", "--steps", "20"]);
    let (h, rows) = parse_csv(&stdout(&q));
    let qfi: Vec<f64> = rows.iter().map(|r| r[column(&h, "qfi")].parse().unwrap()).collect();
    let argmax = (0..qfi.len()).max_by(|&a, &b| qfi[a].total_cmp(&qfi[b])).unwrap();
    assert_eq!(argmax, t_int);
}

#[test]
fn matrix_examples() {
    let (_, rows) = parse_csv(&stdout(&run(&["matrix", "--theta", "pi/2", "--k-tilt", "0"])));
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row[1..].iter().enumerate() {
            let v: f64 = cell.parse().unwrap();
            let expected = if i == j { 1.0 / 3.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15);
        }
    }
    let (_, rows) = parse_csv(&stdout(&run(&["matrix", "--theta", "pi/4"])));
    let c: f64 = rows[0][1].parse().unwrap();
    assert!((c - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn csv_round_trips_pure_state_qfi() {
    let args = ["qfi", "--theta", "0.7", "--axis", "1,2,2", "--b0", "0.6,0,0.8", "--steps", "40"];
    let (h, rows) = parse_csv(&stdout(&run(&args)));
    let spec = GateSpec::with_unnormalized_axis(Vec3::new(1.0, 2.0, 2.0), 0.7).unwrap();
    let b0 = BlochVector::new(Vec3::new(0.6, 0.0, 0.8)).unwrap();
    let map = noisy_rotation(&spec, NoiseParams::NOISELESS).unwrap();
    let dmap = noisy_rotation_derivative(&spec, NoiseParams::NOISELESS).unwrap();
    let trace = evolve(&map, &dmap, b0, 40).unwrap();
    let get = |r: &Vec<String>, c: &str| -> f64 { r[column(&h, c)].parse().unwrap() };
    assert_eq!(rows.len(), 41);
    for (row, step) in rows.iter().zip(&trace.steps) {
        let b = BlochVector::new(Vec3::new(get(row, "bx"), get(row, "by"), get(row, "bz"))).unwrap();
        let q = qfi_from_bloch(b, step.db);
        assert!((q - get(row, "qfi")).abs() < 1e-9);
        assert!((get(row, "purity") - 1.0).abs() < 1e-12);
    }
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name);
    for name in ["a.csv", "b.csv"] {
        let path = out(name);
        let o = run(&[
            "qfi", "--theta", "pi/8", "--k-dephase", "3", "--k-tilt", "10", "--seed", "5",
            "--sweep", "alpha=pi/4,pi/2", "--sweep", "k_tilt=1,inf", "--output", path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(out("a.csv")).unwrap(), std::fs::read(out("b.csv")).unwrap());
    let a = run(&["validate", "--samples", "500", "--seed", "9"]);
    let b = run(&["validate", "--samples", "500", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_and_csv_hold_identical_values() {
    let base = ["evolve", "--theta", "pi/4", "--k-dephase", "2", "--k-tilt", "4", "--sweep", "k_dephase=1,inf", "--steps", "15"];
    let csv = stdout(&run(&base));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&with_json))).unwrap();
    let (h, rows) = parse_csv(&csv);
    let objects = json.as_array().unwrap();
    assert_eq!(objects.len(), rows.len());
    for (row, obj) in rows.iter().zip(objects) {
        let obj = obj.as_object().unwrap();
        assert_eq!(obj.keys().cloned().collect::<Vec<_>>(), h);
        for (name, cell) in h.iter().zip(row) {
            match &obj[name] {
                serde_json::Value::String(s) => assert_eq!(s, cell),
                v => assert_eq!(v.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{name}"),
            }
        }
    }
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig3.cfg");
    write(
        &cfg,
        "# tilting, several angles\nk_tilt = 7\nsteps = 30\nsweep = theta=pi/8,pi/4,pi/2\nformat = csv\n",
    );
    let from_file = stdout(&run(&["qfi", "--config", cfg.to_str().unwrap()]));
    let (h, rows) = parse_csv(&from_file);
    assert_eq!(h[0], "theta");
    assert_eq!(rows.len(), 3 * 31);

    let overridden = stdout(&run(&["qfi", "--config", cfg.to_str().unwrap(), "--steps", "5", "--sweep", "theta=pi/3"]));
    let (_, rows) = parse_csv(&overridden);
    assert_eq!(rows.len(), 6);
    let direct = stdout(&run(&["qfi", "--k-tilt", "7", "--steps", "5", "--sweep", "theta=pi/3"]));
    assert_eq!(overridden, direct);

    write(&cfg, "k_tilt = 7\nwobble = 3\n");
    let bad = run(&["qfi", "--config", cfg.to_str().unwrap(), "--theta", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("wobble"));
}

#[test]
fn decompose_emits_five_series_and_reports_deviation() {
    let s = 17f64.sqrt();
    let b0 = format!("0,{},{}", 1.0 / s, 4.0 / s);
    let o = run(&["qfi", "--theta", "pi/8", "--k-dephase", "3", "--k-tilt", "10", "--b0", &b0, "--steps", "10", "--decompose", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut labels: Vec<&str> = json.as_array().unwrap().iter().map(|r| r["series"].as_str().unwrap()).collect();
    labels.dedup();
    assert_eq!(labels, ["complete", "dephased", "perpendicular", "parallel", "sum"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max relative deviation"));
}
