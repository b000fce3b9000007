use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisyquant"))
        .args(args)
        .output()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn curves_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    let o = run(&[
        "curves",
        "--bits",
        "1,2",
        "--antennas",
        "1,100",
        "--snr-db",
        "-30:10:10",
        "--sigma-n",
        "0.5,1",
        "--transfer-points",
        "21",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let transfer = read(&out.join("transfer.csv"));
    assert!(transfer.contains("# seed: 0"));
    let rows = data_rows(&transfer);
    assert_eq!(rows.len(), 2 * 2 * 21);
    // odd symmetry within each 21-sample curve
    for curve in rows.chunks(21) {
        for k in 0..21 {
            let f: f64 = curve[k][3].parse().unwrap();
            let g: f64 = curve[20 - k][3].parse().unwrap();
            assert!((f + g).abs() < 1e-9, "{f} {g}");
        }
    }

    let adc = data_rows(&read(&out.join("adc.csv")));
    assert_eq!(adc.len(), 2 * 5);

    let array_text = read(&out.join("array.csv"));
    assert!(array_text
        .lines()
        .any(|l| l == "bits,m,snr_cum_in_db,sf_opt_db,nf_db,sinad_cum_out_db"));
    let array = data_rows(&array_text);
    assert_eq!(array.len(), 2 * 2 * 5);
    let floor: f64 = array[0][4].parse().unwrap();
    assert_eq!(array[0][0], "1");
    assert_eq!(array[0][2], "-30.0000");
    assert!((floor - 1.9612).abs() < 0.01);
}

#[test]
fn curves_needs_a_directory() {
    let o = run(&["curves", "--bits", "1", "--antennas", "1", "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threshold_table_rows() {
    let o = run(&[
        "threshold-table",
        "--bits",
        "1,3",
        "--antennas",
        "10000",
        "--nf-limit-db",
        "3",
    ]);
    assert!(o.status.success());
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][..4], ["3", "10000", "3.0000", "ok"]);
    let t3: f64 = rows[1][4].parse().unwrap();
    assert!(t3 >= 40.0);

    let o = run(&[
        "threshold-table",
        "--bits",
        "1",
        "--antennas",
        "1,100",
        "--nf-limit-db",
        "1",
    ]);
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[3], "no-solution");
        assert_eq!(r[4], "");
    }
}

#[test]
fn simulate_ber_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ber.json");
    let o = run(&[
        "simulate-ber",
        "--bits",
        "1",
        "--antennas",
        "8",
        "--snr-db",
        "10",
        "--trials",
        "32",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(&path)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["scenario"], "worst-case");
    assert_eq!(rows[1]["scenario"], "average");
    assert_eq!(rows[0]["seed"], 3);
    assert!(rows[0]["ci_low"].as_f64().unwrap() <= rows[0]["ber"].as_f64().unwrap());
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--trials", "20000"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("one-bit low-SNR NF floor"));
    assert!(!report.contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let o = run(&[
        "validate",
        "--trials",
        "20000",
        "--perturb-gain",
        "1.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report = read(&path);
    let failing: Vec<&str> = report.lines().filter(|l| l.ends_with(",FAIL")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].contains("decomposition identity"));
}

#[test]
fn unwritable_output_is_reported() {
    let o = run(&[
        "threshold-table",
        "--bits",
        "1",
        "--antennas",
        "1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.csv"));
}
