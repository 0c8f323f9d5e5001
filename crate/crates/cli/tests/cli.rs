use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iqsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iqsc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Rows as `(header -> value)` lookups.
fn rows(csv: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = csv.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(str::to_owned)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn empty_scheme_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schemes": [], "irr_db": 20, "snr_db": [0, 10]}"#);
    let o = iqsc(&["analytic", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schemes"), "{}", stderr(&o));
}

#[test]
fn unknown_scheme_names_the_key() {
    let o = iqsc(&["sweep", "--schemes", "ideal,stbc", "--irr-db", "20", "--snr-db", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("schemes") && err.contains("stbc"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schemes": ["ideal"], "irr_db": 20, "snr_db": 0, "snr": 5}"#);
    let o = iqsc(&["analytic", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("snr"), "{}", stderr(&o));
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schemes": ["ideal"], "irr_db": "#);
    let o = iqsc(&["analytic", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid JSON"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_error() {
    let o = iqsc(&["analytic", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_preset_lists_the_available_ones() {
    let o = iqsc(&["preset", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig4-outage"));
}

#[test]
fn rate_preset_covers_half_to_six() {
    let o = iqsc(&["preset", "fig3-outage-vs-rate"]);
    assert!(o.status.success());
    let rows = rows(&stdout(&o));
    let mut rates: Vec<f64> = rows.iter().map(|r| field(r, "rate").parse().unwrap()).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    assert_eq!(rates.len(), 23);
    assert_eq!(rates[0], 0.5);
    assert_eq!(*rates.last().unwrap(), 6.0);
    // Outage rises with rate for each scheme and IRR.
    for w in rows.windows(2) {
        let same = ["scheme", "irr_db"].iter().all(|k| field(&w[0], k) == field(&w[1], k));
        if same {
            let a: f64 = field(&w[0], "value").parse().unwrap();
            let b: f64 = field(&w[1], "value").parse().unwrap();
            assert!(b >= a);
        }
    }
}

#[test]
fn iqsc_outage_curve_ignores_irr() {
    let o = iqsc(&["preset", "fig4-outage"]);
    assert!(o.status.success());
    let rows = rows(&stdout(&o));
    let iqsc_at = |irr: &str| -> Vec<String> {
        rows.iter()
            .filter(|r| field(r, "scheme") == "iqsc" && field(r, "irr_db") == irr)
            .map(|r| field(r, "value").to_owned())
            .collect()
    };
    let base = iqsc_at("20");
    assert_eq!(base.len(), 17);
    for irr in ["25", "30", "35"] {
        assert_eq!(iqsc_at(irr), base);
    }
    let uncompensated: Vec<_> = rows
        .iter()
        .filter(|r| field(r, "scheme") == "iqi-uncompensated" && field(r, "snr_db") == "40")
        .map(|r| field(r, "value").to_owned())
        .collect();
    assert_eq!(uncompensated.len(), 4);
    assert!(uncompensated.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn sweep_manifest_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let o = iqsc(&[
        "sweep", "--schemes", "ideal,iqsc,a-iqsc", "--order", "2,4", "--irr-db", "25", "--snr-db", "0,5,10",
        "--metric", "both", "--rate", "1", "--max-trials", "20000", "--seed", "7", "--workers", "3",
        "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = dir.path().join("a.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "sweep");
    assert_eq!(m["tool"], "iqsc-cli");

    let second = dir.path().join("b.csv");
    let o = iqsc(&[
        "sweep", "--config", manifest.to_str().unwrap(), "--workers", "1", "--out", second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(&first).unwrap();
    assert_eq!(a, fs::read(&second).unwrap());
    // 3 schemes x 2 orders x 3 SNRs of SER plus 3 x 3 of outage.
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 18 + 9);
}

#[test]
fn noiseless_iqsc_reports_floor_below_resolution() {
    let o = iqsc(&[
        "sweep", "--schemes", "iqsc", "--order", "4", "--irr-db", "20", "--snr-db", "inf", "--max-trials", "10000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(field(&rows[0], "snr_db"), "inf");
    assert_eq!(field(&rows[0], "events"), "0");
    assert_eq!(field(&rows[0], "flag"), "floor-below-resolution");
}

const SMALL_VALIDATION: &[&str] = &[
    "validate", "--schemes", "ideal,iqsc", "--order", "2", "--irr-db", "25", "--snr-db", "0,5",
    "--metric", "both", "--rate", "1", "--workers", "2",
];

#[test]
fn small_validation_passes() {
    let o = iqsc(SMALL_VALIDATION);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("8 passed, 0 failed, 0 skipped"), "{}", stdout(&o));
}

#[test]
fn corrupted_analytics_fail_validation() {
    let mut args = SMALL_VALIDATION.to_vec();
    args.extend(["--corrupt-analytics", "1.5"]);
    let o = iqsc(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn tiny_validation_warns_about_wide_intervals() {
    let o = iqsc(&[
        "validate", "--schemes", "ideal", "--order", "2", "--irr-db", "20", "--snr-db", "10", "--max-trials", "1000",
    ]);
    assert!(stdout(&o).contains("CI too wide for validation"), "{}", stdout(&o));
}

#[test]
fn schemes_without_references_are_skipped() {
    let o = iqsc(&[
        "validate", "--schemes", "rc-mrc", "--order", "4", "--irr-db", "20", "--snr-db", "5", "--max-trials", "20000",
        "--metric", "ser",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 passed, 0 failed, 1 skipped"), "{}", stdout(&o));
}

#[test]
fn default_validation_suite_covers_every_reference() {
    let o = iqsc(&["validate", "--workers", "2"]);
    let out = stdout(&o);
    let verdicts = out.lines().filter(|l| ["PASS ", "FAIL ", "SKIP "].iter().any(|p| l.starts_with(p))).count();
    assert_eq!(verdicts, 42, "{out}");
    let summary = out.lines().last().unwrap();
    assert!(summary.ends_with(", 0 skipped"), "{summary}");
    let failed = out.lines().filter(|l| l.starts_with("FAIL ")).count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}
