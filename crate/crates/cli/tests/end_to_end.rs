//! Runs the `parma` binary on the fixtures and compares against golden files.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files from the current output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn fixture(name: &str) -> String {
    root()
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn parma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parma"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Fixture paths in the output would make goldens machine-specific.
fn normalise(text: &str) -> String {
    text.replace(&fixture(""), "")
}

fn check_golden(name: &str, args: &[&str], code: i32) {
    let out = parma(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{name}: stderr {}",
        stderr(&out)
    );
    let got = normalise(&stdout(&out));
    let path = root().join("golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &got).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(got, want, "{name} differs from {}", path.display());
}

#[test]
fn stationarity_par14() {
    check_golden(
        "stationarity_par14",
        &["stationarity", "--model", &fixture("par14.toml")],
        0,
    );
    let text = stdout(&parma(&["stationarity", "--model", &fixture("par14.toml")]));
    assert!(text.contains("period_product: 0.6561\n"));
    assert!(text.contains("verdict: STATIONARY\n"));
}

#[test]
fn stationarity_par24() {
    check_golden(
        "stationarity_par24",
        &["stationarity", "--model", &fixture("par24.toml")],
        0,
    );
}

#[test]
fn greens_ar1() {
    check_golden(
        "greens_ar1",
        &["greens", "--model", &fixture("ar1.toml"), "-H", "4"],
        0,
    );
    let text = stdout(&parma(&[
        "greens",
        "--model",
        &fixture("ar1.toml"),
        "-H",
        "4",
    ]));
    let xi: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(xi, ["1", "0.5", "0.25", "0.125", "0.0625"]);
}

#[test]
fn greens_single_season() {
    check_golden(
        "greens_parma12_season2",
        &[
            "greens",
            "--model",
            &fixture("parma12.toml"),
            "-H",
            "5",
            "--season",
            "2",
        ],
        0,
    );
    let out = parma(&[
        "greens",
        "--model",
        &fixture("parma12.toml"),
        "-H",
        "5",
        "--season",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forecast_par12() {
    check_golden(
        "forecast_par12",
        &[
            "forecast",
            "--model",
            &fixture("par12.toml"),
            "--series",
            &fixture("par12_series.csv"),
            "-H",
            "4",
        ],
        0,
    );
}

#[test]
fn forecast_parma12_with_innovations() {
    check_golden(
        "forecast_parma12",
        &[
            "forecast",
            "--model",
            &fixture("parma12.toml"),
            "--series",
            &fixture("parma12_series.csv"),
            "-H",
            "3",
        ],
        0,
    );
}

#[test]
fn forecast_parma12_reconstructs_innovations() {
    let args = [
        "forecast",
        "--model",
        &fixture("parma12.toml"),
        "--series",
        &fixture("parma12_series_noeps.csv"),
        "-H",
        "3",
    ];
    check_golden("forecast_parma12_noeps", &args, 0);
    assert!(stderr(&parma(&args)).contains("reconstructed"));
}

#[test]
fn forecast_zero_horizon_is_usage_error() {
    let out = parma(&[
        "forecast",
        "--model",
        &fixture("par12.toml"),
        "--series",
        &fixture("par12_series.csv"),
        "-H",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn misaligned_season_is_rejected() {
    let out = parma(&[
        "forecast",
        "--model",
        &fixture("par12.toml"),
        "--series",
        &fixture("misaligned.csv"),
        "-H",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3: season 1 does not match time 2"));
}

#[test]
fn moments_par12() {
    check_golden(
        "moments_par12",
        &["moments", "--model", &fixture("par12.toml"), "-K", "3"],
        0,
    );
}

#[test]
fn moments_of_explosive_model_fail() {
    let out = parma(&["moments", "--model", &fixture("explosive.toml")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("do not exist"));
}

#[test]
fn validate_reports_every_violation() {
    check_golden(
        "validate_invalid",
        &["validate", "--model", &fixture("invalid.toml")],
        1,
    );
    check_golden(
        "validate_parma12",
        &["validate", "--model", &fixture("parma12.toml")],
        0,
    );
    check_golden(
        "validate_explosive",
        &["validate", "--model", &fixture("explosive.toml")],
        0,
    );
}

#[test]
fn unknown_model_key_is_parse_error() {
    let out = parma(&["validate", "--model", &fixture("unknown_key.toml")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown field `phi`"));
}

#[test]
fn missing_schema_version_is_parse_error() {
    let out = parma(&["validate", "--model", &fixture("no_schema.toml")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("schema_version"));
}

#[test]
fn missing_file_is_io_error() {
    let out = parma(&["stationarity", "--model", &fixture("does_not_exist.toml")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_par12() {
    check_golden(
        "simulate_par12",
        &[
            "simulate",
            "--model",
            &fixture("par12.toml"),
            "--length",
            "8",
            "--seed",
            "3",
        ],
        0,
    );
}

#[test]
fn simulate_is_idempotent_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = parma(&[
            "simulate",
            "--model",
            &fixture("parma12.toml"),
            "--length",
            "50",
            "--seed",
            "11",
            "--replications",
            "3",
            "--innovation",
            "student-t",
            "--df",
            "6",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("replication,time,season,y,epsilon\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 50);
}

#[test]
fn simulate_rejects_short_burn_in() {
    let out = parma(&[
        "simulate",
        "--model",
        &fixture("par12.toml"),
        "--length",
        "8",
        "--burn-in",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_reports_each_order() {
    let out = parma(&["bench", "--orders", "20,40", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[1],
        "order,recurrence_us,dense_lu_us,banded_lu_us,speedup"
    );
    assert!(lines[2].starts_with("20,"));
    assert!(lines[3].starts_with("40,"));
    assert_eq!(lines.len(), 4);
}
