//! End-to-end tests of the `zenochem` binary: exit codes, file layout,
//! CSV byte format, and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zenochem"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should spawn");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

/// A fast four-dimensional register: no nuclei, short horizon.
const FAST_INLINE: &str = r#"
[params]
kS = 0.05
kT = 3.5
B_uT = 49.0
B_ref_uT = 0.0
theory = "quantum"
t_max_us = 1.0
dt_us = 0.001
"#;

#[test]
fn run_writes_parseable_csv_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_INLINE);
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));

    let text = fs::read_to_string(tmp.path().join("run.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time_us,singlet,triplet,trace,population,absorption,mfe"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1001); // t = 0..=1.0 at dt = 1e-3
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 7);
        for cell in cells {
            // Round trip: the printed text reproduces the parsed value exactly.
            let v: f64 = cell.parse().expect("numeric cell");
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(first[1].parse::<f64>().unwrap(), 1.0); // singlet start
    // Absorption mirrors the surviving population column.
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[4], cells[5]);
    }
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn misspelled_key_exits_2_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[params]\nkS = 0.05\nkR = 1.0\n");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("kR"), "stderr should name the bad key: {err}");
}

#[test]
fn missing_config_file_exits_2() {
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg("/nonexistent/zenochem.toml")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn unknown_scenario_exits_2() {
    let out = bin().arg("mfe").arg("--scenario").arg("fig9-imaginary").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9-imaginary"));
}

#[test]
fn unwritable_output_path_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{FAST_INLINE}\n[output]\ncsv_path = \"no_such_dir/run.csv\"\n"),
    );
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equal_reference_field_gives_identically_zero_mfe() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[params]
kS = 0.05
kT = 3.5
B_uT = 49.0
B_ref_uT = 49.0
theory = "quantum"
t_max_us = 1.0
dt_us = 0.001
"#,
    );
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));
    let text = fs::read_to_string(tmp.path().join("run.csv")).unwrap();
    for row in text.lines().skip(1) {
        let mfe: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert_eq!(mfe, 0.0);
    }
}

#[test]
fn repeated_inline_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_INLINE);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_a));
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_b));
    let a = fs::read(out_a.join("run.csv")).unwrap();
    let b = fs::read(out_b.join("run.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mfe_scenario_writes_one_file_per_compared_field() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(bin().arg("mfe").arg("--scenario").arg("fig2b-lowfield").arg("--out").arg(tmp.path()));

    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["mfe_39uT.csv", "mfe_49uT.csv", "plot.gp"]);

    let text = fs::read_to_string(tmp.path().join("mfe_49uT.csv")).unwrap();
    assert!(text.starts_with("time_us,singlet,triplet,trace,population,absorption,mfe\n"));
}

#[test]
fn sweep_stamps_rate_and_theory_into_file_names() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        bin()
            .arg("sweep")
            .arg("--scenario")
            .arg("fig3-relaxation")
            .arg("--ksr")
            .arg("10")
            .arg("--out")
            .arg(tmp.path()),
    );
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "mfe_49uT_ksr10_phenomenological.csv",
            "mfe_49uT_ksr10_quantum.csv",
            "plot.gp"
        ]
    );
}

#[test]
fn scenario_config_run_honors_plot_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[scenario]\nname = \"fig2b-lowfield\"\n\n[output]\nemit_plot_script = false\n",
    );
    let out_dir = tmp.path().join("out");
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir));
    assert!(out_dir.join("mfe_49uT.csv").exists());
    assert!(!out_dir.join("plot.gp").exists());
}

#[test]
fn thread_cap_env_var_is_accepted_and_bad_values_warn() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_INLINE);
    run_ok(
        bin()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path())
            .env("ZENOCHEM_THREADS", "2"),
    );
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .env("ZENOCHEM_THREADS", "many")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZENOCHEM_THREADS"));
}

#[test]
fn validate_reports_every_property_and_exits_zero() {
    let out = run_ok(&mut bin().arg("validate"));
    let text = String::from_utf8_lossy(&out.stdout);
    let passes = text.lines().filter(|l| l.starts_with("PASS ")).count();
    let fails = text.lines().filter(|l| l.starts_with("FAIL ")).count();
    assert_eq!(passes, 10, "full stdout:\n{text}");
    assert_eq!(fails, 0, "full stdout:\n{text}");
}

#[test]
fn list_scenarios_names_all_builtins() {
    let out = run_ok(&mut bin().arg("list-scenarios"));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["fig2b-lowfield", "fig2c-phenomenological", "fig2d-highfield", "fig3-relaxation"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn emitted_plot_script_renders_when_gnuplot_is_available() {
    let gnuplot_present = Command::new("gnuplot")
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    if !gnuplot_present {
        eprintln!("gnuplot not installed; skipping render check");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{FAST_INLINE}\n[output]\nemit_plot_script = true\n"),
    );
    let out_dir = tmp.path().join("out");
    run_ok(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir));
    let status = Command::new("gnuplot")
        .arg("plot.gp")
        .current_dir(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("panels.png").exists());
}
