use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const BARRIER: &str = "\
[potential]
kind = square_barrier
v0 = 1
width = 1

[energies]
values = 0.5, 2

[gauges]
list = constant, wkb
";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn sz(config: &Path, extra: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sz-scatter"));
    cmd.arg("--config").arg(config).args(extra);
    cmd.env_remove("SZ_SCATTER_THREADS");
    if let Some(t) = threads {
        cmd.env("SZ_SCATTER_THREADS", t);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// CSV body with the runtime column dropped.
fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect()
}

#[test]
fn scatter_run_prints_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.cfg", BARRIER);
    let out = sz(&cfg, &[], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("energy,gauge_id,transmission"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn verify_mode_and_out_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.cfg", BARRIER);
    let csv = dir.path().join("result.csv");
    let out = sz(&cfg, &["--mode", "verify", "--out", csv.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let t: f64 = row[2].parse().unwrap();
    let t_lower: f64 = row[5].parse().unwrap();
    let oracle: f64 = row[8].parse().unwrap();
    assert!(t_lower <= oracle + 1e-12 && (t - oracle).abs() < 1e-8);
}

#[test]
fn unknown_key_is_a_config_error_with_line() {
    let dir = TempDir::new().unwrap();
    let text = format!("{BARRIER}\n[tolerances]\nodetol = 1e-9\n");
    let line = text.lines().count();
    let cfg = write(dir.path(), "bad.cfg", &text);
    let out = sz(&cfg, &[], None);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains(&format!("line {line}:")) && err.contains("odetol"), "{err}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = sz(&dir.path().join("absent.cfg"), &[], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn closed_channel_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "step.dat", "-2 0\n-1 0\n1 3\n2 3\n");
    let text = "[potential]\nkind = tabulated\nfile = step.dat\n[energies]\nvalues = 1\n";
    let cfg = write(dir.path(), "run.cfg", text);
    let out = sz(&cfg, &[], None);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn output_is_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.cfg", BARRIER);
    let runs: Vec<Vec<String>> = [None, Some("1"), Some("3"), None]
        .into_iter()
        .map(|t| {
            let out = sz(&cfg, &["--mode", "bounds"], t);
            assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
            without_runtime(&stdout(&out))
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn invalid_thread_cap_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.cfg", BARRIER);
    for bad in ["0", "many", "-2"] {
        assert_eq!(sz(&cfg, &[], Some(bad)).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn plot_data_is_written_next_to_config() {
    let dir = TempDir::new().unwrap();
    let text = format!("{BARRIER}\n[outputs]\ncsv_path = out.csv\nplot_data_path = plot.dat\n");
    let cfg = write(dir.path(), "run.cfg", &text);
    let out = sz(&cfg, &["--mode", "verify"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("out.csv").exists());
    let plot = std::fs::read_to_string(dir.path().join("plot.dat")).unwrap();
    assert!(plot.contains("# gauge constant\n") && plot.contains("# gauge wkb\n"));
}

#[test]
fn optimize_mode_emits_one_row_per_energy() {
    let dir = TempDir::new().unwrap();
    let text = "[potential]\nkind = gaussian\nv0 = 1\nsigma = 1\n[energies]\nvalues = 2, 5\n";
    let cfg = write(dir.path(), "run.cfg", text);
    let out = sz(&cfg, &["--mode", "optimize"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
}
