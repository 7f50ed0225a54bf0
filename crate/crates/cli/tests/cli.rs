use std::path::Path;
use std::process::{Command, Output};

use subweibull_sim::experiments::run_experiment;
use subweibull_sim::runner::write_outputs;
use subweibull_sim::{parse_config, CsvTable, RunManifest};

const TAILCHECK: &str = "experiment=tailcheck\nseed=7\nalpha=0.5,1,2\nn=100,1000\nreps=2000\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subweibull-sim"))
}

fn run_cli(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("exp.cfg");
    std::fs::write(&cfg, config).unwrap();
    bin().arg("run").arg(&cfg).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn list_names_every_experiment() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["norms", "tailcheck", "covariance", "rip", "re", "lasso", "clt", "bootstrap"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
}

#[test]
fn tailcheck_example_writes_one_row_per_grid_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run_cli(tmp.path(), TAILCHECK, &["--out", out_dir.to_str().unwrap(), "--workers", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let results = CsvTable::read(&out_dir.join("results.csv")).unwrap();
    assert_eq!(results.rows.len(), 3 * 2 * 3);
    for col in ["threshold", "prob_bound", "exceed_freq", "mc_se", "constants"] {
        assert!(results.column(col).is_some(), "missing column {col}");
    }
    let manifest = RunManifest::read(&out_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.experiment, "tailcheck");
    assert_eq!(manifest.seed, 7);
    assert!(manifest.files.iter().any(|f| f.name == "results.csv"));
    assert!(manifest.files.iter().any(|f| f.name.ends_with(".svg")));
    assert!(manifest.stale_files(&out_dir).unwrap().is_empty());
    assert!(!manifest.constants.is_empty());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment=covariance\nseed=1\np=5\nn=50,100\nreps=3\n";
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run_cli(tmp.path(), cfg, &["--out", a.to_str().unwrap(), "--seed", "99"]).status.success());
    assert!(run_cli(tmp.path(), cfg, &["--out", b.to_str().unwrap()]).status.success());
    assert_eq!(RunManifest::read(&a.join("manifest.json")).unwrap().seed, 99);
    assert_ne!(std::fs::read(a.join("results.csv")).unwrap(), std::fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn default_output_dir_is_named_after_experiment_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.cfg");
    std::fs::write(&cfg, "experiment=rip\nseed=5\np=6\nk=2\nn=50\nreps=2\n").unwrap();
    let out = bin().current_dir(tmp.path()).arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(tmp.path().join("runs/rip-seed5/results.csv").exists());
}

#[test]
fn plot_slope_matches_summary_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = "experiment=covariance\nseed=3\np=8\nn=100,200,400,800\nreps=8\n";
    let out = run_cli(tmp.path(), cfg, &["--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = CsvTable::read(&out_dir.join("summary.csv")).unwrap();
    let slope = summary.floats("slope_n").unwrap()[0];
    let svg = std::fs::read_to_string(out_dir.join("plot_n.svg")).unwrap();
    assert!(svg.contains(&format!("slope = {slope:.4}")), "slope {slope} not in plot");
}

#[test]
fn config_errors_exit_2_and_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_cli(tmp.path(), "experiment=rip\nseed=1\nbogus=3\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = run_cli(tmp.path(), "experiment=nope\nseed=1\n", &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_cli(tmp.path(), "experiment=rip\nseed=1\n", &["--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment=bootstrap\nseed=2\nq=3\nn=1\nreps=100\ndraws=10\n";
    let out = run_cli(tmp.path(), cfg, &["--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("n >= 2"));
}

#[test]
fn violations_keep_tables_but_skip_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config("experiment=covariance\nseed=4\np=4\nn=50,100\nreps=2\n").unwrap();
    let mut out = run_experiment(&cfg, 1).unwrap();
    out.violations.push(("tail_domination".into(), "first".into()));
    out.violations.push(("tail_domination".into(), "second".into()));
    let err = write_outputs(&cfg, &out, 1, tmp.path(), "start".into()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let msg = err.to_string();
    assert!(msg.contains("tail_domination") && msg.contains("first") && msg.contains("1 more"), "{msg}");
    assert!(tmp.path().join("results.csv").exists());
    assert!(tmp.path().join("summary.csv").exists());
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = "experiment=rip\nseed=1\np=6\nk=2\nn=50\nreps=2\n";
    let out = run_cli(tmp.path(), cfg, &["--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));

    let missing = bin().args(["run", "/nonexistent/exp.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment=lasso\nseed=11\np=15\nk=2\nn=60,120\nreps=5\n";
    let mut bytes = Vec::new();
    for workers in ["1", "4"] {
        let out_dir = tmp.path().join(workers);
        let out = run_cli(tmp.path(), cfg, &["--out", out_dir.to_str().unwrap(), "--workers", workers]);
        assert!(out.status.success(), "{}", stderr(&out));
        bytes.push(std::fs::read(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}
