use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use qkff::krylov::{checkpoint, fast_forward, fidelity, mrk_build, ChainPropagator, ChainSpec, ObservableMatrix, QDavidsonParams, StopRule};
use qkff::{exact_evolve, heisenberg_xyz, CVector, PauliSum, StateVector};
use qkff_cli::record::{format_f64, from_csv};
use tempfile::TempDir;

fn qkff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkff")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().display().to_string();
        if rel != "timings.json" {
            out.insert(rel, fs::read(&entry).unwrap());
        }
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

const MRK: &str = r#"{
  "model": {"n": 4, "jx": 1, "jy": 1, "jz": 1, "h": 1},
  "params": {"m": 10, "tau": 0.1, "max_references": 2},
  "schedule": {"t_final": 10, "n_time_points": 21},
  "observables": [{"name": "z1", "terms": [["ZIII", 1.0, 0.0]]}]
}"#;

#[test]
fn config_errors_exit_with_two_and_name_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\n  \"schedule\": {\n    \"t_final\": -1\n  }\n}\n");
    let out = qkff(&["evolve", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("schedule.t_final"), "{err}");
    let cfg = write_config(tmp.path(), "broken.json", "{\"model\": ");
    assert_eq!(qkff(&["mrk", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(qkff(&["evolve", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn exact_run_writes_parseable_csv_and_metadata() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.json", MRK);
    let out = qkff(&["evolve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (columns, rows) = from_csv(&fs::read_to_string(out_dir.join("exact.csv")).unwrap()).unwrap();
    assert_eq!(columns, ["t", "norm", "z1"]);
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][2], 1.0);
    assert_eq!(rows[20][0], 10.0);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("exact.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 21);
    assert_eq!(meta["config"]["schedule"]["t_final"], 10.0);
    assert!(out_dir.join("timings.json").exists());
}

#[test]
fn mrk_csv_matches_a_hand_driven_pipeline() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", MRK);
    let out = qkff(&["mrk", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cli_bytes = fs::read_to_string(tmp.path().join("mrk.csv")).unwrap();

    let h = heisenberg_xyz(4, 1.0, 1.0, 1.0, 1.0).unwrap();
    let r0 = StateVector::neel(4).unwrap();
    let chain = ChainSpec { order: 10, tau: 0.1, propagator: ChainPropagator::Exact { tol: 1e-12 } };
    let stop = StopRule { max_dim: Some(64), max_references: Some(2), ..Default::default() };
    let (sub, _) = mrk_build(&h, &r0, &chain, &stop, &QDavidsonParams::default()).unwrap();
    let mut c0 = CVector::zeros(sub.dim());
    c0[0] = Complex64::new(1.0, 0.0);
    let ff = fast_forward(&sub, &c0, 1e-12).unwrap();
    let z1 = ObservableMatrix::new(&sub, &PauliSum::single("ZIII", 1.0).unwrap()).unwrap();
    let mut text = String::from("t,fidelity,norm,z1\n");
    let mut exact = r0.clone();
    let mut prev = 0.0;
    for k in 0..21 {
        let t = if k == 20 { 10.0 } else { 10.0 * k as f64 / 20.0 };
        if t != prev {
            exact = exact_evolve(&h, &exact, t - prev, 1e-12).unwrap();
        }
        prev = t;
        let c = ff.coefficients(t);
        let (f, norm) = fidelity(&exact, &sub, &c).unwrap();
        let z = z1.expectation(&c).unwrap();
        text.push_str(&[t, f, norm, z].map(format_f64).join(","));
        text.push('\n');
    }
    assert_eq!(cli_bytes, text);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"model": {"n": 6, "jx": 1, "jy": 2, "jz": 3}, "output": {"checkpoint": true},
            "params": {"max_iterations": 5}, "schedule": {"n_time_points": 11},
            "observables": [{"name": "zz", "terms": [["ZZIIII", 1, 0]]}]}"#,
    );
    let mut seen = Vec::new();
    for threads in ["1", "4", "4"] {
        let cwd = TempDir::new().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_qkff"))
            .args(["qdavidson", "--config", &cfg, "--out", "out", "--threads", threads])
            .current_dir(cwd.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        seen.push(files(&cwd.path().join("out")));
    }
    assert!(seen[0].contains_key("qdavidson.subspace/manifest.json"));
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[1], seen[2]);
}

#[test]
fn checkpoint_reloads_the_subspace() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"output": {"checkpoint": true}, "params": {"max_iterations": 3}}"#);
    assert!(qkff(&["mrqd", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]).status.success());
    let (sub, manifest) = checkpoint::load(&tmp.path().join("mrqd.subspace")).unwrap();
    assert_eq!(manifest.dimension, sub.dim());
    assert_eq!(manifest.parameters["label"], "mrqd");
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("mrqd.json")).unwrap()).unwrap();
    assert_eq!(meta["subspace"]["dimension"], sub.dim());
}

#[test]
fn fig1_style_config_yields_one_record_per_dimension() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "fig1.toml",
        "[model]\nn = 6\n[params]\ndims = [4, 8, 12]\nmax_dim = 12\n[schedule]\nn_time_points = 11\n[[observables]]\nname = \"z1\"\nterms = [[\"ZIIIII\", 1.0, 0.0]]\n",
    );
    let out = qkff(&["qdavidson", "--config", &cfg, "--out", tmp.path().to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut last = 0.0;
    for d in [4, 8, 12] {
        let rec: qkff_cli::record::RunRecord =
            serde_json::from_slice(&fs::read(tmp.path().join(format!("qdavidson_dim{d}.json"))).unwrap()).unwrap();
        assert_eq!(rec.subspace.as_ref().unwrap().dimension, d);
        assert_eq!(rec.columns, ["t", "fidelity", "norm", "z1"]);
        let f = *rec.column("fidelity").unwrap().last().unwrap();
        assert!(f >= last - 1e-12);
        last = f;
    }
}

#[test]
fn unconverged_sweeps_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"sweep": {"sizes": [6], "methods": ["qdavidson"], "max_dim": 3}}"#);
    let out = qkff(&["scaling-sweep", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let table: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(table["rows"][0]["converged"], false);
    assert!(table["rows"][0]["required_dimension"].is_null());
}

#[test]
fn sweeps_reuse_matching_cell_checkpoints() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"sweep": {"sizes": [4]}, "output": {"checkpoint": true}}"#);
    let dir = tmp.path().join("out");
    assert!(qkff(&["scaling-sweep", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.success());
    let first = fs::read(dir.join("sweep.json")).unwrap();
    assert!(dir.join("cells/n4_mrk_exact/manifest.json").exists());
    assert!(qkff(&["scaling-sweep", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.success());
    assert_eq!(fs::read(dir.join("sweep.json")).unwrap(), first);
}

#[test]
fn trotter_compare_pairs_chain_kinds() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"sweep": {"sizes": [4], "methods": ["mrk", "mrqd"]}}"#);
    let out = qkff(&["trotter-compare", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("compare.json")).unwrap()).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "mrk");
    assert_eq!(rows[0]["exact"]["chain"], "exact");
    assert_eq!(rows[0]["trotter"]["chain"], "trotter");
}

#[test]
fn lindblad_runs_conserve_trace() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "l.json",
        r#"{"model": {"n": 2}, "schedule": {"t_final": 2, "n_time_points": 5},
            "lindblad": {"propagator": "trotter", "trotter_steps": 50,
                         "collapses": [{"kind": "damping", "rate": 0.2}, {"kind": "dephasing", "site": 1, "rate": 0.1},
                                       {"kind": "pauli", "terms": [["XI", 0.5, 0.0], ["YI", 0.0, 0.5]], "rate": 0.05}]},
            "observables": [{"name": "z1", "terms": [["ZI", 1, 0]]}]}"#,
    );
    let out = qkff(&["lindblad", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = fs::read_to_string(tmp.path().join("lindblad_trotter.csv")).unwrap();
    let (columns, rows) = from_csv(&rec).unwrap();
    assert_eq!(columns, ["t", "trace", "purity", "distance", "z1"]);
    for r in &rows {
        assert!((r[1] - 1.0).abs() < 1e-8);
        assert!(r[3] < 1e-2);
    }
    assert_eq!(rows[0][4], 1.0);
}
