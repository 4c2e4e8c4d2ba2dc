//! End-to-end tests of the `torus-nls` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use torus_nls::exec::ExecMode;
use torus_nls::lattice::{write_field, FieldFormat};
use torus_nls::random::{sample_mu_s, SamplerSpec};
use torus_nls::{ModelParams, SpectralField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torus-nls"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).unwrap()
}

/// Compares two JSON documents, numbers to 1e−9 relative, skipping `skip` keys.
fn assert_json_close(a: &Value, b: &Value, path: &str, skip: &[&str]) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: Vec<&String> = x.keys().filter(|k| !skip.contains(&k.as_str())).collect();
            let other: Vec<&String> = y.keys().filter(|k| !skip.contains(&k.as_str())).collect();
            assert_eq!(keys, other, "keys differ at {path}");
            for k in keys {
                assert_json_close(&x[k], &y[k], &format!("{path}.{k}"), skip);
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "length differs at {path}");
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                assert_json_close(p, q, &format!("{path}[{i}]"), skip);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (p, q) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            let tol = 1e-9 * p.abs().max(q.abs()).max(1e-300);
            assert!((p - q).abs() <= tol, "{path}: {p} vs {q}");
        }
        _ => assert_eq!(a, b, "value differs at {path}"),
    }
}

#[test]
fn energy_of_zero_field_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("zero.json");
    write_field(&state, &SpectralField::zeros(1, 3).unwrap(), FieldFormat::Json).unwrap();
    let out = dir.path().join("out");
    let o = run(&["energy", "--set", &format!("input={}", state.display())], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("energy.json"));
    assert_eq!(r["e_sn"], 0.0);
    assert_eq!(r["q_sn"], 0.0);
    for part in ["r0", "r1", "r2", "s11", "s12", "s21", "s22", "j", "i"] {
        assert_eq!(r["parts"][part]["re"], 0.0, "{part}");
        assert_eq!(r["parts"][part]["im"], 0.0, "{part}");
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn decompose_matches_golden_file_and_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["decompose", "--seed", "42"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = read_json(&dir.path().join("decompose.json"));
    let golden = read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/decompose_seed42.json"));
    assert_json_close(&got, &golden, "$", &["wall_time_s"]);
    for (name, v) in got["identities"].as_object().unwrap() {
        assert!(v.as_f64().unwrap() <= 1e-10, "identity {name} residual {v}");
    }
    // The golden R_sN agrees with the six-tuple brute force.
    let params = ModelParams::with(1, 3);
    let u = sample_mu_s(&SamplerSpec::new(params.clone(), 3, 3, 42, 0)).unwrap();
    let brute = torus_nls::energetics::Interaction::new(&u, &params)
        .unwrap()
        .r_sn_naive(u64::MAX, ExecMode::Sequential)
        .unwrap();
    let r = golden["r_sn"].as_f64().unwrap();
    assert!((r - brute).abs() <= 1e-10 * brute.abs(), "{r} vs {brute}");
}

#[test]
fn transport_at_time_zero_has_equal_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["mc", "transport", "--set", "params.n=4", "--set", "mc.ensemble_size=500", "--set", "mc.t_grid=[0]"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("transport.json"));
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(row["base_hits"], row["image_hits"]);
    }
}

#[test]
fn reruns_reproduce_csv_bytes_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["audit", "chaos", "--set", "mc.ensemble_size=3000", "--set", "mc.p_grid=[2,4,6]", "--set", "mc.bootstrap_reps=20"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    assert_eq!(std::fs::read(a.join("chaos.csv")).unwrap(), std::fs::read(b.join("chaos.csv")).unwrap());
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["command"], "audit chaos");
    assert_eq!(m["config"]["mc"]["ensemble_size"], 3000);
    assert_eq!(m["seeds"]["mc_seed"], 42);
    assert!(m["git_describe"].is_string() && m["wall_time_s"].is_number());
    assert_eq!(m["outputs"], serde_json::json!(["chaos.csv", "chaos.json"]));
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_err = run(&["energy", "--set", "params.theta=0.5"], &dir.path().join("c"));
    assert_eq!(cfg_err.status.code(), Some(2));
    let e = read_json(&dir.path().join("c/error.json"));
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("theta"));

    let budget = run(&["decompose", "--budget", "10"], &dir.path().join("b"));
    assert_eq!(budget.status.code(), Some(3));
    assert_eq!(read_json(&dir.path().join("b/error.json"))["error"], "budget");

    let state = dir.path().join("big.json");
    let big = SpectralField::from_fn(1, 3, |k| torus_nls::Complex64::new(if k.is_zero() { 30.0 } else { 10.0 }, 0.0)).unwrap();
    write_field(&state, &big, FieldFormat::Json).unwrap();
    let blow = run(
        &["evolve", "--set", &format!("input={}", state.display()), "--set", "flow.dt=0.1"],
        &dir.path().join("i"),
    );
    assert_eq!(blow.status.code(), Some(4), "{}", String::from_utf8_lossy(&blow.stderr));
    assert_eq!(read_json(&dir.path().join("i/error.json"))["error"], "integration");

    let unknown = run(&["energy", "--set", "params.nope=1"], &dir.path().join("u"));
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn stderr_is_structured_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["audit", "psi-bound", "--set", "audit.psi_bound.kmax=4"], dir.path());
    assert!(o.status.success());
    let stderr = String::from_utf8(o.stderr).unwrap();
    for line in stderr.lines() {
        let v: Value = serde_json::from_str(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        assert!(v["level"].is_string() && v["ts"].is_string() && v["msg"].is_string());
    }
    assert!(!String::from_utf8(o.stdout).unwrap().trim().is_empty());
}

#[test]
fn sample_and_evolve_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--set", "sampler.count=3"], &dir.path().join("s"));
    assert!(o.status.success());
    let (manifest, fields) = torus_nls::random::read_ensemble(&dir.path().join("s/ensemble")).unwrap();
    assert_eq!((manifest.count, fields.len()), (3, 3));

    let o = run(&["evolve", "--set", "flow.t_end=0.1"], &dir.path().join("e"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("e/trajectory.csv")).unwrap();
    assert!(csv.starts_with("time,mass,hamiltonian_N,h_sigma_norm"));
    let fin = torus_nls::lattice::read_field(&dir.path().join("e/state_final.spf")).unwrap();
    assert_eq!(fin.dim(), 1);
}
