use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn blobkit(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blobkit"));
    cmd.args(args).env_remove("BLOBKIT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn report(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn without_wall_time(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

const SMALL: [&str; 2] = ["--grid-n", "128"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(SMALL);
    v
}

#[test]
fn report_layout() {
    let run = blobkit(&with_small(&["wigner"]), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    for key in ["command", "version", "inputs", "tolerances", "results", "checks", "pass", "wall_time_s"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["command"], "wigner");
    assert_eq!(r["inputs"]["grid"]["N"], 128);
    assert_eq!(r["inputs"]["hbar"], 1.0);
    assert_eq!(r["pass"], true);
    assert_eq!(r["tolerances"]["closed_form"], 1e-6);
}

#[test]
fn factorize_random_and_file() {
    let run = blobkit(&["factorize", "--n", "3", "--seed", "7"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["pass"], true);
    assert_eq!(r["results"]["P"].as_array().unwrap().len(), 3);

    let dir = scratch("factorize");
    let good = dir.join("s.json");
    fs::write(&good, r#"{"n": 1, "matrix": [[2.0, 1.0], [1.0, 1.0]]}"#).unwrap();
    let run = blobkit(&["factorize", "--input", good.to_str().unwrap(), "--assert"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(check(&report(&run), "reconstruction")["value"].as_f64().unwrap() <= 1e-12);

    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"n": 1, "matrix": [[2.0, 0.0], [0.0, 2.0]]}"#).unwrap();
    assert_eq!(blobkit(&["factorize", "--input", bad.to_str().unwrap()], &[]).code, 2);
}

#[test]
fn uncertainty_reports_without_failing() {
    let run = blobkit(&["uncertainty", "--diag", "0.25,0.25"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["results"]["report"]["rs2_holds"], false);
    assert_eq!(r["results"]["criteria_agree"], true);
    assert_eq!(r["pass"], false);

    let strict = blobkit(&["uncertainty", "--diag", "0.25,0.25", "--assert"], &[]);
    assert_eq!(strict.code, 1);
    assert!(strict.stderr.contains("williamson_min_over_half_hbar"));

    let ok = blobkit(&["uncertainty", "--diag", "0.5,0.5", "--assert"], &[]);
    assert_eq!(ok.code, 0);
    assert_eq!(report(&ok)["results"]["report"]["saturated"], true);

    let dir = scratch("uncertainty");
    let f = dir.join("cov.json");
    fs::write(&f, r#"{"sigma": [[1.0, 0.2], [0.2, 1.0]]}"#).unwrap();
    let run = blobkit(&["uncertainty", "--input", f.to_str().unwrap(), "--hbar", "0.5"], &[]);
    assert_eq!(run.code, 0);
    assert_eq!(report(&run)["results"]["report"]["rs2_holds"], true);

    assert_eq!(blobkit(&["uncertainty"], &[]).code, 2);
    assert_eq!(blobkit(&["uncertainty", "--diag", "1,2,3"], &[]).code, 2);
    assert_eq!(blobkit(&["uncertainty", "--diag", "-1,1"], &[]).code, 2);
}

#[test]
fn wigner_artifacts() {
    let dir = scratch("wigner");
    let state = dir.join("psi.json");
    fs::write(&state, r#"{"n": 1, "hbar": 1.0, "X": [[1.5]], "Y": [[0.3]], "z0": [0.5, -0.2]}"#).unwrap();
    let csv = dir.join("w.csv");
    let bin = dir.join("w.blb");
    let run = blobkit(
        &with_small(&["wigner", "--input", state.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--bin", bin.to_str().unwrap()]),
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(report(&run)["pass"], true);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,p,re,im\n"));
    assert_eq!(text.lines().count(), 1 + 128 * 128);
    assert_eq!(&fs::read(&bin).unwrap()[..4], b"BLB1");

    let wrong_hbar = dir.join("h.json");
    fs::write(&wrong_hbar, r#"{"n": 1, "hbar": 2.0, "X": [[1.0]], "Y": [[0.0]], "z0": [0.0, 0.0]}"#).unwrap();
    assert_eq!(blobkit(&with_small(&["wigner", "--input", wrong_hbar.to_str().unwrap()]), &[]).code, 2);
}

#[test]
fn quantize_modes() {
    let weyl = blobkit(&with_small(&["quantize", "--domain", "10"]), &[]);
    assert_eq!(weyl.code, 0, "{}", weyl.stderr);
    let r = report(&weyl);
    assert_eq!(r["pass"], true);
    assert!((r["results"]["eigenvalues"][0].as_f64().unwrap() - 0.5).abs() < 1e-5);

    let dir = scratch("quantize");
    let bin = dir.join("op.blb");
    let toe = blobkit(&with_small(&["quantize", "--mode", "toeplitz", "--domain", "10", "--bin", bin.to_str().unwrap()]), &[]);
    assert_eq!(toe.code, 0, "{}", toe.stderr);
    let r = report(&toe);
    assert_eq!(r["pass"], true);
    assert!((r["results"]["eigenvalues"][0].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert!(check(&r, "route_gap")["value"].as_f64().unwrap() <= 1e-4);
    assert!(bin.exists());

    let sym = dir.join("a.json");
    fs::write(&sym, r#"{"kind": "gaussian", "bumps": [{"amplitude": 1.0, "center": [0.5, 0.0], "matrix": [[1.0, 0.0], [0.0, 1.0]]}]}"#).unwrap();
    let run = blobkit(&with_small(&["quantize", "--mode", "toeplitz", "--symbol", sym.to_str().unwrap()]), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(report(&run)["results"]["eigenvalues"][0].as_f64().unwrap() >= -1e-9);

    assert_eq!(blobkit(&["quantize", "--mode", "husimi"], &[]).code, 2);
}

#[test]
fn frame_bounds_and_threshold() {
    let dir = scratch("frame");
    let csv = dir.join("c.csv");
    let run = blobkit(&with_small(&["frame", "--window", "gauss", "--alpha", "1.0", "--beta", "3.0", "--csv", csv.to_str().unwrap()]), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["results"]["is_frame"], true);
    assert!(check(&r, "reconstruction")["value"].as_f64().unwrap() <= 1e-6);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("index,x,p,re,im\n"));
    assert_eq!(text.lines().count() as u64, 1 + r["results"]["sites"].as_u64().unwrap());

    let dense = blobkit(&with_small(&["frame", "--alpha", "3.5449", "--beta", "3.5449"]), &[]);
    assert_eq!(dense.code, 0);
    assert_eq!(report(&dense)["results"]["is_frame"], false);
    assert_eq!(blobkit(&with_small(&["frame", "--alpha", "3.5449", "--beta", "3.5449", "--assert"]), &[]).code, 1);

    let lat = dir.join("lat.json");
    fs::write(&lat, r#"{"M": [[1.0, 0.0], [0.5, 3.0]], "rho": 60}"#).unwrap();
    let run = blobkit(&with_small(&["frame", "--lattice", lat.to_str().unwrap()]), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(report(&run)["results"]["is_frame"], true);

    assert_eq!(blobkit(&with_small(&["frame", "--rho", "2"]), &[]).code, 2);
}

#[test]
fn density_and_sweep() {
    let run = blobkit(&with_small(&["density", "--assert"]), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    assert!((r["results"]["spectrum"][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);

    let dir = scratch("density");
    let mu = dir.join("mu.json");
    fs::write(&mu, r#"{"kind": "gaussian", "bumps": [{"amplitude": 0.1, "center": [0.0, 0.0], "matrix": [[1.0, 0.0], [0.0, 1.0]]}]}"#).unwrap();
    let bad = blobkit(&with_small(&["density", "--mu", mu.to_str().unwrap()]), &[]);
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("integrates"));

    let csv = dir.join("sweep.csv");
    let run = blobkit(&["sweep", "--assert", "--csv", csv.to_str().unwrap()], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(report(&run)["results"]["points"].as_array().unwrap().len(), 4);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 5);

    let quad = blobkit(&["sweep", "--symbol", "quadratic", "--x", "1.7", "--y", "0.6", "--assert"], &[]);
    assert_eq!(quad.code, 0, "{}", quad.stderr);
    assert!(check(&report(&quad), "moment_oracle")["value"].as_f64().unwrap() <= 1e-8);

    assert_eq!(blobkit(&["sweep", "--hbars", "0.5,1"], &[]).code, 2);
}

#[test]
fn selftest_passes() {
    let run = blobkit(&with_small(&["selftest"]), &[("BLOBKIT_THREADS", "2")]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert_eq!(report(&run)["pass"], true);
}

#[test]
fn reports_are_reproducible() {
    let dir = scratch("repro");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let run = blobkit(&with_small(&["selftest", "--seed", "11", "--out", path.to_str().unwrap()]), &[("BLOBKIT_THREADS", threads)]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        assert!(run.stdout.contains("selftest: pass"));
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(without_wall_time(&ta), without_wall_time(&tb));
    let strip = |t: &str| t.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&ta), strip(&tb));

    let f1 = blobkit(&["factorize", "--seed", "3"], &[]).stdout;
    let f2 = blobkit(&["factorize", "--seed", "4"], &[]).stdout;
    assert_ne!(without_wall_time(&f1)["results"], without_wall_time(&f2)["results"]);
}

#[test]
fn config_files() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    fs::write(&cfg, r#"{"command": "wigner", "hbar": 0.5, "grid": {"N": 128}, "seed": 9}"#).unwrap();
    let run = blobkit(&["wigner", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["inputs"]["hbar"], 0.5);
    assert_eq!(r["inputs"]["seed"], 9);
    assert_eq!(r["inputs"]["grid"]["N"], 128);

    let run = blobkit(&["wigner", "--config", cfg.to_str().unwrap(), "--hbar", "2"], &[]);
    assert_eq!(report(&run)["inputs"]["hbar"], 2.0);

    assert_eq!(blobkit(&["factorize", "--config", cfg.to_str().unwrap()], &[]).code, 2);

    let unknown = dir.join("unknown.json");
    fs::write(&unknown, r#"{"hbar": 1.0, "colour": "blue"}"#).unwrap();
    let run = blobkit(&["wigner", "--config", unknown.to_str().unwrap()], &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("colour"));
}

#[test]
fn malformed_json_reports_location() {
    let dir = scratch("malformed");
    let f = dir.join("broken.json");
    fs::write(&f, "{\n  \"sigma\": [[1.0, 0.0],\n            [0.0 1.0]]\n}\n").unwrap();
    let run = blobkit(&["uncertainty", "--input", f.to_str().unwrap()], &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("broken.json:3:"), "{}", run.stderr);
    assert!(run.stderr.contains("line 3 column"), "{}", run.stderr);
}

#[test]
fn io_errors() {
    let dir = scratch("io");
    let missing = dir.join("nope.json");
    let run = blobkit(&["uncertainty", "--input", missing.to_str().unwrap()], &[]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("nope.json"));

    let out = dir.join("no_such_dir").join("r.json");
    assert_eq!(blobkit(&["factorize", "--out", out.to_str().unwrap()], &[]).code, 3);
    let csv = dir.join("no_such_dir").join("w.csv");
    assert_eq!(blobkit(&with_small(&["wigner", "--csv", csv.to_str().unwrap()]), &[]).code, 3);
}

#[test]
fn argument_and_environment_errors() {
    assert_eq!(blobkit(&["wigner", "--hbar", "0"], &[]).code, 2);
    assert_eq!(blobkit(&["wigner", "--grid-n", "100"], &[]).code, 2);
    assert_eq!(blobkit(&["wigner", "--domain", "-3"], &[]).code, 2);
    assert_eq!(blobkit(&["wigner", "--bogus"], &[]).code, 2);
    assert_eq!(blobkit(&["teleport"], &[]).code, 2);
    assert_eq!(blobkit(&[], &[]).code, 2);
    assert_eq!(blobkit(&["factorize"], &[("BLOBKIT_THREADS", "zero")]).code, 2);
    assert_eq!(blobkit(&["factorize"], &[("BLOBKIT_THREADS", "0")]).code, 2);
    let help = blobkit(&["--help"], &[]);
    assert_eq!(help.code, 0);
    for cmd in ["factorize", "uncertainty", "wigner", "quantize", "frame", "density", "sweep", "selftest"] {
        assert!(help.stdout.contains(cmd), "{cmd}");
    }
    assert_eq!(blobkit(&["--version"], &[]).code, 0);
}
