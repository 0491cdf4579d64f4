use std::fs;
use std::path::Path;

use serde_json::Value;
use wch::cli::main_from;

fn wch(args: &[&str]) -> i32 {
    main_from(std::iter::once("wch").chain(args.iter().copied()))
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# window\nt0 = -100\nt1 = -99\ndt = 0.01\n").unwrap();
    let out = dir.path().join("g.csv");
    let code = wch(&["willmore", "--config", cfg.to_str().unwrap(), "--dt", "0.001", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let m = manifest(&dir.path().join("g.manifest.json"));
    assert_eq!(m["parameters"]["dt"], 0.001);
    assert_eq!(m["parameters"]["t0"], -100.0);
    assert_eq!(m["status"], "ok");
    let rows = fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(rows, 1 + 1001);

    fs::write(&cfg, "t0 = -100\ncolour = blue\n").unwrap();
    assert_eq!(wch(&["willmore", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn outputs_are_deterministic_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let mut hashes = vec![];
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}/h.csv"));
        let code = wch(&["reduce", "--points-per-decade", "20", "--span", "100", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let m = manifest(&dir.path().join(format!("r{k}/h.manifest.json")));
        hashes.push(m["outputs"][0]["sha256"].as_str().unwrap().to_string());
        let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, "t,h,hprime,P,Ptilde");
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn failed_invariant_sets_status_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f4.csv");
    // on [0, 20] the four-dimensional profile misses ~4e−5 of its mass
    let code = wch(&["kernel", "--n", "4", "--step", "0.05", "--check-mass", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    let m = manifest(&dir.path().join("f4.manifest.json"));
    assert_eq!(m["status"], "failed");
    assert!(m["reason"].as_str().unwrap().contains("mass"));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(wch(&["--n", "3", "evolve", "--out", o]), 2);
    assert!(!out.exists());
    assert_eq!(wch(&["reduce", "--p", "7", "--out", o]), 2);
    assert_eq!(wch(&["verify", "--suite", "A1,Z9", "--out", o]), 2);
    assert_eq!(wch(&["profile", "--bogus"]), 2);
}

#[test]
fn verify_subset_and_stationary_run() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("verify");
    assert_eq!(wch(&["verify", "--suite", "A1,a7", "--out", v.to_str().unwrap()]), 0);
    let m = manifest(&v.join("manifest.json"));
    assert_eq!(m["invariants"].as_array().unwrap().len(), 2);

    let run = dir.path().join("stat");
    let code = wch(&["--n", "3", "evolve", "--stationary", "--t1", "0.5", "--snap", "0.25", "--out", run.to_str().unwrap()]);
    assert_eq!(code, 0);
    let m = manifest(&run.join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert!(run.join("snap_00002.csv").exists());
    let track = fs::read_to_string(run.join("track.csv")).unwrap();
    assert!(track.starts_with("t,rho_num,gamma_n,h_pred,energy\n"));
}
