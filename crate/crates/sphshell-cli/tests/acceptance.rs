//! Acceptance gate for the sweep-performance contract: a 50-point material
//! sweep against a fixed antenna GSM file must pay the antenna cost once.
//! Prints one `ACCEPTANCE 12 PASS|FAIL ...` line (visible with
//! `-- --nocapture`).

use std::process::Command;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphshell::gsm::{save_gsm, AntennaGsm, GsmSet};
use sphshell::specfun::mode::mode_count;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |_| {
        Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

#[test]
fn criterion_12_sweep_performance_contract() {
    let p = 5;
    let lmax = 25;
    let f0 = 3.5e9;
    let n = mode_count(lmax);

    // A dense randomized antenna GSM with a near-identity spherical block,
    // so the composition is well-conditioned.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut s = random_matrix(&mut rng, n, n, 0.2 / n as f64);
    for i in 0..n {
        s[[i, i]] += 1.0;
    }
    let antenna = AntennaGsm::new(
        f0,
        lmax,
        random_matrix(&mut rng, p, p, 0.5),
        random_matrix(&mut rng, p, n, 0.5),
        random_matrix(&mut rng, n, p, 0.5),
        s,
    )
    .unwrap();
    let set = GsmSet {
        lmax,
        num_ports: p,
        bubble_eps: Complex64::new(1.0, 0.0),
        bubble_mu: Complex64::new(1.0, 0.0),
        entries: vec![antenna],
    };

    let dir = tempfile::tempdir().unwrap();
    save_gsm(&set, dir.path().join("antenna.json")).unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "[geometry]\nrb_mm = 150\nra_mm = 180\n\
         layer = iso from_mm=150 to_mm=180 eps=5-0.5*j mu=1\n\
         [frequency]\nstart_ghz = 3.5\n\
         [antenna]\ngsm_file = antenna.json\n\
         [task]\ntype = sweep\nlayer = 1\nparam = eps_im\nfrom = -1\nto = -0.02\npoints = 50\n",
    )
    .unwrap();

    let out = dir.path().join("out");
    // Sequential sweep points give clean per-point wall times.
    let r = Command::new(env!("CARGO_BIN_EXE_sphshell"))
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "1",
        ])
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    let parse_count = manifest["antenna_parse_count"].as_u64().unwrap();
    let per_point: Vec<f64> = manifest["per_point_ms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let worst_after_first =
        per_point.iter().skip(1).cloned().fold(0.0f64, f64::max);
    let rows = std::fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count();

    let pass = parse_count == 1
        && per_point.len() == 50
        && worst_after_first < 1000.0
        && rows == 1 + 50 * p * p;
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE 12 {status} sweep-performance contract: 50-point sweep (P = {p}, \
         Lmax = {lmax}), antenna parsed {parse_count} time(s) (re-parses: {}), worst \
         per-point time after the first {worst_after_first:.0} ms (limit 1000 ms)",
        parse_count - 1
    );
    assert!(pass, "criterion 12 failed: parse_count = {parse_count}, worst = {worst_after_first} ms, rows = {rows}");
}
