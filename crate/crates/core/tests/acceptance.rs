//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements (visible under `cargo test -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use fourier_l1::analysis::{convergence_run, decomposition_norm_run, l1_distance};
use fourier_l1::conditions::{
    cond31_profile, cond32_profile, cond33_report, cond34_report, decay_diagnostic,
    ConditionParams, Verdict,
};
use fourier_l1::families::{FamilySpec, FiniteEntry, SplitMix64};
use fourier_l1::identities::{
    alias_free_resolution, corner_residual, decompose_v_minus_s, k_strip_residual,
    partial_minus_cesaro_residual, vp_minus_partial_residual,
};
use fourier_l1::kernels::{e_norm_profile, log_weight};
use fourier_l1::summability::partial_sum;
use fourier_l1::{CoefficientGrid, Complex64, VPParams};

use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    lambda: f64,
    mn: Vec<u32>,
    norm_s_f: Vec<f64>,
    norm_sigma_f: Vec<f64>,
    norm_v_s: Vec<f64>,
    component_norms: Vec<[f64; 6]>,
}

fn golden() -> Golden {
    let text = include_str!("golden/geometric_r08_lambda15.json");
    serde_json::from_str(text).expect("golden file parses")
}

/// The 50 seeded random finite-support grids shared by criteria 1 and 2:
/// `m, n` cycle through 2..=8, lambda alternates between 1.5 and 2, and the
/// grid exactly covers the window bounds.
fn identity_suite_grids() -> Vec<(CoefficientGrid, VPParams)> {
    let mut rng = SplitMix64::new(0xACCE97A0CE);
    let mut cases = Vec::with_capacity(50);
    for i in 0..50u32 {
        let m = 2 + (i % 7);
        let n = 2 + ((i / 7) % 7);
        let lambda = if i % 2 == 0 { 2.0 } else { 1.5 };
        let params = match VPParams::new(lambda, m, n) {
            Ok(p) => p,
            // lambda = 1.5 leaves m = 2, 3 with empty windows; widen
            Err(_) => VPParams::new(2.0, m, n).unwrap(),
        };
        let grid = CoefficientGrid::from_fn(params.lambda_m(), params.lambda_n(), |_, _| {
            Complex64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)
        });
        cases.push((grid, params));
    }
    cases
}

fn within(actual: f64, reference: f64, rel: f64) -> bool {
    (actual - reference).abs() <= rel * reference.abs().max(1e-300)
}

#[test]
fn criterion_1_lemma_identity_suite() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (grid, params) in identity_suite_grids() {
        let (nx, ny) = alias_free_resolution(&params);
        for residual in [
            partial_minus_cesaro_residual(&grid, &params, nx, ny).unwrap(),
            vp_minus_partial_residual(&grid, &params, nx, ny).unwrap(),
            k_strip_residual(&grid, &params, nx, ny).unwrap(),
            corner_residual(&grid, &params, nx, ny).unwrap(),
        ] {
            assert!(
                residual.relative() <= 1e-9,
                "identity {} residual {:e} at m={} n={} lambda={}",
                residual.lemma,
                residual.relative(),
                params.m(),
                params.n(),
                params.lambda()
            );
            worst = worst.max(residual.relative());
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() <= 60, "took {elapsed:?}, budget 60 s");
    println!(
        "PASS criterion 1: 50-grid identity suite, worst relative residual {worst:.3e} \
         (tol 1e-9), {elapsed:?}"
    );
}

#[test]
fn criterion_2_decomposition_identity() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (grid, params) in identity_suite_grids() {
        let (nx, ny) = alias_free_resolution(&params);
        let dec = decompose_v_minus_s(&grid, &params, nx, ny).unwrap();
        assert!(
            dec.residual.relative() <= 1e-9,
            "reconstruction residual {:e} at m={} n={} lambda={}",
            dec.residual.relative(),
            params.m(),
            params.n(),
            params.lambda()
        );
        worst = worst.max(dec.residual.relative());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() <= 60, "took {elapsed:?}, budget 60 s");
    println!(
        "PASS criterion 2: V-S reconstruction on 50 grids, worst relative residual \
         {worst:.3e} (tol 1e-9), {elapsed:?}"
    );
}

#[test]
fn criterion_3_exact_recovery_past_support() {
    // deterministic finite family with support exactly (5, 7)
    let mut rng = SplitMix64::new(0xF1717E);
    let mut entries = Vec::new();
    for j in -5i64..=5 {
        for k in -7i64..=7 {
            entries.push(FiniteEntry {
                j,
                k,
                re: rng.next_f64() * 2.0 - 1.0,
                im: rng.next_f64() * 2.0 - 1.0,
            });
        }
    }
    // pin a corner so the support is not accidentally smaller
    let corner = entries
        .iter_mut()
        .find(|e| e.j == 5 && e.k == 7)
        .expect("corner entry exists");
    corner.re = 1.0;
    let spec = FamilySpec::Finite { entries };
    let grid = spec.build(16, 16).unwrap();
    let f = spec.closed_form(64, 64).unwrap();

    let mut worst: f64 = 0.0;
    for m in 5u32..=16 {
        for n in 7u32..=16 {
            let s = partial_sum(&grid, m, n, 64, 64);
            let d = l1_distance(&s, &f).unwrap();
            assert!(d <= 1e-8, "norm_S_f = {d:e} at (m, n) = ({m}, {n})");
            worst = worst.max(d);
        }
    }
    println!(
        "PASS criterion 3: exact recovery for support (5, 7), worst ||S - f||_1 = \
         {worst:.3e} over m = 5..=16, n = 7..=16 (tol 1e-8)"
    );
}

#[test]
fn criterion_4_cesaro_trend_matches_golden() {
    let golden = golden();
    let spec = FamilySpec::Geometric { rx: 0.8, ry: 0.8 };
    let mn: Vec<(u32, u32)> = golden.mn.iter().map(|&m| (m, m)).collect();
    let records = convergence_run(&spec, &mn, golden.lambda, 1e-7).unwrap();

    for w in records.windows(2) {
        assert!(
            w[1].norm_sigma_f < w[0].norm_sigma_f,
            "||sigma - f|| not strictly decreasing: {} -> {}",
            w[0].norm_sigma_f,
            w[1].norm_sigma_f
        );
    }
    let final_measured = records.last().unwrap().norm_sigma_f;
    let final_golden = *golden.norm_sigma_f.last().unwrap();
    assert!(
        within(final_measured, final_golden, 0.02),
        "final ||sigma - f|| {final_measured} vs reference {final_golden} (2%)"
    );
    println!(
        "PASS criterion 4: ||sigma - f||_1 strictly decreasing over m = n in \
         {:?}; final {final_measured:.6e} within 2% of reference {final_golden:.6e}",
        golden.mn
    );
}

#[test]
fn criterion_5_vp_trend_and_component_norms() {
    let start = Instant::now();
    let golden = golden();
    let spec = FamilySpec::Geometric { rx: 0.8, ry: 0.8 };
    let mn: Vec<(u32, u32)> = golden.mn.iter().map(|&m| (m, m)).collect();

    let records = convergence_run(&spec, &mn, golden.lambda, 1e-7).unwrap();
    for w in records.windows(2) {
        assert!(
            w[1].norm_s_f < w[0].norm_s_f,
            "||S - f|| not strictly decreasing"
        );
        assert!(
            w[1].norm_v_s < w[0].norm_v_s,
            "||V - S|| not strictly decreasing"
        );
    }
    for (r, (gs, gv)) in records
        .iter()
        .zip(golden.norm_s_f.iter().zip(&golden.norm_v_s))
    {
        assert!(
            within(r.norm_s_f, *gs, 0.02),
            "||S - f|| at m = {}: {} vs reference {gs}",
            r.m,
            r.norm_s_f
        );
        assert!(
            within(r.norm_v_s, *gv, 0.02),
            "||V - S|| at m = {}: {} vs reference {gv}",
            r.m,
            r.norm_v_s
        );
    }

    let decs = decomposition_norm_run(&spec, &mn, golden.lambda).unwrap();
    for c in 0..6 {
        for w in decs.windows(2) {
            assert!(
                w[1].component_norms[c] <= w[0].component_norms[c] * (1.0 + 1e-9),
                "component r{c} norm increased: {} -> {} (m {} -> {})",
                w[0].component_norms[c],
                w[1].component_norms[c],
                w[0].m,
                w[1].m
            );
        }
        for (d, g) in decs.iter().zip(&golden.component_norms) {
            assert!(
                within(d.component_norms[c], g[c], 0.02),
                "component r{c} at m = {}: {} vs reference {}",
                d.m,
                d.component_norms[c],
                g[c]
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() <= 300, "took {elapsed:?}, budget 5 min");
    println!(
        "PASS criterion 5: ||S - f|| and ||V - S|| strictly decreasing, all six \
         component-norm sequences nonincreasing and within 2% of reference, {elapsed:?}"
    );
}

#[test]
fn criterion_6_kernel_norm_bound() {
    let report = e_norm_profile(512, 16 * 512).unwrap();

    let norm_e1 = report.ratio(1).unwrap() * log_weight(1);
    assert!(
        (norm_e1 - 8.0).abs() <= 1e-6,
        "||E_1||_1 = {norm_e1} deviates from 8"
    );

    assert!(report.estimated_c.is_finite() && report.estimated_c > 0.0);
    for (k, ratio) in &report.ratios {
        if *k >= 2 {
            assert!(ratio.is_finite() && *ratio > 0.0);
            assert!(*ratio <= report.estimated_c + 1e-9);
        }
    }

    let (r256, r512) = (report.ratio(256).unwrap(), report.ratio(512).unwrap());
    let spread = (r256 / r512 - 1.0).abs();
    assert!(spread < 0.05, "ratio spread 256 vs 512 is {spread:.4}");

    println!(
        "PASS criterion 6: ||E_1||_1 = {norm_e1:.9} (analytic 8, tol 1e-6); \
         estimated C = {:.6} over k <= 512; ratio(256)/ratio(512) spread {:.3}% (< 5%)",
        report.estimated_c,
        spread * 100.0
    );
}

#[test]
fn criterion_7_condition_checkers() {
    // finite support: all four profiles exactly zero once probes clear the
    // support
    let spec = FamilySpec::Finite {
        entries: vec![
            FiniteEntry {
                j: 2,
                k: 3,
                re: 1.0,
                im: 0.5,
            },
            FiniteEntry {
                j: -3,
                k: -1,
                re: -0.25,
                im: 0.75,
            },
        ],
    };
    let finite_grid = spec.build(64, 64).unwrap();
    let finite_params = ConditionParams::new(None, vec![1.5, 2.0], vec![8, 16, 32], 64).unwrap();
    for report in [
        cond31_profile(&finite_grid, &finite_params).unwrap(),
        cond32_profile(&finite_grid, &finite_params).unwrap(),
        cond33_report(&finite_grid, &finite_params).unwrap(),
        cond34_report(&finite_grid, &finite_params).unwrap(),
    ] {
        for point in &report.profile {
            assert_eq!(
                point.value, 0.0,
                "{:?} nonzero past support",
                report.condition
            );
        }
    }

    // geometric grids: vanishing verdicts for every condition at each
    // window scale
    let spec = FamilySpec::Geometric { rx: 0.8, ry: 0.8 };
    let grid = spec.build(64, 64).unwrap();
    for lambda in [1.25, 1.5, 2.0] {
        let params = ConditionParams::new(None, vec![lambda], vec![4, 8, 16, 32], 64).unwrap();
        for report in [
            cond31_profile(&grid, &params).unwrap(),
            cond32_profile(&grid, &params).unwrap(),
            cond33_report(&grid, &params).unwrap(),
            cond34_report(&grid, &params).unwrap(),
        ] {
            assert_eq!(
                report.verdict,
                Verdict::VanishingTrend,
                "{:?} at lambda {lambda}: {:?}",
                report.condition,
                report.verdict
            );
        }
    }
    let decay = decay_diagnostic(&grid);
    assert_eq!(decay.verdict, Verdict::VanishingTrend);

    println!(
        "PASS criterion 7: finite-support profiles exactly zero past support; \
         geometric verdicts vanishing-trend at lambda in {{1.25, 1.5, 2}}"
    );
}

#[test]
fn criterion_8_cli_check_gating() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_fourier-l1");
    let tmp = std::env::temp_dir().join("fourier-l1-acceptance");
    std::fs::create_dir_all(&tmp).unwrap();

    let run = |args: &[&str]| Command::new(bin).args(args).output().expect("binary runs");

    // identities + decomposition gates pass on an oracle-backed grid
    let out = run(&[
        "identities",
        "--family",
        "randomSparse:7,16,16,0.6,0.0",
        "--m",
        "4",
        "--n",
        "4",
        "--lambda",
        "2",
        "--check",
        "--tol",
        "1e-9",
        "--output",
        tmp.join("identities.json").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = run(&[
        "decompose",
        "--family",
        "randomSparse:7,16,16,0.6,0.0",
        "--m",
        "4",
        "--n",
        "4",
        "--lambda",
        "2",
        "--check",
        "--tol",
        "1e-9",
        "--output",
        tmp.join("decompose.json").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // conditions gate passes for a geometric family
    let out = run(&[
        "conditions",
        "--family",
        "geometric:0.8,0.8",
        "--lambda-list",
        "1.25,1.5,2",
        "--n-range",
        "4,8,16,32",
        "--bound",
        "64",
        "--check",
        "--output",
        tmp.join("conditions.csv").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // kernel norm gate at the full profile size
    let out = run(&[
        "ek-norms",
        "--max-k",
        "512",
        "--check",
        "--output",
        tmp.join("ek.json").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // convergence gate on a small geometric ladder
    let out = run(&[
        "converge",
        "--family",
        "geometric:0.8,0.8",
        "--mn-list",
        "4,4;8,8;16,16",
        "--lambda",
        "1.5",
        "--check",
        "--output",
        tmp.join("converge.csv").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // operational error: degenerate window exits 1
    let out = run(&[
        "decompose",
        "--family",
        "geometric:0.5,0.5",
        "--m",
        "4",
        "--n",
        "4",
        "--lambda",
        "1.05",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate window"));

    // gating failure: an impossible tolerance exits 2
    let out = run(&[
        "identities",
        "--family",
        "randomSparse:7,16,16,0.6,0.0",
        "--m",
        "4",
        "--n",
        "4",
        "--lambda",
        "2",
        "--check",
        "--tol",
        "1e-18",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let elapsed = start.elapsed();
    println!(
        "PASS criterion 8: CLI --check gating (exit 0 on pass, 1 on operational \
         error, 2 on tolerance failure), {elapsed:?}"
    );
}
