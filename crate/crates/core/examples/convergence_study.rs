//! Measure how the three means approach a Poisson-kernel product, and how
//! the components of V - S decay, along one (m, n) ladder.
//!
//!     cargo run --release --example convergence_study

use fourier_l1::analysis::{convergence_run, decomposition_norm_run};
use fourier_l1::families::FamilySpec;

fn main() {
    let family = FamilySpec::Geometric { rx: 0.8, ry: 0.8 };
    let ladder: Vec<(u32, u32)> = [4u32, 8, 16, 32].iter().map(|&m| (m, m)).collect();
    let lambda = 1.5;

    println!("family: c_jk = 0.8^(|j|+|k|), lambda = {lambda}");
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12}",
        "m=n", "||S-f||", "||sigma-f||", "||V-f||", "||V-S||"
    );
    for r in convergence_run(&family, &ladder, lambda, 1e-6).unwrap() {
        println!(
            "{:>4} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            r.m, r.norm_s_f, r.norm_sigma_f, r.norm_v_f, r.norm_v_s
        );
    }

    println!();
    println!("component norms of V - S:");
    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "m=n", "r0", "r1", "r2", "r3", "r4", "r5"
    );
    for r in decomposition_norm_run(&family, &ladder, lambda).unwrap() {
        let c = r.component_norms;
        println!(
            "{:>4} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            r.m, c[0], c[1], c[2], c[3], c[4], c[5]
        );
    }
}
