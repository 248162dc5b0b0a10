//! Regime boundaries by bisection on the classification: the κ threshold at
//! Ω = 0, compared to Γ/(4√2), and the Ω activation threshold at κ = 0.1Γ.
//!
//! `cargo run --release --example threshold_bisection`

use nmcavity::{critical_kappa, find_boundary, validate, ModelParams, RunSettings, SweepParam, TimeGrid};

fn main() {
    let at_zero = validate(&ModelParams::symmetric_memoryless(0.0, 0.0, 1.0)).unwrap();
    let k = find_boundary(&at_zero, SweepParam::Kappa, 0.1, 0.3, 1e-4, &RunSettings::default()).unwrap();
    println!("Ω = 0: κ* = {k:.5}Γ (oscillation onset Γ/(4√2) = {:.5}Γ)", critical_kappa(1.0));
    println!("  the flip sits above the onset because N must exceed eps = 1e-6");

    let weak = validate(&ModelParams::symmetric_memoryless(0.1, 0.0, 1.0)).unwrap();
    let long = RunSettings {
        grid: TimeGrid::with_spacing(2000.0, 0.01).unwrap(),
        ..Default::default()
    };
    let om = find_boundary(&weak, SweepParam::OmegaMm, 0.0, 3.0, 1e-4, &long).unwrap();
    println!("κ = 0.1Γ: non-Markovian for Ω above {om:.4}Γ");
}
