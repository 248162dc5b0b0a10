//! N versus Ω with Lorentzian reservoirs: activation at weak coupling
//! (λ = 0.5γ, κ = 0.05γ) and a non-monotone curve at strong coupling
//! (λ = 0.8γ, κ = 0.3γ).
//!
//! `cargo run --release --example lorentzian_sweep`

use nmcavity::sweep::linspace;
use nmcavity::{sweep_1d, validate, ModelParams, RunSettings, SweepParam, SweepSpec, TimeGrid};

fn main() {
    for (lambda, kappa, t_max) in [(0.5, 0.05, 1e5), (0.8, 0.3, 2e4)] {
        let base = validate(&ModelParams::symmetric_lorentzian(kappa, 0.0, 1.0, lambda)).unwrap();
        let settings = RunSettings {
            grid: TimeGrid::with_spacing(t_max, 0.05).unwrap(),
            ..Default::default()
        };
        let spec = SweepSpec::new(base, SweepParam::OmegaMm, linspace(0.0, 4.0, 21), settings).unwrap();
        println!("λ = {lambda}γ, κ = {kappa}γ, horizon {t_max}/γ");
        for p in sweep_1d(&spec) {
            let r = p.report().expect("evolution succeeded");
            let flag = if p.is_truncated() { "  (lower bound)" } else { "" };
            println!("  Ω = {:>4.2}γ  N = {:.6e}{flag}", p.value, r.n_value);
        }
    }
}
