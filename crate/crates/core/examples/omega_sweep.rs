//! N versus Ω at weak coupling κ = 0.1Γ: zero up to a finite threshold, then
//! growing.
//!
//! `cargo run --release --example omega_sweep`

use nmcavity::sweep::linspace;
use nmcavity::{sweep_1d, validate, ModelParams, RunSettings, SweepParam, SweepSpec, TimeGrid};

fn main() {
    let base = validate(&ModelParams::symmetric_memoryless(0.1, 0.0, 1.0)).unwrap();
    // Off-resonant modes make the slow decay rate ~ κ²Γ/Ω², so the horizon
    // has to be long for the tail check at large Ω.
    let settings = RunSettings {
        grid: TimeGrid::with_spacing(30_000.0, 0.02).unwrap(),
        ..Default::default()
    };
    let spec = SweepSpec::new(base, SweepParam::OmegaMm, linspace(0.0, 3.0, 31), settings).unwrap();
    println!("{:>6} {:>14} {:>14}  regime", "Ω/Γ", "N", "tail");
    for p in sweep_1d(&spec) {
        let r = p.report().expect("evolution succeeded");
        let flag = if p.is_truncated() { " (lower bound)" } else { "" };
        println!("{:>6.2} {:>14.6e} {:>14.2e}  {}{flag}", p.value, r.n_value, r.truncation_tail, r.regime);
    }
}
