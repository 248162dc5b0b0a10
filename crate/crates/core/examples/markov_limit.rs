//! Wide Lorentzian reservoirs reproduce memoryless decay at Γ = γ: the sup
//! distance between the two |h(t)| curves shrinks as λ grows.
//!
//! `cargo run --release --example markov_limit`

use nmcavity::{markov_limit_error, validate, ModelParams, TimeGrid, Tolerances};

fn main() {
    let grid = TimeGrid::with_spacing(50.0, 0.01).unwrap();
    let lambdas = [0.5, 1.0, 5.0, 20.0, 100.0];
    for (kappa, omega) in [(0.3, 0.0), (0.3, 1.0), (0.1, 2.0)] {
        let p = validate(&ModelParams::symmetric_lorentzian(kappa, omega, 1.0, 1.0)).unwrap();
        let errs = markov_limit_error(&p, &lambdas, &grid, &Tolerances::default()).unwrap();
        println!("κ = {kappa}γ, Ω = {omega}γ");
        for (l, e) in lambdas.iter().zip(errs) {
            println!("  λ = {l:>5}γ   sup |Δ|h|| = {e:.3e}");
        }
    }
}
