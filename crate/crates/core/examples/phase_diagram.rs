//! Coarse κ–Ω regime map for memoryless reservoirs, printed as text.
//! `#` marks non-Markovian cells, `.` Markovian ones, and `+` cells whose
//! horizon was too short (classified from the lower bound).
//!
//! `cargo run --release --example phase_diagram [n_kappa] [n_omega]`

use nmcavity::sweep::{linspace, outcome_is_truncated};
use nmcavity::{phase_diagram, validate, ModelParams, PhaseAxes, Regime, RunSettings};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("grid size"));
    let (nk, no) = (args.next().unwrap_or(25), args.next().unwrap_or(61));
    let axes = PhaseAxes {
        kappa: linspace(0.02, 0.5, nk),
        omega: linspace(0.0, 3.0, no),
    };
    let base = validate(&ModelParams::symmetric_memoryless(0.0, 0.0, 1.0)).unwrap();
    let pd = phase_diagram(&axes, &base, &RunSettings::default()).unwrap();

    println!("rows κ/Γ (top = largest), columns Ω/Γ from 0 to 3");
    for i in (0..nk).rev() {
        let row: String = (0..no)
            .map(|j| match (pd.regime_matrix[i][j], outcome_is_truncated(&pd.cells[i][j])) {
                (Some(Regime::NonMarkovian), _) => '#',
                (Some(Regime::Markovian), true) => '+',
                (Some(Regime::Markovian), false) => '.',
                (None, _) => '!',
            })
            .collect();
        println!("{:>5.3} {row}", pd.kappa_values[i]);
    }
    println!("{} truncated, {} failed of {} cells", pd.truncated_cells(), pd.failed_cells(), nk * no);
}
