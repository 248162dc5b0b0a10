//! Qubit amplitude, mode populations and the backflow witness for the three
//! memoryless points κ = 0.3Γ, Ω ∈ {0, Γ, 2Γ}.
//!
//! `cargo run --release --example markovian_evolution`

use nmcavity::{evolve, validate, witness_series, ModelParams, QubitSeries, TimeGrid, Tolerances, Trajectory};
use num_complex::Complex64;

fn main() {
    let grid = TimeGrid::new(20.0, 2001).unwrap();
    for omega in [0.0, 1.0, 2.0] {
        let p = validate(&ModelParams::symmetric_memoryless(0.3, omega, 1.0)).unwrap();
        let traj = evolve(&p, &grid, &Tolerances::default(), Complex64::new(1.0, 0.0)).unwrap();
        let w = witness_series(&traj).unwrap().w_values;
        let Trajectory::Markovian(m) = &traj else { unreachable!() };

        println!("Ω = {omega}Γ   ({} accepted steps)", traj.stats().accepted_steps);
        println!("{:>6} {:>10} {:>10} {:>10} {:>11}", "t", "|h|", "|c1|²", "|c2|²", "W");
        for i in (0..grid.n_samples()).step_by(100) {
            let a = m.amplitudes(i);
            println!(
                "{:>6.1} {:>10.6} {:>10.6} {:>10.6} {:>11.3e}",
                traj.times()[i],
                traj.qubit_amplitude(i).norm(),
                a.c1_tilde.norm_sqr(),
                a.c2_tilde.norm_sqr(),
                w[i]
            );
        }
        println!();
    }
}
