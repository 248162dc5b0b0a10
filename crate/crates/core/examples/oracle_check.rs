//! Cross-checks of the adaptive integrator: against the matrix exponential
//! for random 3- and 5-dimensional generators, and against the closed form
//! of the symmetric memoryless model.
//!
//! `cargo run --release --example oracle_check`

use nmcavity::linear_ode::sup_distance;
use nmcavity::{
    evolve, expm_propagate, integrate_adaptive, symmetric_oracle, validate, Generator, ModelParams, QubitSeries,
    TimeGrid, Tolerances,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_generator<const N: usize>(rng: &mut ChaCha8Rng) -> Generator<N> {
    // Anti-Hermitian coupling plus non-negative damping keeps the flow bounded.
    let mut a = Generator::<N>::zeros();
    for i in 0..N {
        for j in i + 1..N {
            let k = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[(i, j)] = Complex64::i() * k;
            a[(j, i)] = Complex64::i() * k.conj();
        }
        a[(i, i)] = Complex64::new(-rng.gen_range(0.0..0.5), rng.gen_range(-1.0..1.0));
    }
    a
}

fn worst<const N: usize>(a: &Generator<N>, grid: &TimeGrid) -> f64 {
    let mut y0 = [Complex64::new(0.0, 0.0); N];
    y0[0] = Complex64::new(1.0, 0.0);
    let s = integrate_adaptive(a, &y0, grid, &Tolerances::default()).unwrap();
    s.times
        .iter()
        .zip(&s.states)
        .map(|(&t, y)| sup_distance(y, &expm_propagate(a, &y0, t).unwrap()))
        .fold(0.0, f64::max)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = TimeGrid::new(50.0, 501).unwrap();
    let e3 = (0..5).map(|_| worst(&random_generator::<3>(&mut rng), &grid)).fold(0.0, f64::max);
    let e5 = (0..5).map(|_| worst(&random_generator::<5>(&mut rng), &grid)).fold(0.0, f64::max);
    println!("integrator vs expm, t ≤ 50: worst sup error {e3:.2e} (3-dim), {e5:.2e} (5-dim)");

    let grid = TimeGrid::new(50.0, 5001).unwrap();
    for kappa in [0.1, 0.3, 0.5] {
        for omega in [0.0, 1.0, 2.0] {
            let p = validate(&ModelParams::symmetric_memoryless(kappa, omega, 1.0)).unwrap();
            let traj = evolve(&p, &grid, &Tolerances::default(), Complex64::new(1.0, 0.0)).unwrap();
            let exact = symmetric_oracle(&p, &grid).unwrap();
            let err = (0..exact.len())
                .map(|i| (traj.qubit_amplitude(i) - exact[i]).norm())
                .fold(0.0, f64::max);
            println!("κ = {kappa}Γ, Ω = {omega}Γ: max |h_num − h_exact| = {err:.2e}");
        }
    }
}
