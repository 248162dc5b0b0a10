//! Parameter corpus shared by the integration tests.

#![allow(dead_code)]

use nmcavity::dynamics::{evolve, Trajectory};
use nmcavity::model::{validate, ModelParams, Reservoir, TimeGrid, ValidatedParams};
use nmcavity::Tolerances;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Memoryless points: the symmetric κ–Ω grid used throughout, plus
/// unequal-rate and single-bath configurations.
pub fn memoryless_corpus() -> Vec<ModelParams> {
    let mut v = Vec::new();
    for kappa in [0.1, 0.3, 0.5] {
        for omega in [0.0, 1.0, 2.0] {
            v.push(ModelParams::symmetric_memoryless(kappa, omega, 1.0));
        }
    }
    v.push(ModelParams {
        kappa1: 0.4,
        kappa2: 0.15,
        omega_mm: 0.7,
        reservoir: Reservoir::Memoryless {
            gamma1: 0.5,
            gamma2: 1.5,
        },
    });
    v.push(ModelParams {
        kappa1: 0.3,
        kappa2: 0.0,
        omega_mm: 1.2,
        reservoir: Reservoir::memoryless(1.0),
    });
    v.push(ModelParams::symmetric_memoryless(0.25, 3.0, 0.0));
    v
}

pub fn lorentzian_corpus() -> Vec<ModelParams> {
    let mut v = Vec::new();
    for (kappa, lambda) in [(0.05, 0.5), (0.3, 0.8), (0.3, 5.0), (0.5, 0.2)] {
        for omega in [0.0, 0.5, 2.0] {
            v.push(ModelParams::symmetric_lorentzian(kappa, omega, 1.0, lambda));
        }
    }
    v.push(ModelParams {
        kappa1: 0.4,
        kappa2: 0.1,
        omega_mm: 1.0,
        reservoir: Reservoir::Lorentzian {
            gamma1: 0.5,
            gamma2: 2.0,
            lambda1: 0.3,
            lambda2: 3.0,
        },
    });
    v
}

pub fn run(p: &ModelParams, grid: &TimeGrid) -> (ValidatedParams, Trajectory) {
    let v = validate(p).unwrap();
    let t = evolve(&v, grid, &Tolerances::default(), one()).unwrap();
    (v, t)
}

/// Random memoryless parameters with rates in ranges covering both regimes.
pub fn random_memoryless(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        kappa1: rng.gen_range(0.0..0.6),
        kappa2: rng.gen_range(0.0..0.6),
        omega_mm: rng.gen_range(0.0..3.0),
        reservoir: Reservoir::Memoryless {
            gamma1: rng.gen_range(0.2..2.0),
            gamma2: rng.gen_range(0.2..2.0),
        },
    }
}

pub fn random_lorentzian(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        kappa1: rng.gen_range(0.0..0.6),
        kappa2: rng.gen_range(0.0..0.6),
        omega_mm: rng.gen_range(0.0..3.0),
        reservoir: Reservoir::Lorentzian {
            gamma1: rng.gen_range(0.2..2.0),
            gamma2: rng.gen_range(0.2..2.0),
            lambda1: rng.gen_range(0.1..10.0),
            lambda2: rng.gen_range(0.1..10.0),
        },
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest `|P(t) − 1 + ∫₀ᵗ Σ Γ_n |c̃_n|² ds|` over even samples, with the
/// integral by composite Simpson. `P = |h̃|² + |c̃₁|² + |c̃₂|²`.
pub fn integrated_balance_residual(traj: &Trajectory) -> f64 {
    let Trajectory::Markovian(m) = traj else {
        panic!("memoryless only")
    };
    let (g1, g2) = m.decay_rates();
    let loss: Vec<f64> = (0..m.len())
        .map(|i| {
            let a = m.amplitudes(i);
            g1 * a.c1_tilde.norm_sqr() + g2 * a.c2_tilde.norm_sqr()
        })
        .collect();
    let dt = m.times()[1] - m.times()[0];
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i + 2 < m.len() {
        integral += dt / 3.0 * (loss[i] + 4.0 * loss[i + 1] + loss[i + 2]);
        i += 2;
        worst = worst.max((m.amplitudes(i).norm_sqr() - 1.0 + integral).abs());
    }
    worst
}
