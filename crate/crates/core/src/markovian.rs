//! Qubit plus two coupled modes leaking into memoryless reservoirs.
//!
//! With a single excitation the master equation closes on the three
//! unnormalized amplitudes `(h̃, c̃₁, c̃₂)`; the remaining weight
//! `λ(t) = 1 − |h̃|² − |c̃₁|² − |c̃₂|²` sits in the global ground state.
//! In the resonant rotating frame:
//!
//! ```text
//!   dh̃/dt  = −iκ₁c̃₁ − iκ₂c̃₂
//!   dc̃₁/dt = −iκ₁h̃ − iΩc̃₂ − (Γ₁/2)c̃₁
//!   dc̃₂/dt = −iκ₂h̃ − iΩc̃₁ − (Γ₂/2)c̃₂
//! ```

use num_complex::Complex64;

use crate::dynamics::{propagate_qubit, DynamicsError, QubitSeries};
use crate::linear_ode::{integrate_adaptive, Generator, IntegratorStats, State, Tolerances, TrajectorySamples};
use crate::model::{Reservoir, ReservoirKind, TimeGrid, ValidatedParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovAmplitudes {
    pub h_tilde: Complex64,
    pub c1_tilde: Complex64,
    pub c2_tilde: Complex64,
}

impl MarkovAmplitudes {
    pub fn initial() -> Self {
        Self {
            h_tilde: Complex64::new(1.0, 0.0),
            c1_tilde: Complex64::new(0.0, 0.0),
            c2_tilde: Complex64::new(0.0, 0.0),
        }
    }

    pub fn to_state(&self) -> State<3> {
        [self.h_tilde, self.c1_tilde, self.c2_tilde]
    }

    /// `|h̃|² + |c̃₁|² + |c̃₂|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.h_tilde.norm_sqr() + self.c1_tilde.norm_sqr() + self.c2_tilde.norm_sqr()
    }

    /// Weight λ(t) of the global ground state.
    pub fn ground_weight(&self) -> f64 {
        1.0 - self.norm_sqr()
    }
}

impl From<State<3>> for MarkovAmplitudes {
    fn from(s: State<3>) -> Self {
        Self {
            h_tilde: s[0],
            c1_tilde: s[1],
            c2_tilde: s[2],
        }
    }
}

fn memoryless_rates(params: &ValidatedParams) -> Result<(f64, f64), DynamicsError> {
    match *params.reservoir() {
        Reservoir::Memoryless { gamma1, gamma2 } => Ok((gamma1, gamma2)),
        Reservoir::Lorentzian { .. } => Err(DynamicsError::WrongReservoirKind {
            expected: ReservoirKind::Memoryless,
            found: ReservoirKind::Lorentzian,
        }),
    }
}

/// Rotating-frame generator acting on `(h̃, c̃₁, c̃₂)`.
pub fn build_generator(params: &ValidatedParams) -> Result<Generator<3>, DynamicsError> {
    let (g1, g2) = memoryless_rates(params)?;
    let (k1, k2, om) = (params.kappa1(), params.kappa2(), params.omega_mm());
    let z = Complex64::new(0.0, 0.0);
    Ok(Generator::from_rows([
        [z, -I * k1, -I * k2],
        [-I * k1, Complex64::new(-0.5 * g1, 0.0), -I * om],
        [-I * k2, -I * om, Complex64::new(-0.5 * g2, 0.0)],
    ]))
}

/// Amplitude trajectory for memoryless reservoirs.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTrajectory {
    params: ValidatedParams,
    generator: Generator<3>,
    samples: TrajectorySamples<3>,
}

impl MarkovTrajectory {
    pub fn params(&self) -> &ValidatedParams {
        &self.params
    }

    pub fn generator(&self) -> &Generator<3> {
        &self.generator
    }

    pub fn samples(&self) -> &TrajectorySamples<3> {
        &self.samples
    }

    pub fn stats(&self) -> &IntegratorStats {
        &self.samples.stats
    }

    pub fn times(&self) -> &[f64] {
        &self.samples.times
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn amplitudes(&self, i: usize) -> MarkovAmplitudes {
        self.samples.states[i].into()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, MarkovAmplitudes)> + '_ {
        self.samples
            .times
            .iter()
            .zip(&self.samples.states)
            .map(|(&t, &s)| (t, s.into()))
    }

    /// Time derivative of the amplitudes at sample `i`, from the generator.
    pub fn rates(&self, i: usize) -> MarkovAmplitudes {
        self.generator.apply(&self.samples.states[i]).into()
    }

    pub fn abs_h(&self) -> Vec<f64> {
        self.samples.states.iter().map(|s| s[0].norm()).collect()
    }

    /// `(|h̃|², |c̃₁|², |c̃₂|²)` at each sample.
    pub fn populations(&self) -> Vec<[f64; 3]> {
        self.samples
            .states
            .iter()
            .map(|s| [s[0].norm_sqr(), s[1].norm_sqr(), s[2].norm_sqr()])
            .collect()
    }

    pub fn ground_weight(&self) -> Vec<f64> {
        self.iter().map(|(_, a)| a.ground_weight()).collect()
    }

    /// `(Γ₁, Γ₂)` of the underlying reservoirs.
    pub fn decay_rates(&self) -> (f64, f64) {
        memoryless_rates(&self.params).expect("trajectory built from memoryless params")
    }
}

impl QubitSeries for MarkovTrajectory {
    fn times(&self) -> &[f64] {
        &self.samples.times
    }

    fn qubit_amplitude(&self, i: usize) -> Complex64 {
        self.samples.states[i][0]
    }

    fn qubit_rate(&self, i: usize) -> Complex64 {
        self.generator.apply(&self.samples.states[i])[0]
    }

    fn qubit_between(&self, i: usize, dt: f64) -> (Complex64, Complex64) {
        propagate_qubit(&self.generator, &self.samples.states[i], dt)
    }
}

/// Evolve from `h̃(0) = 1`, `c̃₁(0) = c̃₂(0) = 0`.
pub fn evolve(
    params: &ValidatedParams,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<MarkovTrajectory, DynamicsError> {
    let generator = build_generator(params)?;
    let samples = integrate_adaptive(&generator, &MarkovAmplitudes::initial().to_state(), grid, tol)?;
    Ok(MarkovTrajectory {
        params: *params,
        generator,
        samples,
    })
}

/// `(eˣ − 1)/x`, accurate near zero.
fn exprel(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + x * (0.5 + x * (1.0 / 6.0 + x / 24.0))
    } else {
        (x.exp() - 1.0) / x
    }
}

/// Roots of `s² + (iΩ + Γ/2)s + 2κ² = 0`, slow root (larger real part) first.
pub fn symmetric_roots(kappa: f64, omega_mm: f64, gamma: f64) -> (Complex64, Complex64) {
    let b = Complex64::new(0.5 * gamma, omega_mm);
    let disc = (b * b - 8.0 * kappa * kappa).sqrt();
    let r1 = (-b + disc) * 0.5;
    let r2 = (-b - disc) * 0.5;
    if r1.re >= r2.re {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// Closed-form `h̃(t)` for κ₁ = κ₂ and Γ₁ = Γ₂.
///
/// The antisymmetric mode combination decouples, leaving the qubit coupled
/// with strength √2κ to the symmetric mode, which is shifted by Ω and
/// decays at Γ/2. With slow root `s` and fast root `r` of the reduced
/// quadratic, `h̃(t) = e^{st}[1 − s t · exprel((r − s)t)]`, which stays
/// finite through the critically damped point.
pub fn symmetric_oracle(
    params: &ValidatedParams,
    grid: &TimeGrid,
) -> Result<Vec<Complex64>, DynamicsError> {
    let (g1, g2) = memoryless_rates(params)?;
    if params.kappa1() != params.kappa2() || g1 != g2 {
        return Err(DynamicsError::AsymmetricParams);
    }
    let (slow, fast) = symmetric_roots(params.kappa1(), params.omega_mm(), g1);
    Ok(grid
        .times()
        .into_iter()
        .map(|t| (slow * t).exp() * (1.0 - slow * t * exprel((fast - slow) * t)))
        .collect())
}

/// Coupling above which |h̃| oscillates at Ω = 0 in the symmetric case,
/// `Γ/(4√2)`: the discriminant `(Γ/2)² − 8κ²` of the reduced quadratic
/// changes sign there.
pub fn critical_kappa(gamma: f64) -> f64 {
    gamma / (4.0 * std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, ModelParams};
    use proptest::prelude::*;

    fn vp(p: ModelParams) -> ValidatedParams {
        validate(&p).unwrap()
    }

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn decoupled_generator_is_diagonal_damping() {
        let p = vp(ModelParams {
            kappa1: 0.0,
            kappa2: 0.0,
            omega_mm: 0.0,
            reservoir: Reservoir::Memoryless {
                gamma1: 1.0,
                gamma2: 0.4,
            },
        });
        let a = build_generator(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (1, 1) => Complex64::new(-0.5, 0.0),
                    (2, 2) => Complex64::new(-0.2, 0.0),
                    _ => zero(),
                };
                assert_eq!(a[(i, j)], expected);
            }
        }
    }

    #[test]
    fn single_mode_block_is_damped_jaynes_cummings() {
        let p = vp(ModelParams {
            kappa1: 0.3,
            kappa2: 0.0,
            omega_mm: 0.0,
            reservoir: Reservoir::memoryless(1.0),
        });
        let a = build_generator(&p).unwrap();
        assert_eq!(a[(0, 1)], -I * 0.3);
        assert_eq!(a[(1, 0)], -I * 0.3);
        assert_eq!(a[(1, 1)], Complex64::new(-0.5, 0.0));
        assert_eq!(a[(0, 0)], zero());
        for k in 0..3 {
            if k != 2 {
                assert_eq!(a[(2, k)], zero());
                assert_eq!(a[(k, 2)], zero());
            }
        }
    }

    #[test]
    fn anti_hermitian_part_is_the_dissipator() {
        let p = vp(ModelParams {
            kappa1: 0.3,
            kappa2: 0.1,
            omega_mm: 1.7,
            reservoir: Reservoir::Memoryless {
                gamma1: 1.0,
                gamma2: 0.6,
            },
        });
        let a = build_generator(&p).unwrap();
        let skew = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
        let expected = [0.0, -0.5, -0.3];
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert!((skew[(i, j)] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
        assert_ne!(a, a.adjoint());
    }

    #[test]
    fn lorentzian_params_are_rejected() {
        let p = vp(ModelParams::symmetric_lorentzian(0.3, 1.0, 1.0, 0.5));
        assert!(matches!(
            build_generator(&p),
            Err(DynamicsError::WrongReservoirKind { .. })
        ));
    }

    #[test]
    fn decoupled_qubit_stays_excited() {
        let p = vp(ModelParams::symmetric_memoryless(0.0, 1.0, 1.0));
        let traj = evolve(&p, &TimeGrid::new(10.0, 101).unwrap(), &Tolerances::default()).unwrap();
        for (_, a) in traj.iter() {
            assert_eq!(a.h_tilde, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn single_mode_matches_damped_jaynes_cummings_closed_form() {
        let (kappa, gamma) = (0.3, 1.0);
        let p = vp(ModelParams {
            kappa1: kappa,
            kappa2: 0.0,
            omega_mm: 0.0,
            reservoir: Reservoir::memoryless(gamma),
        });
        let grid = TimeGrid::new(40.0, 801).unwrap();
        let traj = evolve(&p, &grid, &Tolerances::default()).unwrap();
        let delta = Complex64::new(gamma * gamma - 16.0 * kappa * kappa, 0.0).sqrt();
        for (t, a) in traj.iter() {
            let x = delta * t / 4.0;
            let exact = (-gamma * t / 4.0).exp() * (x.cosh() + gamma / delta * x.sinh());
            assert!((a.h_tilde - exact).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn oracle_matches_evolution() {
        let grid = TimeGrid::new(60.0, 1201).unwrap();
        for &kappa in &[0.1, 0.3, 0.5] {
            for &omega in &[0.0, 1.0, 2.0] {
                let p = vp(ModelParams::symmetric_memoryless(kappa, omega, 1.0));
                let exact = symmetric_oracle(&p, &grid).unwrap();
                let traj = evolve(&p, &grid, &Tolerances::default()).unwrap();
                for (i, e) in exact.iter().enumerate() {
                    assert!((traj.amplitudes(i).h_tilde - e).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn oracle_handles_critical_damping() {
        let gamma = 1.0;
        let kappa = critical_kappa(gamma);
        let b = 0.5 * gamma;
        assert!((b * b - 8.0 * kappa * kappa).abs() < 1e-15);
        let p = vp(ModelParams::symmetric_memoryless(kappa, 0.0, gamma));
        let grid = TimeGrid::new(30.0, 301).unwrap();
        let oracle = symmetric_oracle(&p, &grid).unwrap();
        // Repeated root s = -Γ/4: h = e^{st}(1 - s t).
        for (t, h) in grid.times().into_iter().zip(&oracle) {
            let s = -gamma / 4.0;
            let exact = (s * t).exp() * (1.0 - s * t);
            assert!((h - Complex64::new(exact, 0.0)).norm() < 1e-7, "t = {t}");
        }
        let traj = evolve(&p, &grid, &Tolerances::default()).unwrap();
        for (i, h) in oracle.iter().enumerate() {
            assert!((traj.amplitudes(i).h_tilde - h).norm() < 1e-8);
        }
    }

    #[test]
    fn oracle_without_coupling_is_constant() {
        let p = vp(ModelParams::symmetric_memoryless(0.0, 1.3, 1.0));
        let h = symmetric_oracle(&p, &TimeGrid::new(5.0, 6).unwrap()).unwrap();
        assert!(h.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn oracle_rejects_asymmetric_input() {
        let p = vp(ModelParams {
            kappa1: 0.3,
            kappa2: 0.2,
            omega_mm: 0.0,
            reservoir: Reservoir::memoryless(1.0),
        });
        assert_eq!(
            symmetric_oracle(&p, &TimeGrid::new(1.0, 2).unwrap()),
            Err(DynamicsError::AsymmetricParams)
        );
    }

    #[test]
    fn markovian_point_decays_monotonically() {
        let p = vp(ModelParams::symmetric_memoryless(0.3, 1.0, 1.0));
        let traj = evolve(&p, &TimeGrid::new(300.0, 30001).unwrap(), &Tolerances::default()).unwrap();
        let d = traj.abs_h();
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(*d.last().unwrap() < 1e-6);
    }

    #[test]
    fn closed_system_conserves_norm() {
        let p = vp(ModelParams::symmetric_memoryless(0.4, 0.7, 0.0));
        let traj = evolve(&p, &TimeGrid::new(50.0, 501).unwrap(), &Tolerances::default()).unwrap();
        for (_, a) in traj.iter() {
            assert!((a.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    /// d/dt(|h̃|²+|c̃₁|²+|c̃₂|²) = −Γ₁|c̃₁|² − Γ₂|c̃₂|², checked by central
    /// differences on the sample grid.
    fn balance_residual(traj: &MarkovTrajectory) -> f64 {
        let (g1, g2) = traj.decay_rates();
        let dt = traj.times()[1] - traj.times()[0];
        let norms: Vec<f64> = traj.iter().map(|(_, a)| a.norm_sqr()).collect();
        (1..traj.len() - 1)
            .map(|i| {
                let lhs = (norms[i + 1] - norms[i - 1]) / (2.0 * dt);
                let a = traj.amplitudes(i);
                let rhs = -g1 * a.c1_tilde.norm_sqr() - g2 * a.c2_tilde.norm_sqr();
                (lhs - rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn dissipation_balance_holds() {
        let p = vp(ModelParams {
            kappa1: 0.4,
            kappa2: 0.25,
            omega_mm: 1.5,
            reservoir: Reservoir::Memoryless {
                gamma1: 1.0,
                gamma2: 0.7,
            },
        });
        let traj = evolve(&p, &TimeGrid::new(40.0, 40001).unwrap(), &Tolerances::default()).unwrap();
        assert!(balance_residual(&traj) < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn norm_never_increases(k1 in 0.0..0.6f64, k2 in 0.0..0.6f64, om in 0.0..3.0f64,
                                g1 in 0.1..2.0f64, g2 in 0.1..2.0f64) {
            let p = vp(ModelParams { kappa1: k1, kappa2: k2, omega_mm: om,
                reservoir: Reservoir::Memoryless { gamma1: g1, gamma2: g2 } });
            let traj = evolve(&p, &TimeGrid::new(30.0, 3001).unwrap(), &Tolerances::default()).unwrap();
            let norms: Vec<f64> = traj.iter().map(|(_, a)| a.norm_sqr()).collect();
            prop_assert!(norms.iter().all(|&n| n <= 1.0 + 1e-9));
            prop_assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-10));
            prop_assert!(traj.ground_weight().iter().all(|&l| (-1e-9..=1.0).contains(&l)));
        }

        #[test]
        fn mode_swap_symmetry(k1 in 0.0..0.6f64, k2 in 0.0..0.6f64, om in 0.0..3.0f64,
                              g1 in 0.1..2.0f64, g2 in 0.1..2.0f64) {
            let p = ModelParams { kappa1: k1, kappa2: k2, omega_mm: om,
                reservoir: Reservoir::Memoryless { gamma1: g1, gamma2: g2 } };
            let grid = TimeGrid::new(20.0, 201).unwrap();
            let a = evolve(&vp(p), &grid, &Tolerances::default()).unwrap();
            let b = evolve(&vp(p.mode_swapped()), &grid, &Tolerances::default()).unwrap();
            for i in 0..grid.n_samples() {
                let (x, y) = (a.amplitudes(i), b.amplitudes(i));
                prop_assert!((x.h_tilde - y.h_tilde).norm() < 1e-8);
                prop_assert!((x.c1_tilde - y.c2_tilde).norm() < 1e-8);
                prop_assert!((x.c2_tilde - y.c1_tilde).norm() < 1e-8);
            }
        }

        #[test]
        fn rescaling_rates_and_time_preserves_abs_h(k in 0.05..0.6f64, om in 0.0..3.0f64, s in 0.25..4.0f64) {
            let p = ModelParams::symmetric_memoryless(k, om, 1.0);
            let grid = TimeGrid::new(20.0, 201).unwrap();
            let a = evolve(&vp(p), &grid, &Tolerances::default()).unwrap().abs_h();
            let b = evolve(&vp(p.scaled(s)), &grid.scaled(1.0 / s).unwrap(), &Tolerances::default())
                .unwrap()
                .abs_h();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
