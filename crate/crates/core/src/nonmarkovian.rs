//! Qubit plus two coupled modes leaking into Lorentzian reservoirs.
//!
//! Eliminating the reservoir amplitudes leaves each mode with a memory
//! term `−∫₀ᵗ f_n(t−t′) c_n(t′) dt′`. For the exponential kernel
//! `f_n(τ) = ½γ_nλ_n e^{−λ_n τ}` the running convolution
//! `z_n(t) = ∫₀ᵗ f_n(t−t′) c_n(t′) dt′` obeys the local equation
//! `ż_n = ½γ_nλ_n c_n − λ_n z_n` with `z_n(0) = 0`, so the
//! integro-differential system is exactly a 5-dimensional linear ODE on
//! `(h, c₁, c₂, z₁, z₂)`.

use num_complex::Complex64;

use crate::dynamics::{propagate_qubit, DynamicsError, QubitSeries};
use crate::linear_ode::{integrate_adaptive, Generator, IntegratorStats, State, Tolerances, TrajectorySamples};
use crate::markovian;
use crate::model::{validate, ModelParams, Reservoir, ReservoirKind, TimeGrid, ValidatedParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonMarkovAmplitudes {
    pub h: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
}

impl NonMarkovAmplitudes {
    pub fn initial(h0: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            h: h0,
            c1: zero,
            c2: zero,
            z1: zero,
            z2: zero,
        }
    }

    pub fn to_state(&self) -> State<5> {
        [self.h, self.c1, self.c2, self.z1, self.z2]
    }

    /// `|h|² + |c₁|² + |c₂|²`.
    pub fn system_population(&self) -> f64 {
        self.h.norm_sqr() + self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

impl From<State<5>> for NonMarkovAmplitudes {
    fn from(s: State<5>) -> Self {
        Self {
            h: s[0],
            c1: s[1],
            c2: s[2],
            z1: s[3],
            z2: s[4],
        }
    }
}

fn lorentzian_rates(params: &ValidatedParams) -> Result<[f64; 4], DynamicsError> {
    match *params.reservoir() {
        Reservoir::Lorentzian {
            gamma1,
            gamma2,
            lambda1,
            lambda2,
        } => {
            if lambda1 == 0.0 || lambda2 == 0.0 {
                return Err(DynamicsError::ZeroWidth);
            }
            Ok([gamma1, gamma2, lambda1, lambda2])
        }
        Reservoir::Memoryless { .. } => Err(DynamicsError::WrongReservoirKind {
            expected: ReservoirKind::Lorentzian,
            found: ReservoirKind::Memoryless,
        }),
    }
}

/// Generator acting on `(h, c₁, c₂, z₁, z₂)`.
pub fn build_generator5(params: &ValidatedParams) -> Result<Generator<5>, DynamicsError> {
    let [g1, g2, l1, l2] = lorentzian_rates(params)?;
    let (k1, k2, om) = (params.kappa1(), params.kappa2(), params.omega_mm());
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    Ok(Generator::from_rows([
        [z, -I * k1, -I * k2, z, z],
        [-I * k1, z, -I * om, re(-1.0), z],
        [-I * k2, -I * om, z, z, re(-1.0)],
        [z, re(0.5 * g1 * l1), z, re(-l1), z],
        [z, z, re(0.5 * g2 * l2), z, re(-l2)],
    ]))
}

/// Amplitude trajectory for Lorentzian reservoirs.
#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovTrajectory {
    params: ValidatedParams,
    generator: Generator<5>,
    samples: TrajectorySamples<5>,
    h0: Complex64,
}

impl NonMarkovTrajectory {
    pub fn params(&self) -> &ValidatedParams {
        &self.params
    }

    pub fn generator(&self) -> &Generator<5> {
        &self.generator
    }

    pub fn samples(&self) -> &TrajectorySamples<5> {
        &self.samples
    }

    pub fn stats(&self) -> &IntegratorStats {
        &self.samples.stats
    }

    pub fn initial_amplitude(&self) -> Complex64 {
        self.h0
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

    pub fn amplitudes(&self, i: usize) -> NonMarkovAmplitudes {
        self.samples.states[i].into()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, NonMarkovAmplitudes)> + '_ {
        self.samples
            .times
            .iter()
            .zip(&self.samples.states)
            .map(|(&t, &s)| (t, s.into()))
    }

    pub fn abs_h(&self) -> Vec<f64> {
        self.samples.states.iter().map(|s| s[0].norm()).collect()
    }

    /// Excitation carried by the reservoirs, `|h(0)|² − (|h|² + |c₁|² + |c₂|²)`.
    pub fn reservoir_population(&self) -> Vec<f64> {
        let total = self.h0.norm_sqr();
        self.iter().map(|(_, a)| total - a.system_population()).collect()
    }
}

impl QubitSeries for NonMarkovTrajectory {
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

/// Evolve from `h(0) = h0` with empty modes and reservoirs.
pub fn evolve(
    params: &ValidatedParams,
    grid: &TimeGrid,
    tol: &Tolerances,
    h0: Complex64,
) -> Result<NonMarkovTrajectory, DynamicsError> {
    if !h0.is_finite() || h0.norm_sqr() > 1.0 + 1e-12 {
        return Err(DynamicsError::InvalidInitialAmplitude);
    }
    let generator = build_generator5(params)?;
    let samples = integrate_adaptive(&generator, &NonMarkovAmplitudes::initial(h0).to_state(), grid, tol)?;
    Ok(NonMarkovTrajectory {
        params: *params,
        generator,
        samples,
        h0,
    })
}

/// Sup-norm of `|h_L(t)| − |h_M(t)|` between the Lorentzian solver at each
/// width in `lambdas` and the memoryless solver with Γ_n = γ_n.
///
/// The λ-values of `params` are overridden (λ₁ = λ₂ = λ). Large errors at
/// small widths are returned as-is.
pub fn markov_limit_error(
    params: &ValidatedParams,
    lambdas: &[f64],
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<Vec<f64>, DynamicsError> {
    let [g1, g2, _, _] = match *params.reservoir() {
        Reservoir::Lorentzian {
            gamma1,
            gamma2,
            lambda1,
            lambda2,
        } => [gamma1, gamma2, lambda1, lambda2],
        Reservoir::Memoryless { .. } => {
            return Err(DynamicsError::WrongReservoirKind {
                expected: ReservoirKind::Lorentzian,
                found: ReservoirKind::Memoryless,
            })
        }
    };
    let base = *params.params();
    let memoryless = validate(&ModelParams {
        reservoir: Reservoir::Memoryless {
            gamma1: g1,
            gamma2: g2,
        },
        ..base
    })
    .map_err(|_| DynamicsError::ZeroWidth)?;
    let reference = markovian::evolve(&memoryless, grid, tol)?.abs_h();

    lambdas
        .iter()
        .map(|&lambda| {
            let p = validate(&ModelParams {
                reservoir: Reservoir::Lorentzian {
                    gamma1: g1,
                    gamma2: g2,
                    lambda1: lambda,
                    lambda2: lambda,
                },
                ..base
            })
            .map_err(|_| DynamicsError::ZeroWidth)?;
            let abs_h = evolve(&p, grid, tol, Complex64::new(1.0, 0.0))?.abs_h();
            Ok(abs_h
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}
