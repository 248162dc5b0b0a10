//! Types shared by both reservoir families.

use num_complex::Complex64;
use thiserror::Error;

use crate::linear_ode::{expm, Generator, IntegratorStats, OdeError, State, Tolerances};
use crate::markovian::{self, MarkovTrajectory};
use crate::model::{ReservoirKind, TimeGrid, ValidatedParams};
use crate::nonmarkovian::{self, NonMarkovTrajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("expected {expected} reservoirs, got {found}")]
    WrongReservoirKind {
        expected: ReservoirKind,
        found: ReservoirKind,
    },
    #[error("Lorentzian spectral width must be positive")]
    ZeroWidth,
    #[error("closed form requires kappa1 = kappa2 and equal reservoir rates")]
    AsymmetricParams,
    #[error("initial qubit amplitude must be finite with |h(0)| <= 1")]
    InvalidInitialAmplitude,
    #[error(transparent)]
    Solver(#[from] OdeError),
}

/// Sampled qubit excited-state amplitude together with its time derivative.
pub trait QubitSeries {
    fn times(&self) -> &[f64];
    fn qubit_amplitude(&self, i: usize) -> Complex64;
    /// `dh/dt` at sample `i`, evaluated from the equations of motion.
    fn qubit_rate(&self, i: usize) -> Complex64;
    /// `(h, dh/dt)` at `times()[i] + dt`, propagated exactly from sample `i`.
    fn qubit_between(&self, i: usize, dt: f64) -> (Complex64, Complex64);

    fn n_samples(&self) -> usize {
        self.times().len()
    }
}

/// A trajectory of either reservoir family.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Markovian(MarkovTrajectory),
    Lorentzian(NonMarkovTrajectory),
}

impl Trajectory {
    pub fn kind(&self) -> ReservoirKind {
        match self {
            Trajectory::Markovian(_) => ReservoirKind::Memoryless,
            Trajectory::Lorentzian(_) => ReservoirKind::Lorentzian,
        }
    }

    pub fn stats(&self) -> &IntegratorStats {
        match self {
            Trajectory::Markovian(t) => t.stats(),
            Trajectory::Lorentzian(t) => t.stats(),
        }
    }

    pub fn params(&self) -> &ValidatedParams {
        match self {
            Trajectory::Markovian(t) => t.params(),
            Trajectory::Lorentzian(t) => t.params(),
        }
    }

    /// `(|c₁|, |c₂|)` per sample.
    pub fn mode_moduli(&self) -> Vec<(f64, f64)> {
        match self {
            Trajectory::Markovian(t) => t
                .iter()
                .map(|(_, a)| (a.c1_tilde.norm(), a.c2_tilde.norm()))
                .collect(),
            Trajectory::Lorentzian(t) => t.iter().map(|(_, a)| (a.c1.norm(), a.c2.norm())).collect(),
        }
    }

    /// Population that left the qubit-plus-modes sector: the ground-state
    /// weight λ(t) for memoryless baths, the reservoir population for
    /// Lorentzian ones.
    pub fn lost_population(&self) -> Vec<f64> {
        match self {
            Trajectory::Markovian(t) => t.ground_weight(),
            Trajectory::Lorentzian(t) => t.reservoir_population(),
        }
    }

    pub fn last_qubit_modulus(&self) -> f64 {
        self.qubit_amplitude(self.n_samples() - 1).norm()
    }
}

impl QubitSeries for Trajectory {
    fn times(&self) -> &[f64] {
        match self {
            Trajectory::Markovian(t) => QubitSeries::times(t),
            Trajectory::Lorentzian(t) => QubitSeries::times(t),
        }
    }

    fn qubit_amplitude(&self, i: usize) -> Complex64 {
        match self {
            Trajectory::Markovian(t) => t.qubit_amplitude(i),
            Trajectory::Lorentzian(t) => t.qubit_amplitude(i),
        }
    }

    fn qubit_rate(&self, i: usize) -> Complex64 {
        match self {
            Trajectory::Markovian(t) => t.qubit_rate(i),
            Trajectory::Lorentzian(t) => t.qubit_rate(i),
        }
    }

    fn qubit_between(&self, i: usize, dt: f64) -> (Complex64, Complex64) {
        match self {
            Trajectory::Markovian(t) => t.qubit_between(i, dt),
            Trajectory::Lorentzian(t) => t.qubit_between(i, dt),
        }
    }
}

/// Exact `(y₀, ẏ₀)` at offset `dt` from a sampled state.
pub(crate) fn propagate_qubit<const N: usize>(
    generator: &Generator<N>,
    state: &State<N>,
    dt: f64,
) -> (Complex64, Complex64) {
    let y = if dt == 0.0 {
        *state
    } else {
        expm(&generator.scale(Complex64::new(dt, 0.0))).apply(state)
    };
    (y[0], generator.apply(&y)[0])
}

/// Evolve with whichever solver matches the reservoir kind.
///
/// `h0` is the initial qubit excited-state amplitude; it must be 1 for
/// memoryless reservoirs, whose ansatz starts from the excited qubit.
pub fn evolve(
    params: &ValidatedParams,
    grid: &TimeGrid,
    tol: &Tolerances,
    h0: Complex64,
) -> Result<Trajectory, DynamicsError> {
    match params.kind() {
        ReservoirKind::Memoryless => {
            if h0 != Complex64::new(1.0, 0.0) {
                return Err(DynamicsError::InvalidInitialAmplitude);
            }
            markovian::evolve(params, grid, tol).map(Trajectory::Markovian)
        }
        ReservoirKind::Lorentzian => {
            nonmarkovian::evolve(params, grid, tol, h0).map(Trajectory::Lorentzian)
        }
    }
}
