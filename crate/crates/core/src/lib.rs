//! Dynamics and non-Markovianity of a qubit coupled to two mutually coupled,
//! dissipative cavity modes.
//!
//! The qubit starts excited and the whole system stays in the
//! single-excitation sector, so the dynamics reduce to a handful of complex
//! amplitudes obeying a constant-coefficient linear ODE:
//!
//! - memoryless reservoirs: `(h̃, c̃₁, c̃₂)`, three components ([`markovian`]);
//! - Lorentzian reservoirs: `(h, c₁, c₂, z₁, z₂)`, where `z_n` is the running
//!   convolution of the exponential memory kernel with `c_n`
//!   ([`nonmarkovian`]).
//!
//! Both are integrated by an adaptive Dormand–Prince 5(4) solver and can be
//! cross-checked against a scaling-and-squaring matrix exponential
//! ([`linear_ode`]). [`measures`] turns a trajectory into the trace-distance
//! measure `N` and the mode backflow witness `W(t)`; [`sweep`] runs the
//! pipeline over parameter axes and κ–Ω grids; [`cli`] reads JSON run
//! configurations and writes CSV/JSON artifacts.
//!
//! ```
//! use nmcavity::{evolve, blp_measure_refined, validate, MeasureSettings, ModelParams, TimeGrid, Tolerances};
//! use num_complex::Complex64;
//!
//! let p = validate(&ModelParams::symmetric_memoryless(0.3, 0.0, 1.0)).unwrap();
//! let grid = TimeGrid::new(200.0, 20_001).unwrap();
//! let traj = evolve(&p, &grid, &Tolerances::default(), Complex64::new(1.0, 0.0)).unwrap();
//! let report = blp_measure_refined(&traj, &MeasureSettings::default()).unwrap();
//! assert!(report.n_value > 1e-4);
//! ```
//!
//! Runnable walkthroughs live in `examples/`: `markovian_evolution`,
//! `regime_triple`, `omega_sweep`, `phase_diagram`, `threshold_bisection`,
//! `lorentzian_sweep`, `markov_limit` and `oracle_check`.

pub mod cli;
pub mod dynamics;
pub mod linear_ode;
pub mod markovian;
pub mod measures;
pub mod model;
pub mod nonmarkovian;
pub mod sweep;

pub use dynamics::{evolve, DynamicsError, QubitSeries, Trajectory};
pub use linear_ode::{expm, expm_propagate, integrate_adaptive, Generator, IntegratorStats, OdeError, Tolerances};
pub use markovian::{critical_kappa, symmetric_oracle, MarkovTrajectory};
pub use measures::{
    blp_measure, blp_measure_refined, classify_regime, trace_distance_series, witness_series, MeasureError,
    MeasureReport, MeasureSettings, Regime, Segment, WitnessSeries,
};
pub use model::{
    correlation_function, spectral_density, validate, ModelError, ModelParams, Reservoir, ReservoirKind, TimeGrid,
    ValidatedParams,
};
pub use nonmarkovian::{markov_limit_error, NonMarkovTrajectory};
pub use sweep::{
    evaluate_point, find_boundary, phase_diagram, sweep_1d, PhaseAxes, PhaseDiagram, RunSettings, SweepError,
    SweepParam, SweepPoint, SweepSpec,
};
