//! Parameter sweeps, κ–Ω phase diagrams and regime-boundary bisection.
//!
//! Every grid point runs the same evolve-and-measure pipeline
//! ([`evaluate_point`]); points are independent and evaluated on the
//! current rayon pool, and results are assembled in axis order.
//!
//! A point whose horizon is too short for the tail tolerance keeps its
//! [`MeasureError::TailTooLarge`] outcome. Its truncated N is a lower bound
//! and is still used for the regime label, flagged as truncated.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{evolve, DynamicsError};
use crate::linear_ode::{IntegratorStats, Tolerances};
use crate::measures::{blp_measure_refined, MeasureError, MeasureReport, MeasureSettings, Regime};
use crate::model::{validate, ModelError, ModelParams, Reservoir, TimeGrid, ValidatedParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("parameter `{0}` does not apply to {1} reservoirs")]
    UnsupportedParam(SweepParam, &'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("axis values must be finite and strictly increasing")]
    InvalidAxis,
    #[error("both endpoints classify as {0}")]
    SameRegimeEndpoints(Regime),
    #[error("bisection needs lo < hi and tol > 0 (lo = {lo}, hi = {hi}, tol = {tol})")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("point {param} = {value} failed: {source}")]
    Point {
        param: SweepParam,
        value: f64,
        source: PointError,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// A sweepable parameter. `Kappa`, `Gamma` and `Lambda` set both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Kappa,
    Kappa1,
    Kappa2,
    OmegaMm,
    Gamma,
    Gamma1,
    Gamma2,
    Lambda,
    Lambda1,
    Lambda2,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Kappa => "kappa",
            SweepParam::Kappa1 => "kappa1",
            SweepParam::Kappa2 => "kappa2",
            SweepParam::OmegaMm => "omega_mm",
            SweepParam::Gamma => "gamma",
            SweepParam::Gamma1 => "gamma1",
            SweepParam::Gamma2 => "gamma2",
            SweepParam::Lambda => "lambda",
            SweepParam::Lambda1 => "lambda1",
            SweepParam::Lambda2 => "lambda2",
        }
    }

    /// `params` with this parameter set to `value`. Not validated.
    pub fn apply(&self, params: &ModelParams, value: f64) -> Result<ModelParams, PointError> {
        let mut p = *params;
        match self {
            SweepParam::Kappa => {
                p.kappa1 = value;
                p.kappa2 = value;
            }
            SweepParam::Kappa1 => p.kappa1 = value,
            SweepParam::Kappa2 => p.kappa2 = value,
            SweepParam::OmegaMm => p.omega_mm = value,
            SweepParam::Gamma | SweepParam::Gamma1 | SweepParam::Gamma2 => {
                let (g1, g2) = match &mut p.reservoir {
                    Reservoir::Memoryless { gamma1, gamma2 } => (gamma1, gamma2),
                    Reservoir::Lorentzian { gamma1, gamma2, .. } => (gamma1, gamma2),
                };
                if *self != SweepParam::Gamma2 {
                    *g1 = value;
                }
                if *self != SweepParam::Gamma1 {
                    *g2 = value;
                }
            }
            SweepParam::Lambda | SweepParam::Lambda1 | SweepParam::Lambda2 => {
                let Reservoir::Lorentzian {
                    lambda1, lambda2, ..
                } = &mut p.reservoir
                else {
                    return Err(PointError::UnsupportedParam(*self, "memoryless"));
                };
                if *self != SweepParam::Lambda2 {
                    *lambda1 = value;
                }
                if *self != SweepParam::Lambda1 {
                    *lambda2 = value;
                }
            }
        }
        Ok(p)
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Horizon, tolerances and measure settings shared by every point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub grid: TimeGrid,
    pub tol: Tolerances,
    pub measure: MeasureSettings,
    /// Initial qubit amplitude; must be 1 for memoryless reservoirs.
    pub h0: Complex64,
}

impl Default for RunSettings {
    /// `t_max = 200` in reference-rate units, sampled every 0.01.
    fn default() -> Self {
        Self {
            grid: TimeGrid::new(200.0, 20_001).expect("static grid"),
            tol: Tolerances::default(),
            measure: MeasureSettings::default(),
            h0: Complex64::new(1.0, 0.0),
        }
    }
}

pub type PointOutcome = Result<MeasureReport, PointError>;

/// The full pipeline for one parameter point: validate, evolve, measure.
pub fn evaluate_point(params: &ModelParams, settings: &RunSettings) -> PointOutcome {
    evaluate_point_with_stats(params, settings).0
}

/// [`evaluate_point`] plus the integrator statistics, when evolution ran.
pub fn evaluate_point_with_stats(
    params: &ModelParams,
    settings: &RunSettings,
) -> (PointOutcome, Option<IntegratorStats>) {
    let p = match validate(params) {
        Ok(p) => p,
        Err(e) => return (Err(e.into()), None),
    };
    match evolve(&p, &settings.grid, &settings.tol, settings.h0) {
        Ok(traj) => (
            blp_measure_refined(&traj, &settings.measure).map_err(Into::into),
            Some(*traj.stats()),
        ),
        Err(e) => (Err(e.into()), None),
    }
}

fn evaluate_at(
    params: Result<ModelParams, PointError>,
    settings: &RunSettings,
) -> (PointOutcome, Option<IntegratorStats>) {
    match params {
        Ok(p) => evaluate_point_with_stats(&p, settings),
        Err(e) => (Err(e), None),
    }
}

/// The report of a successful point, or the lower-bound report of a
/// truncated one.
pub fn outcome_report(outcome: &PointOutcome) -> Option<&MeasureReport> {
    match outcome {
        Ok(r) => Some(r),
        Err(PointError::Measure(MeasureError::TailTooLarge { report, .. })) => Some(report),
        Err(_) => None,
    }
}

pub fn outcome_is_truncated(outcome: &PointOutcome) -> bool {
    matches!(outcome, Err(PointError::Measure(MeasureError::TailTooLarge { .. })))
}

/// One point of a 1-D sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: PointOutcome,
    pub stats: Option<IntegratorStats>,
}

impl SweepPoint {
    pub fn report(&self) -> Option<&MeasureReport> {
        outcome_report(&self.outcome)
    }

    pub fn n_value(&self) -> Option<f64> {
        self.report().map(|r| r.n_value)
    }

    pub fn regime(&self) -> Option<Regime> {
        self.report().map(|r| r.regime)
    }

    pub fn is_truncated(&self) -> bool {
        outcome_is_truncated(&self.outcome)
    }
}

fn check_axis(values: &[f64]) -> Result<(), SweepError> {
    let ok = !values.is_empty()
        && values.iter().all(|v| v.is_finite())
        && values.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(SweepError::InvalidAxis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    base: ValidatedParams,
    param: SweepParam,
    values: Vec<f64>,
    overrides: Vec<(SweepParam, f64)>,
    settings: RunSettings,
}

impl SweepSpec {
    pub fn new(
        base: ValidatedParams,
        param: SweepParam,
        values: Vec<f64>,
        settings: RunSettings,
    ) -> Result<Self, SweepError> {
        check_axis(&values)?;
        Ok(Self {
            base,
            param,
            values,
            overrides: Vec::new(),
            settings,
        })
    }

    /// Fix `param` at `value` for every point; applied before the axis.
    pub fn with_override(mut self, param: SweepParam, value: f64) -> Self {
        self.overrides.push((param, value));
        self
    }

    pub fn base(&self) -> &ValidatedParams {
        &self.base
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn overrides(&self) -> &[(SweepParam, f64)] {
        &self.overrides
    }

    pub fn settings(&self) -> &RunSettings {
        &self.settings
    }

    /// Parameters of the point at axis value `value`.
    pub fn params_at(&self, value: f64) -> Result<ModelParams, PointError> {
        let mut p = *self.base.params();
        for (param, v) in &self.overrides {
            p = param.apply(&p, *v)?;
        }
        self.param.apply(&p, value)
    }
}

/// N along one axis. Point failures are recorded in place.
pub fn sweep_1d(spec: &SweepSpec) -> Vec<SweepPoint> {
    spec.values
        .par_iter()
        .map(|&value| {
            let (outcome, stats) = evaluate_at(spec.params_at(value), &spec.settings);
            SweepPoint {
                value,
                outcome,
                stats,
            }
        })
        .collect()
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Axes of a κ–Ω phase diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAxes {
    pub kappa: Vec<f64>,
    pub omega: Vec<f64>,
}

impl Default for PhaseAxes {
    /// 60 × 60 over κ ∈ [0.02, 0.5], Ω ∈ [0, 3].
    fn default() -> Self {
        Self {
            kappa: linspace(0.02, 0.5, 60),
            omega: linspace(0.0, 3.0, 60),
        }
    }
}

/// Regime map over symmetric κ₁ = κ₂ = κ and Ω. Rows are κ, columns Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub kappa_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    /// N per cell, the lower bound for truncated cells, NaN for failures.
    pub n_matrix: Vec<Vec<f64>>,
    pub regime_matrix: Vec<Vec<Option<Regime>>>,
    pub cells: Vec<Vec<PointOutcome>>,
    /// Integrator statistics merged over all cells.
    pub stats: IntegratorStats,
}

impl PhaseDiagram {
    pub fn shape(&self) -> (usize, usize) {
        (self.kappa_values.len(), self.omega_values.len())
    }

    pub fn truncated_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| outcome_is_truncated(c)).count()
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| outcome_report(c).is_none()).count()
    }
}

/// Evaluate every (κ, Ω) cell with the pipeline of [`sweep_1d`].
pub fn phase_diagram(
    axes: &PhaseAxes,
    base: &ValidatedParams,
    settings: &RunSettings,
) -> Result<PhaseDiagram, SweepError> {
    check_axis(&axes.kappa)?;
    check_axis(&axes.omega)?;
    let n_omega = axes.omega.len();
    let flat: Vec<(PointOutcome, Option<IntegratorStats>)> = (0..axes.kappa.len() * n_omega)
        .into_par_iter()
        .map(|idx| {
            let (k, om) = (axes.kappa[idx / n_omega], axes.omega[idx % n_omega]);
            let params = SweepParam::Kappa
                .apply(base.params(), k)
                .and_then(|p| SweepParam::OmegaMm.apply(&p, om));
            evaluate_at(params, settings)
        })
        .collect();

    let mut stats = IntegratorStats::default();
    for s in flat.iter().filter_map(|(_, s)| s.as_ref()) {
        stats.merge(s);
    }
    let flat = flat.into_iter().map(|(o, _)| o);

    let mut cells: Vec<Vec<PointOutcome>> = Vec::with_capacity(axes.kappa.len());
    let mut it = flat;
    for _ in 0..axes.kappa.len() {
        cells.push(it.by_ref().take(n_omega).collect());
    }
    let n_matrix = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| outcome_report(c).map_or(f64::NAN, |r| r.n_value))
                .collect()
        })
        .collect();
    let regime_matrix = cells
        .iter()
        .map(|row| row.iter().map(|c| outcome_report(c).map(|r| r.regime)).collect())
        .collect();
    Ok(PhaseDiagram {
        kappa_values: axes.kappa.clone(),
        omega_values: axes.omega.clone(),
        n_matrix,
        regime_matrix,
        cells,
        stats,
    })
}

/// Where the regime label flips along `param`, to within `tol`.
///
/// Bisects on the label, not on N, and assumes a single flip inside
/// `[lo, hi]`. Truncated points are labelled from their lower bound.
pub fn find_boundary(
    base: &ValidatedParams,
    param: SweepParam,
    lo: f64,
    hi: f64,
    tol: f64,
    settings: &RunSettings,
) -> Result<f64, SweepError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && tol > 0.0) {
        return Err(SweepError::InvalidBracket { lo, hi, tol });
    }
    let classify = |value: f64| -> Result<Regime, SweepError> {
        let outcome = param
            .apply(base.params(), value)
            .and_then(|p| evaluate_point(&p, settings));
        match outcome_report(&outcome) {
            Some(r) => Ok(r.regime),
            None => Err(SweepError::Point {
                param,
                value,
                source: outcome.unwrap_err(),
            }),
        }
    };
    let (mut a, mut b) = (lo, hi);
    let ra = classify(a)?;
    if classify(b)? == ra {
        return Err(SweepError::SameRegimeEndpoints(ra));
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if classify(mid)? == ra {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}
