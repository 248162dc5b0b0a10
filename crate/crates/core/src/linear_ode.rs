//! Propagation of small dense complex linear systems `ẏ = A·y`.
//!
//! [`integrate_adaptive`] is the production path: an embedded
//! Dormand–Prince 5(4) pair with step-size control and a fourth-order
//! continuous extension, so samples land on a uniform grid without
//! forcing steps onto the grid. [`expm_propagate`] computes `exp(A t)·y0`
//! by scaling and squaring a Taylor polynomial and exists to cross-check
//! the stepper.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::TimeGrid;

pub type State<const N: usize> = [Complex64; N];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("tolerances must be positive (rtol = {rtol}, atol = {atol})")]
    BadTolerance { rtol: f64, atol: f64 },
}

/// Dense `N × N` complex generator of a linear system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator<const N: usize> {
    entries: [[Complex64; N]; N],
}

impl<const N: usize> Generator<N> {
    pub fn zeros() -> Self {
        Self {
            entries: [[ZERO; N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut g = Self::zeros();
        for i in 0..N {
            g.entries[i][i] = ONE;
        }
        g
    }

    pub fn from_rows(entries: [[Complex64; N]; N]) -> Self {
        Self { entries }
    }

    pub fn rows(&self) -> &[[Complex64; N]; N] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        N
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.is_finite())
    }

    pub fn apply(&self, y: &State<N>) -> State<N> {
        let mut out = [ZERO; N];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(y).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.entries[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    out.entries[i][j] += a * other.entries[k][j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        out.entries.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.entries.iter_mut().flatten().zip(other.entries.iter().flatten()) {
            *a += b;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.entries[j][i] = self.entries[i][j].conj();
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..N)
            .map(|j| (0..N).map(|i| self.entries[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl<const N: usize> Index<(usize, usize)> for Generator<N> {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Generator<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i][j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest normalized error estimate of an accepted step (≤ 1).
    pub max_error_estimate: f64,
}

impl IntegratorStats {
    pub fn merge(&mut self, other: &IntegratorStats) {
        self.accepted_steps += other.accepted_steps;
        self.rejected_steps += other.rejected_steps;
        self.rhs_evaluations += other.rhs_evaluations;
        self.max_error_estimate = self.max_error_estimate.max(other.max_error_estimate);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySamples<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<State<N>>,
    pub stats: IntegratorStats,
}

impl<const N: usize> TrajectorySamples<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

// Dormand–Prince 5(4) tableau. The generator is autonomous, so the node
// abscissae are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn combine<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (coef, k) in terms {
        let c = h * coef;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * c;
        }
    }
    out
}

fn all_finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|z| z.is_finite())
}

fn rms_norm<const N: usize>(v: &State<N>, scale: &[f64; N]) -> f64 {
    let s: f64 = v
        .iter()
        .zip(scale)
        .map(|(z, sc)| {
            let r = z.norm() / sc;
            r * r
        })
        .sum();
    (s / N.max(1) as f64).sqrt()
}

/// Starting step following Hairer, Nørsett & Wanner (II.4).
fn initial_step<const N: usize>(
    a: &Generator<N>,
    y0: &State<N>,
    f0: &State<N>,
    tol: &Tolerances,
    span: f64,
) -> f64 {
    let scale: [f64; N] = std::array::from_fn(|i| tol.atol + tol.rtol * y0[i].norm());
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = a.apply(&y1);
    let diff: State<N> = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate `ẏ = A·y` from `t = 0`, sampling at every time in `grid`.
///
/// Step acceptance uses the RMS norm of the embedded error estimate
/// relative to `atol + rtol·max(|y|, |y_new|)` per component. The first
/// sample is `y0` itself.
pub fn integrate_adaptive<const N: usize>(
    a: &Generator<N>,
    y0: &State<N>,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<TrajectorySamples<N>, OdeError> {
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(OdeError::BadTolerance {
            rtol: tol.rtol,
            atol: tol.atol,
        });
    }
    if !all_finite(y0) || !a.is_finite() {
        return Err(OdeError::NonFiniteState { t: 0.0 });
    }

    let t_end = grid.t_max();
    let n = grid.n_samples();
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    times.push(0.0);
    states.push(*y0);
    let mut next = 1usize;

    let mut stats = IntegratorStats::default();
    let mut t = 0.0;
    let mut y = *y0;
    let mut k1 = a.apply(&y);
    stats.rhs_evaluations += 1;
    let mut h = initial_step(a, &y, &k1, tol, t_end);
    stats.rhs_evaluations += 1;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    while next < n {
        let remaining = t_end - t;
        // Finish exactly on t_end instead of leaving a sliver.
        let final_step = h >= remaining || remaining - h < 1e-12 * t_end;
        if final_step {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }

        let k2 = a.apply(&combine(&y, h, &[(A21, &k1)]));
        let k3 = a.apply(&combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = a.apply(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = a.apply(&combine(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ));
        let k6 = a.apply(&combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = combine(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = a.apply(&y_new);
        stats.rhs_evaluations += 6;

        let err_vec: State<N> = std::array::from_fn(|i| {
            (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h
        });
        let scale: [f64; N] =
            std::array::from_fn(|i| tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm()));
        let err = rms_norm(&err_vec, &scale);
        if !err.is_finite() {
            return Err(OdeError::NonFiniteState { t: t + h });
        }

        if err <= 1.0 {
            if !all_finite(&y_new) {
                return Err(OdeError::NonFiniteState { t: t + h });
            }
            stats.accepted_steps += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err);
            let t_new = if final_step { t_end } else { t + h };

            // Dense output coefficients for this step.
            let rc2: State<N> = std::array::from_fn(|i| y_new[i] - y[i]);
            let rc3: State<N> = std::array::from_fn(|i| k1[i] * h - rc2[i]);
            let rc4: State<N> = std::array::from_fn(|i| rc2[i] - k7[i] * h - rc3[i]);
            let rc5: State<N> = std::array::from_fn(|i| {
                (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h
            });
            while next < n {
                let ts = grid.time(next);
                if ts > t_new {
                    break;
                }
                if ts == t_new {
                    states.push(y_new);
                } else {
                    let th = (ts - t) / h;
                    let th1 = 1.0 - th;
                    states.push(std::array::from_fn(|i| {
                        y[i] + (rc2[i] + (rc3[i] + (rc4[i] + rc5[i] * th1) * th) * th1) * th
                    }));
                }
                times.push(ts);
                next += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;

            // PI controller.
            let mut fac = SAFETY * err.max(1e-10).powf(-0.2 + 0.75 * BETA) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            last_rejected = false;
            h *= fac;
        } else {
            stats.rejected_steps += 1;
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            last_rejected = true;
        }
    }

    Ok(TrajectorySamples {
        times,
        states,
        stats,
    })
}

/// `exp(A)` by scaling and squaring an order-18 Taylor polynomial.
///
/// The argument is halved until its 1-norm is at most ½, where the
/// truncated series is accurate to double precision.
pub fn expm<const N: usize>(a: &Generator<N>) -> Generator<N> {
    let norm = a.norm1();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(Complex64::new(2f64.powi(-squarings), 0.0));

    // Horner evaluation of sum_{k<=18} X^k / k!.
    const ORDER: u32 = 18;
    let mut acc = Generator::identity();
    for k in (1..=ORDER).rev() {
        acc = Generator::identity().add(&scaled.matmul(&acc).scale(Complex64::new(1.0 / k as f64, 0.0)));
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    acc
}

/// `exp(A t)·y0`, independent of any time stepping.
pub fn expm_propagate<const N: usize>(
    a: &Generator<N>,
    y0: &State<N>,
    t: f64,
) -> Result<State<N>, OdeError> {
    if !a.is_finite() || !all_finite(y0) || !t.is_finite() {
        return Err(OdeError::NonFiniteState { t });
    }
    let propagator = expm(&a.scale(Complex64::new(t, 0.0)));
    let y = propagator.apply(y0);
    if !all_finite(&y) {
        return Err(OdeError::NonFiniteState { t });
    }
    Ok(y)
}

/// Sup-norm distance `max_i |a_i - b_i|` between two states.
pub fn sup_distance<const N: usize>(a: &State<N>, b: &State<N>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
