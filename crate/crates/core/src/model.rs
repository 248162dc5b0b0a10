//! Physical parameters, time grids and the analytic Lorentzian reservoir
//! functions.
//!
//! Every rate is expressed in units of a single reference rate (Γ for
//! memoryless reservoirs, γ for Lorentzian ones). The qubit and the two
//! modes are resonant, so no bare frequencies appear anywhere: all solvers
//! work in the frame co-rotating with the common frequency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("rate `{name}` is negative ({value})")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("rate `{name}` is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("Lorentzian spectral width is zero")]
    ZeroWidth,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

/// Reservoirs seen by the two cavity modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Reservoir {
    /// Flat (memoryless) baths; `gamma1`, `gamma2` are the mode decay rates.
    Memoryless { gamma1: f64, gamma2: f64 },
    /// Lorentzian baths; `gamma*` are mode–reservoir couplings and
    /// `lambda*` the spectral widths (inverse correlation times).
    Lorentzian {
        gamma1: f64,
        gamma2: f64,
        lambda1: f64,
        lambda2: f64,
    },
}

impl Reservoir {
    pub fn kind(&self) -> ReservoirKind {
        match self {
            Reservoir::Memoryless { .. } => ReservoirKind::Memoryless,
            Reservoir::Lorentzian { .. } => ReservoirKind::Lorentzian,
        }
    }

    /// Equal-rate memoryless baths.
    pub fn memoryless(gamma: f64) -> Self {
        Reservoir::Memoryless {
            gamma1: gamma,
            gamma2: gamma,
        }
    }

    /// Equal-rate Lorentzian baths.
    pub fn lorentzian(gamma: f64, lambda: f64) -> Self {
        Reservoir::Lorentzian {
            gamma1: gamma,
            gamma2: gamma,
            lambda1: lambda,
            lambda2: lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirKind {
    Memoryless,
    Lorentzian,
}

impl std::fmt::Display for ReservoirKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReservoirKind::Memoryless => f.write_str("memoryless"),
            ReservoirKind::Lorentzian => f.write_str("lorentzian"),
        }
    }
}

/// Qubit–mode couplings κ₁, κ₂, the mode–mode coupling Ω and the reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega_mm: f64,
    pub reservoir: Reservoir,
}

impl ModelParams {
    /// Symmetric memoryless configuration κ₁ = κ₂ = κ, Γ₁ = Γ₂ = Γ.
    pub fn symmetric_memoryless(kappa: f64, omega_mm: f64, gamma: f64) -> Self {
        Self {
            kappa1: kappa,
            kappa2: kappa,
            omega_mm,
            reservoir: Reservoir::memoryless(gamma),
        }
    }

    /// Symmetric Lorentzian configuration κ₁ = κ₂ = κ, γ₁ = γ₂ = γ, λ₁ = λ₂ = λ.
    pub fn symmetric_lorentzian(kappa: f64, omega_mm: f64, gamma: f64, lambda: f64) -> Self {
        Self {
            kappa1: kappa,
            kappa2: kappa,
            omega_mm,
            reservoir: Reservoir::lorentzian(gamma, lambda),
        }
    }

    /// Every rate multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let reservoir = match self.reservoir {
            Reservoir::Memoryless { gamma1, gamma2 } => Reservoir::Memoryless {
                gamma1: gamma1 * s,
                gamma2: gamma2 * s,
            },
            Reservoir::Lorentzian {
                gamma1,
                gamma2,
                lambda1,
                lambda2,
            } => Reservoir::Lorentzian {
                gamma1: gamma1 * s,
                gamma2: gamma2 * s,
                lambda1: lambda1 * s,
                lambda2: lambda2 * s,
            },
        };
        Self {
            kappa1: self.kappa1 * s,
            kappa2: self.kappa2 * s,
            omega_mm: self.omega_mm * s,
            reservoir,
        }
    }

    /// Exchange the roles of mode 1 and mode 2.
    pub fn mode_swapped(&self) -> Self {
        let reservoir = match self.reservoir {
            Reservoir::Memoryless { gamma1, gamma2 } => Reservoir::Memoryless {
                gamma1: gamma2,
                gamma2: gamma1,
            },
            Reservoir::Lorentzian {
                gamma1,
                gamma2,
                lambda1,
                lambda2,
            } => Reservoir::Lorentzian {
                gamma1: gamma2,
                gamma2: gamma1,
                lambda1: lambda2,
                lambda2: lambda1,
            },
        };
        Self {
            kappa1: self.kappa2,
            kappa2: self.kappa1,
            omega_mm: self.omega_mm,
            reservoir,
        }
    }

    fn named_rates(&self) -> Vec<(&'static str, f64)> {
        let mut rates = vec![
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("omega_mm", self.omega_mm),
        ];
        match self.reservoir {
            Reservoir::Memoryless { gamma1, gamma2 } => {
                rates.push(("gamma1", gamma1));
                rates.push(("gamma2", gamma2));
            }
            Reservoir::Lorentzian {
                gamma1,
                gamma2,
                lambda1,
                lambda2,
            } => {
                rates.push(("gamma1", gamma1));
                rates.push(("gamma2", gamma2));
                rates.push(("lambda1", lambda1));
                rates.push(("lambda2", lambda2));
            }
        }
        rates
    }
}

/// Parameters that passed [`validate`]. Solvers accept only this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedParams(ModelParams);

impl ValidatedParams {
    pub fn params(&self) -> &ModelParams {
        &self.0
    }

    pub fn into_inner(self) -> ModelParams {
        self.0
    }

    pub fn kappa1(&self) -> f64 {
        self.0.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.0.kappa2
    }

    pub fn omega_mm(&self) -> f64 {
        self.0.omega_mm
    }

    pub fn reservoir(&self) -> &Reservoir {
        &self.0.reservoir
    }

    pub fn kind(&self) -> ReservoirKind {
        self.0.reservoir.kind()
    }
}

impl TryFrom<ModelParams> for ValidatedParams {
    type Error = ModelError;

    fn try_from(p: ModelParams) -> Result<Self, Self::Error> {
        validate(&p)
    }
}

/// Check that every rate is finite and non-negative.
///
/// Signed zeros are normalized to `+0.0` so that validated parameters
/// compare and serialize uniformly.
pub fn validate(params: &ModelParams) -> Result<ValidatedParams, ModelError> {
    for (name, value) in params.named_rates() {
        if !value.is_finite() {
            return Err(ModelError::NonFinite { name, value });
        }
        if value < 0.0 {
            return Err(ModelError::NegativeRate { name, value });
        }
    }
    let z = |x: f64| if x == 0.0 { 0.0 } else { x };
    let reservoir = match params.reservoir {
        Reservoir::Memoryless { gamma1, gamma2 } => Reservoir::Memoryless {
            gamma1: z(gamma1),
            gamma2: z(gamma2),
        },
        Reservoir::Lorentzian {
            gamma1,
            gamma2,
            lambda1,
            lambda2,
        } => Reservoir::Lorentzian {
            gamma1: z(gamma1),
            gamma2: z(gamma2),
            lambda1: z(lambda1),
            lambda2: z(lambda2),
        },
    };
    Ok(ValidatedParams(ModelParams {
        kappa1: z(params.kappa1),
        kappa2: z(params.kappa2),
        omega_mm: z(params.omega_mm),
        reservoir,
    }))
}

/// Uniform output grid `t_i = t_max * i / (n_samples - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct TimeGrid {
    t_max: f64,
    n_samples: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    t_max: f64,
    n_samples: usize,
}

impl TryFrom<RawGrid> for TimeGrid {
    type Error = ModelError;
    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        TimeGrid::new(raw.t_max, raw.n_samples)
    }
}

impl TimeGrid {
    pub fn new(t_max: f64, n_samples: usize) -> Result<Self, ModelError> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(ModelError::InvalidGrid(format!(
                "t_max must be finite and positive, got {t_max}"
            )));
        }
        if n_samples < 2 {
            return Err(ModelError::InvalidGrid(format!(
                "n_samples must be at least 2, got {n_samples}"
            )));
        }
        Ok(Self { t_max, n_samples })
    }

    /// Grid with spacing no larger than `dt`.
    pub fn with_spacing(t_max: f64, dt: f64) -> Result<Self, ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidGrid(format!("bad spacing {dt}")));
        }
        let intervals = (t_max / dt).ceil().max(1.0) as usize;
        Self::new(t_max, intervals + 1)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_samples {
            self.t_max
        } else {
            self.t_max * i as f64 / (self.n_samples - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }

    /// Same sample count over a horizon scaled by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, ModelError> {
        Self::new(self.t_max * s, self.n_samples)
    }
}

/// Reservoir correlation function f(τ) = ½ γ λ e^{−λ|τ|}.
pub fn correlation_function(gamma: f64, lambda: f64, tau: f64) -> f64 {
    0.5 * gamma * lambda * (-lambda * tau.abs()).exp()
}

/// Lorentzian spectral density J(ω) = γλ² / (2π[(ω−ω₀)² + λ²]) at
/// detuning `omega_offset` = ω − ω₀.
pub fn spectral_density(gamma: f64, lambda: f64, omega_offset: f64) -> Result<f64, ModelError> {
    if lambda == 0.0 {
        return Err(ModelError::ZeroWidth);
    }
    Ok(gamma * lambda * lambda / (2.0 * PI * (omega_offset * omega_offset + lambda * lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn accepts_equal_rate_memoryless_point() {
        let p = ModelParams::symmetric_memoryless(0.3, 1.0, 1.0);
        let v = validate(&p).unwrap();
        assert_eq!(v.params(), &p);
        assert_eq!(v.kind(), ReservoirKind::Memoryless);
    }

    #[test]
    fn rejects_negative_coupling() {
        let mut p = ModelParams::symmetric_memoryless(0.3, 1.0, 1.0);
        p.kappa1 = -0.1;
        assert_eq!(
            validate(&p),
            Err(ModelError::NegativeRate {
                name: "kappa1",
                value: -0.1
            })
        );
    }

    #[test]
    fn rejects_non_finite_rates() {
        let p = ModelParams::symmetric_lorentzian(0.3, f64::NAN, 1.0, 0.5);
        assert!(matches!(
            validate(&p),
            Err(ModelError::NonFinite {
                name: "omega_mm",
                ..
            })
        ));
        let p = ModelParams::symmetric_lorentzian(0.3, 0.0, 1.0, f64::INFINITY);
        assert!(matches!(
            validate(&p),
            Err(ModelError::NonFinite {
                name: "lambda1",
                ..
            })
        ));
    }

    #[test]
    fn all_zero_rates_are_a_valid_free_system() {
        let p = ModelParams::symmetric_memoryless(0.0, 0.0, 0.0);
        assert!(validate(&p).is_ok());
    }

    #[test]
    fn negative_zero_is_normalized() {
        let p = ModelParams::symmetric_memoryless(-0.0, 0.0, 1.0);
        let v = validate(&p).unwrap();
        assert!(v.kappa1().is_sign_positive());
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
        let g = TimeGrid::new(2.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(serde_json::from_str::<TimeGrid>(r#"{"t_max":1.0,"n_samples":1}"#).is_err());
    }

    #[test]
    fn correlation_function_values() {
        assert_eq!(correlation_function(1.0, 2.0, 0.0), 1.0);
        assert!(correlation_function(1.0, 2.0, 1.0e3) < 1e-300);
        assert_relative_eq!(
            correlation_function(1.0, 0.5, 2.0),
            0.25 * (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(correlation_function(1.0, 0.5, 2.0), 0.09197, epsilon = 1e-5);
    }

    #[test]
    fn spectral_density_values() {
        assert_relative_eq!(
            spectral_density(1.0, 1.0, 0.0).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            spectral_density(2.0, 0.5, 0.5).unwrap(),
            1.0 / (2.0 * PI),
            max_relative = 1e-15
        );
        assert_eq!(spectral_density(1.0, 0.0, 0.3), Err(ModelError::ZeroWidth));
    }

    /// Adaptive Simpson on (-1, 1) after the map ω = x / (1 − x²).
    fn integrate_real_line(f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
        let g = |x: f64| {
            let d = 1.0 - x * x;
            if d <= 0.0 {
                return 0.0;
            }
            let w = x / d;
            f(w) * (1.0 + x * x) / (d * d)
        };
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        #[allow(clippy::too_many_arguments)]
        fn refine(
            g: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = g(lm);
            let frm = g(rm);
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                refine(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + refine(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (a, b) = (-1.0, 1.0);
        let (fa, fm, fb) = (g(a), g(0.0), g(b));
        let whole = simpson(a, b, fa, fm, fb);
        refine(&g, a, b, fa, fm, fb, whole, tol, 40)
    }

    #[test]
    fn lorentzian_normalization_by_adaptive_quadrature() {
        let (gamma, lambda) = (1.0, 0.8);
        let total = integrate_real_line(&|w| spectral_density(gamma, lambda, w).unwrap(), 1e-10);
        assert!((total - gamma * lambda / 2.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn spectral_density_and_correlation_are_a_fourier_pair() {
        // Composite Simpson of J(ω) cos(ωτ) on [-L, L]; the neglected tail is
        // below γλ²/(π L² τ) by one integration by parts.
        let big_l = 5000.0;
        let n = 1_000_000usize;
        let h = 2.0 * big_l / n as f64;
        for &gamma in &[0.5, 1.0, 2.0] {
            for &lambda in &[0.5, 1.0, 2.0] {
                for &tau in &[0.5, 1.0, 2.0] {
                    let f = |w: f64| spectral_density(gamma, lambda, w).unwrap() * (w * tau).cos();
                    let mut s = f(-big_l) + f(big_l);
                    for i in 1..n {
                        let w = -big_l + i as f64 * h;
                        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(w);
                    }
                    let numeric = s * h / 3.0;
                    let exact = correlation_function(gamma, lambda, tau);
                    assert!(
                        (numeric - exact).abs() < 1e-4,
                        "γ={gamma} λ={lambda} τ={tau}: {numeric} vs {exact}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn validation_is_idempotent(
            k1 in 0.0..2.0f64, k2 in 0.0..2.0f64, om in 0.0..3.0f64,
            g1 in 0.0..2.0f64, g2 in 0.0..2.0f64, l1 in 0.0..5.0f64, l2 in 0.0..5.0f64,
            lorentz in any::<bool>(),
        ) {
            let reservoir = if lorentz {
                Reservoir::Lorentzian { gamma1: g1, gamma2: g2, lambda1: l1, lambda2: l2 }
            } else {
                Reservoir::Memoryless { gamma1: g1, gamma2: g2 }
            };
            let p = ModelParams { kappa1: k1, kappa2: k2, omega_mm: om, reservoir };
            let once = validate(&p).unwrap();
            let twice = validate(once.params()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn correlation_is_even_and_positive(g in 0.01..5.0f64, l in 0.01..5.0f64, tau in 0.0..50.0f64) {
            let f = correlation_function(g, l, tau);
            prop_assert_eq!(f, correlation_function(g, l, -tau));
            prop_assert!(f > 0.0);
        }
    }
}
