//! Invariants checked across the parameter corpus and random parameters.

mod common;

use nmcavity::dynamics::{QubitSeries, Trajectory};
use nmcavity::measures::{
    blp_measure, blp_measure_refined, d_squared_rate, positive_rate_integral, trace_distance_series, witness_series,
    MeasureSettings,
};
use nmcavity::model::{ModelParams, TimeGrid};
use nmcavity::sweep::{
    evaluate_point, find_boundary, linspace, outcome_report, sweep_1d, with_threads, RunSettings, SweepParam,
    SweepSpec,
};
use nmcavity::validate;
use proptest::prelude::*;

use common::*;

fn lenient() -> MeasureSettings {
    MeasureSettings {
        tail_tol: f64::INFINITY,
        ..Default::default()
    }
}

#[test]
fn segmentation_matches_rate_quadrature_on_corpus() {
    let grid = TimeGrid::with_spacing(100.0, 0.01).unwrap();
    for p in memoryless_corpus().iter().chain(&lorentzian_corpus()) {
        let (_, traj) = run(p, &grid);
        let seg = blp_measure_refined(&traj, &lenient()).unwrap().n_value;
        let quad = positive_rate_integral(&traj);
        assert!((seg - quad).abs() < 1e-6, "{p:?}: {seg} vs {quad}");
    }
}

#[test]
fn refinement_only_raises_the_sampled_measure() {
    let grid = TimeGrid::with_spacing(100.0, 0.05).unwrap();
    for p in memoryless_corpus().iter().chain(&lorentzian_corpus()) {
        let (_, traj) = run(p, &grid);
        let coarse = blp_measure(traj.times(), &trace_distance_series(&traj), &lenient()).unwrap();
        let fine = blp_measure_refined(&traj, &lenient()).unwrap();
        assert!(fine.n_value >= coarse.n_value - 1e-12, "{p:?}");
    }
}

#[test]
fn report_structure_holds_on_corpus() {
    let grid = TimeGrid::with_spacing(200.0, 0.01).unwrap();
    for p in memoryless_corpus().iter().chain(&lorentzian_corpus()) {
        let (_, traj) = run(p, &grid);
        let r = blp_measure_refined(&traj, &lenient()).unwrap();
        assert!(r.n_value >= 0.0);
        assert_eq!(r.n_value, r.segments.iter().fold(0.0, |a, s| a + s.rise));
        assert!(r.segments.iter().all(|s| s.t_start < s.t_end && s.rise > 0.0));
        assert!(r.segments.windows(2).all(|w| w[0].t_end <= w[1].t_start));
        assert_eq!(r.truncation_tail, traj.last_qubit_modulus());
    }
}

#[test]
fn witness_duality_on_memoryless_corpus() {
    let grid = TimeGrid::with_spacing(60.0, 0.01).unwrap();
    for p in memoryless_corpus() {
        let (_, traj) = run(&p, &grid);
        let w = witness_series(&traj).unwrap();
        assert_eq!(w.w_values.len(), grid.n_samples());
        for (wi, ri) in w.w_values.iter().zip(d_squared_rate(&traj)) {
            if ri.abs() > 1e-9 {
                assert_eq!(wi.signum(), -ri.signum(), "{p:?}");
            }
            assert!((wi + ri).abs() < 1e-12);
        }
    }
}

#[test]
fn lorentzian_partial_initial_excitation_stays_bounded() {
    let grid = TimeGrid::with_spacing(100.0, 0.01).unwrap();
    let h0 = num_complex::Complex64::from_polar(0.6, 0.4);
    for p in lorentzian_corpus() {
        let v = validate(&p).unwrap();
        let traj = nmcavity::evolve(&v, &grid, &nmcavity::Tolerances::default(), h0).unwrap();
        let Trajectory::Lorentzian(t) = &traj else { unreachable!() };
        assert!(t.reservoir_population().iter().all(|&x| (-1e-9..=0.36 + 1e-9).contains(&x)));
    }
}

#[test]
fn sweeps_are_schedule_independent() {
    let base = validate(&ModelParams::symmetric_lorentzian(0.3, 0.0, 1.0, 0.8)).unwrap();
    let settings = RunSettings {
        grid: TimeGrid::with_spacing(100.0, 0.05).unwrap(),
        ..Default::default()
    };
    let spec = SweepSpec::new(base, SweepParam::OmegaMm, linspace(0.0, 3.0, 13), settings).unwrap();
    let one = with_threads(1, || sweep_1d(&spec)).unwrap();
    let many = with_threads(5, || sweep_1d(&spec)).unwrap();
    assert_eq!(one, many);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measure_is_invariant_under_rate_rescaling(
        kappa in 0.05f64..0.5, omega in 0.0f64..3.0, gamma in 0.5f64..2.0, s in 0.25f64..4.0
    ) {
        let base = RunSettings { grid: TimeGrid::new(100.0, 10_001).unwrap(), ..Default::default() };
        let scaled = RunSettings { grid: base.grid.scaled(1.0 / s).unwrap(), ..base };
        let p = ModelParams::symmetric_memoryless(kappa, omega, gamma);
        let a = evaluate_point(&p, &base);
        let b = evaluate_point(&p.scaled(s), &scaled);
        let (a, b) = (outcome_report(&a).unwrap(), outcome_report(&b).unwrap());
        prop_assert!((a.n_value - b.n_value).abs() < 1e-8);
    }

    #[test]
    fn measure_is_continuous_in_omega(kappa in 0.2f64..0.5, omega in 0.0f64..3.0) {
        let s = RunSettings { grid: TimeGrid::new(100.0, 10_001).unwrap(), ..Default::default() };
        let n = |om: f64| outcome_report(&evaluate_point(&ModelParams::symmetric_memoryless(kappa, om, 1.0), &s))
            .unwrap()
            .n_value;
        let n0 = n(omega);
        let d1 = (n(omega + 1e-3) - n0).abs();
        let d2 = (n(omega + 1e-5) - n0).abs();
        prop_assert!(d2 <= d1 + 1e-9 && d2 < 1e-4, "{d1} {d2}");
    }

    #[test]
    fn boundary_returns_a_bracketing_value(omega in 0.0f64..0.8) {
        let s = RunSettings::default();
        let base = validate(&ModelParams::symmetric_memoryless(0.0, omega, 1.0)).unwrap();
        let tol = 1e-3;
        let k = find_boundary(&base, SweepParam::Kappa, 0.02, 0.5, tol, &s).unwrap();
        let regime = |v: f64| outcome_report(&evaluate_point(&SweepParam::Kappa.apply(base.params(), v).unwrap(), &s))
            .unwrap()
            .regime;
        prop_assert_ne!(regime(k - tol), regime(k + tol));
    }
}
