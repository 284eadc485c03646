use std::f64::consts::PI;

use mathieu_floquet::hill;
use mathieu_floquet::model::{uniform_grid, validate};
use mathieu_floquet::monodromy::{self, IntegratorConfig};
use mathieu_floquet::study::{fit_loglog, log_spaced};
use mathieu_floquet::wkb;
use mathieu_floquet::{MathieuParams, PeriodicBranch};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = MathieuParams> {
    (0.01..=1.0f64, 0.5..=2.0f64, -1.0..=1.0f64, 0.5..=2.0f64).prop_map(|(m, gamma, epsilon, omega)| MathieuParams {
        m,
        gamma,
        epsilon,
        omega,
    })
}

fn wkb_params() -> impl Strategy<Value = MathieuParams> {
    params().prop_filter("gamma^2/4 > m|epsilon|", |p| p.gamma * p.gamma > 8.0 * p.m * p.epsilon.abs())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn validate_accepts_exactly_the_positive_finite_set(
        m in prop::num::f64::ANY, gamma in prop::num::f64::ANY,
        epsilon in prop::num::f64::ANY, omega in prop::num::f64::ANY,
    ) {
        let p = MathieuParams { m, gamma, epsilon, omega };
        let report = validate(&p);
        let expected = [m, gamma, epsilon, omega].iter().all(|v| v.is_finite()) && m > 0.0 && gamma > 0.0 && omega > 0.0;
        prop_assert_eq!(report.is_ok(), expected);
        prop_assert_eq!(report, validate(&p));
    }

    #[test]
    fn hill_determinant_is_even_in_epsilon(p in params(), n in 1usize..200) {
        let flipped = p.with_epsilon(-p.epsilon);
        prop_assert_eq!(hill::det_truncated(&p, n), hill::det_truncated(&flipped, n));
        prop_assert_eq!(hill::det_truncated_deficit(&p, n), hill::det_truncated_deficit(&flipped, n));
    }

    #[test]
    fn hill_determinant_is_even_in_omega(p in params(), n in 1usize..200) {
        let flipped = MathieuParams { omega: -p.omega, ..p };
        prop_assert_eq!(hill::det_truncated(&p, n), hill::det_truncated(&flipped, n));
    }

    #[test]
    fn recurrence_matches_lu(p in params(), n in 1usize..=50) {
        let direct = hill::det_truncated_direct(&p, n).unwrap();
        prop_assert!(rel(hill::det_truncated(&p, n), direct) <= 1e-12);
    }

    #[test]
    fn delta0_lies_in_unit_interval(p in wkb_params()) {
        let d = hill::delta0(&p, hill::DEFAULT_HILL_TOL).unwrap();
        prop_assert!(d.delta0 > 0.0 && d.delta0 <= 1.0);
        prop_assert!(d.deficit >= 0.0);
        prop_assert!((d.delta0 - (1.0 - d.deficit)).abs() <= 1e-15);
    }

    #[test]
    fn partial_sums_are_squeezed(p in params(), terms in 1usize..500) {
        let s = hill::series_s_bruteforce(&p, terms);
        let bounds = hill::bound_series_bruteforce(&p, terms);
        prop_assert!(bounds.lower <= s * (1.0 + 1e-14) && s <= bounds.upper * (1.0 + 1e-14));
    }

    #[test]
    fn fit_recovers_power_law(
        p_idx in 0usize..4, c in 1e-3..1e3f64, lo in 1e-4..1e-2f64, span in 5.0..100.0f64, points in 3usize..30,
    ) {
        let power = [0.5, 1.0, 2.0, 3.0][p_idx];
        let data: Vec<(f64, f64)> = log_spaced(lo, lo * span, points).into_iter().map(|m| (m, c * m.powf(power))).collect();
        let fit = fit_loglog(&data).unwrap();
        prop_assert!((fit.slope - power).abs() <= 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-8);
        prop_assert!(fit.r_squared >= 1.0 - 1e-12);
    }

    #[test]
    fn log_spaced_is_descending_with_exact_ends(lo in 1e-4..1.0f64, span in 1.5..1e3f64, points in 2usize..64) {
        let grid = log_spaced(lo, lo * span, points);
        prop_assert_eq!(grid.len(), points);
        prop_assert_eq!(grid[0], lo * span);
        prop_assert_eq!(*grid.last().unwrap(), lo);
        prop_assert!(grid.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn wkb_prediction_shifts_half_period_under_epsilon_flip(p in wkb_params(), t in 0.0..10.0f64) {
        let flipped = p.with_epsilon(-p.epsilon);
        let shift = PI / p.omega;
        for branch in [PeriodicBranch::Max, PeriodicBranch::Min] {
            let a = wkb::wkb_periodic(&flipped, &[t], branch).unwrap().values[0];
            let b = wkb::wkb_periodic(&p, &[t + shift], branch).unwrap().values[0];
            prop_assert!(rel(a, b) <= 1e-12);
        }
        prop_assert_eq!(wkb::wkb_exponents(&p), wkb::wkb_exponents(&flipped));
    }

    #[test]
    fn envelope_is_monotone_in_time(p in wkb_params(), s in 0.0..1.0f64, u in 0.0..1.0f64) {
        let horizon = 2.0 * p.period();
        let (t0, t1) = if s <= u { (s * horizon, u * horizon) } else { (u * horizon, s * horizon) };
        let a = wkb::olver_error_envelope(&p, t0, horizon).unwrap();
        let b = wkb::olver_error_envelope(&p, t1, horizon).unwrap();
        prop_assert!(a.f1 >= 0.0 && a.f2 >= 0.0);
        prop_assert!(a.f1 <= b.f1 * (1.0 + 1e-9) + 1e-15);
        prop_assert!(a.f2 * (1.0 + 1e-9) + 1e-15 >= b.f2);
        prop_assert!(a.delta_bound <= b.delta_bound);
        prop_assert!(a.eps_bound_1_alt <= b.eps_bound_1_alt * (1.0 + 1e-9) + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monodromy_obeys_abel_and_epsilon_symmetry(p in params().prop_filter("moderate m", |p| p.m >= 0.05 && p.m <= 0.5)) {
        let cfg = IntegratorConfig::default();
        let a = monodromy::floquet(&p, &cfg);
        let b = monodromy::floquet(&p.with_epsilon(-p.epsilon), &cfg);
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert!(a.abel_residual <= 1e-9);
        prop_assert!(rel(a.lambda_max + a.lambda_min, -p.gamma / p.m) <= 1e-12);
        prop_assert!((a.lambda_max - b.lambda_max).abs() <= 1e-9 * (1.0 + a.lambda_max.abs()));
    }

    #[test]
    fn growing_periodic_part_is_positive(p in wkb_params().prop_filter("small m", |p| p.m <= 0.2)) {
        let cfg = IntegratorConfig::default();
        let result = monodromy::floquet(&p, &cfg).unwrap();
        let part = monodromy::periodic_part(&p, &result, PeriodicBranch::Max, 128, &cfg).unwrap();
        prop_assert!(part.values.iter().all(|&v| v > 0.0));
        prop_assert!(part.periodicity_residual() <= 1e-6);
    }
}

#[test]
fn halving_tolerance_moves_exponent_less_than_its_asymptotic_error() {
    let base = MathieuParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let coarse = IntegratorConfig::default();
    let fine = coarse.with_rel_tol(coarse.rel_tol / 2.0);
    for m in log_spaced(0.005, 0.32, 16) {
        let p = base.with_m(m);
        let a = monodromy::floquet(&p, &coarse).unwrap().lambda_max;
        let b = monodromy::floquet(&p, &fine).unwrap().lambda_max;
        let asymptotic_error = (a - wkb::wkb_exponents(&p).0).abs();
        assert!((a - b).abs() < asymptotic_error, "m = {m}: |{a} - {b}| vs {asymptotic_error}");
    }
}

#[test]
fn exponent_sum_matches_abel_at_reference_masses() {
    let cfg = IntegratorConfig::default();
    for m in [0.5, 0.2, 0.1] {
        let p = MathieuParams::new(m, 1.0, 1.0, 1.0).unwrap();
        let mono = monodromy::monodromy_matrix(&p, &cfg).unwrap();
        let sum = mono.log_det / p.period();
        assert!(rel(sum, -p.gamma / p.m) <= 1e-8, "m = {m}: {sum}");
    }
}

#[test]
fn periodic_parts_are_mirror_images() {
    let p = MathieuParams::new(0.05, 1.0, 1.0, 1.0).unwrap();
    let cfg = IntegratorConfig::default();
    let result = monodromy::floquet(&p, &cfg).unwrap();
    let max = monodromy::periodic_part(&p, &result, PeriodicBranch::Max, 65, &cfg).unwrap();
    let min = monodromy::periodic_part(&p, &result, PeriodicBranch::Min, 65, &cfg).unwrap();
    for k in 0..65 {
        assert!((max.values[k] - min.values[64 - k]).abs() <= 1e-8, "k = {k}");
    }
    let grid = uniform_grid(p.period(), 65);
    assert_eq!(max.grid, grid);
}
