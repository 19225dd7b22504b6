use pfr_core::cost::{
    cost_outlet, cost_pair, cost_pair_quadrature, cost_single, cost_single_quadrature, phi,
    phi_prime, ReducedIntegrand,
};
use pfr_core::experiments::{closed_form_percent_pair, closed_form_percent_single, open_unit_grid};
use pfr_core::strategy::{
    check_admissible_pair, check_admissible_single, classify_class_a, kappa, make_bang_pair,
    make_bang_single, project_flow, project_to_constraint, SwitchPattern,
};
use pfr_core::{CumulativeFlow, IsoperimetricSpec, PeriodicSignal, ReactorParams, StrategyCase};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

const TAU: f64 = 100.0;

fn raw_steps(lo: f64, hi: f64) -> impl Strategy<Value = PeriodicSignal> {
    prop::collection::vec((0.01f64..1.0, lo..=hi), 1..12).prop_map(move |pieces| {
        let total: f64 = pieces.iter().map(|p| p.0).sum();
        let scaled: Vec<(f64, f64)> = pieces.iter().map(|&(w, c)| (TAU * w / total, c)).collect();
        PeriodicSignal::from_durations(TAU, &scaled).unwrap()
    })
}

fn admissible_control() -> impl Strategy<Value = PeriodicSignal> {
    let spec = IsoperimetricSpec::reference();
    raw_steps(spec.c_min, spec.c_max)
        .prop_map(move |raw| project_to_constraint(&raw, &spec, None).unwrap())
}

fn admissible_pair() -> impl Strategy<Value = (PeriodicSignal, PeriodicSignal)> {
    let spec = IsoperimetricSpec::reference();
    (raw_steps(spec.c_min, spec.c_max), raw_steps(0.005, 0.015)).prop_map(move |(rc, rv)| {
        let v = project_flow(&rv, &spec, 1.0).unwrap();
        let c = project_to_constraint(&rc, &spec, Some(&v)).unwrap();
        (c, v)
    })
}

/// `(1/τ)∫ Φ(c)` by a uniform midpoint Riemann sum.
fn riemann_mean<F: Fn(f64) -> f64>(c: &PeriodicSignal, f: F, points: usize) -> f64 {
    let h = TAU / points as f64;
    (0..points)
        .map(|i| f(c.eval((i as f64 + 0.5) * h)))
        .sum::<f64>()
        / points as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn signal_is_periodic(c in raw_steps(0.1, 2.0), t in -300.0f64..300.0, m in -5i32..6) {
        prop_assert_eq!(c.eval(t), c.eval(t + TAU * m as f64));
    }

    #[test]
    fn cumulative_round_trip(v in raw_steps(0.002, 0.02), t in -250.0f64..250.0) {
        let cf = CumulativeFlow::new(&v).unwrap();
        prop_assert!((cf.inverse(cf.value(t)) - t).abs() <= 1e-9);
    }

    #[test]
    fn projection_is_admissible(c in admissible_control()) {
        prop_assert!(check_admissible_single(&c, &IsoperimetricSpec::reference()).is_admissible());
    }

    #[test]
    fn projected_pairs_are_admissible((c, v) in admissible_pair()) {
        let r = check_admissible_pair(&c, &v, &IsoperimetricSpec::reference(), 1.0).unwrap();
        prop_assert!(r.is_admissible(), "{:?}", r);
    }

    #[test]
    fn mean_matches_riemann_sum(c in raw_steps(0.1, 2.0)) {
        let riemann = riemann_mean(&c, |x| x, 200_000);
        prop_assert!((c.mean() - riemann).abs() < 1e-4);
    }

    #[test]
    fn jensen_for_concave_phi(c in admissible_control()) {
        let p = ReactorParams::reference();
        let lhs = phi(&p, c.mean()).unwrap();
        let rhs = riemann_mean(&c, |x| phi(&p, x).unwrap(), 20_000);
        prop_assert!(lhs >= rhs - 1e-12);
    }

    #[test]
    fn cost_routes_agree(c in admissible_control()) {
        let p = ReactorParams::reference();
        let spec = IsoperimetricSpec::reference();
        let a = cost_single(&c, &p, &spec).unwrap().j;
        let q = cost_single_quadrature(&c, &p).unwrap().j;
        let o = cost_outlet(&c, None, &p).unwrap().j;
        prop_assert!((a - q).abs() <= 1e-8 * a && (a - o).abs() <= 1e-8 * a);
    }

    #[test]
    fn pair_cost_routes_agree((c, v) in admissible_pair()) {
        let p = ReactorParams::reference();
        let spec = IsoperimetricSpec::reference();
        let a = cost_pair(&c, &v, &p, &spec).unwrap().j;
        let q = cost_pair_quadrature(&c, &v, &p).unwrap().j;
        let o = cost_outlet(&c, Some(&v), &p).unwrap().j;
        prop_assert!((a - q).abs() <= 1e-8 * a, "{} {}", a, q);
        prop_assert!((a - o).abs() <= 1e-8 * a, "{} {}", a, o);
    }

    #[test]
    fn bang_never_loses_for_second_order(c in admissible_control()) {
        let p = ReactorParams::reference();
        let spec = IsoperimetricSpec::reference();
        let bang = make_bang_single(&spec, &SwitchPattern::default()).unwrap();
        prop_assert!(cost_single(&bang, &p, &spec).unwrap().j <= cost_single(&c, &p, &spec).unwrap().j + 1e-12);
    }

    #[test]
    fn class_a_split_exists(c in admissible_control()) {
        let spec = IsoperimetricSpec::reference();
        let nu = spec.high_measure();
        let split = classify_class_a(&c, &spec, nu).unwrap();
        prop_assert!((split.upper.measure() - nu).abs() < 1e-9);
        // c ≥ C̃ on A⁺ and c ≤ C̃ on A⁻, sampled
        for i in 0..400 {
            let t = (i as f64 + 0.5) * TAU / 400.0;
            let x = c.eval(t);
            if split.upper.contains(t) {
                prop_assert!(x >= split.threshold - 1e-12);
            } else {
                prop_assert!(x <= split.threshold + 1e-12);
            }
        }
    }

    #[test]
    fn level_set_measures_match_monte_carlo(c in raw_steps(0.5, 1.5), th in 0.5f64..1.5) {
        let (above, below) = c.measure_level_sets(th);
        prop_assert!((above + below - TAU).abs() < 1e-9);
        let n = 20_000;
        let hits = (0..n).filter(|&i| c.eval((i as f64 + 0.5) * TAU / n as f64) >= th).count();
        // step signals: a midpoint grid misses at most one cell per breakpoint
        prop_assert!((above - TAU * hits as f64 / n as f64).abs() <= 12.0 * TAU / n as f64);
    }

    #[test]
    fn kappa_sign_matches_case(c_mean in 0.6f64..1.4, v_min in 0.001f64..0.009, v_span in 0.002f64..0.02) {
        let v_max = v_min + v_span;
        let spec = match IsoperimetricSpec::single(TAU, c_mean, 0.5, 1.5)
            .and_then(|s| s.with_flow(0.01, v_min, v_max)) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        if spec.validate_pair(1.0).is_err() {
            return Ok(());
        }
        let pair = make_bang_pair(&spec, 1.0).unwrap();
        let k = kappa(&spec, 1.0).unwrap();
        prop_assert_eq!(pair.case, if k > 0.0 { StrategyCase::II } else { StrategyCase::I });
        let r = check_admissible_pair(&pair.c, &pair.v, &spec, 1.0).unwrap();
        prop_assert!(r.feed_residual.abs() <= 1e-12 && r.residence_residual.abs() <= 1e-12, "{:?}", r);
        prop_assert!(pair.forbidden_overlap() <= 1e-9);
    }
}

#[test]
fn phi_concavity_witness_on_grid() {
    let p = ReactorParams::reference();
    let psi = ReducedIntegrand::psi(&p, TAU);
    let grid: Vec<f64> = (0..100).map(|i| 0.5 + i as f64 / 99.0).collect();
    for &x in &grid {
        for &y in &grid {
            let gap_phi =
                phi(&p, x).unwrap() - phi(&p, y).unwrap() - phi_prime(&p, y).unwrap() * (x - y);
            let gap_psi = psi.value(x).unwrap()
                - psi.value(y).unwrap()
                - psi.derivative(y).unwrap() * (x - y);
            assert!(gap_phi <= 1e-15 && gap_psi <= 1e-15, "x={x} y={y}");
        }
    }
}

#[test]
fn first_order_cost_is_control_independent() {
    let p = ReactorParams::new(1.0, 0.001, 1.0, 0.01).unwrap();
    let spec = IsoperimetricSpec::reference();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = admissible_control();
    let costs: Vec<f64> = (0..50)
        .map(|_| {
            let c = strategy.new_tree(&mut runner).unwrap().current();
            cost_single(&c, &p, &spec).unwrap().j
        })
        .collect();
    let (lo, hi) = costs
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &j| (a.min(j), b.max(j)));
    assert!(hi - lo <= 1e-12, "spread {}", hi - lo);
}

#[test]
fn improvement_is_monotone_in_amplitudes() {
    let grid = open_unit_grid(50);
    for w in grid.windows(2) {
        assert!(closed_form_percent_single(w[1]) > closed_form_percent_single(w[0]));
    }
    for &a in &open_unit_grid(20) {
        let betas = open_unit_grid(20);
        for w in betas.windows(2) {
            assert!(closed_form_percent_pair(a, w[1]) > closed_form_percent_pair(a, w[0]));
        }
    }
}

#[test]
fn bang_measures_are_exact() {
    for &(mean, lo, hi) in &[(1.0, 0.5, 1.5), (0.8, 0.2, 2.0), (3.0, 1.0, 4.0)] {
        let spec = IsoperimetricSpec::single(TAU, mean, lo, hi).unwrap();
        for m in [1, 3, 7] {
            let c = make_bang_single(&spec, &SwitchPattern::Cycles(m)).unwrap();
            let (_, below) = c.measure_level_sets(0.5 * (lo + hi));
            assert!((below - TAU * (hi - mean) / (hi - lo)).abs() < 1e-12);
            assert!((c.mean() - mean).abs() < 1e-14);
        }
    }
}
