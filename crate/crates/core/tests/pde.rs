use pfr_core::cost::cost_outlet;
use pfr_core::pdecheck::{
    convergence_study, is_periodic, simulate, weak_identity_residual, Bump, Grid,
};
use pfr_core::strategy::{make_bang_pair, make_bang_single, SwitchPattern};
use pfr_core::{ConcentrationField, IsoperimetricSpec, PeriodicSignal, ReactorParams};

fn steady() -> PeriodicSignal {
    PeriodicSignal::steady(100.0, 1.0).unwrap()
}

#[test]
fn steady_outlet_at_fine_grid() {
    let p = ReactorParams::reference();
    let grid = Grid::for_controls(&p, &steady(), None, 512, 0.9, 2).unwrap();
    let sim = simulate(&p, &steady(), None, &grid).unwrap();
    for &c in &sim.last.values {
        assert!((c - 1.0 / 1.1).abs() < 2e-3);
    }
    assert_eq!(sim.clamp_events, 0);
}

#[test]
fn cost_matches_exact_for_reference_scenarios() {
    let p = ReactorParams::reference();
    let spec = IsoperimetricSpec::reference();
    let bang = make_bang_single(&spec, &SwitchPattern::default()).unwrap();
    let pair = make_bang_pair(&spec, 1.0).unwrap();
    let cases = [
        (steady(), None),
        (bang, None),
        (pair.c.clone(), Some(pair.v.clone())),
    ];
    for (c, v) in &cases {
        let exact = cost_outlet(c, v.as_ref(), &p).unwrap().j;
        let grid = Grid::for_controls(&p, c, v.as_ref(), 512, 0.9, 3).unwrap();
        let sim = simulate(&p, c, v.as_ref(), &grid).unwrap();
        assert!((sim.outlet_flux - exact).abs() <= 5e-3 * exact);
        assert!(is_periodic(sim.periodic_residual(), 1.5));
        // maximum principle
        assert!(sim.min_value >= 0.0 && sim.max_value <= 1.5 + 1e-12);
        assert_eq!(sim.clamp_events, 0);
    }
}

#[test]
fn first_order_convergence_on_smooth_inputs() {
    let p = ReactorParams::reference();
    let sinusoid = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
    for c in [steady(), sinusoid] {
        let field = ConcentrationField::constant(p, c).unwrap();
        let levels = convergence_study(&field, &[64, 128, 256, 512], 0.9, 2).unwrap();
        for level in levels.iter().skip(1) {
            let order = level.order.unwrap();
            assert!((order - 1.0).abs() <= 0.2, "{levels:?}");
        }
    }
}

#[test]
fn transient_is_not_periodic() {
    // field starts at C_min everywhere; one warm-up period is still transient
    let p = ReactorParams::reference();
    let spec = IsoperimetricSpec::reference();
    let bang = make_bang_single(&spec, &SwitchPattern::default()).unwrap();
    let short = Grid::for_controls(&p, &bang, None, 128, 0.9, 1).unwrap();
    let long = Grid::for_controls(&p, &bang, None, 128, 0.9, 3).unwrap();
    let r_short = simulate(&p, &bang, None, &short)
        .unwrap()
        .periodic_residual();
    let r_long = simulate(&p, &bang, None, &long)
        .unwrap()
        .periodic_residual();
    assert!(!is_periodic(r_short, 1.5));
    assert!(is_periodic(r_long, 1.5));
}

#[test]
fn weak_residual_decreases_for_steady_field() {
    let field = ConcentrationField::constant(ReactorParams::reference(), steady()).unwrap();
    let bump = Bump {
        x0: 0.5,
        t0: 50.0,
        half_width_x: 0.3,
        half_width_t: 30.0,
        power: 4,
    };
    let residuals: Vec<f64> = [16, 32, 64, 128, 256, 512]
        .iter()
        .map(|&q| weak_identity_residual(&field, &bump, q).unwrap().abs())
        .collect();
    assert!(residuals[5] < 1e-6, "{residuals:?}");
    for w in residuals.windows(2) {
        assert!(w[1] < w[0] || w[1] < 1e-13, "{residuals:?}");
    }
}

#[test]
fn weak_residual_for_bang_field_away_from_fronts() {
    // characteristics t - 100x stay inside (55, 95): no inlet switch crosses the support
    let spec = IsoperimetricSpec::single(100.0, 1.0, 0.5, 1.5).unwrap();
    let c = PeriodicSignal::from_durations(100.0, &[(50.0, 0.5), (50.0, 1.5)]).unwrap();
    assert_eq!(c.mean(), spec.c_mean);
    let field = ConcentrationField::constant(ReactorParams::reference(), c).unwrap();
    let bump = Bump {
        x0: 0.25,
        t0: 100.0,
        half_width_x: 0.05,
        half_width_t: 15.0,
        power: 4,
    };
    let r = weak_identity_residual(&field, &bump, 256).unwrap();
    assert!(r.abs() < 1e-8, "{r}");
}

#[test]
fn plus_sign_on_reaction_term_leaves_a_residual() {
    let p = ReactorParams::reference();
    let field = ConcentrationField::constant(p, steady()).unwrap();
    let bump = Bump {
        x0: 0.5,
        t0: 50.0,
        half_width_x: 0.3,
        half_width_t: 30.0,
        power: 4,
    };
    let n = 256;
    let minus = weak_identity_residual(&field, &bump, n).unwrap();
    // ∬ k Cⁿ φ by the same midpoint rule; the "+" form differs from the "-" form by twice this
    let (hx, ht) = (0.6 / n as f64, 60.0 / n as f64);
    let mut sink = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = 0.2 + (i as f64 + 0.5) * hx;
            let t = 20.0 + (j as f64 + 0.5) * ht;
            sink += p.rate_constant * field.eval(x, t).unwrap().powi(2) * bump.eval(x, t).0;
        }
    }
    let plus = minus + 2.0 * sink * hx * ht;
    assert!(minus.abs() < 1e-9);
    assert!(plus.abs() > 1e-4, "{plus}");
}

#[test]
fn field_dump_has_expected_rows() {
    let p = ReactorParams::reference();
    let grid = Grid::for_controls(&p, &steady(), None, 32, 0.9, 1)
        .unwrap()
        .with_snapshots(100);
    let sim = simulate(&p, &steady(), None, &grid).unwrap();
    let mut out = Vec::new();
    sim.write_field_csv(&mut out).unwrap();
    let rows = String::from_utf8(out).unwrap().lines().count() - 1;
    assert_eq!(rows, sim.snapshots.len() * 33);
    assert!(!sim.snapshots.is_empty());
}
