use pfr_web::{amplitude_curves, outlet_traces, pair_explorer, pair_explorer_js};

#[test]
fn curves_have_requested_shape() {
    let curves = amplitude_curves(50, &[0.0, 0.5, 1.5]);
    assert_eq!(curves.len(), 3);
    assert!(curves.iter().all(|c| c.x.len() == 50 && c.y.len() == 50));
    // β = 0 reproduces the single-input curve
    for (a, b) in curves[0].y.iter().zip(&curves[1].y) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn traces_carry_reference_costs() {
    let traces = outlet_traces(2.0, 0.001, 200).unwrap();
    assert_eq!(traces.len(), 4);
    assert!((traces[0].cost - 1.0 / 110.0).abs() < 1e-12);
    assert!((traces[2].cost - 8.90269151138716e-3).abs() < 1e-12);
    assert!(traces
        .iter()
        .all(|t| t.outlet.len() == 200 && t.outlet.iter().all(|&c| c > 0.0)));
    assert!(outlet_traces(-1.0, 0.001, 10).is_err());
}

#[test]
fn explorer_reports_case_and_errors_as_json() {
    let view = pair_explorer(1.0, 0.5, 1.5, 0.005, 0.015).unwrap();
    assert!((view.kappa - 0.0025).abs() < 1e-12);
    assert!((view.a_minus - 100.0 / 3.0).abs() < 1e-12);
    assert!(view.feed_residual.abs() < 1e-12 && view.residence_residual.abs() < 1e-12);
    let bad = pair_explorer_js(1.0, 0.5, 1.5, 0.02, 0.03);
    assert!(bad.contains("\"error\""), "{bad}");
}
