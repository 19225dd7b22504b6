//! Browser front end for the reactor model. Each exported function takes
//! plain numbers and returns a JSON string; the page draws the result on a
//! canvas. The wasm wrappers are thin shims over ordinary functions.

use pfr_core::cost::{cost_outlet, cost_pair, cost_single};
use pfr_core::experiments::{closed_form_percent_pair, closed_form_percent_single, open_unit_grid};
use pfr_core::strategy::{check_admissible_pair, make_bang_pair, make_bang_single, SwitchPattern};
use pfr_core::{
    ConcentrationField, IsoperimetricSpec, PeriodicSignal, ReactorParams, StrategyCase,
    StrategyPair,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Curve {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Improvement over steady operation in percent against the amplitude `α`:
/// the single-input curve and one two-input curve per `β`.
pub fn amplitude_curves(points: usize, betas: &[f64]) -> Vec<Curve> {
    let alphas = open_unit_grid(points.clamp(2, 2000));
    let mut curves = vec![Curve {
        label: "single input".into(),
        y: alphas
            .iter()
            .map(|&a| closed_form_percent_single(a))
            .collect(),
        x: alphas.clone(),
    }];
    for &beta in betas.iter().filter(|b| (0.0..1.0).contains(*b)) {
        curves.push(Curve {
            label: format!("two inputs, beta = {beta:.2}"),
            y: alphas
                .iter()
                .map(|&a| closed_form_percent_pair(a, beta))
                .collect(),
            x: alphas.clone(),
        });
    }
    curves
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Trace {
    pub label: String,
    pub cost: f64,
    pub t: Vec<f64>,
    pub inlet: Vec<f64>,
    pub outlet: Vec<f64>,
    pub flow: Vec<f64>,
}

fn reference_with_order(order: f64, rate_constant: f64) -> Result<ReactorParams, String> {
    let base = ReactorParams::reference();
    ReactorParams::new(order, rate_constant, base.length, base.flow_rate).map_err(|e| e.to_string())
}

/// Boundary traces over one period for the steady, sinusoidal,
/// bang-bang and two-input bang strategies of the reference constraint.
pub fn outlet_traces(order: f64, rate_constant: f64, samples: usize) -> Result<Vec<Trace>, String> {
    let params = reference_with_order(order, rate_constant)?;
    let spec = IsoperimetricSpec::reference();
    let tau = spec.period;
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let steady = PeriodicSignal::steady(tau, spec.c_mean).map_err(|e| err(&e))?;
    let sinusoid = PeriodicSignal::sinusoid(tau, spec.c_mean, 0.5, 0.0).map_err(|e| err(&e))?;
    let bang = make_bang_single(&spec, &SwitchPattern::default()).map_err(|e| err(&e))?;
    let pair = make_bang_pair(&spec, params.length).map_err(|e| err(&e))?;
    let cases = [
        ("steady", steady, None),
        ("sinusoid", sinusoid, None),
        ("bang", bang, None),
        ("bang pair", pair.c, Some(pair.v)),
    ];
    let n = samples.clamp(16, 20_000);
    cases
        .into_iter()
        .map(|(label, c, v)| {
            let cost = cost_outlet(&c, v.as_ref(), &params).map_err(|e| err(&e))?.j;
            let field = ConcentrationField::new(params, c.clone(), v).map_err(|e| err(&e))?;
            let t: Vec<f64> = (0..n).map(|i| tau * i as f64 / n as f64).collect();
            let outlet = t
                .iter()
                .map(|&s| field.outlet(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&e))?;
            Ok(Trace {
                label: label.into(),
                cost,
                inlet: t.iter().map(|&s| c.eval(s)).collect(),
                flow: t.iter().map(|&s| field.velocity(s)).collect(),
                outlet,
                t,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PairView {
    pub kappa: f64,
    pub case: StrategyCase,
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    /// `(start, end, value)` pieces over one period.
    pub c_steps: Vec<(f64, f64, f64)>,
    pub v_steps: Vec<(f64, f64, f64)>,
    pub cost_pair: f64,
    pub cost_bang: f64,
    pub cost_steady: f64,
    pub feed_residual: f64,
    pub residence_residual: f64,
}

fn steps_of(s: &PeriodicSignal) -> Vec<(f64, f64, f64)> {
    match s.steps() {
        Some(steps) => steps.iter().map(|p| (p.start, p.end, p.value)).collect(),
        None => Vec::new(),
    }
}

/// Optimal two-input pair for a reference reactor with the given bounds.
pub fn pair_explorer(
    c_mean: f64,
    c_min: f64,
    c_max: f64,
    v_min: f64,
    v_max: f64,
) -> Result<PairView, String> {
    let params = ReactorParams::reference();
    let period = 100.0;
    let spec = IsoperimetricSpec::single(period, c_mean, c_min, c_max)
        .and_then(|s| s.with_flow(params.length / period, v_min, v_max))
        .map_err(|e| e.to_string())?;
    let pair: StrategyPair = make_bang_pair(&spec, params.length).map_err(|e| e.to_string())?;
    let residual =
        check_admissible_pair(&pair.c, &pair.v, &spec, params.length).map_err(|e| e.to_string())?;
    let cost = cost_pair(&pair.c, &pair.v, &params, &spec)
        .map_err(|e| e.to_string())?
        .j;
    let bang = make_bang_single(&spec, &SwitchPattern::default()).map_err(|e| e.to_string())?;
    let cost_bang = cost_single(&bang, &params, &spec)
        .map_err(|e| e.to_string())?
        .j;
    let steady = PeriodicSignal::steady(period, c_mean).map_err(|e| e.to_string())?;
    let cost_steady = cost_single(&steady, &params, &spec)
        .map_err(|e| e.to_string())?
        .j;
    Ok(PairView {
        kappa: pair.kappa,
        case: pair.case,
        a_plus: pair.measures.a_plus,
        a_minus: pair.measures.a_minus,
        b_plus: pair.measures.b_plus,
        b_minus: pair.measures.b_minus,
        c_steps: steps_of(&pair.c),
        v_steps: steps_of(&pair.v),
        cost_pair: cost,
        cost_bang,
        cost_steady,
        feed_residual: residual.feed_residual,
        residence_residual: residual.residence_residual,
    })
}

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(message) => error_json(&message),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

#[wasm_bindgen(js_name = amplitudeCurves)]
pub fn amplitude_curves_js(points: usize, betas: Vec<f64>) -> String {
    to_json(Ok(amplitude_curves(points, &betas)))
}

#[wasm_bindgen(js_name = outletTraces)]
pub fn outlet_traces_js(order: f64, rate_constant: f64, samples: usize) -> String {
    to_json(outlet_traces(order, rate_constant, samples))
}

#[wasm_bindgen(js_name = pairExplorer)]
pub fn pair_explorer_js(c_mean: f64, c_min: f64, c_max: f64, v_min: f64, v_max: f64) -> String {
    to_json(pair_explorer(c_mean, c_min, c_max, v_min, v_max))
}
