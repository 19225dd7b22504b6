//! Mean outlet molar flux `J = (1/τ)∫₀^τ C(L, t) v(t) dt` (lower is better).
//!
//! Three routes are available and are expected to agree:
//!
//! - analytic: by periodicity `J` reduces to `(v/τ)∫ Φ(c)` (single input) or
//!   `(1/τ)∫ Ψ(c) v` (two inputs, residence time τ), summed exactly over the
//!   pieces of a step control;
//! - reduced quadrature: the same reduced integrals by adaptive quadrature;
//! - outlet quadrature: quadrature of the characteristic solution at `x = L`.

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConcentrationField, ModelError, ReactorParams};
use crate::quadrature::{integrate_split, QuadOptions};
use crate::signal::{merged_steps, weighted_mean, PeriodicSignal, SignalError};
use crate::strategy::{
    check_admissible_pair, check_admissible_single, IsoperimetricSpec, PairResidual,
    SingleResidual, StrategyError, ADMISSIBILITY_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("integrand argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Which reduced integrand: `Φ` uses the residence time `L/v`, `Ψ` uses `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandForm {
    Phi,
    Psi,
}

/// `ξ ↦ [ξ^{-(n-1)} + k(n-1)s]^{-1/(n-1)}` (`ξ e^{-ks}` for `n = 1`) for a
/// fixed residence time `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedIntegrand {
    pub params: ReactorParams,
    pub residence: f64,
    pub form: IntegrandForm,
}

impl ReducedIntegrand {
    pub fn phi(params: &ReactorParams) -> Self {
        Self {
            params: *params,
            residence: params.length / params.flow_rate,
            form: IntegrandForm::Phi,
        }
    }

    pub fn psi(params: &ReactorParams, period: f64) -> Self {
        Self {
            params: *params,
            residence: period,
            form: IntegrandForm::Psi,
        }
    }

    fn check(xi: f64) -> Result<(), CostError> {
        if xi > 0.0 && xi.is_finite() {
            Ok(())
        } else {
            Err(CostError::NonPositiveArgument(xi))
        }
    }

    // k(n-1)s
    fn stiffness(&self) -> f64 {
        self.params.rate_constant * (self.params.order - 1.0) * self.residence
    }

    pub fn value(&self, xi: f64) -> Result<f64, CostError> {
        Self::check(xi)?;
        Ok(self.params.decay(xi, self.residence)?)
    }

    /// `[1 + k(n-1)s ξ^{n-1}]^{-n/(n-1)}`.
    pub fn derivative(&self, xi: f64) -> Result<f64, CostError> {
        Self::check(xi)?;
        let n = self.params.order;
        if n == 1.0 {
            return Ok((-self.params.rate_constant * self.residence).exp());
        }
        let g = 1.0 + self.stiffness() * xi.powf(n - 1.0);
        if !(g > 0.0) {
            return Err(ModelError::Extinction {
                inlet: xi,
                residence: self.residence,
            }
            .into());
        }
        Ok(g.powf(-n / (n - 1.0)))
    }

    /// `-n k(n-1)s [1 + k(n-1)s ξ^{n-1}]^{-(2n-1)/(n-1)} ξ^{n-2}`.
    pub fn second_derivative(&self, xi: f64) -> Result<f64, CostError> {
        Self::check(xi)?;
        let n = self.params.order;
        if n == 1.0 {
            return Ok(0.0);
        }
        let a = self.stiffness();
        let g = 1.0 + a * xi.powf(n - 1.0);
        if !(g > 0.0) {
            return Err(ModelError::Extinction {
                inlet: xi,
                residence: self.residence,
            }
            .into());
        }
        Ok(-n * a * g.powf(-(2.0 * n - 1.0) / (n - 1.0)) * xi.powf(n - 2.0))
    }
}

pub fn phi(params: &ReactorParams, xi: f64) -> Result<f64, CostError> {
    ReducedIntegrand::phi(params).value(xi)
}

pub fn phi_prime(params: &ReactorParams, xi: f64) -> Result<f64, CostError> {
    ReducedIntegrand::phi(params).derivative(xi)
}

pub fn phi_second(params: &ReactorParams, xi: f64) -> Result<f64, CostError> {
    ReducedIntegrand::phi(params).second_derivative(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRoute {
    Analytic,
    ReducedQuadrature,
    OutletQuadrature,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum Residuals {
    None,
    Single(SingleResidual),
    Pair(PairResidual),
}

impl Residuals {
    /// `None` carries no constraint information and counts as admissible.
    pub fn is_admissible(&self) -> bool {
        match self {
            Residuals::None => true,
            Residuals::Single(r) => r.is_admissible(),
            Residuals::Pair(r) => r.is_admissible(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub label: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// Mean outlet molar flux, mol s⁻¹ m⁻².
    pub j: f64,
    pub route: CostRoute,
    pub residuals: Residuals,
    pub improvement_vs: Vec<Improvement>,
}

impl CostReport {
    fn new(j: f64, route: CostRoute, residuals: Residuals) -> Self {
        Self {
            j,
            route,
            residuals,
            improvement_vs: Vec::new(),
        }
    }

    /// Records `100(1 - J/J_other)` against a labelled baseline.
    pub fn compare(&mut self, label: impl Into<String>, other_j: f64) -> f64 {
        let percent = percent_improvement(self.j, other_j);
        self.improvement_vs.push(Improvement {
            label: label.into(),
            percent,
        });
        percent
    }
}

/// `100 (1 - J_a / J_b)`: how much lower `J_a` is than `J_b`, in percent.
pub fn percent_improvement(j_a: f64, j_b: f64) -> f64 {
    100.0 * (1.0 - j_a / j_b)
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_depth: 40,
    }
}

/// Integrates `f(t)` over one period, splitting at `splits`, and propagates
/// the first error raised by the integrand.
fn integrate_fallible<F>(period: f64, splits: &[f64], mut f: F) -> Result<f64, CostError>
where
    F: FnMut(f64) -> Result<f64, CostError>,
{
    let mut failure = None;
    let q = integrate_split(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        period,
        splits,
        quad_opts(),
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// Single-input cost `(v/τ)∫₀^τ Φ(c(t)) dt`; `v e^{-kL/v} mean(c)` for `n = 1`.
///
/// Step controls are summed exactly, sinusoids go through adaptive
/// quadrature. Inadmissible controls are evaluated and flagged.
pub fn cost_single(
    c: &PeriodicSignal,
    params: &ReactorParams,
    spec: &IsoperimetricSpec,
) -> Result<CostReport, CostError> {
    params.validate()?;
    let residuals = Residuals::Single(check_admissible_single(c, spec));
    let v = params.flow_rate;
    let j = if params.order == 1.0 {
        v * c.mean() * (-params.rate_constant * params.length / v).exp()
    } else {
        let phi = ReducedIntegrand::phi(params);
        let tau = c.period();
        let integral = match c.steps() {
            Some(steps) => {
                let mut acc = 0.0;
                for s in steps {
                    acc += s.len() * phi.value(s.value)?;
                }
                acc
            }
            None => integrate_fallible(tau, &[], |t| phi.value(c.eval(t)))?,
        };
        v * integral / tau
    };
    Ok(CostReport::new(j, CostRoute::Analytic, residuals))
}

/// `(v/τ)∫₀^τ Φ(c(t)) dt` by adaptive quadrature split at the switching times.
pub fn cost_single_quadrature(
    c: &PeriodicSignal,
    params: &ReactorParams,
) -> Result<CostReport, CostError> {
    params.validate()?;
    let phi = ReducedIntegrand::phi(params);
    let tau = c.period();
    let integral = integrate_fallible(tau, &c.breakpoints(), |t| phi.value(c.eval(t)))?;
    Ok(CostReport::new(
        params.flow_rate * integral / tau,
        CostRoute::ReducedQuadrature,
        Residuals::None,
    ))
}

/// Two-input cost. With `∫₀^τ v = L` it reduces to `(1/τ)∫ Ψ(c) v`
/// (`e^{-kτ}(1/τ)∫ c v` for `n = 1`); otherwise the outlet route is used.
pub fn cost_pair(
    c: &PeriodicSignal,
    v: &PeriodicSignal,
    params: &ReactorParams,
    spec: &IsoperimetricSpec,
) -> Result<CostReport, CostError> {
    params.validate()?;
    let residual = check_admissible_pair(c, v, spec, params.length)?;
    let residuals = Residuals::Pair(residual);
    if residual.residence_residual.abs() > ADMISSIBILITY_TOL * params.length.max(1.0) {
        let mut report = cost_outlet(c, Some(v), params)?;
        report.residuals = residuals;
        return Ok(report);
    }
    let tau = c.period();
    let j = if params.order == 1.0 {
        weighted_mean(c, v)? * (-params.rate_constant * tau).exp()
    } else {
        let psi = ReducedIntegrand::psi(params, tau);
        let integral = if c.is_step() && v.is_step() {
            let mut acc = 0.0;
            for (s, e, cv, vv) in merged_steps(c, v)? {
                acc += (e - s) * psi.value(cv)? * vv;
            }
            acc
        } else {
            let mut splits = c.breakpoints();
            splits.extend(v.breakpoints());
            integrate_fallible(tau, &splits, |t| Ok(psi.value(c.eval(t))? * v.eval(t)))?
        };
        integral / tau
    };
    Ok(CostReport::new(j, CostRoute::Analytic, residuals))
}

/// `(1/τ)∫₀^τ Ψ(c) v dt` by adaptive quadrature (valid when `∫₀^τ v = L`).
pub fn cost_pair_quadrature(
    c: &PeriodicSignal,
    v: &PeriodicSignal,
    params: &ReactorParams,
) -> Result<CostReport, CostError> {
    params.validate()?;
    let tau = c.period();
    let psi = ReducedIntegrand::psi(params, tau);
    let mut splits = c.breakpoints();
    splits.extend(v.breakpoints());
    let integral = integrate_fallible(tau, &splits, |t| Ok(psi.value(c.eval(t))? * v.eval(t)))?;
    Ok(CostReport::new(
        integral / tau,
        CostRoute::ReducedQuadrature,
        Residuals::None,
    ))
}

/// `(1/τ)∫₀^τ C(L, t) v(t) dt` straight from the characteristic solution.
pub fn cost_outlet(
    c: &PeriodicSignal,
    v: Option<&PeriodicSignal>,
    params: &ReactorParams,
) -> Result<CostReport, CostError> {
    let field = ConcentrationField::new(*params, c.clone(), v.cloned())?;
    cost_outlet_field(&field)
}

pub fn cost_outlet_field(field: &ConcentrationField) -> Result<CostReport, CostError> {
    let tau = field.inlet().period();
    let splits = field.outlet_breakpoints();
    let integral = integrate_fallible(tau, &splits, |t| Ok(field.outlet(t)? * field.velocity(t)))?;
    Ok(CostReport::new(
        integral / tau,
        CostRoute::OutletQuadrature,
        Residuals::None,
    ))
}

/// Which strategy is optimal given the curvature of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityRegime {
    /// `n = 1`: every admissible control gives the same cost.
    NeutralFirstOrder,
    /// `n < 1` with `C_min` above the convexity threshold: steady feed wins.
    ConvexSteadyOptimal,
    /// `n > 1`: `Φ` concave, bang-bang wins.
    ConcaveBangOptimal,
    /// `n < 1` without the threshold condition.
    Unclassified,
}

pub fn convexity_regime(params: &ReactorParams, spec: &IsoperimetricSpec) -> ConvexityRegime {
    let n = params.order;
    if n == 1.0 {
        ConvexityRegime::NeutralFirstOrder
    } else if n > 1.0 {
        ConvexityRegime::ConcaveBangOptimal
    } else {
        match params.steady_optimality_threshold() {
            Some(threshold) if spec.c_min > threshold => ConvexityRegime::ConvexSteadyOptimal,
            _ => ConvexityRegime::Unclassified,
        }
    }
}
