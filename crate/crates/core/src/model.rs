//! Exact concentration field by the method of characteristics.
//!
//! Along a characteristic the concentration obeys `dz/ds = -k zⁿ`, so after a
//! residence time `s` an inlet value `c₀` has decayed to
//! `[c₀^{-(n-1)} + k(n-1)s]^{-1/(n-1)}` (or `c₀ e^{-ks}` for `n = 1`). The
//! constant-flow model has `s = x/v`; with a controlled flow-rate the entry
//! time is `r = V⁻¹(V(t) - x)` and `s = t - r`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{CumulativeFlow, PeriodicSignal, SignalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid reactor parameter {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("position {x} outside the reactor [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },
    #[error("concentration {0} must be positive")]
    NonPositiveConcentration(f64),
    #[error("reactant extinct inside the tube (inlet {inlet}, residence {residence} s)")]
    Extinction { inlet: f64, residence: f64 },
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Kinetic and geometric constants of the reactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactorParams {
    /// Reaction order `n`.
    pub order: f64,
    /// Kinetic constant `k`.
    pub rate_constant: f64,
    /// Tube length `L` (m).
    pub length: f64,
    /// Nominal flow-rate `v` (m/s) of the single-input model.
    pub flow_rate: f64,
}

impl ReactorParams {
    pub fn new(
        order: f64,
        rate_constant: f64,
        length: f64,
        flow_rate: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            order,
            rate_constant,
            length,
            flow_rate,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the reference scenario: n = 2, k = 10⁻³, L = 1 m, v = 0.01 m/s.
    pub fn reference() -> Self {
        Self {
            order: 2.0,
            rate_constant: 0.001,
            length: 1.0,
            flow_rate: 0.01,
        }
    }

    /// `k ≥ 0` is accepted so that pure transport can be checked.
    pub fn validate(&self) -> Result<(), ModelError> {
        let checks = [
            ("order", self.order, self.order > 0.0),
            (
                "rate_constant",
                self.rate_constant,
                self.rate_constant >= 0.0,
            ),
            ("length", self.length, self.length > 0.0),
            ("flow_rate", self.flow_rate, self.flow_rate > 0.0),
        ];
        for (name, value, ok) in checks {
            if !(ok && value.is_finite()) {
                return Err(ModelError::BadParameter { name, value });
            }
        }
        Ok(())
    }

    pub fn residence_time(&self) -> f64 {
        self.length / self.flow_rate
    }

    /// Lower bound on `C_min` above which `Φ` is convex when `n < 1`:
    /// `(v / (kL(1-n)))^{-1/(1-n)}`. `None` unless `0 < n < 1` and `k > 0`.
    pub fn steady_optimality_threshold(&self) -> Option<f64> {
        if self.order < 1.0 && self.rate_constant > 0.0 {
            let m = 1.0 - self.order;
            Some((self.flow_rate / (self.rate_constant * self.length * m)).powf(-1.0 / m))
        } else {
            None
        }
    }

    /// Concentration left after a residence time `s` from inlet value `inlet`.
    pub fn decay(&self, inlet: f64, s: f64) -> Result<f64, ModelError> {
        if !(inlet > 0.0) {
            return Err(ModelError::NonPositiveConcentration(inlet));
        }
        let n = self.order;
        let k = self.rate_constant;
        if n == 1.0 {
            return Ok(inlet * (-k * s).exp());
        }
        let base = inlet.powf(1.0 - n) + k * (n - 1.0) * s;
        if !(base > 0.0) {
            return Err(ModelError::Extinction {
                inlet,
                residence: s,
            });
        }
        Ok(base.powf(-1.0 / (n - 1.0)))
    }

    fn check_position(&self, x: f64) -> Result<(), ModelError> {
        if (0.0..=self.length).contains(&x) {
            Ok(())
        } else {
            Err(ModelError::OutOfDomain {
                x,
                length: self.length,
            })
        }
    }
}

/// `C(x, t)` for the constant flow-rate model.
pub fn eval_constant_flow(
    params: &ReactorParams,
    inlet: &PeriodicSignal,
    x: f64,
    t: f64,
) -> Result<f64, ModelError> {
    params.check_position(x)?;
    let s = x / params.flow_rate;
    params.decay(inlet.eval(t - s), s)
}

/// `C(x, t)` for the controlled flow-rate model with a precomputed `V`.
pub fn eval_controlled_flow(
    params: &ReactorParams,
    inlet: &PeriodicSignal,
    cumulative: &CumulativeFlow,
    x: f64,
    t: f64,
) -> Result<f64, ModelError> {
    params.check_position(x)?;
    let r = cumulative.inverse(cumulative.value(t) - x);
    // r ≤ t up to rounding in V⁻¹
    let s = (t - r).max(0.0);
    params.decay(inlet.eval(r), s)
}

/// The concentration field generated by an inlet control and, optionally, a
/// controlled flow-rate (absent means the constant `params.flow_rate`).
#[derive(Debug, Clone)]
pub struct ConcentrationField {
    params: ReactorParams,
    inlet: PeriodicSignal,
    flow: Option<CumulativeFlow>,
}

impl ConcentrationField {
    pub fn new(
        params: ReactorParams,
        inlet: PeriodicSignal,
        flow: Option<PeriodicSignal>,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        let (lo, _) = inlet.bounds();
        if !(lo > 0.0) {
            return Err(ModelError::NonPositiveConcentration(lo));
        }
        let flow = flow.as_ref().map(CumulativeFlow::new).transpose()?;
        Ok(Self {
            params,
            inlet,
            flow,
        })
    }

    pub fn constant(params: ReactorParams, inlet: PeriodicSignal) -> Result<Self, ModelError> {
        Self::new(params, inlet, None)
    }

    pub fn params(&self) -> &ReactorParams {
        &self.params
    }

    pub fn inlet(&self) -> &PeriodicSignal {
        &self.inlet
    }

    pub fn flow(&self) -> Option<&PeriodicSignal> {
        self.flow.as_ref().map(CumulativeFlow::flow)
    }

    pub fn cumulative(&self) -> Option<&CumulativeFlow> {
        self.flow.as_ref()
    }

    /// Flow-rate at time `t`.
    pub fn velocity(&self, t: f64) -> f64 {
        match &self.flow {
            Some(cf) => cf.flow().eval(t),
            None => self.params.flow_rate,
        }
    }

    /// Entry time `r` of the characteristic through `(x, t)`.
    pub fn entry_time(&self, x: f64, t: f64) -> f64 {
        match &self.flow {
            Some(cf) => cf.inverse(cf.value(t) - x),
            None => t - x / self.params.flow_rate,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        match &self.flow {
            Some(cf) => eval_controlled_flow(&self.params, &self.inlet, cf, x, t),
            None => eval_constant_flow(&self.params, &self.inlet, x, t),
        }
    }

    pub fn outlet(&self, t: f64) -> Result<f64, ModelError> {
        self.eval(self.params.length, t)
    }

    /// Times in `[0, τ)` where the outlet trace or the flow-rate may jump or
    /// kink: flow switching times and the exit times of the characteristics
    /// that entered at an inlet or flow switching time.
    pub fn outlet_breakpoints(&self) -> Vec<f64> {
        let tau = self.inlet.period();
        let length = self.params.length;
        let mut pts = Vec::new();
        match &self.flow {
            None => {
                let delay = length / self.params.flow_rate;
                pts.extend(
                    self.inlet
                        .breakpoints()
                        .iter()
                        .map(|b| (b + delay).rem_euclid(tau)),
                );
            }
            Some(cf) => {
                let flow_bps = cf.flow().breakpoints();
                pts.extend(flow_bps.iter().copied());
                for &b in self.inlet.breakpoints().iter().chain(flow_bps.iter()) {
                    pts.push(cf.inverse(cf.value(b) + length).rem_euclid(tau));
                }
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_transport() {
        let p = ReactorParams::new(1.0, 0.0, 1.0, 0.01).unwrap();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        for &(x, t) in &[(0.0, 0.0), (0.5, 13.0), (1.0, -40.0)] {
            assert_eq!(eval_constant_flow(&p, &c, x, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn reference_steady_outlet() {
        let p = ReactorParams::reference();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let out = eval_constant_flow(&p, &c, 1.0, 12.0).unwrap();
        assert!((out - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn extinction_for_fractional_order() {
        // n = 0.5: √c₀ - k s / 2 hits zero at s = 2√c₀/k
        let p = ReactorParams::new(0.5, 1.0, 10.0, 1.0).unwrap();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        assert!(eval_constant_flow(&p, &c, 1.0, 0.0).is_ok());
        assert!(matches!(
            eval_constant_flow(&p, &c, 3.0, 0.0),
            Err(ModelError::Extinction { .. })
        ));
    }

    #[test]
    fn guards() {
        assert!(ReactorParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ReactorParams::new(2.0, 1.0, -1.0, 1.0).is_err());
        let p = ReactorParams::reference();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        assert!(matches!(
            eval_constant_flow(&p, &c, 1.5, 0.0),
            Err(ModelError::OutOfDomain { .. })
        ));
        assert!(matches!(
            p.decay(0.0, 1.0),
            Err(ModelError::NonPositiveConcentration(_))
        ));
    }

    #[test]
    fn threshold_value() {
        let p = ReactorParams::new(0.5, 0.001, 1.0, 0.01).unwrap();
        assert!((p.steady_optimality_threshold().unwrap() - 0.0025).abs() < 1e-15);
        assert!(ReactorParams::reference()
            .steady_optimality_threshold()
            .is_none());
    }

    #[test]
    fn controlled_first_order_outlet_is_delayed_by_period() {
        let p = ReactorParams::new(1.0, 0.001, 1.0, 0.01).unwrap();
        let c =
            PeriodicSignal::piecewise(100.0, vec![0.0, 30.0, 80.0], vec![1.2, 0.6, 1.4]).unwrap();
        let v =
            PeriodicSignal::piecewise(100.0, vec![0.0, 25.0, 60.0], vec![0.012, 0.006, 0.01225])
                .unwrap();
        let field = ConcentrationField::new(p, c.clone(), Some(v)).unwrap();
        for i in 0..50 {
            let t = 3.7 * i as f64 - 20.3;
            let expected = c.eval(t - 100.0) * (-0.1f64).exp();
            assert!((field.outlet(t).unwrap() - expected).abs() < 1e-12, "t={t}");
        }
    }
}
