//! Admissible control classes and constructive bang-bang strategies.
//!
//! Single input: the inlet concentration is τ-periodic in `[C_min, C_max]`
//! with mean `C̄`. Two inputs: the flow-rate is also controlled, the feed
//! `(1/τ)∫ c v` is fixed to `C̄ v̄` and `∫₀^τ v = L` pins the residence time
//! to one period.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{
    merged_steps, weighted_mean, IntervalSet, PeriodicSignal, SignalError, SignalKind,
};

/// Residual magnitude below which an isoperimetric constraint counts as met.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("invalid constraint {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("constraints cannot be met: {0}")]
    Infeasible(String),
    #[error("switching pattern does not match the required measures: {0}")]
    InvalidPattern(String),
    #[error("control is not admissible (mean residual {0:e})")]
    NotAdmissible(f64),
    #[error("flow-rate bounds are required for the two-input problem")]
    MissingFlow,
    #[error(transparent)]
    Signal(#[from] SignalError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> StrategyError {
    StrategyError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Flow-rate part of the isoperimetric data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConstraint {
    pub v_mean: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricSpec {
    pub period: f64,
    pub c_mean: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub flow: Option<FlowConstraint>,
}

impl IsoperimetricSpec {
    pub fn single(period: f64, c_mean: f64, c_min: f64, c_max: f64) -> Result<Self, StrategyError> {
        let spec = Self {
            period,
            c_mean,
            c_min,
            c_max,
            flow: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_flow(mut self, v_mean: f64, v_min: f64, v_max: f64) -> Result<Self, StrategyError> {
        self.flow = Some(FlowConstraint {
            v_mean,
            v_min,
            v_max,
        });
        self.validate()?;
        Ok(self)
    }

    /// τ = 100 s, C̄ = 1, C ∈ [0.5, 1.5] mol/m³, v̄ = 0.01, v ∈ [0.005, 0.015] m/s.
    pub fn reference() -> Self {
        Self {
            period: 100.0,
            c_mean: 1.0,
            c_min: 0.5,
            c_max: 1.5,
            flow: Some(FlowConstraint {
                v_mean: 0.01,
                v_min: 0.005,
                v_max: 0.015,
            }),
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid("period", "must be positive"));
        }
        if !(self.c_min > 0.0 && self.c_min < self.c_max && self.c_max.is_finite()) {
            return Err(invalid("c_min", "need 0 < c_min < c_max"));
        }
        if !(self.c_min..=self.c_max).contains(&self.c_mean) {
            return Err(invalid("c_mean", "must lie in [c_min, c_max]"));
        }
        if let Some(f) = &self.flow {
            if !(f.v_min > 0.0 && f.v_min < f.v_max && f.v_max.is_finite()) {
                return Err(invalid("v_min", "need 0 < v_min < v_max"));
            }
            if !(f.v_min..=f.v_max).contains(&f.v_mean) {
                return Err(invalid("v_mean", "must lie in [v_min, v_max]"));
            }
        }
        Ok(())
    }

    pub fn flow(&self) -> Result<&FlowConstraint, StrategyError> {
        self.flow.as_ref().ok_or(StrategyError::MissingFlow)
    }

    /// Fixed mean feed `C̄ v̄`.
    pub fn feed(&self) -> Result<f64, StrategyError> {
        Ok(self.c_mean * self.flow()?.v_mean)
    }

    /// Checks that a two-input pair can satisfy both constraints for a tube
    /// of length `length`: `v_min τ ≤ L ≤ v_max τ` and
    /// `C_min ≤ C̄ v̄ τ / L ≤ C_max`.
    pub fn validate_pair(&self, length: f64) -> Result<(), StrategyError> {
        self.validate()?;
        let f = self.flow()?;
        let tol = 1e-12;
        if length < f.v_min * self.period * (1.0 - tol)
            || length > f.v_max * self.period * (1.0 + tol)
        {
            return Err(StrategyError::Infeasible(format!(
                "length {length} outside [v_min τ, v_max τ] = [{}, {}]",
                f.v_min * self.period,
                f.v_max * self.period
            )));
        }
        let ratio = self.c_mean * f.v_mean * self.period / length;
        if ratio < self.c_min * (1.0 - tol) || ratio > self.c_max * (1.0 + tol) {
            return Err(StrategyError::Infeasible(format!(
                "C̄v̄τ/L = {ratio} outside [c_min, c_max]"
            )));
        }
        Ok(())
    }

    /// Measure of the low-concentration set of an optimal single-input
    /// bang control: `τ (C_max - C̄) / (C_max - C_min)`.
    pub fn low_measure(&self) -> f64 {
        self.period * (self.c_max - self.c_mean) / (self.c_max - self.c_min)
    }

    /// `τ (C̄ - C_min) / (C_max - C_min)`.
    pub fn high_measure(&self) -> f64 {
        self.period * (self.c_mean - self.c_min) / (self.c_max - self.c_min)
    }
}

fn outside(value: f64, lo: f64, hi: f64) -> (bool, bool) {
    let tol = 1e-12 * hi.abs().max(1.0);
    (value < lo - tol, value > hi + tol)
}

/// Mean-constraint residual and bound flags of a single-input control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleResidual {
    /// `mean(c) - C̄`.
    pub mean_residual: f64,
    pub below_min: bool,
    pub above_max: bool,
}

impl SingleResidual {
    pub fn is_admissible(&self) -> bool {
        self.mean_residual.abs() <= ADMISSIBILITY_TOL && !self.below_min && !self.above_max
    }
}

/// Residuals of the two-input constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairResidual {
    /// `(1/τ)∫ c v - C̄ v̄`.
    pub feed_residual: f64,
    /// `∫₀^τ v - L`.
    pub residence_residual: f64,
    pub c_below_min: bool,
    pub c_above_max: bool,
    pub v_below_min: bool,
    pub v_above_max: bool,
}

impl PairResidual {
    pub fn bounds_ok(&self) -> bool {
        !(self.c_below_min || self.c_above_max || self.v_below_min || self.v_above_max)
    }

    pub fn is_admissible(&self) -> bool {
        self.feed_residual.abs() <= ADMISSIBILITY_TOL
            && self.residence_residual.abs() <= ADMISSIBILITY_TOL
            && self.bounds_ok()
    }
}

pub fn check_admissible_single(c: &PeriodicSignal, spec: &IsoperimetricSpec) -> SingleResidual {
    let (lo, hi) = c.bounds();
    let (below_min, _) = outside(lo, spec.c_min, spec.c_max);
    let (_, above_max) = outside(hi, spec.c_min, spec.c_max);
    SingleResidual {
        mean_residual: c.mean() - spec.c_mean,
        below_min,
        above_max,
    }
}

pub fn check_admissible_pair(
    c: &PeriodicSignal,
    v: &PeriodicSignal,
    spec: &IsoperimetricSpec,
    length: f64,
) -> Result<PairResidual, StrategyError> {
    let f = spec.flow()?;
    let feed = weighted_mean(c, v)?;
    let (clo, chi) = c.bounds();
    let (vlo, vhi) = v.bounds();
    Ok(PairResidual {
        feed_residual: feed - spec.c_mean * f.v_mean,
        residence_residual: v.integral() - length,
        c_below_min: outside(clo, spec.c_min, spec.c_max).0,
        c_above_max: outside(chi, spec.c_min, spec.c_max).1,
        v_below_min: outside(vlo, f.v_min, f.v_max).0,
        v_above_max: outside(vhi, f.v_min, f.v_max).1,
    })
}

/// Layout of the switching sets inside one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SwitchPattern {
    /// The canonical one-switch period (low value first) repeated `m` times
    /// at period `τ/m`.
    Cycles(usize),
    /// Explicit low-value intervals `[start, end)` inside `[0, τ)`.
    LowIntervals(Vec<(f64, f64)>),
}

impl Default for SwitchPattern {
    fn default() -> Self {
        SwitchPattern::Cycles(1)
    }
}

/// Optimal single-input control for `n > 1`: `C_min` on a set of measure
/// `τ (C_max - C̄)/(C_max - C_min)`, `C_max` elsewhere.
pub fn make_bang_single(
    spec: &IsoperimetricSpec,
    pattern: &SwitchPattern,
) -> Result<PeriodicSignal, StrategyError> {
    spec.validate()?;
    let tau = spec.period;
    let low = spec.low_measure();
    match pattern {
        SwitchPattern::Cycles(m) => {
            if *m == 0 {
                return Err(StrategyError::InvalidPattern("zero cycles".into()));
            }
            let sub = tau / *m as f64;
            let low_part = low / *m as f64;
            let pieces: Vec<(f64, f64)> = (0..*m)
                .flat_map(|_| [(low_part, spec.c_min), (sub - low_part, spec.c_max)])
                .collect();
            Ok(PeriodicSignal::from_durations(tau, &pieces)?)
        }
        SwitchPattern::LowIntervals(intervals) => {
            let mut t = 0.0;
            let mut total = 0.0;
            let mut pieces = Vec::with_capacity(2 * intervals.len() + 1);
            for &(a, b) in intervals {
                if !(a >= t && b >= a && b <= tau) {
                    return Err(StrategyError::InvalidPattern(format!(
                        "interval [{a}, {b}) is unsorted, overlapping or outside [0, {tau})"
                    )));
                }
                pieces.push((a - t, spec.c_max));
                pieces.push((b - a, spec.c_min));
                total += b - a;
                t = b;
            }
            pieces.push((tau - t, spec.c_max));
            if (total - low).abs() > 1e-12 * tau {
                return Err(StrategyError::InvalidPattern(format!(
                    "low-value measure {total} differs from {low}"
                )));
            }
            Ok(PeriodicSignal::from_durations(tau, &pieces)?)
        }
    }
}

/// Which overlap rule of the two-input construction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyCase {
    /// κ ≤ 0: the high-concentration set sits inside the low-flow set.
    #[serde(rename = "i")]
    I,
    /// κ > 0: the low-concentration set sits inside the high-flow set.
    #[serde(rename = "ii")]
    II,
    SingleInput,
}

/// Measures of the switching sets `A±` (concentration) and `B±` (flow).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchMeasures {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPair {
    pub c: PeriodicSignal,
    pub v: PeriodicSignal,
    pub measures: SwitchMeasures,
    pub kappa: f64,
    pub case: StrategyCase,
}

/// Switching sets realized by the signals of a bang pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSets {
    pub a_plus: IntervalSet,
    pub a_minus: IntervalSet,
    pub b_plus: IntervalSet,
    pub b_minus: IntervalSet,
}

impl StrategyPair {
    /// Recovers `A±`, `B±` geometrically from the signals.
    pub fn sets(&self) -> PairSets {
        let (clo, chi) = self.c.bounds();
        let (vlo, vhi) = self.v.bounds();
        let split = |sig: &PeriodicSignal, lo: f64, hi: f64, upper_measure: f64| {
            if lo == hi {
                if upper_measure > 0.0 {
                    IntervalSet::full(sig.period())
                } else {
                    IntervalSet::empty(sig.period())
                }
            } else {
                sig.superlevel_set(0.5 * (lo + hi), true)
            }
        };
        let a_plus = split(&self.c, clo, chi, self.measures.a_plus);
        let b_plus = split(&self.v, vlo, vhi, self.measures.b_plus);
        PairSets {
            a_minus: a_plus.complement(),
            b_minus: b_plus.complement(),
            a_plus,
            b_plus,
        }
    }

    /// Measure of the overlap that must vanish: `A⁺∩B⁺` in case (i),
    /// `A⁻∩B⁻` in case (ii).
    pub fn forbidden_overlap(&self) -> f64 {
        let s = self.sets();
        match self.case {
            StrategyCase::I => s.a_plus.intersection_measure(&s.b_plus),
            StrategyCase::II => s.a_minus.intersection_measure(&s.b_minus),
            StrategyCase::SingleInput => 0.0,
        }
    }
}

/// Sign of κ selects the overlap case of the two-input construction.
pub fn kappa(spec: &IsoperimetricSpec, length: f64) -> Result<f64, StrategyError> {
    let f = spec.flow()?;
    let feed = spec.c_mean * f.v_mean;
    let tau = spec.period;
    Ok(tau * f.v_max * (feed - spec.c_max * f.v_min)
        + tau * f.v_min * (spec.c_min * f.v_max - feed)
        + length * (spec.c_max * f.v_min - spec.c_min * f.v_max))
}

/// Switching-set measures of the optimal two-input pair.
pub fn pair_measures(
    spec: &IsoperimetricSpec,
    length: f64,
) -> Result<(SwitchMeasures, f64, StrategyCase), StrategyError> {
    spec.validate_pair(length)?;
    let f = spec.flow()?;
    let tau = spec.period;
    let feed = spec.c_mean * f.v_mean;
    let dv = f.v_max - f.v_min;
    let dc = spec.c_max - spec.c_min;
    let b_plus = ((length - tau * f.v_min) / dv).clamp(0.0, tau);
    let b_minus = ((tau * f.v_max - length) / dv).clamp(0.0, tau);
    let k = kappa(spec, length)?;
    let (a_plus, a_minus, case) = if k <= 0.0 {
        let a_plus = ((tau * feed - length * spec.c_min) / (f.v_min * dc)).clamp(0.0, tau);
        (a_plus, tau - a_plus, StrategyCase::I)
    } else {
        let a_minus = ((length * spec.c_max - tau * feed) / (f.v_max * dc)).clamp(0.0, tau);
        (tau - a_minus, a_minus, StrategyCase::II)
    };
    Ok((
        SwitchMeasures {
            a_plus,
            a_minus,
            b_plus,
            b_minus,
        },
        k,
        case,
    ))
}

/// Optimal two-input bang-bang pair in its canonical one-switch layout.
pub fn make_bang_pair(
    spec: &IsoperimetricSpec,
    length: f64,
) -> Result<StrategyPair, StrategyError> {
    make_bang_pair_cycles(spec, length, 1)
}

/// Canonical layout repeated `cycles` times per period. Case (ii) puts
/// `B⁺` first with `A⁻` at its start; case (i) puts `B⁻` first with `A⁺`
/// at its start.
pub fn make_bang_pair_cycles(
    spec: &IsoperimetricSpec,
    length: f64,
    cycles: usize,
) -> Result<StrategyPair, StrategyError> {
    if cycles == 0 {
        return Err(StrategyError::InvalidPattern("zero cycles".into()));
    }
    let (measures, kappa, case) = pair_measures(spec, length)?;
    let f = spec.flow()?;
    let m = cycles as f64;
    let tau = spec.period;
    let (v_piece, c_piece) = match case {
        StrategyCase::II => (
            [
                (measures.b_plus / m, f.v_max),
                (measures.b_minus / m, f.v_min),
            ],
            [
                (measures.a_minus / m, spec.c_min),
                (measures.a_plus / m, spec.c_max),
            ],
        ),
        _ => (
            [
                (measures.b_minus / m, f.v_min),
                (measures.b_plus / m, f.v_max),
            ],
            [
                (measures.a_plus / m, spec.c_max),
                (measures.a_minus / m, spec.c_min),
            ],
        ),
    };
    let repeat =
        |piece: [(f64, f64); 2]| -> Vec<(f64, f64)> { (0..cycles).flat_map(|_| piece).collect() };
    let v = PeriodicSignal::from_durations(tau, &repeat(v_piece))?;
    let c = PeriodicSignal::from_durations(tau, &repeat(c_piece))?;
    Ok(StrategyPair {
        c,
        v,
        measures,
        kappa,
        case,
    })
}

/// Result of splitting a control at a threshold level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSplit {
    pub threshold: f64,
    pub upper: IntervalSet,
    pub lower: IntervalSet,
}

/// Finds `C̃` and a split `[0,τ) = A⁺ ∪ A⁻` with `c ≥ C̃` a.e. on `A⁺`,
/// `c ≤ C̃` a.e. on `A⁻` and `μ(A⁺) = ν`.
pub fn classify_class_a(
    c: &PeriodicSignal,
    spec: &IsoperimetricSpec,
    nu: f64,
) -> Result<ThresholdSplit, StrategyError> {
    let residual = check_admissible_single(c, spec);
    if !residual.is_admissible() {
        return Err(StrategyError::NotAdmissible(residual.mean_residual));
    }
    let tau = c.period();
    if !(0.0..=tau).contains(&nu) {
        return Err(invalid("nu", "must lie in [0, τ]"));
    }
    if let SignalKind::Sinusoid {
        mean, amplitude, ..
    } = c.kind()
    {
        let threshold = mean + amplitude.abs() * (std::f64::consts::PI * nu / tau).cos();
        let upper = if *amplitude == 0.0 {
            IntervalSet::new(tau, vec![(0.0, nu)])
        } else {
            c.superlevel_set(threshold, false)
        };
        return Ok(ThresholdSplit {
            threshold,
            lower: upper.complement(),
            upper,
        });
    }
    let steps = c.steps().expect("step signal");
    let mut levels: Vec<f64> = steps.iter().map(|s| s.value).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let tol = 1e-12 * tau;
    if nu <= tol {
        let upper = IntervalSet::empty(tau);
        return Ok(ThresholdSplit {
            threshold: levels[0],
            lower: upper.complement(),
            upper,
        });
    }
    let mut above = 0.0;
    for (j, &level) in levels.iter().enumerate() {
        let at_level: f64 = steps
            .iter()
            .filter(|s| s.value == level)
            .map(|s| s.len())
            .sum();
        let through = above + at_level;
        if (nu - through).abs() <= tol {
            let threshold = levels
                .get(j + 1)
                .map_or(level, |&next| 0.5 * (level + next));
            let upper = c.superlevel_set(level, false);
            return Ok(ThresholdSplit {
                threshold,
                lower: upper.complement(),
                upper,
            });
        }
        if nu < through {
            // split the plateau at `level` in time order
            let mut need = nu - above;
            let mut raw: Vec<(f64, f64)> = c.superlevel_set(level, true).intervals().to_vec();
            for s in steps.iter().filter(|s| s.value == level) {
                if need <= 0.0 {
                    break;
                }
                let take = need.min(s.len());
                raw.push((s.start, s.start + take));
                need -= take;
            }
            let upper = IntervalSet::new(tau, raw);
            return Ok(ThresholdSplit {
                threshold: level,
                lower: upper.complement(),
                upper,
            });
        }
        above = through;
    }
    Err(invalid("nu", "exceeds the period"))
}

/// Shift-and-clip a step signal so that its (optionally `weight`-weighted)
/// mean hits `target`, keeping values in `[lo, hi]`.
pub fn shift_clip_to_mean(
    raw: &PeriodicSignal,
    lo: f64,
    hi: f64,
    target: f64,
    weight: Option<&PeriodicSignal>,
) -> Result<PeriodicSignal, StrategyError> {
    let tau = raw.period();
    let pieces: Vec<(f64, f64, f64)> = match weight {
        Some(w) => merged_steps(raw, w)?
            .into_iter()
            .map(|(s, e, x, y)| (e - s, x, y))
            .collect(),
        None => raw
            .steps()
            .ok_or(SignalError::NotPiecewise)?
            .iter()
            .map(|s| (s.len(), s.value, 1.0))
            .collect(),
    };
    let mean_at = |delta: f64| -> f64 {
        pieces
            .iter()
            .map(|&(len, x, w)| len * w * (x + delta).clamp(lo, hi))
            .sum::<f64>()
            / tau
    };
    let weight_mean: f64 = pieces.iter().map(|&(len, _, w)| len * w).sum::<f64>() / tau;
    let scale = target.abs().max(f64::MIN_POSITIVE);
    if target < lo * weight_mean * (1.0 - 1e-12) || target > hi * weight_mean * (1.0 + 1e-12) {
        return Err(StrategyError::Infeasible(format!(
            "target mean {target} outside achievable [{}, {}]",
            lo * weight_mean,
            hi * weight_mean
        )));
    }
    let (rlo, rhi) = raw.bounds();
    if rlo >= lo && rhi <= hi && (mean_at(0.0) - target).abs() <= 1e-14 * scale {
        return Ok(raw.clone());
    }
    let (mut a, mut b) = (lo - rhi, hi - rlo);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mean_at(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let mut delta = 0.5 * (a + b);
    // affine polish on the free (unclipped) pieces
    let free: f64 = pieces
        .iter()
        .filter(|&&(_, x, _)| x + delta > lo && x + delta < hi)
        .map(|&(len, _, w)| len * w)
        .sum::<f64>()
        / tau;
    if free > 0.0 {
        let polished = delta + (target - mean_at(delta)) / free;
        if (mean_at(polished) - target).abs() <= (mean_at(delta) - target).abs() {
            delta = polished;
        }
    }
    Ok(raw.map_values(|x| (x + delta).clamp(lo, hi))?)
}

/// Project a raw step signal onto the mean constraint (`flow = None`) or the
/// feed constraint `(1/τ)∫ c v = C̄ v̄` for a given flow-rate.
pub fn project_to_constraint(
    raw: &PeriodicSignal,
    spec: &IsoperimetricSpec,
    flow: Option<&PeriodicSignal>,
) -> Result<PeriodicSignal, StrategyError> {
    match flow {
        None => shift_clip_to_mean(raw, spec.c_min, spec.c_max, spec.c_mean, None),
        Some(v) => shift_clip_to_mean(raw, spec.c_min, spec.c_max, spec.feed()?, Some(v)),
    }
}

/// Project a raw flow-rate onto `[v_min, v_max]` with `∫₀^τ v = L`.
pub fn project_flow(
    raw: &PeriodicSignal,
    spec: &IsoperimetricSpec,
    length: f64,
) -> Result<PeriodicSignal, StrategyError> {
    let f = spec.flow()?;
    shift_clip_to_mean(raw, f.v_min, f.v_max, length / spec.period, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> IsoperimetricSpec {
        IsoperimetricSpec::reference()
    }

    #[test]
    fn spec_validation() {
        assert!(IsoperimetricSpec::single(100.0, 2.0, 0.5, 1.5).is_err());
        assert!(IsoperimetricSpec::single(100.0, 1.0, 1.5, 0.5).is_err());
        assert!(IsoperimetricSpec::single(-1.0, 1.0, 0.5, 1.5).is_err());
        let s = IsoperimetricSpec::single(100.0, 1.0, 0.5, 1.5).unwrap();
        assert!(s.with_flow(0.02, 0.005, 0.015).is_err());
        assert!(matches!(
            s.validate_pair(1.0),
            Err(StrategyError::MissingFlow)
        ));
        assert!(spec().validate_pair(1.0).is_ok());
        assert!(matches!(
            spec().validate_pair(2.0),
            Err(StrategyError::Infeasible(_))
        ));
        // C̄v̄τ/L = 2 > C_max
        assert!(matches!(
            spec().validate_pair(0.5),
            Err(StrategyError::Infeasible(_))
        ));
    }

    #[test]
    fn admissibility_single() {
        let s = spec();
        let steady = PeriodicSignal::steady(100.0, 1.0).unwrap();
        assert_eq!(check_admissible_single(&steady, &s).mean_residual, 0.0);
        let sin = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
        assert!(check_admissible_single(&sin, &s).is_admissible());
        let high = PeriodicSignal::steady(100.0, 1.6).unwrap();
        let r = check_admissible_single(&high, &s);
        assert!(r.above_max && !r.below_min && !r.is_admissible());
    }

    #[test]
    fn admissibility_pair() {
        let s = spec();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let v = PeriodicSignal::steady(100.0, 0.01).unwrap();
        let r = check_admissible_pair(&c, &v, &s, 1.0).unwrap();
        assert_eq!((r.feed_residual, r.residence_residual), (0.0, 0.0));
        let c = PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![1.5, 0.5]).unwrap();
        let v = PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![0.005, 0.015]).unwrap();
        let r = check_admissible_pair(&c, &v, &s, 1.0).unwrap();
        assert!((r.feed_residual + 0.0025).abs() < 1e-15);
        assert!(r.residence_residual.abs() < 1e-15);
        assert!(r.bounds_ok() && !r.is_admissible());
    }

    #[test]
    fn bang_single_canonical() {
        let b = make_bang_single(&spec(), &SwitchPattern::default()).unwrap();
        assert_eq!(b.breakpoints(), vec![0.0, 50.0]);
        assert_eq!(b.eval(10.0), 0.5);
        assert_eq!(b.eval(60.0), 1.5);
        assert_eq!(b.mean(), 1.0);
        let top = IsoperimetricSpec::single(100.0, 1.5, 0.5, 1.5).unwrap();
        let b = make_bang_single(&top, &SwitchPattern::default()).unwrap();
        assert_eq!(b.kind(), &SignalKind::Steady { value: 1.5 });
    }

    #[test]
    fn bang_single_patterns() {
        let s = IsoperimetricSpec::single(100.0, 0.8, 0.5, 1.5).unwrap();
        let b = make_bang_single(&s, &SwitchPattern::Cycles(2)).unwrap();
        assert_eq!(b.breakpoints().len(), 4);
        assert!((b.mean() - 0.8).abs() < 1e-15);
        assert!((b.measure_level_sets(1.0).1 - s.low_measure()).abs() < 1e-12);
        let p = SwitchPattern::LowIntervals(vec![(5.0, 40.0), (60.0, 95.0)]);
        let b = make_bang_single(&s, &p).unwrap();
        assert!((b.mean() - 0.8).abs() < 1e-15);
        let bad = SwitchPattern::LowIntervals(vec![(5.0, 40.0)]);
        assert!(matches!(
            make_bang_single(&s, &bad),
            Err(StrategyError::InvalidPattern(_))
        ));
        let overlapping = SwitchPattern::LowIntervals(vec![(5.0, 50.0), (40.0, 65.0)]);
        assert!(matches!(
            make_bang_single(&s, &overlapping),
            Err(StrategyError::InvalidPattern(_))
        ));
        assert!(make_bang_single(&s, &SwitchPattern::Cycles(0)).is_err());
    }

    #[test]
    fn kappa_reference_and_monotone() {
        let s = spec();
        assert!((kappa(&s, 1.0).unwrap() - 0.0025).abs() < 1e-15);
        let (_, _, case) = pair_measures(&s, 1.0).unwrap();
        assert_eq!(case, StrategyCase::II);
        // dκ/d(C̄v̄) = τ(v_max - v_min) = 1; lowering the feed by 0.003 flips the case
        let mut lower = s;
        lower.c_mean = 0.7;
        assert!((kappa(&lower, 1.0).unwrap() - (0.0025 - 0.003)).abs() < 1e-15);
        assert_eq!(pair_measures(&lower, 1.0).unwrap().2, StrategyCase::I);
    }

    #[test]
    fn kappa_zero_is_case_one() {
        let mut s = spec();
        // κ = 1·C̄v̄ - 0.0075 vanishes at C̄ = 0.75
        s.c_mean = 0.75;
        let k = kappa(&s, 1.0).unwrap();
        assert!(k.abs() < 1e-15);
        let pair = make_bang_pair(&s, 1.0).unwrap();
        if k <= 0.0 {
            assert_eq!(pair.case, StrategyCase::I);
        }
        assert!(pair.forbidden_overlap().abs() < 1e-12);
    }

    #[test]
    fn reference_pair() {
        let s = spec();
        let pair = make_bang_pair(&s, 1.0).unwrap();
        assert_eq!(pair.case, StrategyCase::II);
        assert!((pair.measures.b_plus - 50.0).abs() < 1e-12);
        assert!((pair.measures.b_minus - 50.0).abs() < 1e-12);
        assert!((pair.measures.a_minus - 100.0 / 3.0).abs() < 1e-12);
        assert!((pair.measures.a_plus - 200.0 / 3.0).abs() < 1e-12);
        let r = check_admissible_pair(&pair.c, &pair.v, &s, 1.0).unwrap();
        assert!(r.feed_residual.abs() < 1e-12 && r.residence_residual.abs() < 1e-12);
        assert!((weighted_mean(&pair.c, &pair.v).unwrap() - 0.01).abs() < 1e-12);
        let sets = pair.sets();
        assert!(sets.a_minus.intersection_measure(&sets.b_minus) < 1e-12);
        assert!((sets.a_minus.intersection_measure(&sets.b_plus) - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pair_with_c_at_upper_bound() {
        // C̄ = C_max needs C̄v̄τ = L C_max, i.e. v̄τ = L
        let s = IsoperimetricSpec::single(100.0, 1.5, 0.5, 1.5)
            .unwrap()
            .with_flow(0.01, 0.005, 0.015)
            .unwrap();
        let pair = make_bang_pair(&s, 1.0).unwrap();
        assert_eq!(pair.c.kind(), &SignalKind::Steady { value: 1.5 });
        let r = check_admissible_pair(&pair.c, &pair.v, &s, 1.0).unwrap();
        assert!(r.is_admissible());
    }

    #[test]
    fn classify_sinusoid_and_steady() {
        let s = spec();
        let sin = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
        let split = classify_class_a(&sin, &s, 50.0).unwrap();
        assert!((split.threshold - 1.0).abs() < 1e-15);
        assert_eq!(split.upper.intervals().len(), 1);
        let (a, b) = split.upper.intervals()[0];
        assert!(a.abs() < 1e-12 && (b - 50.0).abs() < 1e-12);
        let steady = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let split = classify_class_a(&steady, &s, s.high_measure()).unwrap();
        assert_eq!(split.threshold, 1.0);
        assert_eq!(split.upper.intervals(), &[(0.0, 50.0)]);
        let bad = PeriodicSignal::steady(100.0, 1.2).unwrap();
        assert!(matches!(
            classify_class_a(&bad, &s, 50.0),
            Err(StrategyError::NotAdmissible(_))
        ));
    }

    #[test]
    fn classify_bang_threshold_is_interior() {
        let s = spec();
        let b = make_bang_single(&s, &SwitchPattern::default()).unwrap();
        let split = classify_class_a(&b, &s, s.high_measure()).unwrap();
        assert!(split.threshold > s.c_min && split.threshold < s.c_max);
        assert_eq!(split.upper.measure(), 50.0);
    }

    #[test]
    fn projection_examples() {
        let s = spec();
        let ok = PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![1.5, 0.5]).unwrap();
        assert_eq!(project_to_constraint(&ok, &s, None).unwrap(), ok);
        let top = PeriodicSignal::piecewise(100.0, vec![0.0, 30.0], vec![1.5, 1.5 - 1e-9]).unwrap();
        let p = project_to_constraint(&top, &s, None).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-12);
        assert!(check_admissible_single(&p, &s).is_admissible());
        let tight = IsoperimetricSpec::single(100.0, 1.0, 0.5, 1.5).unwrap();
        let raw = PeriodicSignal::steady(100.0, 1.5).unwrap();
        let p = project_to_constraint(&raw, &tight, None).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_rejects_infeasible_and_smooth() {
        let s = spec();
        let raw = PeriodicSignal::steady(100.0, 1.0).unwrap();
        assert!(matches!(
            shift_clip_to_mean(&raw, 0.5, 1.5, 2.0, None),
            Err(StrategyError::Infeasible(_))
        ));
        let sin = PeriodicSignal::sinusoid(100.0, 1.0, 0.2, 0.0).unwrap();
        assert!(project_to_constraint(&sin, &s, None).is_err());
    }

    #[test]
    fn weighted_projection() {
        let s = spec();
        let v = PeriodicSignal::piecewise(100.0, vec![0.0, 20.0, 70.0], vec![0.006, 0.014, 0.008])
            .unwrap();
        let v = project_flow(&v, &s, 1.0).unwrap();
        assert!((v.integral() - 1.0).abs() < 1e-12);
        let raw =
            PeriodicSignal::piecewise(100.0, vec![0.0, 10.0, 55.0, 80.0], vec![0.6, 1.4, 0.9, 1.2])
                .unwrap();
        let c = project_to_constraint(&raw, &s, Some(&v)).unwrap();
        let r = check_admissible_pair(&c, &v, &s, 1.0).unwrap();
        assert!(r.is_admissible(), "{r:?}");
    }
}
