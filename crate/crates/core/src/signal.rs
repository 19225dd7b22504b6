//! τ-periodic bounded signals.
//!
//! Controls are right-continuous step functions on `[0, τ)` (or, for the
//! reference comparison, a sinusoid) extended periodically to all of ℝ.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate_split, QuadOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("signal values must be positive and finite, got {0}")]
    NonPositive(f64),
    #[error("breakpoints must start at 0, increase strictly and stay below the period")]
    BadBreakpoints,
    #[error("{breakpoints} breakpoints but {values} values")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("periods differ: {0} vs {1}")]
    PeriodMismatch(f64, f64),
    #[error("operation needs a piecewise-constant signal")]
    NotPiecewise,
}

/// How a signal is represented over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`, the last piece
    /// running up to the period.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Steady {
        value: f64,
    },
    /// `mean + amplitude · sin(2πt/τ + phase)`.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        phase: f64,
    },
}

/// One constant piece `[start, end)` of a step signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Step {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal", into = "RawSignal")]
pub struct PeriodicSignal {
    period: f64,
    kind: SignalKind,
}

#[derive(Serialize, Deserialize)]
struct RawSignal {
    period: f64,
    #[serde(flatten)]
    kind: SignalKind,
}

impl TryFrom<RawSignal> for PeriodicSignal {
    type Error = SignalError;

    fn try_from(raw: RawSignal) -> Result<Self, Self::Error> {
        PeriodicSignal::new(raw.period, raw.kind)
    }
}

impl From<PeriodicSignal> for RawSignal {
    fn from(s: PeriodicSignal) -> Self {
        RawSignal {
            period: s.period,
            kind: s.kind,
        }
    }
}

fn check_value(v: f64) -> Result<(), SignalError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SignalError::NonPositive(v))
    }
}

impl PeriodicSignal {
    pub fn new(period: f64, kind: SignalKind) -> Result<Self, SignalError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(SignalError::BadPeriod(period));
        }
        match &kind {
            SignalKind::Steady { value } => check_value(*value)?,
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            } => {
                if !amplitude.is_finite() || !phase.is_finite() {
                    return Err(SignalError::NonPositive(*amplitude));
                }
                check_value(*mean)?;
                check_value(mean - amplitude.abs())?;
            }
            SignalKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.len() != values.len() {
                    return Err(SignalError::LengthMismatch {
                        breakpoints: breakpoints.len(),
                        values: values.len(),
                    });
                }
                if breakpoints.first() != Some(&0.0)
                    || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
                    || breakpoints.last().is_some_and(|&b| !(b < period))
                {
                    return Err(SignalError::BadBreakpoints);
                }
                for &v in values {
                    check_value(v)?;
                }
            }
        }
        Ok(Self { period, kind })
    }

    pub fn steady(period: f64, value: f64) -> Result<Self, SignalError> {
        Self::new(period, SignalKind::Steady { value })
    }

    pub fn sinusoid(
        period: f64,
        mean: f64,
        amplitude: f64,
        phase: f64,
    ) -> Result<Self, SignalError> {
        Self::new(
            period,
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            },
        )
    }

    pub fn piecewise(
        period: f64,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, SignalError> {
        Self::new(
            period,
            SignalKind::PiecewiseConstant {
                breakpoints,
                values,
            },
        )
    }

    /// Build a step signal from consecutive `(duration, value)` pieces that
    /// must add up to `period`. Empty pieces are dropped and equal neighbours
    /// merged; a single remaining value yields a steady signal.
    pub fn from_durations(period: f64, pieces: &[(f64, f64)]) -> Result<Self, SignalError> {
        let mut breakpoints = Vec::with_capacity(pieces.len());
        let mut values: Vec<f64> = Vec::with_capacity(pieces.len());
        let mut t = 0.0;
        for &(len, value) in pieces {
            if !(len >= 0.0) {
                return Err(SignalError::BadBreakpoints);
            }
            if len <= 1e-13 * period {
                continue;
            }
            check_value(value)?;
            if values.last() != Some(&value) {
                breakpoints.push(t);
                values.push(value);
            }
            t += len;
        }
        if (t - period).abs() > 1e-9 * period {
            return Err(SignalError::BadBreakpoints);
        }
        match values.len() {
            0 => Err(SignalError::BadBreakpoints),
            1 => Self::steady(period, values[0]),
            _ => Self::piecewise(period, breakpoints, values),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kind(&self) -> &SignalKind {
        &self.kind
    }

    pub fn is_step(&self) -> bool {
        !matches!(self.kind, SignalKind::Sinusoid { .. })
    }

    /// Map `t` into `[0, τ)`.
    pub fn wrap(&self, t: f64) -> f64 {
        let r = t.rem_euclid(self.period);
        if r >= self.period {
            0.0
        } else {
            r
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            SignalKind::Steady { value } => *value,
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            } => mean + amplitude * (TAU * self.wrap(t) / self.period + phase).sin(),
            SignalKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let r = self.wrap(t);
                let idx = breakpoints.partition_point(|&b| b <= r);
                values[idx.saturating_sub(1)]
            }
        }
    }

    /// `(lo, hi)` such that every value lies in `[lo, hi]`.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            SignalKind::Steady { value } => (*value, *value),
            SignalKind::Sinusoid {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
            SignalKind::PiecewiseConstant { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    /// Constant pieces over one period, or `None` for a sinusoid.
    pub fn steps(&self) -> Option<Vec<Step>> {
        match &self.kind {
            SignalKind::Steady { value } => Some(vec![Step {
                start: 0.0,
                end: self.period,
                value: *value,
            }]),
            SignalKind::Sinusoid { .. } => None,
            SignalKind::PiecewiseConstant {
                breakpoints,
                values,
            } => Some(
                breakpoints
                    .iter()
                    .zip(values)
                    .enumerate()
                    .map(|(i, (&start, &value))| Step {
                        start,
                        end: breakpoints.get(i + 1).copied().unwrap_or(self.period),
                        value,
                    })
                    .collect(),
            ),
        }
    }

    /// Switching times in `[0, τ)` (empty for smooth signals).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            SignalKind::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// `∫₀^τ signal(t) dt`, exact for every kind.
    pub fn integral(&self) -> f64 {
        match &self.kind {
            SignalKind::Steady { value } => value * self.period,
            SignalKind::Sinusoid { mean, .. } => mean * self.period,
            SignalKind::PiecewiseConstant { .. } => self
                .steps()
                .unwrap()
                .iter()
                .map(|s| s.len() * s.value)
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.period
    }

    /// Delayed copy: `shifted(d).eval(t) == self.eval(t - d)`.
    pub fn shifted(&self, delay: f64) -> Self {
        let d = self.wrap(delay);
        let kind = match &self.kind {
            SignalKind::Steady { .. } => self.kind.clone(),
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            } => SignalKind::Sinusoid {
                mean: *mean,
                amplitude: *amplitude,
                phase: phase - TAU * d / self.period,
            },
            SignalKind::PiecewiseConstant { .. } => {
                let steps = self.steps().unwrap();
                let mut moved: Vec<(f64, f64)> = steps
                    .iter()
                    .map(|s| (self.wrap(s.start + d), s.value))
                    .collect();
                moved.sort_by(|a, b| a.0.total_cmp(&b.0));
                if moved[0].0 > 0.0 {
                    // the piece straddling τ also covers [0, first)
                    let tail = self.eval(-d);
                    moved.insert(0, (0.0, tail));
                }
                moved.dedup_by(|b, a| b.1 == a.1);
                SignalKind::PiecewiseConstant {
                    breakpoints: moved.iter().map(|m| m.0).collect(),
                    values: moved.iter().map(|m| m.1).collect(),
                }
            }
        };
        Self {
            period: self.period,
            kind,
        }
    }

    /// Apply `f` to every piece value of a step signal.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self, SignalError> {
        match &self.kind {
            SignalKind::Steady { value } => Self::steady(self.period, f(*value)),
            SignalKind::PiecewiseConstant {
                breakpoints,
                values,
            } => Self::piecewise(
                self.period,
                breakpoints.clone(),
                values.iter().map(|&v| f(v)).collect(),
            ),
            SignalKind::Sinusoid { .. } => Err(SignalError::NotPiecewise),
        }
    }

    /// Lebesgue measures of `{t ∈ [0,τ) : s(t) ≥ threshold}` and its complement.
    pub fn measure_level_sets(&self, threshold: f64) -> (f64, f64) {
        let above = match &self.kind {
            SignalKind::Sinusoid {
                mean, amplitude, ..
            } if *amplitude != 0.0 => {
                let s = (threshold - mean) / amplitude.abs();
                if s <= -1.0 {
                    self.period
                } else if s >= 1.0 {
                    0.0
                } else {
                    (PI - 2.0 * s.asin()) / TAU * self.period
                }
            }
            SignalKind::Sinusoid { mean, .. } => {
                if *mean >= threshold {
                    self.period
                } else {
                    0.0
                }
            }
            _ => self
                .steps()
                .unwrap()
                .iter()
                .filter(|s| s.value >= threshold)
                .map(Step::len)
                .sum(),
        };
        (above, self.period - above)
    }

    /// `{t : s(t) ≥ threshold}` (or `>` when `strict`) as intervals in `[0, τ)`.
    pub fn superlevel_set(&self, threshold: f64, strict: bool) -> IntervalSet {
        let hit = |v: f64| {
            if strict {
                v > threshold
            } else {
                v >= threshold
            }
        };
        match &self.kind {
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            } if *amplitude != 0.0 => {
                let s = (threshold - mean) / amplitude.abs();
                if s < -1.0 || (s == -1.0 && !strict) {
                    return IntervalSet::full(self.period);
                }
                if s >= 1.0 {
                    return IntervalSet::empty(self.period);
                }
                let omega = TAU / self.period;
                let phi = if *amplitude > 0.0 { *phase } else { phase + PI };
                let start = ((s.asin() - phi) / omega).rem_euclid(self.period);
                let len = (PI - 2.0 * s.asin()) / omega;
                IntervalSet::from_periodic_arc(self.period, start, len)
            }
            SignalKind::Sinusoid { mean, .. } => {
                if hit(*mean) {
                    IntervalSet::full(self.period)
                } else {
                    IntervalSet::empty(self.period)
                }
            }
            _ => IntervalSet::new(
                self.period,
                self.steps()
                    .unwrap()
                    .iter()
                    .filter(|s| hit(s.value))
                    .map(|s| (s.start, s.end))
                    .collect(),
            ),
        }
    }
}

fn check_periods(a: &PeriodicSignal, b: &PeriodicSignal) -> Result<(), SignalError> {
    if (a.period - b.period).abs() > 1e-12 * a.period {
        Err(SignalError::PeriodMismatch(a.period, b.period))
    } else {
        Ok(())
    }
}

/// Common refinement of two step signals: `(start, end, a, b)` pieces.
pub fn merged_steps(
    a: &PeriodicSignal,
    b: &PeriodicSignal,
) -> Result<Vec<(f64, f64, f64, f64)>, SignalError> {
    check_periods(a, b)?;
    let (sa, sb) = match (a.steps(), b.steps()) {
        (Some(sa), Some(sb)) => (sa, sb),
        _ => return Err(SignalError::NotPiecewise),
    };
    let mut out = Vec::with_capacity(sa.len() + sb.len());
    let (mut i, mut j) = (0, 0);
    let mut t = 0.0;
    while i < sa.len() && j < sb.len() {
        let end = sa[i].end.min(sb[j].end);
        if end > t {
            out.push((t, end, sa[i].value, sb[j].value));
        }
        t = end;
        if sa[i].end <= end {
            i += 1;
        }
        if sb[j].end <= end {
            j += 1;
        }
    }
    Ok(out)
}

/// `(1/τ)∫₀^τ c(t) v(t) dt`: exact for step pairs, adaptive quadrature otherwise.
pub fn weighted_mean(c: &PeriodicSignal, v: &PeriodicSignal) -> Result<f64, SignalError> {
    check_periods(c, v)?;
    if c.is_step() && v.is_step() {
        let sum: f64 = merged_steps(c, v)?
            .iter()
            .map(|&(s, e, x, y)| (e - s) * x * y)
            .sum();
        return Ok(sum / c.period);
    }
    let mut splits = c.breakpoints();
    splits.extend(v.breakpoints());
    let q = integrate_split(
        |t| c.eval(t) * v.eval(t),
        0.0,
        c.period,
        &splits,
        QuadOptions::default(),
    );
    Ok(q.value / c.period)
}

/// Finite union of disjoint half-open intervals inside `[0, τ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    period: f64,
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Normalizes: clips to `[0, τ)`, sorts, merges touching intervals.
    pub fn new(period: f64, mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(a, b)| b > a);
        for iv in raw.iter_mut() {
            iv.0 = iv.0.max(0.0);
            iv.1 = iv.1.min(period);
        }
        raw.retain(|&(a, b)| b > a);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Self { period, intervals }
    }

    pub fn empty(period: f64) -> Self {
        Self {
            period,
            intervals: Vec::new(),
        }
    }

    pub fn full(period: f64) -> Self {
        Self {
            period,
            intervals: vec![(0.0, period)],
        }
    }

    /// An arc of length `len` starting at `start`, wrapped around `τ`.
    pub fn from_periodic_arc(period: f64, start: f64, len: f64) -> Self {
        if len >= period {
            return Self::full(period);
        }
        let end = start + len;
        if end <= period {
            Self::new(period, vec![(start, end)])
        } else {
            Self::new(period, vec![(0.0, end - period), (start, period)])
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t < b)
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut t = 0.0;
        for &(a, b) in &self.intervals {
            if a > t {
                out.push((t, a));
            }
            t = b;
        }
        if t < self.period {
            out.push((t, self.period));
        }
        Self {
            period: self.period,
            intervals: out,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        Self::new(self.period, raw)
    }

    pub fn intersection_measure(&self, other: &Self) -> f64 {
        let mut total = 0.0;
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    total += hi - lo;
                }
            }
        }
        total
    }
}

/// `V(t) = ∫₀ᵗ v(ξ) dξ` for a positive periodic flow, with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeFlow {
    base: PeriodicSignal,
    knots: Vec<f64>,
    levels: Vec<f64>,
    per_period: f64,
}

impl CumulativeFlow {
    pub fn new(flow: &PeriodicSignal) -> Result<Self, SignalError> {
        let (lo, _) = flow.bounds();
        if !(lo > 0.0) {
            return Err(SignalError::NonPositive(lo));
        }
        let (knots, levels) = match flow.steps() {
            Some(steps) => {
                let mut knots = Vec::with_capacity(steps.len() + 1);
                let mut levels = Vec::with_capacity(steps.len() + 1);
                let mut acc = 0.0;
                for s in &steps {
                    knots.push(s.start);
                    levels.push(acc);
                    acc += s.len() * s.value;
                }
                knots.push(flow.period());
                levels.push(acc);
                (knots, levels)
            }
            None => (vec![0.0, flow.period()], vec![0.0, flow.integral()]),
        };
        let per_period = *levels.last().unwrap();
        Ok(Self {
            base: flow.clone(),
            knots,
            levels,
            per_period,
        })
    }

    pub fn flow(&self) -> &PeriodicSignal {
        &self.base
    }

    /// `V(τ)`, the volume (per unit area) fed during one period.
    pub fn per_period(&self) -> f64 {
        self.per_period
    }

    fn local_value(&self, r: f64) -> f64 {
        match self.base.kind() {
            SignalKind::Sinusoid {
                mean,
                amplitude,
                phase,
            } => {
                let omega = TAU / self.base.period();
                mean * r - amplitude / omega * ((omega * r + phase).cos() - phase.cos())
            }
            _ => {
                let i = self
                    .knots
                    .partition_point(|&k| k <= r)
                    .saturating_sub(1)
                    .min(self.knots.len() - 2);
                self.levels[i] + (r - self.knots[i]) * self.base.eval(self.knots[i])
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let tau = self.base.period();
        let m = (t / tau).floor();
        let r = (t - m * tau).clamp(0.0, tau);
        m * self.per_period + self.local_value(r)
    }

    /// `V⁻¹(y)`: exact per affine piece for step flows, bisection otherwise.
    pub fn inverse(&self, y: f64) -> f64 {
        let tau = self.base.period();
        let m = (y / self.per_period).floor();
        let rem = (y - m * self.per_period).clamp(0.0, self.per_period);
        let local = match self.base.kind() {
            SignalKind::Sinusoid { .. } => {
                let (mut lo, mut hi) = (0.0, tau);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.local_value(mid) < rem {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * tau.max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
            _ => {
                let i = self
                    .levels
                    .partition_point(|&l| l <= rem)
                    .saturating_sub(1)
                    .min(self.knots.len() - 2);
                self.knots[i] + (rem - self.levels[i]) / self.base.eval(self.knots[i])
            }
        };
        m * tau + local
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bang() -> PeriodicSignal {
        PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![1.5, 0.5]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PeriodicSignal::steady(100.0, 1.0).unwrap().eval(123.4), 1.0);
        let s = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
        assert!((s.eval(25.0) - 1.5).abs() < 1e-15);
        assert_eq!(bang().eval(150.0), 0.5);
        assert_eq!(bang().eval(-0.0), 1.5);
        assert_eq!(bang().eval(-1.0), 0.5);
        assert_eq!(bang().eval(50.0), 0.5);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(PeriodicSignal::piecewise(100.0, vec![1.0, 50.0], vec![1.0, 2.0]).is_err());
        assert!(
            PeriodicSignal::piecewise(100.0, vec![0.0, 50.0, 50.0], vec![1.0, 2.0, 3.0]).is_err()
        );
        assert!(PeriodicSignal::piecewise(100.0, vec![0.0, 100.0], vec![1.0, 2.0]).is_err());
        assert!(PeriodicSignal::piecewise(100.0, vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(PeriodicSignal::steady(0.0, 1.0).is_err());
        assert!(PeriodicSignal::steady(1.0, -1.0).is_err());
        assert!(PeriodicSignal::sinusoid(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn from_durations_normalizes() {
        let s =
            PeriodicSignal::from_durations(10.0, &[(0.0, 3.0), (4.0, 1.0), (6.0, 1.0)]).unwrap();
        assert_eq!(s.kind(), &SignalKind::Steady { value: 1.0 });
        let s = PeriodicSignal::from_durations(10.0, &[(4.0, 1.0), (6.0, 2.0)]).unwrap();
        assert_eq!(s.breakpoints(), vec![0.0, 4.0]);
        assert!(PeriodicSignal::from_durations(10.0, &[(4.0, 1.0)]).is_err());
    }

    #[test]
    fn means() {
        assert!((bang().mean() - 1.0).abs() < 1e-15);
        let s = PeriodicSignal::sinusoid(100.0, 0.7, 0.3, 1.1).unwrap();
        assert_eq!(s.mean(), 0.7);
    }

    #[test]
    fn weighted_mean_examples() {
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let v = PeriodicSignal::steady(100.0, 0.01).unwrap();
        assert!((weighted_mean(&c, &v).unwrap() - 0.01).abs() < 1e-17);
        let v = PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![0.005, 0.015]).unwrap();
        assert!((weighted_mean(&bang(), &v).unwrap() - 0.0075).abs() < 1e-15);
        let other = PeriodicSignal::steady(50.0, 1.0).unwrap();
        assert!(matches!(
            weighted_mean(&other, &v),
            Err(SignalError::PeriodMismatch(..))
        ));
        // mixed sinusoid/step pair goes through quadrature
        let s = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
        let expected =
            (0.005 * (50.0 + 0.5 * 100.0 / PI) + 0.015 * (50.0 - 0.5 * 100.0 / PI)) / 100.0;
        assert!((weighted_mean(&s, &v).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn cumulative_examples() {
        let v = PeriodicSignal::steady(100.0, 0.01).unwrap();
        let cf = CumulativeFlow::new(&v).unwrap();
        assert!((cf.value(37.0) - 0.37).abs() < 1e-15);
        assert!((cf.inverse(0.37) - 37.0).abs() < 1e-12);
        let v = PeriodicSignal::piecewise(100.0, vec![0.0, 50.0], vec![0.005, 0.015]).unwrap();
        let cf = CumulativeFlow::new(&v).unwrap();
        assert!((cf.per_period() - 1.0).abs() < 1e-15);
        assert!((cf.value(-25.0) - (-0.375)).abs() < 1e-15);
        assert!((cf.inverse(cf.value(-25.0)) + 25.0).abs() < 1e-12);
    }

    #[test]
    fn sinusoid_cumulative_inverse() {
        let v = PeriodicSignal::sinusoid(100.0, 0.01, 0.004, 0.3).unwrap();
        let cf = CumulativeFlow::new(&v).unwrap();
        assert!((cf.per_period() - 1.0).abs() < 1e-15);
        for &t in &[-130.0, -3.3, 0.0, 12.5, 99.99, 250.0] {
            assert!((cf.inverse(cf.value(t)) - t).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn level_sets() {
        assert_eq!(bang().measure_level_sets(1.0), (50.0, 50.0));
        let s = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.0).unwrap();
        let (a, b) = s.measure_level_sets(1.0);
        assert!((a - 50.0).abs() < 1e-12 && (b - 50.0).abs() < 1e-12);
        let set = s.superlevel_set(1.0, false);
        assert_eq!(set.intervals().len(), 1);
        assert!(set.intervals()[0].0.abs() < 1e-12 && (set.intervals()[0].1 - 50.0).abs() < 1e-12);
        // negative amplitude flips the set
        let s = PeriodicSignal::sinusoid(100.0, 1.0, -0.5, 0.0).unwrap();
        let set = s.superlevel_set(1.25, false);
        let expected = s.measure_level_sets(1.25).0;
        assert!((set.measure() - expected).abs() < 1e-12);
        assert!(set.contains(75.0) && !set.contains(25.0));
    }

    #[test]
    fn shift_delays() {
        let s =
            PeriodicSignal::piecewise(100.0, vec![0.0, 20.0, 70.0], vec![1.0, 2.0, 3.0]).unwrap();
        let d = s.shifted(45.0);
        for i in 0..400 {
            let t = -100.0 + 0.731 * i as f64;
            assert_eq!(d.eval(t), s.eval(t - 45.0), "t={t}");
        }
        let z = PeriodicSignal::sinusoid(100.0, 1.0, 0.5, 0.2).unwrap();
        let dz = z.shifted(13.0);
        assert!((dz.eval(40.0) - z.eval(27.0)).abs() < 1e-14);
    }

    #[test]
    fn interval_set_ops() {
        let a = IntervalSet::new(10.0, vec![(5.0, 7.0), (0.0, 2.0), (1.0, 3.0), (7.0, 8.0)]);
        assert_eq!(a.intervals(), &[(0.0, 3.0), (5.0, 8.0)]);
        assert_eq!(a.complement().intervals(), &[(3.0, 5.0), (8.0, 10.0)]);
        let b = IntervalSet::from_periodic_arc(10.0, 7.0, 5.0);
        assert_eq!(b.intervals(), &[(0.0, 2.0), (7.0, 10.0)]);
        assert_eq!(a.intersection_measure(&b), 3.0);
        assert_eq!(a.union(&b).measure(), 8.0);
    }
}
