//! Periodic optimal control of an isothermal plug flow reactor.
//!
//! The reactor obeys `∂C/∂t + v ∂C/∂x = -k Cⁿ` on `[0, L]` with the inlet
//! concentration (and optionally the flow-rate) as τ-periodic boundary
//! controls. The crate provides:
//!
//! - [`signal`]: τ-periodic piecewise-constant and sinusoidal signals,
//!   cumulative flow and its inverse, level-set measures.
//! - [`model`]: exact method-of-characteristics evaluation of `C(x, t)`.
//! - [`strategy`]: admissibility checks, constructive bang-bang strategies,
//!   the κ case split, threshold classes and constraint projection.
//! - [`cost`]: the outlet-flux cost along analytic and quadrature routes.
//! - [`pdecheck`]: an explicit upwind solver and the weak-form residual.
//! - [`experiments`]: the reference case study, amplitude sweeps and
//!   randomized optimality trials.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod experiments;
pub mod model;
pub mod pdecheck;
pub mod quadrature;
pub mod signal;
pub mod strategy;

pub use cost::{ConvexityRegime, CostReport, CostRoute, ReducedIntegrand};
pub use model::{ConcentrationField, ModelError, ReactorParams};
pub use signal::{CumulativeFlow, IntervalSet, PeriodicSignal, SignalError, SignalKind};
pub use strategy::{IsoperimetricSpec, StrategyCase, StrategyError, StrategyPair};
