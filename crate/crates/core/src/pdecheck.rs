//! Independent numerical check of the characteristic solution: an explicit
//! first-order upwind scheme for `∂C/∂t + v(t) ∂C/∂x = -k Cⁿ`, periodic
//! regime detection and the weak-form residual against a test function.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConcentrationField, ModelError, ReactorParams};
use crate::signal::PeriodicSignal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("grid needs at least 16 cells, got {0}")]
    TooFewCells(usize),
    #[error("CFL number {0} exceeds 1")]
    CflViolation(f64),
    #[error("at least one warm-up period is required")]
    NoWarmup,
    #[error("test function support must lie strictly inside the domain")]
    BumpOutsideDomain,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Uniform space-time grid. `dt` divides the period exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps_per_period: usize,
    /// Periods simulated before the sampled one.
    pub warmup_periods: usize,
    /// Record the whole field every this many steps of the sampled period.
    pub snapshot_every: Option<usize>,
}

impl Grid {
    /// Picks the largest `dt ≤ cfl·dx/v_max` that divides `period` into an
    /// integer number of steps and, when possible, puts every switching time
    /// in `switch_times` on a step boundary.
    pub fn new(
        length: f64,
        period: f64,
        cells: usize,
        cfl: f64,
        v_max: f64,
        switch_times: &[f64],
        warmup_periods: usize,
    ) -> Result<Self, PdeError> {
        if cells < 16 {
            return Err(PdeError::TooFewCells(cells));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(PdeError::CflViolation(cfl));
        }
        if warmup_periods == 0 {
            return Err(PdeError::NoWarmup);
        }
        let dx = length / cells as f64;
        let min_steps = (period * v_max / (cfl * dx)).ceil().max(1.0) as usize;
        let aligned = |n: usize| {
            switch_times.iter().all(|&b| {
                let k = b * n as f64 / period;
                (k - k.round()).abs() < 1e-9
            })
        };
        let steps_per_period = (min_steps..min_steps + 100_000)
            .find(|&n| aligned(n))
            .unwrap_or(min_steps);
        Ok(Self {
            cells,
            dx,
            dt: period / steps_per_period as f64,
            steps_per_period,
            warmup_periods,
            snapshot_every: None,
        })
    }

    /// Grid sized for a given reactor and control pair.
    pub fn for_controls(
        params: &ReactorParams,
        c: &PeriodicSignal,
        v: Option<&PeriodicSignal>,
        cells: usize,
        cfl: f64,
        warmup_periods: usize,
    ) -> Result<Self, PdeError> {
        let mut switches = c.breakpoints();
        let v_max = match v {
            Some(v) => {
                switches.extend(v.breakpoints());
                v.bounds().1
            }
            None => params.flow_rate,
        };
        Self::new(
            params.length,
            c.period(),
            cells,
            cfl,
            v_max,
            &switches,
            warmup_periods,
        )
    }

    pub fn cfl(&self, v_max: f64) -> f64 {
        v_max * self.dt / self.dx
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = Some(every.max(1));
        self
    }
}

/// Outlet samples at `t_j = j·dt`, `j = 0..steps_per_period`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutletTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub grid: Grid,
    pub period: f64,
    /// Outlet over the last simulated period.
    pub last: OutletTrace,
    /// Outlet over the period before it.
    pub previous: OutletTrace,
    /// Steps at which a cell went negative and was reset to zero.
    pub clamp_events: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// Mean outlet flux over the last period, `(1/τ)Σ C_j v_j dt`.
    pub outlet_flux: f64,
    /// `(t, field)` samples of the last period when requested.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Runs `warmup_periods + 1` periods of the upwind scheme from a field equal
/// to the inlet value at `t = 0` and returns the last two outlet periods.
pub fn simulate(
    params: &ReactorParams,
    c: &PeriodicSignal,
    v: Option<&PeriodicSignal>,
    grid: &Grid,
) -> Result<Simulation, PdeError> {
    params.validate()?;
    let v_max = v.map_or(params.flow_rate, |v| v.bounds().1);
    let cfl = grid.cfl(v_max);
    if cfl > 1.0 + 1e-12 {
        return Err(PdeError::CflViolation(cfl));
    }
    let velocity = |t: f64| v.map_or(params.flow_rate, |v| v.eval(t));
    let k = params.rate_constant;
    let order = params.order;
    let sink = |u: f64| if order == 2.0 { u * u } else { u.powf(order) };
    let n = grid.steps_per_period;
    let dt = grid.dt;
    let mut u = vec![c.eval(0.0); grid.cells + 1];
    let total = n * (grid.warmup_periods + 1);
    let mut previous = Vec::with_capacity(n);
    let mut last = Vec::with_capacity(n);
    let mut flux = 0.0;
    let mut clamp_events = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut snapshots = Vec::new();
    for step in 0..total {
        let t = step as f64 * dt;
        let mid = t + 0.5 * dt;
        u[0] = c.eval(mid);
        let period_index = step / n;
        if period_index + 1 == grid.warmup_periods {
            previous.push(u[grid.cells]);
        } else if period_index == grid.warmup_periods {
            last.push(u[grid.cells]);
            flux += u[grid.cells] * velocity(mid) * dt;
            if let Some(every) = grid.snapshot_every {
                if (step % n).is_multiple_of(every) {
                    snapshots.push(((step % n) as f64 * dt, u.clone()));
                }
            }
        }
        let courant = velocity(mid) * dt / grid.dx;
        let mut clamped = false;
        for i in (1..=grid.cells).rev() {
            let mut next = u[i] - courant * (u[i] - u[i - 1]) - dt * k * sink(u[i]);
            if next < 0.0 {
                next = 0.0;
                clamped = true;
            }
            u[i] = next;
        }
        if clamped {
            clamp_events += 1;
        }
        for &x in &u {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let times: Vec<f64> = (0..n).map(|j| j as f64 * dt).collect();
    Ok(Simulation {
        grid: *grid,
        period: c.period(),
        last: OutletTrace {
            times: times.clone(),
            values: last,
        },
        previous: OutletTrace {
            times,
            values: previous,
        },
        clamp_events,
        min_value: lo,
        max_value: hi,
        outlet_flux: flux / c.period(),
        snapshots,
    })
}

/// `sup_j |a_j - b_j|` over two aligned period traces.
pub fn periodic_residual(a: &OutletTrace, b: &OutletTrace) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        + if a.values.len() == b.values.len() {
            0.0
        } else {
            f64::INFINITY
        }
}

/// Periodic regime reached when the period-to-period residual is below
/// `10⁻⁶ · C_max`.
pub fn is_periodic(residual: f64, c_max: f64) -> bool {
    residual < 1e-6 * c_max
}

impl Simulation {
    pub fn periodic_residual(&self) -> f64 {
        periodic_residual(&self.last, &self.previous)
    }

    /// `max_j |C_num(L, t_j) - C_exact(L, t_j)|` over the last period.
    pub fn outlet_error(&self, exact: &ConcentrationField) -> Result<f64, PdeError> {
        let mut err: f64 = 0.0;
        for (&t, &value) in self.last.times.iter().zip(&self.last.values) {
            err = err.max((value - exact.outlet(t)?).abs());
        }
        Ok(err)
    }

    /// Writes the recorded snapshots as `t,x,c` rows.
    pub fn write_field_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,c")?;
        for (t, field) in &self.snapshots {
            for (i, c) in field.iter().enumerate() {
                writeln!(
                    out,
                    "{:.11e},{:.11e},{:.11e}",
                    t,
                    i as f64 * self.grid.dx,
                    c
                )?;
            }
        }
        Ok(())
    }
}

/// One level of a grid-refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub cells: usize,
    pub error: f64,
    /// `log₂(e_{coarser} / e_this)`; `None` on the coarsest level.
    pub order: Option<f64>,
}

/// Outlet `L∞` error against the exact field for each cell count.
pub fn convergence_study(
    exact: &ConcentrationField,
    cells: &[usize],
    cfl: f64,
    warmup_periods: usize,
) -> Result<Vec<ConvergenceLevel>, PdeError> {
    let mut levels: Vec<ConvergenceLevel> = Vec::with_capacity(cells.len());
    for &nx in cells {
        let grid = Grid::for_controls(
            exact.params(),
            exact.inlet(),
            exact.flow(),
            nx,
            cfl,
            warmup_periods,
        )?;
        let sim = simulate(exact.params(), exact.inlet(), exact.flow(), &grid)?;
        let error = sim.outlet_error(exact)?;
        let order = levels.last().map(|prev| (prev.error / error).log2());
        levels.push(ConvergenceLevel {
            cells: nx,
            error,
            order,
        });
    }
    Ok(levels)
}

/// Tensor-product polynomial bump `(1-u²)^p (1-w²)^p` with
/// `u = (x-x₀)/hₓ`, `w = (t-t₀)/hₜ`; `C^{p-1}` with compact support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub x0: f64,
    pub t0: f64,
    pub half_width_x: f64,
    pub half_width_t: f64,
    pub power: i32,
}

impl Bump {
    fn profile(&self, u: f64) -> (f64, f64) {
        if u.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let p = self.power;
        let base = 1.0 - u * u;
        (base.powi(p), -2.0 * p as f64 * u * base.powi(p - 1))
    }

    /// `(φ, ∂φ/∂t, ∂φ/∂x)`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let (bx, dbx) = self.profile((x - self.x0) / self.half_width_x);
        let (bt, dbt) = self.profile((t - self.t0) / self.half_width_t);
        (
            bx * bt,
            bx * dbt / self.half_width_t,
            dbx * bt / self.half_width_x,
        )
    }
}

/// Composite-midpoint value of `∬ (C φ_t + v C φ_x - k Cⁿ φ) dx dt` over the
/// support of `bump` with `quad_pts` points per axis. Zero for a weak solution
/// of `C_t + v C_x = -k Cⁿ`.
pub fn weak_identity_residual(
    field: &ConcentrationField,
    bump: &Bump,
    quad_pts: usize,
) -> Result<f64, PdeError> {
    let length = field.params().length;
    if !(bump.x0 - bump.half_width_x > 0.0 && bump.x0 + bump.half_width_x < length)
        || bump.power < 2
    {
        return Err(PdeError::BumpOutsideDomain);
    }
    let k = field.params().rate_constant;
    let n = field.params().order;
    let hx = 2.0 * bump.half_width_x / quad_pts as f64;
    let ht = 2.0 * bump.half_width_t / quad_pts as f64;
    let mut total = 0.0;
    for j in 0..quad_pts {
        let t = bump.t0 - bump.half_width_t + (j as f64 + 0.5) * ht;
        let v = field.velocity(t);
        let mut row = 0.0;
        for i in 0..quad_pts {
            let x = bump.x0 - bump.half_width_x + (i as f64 + 0.5) * hx;
            let (phi, phi_t, phi_x) = bump.eval(x, t);
            let c = field.eval(x, t)?;
            row += c * phi_t + v * c * phi_x - k * c.powf(n) * phi;
        }
        total += row;
    }
    Ok(total * hx * ht)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_alignment_and_guards() {
        let g = Grid::new(1.0, 100.0, 64, 0.9, 0.015, &[0.0, 100.0 / 3.0, 50.0], 2).unwrap();
        assert_eq!(g.steps_per_period % 6, 0);
        assert!(g.cfl(0.015) <= 0.9 + 1e-12);
        assert!(matches!(
            Grid::new(1.0, 100.0, 8, 0.9, 0.01, &[], 2),
            Err(PdeError::TooFewCells(8))
        ));
        assert!(matches!(
            Grid::new(1.0, 100.0, 64, 1.5, 0.01, &[], 2),
            Err(PdeError::CflViolation(_))
        ));
        assert!(matches!(
            Grid::new(1.0, 100.0, 64, 0.5, 0.01, &[], 0),
            Err(PdeError::NoWarmup)
        ));
    }

    #[test]
    fn transport_only_reaches_inlet_value() {
        let p = ReactorParams::new(2.0, 0.0, 1.0, 0.01).unwrap();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let grid = Grid::for_controls(&p, &c, None, 64, 0.9, 2).unwrap();
        let sim = simulate(&p, &c, None, &grid).unwrap();
        assert!(sim.last.values.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(sim.periodic_residual() < 1e-10);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let p = ReactorParams::reference();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let grid = Grid::for_controls(&p, &c, None, 64, 1.0, 2).unwrap();
        let fast = PeriodicSignal::steady(100.0, 0.02).unwrap();
        assert!(matches!(
            simulate(&p, &c, Some(&fast), &grid),
            Err(PdeError::CflViolation(_))
        ));
    }

    #[test]
    fn bump_derivatives() {
        let b = Bump {
            x0: 0.5,
            t0: 50.0,
            half_width_x: 0.2,
            half_width_t: 10.0,
            power: 4,
        };
        let (x, t, h) = (0.57, 46.0, 1e-6);
        let (_, pt, px) = b.eval(x, t);
        let fd_t = (b.eval(x, t + h).0 - b.eval(x, t - h).0) / (2.0 * h);
        let fd_x = (b.eval(x + h, t).0 - b.eval(x - h, t).0) / (2.0 * h);
        assert!((pt - fd_t).abs() < 1e-7 && (px - fd_x).abs() < 1e-6);
        assert_eq!(b.eval(0.75, 50.0).0, 0.0);
    }

    #[test]
    fn bump_must_be_interior() {
        let p = ReactorParams::reference();
        let f =
            ConcentrationField::constant(p, PeriodicSignal::steady(100.0, 1.0).unwrap()).unwrap();
        let b = Bump {
            x0: 0.1,
            t0: 50.0,
            half_width_x: 0.2,
            half_width_t: 10.0,
            power: 4,
        };
        assert!(matches!(
            weak_identity_residual(&f, &b, 32),
            Err(PdeError::BumpOutsideDomain)
        ));
    }

    #[test]
    fn field_csv_header() {
        let p = ReactorParams::reference();
        let c = PeriodicSignal::steady(100.0, 1.0).unwrap();
        let grid = Grid::for_controls(&p, &c, None, 16, 0.9, 1)
            .unwrap()
            .with_snapshots(1000);
        let sim = simulate(&p, &c, None, &grid).unwrap();
        let mut buf = Vec::new();
        sim.write_field_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,c\n"));
        assert_eq!(text.lines().count(), 1 + 17 * sim.snapshots.len());
    }
}
