//! Fixed-step flow integrators for vector fields on `C^n`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::C64;
use crate::registry::{Registry, Strategy};

/// A (real) vector field written in complex coordinates: `ż = F(z)`.
pub type Field<'a> = dyn Fn(&[C64]) -> Result<Vec<C64>> + 'a;

pub const DEFAULT_INTEGRATOR: &str = "rk4";

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: Vec<C64>,
    /// Local error estimate, when the method produces one.
    pub error_estimate: Option<f64>,
}

pub trait Integrator: Strategy {
    /// Advances `state` by one step of signed size `h`.
    fn step(&self, field: &Field, state: &[C64], h: f64) -> Result<StepOutcome>;
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(yi, xi)| yi + xi * a).collect()
}

fn rk4_step(field: &Field, y: &[C64], h: f64) -> Result<Vec<C64>> {
    let k1 = field(y)?;
    let k2 = field(&axpy(y, 0.5 * h, &k1))?;
    let k3 = field(&axpy(y, 0.5 * h, &k2))?;
    let k4 = field(&axpy(y, h, &k3))?;
    Ok((0..y.len())
        .map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
        .collect())
}

/// Classical fourth-order Runge–Kutta.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rk4;

impl Strategy for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }
    fn description(&self) -> &'static str {
        "classical fourth-order Runge-Kutta, fixed step"
    }
}

impl Integrator for Rk4 {
    fn step(&self, field: &Field, state: &[C64], h: f64) -> Result<StepOutcome> {
        Ok(StepOutcome {
            state: rk4_step(field, state, h)?,
            error_estimate: None,
        })
    }
}

/// RK4 with step halving: every step is taken once at `h` and twice at
/// `h/2`; the half-step result is kept and `‖y_half − y_full‖ / 15` is
/// reported as the local error.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rk4Halving;

impl Strategy for Rk4Halving {
    fn name(&self) -> &'static str {
        "rk4-halving"
    }
    fn description(&self) -> &'static str {
        "fourth-order Runge-Kutta with a step-halving error estimate"
    }
}

impl Integrator for Rk4Halving {
    fn step(&self, field: &Field, state: &[C64], h: f64) -> Result<StepOutcome> {
        let full = rk4_step(field, state, h)?;
        let half = rk4_step(field, state, 0.5 * h)?;
        let half = rk4_step(field, &half, 0.5 * h)?;
        let err = full
            .iter()
            .zip(&half)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / 15.0;
        Ok(StepOutcome {
            state: half,
            error_estimate: Some(err),
        })
    }
}

pub fn integrators() -> Registry<dyn Integrator> {
    let mut reg: Registry<dyn Integrator> = Registry::new("integrator");
    reg.register(Arc::new(Rk4)).register(Arc::new(Rk4Halving));
    reg
}

#[derive(Clone, Debug)]
pub struct FlowSummary {
    pub state: Vec<C64>,
    pub steps: usize,
    pub max_error_estimate: Option<f64>,
}

/// Number of equal steps no longer than `max_step` covering `duration`.
pub fn step_count(duration: f64, max_step: f64) -> usize {
    if duration == 0.0 {
        return 0;
    }
    ((duration.abs() / max_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Integrates `ż = field(z)` for signed time `duration` with equal steps no
/// longer than `max_step`. `observer` sees the time and state after every
/// step and may abort by returning an error.
pub fn integrate(
    integrator: &dyn Integrator,
    field: &Field,
    start: &[C64],
    duration: f64,
    max_step: f64,
    observer: &mut dyn FnMut(f64, &[C64]) -> Result<()>,
) -> Result<FlowSummary> {
    if max_step.is_nan() || max_step <= 0.0 {
        return Err(Error::Config(format!("integrator step must be positive, got {max_step}")));
    }
    let steps = step_count(duration, max_step);
    let mut state = start.to_vec();
    let mut max_err: Option<f64> = None;
    if steps == 0 {
        return Ok(FlowSummary {
            state,
            steps,
            max_error_estimate: None,
        });
    }
    let h = duration / steps as f64;
    for k in 1..=steps {
        let t = h * k as f64;
        let out = integrator.step(field, &state, h).map_err(|e| match e {
            Error::Integration { .. } => e,
            other => Error::Integration {
                time: t,
                message: other.to_string(),
            },
        })?;
        if out.state.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Integration {
                time: t,
                message: "state became non-finite".into(),
            });
        }
        if let Some(e) = out.error_estimate {
            max_err = Some(max_err.map_or(e, |m: f64| m.max(e)));
        }
        state = out.state;
        observer(t, &state)?;
    }
    Ok(FlowSummary {
        state,
        steps,
        max_error_estimate: max_err,
    })
}

/// [`integrate`] without an observer.
pub fn flow(integrator: &dyn Integrator, field: &Field, start: &[C64], duration: f64, max_step: f64) -> Result<Vec<C64>> {
    Ok(integrate(integrator, field, start, duration, max_step, &mut |_, _| Ok(()))?.state)
}
