//! Predictor–corrector continuation along finite flexes, and event solving
//! for a pair-distance monitor.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{distance, Embedding, Graph};
use crate::refiner::project_min_norm;
use crate::rigidity::{flex_space, rigidity_matrix};
use crate::verifier::check_noncrossing;

/// Corrector iteration cap per step.
const CORRECTOR_ITERATIONS: usize = 30;
/// Allowed `‖R·d‖` for a direction to count as a flex.
const DIRECTION_SLACK: f64 = 1e-6;
/// Projected-gradient norm below which steering stalls.
const STALL_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexState {
    pub embedding: Embedding,
    pub arclength: f64,
    /// Unit secant of the last accepted step (empty before the first).
    pub last_direction: Vec<f64>,
}

impl FlexState {
    pub fn new(embedding: Embedding) -> Self {
        Self {
            embedding,
            arclength: 0.0,
            last_direction: Vec::new(),
        }
    }
}

/// Distance between vertices `a` and `b`, with the value to reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub a: usize,
    pub b: usize,
    pub target: f64,
}

impl Monitor {
    pub fn validate(&self, n_vertices: usize) -> Result<()> {
        if self.a == self.b {
            return Err(Error::Monitor("a and b must differ".into()));
        }
        if self.a >= n_vertices || self.b >= n_vertices {
            return Err(Error::Monitor(format!(
                "vertex out of range for {n_vertices} vertices"
            )));
        }
        if !(self.target.is_finite() && self.target > 0.0) {
            return Err(Error::Monitor("target must be positive".into()));
        }
        Ok(())
    }
}

pub fn monitor_value(emb: &Embedding, monitor: &Monitor) -> f64 {
    distance(emb.get(monitor.a), emb.get(monitor.b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlexOptions {
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Corrector stops once every `|len² − 1|` is at most this.
    pub corrector_tol: f64,
    pub max_steps: usize,
    /// Record crossing status every this many steps; 0 = only at the event.
    pub crossing_check_every: usize,
    pub rank_tau: f64,
    pub delta_cross: f64,
    /// Stop once `|monitor − target|` is at most this.
    pub event_tol: f64,
}

impl Default for FlexOptions {
    fn default() -> Self {
        Self {
            step_init: 1e-2,
            step_min: 1e-6,
            step_max: 0.1,
            corrector_tol: 1e-12,
            max_steps: 100_000,
            crossing_check_every: 0,
            rank_tau: 1e-7,
            delta_cross: 1e-7,
            event_tol: 1e-9,
        }
    }
}

impl FlexOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.step_init,
            self.step_min,
            self.step_max,
            self.corrector_tol,
            self.rank_tau,
            self.delta_cross,
            self.event_tol,
        ];
        if positive.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Other("flex options must be positive".into()));
        }
        if !(self.step_min <= self.step_init && self.step_init <= self.step_max) {
            return Err(Error::Other("need step_min ≤ step_init ≤ step_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub arclength: f64,
    pub monitor: f64,
    /// max `|len − 1|`.
    pub max_residual: f64,
    pub crossing_ok: Option<bool>,
}

pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("step,arclength,monitor,max_residual\n");
    for p in trace {
        let _ = writeln!(out, "{},{},{},{}", p.step, p.arclength, p.monitor, p.max_residual);
    }
    out
}

fn unit(v: DVector<f64>) -> Option<DVector<f64>> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}

/// Orthogonal projection of `direction` onto the flex space at `emb`,
/// normalized. Turns a tangent from a nearby state into a valid step
/// direction here.
pub fn project_to_flex_space(g: &Graph, emb: &Embedding, direction: &[f64], rank_tau: f64) -> Result<Vec<f64>> {
    check_sizes(g, emb)?;
    if direction.len() != 2 * g.n_vertices() {
        return Err(Error::Other(format!(
            "direction has {} entries, expected {}",
            direction.len(),
            2 * g.n_vertices()
        )));
    }
    let basis = flex_space(g, emb, rank_tau)?;
    if basis.ncols() == 0 {
        return Err(Error::NoFlex);
    }
    let d = DVector::from_column_slice(direction);
    let p = &basis * (basis.transpose() * d);
    unit(p)
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::Other("direction is orthogonal to the flex space".into()))
}

/// Advance `state` by `h` along `direction`, then project back onto the
/// constraint manifold with minimum-norm corrections.
pub fn flex_step(
    g: &Graph,
    state: &FlexState,
    direction: &[f64],
    h: f64,
    opts: &FlexOptions,
) -> Result<FlexState> {
    check_sizes(g, &state.embedding)?;
    if direction.len() != 2 * g.n_vertices() {
        return Err(Error::Other(format!(
            "direction has {} entries, expected {}",
            direction.len(),
            2 * g.n_vertices()
        )));
    }
    if flex_space(g, &state.embedding, opts.rank_tau)?.ncols() == 0 {
        return Err(Error::NoFlex);
    }
    if h == 0.0 {
        return Ok(state.clone());
    }
    let d = unit(DVector::from_column_slice(direction))
        .ok_or_else(|| Error::Other("direction must be non-zero".into()))?;
    let stray = (rigidity_matrix(g, &state.embedding) * &d).norm();
    if stray > DIRECTION_SLACK {
        return Err(Error::Other(format!(
            "direction is not an infinitesimal flex (|R·d| = {stray:.3e})"
        )));
    }
    advance(g, state, &d, h, opts).map(|(s, _)| s)
}

/// Predictor + corrector without the flex-space checks; returns the new
/// state and the corrector iteration count.
fn advance(
    g: &Graph,
    state: &FlexState,
    d: &DVector<f64>,
    h: f64,
    opts: &FlexOptions,
) -> Result<(FlexState, usize)> {
    let x0 = DVector::from_vec(state.embedding.to_flat());
    let predicted = &x0 + d * h;
    let guess = Embedding::from_flat(predicted.as_slice()).map_err(|_| Error::StepTooLarge)?;
    let (embedding, iterations) =
        project_min_norm(g, &guess, &[], opts.corrector_tol, CORRECTOR_ITERATIONS)?;
    let x1 = DVector::from_vec(embedding.to_flat());
    let secant = &x1 - &x0;
    let length = secant.norm();
    let last_direction = match unit(secant) {
        Some(s) => s.as_slice().to_vec(),
        None => state.last_direction.clone(),
    };
    Ok((
        FlexState {
            embedding,
            arclength: state.arclength + length,
            last_direction,
        },
        iterations,
    ))
}

/// Gradient of the monitor distance, projected onto the flex space.
fn steering_gradient(g: &Graph, emb: &Embedding, monitor: &Monitor, rank_tau: f64) -> Result<DVector<f64>> {
    let basis = flex_space(g, emb, rank_tau)?;
    if basis.ncols() == 0 {
        return Err(Error::NoFlex);
    }
    let (pa, pb) = (emb.get(monitor.a), emb.get(monitor.b));
    let u = (pa - pb) * (1.0 / distance(pa, pb));
    let mut grad = DVector::zeros(2 * g.n_vertices());
    grad[2 * monitor.a] = u.x;
    grad[2 * monitor.a + 1] = u.y;
    grad[2 * monitor.b] = -u.x;
    grad[2 * monitor.b + 1] = -u.y;
    Ok(&basis * (basis.transpose() * grad))
}

fn trace_point(g: &Graph, state: &FlexState, monitor: &Monitor, step: usize, crossing: Option<bool>) -> TracePoint {
    TracePoint {
        step,
        arclength: state.arclength,
        monitor: monitor_value(&state.embedding, monitor),
        max_residual: state.embedding.max_abs_length_deviation(g),
        crossing_ok: crossing,
    }
}

/// Follow the projected monitor gradient until `monitor` reaches its target.
///
/// The returned trace has one point per accepted step, starting with the
/// initial state; the last point is the event and carries a crossing check.
pub fn steer_to_event(
    g: &Graph,
    state0: &FlexState,
    monitor: &Monitor,
    opts: &FlexOptions,
) -> Result<(FlexState, Vec<TracePoint>)> {
    check_sizes(g, &state0.embedding)?;
    monitor.validate(g.n_vertices())?;
    opts.validate()?;
    let crossing = |s: &FlexState| check_noncrossing(g, &s.embedding, opts.delta_cross).ok;
    let event_fn = |s: &FlexState| monitor_value(&s.embedding, monitor) - monitor.target;

    let mut state = state0.clone();
    let mut trace = vec![trace_point(g, &state, monitor, 0, None)];
    let mut h = opts.step_init;
    let mut steps = 0;

    loop {
        let f = event_fn(&state);
        if f.abs() <= opts.event_tol {
            let last = trace.last_mut().expect("non-empty trace");
            last.crossing_ok = Some(crossing(&state));
            return Ok((state, trace));
        }
        if steps >= opts.max_steps {
            return Err(Error::Budget(opts.max_steps));
        }
        let grad = steering_gradient(g, &state.embedding, monitor, opts.rank_tau)?;
        let slope = grad.norm();
        if slope < STALL_NORM {
            return Err(Error::Stall);
        }
        let d = grad * (-f.signum() / slope);
        // Allow a modest overshoot so the target is bracketed quickly.
        let h_try = h.min(2.0 * f.abs() / slope).max(opts.step_min);
        let (next, iterations) = match advance(g, &state, &d, h_try, opts) {
            Ok(r) => r,
            Err(Error::StepTooLarge) => {
                h /= 2.0;
                if h < opts.step_min {
                    return Err(Error::StepTooLarge);
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        let f_next = event_fn(&next);
        let next = if f_next.signum() != f.signum() && f_next.abs() > opts.event_tol {
            bisect(g, &state, &d, h_try, f, f_next, opts, &event_fn)?
        } else {
            next
        };
        if iterations <= 3 {
            h = (h * 1.5).min(opts.step_max);
        }
        state = next;
        let check = (opts.crossing_check_every > 0 && steps % opts.crossing_check_every == 0)
            .then(|| crossing(&state));
        trace.push(trace_point(g, &state, monitor, steps, check));
    }
}

/// Find `h ∈ (0, h_hi)` with the event function within tolerance, given a
/// sign change between 0 and `h_hi`. Illinois-style regula falsi: the
/// bracket always shrinks, and convergence is superlinear near the root.
#[allow(clippy::too_many_arguments)]
fn bisect(
    g: &Graph,
    state: &FlexState,
    d: &DVector<f64>,
    h_hi: f64,
    f_lo: f64,
    f_hi: f64,
    opts: &FlexOptions,
    event_fn: &dyn Fn(&FlexState) -> f64,
) -> Result<FlexState> {
    let (mut lo, mut hi) = (0.0, h_hi);
    let (mut flo, mut fhi) = (f_lo, f_hi);
    let mut side = 0i8;
    for _ in 0..200 {
        let mut mid = (lo * fhi - hi * flo) / (fhi - flo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let (s, _) = advance(g, state, d, mid, opts)?;
        let f = event_fn(&s);
        if f.abs() <= opts.event_tol {
            return Ok(s);
        }
        if f.signum() == flo.signum() {
            lo = mid;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Other("event bisection did not converge".into()))
}
