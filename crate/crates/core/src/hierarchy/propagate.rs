//! Fixed-step RK4 propagation of the full hierarchy, with Anderson-accelerated
//! searches for steady and periodic steady states.

use std::collections::VecDeque;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{HeomOperator, HierarchyState, Snapshot};
use crate::error::{Error, Result};

/// RK4 is stable for λ·dt inside a region reaching about 2.8 along both axes.
const STABILITY_MARGIN: f64 = 2.5;

/// Largest dt ≤ `dt` that keeps every hierarchy mode inside the RK4
/// stability region, judged from the total decay rate and the system
/// frequency spread.
pub fn stable_dt(op: &HeomOperator, dt: f64) -> f64 {
    let h = op.model().h_static();
    let mut spread = 2.0 * h.norm();
    if let Some(drive) = op.model().drive() {
        spread += 4.0 * drive.amplitude.abs() * drive.pattern.norm();
    }
    let fastest = op.max_damping() + spread;
    if fastest * dt > STABILITY_MARGIN {
        STABILITY_MARGIN / fastest
    } else {
        dt
    }
}

/// Reusable RK4 workspace for one operator.
pub struct Propagator<'a> {
    op: &'a HeomOperator,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl<'a> Propagator<'a> {
    pub fn new(op: &'a HeomOperator) -> Self {
        let n = op.state_len();
        let z = C64::new(0.0, 0.0);
        Self {
            op,
            k1: vec![z; n],
            k2: vec![z; n],
            k3: vec![z; n],
            k4: vec![z; n],
            tmp: vec![z; n],
        }
    }

    pub fn operator(&self) -> &HeomOperator {
        self.op
    }

    /// One classical RK4 step from `t` (the state's own clock is set to t+dt).
    pub fn step_from(&mut self, state: &mut HierarchyState, t: f64, dt: f64) -> Result<()> {
        let op = self.op;
        let x = &mut state.data;
        op.rhs_into(t, x, &mut self.k1);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *tmp = xi + k * (0.5 * dt);
        }
        op.rhs_into(t + 0.5 * dt, &self.tmp, &mut self.k2);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *tmp = xi + k * (0.5 * dt);
        }
        op.rhs_into(t + 0.5 * dt, &self.tmp, &mut self.k3);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *tmp = xi + k * dt;
        }
        op.rhs_into(t + dt, &self.tmp, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..x.len() {
            x[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
        state.time = t + dt;
        check_finite(state)
    }

    pub fn step(&mut self, state: &mut HierarchyState, dt: f64) -> Result<()> {
        let t = state.time;
        self.step_from(state, t, dt)
    }

    /// `steps` steps of size dt from t0, with times computed as t0 + i·dt.
    pub fn advance(
        &mut self,
        state: &mut HierarchyState,
        t0: f64,
        steps: usize,
        dt: f64,
    ) -> Result<()> {
        for i in 0..steps {
            self.step_from(state, t0 + i as f64 * dt, dt)?;
        }
        state.time = t0 + steps as f64 * dt;
        Ok(())
    }
}

fn check_finite(state: &HierarchyState) -> Result<()> {
    let dd = state.dim * state.dim;
    if let Some(pos) = state
        .data
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite {
            ado_id: pos / dd,
            time: state.time,
        });
    }
    Ok(())
}

/// One RK4 step returning the new state.
pub fn step_rk4(op: &HeomOperator, state: &HierarchyState, dt: f64) -> Result<HierarchyState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let mut next = state.clone();
    Propagator::new(op).step(&mut next, dt)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndersonOptions {
    /// History length; 0 turns acceleration off.
    pub depth: usize,
    /// Restart when the residual grows beyond this factor of the best one.
    pub restart_factor: f64,
}

impl Default for AndersonOptions {
    fn default() -> Self {
        Self {
            depth: 10,
            restart_factor: 10.0,
        }
    }
}

/// Type-II Anderson mixing for a fixed-point map x ↦ g(x) with real
/// combination weights, so trace and Hermiticity carry over from g.
struct Anderson {
    opts: AndersonOptions,
    dg: VecDeque<Vec<C64>>,
    df: VecDeque<Vec<C64>>,
    last_g: Option<Vec<C64>>,
    last_f: Option<Vec<C64>>,
    best: f64,
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

impl Anderson {
    fn new(opts: AndersonOptions) -> Self {
        Self {
            opts,
            dg: VecDeque::new(),
            df: VecDeque::new(),
            last_g: None,
            last_f: None,
            best: f64::INFINITY,
        }
    }

    fn reset(&mut self) {
        self.dg.clear();
        self.df.clear();
        self.last_g = None;
        self.last_f = None;
        self.best = f64::INFINITY;
    }

    /// Next iterate given x and g(x).
    fn next(&mut self, x: &[C64], g: &[C64]) -> Vec<C64> {
        if self.opts.depth == 0 {
            return g.to_vec();
        }
        let f: Vec<C64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        let norm = real_dot(&f, &f).sqrt();
        if norm > self.opts.restart_factor * self.best {
            self.reset();
        }
        self.best = self.best.min(norm);
        if let (Some(lg), Some(lf)) = (self.last_g.take(), self.last_f.take()) {
            self.dg
                .push_back(g.iter().zip(&lg).map(|(a, b)| a - b).collect());
            self.df
                .push_back(f.iter().zip(&lf).map(|(a, b)| a - b).collect());
            if self.df.len() > self.opts.depth {
                self.dg.pop_front();
                self.df.pop_front();
            }
        }
        self.last_g = Some(g.to_vec());
        let mut out = g.to_vec();
        if let Some(gamma) = self.least_squares(&f) {
            for (coef, dg) in gamma.iter().zip(&self.dg) {
                if *coef != 0.0 {
                    for (o, d) in out.iter_mut().zip(dg) {
                        *o -= d * *coef;
                    }
                }
            }
        }
        self.last_f = Some(f);
        out
    }

    /// min_γ ‖f − ΔF γ‖ by modified Gram–Schmidt; dependent columns get γ = 0.
    fn least_squares(&self, f: &[C64]) -> Option<Vec<f64>> {
        let m = self.df.len();
        if m == 0 {
            return None;
        }
        let mut q: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cols = Vec::with_capacity(m);
        let mut r = vec![vec![0.0; m]; m];
        for j in 0..m {
            let mut v = self.df[j].clone();
            let original = real_dot(&v, &v).sqrt();
            let mut coeffs = Vec::with_capacity(q.len());
            for qa in &q {
                let p = real_dot(qa, &v);
                for (vv, qq) in v.iter_mut().zip(qa) {
                    *vv -= qq * p;
                }
                coeffs.push(p);
            }
            let norm = real_dot(&v, &v).sqrt();
            if norm > 1e-10 * original && norm > 0.0 {
                let c = cols.len();
                for (a, p) in coeffs.into_iter().enumerate() {
                    r[a][c] = p;
                }
                r[c][c] = norm;
                for vv in v.iter_mut() {
                    *vv /= norm;
                }
                q.push(v);
                cols.push(j);
            }
        }
        if cols.is_empty() {
            return None;
        }
        let c = cols.len();
        let rhs: Vec<f64> = q.iter().map(|qa| real_dot(qa, f)).collect();
        let mut g = vec![0.0; c];
        for a in (0..c).rev() {
            let s: f64 = rhs[a] - ((a + 1)..c).map(|b| r[a][b] * g[b]).sum::<f64>();
            g[a] = s / r[a][a];
        }
        let mut gamma = vec![0.0; m];
        for (a, &j) in cols.iter().enumerate() {
            gamma[j] = g[a];
        }
        gamma.iter().all(|x| x.is_finite()).then_some(gamma)
    }
}

fn frob(data: &[C64]) -> f64 {
    real_dot(data, data).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub dt: f64,
    /// Bound on ‖dρ₀/dt‖_F / ‖ρ₀‖_F.
    pub tol: f64,
    /// Bound on the change of every observable across one probe window.
    pub obs_tol: f64,
    pub t_max: f64,
    /// Propagation time between convergence checks.
    pub window: f64,
    pub anderson: AndersonOptions,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            tol: 1e-10,
            obs_tol: 1e-10,
            t_max: 1.0e5,
            window: 5.0,
            anderson: AndersonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    /// Total propagated time.
    pub elapsed: f64,
    pub windows: usize,
    pub dt_used: f64,
    pub residual_history: Vec<f64>,
    pub drift_history: Vec<f64>,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
}

/// Propagates an undriven hierarchy until both ‖dρ₀/dt‖/‖ρ₀‖ and the drift
/// of `observe` over a probe window drop below tolerance.
pub fn propagate_to_steady(
    op: &HeomOperator,
    state: HierarchyState,
    opts: &SteadyOptions,
    observe: &mut dyn FnMut(&HierarchyState) -> Vec<f64>,
) -> Result<(HierarchyState, SteadyReport)> {
    if op.model().is_driven() {
        return Err(Error::InvalidParameter(
            "steady propagation needs an undriven model".into(),
        ));
    }
    validate_common(opts.dt, opts.tol)?;
    if !(opts.window > 0.0 && opts.t_max > 0.0 && opts.obs_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "window, t_max and obs_tol must be > 0".into(),
        ));
    }
    let dt = stable_dt(op, opts.dt);
    let steps = ((opts.window / dt).round() as usize).max(1);
    let mut prop = Propagator::new(op);
    let mut anderson = Anderson::new(opts.anderson);
    let mut report = SteadyReport {
        elapsed: 0.0,
        windows: 0,
        dt_used: dt,
        residual_history: Vec::new(),
        drift_history: Vec::new(),
        max_trace_deviation: 0.0,
        max_hermiticity_deviation: 0.0,
    };
    let mut x = state;
    let dd = op.dim() * op.dim();
    let mut deriv = vec![C64::new(0.0, 0.0); op.state_len()];
    loop {
        let before = observe(&x);
        let mut y = x.clone();
        let t0 = y.time;
        prop.advance(&mut y, t0, steps, dt)?;
        report.elapsed += steps as f64 * dt;
        report.windows += 1;
        report.max_trace_deviation = report
            .max_trace_deviation
            .max((y.trace() - C64::new(1.0, 0.0)).norm());
        report.max_hermiticity_deviation = report
            .max_hermiticity_deviation
            .max(y.max_hermiticity_deviation());

        op.rhs_into(y.time, &y.data, &mut deriv);
        let residual = frob(&deriv[..dd]) / frob(&y.data[..dd]);
        let after = observe(&y);
        let drift = before
            .iter()
            .zip(&after)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.residual_history.push(residual);
        report.drift_history.push(drift);
        if residual < opts.tol && drift < opts.obs_tol {
            return Ok((y, report));
        }
        if report.elapsed >= opts.t_max {
            return Err(Error::NotConverged {
                kind: "steady-state",
                elapsed: report.elapsed,
                history: report.residual_history,
            });
        }
        let next = anderson.next(&x.data, &y.data);
        x.data = next;
        x.time = y.time;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOptions {
    pub dt: f64,
    /// Bound on ‖x(t+T) − x(t)‖_F / ‖x(t)‖_F at the cycle start.
    pub tol: f64,
    /// Bound on the change of every cycle observable between cycles.
    pub obs_tol: f64,
    pub max_cycles: usize,
    pub samples_per_cycle: usize,
    pub anderson: AndersonOptions,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            tol: 1e-9,
            obs_tol: 1e-10,
            max_cycles: 2000,
            samples_per_cycle: 200,
            anderson: AndersonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTrajectory {
    pub period: f64,
    pub dt_used: f64,
    pub steps_per_cycle: usize,
    /// samples_per_cycle + 1 uniformly spaced samples spanning one full cycle.
    pub samples: Vec<Snapshot>,
    /// State at the start of the returned cycle.
    pub cycle_start: HierarchyState,
    pub cycles: usize,
    pub residual_history: Vec<f64>,
    pub obs_history: Vec<f64>,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
}

/// dt shrunk so that an integer number of steps fills the period and every
/// sample lands on a step.
pub fn cycle_grid(period: f64, dt: f64, samples: usize) -> (f64, usize) {
    let per_sample = (period / (dt * samples as f64)).ceil().max(1.0) as usize;
    let steps = per_sample * samples;
    (period / steps as f64, steps)
}

/// Propagates a driven hierarchy cycle by cycle (Anderson-accelerated on the
/// one-period map) until the state and the cycle observables repeat, then
/// records one verification cycle.
pub fn propagate_periodic(
    op: &HeomOperator,
    state: HierarchyState,
    opts: &PeriodicOptions,
    observe: &mut dyn FnMut(&[Snapshot]) -> Vec<f64>,
) -> Result<PeriodicTrajectory> {
    let drive = op
        .model()
        .drive()
        .ok_or_else(|| Error::InvalidParameter("periodic propagation needs a drive".into()))?;
    validate_common(opts.dt, opts.tol)?;
    if opts.samples_per_cycle < 4 || opts.max_cycles == 0 {
        return Err(Error::InvalidParameter(
            "need >= 4 samples per cycle and >= 1 cycle".into(),
        ));
    }
    let period = drive.period();
    let (dt, steps) = cycle_grid(period, stable_dt(op, opts.dt), opts.samples_per_cycle);
    let stride = steps / opts.samples_per_cycle;
    let mut prop = Propagator::new(op);
    let mut anderson = Anderson::new(opts.anderson);
    let mut residual_history = Vec::new();
    let mut obs_history = Vec::new();
    let mut max_trace: f64 = 0.0;
    let mut max_herm: f64 = 0.0;

    let mut run_cycle =
        |prop: &mut Propagator, x: &HierarchyState| -> Result<(HierarchyState, Vec<Snapshot>)> {
            let mut y = x.clone();
            let t0 = y.time;
            let mut samples = Vec::with_capacity(opts.samples_per_cycle + 1);
            samples.push(y.snapshot());
            for s in 0..opts.samples_per_cycle {
                prop.advance(&mut y, t0 + (s * stride) as f64 * dt, stride, dt)?;
                y.time = t0 + ((s + 1) * stride) as f64 * dt;
                samples.push(y.snapshot());
            }
            max_trace = max_trace.max((y.trace() - C64::new(1.0, 0.0)).norm());
            max_herm = max_herm.max(y.max_hermiticity_deviation());
            Ok((y, samples))
        };

    let mut x = state;
    let mut previous_obs: Option<Vec<f64>> = None;
    for cycle in 1..=opts.max_cycles {
        let (y, samples) = run_cycle(&mut prop, &x)?;
        let residual = frob(
            &y.data
                .iter()
                .zip(&x.data)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ) / frob(&x.data);
        let obs = observe(&samples);
        let change = previous_obs
            .as_ref()
            .map_or(f64::INFINITY, |p| max_abs_diff(p, &obs));
        residual_history.push(residual);
        obs_history.push(change);
        previous_obs = Some(obs);
        if residual < opts.tol && change < opts.obs_tol {
            // Verify with one plain cycle from the propagated state.
            let (z, samples) = run_cycle(&mut prop, &y)?;
            let obs = observe(&samples);
            let change = max_abs_diff(previous_obs.as_ref().unwrap(), &obs);
            residual_history.push(residual);
            obs_history.push(change);
            if change < opts.obs_tol {
                let mut cycle_start = y;
                cycle_start.time = samples[0].time;
                return Ok(PeriodicTrajectory {
                    period,
                    dt_used: dt,
                    steps_per_cycle: steps,
                    samples,
                    cycle_start,
                    cycles: cycle + 1,
                    residual_history,
                    obs_history,
                    max_trace_deviation: max_trace,
                    max_hermiticity_deviation: max_herm,
                });
            }
            previous_obs = Some(obs);
            anderson.reset();
            x = z;
            continue;
        }
        let next = anderson.next(&x.data, &y.data);
        x.data = next;
        x.time = y.time;
    }
    Err(Error::NotConverged {
        kind: "periodic",
        elapsed: x.time,
        history: residual_history,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn validate_common(dt: f64, tol: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientOptions {
    pub dt: f64,
    pub duration: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
}

/// Plain propagation for `duration`, sampling every `sample_every` steps
/// (the initial state is the first sample). The duration is rounded up to a
/// whole number of sampling intervals so the samples stay uniform.
pub fn propagate_transient(
    op: &HeomOperator,
    state: HierarchyState,
    opts: &TransientOptions,
) -> Result<(HierarchyState, Vec<Snapshot>)> {
    validate_common(opts.dt, 1.0)?;
    let dt = stable_dt(op, opts.dt);
    let every = opts.sample_every.max(1);
    let steps = ((opts.duration / dt).round() as usize).div_ceil(every) * every;
    let mut prop = Propagator::new(op);
    let mut x = state;
    let t0 = x.time;
    let mut samples = vec![x.snapshot()];
    let mut done = 0;
    while done < steps {
        prop.advance(&mut x, t0 + done as f64 * dt, every, dt)?;
        done += every;
        x.time = t0 + done as f64 * dt;
        samples.push(x.snapshot());
    }
    Ok((x, samples))
}
