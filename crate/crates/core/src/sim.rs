//! Fixed-step RK4 integration of the closed-loop system.

use nalgebra::DVector;

use crate::constraint::AffineConstraint;
use crate::control;
use crate::error::{Error, Result};
use crate::geometry::{MechanicalModel, State};

/// Sampled closed-loop trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub controls: Vec<DVector<f64>>,
    pub phis: Vec<DVector<f64>>,
    /// `max_t |φ_b(t) − φ_b(0)|` for each constraint `b`.
    pub drift_report: Vec<f64>,
}

impl Trajectory {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            controls: Vec::new(),
            phis: Vec::new(),
            drift_report: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|φ_b(t)|` over samples and constraints.
    pub fn max_abs_phi(&self) -> f64 {
        self.phis.iter().map(|p| p.amax()).fold(0.0, f64::max)
    }

    pub fn max_drift(&self) -> f64 {
        self.drift_report.iter().copied().fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, state: State, tau: DVector<f64>, phi: DVector<f64>) {
        if let Some(first) = self.phis.first() {
            for (d, (now, start)) in self.drift_report.iter_mut().zip(phi.iter().zip(first.iter())) {
                *d = d.max((now - start).abs());
            }
        } else {
            self.drift_report = vec![0.0; phi.len()];
        }
        self.times.push(t);
        self.states.push(state);
        self.controls.push(tau);
        self.phis.push(phi);
    }
}

fn derivative(model: &MechanicalModel, con: &AffineConstraint, stage: usize, s: &State) -> Result<State> {
    match control::closed_loop_acceleration(model, con, s) {
        Ok(accel) => Ok(State {
            q: s.qdot.clone(),
            qdot: accel,
        }),
        Err(e) => Err(Error::StageFailed {
            stage,
            q: s.q.iter().copied().collect(),
            qdot: s.qdot.iter().copied().collect(),
            source: Box::new(e),
        }),
    }
}

fn offset(s: &State, k: &State, h: f64) -> State {
    State {
        q: &s.q + &k.q * h,
        qdot: &s.qdot + &k.qdot * h,
    }
}

/// One classical RK4 step of `(q̇, closed-loop acceleration)`, with the
/// control re-solved at every stage.
pub fn rk4_step(model: &MechanicalModel, con: &AffineConstraint, state: &State, h: f64) -> Result<State> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let k1 = derivative(model, con, 1, state)?;
    let k2 = derivative(model, con, 2, &offset(state, &k1, h / 2.0))?;
    let k3 = derivative(model, con, 3, &offset(state, &k2, h / 2.0))?;
    let k4 = derivative(model, con, 4, &offset(state, &k3, h))?;
    let w = h / 6.0;
    Ok(State {
        q: &state.q + (&k1.q + &k2.q * 2.0 + &k3.q * 2.0 + &k4.q) * w,
        qdot: &state.qdot + (&k1.qdot + &k2.qdot * 2.0 + &k3.qdot * 2.0 + &k4.qdot) * w,
    })
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub t_end: f64,
    pub h: f64,
    pub sample_every: usize,
}

impl Settings {
    pub fn new(t_end: f64, h: f64, sample_every: usize) -> Self {
        Self { t_end, h, sample_every }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {}", self.h)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened when `h` does not divide
    /// `t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

fn sample(
    traj: &mut Trajectory,
    model: &MechanicalModel,
    con: &AffineConstraint,
    t: f64,
    state: &State,
) -> Result<()> {
    let tau = control::tau_star(model, con, state)?;
    let phi = con.phi(state)?;
    traj.push(t, state.clone(), tau, phi);
    Ok(())
}

/// Integrates and returns whatever was sampled before a failure, together
/// with the failure.
pub fn integrate_partial(
    model: &MechanicalModel,
    con: &AffineConstraint,
    state0: &State,
    settings: Settings,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::new();
    if let Err(e) = settings
        .validate()
        .and_then(|_| con.check_compatible(model))
        .and_then(|_| model.chart().check_state(state0))
    {
        return (traj, Some(e));
    }
    let aborted = |traj: &Trajectory, t: f64, e: Error| Error::IntegrationAborted {
        t,
        last_good_sample: traj.len().saturating_sub(1),
        source: Box::new(e),
    };
    if let Err(e) = sample(&mut traj, model, con, 0.0, state0) {
        return (Trajectory::new(), Some(aborted(&traj, 0.0, e)));
    }

    let steps = settings.steps();
    let mut state = state0.clone();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps { settings.t_end } else { k as f64 * settings.h };
        state = match rk4_step(model, con, &state, t_next - t) {
            Ok(s) => s,
            Err(e) => return (traj.clone(), Some(aborted(&traj, t, e))),
        };
        t = t_next;
        if !state.is_finite() {
            let last_good_sample = traj.len() - 1;
            return (traj, Some(Error::NonFinite { t, last_good_sample }));
        }
        if k % settings.sample_every == 0 || k == steps {
            if let Err(e) = sample(&mut traj, model, con, t, &state) {
                return (traj.clone(), Some(aborted(&traj, t, e)));
            }
        }
    }
    (traj, None)
}

/// Fixed-step RK4 run from `state0` to `settings.t_end`.
pub fn integrate(
    model: &MechanicalModel,
    con: &AffineConstraint,
    state0: &State,
    settings: Settings,
) -> Result<Trajectory> {
    match integrate_partial(model, con, state0, settings) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}
