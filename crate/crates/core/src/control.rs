//! Feedback that renders an affine constraint invariant.
//!
//! At each state the control `τ*` is the unique solution of `P τ = b` with
//!
//! * `P^b_a = μ^b(Y^a)`, `Y^a = ♯f^a` (configuration only),
//! * `b_b = −dφ^b(G)`, where `G` is the drift of the unactuated system.
//!
//! Adding `τ*_a Y^a` to the drift acceleration makes `dφ` vanish along the
//! closed loop, so `φ` is conserved and `φ = 0` is invariant.

use nalgebra::{DMatrix, DVector};

use crate::constraint::{transversality_report, AffineConstraint};
use crate::error::{Error, Result};
use crate::geometry::{Frame, MechanicalModel, State};
use crate::linalg;

/// Snapshot of one control solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolve {
    pub p: DMatrix<f64>,
    pub b: DVector<f64>,
    pub tau: DVector<f64>,
    pub cond_estimate: f64,
}

impl ControlSolve {
    /// `max |P τ − b|`.
    pub fn residual(&self) -> f64 {
        (&self.p * &self.tau - &self.b).amax()
    }
}

struct Evaluation {
    solve: ControlSolve,
    drift: DVector<f64>,
    inputs: DMatrix<f64>,
}

fn p_in(model: &MechanicalModel, con: &AffineConstraint, frame: &Frame) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let s = con.s_from_slots(&frame.slots)?;
    let y = model.input_fields_in(frame)?;
    Ok((&s * &y, y))
}

fn b_in(
    model: &MechanicalModel,
    con: &AffineConstraint,
    frame: &Frame,
    qdot: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = model.dim();
    let m = con.num_constraints();
    let drift = model.drift_in(frame, qdot)?;
    let s = con.s_from_slots(&frame.slots)?;
    let dmu = con.mu_grad_from_slots(&frame.slots)?;
    let dz = con.z_grad_from_slots(&frame.slots)?;
    let mut b = DVector::zeros(m);
    for k in 0..m {
        let mut configuration = 0.0;
        for i in 0..n {
            for j in 0..n {
                configuration += dmu[(k * n + i) * n + j] * qdot[i] * qdot[j];
            }
        }
        let affine: f64 = (0..n).map(|j| dz[k * n + j] * qdot[j]).sum();
        let acceleration: f64 = (0..n).map(|i| s[(k, i)] * drift[i]).sum();
        b[k] = -(configuration + affine + acceleration);
    }
    Ok((b, drift))
}

fn evaluate(model: &MechanicalModel, con: &AffineConstraint, state: &State) -> Result<Evaluation> {
    con.check_compatible(model)?;
    model.chart().check_state(state)?;
    let q = state.q.as_slice();
    let frame = model.frame(q, state.qdot.as_slice())?;
    let (p, inputs) = p_in(model, con, &frame)?;
    let cond = linalg::condition_number(&p);
    if !(cond <= linalg::COND_CAP) {
        return Err(Error::Transversality(transversality_report(q, p)));
    }
    let (b, drift) = b_in(model, con, &frame, &state.qdot)?;
    let tau = match linalg::lu_solve(&p, &b) {
        Some(tau) => tau,
        None => return Err(Error::Transversality(transversality_report(q, p))),
    };
    Ok(Evaluation {
        solve: ControlSolve {
            p,
            b,
            tau,
            cond_estimate: cond,
        },
        drift,
        inputs,
    })
}

/// `P(q)` with entries `μ^b(q)(Y^a)`; rejected when singular or
/// ill-conditioned.
pub fn p_matrix(model: &MechanicalModel, con: &AffineConstraint, q: &[f64]) -> Result<DMatrix<f64>> {
    con.transversality_check(model, q)?.into_result().map(|r| r.p)
}

/// `b(v_q) = −dφ(G(v_q))` in coordinates.
pub fn b_vector(model: &MechanicalModel, con: &AffineConstraint, state: &State) -> Result<DVector<f64>> {
    con.check_compatible(model)?;
    model.chart().check_state(state)?;
    let frame = model.frame(state.q.as_slice(), state.qdot.as_slice())?;
    Ok(b_in(model, con, &frame, &state.qdot)?.0)
}

/// Assembles and solves `P τ = b` at `state`.
pub fn solve(model: &MechanicalModel, con: &AffineConstraint, state: &State) -> Result<ControlSolve> {
    Ok(evaluate(model, con, state)?.solve)
}

/// The invariance-enforcing control `τ*(state)`.
pub fn tau_star(model: &MechanicalModel, con: &AffineConstraint, state: &State) -> Result<DVector<f64>> {
    Ok(evaluate(model, con, state)?.solve.tau)
}

/// Drift acceleration plus `Σ_a τ*_a Y^a`.
pub fn closed_loop_acceleration(
    model: &MechanicalModel,
    con: &AffineConstraint,
    state: &State,
) -> Result<DVector<f64>> {
    Ok(closed_loop(model, con, state)?.0)
}

/// Closed-loop acceleration together with the control that produced it.
pub fn closed_loop(
    model: &MechanicalModel,
    con: &AffineConstraint,
    state: &State,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let ev = evaluate(model, con, state)?;
    let accel = ev.drift + &ev.inputs * &ev.solve.tau;
    Ok((accel, ev.solve.tau))
}

/// Acceleration of the system driven by an arbitrary control `u`.
pub fn controlled_acceleration(
    model: &MechanicalModel,
    state: &State,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    model.chart().check_state(state)?;
    if u.len() != model.num_inputs() {
        return Err(Error::Dimension {
            what: "control",
            expected: model.num_inputs(),
            got: u.len(),
        });
    }
    let frame = model.frame(state.q.as_slice(), state.qdot.as_slice())?;
    let drift = model.drift_in(&frame, &state.qdot)?;
    Ok(drift + model.input_fields_in(&frame)? * u)
}

/// `dφ^b` applied to the second-order field `(q̇, accel)`:
/// `Σ ∂μ^b_i/∂q^j q̇^i q̇^j + Σ ∂Z_b/∂q^j q̇^j + Σ μ^b_i accel^i`.
pub fn phi_rate(con: &AffineConstraint, state: &State, accel: &DVector<f64>) -> Result<DVector<f64>> {
    let chart = con.chart();
    chart.check_state(state)?;
    let n = chart.dim();
    let slots = chart.point_slots(state.q.as_slice());
    let s = con.s_from_slots(&slots)?;
    let dmu = con.mu_grad_from_slots(&slots)?;
    let dz = con.z_grad_from_slots(&slots)?;
    let qd = &state.qdot;
    Ok(DVector::from_fn(con.num_constraints(), |b, _| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += dmu[(b * n + i) * n + j] * qd[i] * qd[j];
            }
            acc += dz[b * n + i] * qd[i] + s[(b, i)] * accel[i];
        }
        acc
    }))
}
