//! Integrate the closed loop from a state on the constraint and from one off
//! it, and report how far the constraint value moves.

use vanc::expr::parse;
use vanc::models::build_boat;
use vanc::sim::{integrate, Settings};
use vanc::State;

fn main() -> vanc::Result<()> {
    let (model, con) = build_boat(parse("sin(y)").unwrap(), parse("cos(x)").unwrap(), 1.0, 1.0)?;
    let settings = Settings::new(10.0, 1e-3, 1000);

    let on = con.project_onto_a(&model, &State::new([0.3, -0.2, 0.4], [1.0, 0.5, 0.2]))?;
    let traj = integrate(&model, &con, &on, settings)?;
    println!("on the constraint:  max |phi| = {:.3e}", traj.max_abs_phi());

    let mut off = on.clone();
    let theta = off.q[2];
    off.qdot[0] += 0.7 * theta.sin();
    off.qdot[1] -= 0.7 * theta.cos();
    let traj = integrate(&model, &con, &off, settings)?;
    println!("off the constraint: phi(0) = {:.6}, max drift = {:.3e}", traj.phis[0][0], traj.max_drift());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        println!("  t = {t:5.2}  q = ({:+.4}, {:+.4}, {:+.4})", s.q[0], s.q[1], s.q[2]);
    }
    Ok(())
}
