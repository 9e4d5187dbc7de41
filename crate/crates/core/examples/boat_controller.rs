//! Evaluate the invariance-enforcing feedback for the boat in each of the
//! fixture currents and compare with the closed form −m θ̇ (cos θ ẋ + sin θ ẏ).

use vanc::control::solve;
use vanc::models::{build_boat, fixture_currents};
use vanc::State;

fn main() -> vanc::Result<()> {
    let m = 2.0;
    let s = State::new([0.4, -1.0, 0.8], [1.2, -0.3, 0.9]);
    let (theta, xd, yd, thetad) = (s.q[2], s.qdot[0], s.qdot[1], s.qdot[2]);
    let closed_form = -m * thetad * (theta.cos() * xd + theta.sin() * yd);

    for (name, c1, c2) in fixture_currents() {
        let (model, con) = build_boat(c1, c2, m, 0.5)?;
        let sol = solve(&model, &con, &s)?;
        println!(
            "{name:>12}: P = {:.6}  b = {:+.6}  tau = {:+.12}  closed form {:+.12}",
            sol.p[(0, 0)],
            sol.b[0],
            sol.tau[0],
            closed_form
        );
    }
    Ok(())
}
