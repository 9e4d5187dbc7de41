//! Bundled fixtures.
//!
//! The main one is a planar boat `(x, y, θ)` carrying a payload in a sea
//! current `C = (C¹(x, y), C²(x, y))`. The current acts through the forces
//!
//! ```text
//! W¹ = m d(sin²θ C¹ − sinθ cosθ C²)(q̇)
//! W² = m d(−sinθ cosθ C¹ + cos²θ C²)(q̇)
//! ```
//!
//! and a single thrust-and-turn input `u (sinθ dx − cosθ dy + dθ)` is used
//! to hold the affine constraint `sinθ ẋ − cosθ ẏ = C² cosθ − C¹ sinθ`.

use crate::constraint::AffineConstraint;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{Chart, MechanicalModel};

fn e(text: &str) -> Expr {
    parse(text).expect("fixture expressions are well formed")
}

fn sym(name: &str) -> Expr {
    Expr::symbol(name)
}

/// `Σ_j ∂f/∂q^j q̇^j` over the chart coordinates.
pub fn differential_along_velocity(chart: &Chart, f: &Expr) -> Expr {
    chart
        .coordinates()
        .iter()
        .enumerate()
        .fold(Expr::constant(0.0), |acc, (j, qj)| {
            acc + f.diff(qj) * sym(&chart.velocity_name(j))
        })
}

/// Velocity of the boat's centre that the current alone would impose,
/// `(sin²θ C¹ − sinθ cosθ C², −sinθ cosθ C¹ + cos²θ C²)`.
pub fn boat_current_drift(c1: &Expr, c2: &Expr) -> (Expr, Expr) {
    let (s, c) = (e("sin(theta)"), e("cos(theta)"));
    let a = s.clone() * s.clone() * c1.clone() - s.clone() * c.clone() * c2.clone();
    let b = -(s.clone() * c.clone() * c1.clone()) + c.clone() * c * c2.clone();
    (a, b)
}

/// Boat in a current with mass `m` and inertia `inertia`.
///
/// `c1` and `c2` may only mention `x` and `y`.
pub fn build_boat(c1: Expr, c2: Expr, m: f64, inertia: f64) -> Result<(MechanicalModel, AffineConstraint)> {
    if !(m > 0.0 && m.is_finite()) || !(inertia > 0.0 && inertia.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "boat mass and inertia must be positive, got m = {m}, I = {inertia}"
        )));
    }
    for (name, c) in [("C1", &c1), ("C2", &c2)] {
        if let Some(bad) = c.symbols().into_iter().find(|s| s != "x" && s != "y") {
            return Err(Error::Model(format!("current component {name} may depend on x, y only, found `{bad}`")));
        }
    }
    let chart = Chart::new(["x", "y", "theta"], [("m", m), ("I", inertia)])?;
    let zero = Expr::constant(0.0);

    let (a, b) = boat_current_drift(&c1, &c2);
    let w1 = sym("m") * differential_along_velocity(&chart, &a);
    let w2 = sym("m") * differential_along_velocity(&chart, &b);

    let model = MechanicalModel::new(
        chart.clone(),
        vec![
            vec![sym("m"), zero.clone(), zero.clone()],
            vec![zero.clone(), sym("m"), zero.clone()],
            vec![zero.clone(), zero.clone(), sym("I")],
        ],
        zero.clone(),
        vec![w1, w2, zero],
        vec![vec![e("sin(theta)"), e("-cos(theta)"), e("1")]],
    )?;
    let z = e("cos(theta)") * c2 - e("sin(theta)") * c1;
    let con = AffineConstraint::new(
        &chart,
        vec![vec![e("sin(theta)"), e("-cos(theta)"), Expr::constant(0.0)]],
        vec![z],
    )?;
    Ok((model, con))
}

/// Current fields used across the test and example suites.
pub fn fixture_currents() -> Vec<(&'static str, Expr, Expr)> {
    vec![
        ("still water", e("0"), e("0")),
        ("sheared", e("0.3"), e("0.1*x")),
        ("swirl", e("sin(y)"), e("cos(x)")),
    ]
}

/// Knife-edge constraint `sinθ ẋ − cosθ ẏ = 0` on a unit-inertia planar
/// body with the boat's single input.
pub fn build_linear_fixture() -> Result<(MechanicalModel, AffineConstraint)> {
    let chart = Chart::new(["x", "y", "theta"], [])?;
    let zero = Expr::constant(0.0);
    let one = Expr::constant(1.0);
    let model = MechanicalModel::new(
        chart.clone(),
        vec![
            vec![one.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), one],
        ],
        zero.clone(),
        vec![zero.clone(), zero.clone(), zero.clone()],
        vec![vec![e("sin(theta)"), e("-cos(theta)"), e("1")]],
    )?;
    let con = AffineConstraint::new(
        &chart,
        vec![vec![e("sin(theta)"), e("-cos(theta)"), zero.clone()]],
        vec![zero],
    )?;
    Ok((model, con))
}

/// Planar particle constrained along `x` but actuated along `y`: the input
/// lies in the model distribution, so no feedback can hold the constraint.
pub fn build_degenerate_fixture() -> Result<(MechanicalModel, AffineConstraint)> {
    let chart = Chart::new(["x", "y"], [])?;
    let zero = Expr::constant(0.0);
    let one = Expr::constant(1.0);
    let model = MechanicalModel::new(
        chart.clone(),
        vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
        zero.clone(),
        vec![zero.clone(), zero.clone()],
        vec![vec![zero.clone(), one.clone()]],
    )?;
    let con = AffineConstraint::new(&chart, vec![vec![one, zero.clone()]], vec![zero])?;
    Ok((model, con))
}
