//! Christoffel symbols and geodesic acceleration for the flat metric in
//! polar coordinates.

use vanc::expr::{parse, Expr};
use vanc::{Chart, MechanicalModel, State};

fn main() -> vanc::Result<()> {
    let e = |t: &str| parse(t).unwrap();
    let model = MechanicalModel::new(
        Chart::new(["r", "t"], [])?,
        vec![vec![e("1"), e("0")], vec![e("0"), e("r^2")]],
        Expr::constant(0.0),
        vec![Expr::constant(0.0); 2],
        vec![vec![e("1"), e("0")]],
    )?;

    let q = [2.0, 0.0];
    let gamma = model.christoffel_at(&q)?;
    let names = ["r", "t"];
    for k in 0..2 {
        for i in 0..2 {
            for j in i..2 {
                let g = gamma.get(k, i, j);
                if g != 0.0 {
                    println!("Γ^{}_{}{} = {g}", names[k], names[i], names[j]);
                }
            }
        }
    }

    let s = State::new(q, [0.5, 1.5]);
    let a = model.drift_acceleration(&s)?;
    println!("geodesic acceleration at r = 2, ṙ = 0.5, ṫ = 1.5: {:?}", a.as_slice());
    Ok(())
}
