//! Rank and transversality reports for an admissible and a degenerate model.

use vanc::models::{build_boat, build_degenerate_fixture};
use vanc::expr::parse;

fn main() -> vanc::Result<()> {
    let (boat, boat_con) = build_boat(parse("sin(y)").unwrap(), parse("cos(x)").unwrap(), 1.0, 1.0)?;
    let q = [0.0, 0.0, 1.0];
    println!("boat rank:       {}", boat_con.rank_check(&q)?);
    println!("boat transverse: {}", boat_con.transversality_check(&boat, &q)?);

    let (model, con) = build_degenerate_fixture()?;
    let report = con.transversality_check(&model, &[0.0, 0.0])?;
    println!("degenerate:      {report}");
    if let Err(e) = report.into_result() {
        println!("refused: {e}");
    }
    Ok(())
}
