//! Parse an expression, differentiate it and evaluate both.
//!
//! ```text
//! cargo run --example parse_and_diff -- "sin(theta)^2*C1 - sin(theta)*cos(theta)*C2" theta
//! ```

use vanc::expr::{parse, Env};

fn main() {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "sin(theta)^2*C1 - sin(theta)*cos(theta)*C2".into());
    let var = args.next().unwrap_or_else(|| "theta".into());

    let e = match parse(&text) {
        Ok(e) => e,
        Err(err) => {
            eprintln!("{text}\n{}^ {err}", " ".repeat(err.offset()));
            std::process::exit(2);
        }
    };
    let d = e.diff(&var);
    println!("f        = {e}");
    println!("df/d{var} = {d}");

    let env: Env = e.symbols().into_iter().map(|s| (s, 0.5)).collect();
    println!("at all symbols = 0.5: f = {}, df/d{var} = {}", e.eval(&env).unwrap(), d.eval(&env).unwrap());
}
