//! Export a built model to the TOML model format, read it back and compare
//! the feedback at one state.

use vanc::control::tau_star;
use vanc::expr::parse;
use vanc::modelfile::ModelFile;
use vanc::models::build_boat;
use vanc::State;

fn main() -> vanc::Result<()> {
    let (model, con) = build_boat(parse("0.3").unwrap(), parse("0.1*x").unwrap(), 1.5, 0.5)?;
    let text = ModelFile::from_parts(&model, &con, &["theta"]).to_toml_string();
    println!("{text}");

    let loaded = ModelFile::from_toml_str(&text)?.build()?;
    let s = State::new([1.0, 2.0, 0.3], [0.2, -0.4, 1.1]);
    println!("tau (built)  = {}", tau_star(&model, &con, &s)?[0]);
    println!("tau (loaded) = {}", tau_star(&loaded.model, &loaded.constraint, &s)?[0]);
    Ok(())
}
