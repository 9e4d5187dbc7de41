//! Command-line front end: `check`, `simulate` and `control-at`.
//!
//! Results go to standard output as one JSON record; diagnostics go to
//! standard error. Exit codes: 0 ok, 1 mathematical failure (violation or
//! aborted integration), 2 usage or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::control;
use crate::error::Error;
use crate::geometry::State;
use crate::modelfile::{self, LoadedModel};
use crate::sim::{self, Settings, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vanc", version, about = "Invariance-enforcing feedback for affine velocity constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the rank and transversality hypotheses on a set of points.
    Check(CheckArgs),
    /// Integrate the closed loop and write a CSV trajectory.
    Simulate(SimulateArgs),
    /// Print P, b and the control at one state.
    ControlAt(ControlAtArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub model: PathBuf,
    /// Point to check, comma separated; may be repeated.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Uniform grid `lo,hi,count` over every coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub qdot0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
    /// Project the initial velocity onto the constraint first.
    #[arg(long)]
    pub project: bool,
    /// Wrap angle coordinates to (-pi, pi] in the CSV.
    #[arg(long)]
    pub wrap_angles: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ControlAtArgs {
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, allow_hyphen_values = true)]
    pub qdot: String,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Model(_) | Error::InvalidArgument(_) | Error::Dimension { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::ControlAt(a) => cmd_control_at(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn parse_vector(flag: &str, text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("--{flag}: `{t}` is not a finite number")))
        })
        .collect()
}

fn parse_sized(flag: &str, text: &str, n: usize) -> Result<Vec<f64>, Error> {
    let v = parse_vector(flag, text)?;
    if v.len() != n {
        return Err(Error::InvalidArgument(format!(
            "--{flag} needs {n} components, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn grid_points(spec: &str, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::InvalidArgument(format!("--grid expects lo,hi,count, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 || !(lo.is_finite() && hi.is_finite()) || (count > 1 && hi <= lo) {
        return Err(bad());
    }
    let ticks: Vec<f64> = (0..count)
        .map(|i| if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect();
    let total = count
        .checked_pow(n as u32)
        .filter(|&t| t <= 1_000_000)
        .ok_or_else(|| Error::InvalidArgument("--grid has too many points".into()))?;
    Ok((0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; n];
            for slot in p.iter_mut().rev() {
                *slot = ticks[idx % count];
                idx /= count;
            }
            p
        })
        .collect())
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!(m.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vector_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

fn print_record(out: &mut dyn Write, record: &Value) -> Result<(), Error> {
    writeln!(out, "{}", serde_json::to_string_pretty(record).expect("json values serialize"))
        .map_err(|e| Error::InvalidArgument(format!("cannot write output: {e}")))
}

fn load(path: &Path) -> Result<LoadedModel, Error> {
    modelfile::load(path)
}

fn check_point(loaded: &LoadedModel, q: &[f64]) -> Value {
    let con = &loaded.constraint;
    let rank = match con.rank_check(q) {
        Ok(r) => r,
        Err(e) => return json!({ "q": q, "ok": false, "error": e.to_string() }),
    };
    let mut record = json!({
        "q": q,
        "rank": rank.rank,
        "expected_rank": rank.expected,
        "singular_values": rank.singular_values,
        "rank_ok": rank.is_ok(),
    });
    if !rank.is_ok() {
        record["ok"] = json!(false);
        record["transversal"] = json!(false);
        return record;
    }
    match con.transversality_check(&loaded.model, q) {
        Ok(report) => {
            record["transversal"] = json!(report.is_ok());
            record["P"] = matrix_json(&report.p);
            record["det"] = json!(report.det);
            record["cond"] = json!(report.cond);
            record["ok"] = json!(report.is_ok());
        }
        Err(e) => {
            record["ok"] = json!(false);
            record["error"] = json!(e.to_string());
        }
    }
    record
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let loaded = load(&args.model)?;
    let n = loaded.model.dim();
    let mut points = Vec::new();
    for p in &args.points {
        points.push(parse_sized("point", p, n)?);
    }
    if let Some(g) = &args.grid {
        points.extend(grid_points(g, n)?);
    }
    if points.is_empty() {
        points = grid_points("-1,1,3", n)?;
    }
    let records: Vec<Value> = points.iter().map(|q| check_point(&loaded, q)).collect();
    let all_ok = records.iter().all(|r| r["ok"] == json!(true));
    let violations = records.iter().filter(|r| r["ok"] != json!(true)).count();
    print_record(
        out,
        &json!({
            "model": args.model.display().to_string(),
            "points": records,
            "violations": violations,
            "all_ok": all_ok,
        }),
    )?;
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let w = a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    // (a + π) mod 2π lands in [0, 2π); shift -π to π
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// CSV rendering of a trajectory: `t, q.., qdot.., tau.., phi..` with 17
/// significant digits.
pub fn trajectory_csv(loaded: &LoadedModel, traj: &Trajectory, wrap_angles: bool) -> String {
    let chart = loaded.model.chart();
    let m = loaded.constraint.num_constraints();
    let mut header = vec!["t".to_string()];
    header.extend(chart.coordinates().iter().cloned());
    header.extend(chart.velocities());
    header.extend((1..=m).map(|b| format!("tau{b}")));
    header.extend((1..=m).map(|b| format!("phi{b}")));
    let mut csv = header.join(",");
    csv.push('\n');
    for k in 0..traj.len() {
        let mut q: Vec<f64> = traj.states[k].q.iter().copied().collect();
        if wrap_angles {
            for &i in &loaded.angles {
                q[i] = wrap_angle(q[i]);
            }
        }
        let row = std::iter::once(traj.times[k])
            .chain(q)
            .chain(traj.states[k].qdot.iter().copied())
            .chain(traj.controls[k].iter().copied())
            .chain(traj.phis[k].iter().copied())
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        csv.push_str(&row);
        csv.push('\n');
    }
    csv
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let settings = Settings::new(args.t_end, args.dt, args.sample_every);
    settings.validate()?;
    let loaded = load(&args.model)?;
    let n = loaded.model.dim();
    let mut state0 = State::new(parse_sized("q0", &args.q0, n)?, parse_sized("qdot0", &args.qdot0, n)?);
    if args.project {
        state0 = loaded.constraint.project_onto_a(&loaded.model, &state0)?;
    }

    let started = Instant::now();
    let (traj, failure) = sim::integrate_partial(&loaded.model, &loaded.constraint, &state0, settings);
    let runtime = started.elapsed().as_secs_f64();

    std::fs::write(&args.out, trajectory_csv(&loaded, &traj, args.wrap_angles))
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", args.out.display())))?;

    let mut summary = json!({
        "csv": args.out.display().to_string(),
        "projected": args.project,
        "samples": traj.len(),
        "t_final": traj.times.last(),
        "qdot0": vector_json(&state0.qdot),
        "phi0": traj.phis.first().map(vector_json),
        "drift_report": traj.drift_report,
        "max_drift": traj.max_drift(),
        "max_abs_phi": traj.max_abs_phi(),
        "runtime_s": runtime,
    });
    let code = match failure {
        None => EXIT_OK,
        Some(e) => {
            let last_good = match &e {
                Error::IntegrationAborted { last_good_sample, .. } | Error::NonFinite { last_good_sample, .. } => {
                    Some(*last_good_sample)
                }
                _ => None,
            };
            summary["error"] = json!(e.to_string());
            summary["last_good_sample"] = json!(last_good);
            exit_code(&e)
        }
    };
    print_record(out, &summary)?;
    Ok(code)
}

pub fn cmd_control_at(args: &ControlAtArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let loaded = load(&args.model)?;
    let n = loaded.model.dim();
    let state = State::new(parse_sized("q", &args.q, n)?, parse_sized("qdot", &args.qdot, n)?);
    match control::solve(&loaded.model, &loaded.constraint, &state) {
        Ok(s) => {
            print_record(
                out,
                &json!({
                    "q": vector_json(&state.q),
                    "qdot": vector_json(&state.qdot),
                    "P": matrix_json(&s.p),
                    "b": vector_json(&s.b),
                    "tau": vector_json(&s.tau),
                    "cond_estimate": s.cond_estimate,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Err(Error::Transversality(report)) => {
            print_record(
                out,
                &json!({
                    "error": "transversality violation",
                    "q": report.q,
                    "P": matrix_json(&report.p),
                    "det": report.det,
                    "cond": report.cond,
                }),
            )?;
            Ok(EXIT_FAILURE)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("q", "1, -2.5,3e-1").unwrap(), vec![1.0, -2.5, 0.3]);
        assert!(parse_vector("q", "1,,2").is_err());
        assert!(parse_vector("q", "nan").is_err());
        assert!(parse_sized("q", "1,2", 3).is_err());
    }

    #[test]
    fn grid_enumeration() {
        let pts = grid_points("-1,1,3", 2).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![-1.0, -1.0]);
        assert_eq!(pts[1], vec![-1.0, 0.0]);
        assert_eq!(pts[8], vec![1.0, 1.0]);
        assert!(grid_points("1,0,3", 2).is_err());
        assert!(grid_points("0,1", 2).is_err());
    }

    #[test]
    fn angle_wrapping() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.5), 0.5);
        assert!((wrap_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Model("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::NonFinite { t: 0.0, last_good_sample: 0 }), EXIT_FAILURE);
    }
}
