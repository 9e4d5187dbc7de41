//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vanc::expr::{parse, Env, Expr};
use vanc::{AffineConstraint, Chart, MechanicalModel, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite difference of `e` in symbol `s`.
pub fn fd(e: &Expr, s: &str, env: &Env, h: f64) -> f64 {
    let x = env.get(s).expect("symbol bound");
    let mut plus = env.clone();
    plus.set(s, x + h);
    let mut minus = env.clone();
    minus.set(s, x - h);
    (e.eval(&plus).unwrap() - e.eval(&minus).unwrap()) / (2.0 * h)
}

/// Closed-form boat feedback `−m θ̇ (cos θ ẋ + sin θ ẏ)`.
pub fn boat_law(m: f64, s: &State) -> f64 {
    let (theta, xd, yd, thetad) = (s.q[2], s.qdot[0], s.qdot[1], s.qdot[2]);
    -m * thetad * (theta.cos() * xd + theta.sin() * yd)
}

pub fn random_state(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> State {
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let qdot: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    State::new(q, qdot)
}

pub fn exprs(row: &[&str]) -> Vec<Expr> {
    row.iter().map(|t| parse(t).unwrap()).collect()
}

pub fn env_for(chart: &Chart, s: &State) -> Env {
    chart
        .slot_names()
        .into_iter()
        .zip(chart.slots(s.q.as_slice(), s.qdot.as_slice()))
        .collect()
}

/// Transversality decided from the kernel of `S`: the columns of a basis of
/// `ker S` together with the input fields `Y^a` must span the tangent space.
pub fn kernel_oracle(s: &DMatrix<f64>, y: &DMatrix<f64>) -> bool {
    let (m, n) = s.shape();
    let mut padded = DMatrix::zeros(n, n);
    padded.rows_mut(0, m).copy_from(s);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let top = svd.singular_values.max();
    let kernel: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= 1e-9 * top)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if kernel.len() + y.ncols() != n {
        return false;
    }
    let mut cols = kernel;
    cols.extend(y.column_iter().map(|c| c.into_owned()));
    let basis = DMatrix::from_columns(&cols);
    let sv = basis.singular_values();
    sv.min() > 1e-9 * sv.max()
}

fn coefficient(rng: &mut impl Rng) -> String {
    format!("{:.3}", rng.gen_range(-1.5..1.5))
}

/// Small random model with `n ≤ 4`, `m ≤ 2`. About half of the draws are
/// built to be non-transversal by construction.
pub fn random_model(rng: &mut impl Rng) -> (MechanicalModel, AffineConstraint, Vec<f64>, &'static str) {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=2.min(n - 1));
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let chart = Chart::new(names.iter().map(String::as_str), []).unwrap();
    let kind = match rng.gen_range(0..4) {
        0 | 1 => "generic",
        2 => "input in kernel",
        _ => "dependent inputs",
    };

    let diagonal = kind == "input in kernel";
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let base = a.transpose() * a + DMatrix::identity(n, n);
    let metric: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (lo, hi) = (i.min(j), i.max(j));
                    if i == j {
                        parse(&format!("{:.4} + 0.5*sin({})^2", base[(i, i)], names[(i + 1) % n])).unwrap()
                    } else if diagonal {
                        Expr::constant(0.0)
                    } else {
                        parse(&format!("{:.4}", base[(lo, hi)] / (n as f64))).unwrap()
                    }
                })
                .collect()
        })
        .collect();

    let row = |rng: &mut ChaCha8Rng, support: &[usize]| -> Vec<Expr> {
        (0..n)
            .map(|k| {
                if support.contains(&k) {
                    let c0 = coefficient(rng);
                    let c1 = coefficient(rng);
                    let j = rng.gen_range(0..n);
                    parse(&format!("{c0} + {c1}*cos({})", names[j])).unwrap()
                } else {
                    Expr::constant(0.0)
                }
            })
            .collect()
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let all: Vec<usize> = (0..n).collect();
    let (mu, inputs) = match kind {
        "input in kernel" => {
            // constraints supported on the first m coordinates, the first
            // input on the remaining ones; with a diagonal metric μ(Y¹) = 0
            let head: Vec<usize> = (0..m).collect();
            let tail: Vec<usize> = (m..n).collect();
            let mu = (0..m).map(|_| row(&mut local, &head)).collect();
            let mut inputs = vec![row(&mut local, &tail)];
            for _ in 1..m {
                inputs.push(row(&mut local, &all));
            }
            (mu, inputs)
        }
        "dependent inputs" if m == 2 => {
            let mu = (0..m).map(|_| row(&mut local, &all)).collect();
            let f = row(&mut local, &all);
            let twice: Vec<Expr> = f.iter().map(|e| Expr::constant(2.0) * e.clone()).collect();
            (mu, vec![f, twice])
        }
        _ => {
            let mu = (0..m).map(|_| row(&mut local, &all)).collect();
            let inputs = (0..m).map(|_| row(&mut local, &all)).collect();
            (mu, inputs)
        }
    };
    let z: Vec<Expr> = (0..m)
        .map(|_| parse(&format!("{}*sin({})", coefficient(&mut local), names[0])).unwrap())
        .collect();
    let model = MechanicalModel::new(
        chart.clone(),
        metric,
        parse(&format!("{}*{}^2", coefficient(&mut local), names[n - 1])).unwrap(),
        (0..n).map(|i| parse(&format!("-0.1*{}d", names[i])).unwrap()).collect(),
        inputs,
    )
    .unwrap();
    let con = AffineConstraint::new(&chart, mu, z).unwrap();
    let q = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let kind = if kind == "dependent inputs" && m != 2 { "generic" } else { kind };
    (model, con, q, kind)
}
