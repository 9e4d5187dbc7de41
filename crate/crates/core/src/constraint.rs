//! Affine velocity constraints `φ(q, q̇) = S(q) q̇ + Z(q) = 0`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::geometry::{Chart, MechanicalModel, State};
use crate::linalg::{self, SpdFactor, COND_CAP, RANK_TOL};

/// `m` constraint one-forms `μ^b` (the rows of `S(q)`) and the affine term
/// `Z(q)`.
#[derive(Debug, Clone)]
pub struct AffineConstraint {
    chart: Chart,
    mu: Vec<Vec<Expr>>,
    z: Vec<Expr>,
    mu_prog: Vec<Program>,
    z_prog: Vec<Program>,
    // ∂μ^b_i/∂q^j at (b*n + i)*n + j
    mu_grad: Vec<Program>,
    // ∂Z_b/∂q^j at b*n + j
    z_grad: Vec<Program>,
}

/// Singular-value report of `S(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub q: Vec<f64>,
    pub rank: usize,
    pub expected: usize,
    pub singular_values: Vec<f64>,
}

impl RankReport {
    pub fn is_ok(&self) -> bool {
        self.rank == self.expected
    }
}

impl fmt::Display for RankReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} of {} at q = {:?} (singular values {:?})",
            self.rank, self.expected, self.q, self.singular_values
        )
    }
}

/// The matrix `P(q)` with entries `μ^b(Y^a)` and its conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    pub q: Vec<f64>,
    pub p: DMatrix<f64>,
    pub det: f64,
    pub cond: f64,
}

impl TransversalityReport {
    pub fn is_ok(&self) -> bool {
        self.cond.is_finite() && self.cond <= COND_CAP
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            Err(Error::Transversality(self))
        }
    }
}

impl fmt::Display for TransversalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> = self.p.row_iter().map(|r| r.iter().copied().collect()).collect();
        write!(
            f,
            "P = {:?} at q = {:?} (det {:e}, condition estimate {:e})",
            rows, self.q, self.det, self.cond
        )
    }
}

impl AffineConstraint {
    pub fn new(chart: &Chart, mu: Vec<Vec<Expr>>, z: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        let m = mu.len();
        if m == 0 {
            return Err(Error::Model("a constraint needs at least one row".into()));
        }
        if let Some(b) = mu.iter().position(|r| r.len() != n) {
            return Err(Error::Model(format!("constraint row mu[{b}] needs {n} components")));
        }
        if z.len() != m {
            return Err(Error::Model(format!("constraint has {m} rows but {} affine terms", z.len())));
        }
        let mu: Vec<Vec<Expr>> = mu.iter().map(|r| r.iter().map(Expr::fold).collect()).collect();
        let z: Vec<Expr> = z.iter().map(Expr::fold).collect();

        let mut mu_prog = Vec::with_capacity(m * n);
        let mut z_prog = Vec::with_capacity(m);
        let mut mu_grad = Vec::with_capacity(m * n * n);
        let mut z_grad = Vec::with_capacity(m * n);
        for (b, row) in mu.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                let field = format!("constraint.mu[{b}][{i}]");
                chart.require_velocity_free(&field, e)?;
                mu_prog.push(chart.compile(&field, e)?);
                for qj in chart.coordinates() {
                    mu_grad.push(chart.compile(&field, &e.diff(qj))?);
                }
            }
        }
        for (b, e) in z.iter().enumerate() {
            let field = format!("constraint.Z[{b}]");
            chart.require_velocity_free(&field, e)?;
            z_prog.push(chart.compile(&field, e)?);
            for qj in chart.coordinates() {
                z_grad.push(chart.compile(&field, &e.diff(qj))?);
            }
        }
        Ok(Self {
            chart: chart.clone(),
            mu,
            z,
            mu_prog,
            z_prog,
            mu_grad,
            z_grad,
        })
    }

    /// Builds the constraint from `S` and a vector field `X` lying in the
    /// affine distribution, with `Z = −S X`.
    pub fn from_vector_field(chart: &Chart, mu: Vec<Vec<Expr>>, x: Vec<Expr>) -> Result<Self> {
        if x.len() != chart.dim() {
            return Err(Error::Model(format!(
                "vector field X needs {} components, got {}",
                chart.dim(),
                x.len()
            )));
        }
        let z = mu
            .iter()
            .map(|row| {
                let sx = row
                    .iter()
                    .zip(&x)
                    .fold(Expr::constant(0.0), |acc, (m, xi)| acc + m.clone() * xi.clone());
                -sx
            })
            .collect();
        Self::new(chart, mu, z)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn num_constraints(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[Vec<Expr>] {
        &self.mu
    }

    pub fn z(&self) -> &[Expr] {
        &self.z
    }

    /// Fails unless the constraint lives on the model's chart and has as
    /// many rows as the model has inputs.
    pub fn check_compatible(&self, model: &MechanicalModel) -> Result<()> {
        if &self.chart != model.chart() {
            return Err(Error::Model("constraint and model are declared on different charts".into()));
        }
        if self.num_constraints() != model.num_inputs() {
            return Err(Error::Model(format!(
                "{} constraint rows but {} control inputs; the two counts must match",
                self.num_constraints(),
                model.num_inputs()
            )));
        }
        Ok(())
    }

    fn eval(programs: &[Program], slots: &[f64]) -> Result<Vec<f64>> {
        programs.iter().map(|p| p.eval(slots).map_err(Error::from)).collect()
    }

    pub(crate) fn s_from_slots(&self, slots: &[f64]) -> Result<DMatrix<f64>> {
        let vals = Self::eval(&self.mu_prog, slots)?;
        Ok(DMatrix::from_row_slice(self.num_constraints(), self.chart.dim(), &vals))
    }

    pub(crate) fn z_from_slots(&self, slots: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(Self::eval(&self.z_prog, slots)?))
    }

    /// `∂μ^b_i/∂q^j` flattened as `(b*n + i)*n + j`.
    pub(crate) fn mu_grad_from_slots(&self, slots: &[f64]) -> Result<Vec<f64>> {
        Self::eval(&self.mu_grad, slots)
    }

    /// `∂Z_b/∂q^j` flattened as `b*n + j`.
    pub(crate) fn z_grad_from_slots(&self, slots: &[f64]) -> Result<Vec<f64>> {
        Self::eval(&self.z_grad, slots)
    }

    /// `S(q)`, one row per constraint.
    pub fn s_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check_point(q)?;
        self.s_from_slots(&self.chart.point_slots(q))
    }

    pub fn z_at(&self, q: &[f64]) -> Result<DVector<f64>> {
        self.chart.check_point(q)?;
        self.z_from_slots(&self.chart.point_slots(q))
    }

    /// `φ(q, q̇) = S(q) q̇ + Z(q)`.
    pub fn phi(&self, state: &State) -> Result<DVector<f64>> {
        self.chart.check_state(state)?;
        let slots = self.chart.point_slots(state.q.as_slice());
        Ok(self.s_from_slots(&slots)? * &state.qdot + self.z_from_slots(&slots)?)
    }

    pub fn rank_check(&self, q: &[f64]) -> Result<RankReport> {
        let s = self.s_at(q)?;
        Ok(rank_report(q, &s))
    }

    /// Decides whether the affine distribution and the input distribution
    /// are transversal at `q`, through the invertibility of `P(q)`.
    pub fn transversality_check(&self, model: &MechanicalModel, q: &[f64]) -> Result<TransversalityReport> {
        self.check_compatible(model)?;
        let rank = self.rank_check(q)?;
        if !rank.is_ok() {
            return Err(Error::RankDefect(rank));
        }
        let s = self.s_at(q)?;
        let y = model.input_vector_fields(q)?;
        Ok(transversality_report(q, s * y))
    }

    /// Smallest kinetic-energy correction of `q̇` that lands on the affine
    /// distribution: `q̇ − 𝒢⁻¹Sᵀ(S𝒢⁻¹Sᵀ)⁻¹ φ`.
    pub fn project_onto_a(&self, model: &MechanicalModel, state: &State) -> Result<State> {
        self.check_compatible(model)?;
        self.chart.check_state(state)?;
        let q = state.q.as_slice();
        let rank = self.rank_check(q)?;
        if !rank.is_ok() {
            return Err(Error::RankDefect(rank));
        }
        let frame = model.frame(q, state.qdot.as_slice())?;
        let s = self.s_from_slots(&frame.slots)?;
        let phi = &s * &state.qdot + self.z_from_slots(&frame.slots)?;
        let ginv_st = frame.metric.solve_matrix(&s.transpose());
        let gram = SpdFactor::new(&s * &ginv_st).map_err(|_| Error::RankDefect(rank))?;
        let correction = ginv_st * gram.solve(&phi);
        Ok(State {
            q: state.q.clone(),
            qdot: &state.qdot - correction,
        })
    }
}

pub(crate) fn rank_report(q: &[f64], s: &DMatrix<f64>) -> RankReport {
    let singular_values = linalg::singular_values(s);
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .filter(|&&sv| top > 0.0 && sv > RANK_TOL * top)
        .count();
    RankReport {
        q: q.to_vec(),
        rank,
        expected: s.nrows(),
        singular_values,
    }
}

pub(crate) fn transversality_report(q: &[f64], p: DMatrix<f64>) -> TransversalityReport {
    TransversalityReport {
        q: q.to_vec(),
        det: p.determinant(),
        cond: linalg::condition_number(&p),
        p,
    }
}
