//! Riemannian data of a mechanical control system in a single chart.
//!
//! A [`MechanicalModel`] holds the kinetic-energy metric, the potential, the
//! uncontrolled external force and the control coframe, all as expressions
//! over a [`Chart`]. Derivatives are taken symbolically once, at build time,
//! and compiled for evaluation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expr, Program, UnaryOp};
use crate::linalg::{SpdFactor, SpdFailure};

/// Coordinate names and named parameters of a chart.
///
/// The velocity of coordinate `x` is the symbol `xd`. Expressions are
/// evaluated against the slot layout `[q.., qdot.., parameters..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coordinates: Vec<String>,
    parameters: Vec<(String, f64)>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new<S: Into<String>>(
        coordinates: impl IntoIterator<Item = S>,
        parameters: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self> {
        let chart = Self {
            coordinates: coordinates.into_iter().map(Into::into).collect(),
            parameters: parameters.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        };
        if chart.coordinates.is_empty() {
            return Err(Error::Model("a chart needs at least one coordinate".into()));
        }
        let names = chart.slot_names();
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(Error::Model(format!("`{name}` is not a valid identifier")));
            }
            if UnaryOp::from_name(name).is_some() {
                return Err(Error::Model(format!("`{name}` shadows a function name")));
            }
            if names[..i].contains(name) {
                return Err(Error::Model(format!("symbol `{name}` is declared twice")));
            }
        }
        if let Some((k, v)) = chart.parameters.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Model(format!("parameter `{k}` = {v} is not finite")));
        }
        Ok(chart)
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn parameters(&self) -> &[(String, f64)] {
        &self.parameters
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn velocity_name(&self, i: usize) -> String {
        format!("{}d", self.coordinates[i])
    }

    pub fn velocities(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.velocity_name(i)).collect()
    }

    pub fn slot_names(&self) -> Vec<String> {
        let mut names = self.coordinates.clone();
        names.extend(self.velocities());
        names.extend(self.parameters.iter().map(|(k, _)| k.clone()));
        names
    }

    pub fn slots(&self, q: &[f64], qdot: &[f64]) -> Vec<f64> {
        let mut s = Vec::with_capacity(2 * self.dim() + self.parameters.len());
        s.extend_from_slice(q);
        s.extend_from_slice(qdot);
        s.extend(self.parameters.iter().map(|(_, v)| *v));
        s
    }

    /// Slot vector with all velocities zero.
    pub fn point_slots(&self, q: &[f64]) -> Vec<f64> {
        self.slots(q, &vec![0.0; self.dim()])
    }

    pub fn compile(&self, field: &str, e: &Expr) -> Result<Program> {
        e.compile(&self.slot_names()).map_err(|err| Error::Model(format!("{field}: {err}")))
    }

    /// Rejects expressions that mention a velocity symbol.
    pub fn require_velocity_free(&self, field: &str, e: &Expr) -> Result<()> {
        let symbols = e.symbols();
        match self.velocities().into_iter().find(|v| symbols.contains(v)) {
            Some(v) => Err(Error::Model(format!(
                "{field} must depend on configuration only but mentions `{v}`"
            ))),
            None => Ok(()),
        }
    }

    pub fn check_point(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::Dimension {
                what: "configuration",
                expected: self.dim(),
                got: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite configuration {q:?}")));
        }
        Ok(())
    }

    pub fn check_state(&self, state: &State) -> Result<()> {
        self.check_point(state.q.as_slice())?;
        if state.qdot.len() != self.dim() {
            return Err(Error::Dimension {
                what: "velocity",
                expected: self.dim(),
                got: state.qdot.len(),
            });
        }
        if state.qdot.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite velocity {:?}", state.qdot.as_slice())));
        }
        Ok(())
    }
}

/// A point of the tangent bundle in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl State {
    pub fn new(q: impl Into<Vec<f64>>, qdot: impl Into<Vec<f64>>) -> Self {
        Self {
            q: DVector::from_vec(q.into()),
            qdot: DVector::from_vec(qdot.into()),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

/// Christoffel symbols of the second kind, indexed `(k, i, j)` for
/// `Γ^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ^k_{ij} v^i w^j` for every `k`.
    pub fn contract(&self, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += self.get(k, i, j) * v[i] * w[j];
                }
            }
            acc
        })
    }
}

#[derive(Debug, Clone)]
struct Compiled {
    metric: Vec<Program>,
    // ∂g_ij/∂q^k stored at (k*n + i)*n + j
    metric_grad: Vec<Program>,
    potential_grad: Vec<Program>,
    external_force: Vec<Program>,
    input_coframe: Vec<Program>,
}

/// Metric, potential, external force and control coframe of a mechanical
/// control system.
#[derive(Debug, Clone)]
pub struct MechanicalModel {
    chart: Chart,
    metric: Vec<Vec<Expr>>,
    potential: Expr,
    external_force: Vec<Expr>,
    input_coframe: Vec<Vec<Expr>>,
    compiled: Compiled,
}

/// Per-point evaluation shared by the geometric and control computations.
pub(crate) struct Frame {
    pub slots: Vec<f64>,
    pub metric: SpdFactor,
}

impl MechanicalModel {
    pub fn new(
        chart: Chart,
        metric: Vec<Vec<Expr>>,
        potential: Expr,
        external_force: Vec<Expr>,
        input_coframe: Vec<Vec<Expr>>,
    ) -> Result<Self> {
        let n = chart.dim();
        let metric: Vec<Vec<Expr>> = metric
            .into_iter()
            .map(|row| row.iter().map(Expr::fold).collect())
            .collect();
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(Error::Model(format!("metric must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if metric[i][j] != metric[j][i] {
                    return Err(Error::Model(format!(
                        "metric is not symmetric: g[{i}][{j}] = `{}` but g[{j}][{i}] = `{}`",
                        metric[i][j], metric[j][i]
                    )));
                }
            }
        }
        if external_force.len() != n {
            return Err(Error::Model(format!(
                "external force needs {n} components, got {}",
                external_force.len()
            )));
        }
        let m = input_coframe.len();
        if m == 0 || m >= n {
            return Err(Error::Model(format!(
                "number of inputs must satisfy 0 < m < n = {n}, got m = {m}"
            )));
        }
        if let Some(row) = input_coframe.iter().position(|r| r.len() != n) {
            return Err(Error::Model(format!("input row {row} needs {n} components")));
        }

        for (i, row) in metric.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                chart.require_velocity_free(&format!("metric[{i}][{j}]"), e)?;
            }
        }
        chart.require_velocity_free("potential", &potential)?;
        for (a, row) in input_coframe.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                chart.require_velocity_free(&format!("inputs[{a}][{i}]"), e)?;
            }
        }

        let coords = chart.coordinates().to_vec();
        let mut compiled = Compiled {
            metric: Vec::with_capacity(n * n),
            metric_grad: Vec::with_capacity(n * n * n),
            potential_grad: Vec::with_capacity(n),
            external_force: Vec::with_capacity(n),
            input_coframe: Vec::with_capacity(m * n),
        };
        for (i, row) in metric.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                compiled.metric.push(chart.compile(&format!("metric[{i}][{j}]"), e)?);
            }
        }
        for qk in &coords {
            for (i, row) in metric.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    let field = format!("d metric[{i}][{j}] / d{qk}");
                    compiled.metric_grad.push(chart.compile(&field, &e.diff(qk))?);
                }
            }
        }
        chart.compile("potential", &potential)?;
        for qk in &coords {
            compiled
                .potential_grad
                .push(chart.compile("potential", &potential.diff(qk))?);
        }
        for (i, e) in external_force.iter().enumerate() {
            compiled
                .external_force
                .push(chart.compile(&format!("external_force[{i}]"), e)?);
        }
        for (a, row) in input_coframe.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                compiled
                    .input_coframe
                    .push(chart.compile(&format!("inputs[{a}][{i}]"), e)?);
            }
        }

        Ok(Self {
            chart,
            metric,
            potential,
            external_force,
            input_coframe,
            compiled,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn num_inputs(&self) -> usize {
        self.input_coframe.len()
    }

    pub fn metric(&self) -> &[Vec<Expr>] {
        &self.metric
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    pub fn external_force(&self) -> &[Expr] {
        &self.external_force
    }

    pub fn input_coframe(&self) -> &[Vec<Expr>] {
        &self.input_coframe
    }

    fn eval_all(programs: &[Program], slots: &[f64]) -> Result<Vec<f64>> {
        programs
            .iter()
            .map(|p| p.eval(slots).map_err(Error::from))
            .collect()
    }

    pub(crate) fn frame(&self, q: &[f64], qdot: &[f64]) -> Result<Frame> {
        let n = self.dim();
        let slots = self.chart.slots(q, qdot);
        let g = DMatrix::from_row_slice(n, n, &Self::eval_all(&self.compiled.metric, &slots)?);
        let metric = SpdFactor::new(g).map_err(|failure| match failure {
            SpdFailure::NotPositive(eigenvalues) => Error::NotPositiveDefinite {
                q: q.to_vec(),
                eigenvalues,
            },
            SpdFailure::IllConditioned(cond) => Error::IllConditioned { q: q.to_vec(), cond },
        })?;
        Ok(Frame { slots, metric })
    }

    fn point_frame(&self, q: &[f64]) -> Result<Frame> {
        self.chart.check_point(q)?;
        self.frame(q, &vec![0.0; self.dim()])
    }

    /// `𝒢(q)`, checked symmetric positive definite.
    pub fn metric_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.point_frame(q)?.metric.matrix().clone())
    }

    /// Spectral condition number of `𝒢(q)`.
    pub fn metric_condition(&self, q: &[f64]) -> Result<f64> {
        Ok(self.point_frame(q)?.metric.cond())
    }

    fn metric_grad(&self, slots: &[f64]) -> Result<Vec<f64>> {
        Self::eval_all(&self.compiled.metric_grad, slots)
    }

    /// Levi-Civita connection coefficients
    /// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
    pub fn christoffel_at(&self, q: &[f64]) -> Result<Christoffel> {
        let n = self.dim();
        let frame = self.point_frame(q)?;
        let dg = self.metric_grad(&frame.slots)?;
        let d = |k: usize, i: usize, j: usize| dg[(k * n + i) * n + j];

        // first kind, column (i, j) holds [ij, l] over l; only i <= j is
        // computed and mirrored so the symmetry in (i, j) is exact
        let mut first = DMatrix::zeros(n, n * n);
        for i in 0..n {
            for j in i..n {
                for l in 0..n {
                    let v = 0.5 * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                    first[(l, i * n + j)] = v;
                    first[(l, j * n + i)] = v;
                }
            }
        }
        let second = frame.metric.solve_matrix(&first);
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    data[(k * n + i) * n + j] = second[(k, i * n + j)];
                }
            }
        }
        Ok(Christoffel { n, data })
    }

    /// Index raising, `𝒢(q)⁻¹ ω`.
    pub fn sharp(&self, q: &[f64], covector: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("covector", covector.len())?;
        Ok(self.point_frame(q)?.metric.solve(covector))
    }

    /// Index lowering, `𝒢(q) v`.
    pub fn flat(&self, q: &[f64], vector: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("vector", vector.len())?;
        Ok(self.point_frame(q)?.metric.matrix() * vector)
    }

    fn check_len(&self, what: &'static str, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::Dimension {
                what,
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// `(∂V/∂q^i)_i`.
    pub fn potential_differential(&self, q: &[f64]) -> Result<DVector<f64>> {
        self.chart.check_point(q)?;
        let slots = self.chart.point_slots(q);
        Ok(DVector::from_vec(Self::eval_all(&self.compiled.potential_grad, &slots)?))
    }

    /// Metric gradient of the potential.
    pub fn grad_potential(&self, q: &[f64]) -> Result<DVector<f64>> {
        let frame = self.point_frame(q)?;
        let dv = Self::eval_all(&self.compiled.potential_grad, &frame.slots)?;
        Ok(frame.metric.solve(&DVector::from_vec(dv)))
    }

    /// Rows `f^a(q)` as an `m × n` matrix.
    pub fn input_coframe_at(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check_point(q)?;
        self.coframe_from_slots(&self.chart.point_slots(q))
    }

    pub(crate) fn coframe_from_slots(&self, slots: &[f64]) -> Result<DMatrix<f64>> {
        let vals = Self::eval_all(&self.compiled.input_coframe, slots)?;
        Ok(DMatrix::from_row_slice(self.num_inputs(), self.dim(), &vals))
    }

    /// Control vector fields `Y^a = ♯(f^a)` as the columns of an `n × m`
    /// matrix.
    pub fn input_vector_fields(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let frame = self.point_frame(q)?;
        self.input_fields_in(&frame)
    }

    pub(crate) fn input_fields_in(&self, frame: &Frame) -> Result<DMatrix<f64>> {
        let f = self.coframe_from_slots(&frame.slots)?;
        Ok(frame.metric.solve_matrix(&f.transpose()))
    }

    /// External force covector `F⁰(q, q̇)`.
    pub fn external_force_at(&self, state: &State) -> Result<DVector<f64>> {
        self.chart.check_state(state)?;
        let slots = self.chart.slots(state.q.as_slice(), state.qdot.as_slice());
        Ok(DVector::from_vec(Self::eval_all(&self.compiled.external_force, &slots)?))
    }

    /// Acceleration of the unactuated forced system,
    /// `−Γ^k_{ij} q̇^i q̇^j − (grad V)^k + (♯F⁰)^k`.
    pub fn drift_acceleration(&self, state: &State) -> Result<DVector<f64>> {
        self.chart.check_state(state)?;
        let frame = self.frame(state.q.as_slice(), state.qdot.as_slice())?;
        self.drift_in(&frame, &state.qdot)
    }

    pub(crate) fn drift_in(&self, frame: &Frame, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.dim();
        let dg = self.metric_grad(&frame.slots)?;
        let dv = Self::eval_all(&self.compiled.potential_grad, &frame.slots)?;
        let force = Self::eval_all(&self.compiled.external_force, &frame.slots)?;
        let mut rhs = DVector::zeros(n);
        for l in 0..n {
            // Σ_ij [ij, l] q̇^i q̇^j
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let c = 0.5 * (dg[(i * n + j) * n + l] + dg[(j * n + i) * n + l] - dg[(l * n + i) * n + j]);
                    quad += c * qdot[i] * qdot[j];
                }
            }
            rhs[l] = force[l] - dv[l] - quad;
        }
        Ok(frame.metric.solve(&rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid(rows: &[&[&str]]) -> Vec<Vec<Expr>> {
        rows.iter()
            .map(|r| r.iter().map(|t| parse(t).unwrap()).collect())
            .collect()
    }

    fn planar(metric: &[&[&str]], potential: &str) -> MechanicalModel {
        MechanicalModel::new(
            Chart::new(["x", "y"], []).unwrap(),
            grid(metric),
            parse(potential).unwrap(),
            vec![Expr::constant(0.0); 2],
            grid(&[&["1", "0"]]),
        )
        .unwrap()
    }

    #[test]
    fn metric_evaluation() {
        let model = planar(&[&["1", "0"], &["0", "1"]], "0");
        assert_eq!(model.metric_at(&[0.3, -2.0]).unwrap(), DMatrix::identity(2, 2));
        let model = planar(&[&["1+x^2", "0"], &["0", "1"]], "0");
        assert_eq!(
            model.metric_at(&[2.0, 0.0]).unwrap(),
            DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn indefinite_metric_is_reported() {
        let model = planar(&[&["x", "0"], &["0", "1"]], "0");
        match model.metric_at(&[-1.0, 0.0]).unwrap_err() {
            Error::NotPositiveDefinite { eigenvalues, .. } => assert!(eigenvalues.contains(&-1.0)),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn polar_christoffel_symbols() {
        let model = MechanicalModel::new(
            Chart::new(["r", "t"], []).unwrap(),
            grid(&[&["1", "0"], &["0", "r^2"]]),
            Expr::constant(0.0),
            vec![Expr::constant(0.0); 2],
            grid(&[&["1", "0"]]),
        )
        .unwrap();
        let gamma = model.christoffel_at(&[2.0, 0.7]).unwrap();
        assert!((gamma.get(0, 1, 1) + 2.0).abs() < 1e-15);
        assert!((gamma.get(1, 0, 1) - 0.5).abs() < 1e-15);
        assert!((gamma.get(1, 1, 0) - 0.5).abs() < 1e-15);
        for (k, i, j) in [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 1)] {
            assert_eq!(gamma.get(k, i, j), 0.0);
        }
    }

    #[test]
    fn potential_gradient() {
        let model = planar(&[&["1", "0"], &["0", "1"]], "x^2");
        let g = model.grad_potential(&[3.0, 1.0]).unwrap();
        assert_eq!(g.as_slice(), &[6.0, 0.0]);
        let model = planar(&[&["1", "0"], &["0", "1"]], "0");
        assert_eq!(model.grad_potential(&[3.0, 1.0]).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn geodesic_drift_on_flat_space_vanishes() {
        let model = planar(&[&["1", "0"], &["0", "1"]], "0");
        let a = model.drift_acceleration(&State::new([1.0, 2.0], [0.5, -3.0])).unwrap();
        assert_eq!(a.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn load_time_validation() {
        let chart = Chart::new(["x", "y"], []).unwrap();
        let asym = MechanicalModel::new(
            chart.clone(),
            grid(&[&["1", "x"], &["0", "1"]]),
            Expr::constant(0.0),
            vec![Expr::constant(0.0); 2],
            grid(&[&["1", "0"]]),
        );
        assert!(matches!(asym, Err(Error::Model(m)) if m.contains("symmetric")));
        let velocity_input = MechanicalModel::new(
            chart.clone(),
            grid(&[&["1", "0"], &["0", "1"]]),
            Expr::constant(0.0),
            vec![Expr::constant(0.0); 2],
            grid(&[&["xd", "0"]]),
        );
        assert!(matches!(velocity_input, Err(Error::Model(m)) if m.contains("xd")));
        let too_many = MechanicalModel::new(
            chart.clone(),
            grid(&[&["1", "0"], &["0", "1"]]),
            Expr::constant(0.0),
            vec![Expr::constant(0.0); 2],
            grid(&[&["1", "0"], &["0", "1"]]),
        );
        assert!(too_many.is_err());
        let unbound = MechanicalModel::new(
            chart,
            grid(&[&["k", "0"], &["0", "1"]]),
            Expr::constant(0.0),
            vec![Expr::constant(0.0); 2],
            grid(&[&["1", "0"]]),
        );
        assert!(matches!(unbound, Err(Error::Model(m)) if m.contains("`k`")));
    }

    #[test]
    fn chart_rejects_collisions() {
        assert!(Chart::new(["x", "xd"], []).is_err());
        assert!(Chart::new(["x"], [("xd", 1.0)]).is_err());
        assert!(Chart::new(["sin"], []).is_err());
        assert!(Chart::new(["1x"], []).is_err());
        assert!(Chart::new(["x"], [("m", f64::NAN)]).is_err());
    }
}
