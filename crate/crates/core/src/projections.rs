//! Discrete polynomial projections onto P_n: hyperinterpolation `L_n` and
//! unweighted least squares `S̃_n`, their Lebesgue functions, and sup-norm
//! estimates over finite evaluation sets.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{argmax, Exec};
use crate::geometry::{surface_area, EvaluationSet, SpherePoint};
use crate::harmonics::HarmonicBasis;
use crate::orthopoly::{fourier_lebesgue_constant, DarbouxKernel};
use crate::quadrature::QuadratureRule;
use crate::sum::CompensatedSum;

/// Diagonal entries of the triangular factor below this fraction of the
/// largest one mark the node set as unable to resolve P_n.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Evaluation points processed per dense block in the least-squares sweeps.
const BLOCK_ROWS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorTag {
    #[serde(rename = "LS")]
    LeastSquares,
    #[serde(rename = "hyper")]
    Hyperinterpolation,
    #[serde(rename = "fourier")]
    Fourier,
}

impl OperatorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorTag::LeastSquares => "LS",
            OperatorTag::Hyperinterpolation => "hyper",
            OperatorTag::Fourier => "fourier",
        }
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OperatorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LS" | "ls" => Ok(OperatorTag::LeastSquares),
            "hyper" => Ok(OperatorTag::Hyperinterpolation),
            "fourier" => Ok(OperatorTag::Fourier),
            other => Err(Error::Config(format!("unknown operator '{other}'"))),
        }
    }
}

/// An operator whose uniform norm is the supremum of a Lebesgue function.
pub trait LebesgueOperator: Sync {
    fn tag(&self) -> OperatorTag;
    fn degree(&self) -> usize;
    fn q(&self) -> usize;
    /// Number of nodes (0 for the continuous projection).
    fn node_count(&self) -> usize;
    /// Lebesgue function at each point, in order.
    fn lebesgue_values(&self, points: &[SpherePoint], exec: Exec) -> Vec<f64>;
}

/// A projection onto P_n driven by values at a fixed node set.
pub trait DiscreteProjection: Sync {
    fn nodes(&self) -> &[SpherePoint];
    /// The projection of the node data `values`, evaluated at `points`.
    fn project(&self, values: &[f64], points: &[SpherePoint], exec: Exec) -> Result<Vec<f64>>;
}

fn check_values(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::DimensionMismatch(expected, values.len()));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// `L_n f(x) = |S^{q−1}|⁻¹ Σ λ_i f(ξ_i) K_n(ξ_i·x)`.
#[derive(Debug, Clone)]
pub struct HyperinterpolationOperator {
    rule: QuadratureRule,
    kernel: DarbouxKernel,
    scale: f64,
}

impl HyperinterpolationOperator {
    /// Fails unless the rule integrates degree `2n` exactly.
    pub fn new(rule: QuadratureRule, n: usize) -> Result<Self> {
        if rule.exactness() < 2 * n {
            return Err(Error::Config(format!(
                "hyperinterpolation of degree {n} needs exactness >= {}, rule declares {}",
                2 * n,
                rule.exactness()
            )));
        }
        let kernel = DarbouxKernel::build(rule.q(), n)?;
        let scale = surface_area(rule.q() - 1)?.recip();
        Ok(Self { rule, kernel, scale })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn kernel(&self) -> &DarbouxKernel {
        &self.kernel
    }

    /// `L_n f(x)` from node values.
    pub fn apply(&self, values: &[f64], x: &SpherePoint) -> Result<f64> {
        check_values(values, self.rule.len())?;
        self.check_point(x)?;
        Ok(self.apply_unchecked(values, x))
    }

    /// `L_n f(x)` sampling `f` at the nodes.
    pub fn apply_fn(&self, f: impl Fn(&SpherePoint) -> f64, x: &SpherePoint) -> Result<f64> {
        let values: Vec<f64> = self.rule.nodes().iter().map(f).collect();
        self.apply(&values, x)
    }

    fn apply_unchecked(&self, values: &[f64], x: &SpherePoint) -> f64 {
        let mut acc = CompensatedSum::new();
        for ((node, w), v) in self.rule.nodes().iter().zip(self.rule.weights()).zip(values) {
            acc.add(w * v * self.kernel.eval_clamped(node.dot(x)));
        }
        self.scale * acc.value()
    }

    /// `|S^{q−1}|⁻¹ Σ λ_i |K_n(ξ_i·x)|`.
    pub fn lebesgue_function(&self, x: &SpherePoint) -> f64 {
        let mut acc = CompensatedSum::new();
        for (node, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            acc.add(w * self.kernel.eval_clamped(node.dot(x)).abs());
        }
        self.scale * acc.value()
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.q() != self.rule.q() {
            return Err(Error::DimensionMismatch(self.rule.q(), x.q()));
        }
        Ok(())
    }
}

impl LebesgueOperator for HyperinterpolationOperator {
    fn tag(&self) -> OperatorTag {
        OperatorTag::Hyperinterpolation
    }

    fn degree(&self) -> usize {
        self.kernel.degree()
    }

    fn q(&self) -> usize {
        self.rule.q()
    }

    fn node_count(&self) -> usize {
        self.rule.len()
    }

    fn lebesgue_values(&self, points: &[SpherePoint], exec: Exec) -> Vec<f64> {
        exec.map(points.len(), |i| self.lebesgue_function(&points[i]))
    }
}

impl DiscreteProjection for HyperinterpolationOperator {
    fn nodes(&self) -> &[SpherePoint] {
        self.rule.nodes()
    }

    fn project(&self, values: &[f64], points: &[SpherePoint], exec: Exec) -> Result<Vec<f64>> {
        check_values(values, self.rule.len())?;
        for p in points {
            self.check_point(p)?;
        }
        Ok(exec.map(points.len(), |i| self.apply_unchecked(values, &points[i])))
    }
}

/// Polynomials `I_1 … I_{d_n}` spanning P_n on S² and orthonormal for the
/// unweighted node inner product `<f, g>_N = Σ f(ξ_i) g(ξ_i)`, with the
/// kernel `H_n(x, y) = Σ_r I_r(x) I_r(y)` of the least-squares projector.
///
/// Obtained from the thin QR factorization `A = QR` of the N×d_n matrix of
/// harmonics at the nodes: `I_r(ξ_i) = Q_{ir}` and `I_r = Σ_s (R⁻¹)_{sr} Y_s`.
#[derive(Debug, Clone)]
pub struct DiscreteOrthonormalBasis {
    harmonics: HarmonicBasis,
    nodes: Vec<SpherePoint>,
    /// N × d_n, column r = I_r at the nodes.
    node_values: DMatrix<f64>,
    /// d_n × d_n upper triangular, column r = harmonic coefficients of I_r.
    representation: DMatrix<f64>,
    /// d_n × N, `R⁻¹ Qᵀ`; `H_n(x, ξ_k) = (Y(x)ᵀ · this)_k`.
    kernel_matrix: DMatrix<f64>,
}

/// Builds the discrete orthonormal basis of P_n (q = 2) over `nodes`.
pub fn build_ls_basis(nodes: &[SpherePoint], n: usize) -> Result<DiscreteOrthonormalBasis> {
    if let Some(p) = nodes.iter().find(|p| p.q() != 2) {
        return Err(Error::UnsupportedDimension(p.q()));
    }
    let harmonics = HarmonicBasis::new(n);
    let d = harmonics.dim();
    if nodes.len() < d {
        return Err(Error::TooFewNodes {
            nodes: nodes.len(),
            dim: d,
        });
    }
    let a = harmonics.eval_matrix(nodes)?;
    let qr = a.qr();
    let r = qr.r();
    let largest = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(k) = r.diagonal().iter().position(|v| v.abs() < RANK_TOLERANCE * largest) {
        return Err(Error::Degenerate(format!(
            "harmonic sample matrix is rank deficient at column {k} (|R_kk| = {:e}, max {largest:e})",
            r[(k, k)].abs()
        )));
    }
    let q = qr.q();
    let representation = r
        .solve_upper_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::Numerical("triangular factor is singular".into()))?;
    let kernel_matrix = &representation * q.transpose();
    Ok(DiscreteOrthonormalBasis {
        harmonics,
        nodes: nodes.to_vec(),
        node_values: q,
        representation,
        kernel_matrix,
    })
}

impl DiscreteOrthonormalBasis {
    pub fn degree(&self) -> usize {
        self.harmonics.degree()
    }

    /// `d_n = (n + 1)²`.
    pub fn dim(&self) -> usize {
        self.harmonics.dim()
    }

    pub fn node_values(&self) -> &DMatrix<f64> {
        &self.node_values
    }

    pub fn representation(&self) -> &DMatrix<f64> {
        &self.representation
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.q() != 2 {
            return Err(Error::UnsupportedDimension(x.q()));
        }
        Ok(())
    }

    /// `I_1(x), …, I_{d_n}(x)`.
    pub fn eval_basis(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        let y = DVector::from_vec(self.harmonics.eval(x)?);
        Ok(self.representation.tr_mul(&y).data.into())
    }

    /// `H_n(x, y)`.
    pub fn kernel(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        let (a, b) = (self.eval_basis(x)?, self.eval_basis(y)?);
        let mut acc = CompensatedSum::new();
        for (u, v) in a.iter().zip(&b) {
            acc.add(u * v);
        }
        Ok(acc.value())
    }

    /// `H_n(ξ_l, ξ_j)`, read from the orthonormal node table.
    pub fn node_kernel(&self, l: usize, j: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        for r in 0..self.dim() {
            acc.add(self.node_values[(l, r)] * self.node_values[(j, r)]);
        }
        acc.value()
    }

    /// Largest `|H_n(ξ_l, ξ_j)|` over all node pairs.
    pub fn max_node_kernel(&self) -> f64 {
        let h = &self.node_values * self.node_values.transpose();
        h.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `H_n(x, ξ_k)` for k = 1..N.
    pub fn kernel_row(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        let y = DVector::from_vec(self.harmonics.eval(x)?);
        Ok(self.kernel_matrix.tr_mul(&y).data.into())
    }

    /// Harmonic coefficients of `S̃_n f` for node data `values`.
    pub fn coefficients(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_values(values, self.nodes.len())?;
        let f = DVector::from_column_slice(values);
        Ok((&self.kernel_matrix * f).data.into())
    }

    /// `S̃_n f(x) = Σ_i f(ξ_i) H_n(x, ξ_i)`.
    pub fn ls_project(&self, values: &[f64], x: &SpherePoint) -> Result<f64> {
        let coefficients = self.coefficients(values)?;
        self.evaluate_coefficients(&coefficients, x)
    }

    fn evaluate_coefficients(&self, coefficients: &[f64], x: &SpherePoint) -> Result<f64> {
        let y = self.harmonics.eval(x)?;
        let mut acc = CompensatedSum::new();
        for (c, v) in coefficients.iter().zip(&y) {
            acc.add(c * v);
        }
        Ok(acc.value())
    }

    /// `Σ_k |H_n(x, ξ_k)|`.
    pub fn lebesgue_function(&self, x: &SpherePoint) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.lebesgue_block(std::slice::from_ref(x))[0])
    }

    /// Lebesgue function on a block of points via one dense product.
    fn lebesgue_block(&self, points: &[SpherePoint]) -> Vec<f64> {
        let d = self.dim();
        let mut y = DMatrix::zeros(points.len(), d);
        let mut row = vec![0.0; d];
        for (i, p) in points.iter().enumerate() {
            self.harmonics.eval_into(p.coords(), &mut row);
            for (j, v) in row.iter().enumerate() {
                y[(i, j)] = *v;
            }
        }
        let h = y * &self.kernel_matrix;
        (0..points.len())
            .map(|i| {
                let mut acc = CompensatedSum::new();
                for v in h.row(i).iter() {
                    acc.add(v.abs());
                }
                acc.value()
            })
            .collect()
    }
}

impl LebesgueOperator for DiscreteOrthonormalBasis {
    fn tag(&self) -> OperatorTag {
        OperatorTag::LeastSquares
    }

    fn degree(&self) -> usize {
        self.harmonics.degree()
    }

    fn q(&self) -> usize {
        2
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn lebesgue_values(&self, points: &[SpherePoint], exec: Exec) -> Vec<f64> {
        exec.map_chunks(points.len(), BLOCK_ROWS, |start, end| {
            self.lebesgue_block(&points[start..end])
        })
    }
}

impl DiscreteProjection for DiscreteOrthonormalBasis {
    fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    fn project(&self, values: &[f64], points: &[SpherePoint], exec: Exec) -> Result<Vec<f64>> {
        let coefficients = self.coefficients(values)?;
        for p in points {
            self.check_point(p)?;
        }
        let out = exec.map(points.len(), |i| self.evaluate_coefficients(&coefficients, &points[i]));
        out.into_iter().collect()
    }
}

/// The continuous Fourier projection `S_n`, whose Lebesgue function is the
/// constant `‖S_n‖_∞` by rotational invariance.
#[derive(Debug, Clone)]
pub struct FourierProjection {
    q: usize,
    degree: usize,
    norm: f64,
}

impl FourierProjection {
    pub fn new(q: usize, degree: usize) -> Result<Self> {
        Ok(Self {
            q,
            degree,
            norm: fourier_lebesgue_constant(q, degree)?,
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

impl LebesgueOperator for FourierProjection {
    fn tag(&self) -> OperatorTag {
        OperatorTag::Fourier
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn q(&self) -> usize {
        self.q
    }

    fn node_count(&self) -> usize {
        0
    }

    fn lebesgue_values(&self, points: &[SpherePoint], _exec: Exec) -> Vec<f64> {
        vec![self.norm; points.len()]
    }
}

/// Maximum of a Lebesgue function over an evaluation set; a lower bound for
/// the operator norm.
#[derive(Debug, Clone, Serialize)]
pub struct LebesgueReport {
    pub tag: OperatorTag,
    pub degree: usize,
    pub node_count: usize,
    pub eval_label: String,
    pub eval_size: usize,
    pub estimate: f64,
    pub argmax: Vec<f64>,
}

impl LebesgueReport {
    pub const CSV_HEADER: &'static str =
        "tag,n,N,eval_label,eval_size,estimate,argmax_x,argmax_y,argmax_z";

    pub fn csv_row(&self) -> String {
        let coord = |i: usize| self.argmax.get(i).map_or(String::new(), |c| format!("{c:.17e}"));
        format!(
            "{},{},{},{},{},{:.17e},{},{},{}",
            self.tag,
            self.degree,
            self.node_count,
            self.eval_label,
            self.eval_size,
            self.estimate,
            coord(0),
            coord(1),
            coord(2)
        )
    }
}

pub fn lebesgue_constant_estimate(
    op: &dyn LebesgueOperator,
    eval_set: &EvaluationSet,
) -> Result<LebesgueReport> {
    lebesgue_constant_estimate_with(op, eval_set, Exec::default())
}

/// Evaluates the Lebesgue function on every point of `eval_set` and keeps the
/// maximum (lowest index on ties).
pub fn lebesgue_constant_estimate_with(
    op: &dyn LebesgueOperator,
    eval_set: &EvaluationSet,
    exec: Exec,
) -> Result<LebesgueReport> {
    if eval_set.q() != op.q() {
        return Err(Error::DimensionMismatch(op.q(), eval_set.q()));
    }
    let values = op.lebesgue_values(eval_set.points(), exec);
    let (index, estimate) = argmax(&values)
        .ok_or_else(|| Error::Numerical("Lebesgue function is NaN everywhere".into()))?;
    Ok(LebesgueReport {
        tag: op.tag(),
        degree: op.degree(),
        node_count: op.node_count(),
        eval_label: eval_set.label().to_string(),
        eval_size: eval_set.len(),
        estimate,
        argmax: eval_set.points()[index].coords().to_vec(),
    })
}

/// `max_{x ∈ eval} |f(x) − (P f)(x)|`.
pub fn uniform_error_estimate<F>(op: &dyn DiscreteProjection, f: F, eval_set: &EvaluationSet) -> Result<f64>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    let exec = Exec::default();
    let nodes = op.nodes();
    let values = exec.map(nodes.len(), |i| f(&nodes[i]));
    let projected = op.project(&values, eval_set.points(), exec)?;
    let exact = exec.map(eval_set.len(), |i| f(&eval_set.points()[i]));
    Ok(exact
        .iter()
        .zip(&projected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
