//! Positive-weight quadrature rules on the sphere.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{gamma_half, normalize, parse_header, parse_reals, surface_area, SpherePoint};
use crate::harmonics::basis_dimension;
use crate::orthopoly::gauss_legendre_rule;
use crate::sum::{compensated_sum, CompensatedSum};

/// Relative tolerance on `Σ λ_i = |S^q|`.
pub const WEIGHT_SUM_RTOL: f64 = 1e-10;

/// Nodes `ξ_i`, weights `λ_i > 0` and the declared degree of exactness.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    q: usize,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    exactness: usize,
}

impl QuadratureRule {
    /// Checks positivity, the total mass `|S^q|` and that there are at least
    /// `dim P_⌊e/2⌋` nodes.
    pub fn new(nodes: Vec<SpherePoint>, weights: Vec<f64>, exactness: usize) -> Result<Self> {
        let Some(first) = nodes.first() else {
            return Err(Error::Invariant("quadrature rule has no nodes".into()));
        };
        let q = first.q();
        if nodes.len() != weights.len() {
            return Err(Error::Invariant(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(p) = nodes.iter().find(|p| p.q() != q) {
            return Err(Error::DimensionMismatch(q, p.q()));
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Invariant(format!(
                "non-positive weight {} at node {i}",
                weights[i]
            )));
        }
        let area = surface_area(q)?;
        let total = compensated_sum(weights.iter().copied());
        if (total - area).abs() > WEIGHT_SUM_RTOL * area {
            return Err(Error::Invariant(format!(
                "weights sum to {total:.17}, expected the sphere area {area:.17}"
            )));
        }
        if q >= 2 {
            let needed = basis_dimension(q, exactness / 2)?;
            if nodes.len() < needed {
                return Err(Error::Invariant(format!(
                    "{} nodes cannot support exactness {exactness} (needs at least {needed})",
                    nodes.len()
                )));
            }
        }
        Ok(Self {
            q,
            nodes,
            weights,
            exactness,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Declared (not verified) degree of exactness.
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ λ_i v_i` for precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch(self.len(), values.len()));
        }
        let mut acc = CompensatedSum::new();
        for (i, (w, v)) in self.weights.iter().zip(values).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            acc.add(w * v);
        }
        Ok(acc.value())
    }
}

/// Tensor product of the `(n+1)`-point Gauss–Legendre rule in `z = cos θ`
/// with the `(2n+2)`-point trapezoidal rule in the azimuth `Φ_k = kπ/(n+1)`.
///
/// `N = 2(n+1)²` nodes with weights `π ν_j/(n+1)`, exact to degree `2n+1`.
/// Nodes are ordered with the latitude index `j` outer (starting at the
/// north-most ring) and the azimuth index `k` inner.
pub fn tensor_gl_rule(n: usize) -> Result<QuadratureRule> {
    let gl = gauss_legendre_rule(n + 1)?;
    let rings = n + 1;
    let per_ring = 2 * n + 2;
    let scale = PI / rings as f64;
    let mut nodes = Vec::with_capacity(rings * per_ring);
    let mut weights = Vec::with_capacity(rings * per_ring);
    for (&z, &nu) in gl.nodes().iter().zip(gl.weights()).rev() {
        let s = (1.0 - z * z).sqrt();
        for k in 0..per_ring {
            let (sp, cp) = (k as f64 * scale).sin_cos();
            nodes.push(SpherePoint::new(vec![s * cp, s * sp, z])?);
            weights.push(scale * nu);
        }
    }
    QuadratureRule::new(nodes, weights, 2 * n + 1)
}

/// Equal-weight rule on the 6 octahedron vertices, exact to degree 3.
pub fn octahedron_rule() -> QuadratureRule {
    let mut nodes = Vec::with_capacity(6);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; 3];
            c[axis] = sign;
            nodes.push(SpherePoint::new(c).expect("unit axis"));
        }
    }
    QuadratureRule::new(nodes, vec![4.0 * PI / 6.0; 6], 3).expect("valid rule")
}

/// Equal-weight rule on the 12 icosahedron vertices, exact to degree 5.
pub fn icosahedron_rule() -> QuadratureRule {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut nodes = Vec::with_capacity(12);
    for a in [1.0, -1.0] {
        for b in [phi, -phi] {
            for v in [[0.0, a, b], [a, b, 0.0], [b, 0.0, a]] {
                nodes.push(normalize(&v).expect("nonzero vertex"));
            }
        }
    }
    QuadratureRule::new(nodes, vec![4.0 * PI / 12.0; 12], 5).expect("valid rule")
}

/// `Σ λ_i f(ξ_i)`; `f` may be evaluated concurrently, the sum is taken in
/// ascending node order.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    integrate_with(rule, f, Exec::default())
}

pub fn integrate_with<F>(rule: &QuadratureRule, f: F, exec: Exec) -> Result<f64>
where
    F: Fn(&SpherePoint) -> f64 + Sync + Send,
{
    let values = exec.map(rule.len(), |i| f(&rule.nodes[i]));
    rule.integrate_values(&values)
}

/// `∫_{S²} x^a y^b z^c dσ`: zero when any exponent is odd, otherwise
/// `2 Γ((a+1)/2) Γ((b+1)/2) Γ((c+1)/2) / Γ((a+b+c+3)/2)`.
pub fn monomial_sphere_integral(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let (ka, kb, kc, kt) = (a + 1, b + 1, c + 1, a + b + c + 3);
    if kt < 300 {
        2.0 * gamma_half(ka) * gamma_half(kb) * gamma_half(kc) / gamma_half(kt)
    } else {
        let ln = |k: u32| gamma_half(k.min(2 - k % 2)).ln() + ln_gamma_half_tail(k);
        2.0 * (ln(ka) + ln(kb) + ln(kc) - ln(kt)).exp()
    }
}

/// `ln Γ(k/2) − ln Γ(k₀/2)` where `k₀ ∈ {1, 2}` has the parity of k.
fn ln_gamma_half_tail(k: u32) -> f64 {
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    let mut acc = 0.0;
    while x < f64::from(k) / 2.0 {
        acc += f64::ln(x);
        x += 1.0;
    }
    acc
}

/// Largest absolute error of the rule over all monomials `x^a y^b z^c` with
/// `a + b + c ≤ exactness`.
pub fn verify_exactness(rule: &QuadratureRule) -> Result<f64> {
    verify_exactness_with(rule, Exec::default())
}

pub fn verify_exactness_with(rule: &QuadratureRule, exec: Exec) -> Result<f64> {
    if rule.q() != 2 {
        return Err(Error::UnsupportedDimension(rule.q()));
    }
    let e = rule.exactness();
    // powers[i][axis][p] = coord^p
    let powers: Vec<[Vec<f64>; 3]> = rule
        .nodes()
        .iter()
        .map(|node| {
            std::array::from_fn(|axis| {
                let c = node.coords()[axis];
                std::iter::successors(Some(1.0), |p| Some(p * c)).take(e + 1).collect()
            })
        })
        .collect();
    let mut monomials = Vec::new();
    for a in 0..=e {
        for b in 0..=e - a {
            for c in 0..=e - a - b {
                monomials.push((a, b, c));
            }
        }
    }
    let errors = exec.map(monomials.len(), |m| {
        let (a, b, c) = monomials[m];
        let mut acc = CompensatedSum::new();
        for (w, p) in rule.weights().iter().zip(&powers) {
            acc.add(w * p[0][a] * p[1][b] * p[2][c]);
        }
        (acc.value() - monomial_sphere_integral(a as u32, b as u32, c as u32)).abs()
    });
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// Writes `# q=<d> N=<count> exactness=<e>` then one `coords… weight` line
/// per node, 17 significant digits.
pub fn save_rule(rule: &QuadratureRule, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# q={} N={} exactness={}", rule.q, rule.len(), rule.exactness).unwrap();
    for (p, w) in rule.nodes.iter().zip(&rule.weights) {
        for c in p.coords() {
            write!(out, "{c:.16e} ").unwrap();
        }
        writeln!(out, "{w:.16e}").unwrap();
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_rule(path: impl AsRef<Path>) -> Result<QuadratureRule> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty rule file".into(),
    })??;
    let hv = parse_header(&header, &["q", "N", "exactness"])?;
    let (q, count, exactness) = (hv[0], hv[1], hv[2]);
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut values = parse_reals(&line, lineno, q + 2)?;
        let w = values.pop().expect("q + 2 values");
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-positive weight {w}"),
            });
        }
        let node = SpherePoint::new(values).map_err(|e| Error::Parse {
            line: lineno,
            message: format!("node not on the unit sphere ({e})"),
        })?;
        nodes.push(node);
        weights.push(w);
    }
    if nodes.len() != count {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares N={count} but file has {} nodes", nodes.len()),
        });
    }
    QuadratureRule::new(nodes, weights, exactness)
}
