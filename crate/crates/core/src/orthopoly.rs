//! Orthogonal polynomials on [−1, 1]: Legendre values, Gauss–Legendre rules,
//! the Darboux kernel for the weight `(1 − t²)^(q/2 − 1)` and the Lebesgue
//! constant of the continuous Fourier projection on S^q.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Slack allowed on |t| ≤ 1 before an argument is rejected; values inside
/// the slack are clamped.
pub const ARGUMENT_TOLERANCE: f64 = 1e-12;

const NEWTON_TOLERANCE: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

fn check_argument(t: f64) -> Result<f64> {
    if t.is_nan() || t.abs() > 1.0 + ARGUMENT_TOLERANCE {
        return Err(Error::Domain(format!("argument {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Legendre polynomial `P_k(t)` normalized by `P_k(1) = 1`.
pub fn legendre_eval(k: usize, t: f64) -> Result<f64> {
    let t = check_argument(t)?;
    Ok(legendre_pair(k, t).0)
}

/// `(P_k(t), P_{k-1}(t))`, with `P_{-1} = 0`.
fn legendre_pair(k: usize, t: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// An m-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendreRule {
    /// Nodes in ascending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ ν_j f(z_j)` in ascending node order.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(z));
        }
        acc.value()
    }

    /// Integral of `f` over `[a, b]` with the affinely mapped rule.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|z| f(mid + half * z))
    }
}

/// Zeros of `P_m` and the matching positive weights, by Newton iteration from
/// the asymptotic guesses `cos(π(4j − 1)/(4m + 2))`.
pub fn gauss_legendre_rule(m: usize) -> Result<GaussLegendreRule> {
    if m == 0 {
        return Err(Error::Domain("a Gauss-Legendre rule needs at least one point".into()));
    }
    let mf = m as f64;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    // Only the nonnegative half is iterated; the rest is mirrored so the rule
    // is exactly symmetric.
    for j in 1..=m.div_ceil(2) {
        let mut x = (PI * (4.0 * j as f64 - 1.0) / (4.0 * mf + 2.0)).cos();
        if 2 * j - 1 == m {
            x = 0.0;
        } else {
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, pm1) = legendre_pair(m, x);
                let dp = mf * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if !dx.is_finite() {
                    break;
                }
                if dx.abs() <= NEWTON_TOLERANCE {
                    converged = true;
                    break;
                }
            }
            if !converged || !x.is_finite() {
                return Err(Error::Numerical(format!(
                    "Newton iteration for Gauss-Legendre node {j} of {m} did not converge"
                )));
            }
        }
        let (p, pm1) = legendre_pair(m, x);
        let dp = if x == 0.0 {
            // P'_m(0) = m P_{m-1}(0)
            mf * pm1
        } else {
            mf * (x * p - pm1) / (x * x - 1.0)
        };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // descending guess index j maps to ascending slot m - j
        nodes[m - j] = x;
        weights[m - j] = w;
        nodes[j - 1] = -x;
        weights[j - 1] = w;
    }
    Ok(GaussLegendreRule { nodes, weights })
}

/// `∫_{−1}^{1} (1 − t²)^(q/2 − 1) dt`, from the exact recurrence in the exponent.
pub fn weight_mass(q: usize) -> f64 {
    // start at α = 0 (mass 2) or α = −1/2 (mass π) and step α → α + 1
    let target = q as f64 / 2.0 - 1.0;
    let (mut alpha, mut mass) = if q.is_multiple_of(2) { (0.0, 2.0) } else { (-0.5, PI) };
    while alpha < target - 1e-9 {
        mass *= (2.0 * alpha + 2.0) / (2.0 * alpha + 3.0);
        alpha += 1.0;
    }
    mass
}

/// Reproducing-kernel data for degree-n zonal polynomials on S^q:
/// `K_n(t) = Σ_{k≤n} p_k(t) p_k(1)` with `p_k` orthonormal for
/// `w(t) = (1 − t²)^(q/2 − 1)` on [−1, 1].
///
/// The recurrence is the orthonormal one,
/// `t p_k = b_{k+1} p_{k+1} + b_k p_{k−1}`, with the closed-form symmetric
/// Jacobi coefficients at `α = β = q/2 − 1`.
#[derive(Debug, Clone)]
pub struct DarbouxKernel {
    q: usize,
    degree: usize,
    p0: f64,
    /// `b_0 = 0, b_1, …, b_n`
    offdiag: Vec<f64>,
    /// `1 / b_{k+1}`
    inv_next: Vec<f64>,
    p_at_one: Vec<f64>,
    value_at_one: f64,
}

impl DarbouxKernel {
    pub fn build(q: usize, degree: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("Darboux kernel needs q >= 2, got {q}")));
        }
        let alpha = q as f64 / 2.0 - 1.0;
        let mut offdiag = Vec::with_capacity(degree + 1);
        offdiag.push(0.0);
        for k in 1..=degree {
            let k = k as f64;
            let s = 2.0 * k + 2.0 * alpha;
            offdiag.push((k * (k + 2.0 * alpha) / ((s + 1.0) * (s - 1.0))).sqrt());
        }
        let inv_next = offdiag[1..].iter().map(|b| b.recip()).collect();
        let mut kernel = Self {
            q,
            degree,
            p0: weight_mass(q).sqrt().recip(),
            offdiag,
            inv_next,
            p_at_one: Vec::new(),
            value_at_one: 0.0,
        };
        kernel.p_at_one = kernel.orthonormal_values(1.0);
        let mut acc = CompensatedSum::new();
        for p in &kernel.p_at_one {
            acc.add(p * p);
        }
        kernel.value_at_one = acc.value();
        Ok(kernel)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `p_k(1)` for k = 0..=n.
    pub fn boundary_values(&self) -> &[f64] {
        &self.p_at_one
    }

    /// `K_n(1) = sup_{|t|≤1} |K_n(t)|`.
    pub fn value_at_one(&self) -> f64 {
        self.value_at_one
    }

    /// `p_0(t), …, p_n(t)`.
    pub fn orthonormal_values(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree + 1);
        let (mut prev, mut cur) = (0.0, self.p0);
        out.push(cur);
        for k in 0..self.degree {
            let next = (t * cur - self.offdiag[k] * prev) * self.inv_next[k];
            prev = cur;
            cur = next;
            out.push(cur);
        }
        out
    }

    /// `K_n(t)`; arguments within [`ARGUMENT_TOLERANCE`] of [−1, 1] are clamped.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.eval_clamped(check_argument(t)?))
    }

    /// `K_n(t)` after clamping `t` into [−1, 1]; for inner loops where the
    /// argument is a dot product of unit vectors.
    #[inline]
    pub fn eval_clamped(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let (mut prev, mut cur) = (0.0, self.p0);
        let mut acc = cur * self.p_at_one[0];
        for k in 0..self.degree {
            let next = (t * cur - self.offdiag[k] * prev) * self.inv_next[k];
            prev = cur;
            cur = next;
            acc += cur * self.p_at_one[k + 1];
        }
        acc
    }
}

const PANEL_POINTS: usize = 20;
const FOURIER_RTOL: f64 = 1e-8;
const FOURIER_MAX_LEVEL: usize = 12;

/// Lebesgue constant `‖S_n‖_∞ = ∫_{−1}^{1} |K_n(t)| w(t) dt` of the Fourier
/// projection on S^q.
///
/// Integrated in `t = cos θ` as `∫_0^π |K_n(cos θ)| sin^(q−1) θ dθ` over
/// Gauss panels that are split at the sign changes of `K_n`, doubling the
/// panel count until two successive levels agree to 1e-8 relative.
pub fn fourier_lebesgue_constant(q: usize, n: usize) -> Result<f64> {
    let kernel = DarbouxKernel::build(q, n)?;
    let gauss = gauss_legendre_rule(PANEL_POINTS)?;
    let integrand = |theta: f64| kernel.eval_clamped(theta.cos()).abs() * theta.sin().powi(q as i32 - 1);
    let signed = |theta: f64| kernel.eval_clamped(theta.cos());

    let base = 4 * (n + 1);
    let mut previous: Option<f64> = None;
    for level in 0..=FOURIER_MAX_LEVEL {
        let panels = base << level;
        let h = PI / panels as f64;
        let mut acc = CompensatedSum::new();
        let mut left = 0.0;
        let mut f_left = signed(left);
        for i in 1..=panels {
            let right = if i == panels { PI } else { i as f64 * h };
            let f_right = signed(right);
            if f_left * f_right < 0.0 {
                let root = bisect_root(signed, left, right, f_left);
                acc.add(gauss.integrate_on(left, root, integrand));
                acc.add(gauss.integrate_on(root, right, integrand));
            } else {
                acc.add(gauss.integrate_on(left, right, integrand));
            }
            left = right;
            f_left = f_right;
        }
        let estimate = acc.value();
        if let Some(prev) = previous {
            if (estimate - prev).abs() <= FOURIER_RTOL * estimate.abs() {
                return Ok(estimate);
            }
            if level == FOURIER_MAX_LEVEL {
                return Err(Error::RefinementCap {
                    previous: prev,
                    last: estimate,
                });
            }
        }
        previous = Some(estimate);
    }
    unreachable!("loop returns at the last level")
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
