//! Real orthonormal spherical harmonics on S².
//!
//! `Y_{ℓ,0} = p̄_ℓ^0(z)/√(2π)`, `Y_{ℓ,m} = p̄_ℓ^m(z) cos(mφ)/√π` and
//! `Y_{ℓ,−m} = p̄_ℓ^m(z) sin(mφ)/√π` for m > 0, where `p̄_ℓ^m` are the
//! associated Legendre functions normalized to unit L² norm on [−1, 1], with
//! no Condon–Shortley phase. The `sin^m θ` factor of `p̄_ℓ^m` is carried by
//! `(x + iy)^m = sin^m θ · e^{imφ}`, so evaluation is polynomial in the
//! Cartesian coordinates and continuous at the poles.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

/// `dim P_n` on S^q: `(2n + q) Γ(n + q) / (Γ(q + 1) Γ(n + 1))`, in exact
/// integer arithmetic.
pub fn basis_dimension(q: usize, n: usize) -> Result<usize> {
    if q < 2 {
        return Err(Error::Domain(format!("basis dimension needs q >= 2, got {q}")));
    }
    let overflow = || Error::Overflow(format!("dim P_{n} on S^{q}"));
    // (2n + q)/q · C(n + q − 1, q − 1)
    let mut binom: u128 = 1;
    for i in 1..q as u128 {
        binom = binom
            .checked_mul(n as u128 + i)
            .ok_or_else(overflow)?
            / i;
    }
    let dim = binom
        .checked_mul(2 * n as u128 + q as u128)
        .ok_or_else(overflow)?
        / q as u128;
    usize::try_from(dim).map_err(|_| overflow())
}

/// Real harmonic basis of P_n on S², indexed by `r = ℓ² + ℓ + m`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    degree: usize,
    /// Recurrence factors `(a_ℓm, b_ℓm)` at flat index `ℓ(ℓ+1)/2 + m`.
    recurrence: Vec<(f64, f64)>,
    /// `p̄_m^m / sin^m θ` for m = 0..=n.
    sectoral: Vec<f64>,
}

impl HarmonicBasis {
    pub fn new(degree: usize) -> Self {
        let mut recurrence = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for l in 0..=degree {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                if l >= m + 2 {
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let lm1 = lf - 1.0;
                    let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                    recurrence.push((a, b));
                } else {
                    recurrence.push((0.0, 0.0));
                }
            }
        }
        let mut sectoral = Vec::with_capacity(degree + 1);
        let mut value = std::f64::consts::FRAC_1_SQRT_2;
        sectoral.push(value);
        for m in 1..=degree {
            let mf = m as f64;
            value *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            sectoral.push(value);
        }
        Self {
            degree,
            recurrence,
            sectoral,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(n + 1)²`.
    pub fn dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    /// Flat index of `Y_{ℓ,m}`.
    pub fn index(l: usize, m: i64) -> usize {
        debug_assert!(m.unsigned_abs() as usize <= l);
        (l * l + l).wrapping_add_signed(m as isize)
    }

    /// Inverse of [`HarmonicBasis::index`].
    pub fn degree_order(r: usize) -> (usize, i64) {
        let l = (r as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= r { l + 1 } else { l };
        (l, r as i64 - (l * l + l) as i64)
    }

    /// All `Y_r(x)`, r = 0..(n+1)².
    pub fn eval(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        if x.q() != 2 {
            return Err(Error::UnsupportedDimension(x.q()));
        }
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x.coords(), &mut out);
        Ok(out)
    }

    /// Writes all basis values at the Cartesian point `xyz` into `out`
    /// (length at least `dim()`).
    pub fn eval_into(&self, xyz: &[f64], out: &mut [f64]) {
        let (x, y, z) = (xyz[0], xyz[1], xyz[2]);
        let zonal = (2.0 * PI).sqrt().recip();
        let other = PI.sqrt().recip();
        // (cos, sin) parts of (x + iy)^m
        let (mut cm, mut sm) = (1.0, 0.0);
        for m in 0..=self.degree {
            if m > 0 {
                let c = cm * x - sm * y;
                sm = sm * x + cm * y;
                cm = c;
            }
            let mut prev = 0.0;
            let mut cur = self.sectoral[m];
            for l in m..=self.degree {
                if l == m + 1 {
                    prev = cur;
                    cur *= (2.0 * m as f64 + 3.0).sqrt() * z;
                } else if l >= m + 2 {
                    let (a, b) = self.recurrence[l * (l + 1) / 2 + m];
                    let next = a * (z * cur - b * prev);
                    prev = cur;
                    cur = next;
                }
                let base = l * l + l;
                if m == 0 {
                    out[base] = cur * zonal;
                } else {
                    out[base + m] = cur * cm * other;
                    out[base - m] = cur * sm * other;
                }
            }
        }
    }

    /// `Σ_r c_r Y_r(x)` for coefficients in basis order (missing trailing
    /// coefficients count as zero).
    pub fn evaluate_expansion(&self, coefficients: &[f64], x: &SpherePoint) -> Result<f64> {
        let values = self.eval(x)?;
        Ok(crate::sum::compensated_sum(
            coefficients.iter().zip(&values).map(|(c, v)| c * v),
        ))
    }

    /// Row `i` holds the basis at `points[i]`.
    pub fn eval_matrix(&self, points: &[SpherePoint]) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut m = DMatrix::zeros(points.len(), d);
        let mut row = vec![0.0; d];
        for (i, p) in points.iter().enumerate() {
            if p.q() != 2 {
                return Err(Error::UnsupportedDimension(p.q()));
            }
            self.eval_into(p.coords(), &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }
}

/// All real harmonics of degree ≤ n at `x`.
pub fn eval_harmonic_basis(n: usize, x: &SpherePoint) -> Result<Vec<f64>> {
    HarmonicBasis::new(n).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random::{random_point, seeded_rng};
    use crate::orthopoly::{legendre_eval, DarbouxKernel};
    use approx::assert_relative_eq;

    #[test]
    fn dimension_examples() {
        assert_eq!(basis_dimension(2, 1).unwrap(), 4);
        assert_eq!(basis_dimension(2, 15).unwrap(), 256);
        assert_eq!(basis_dimension(3, 0).unwrap(), 1);
        // q = 3: (n+1)(n+2)(2n+3)/6
        assert_eq!(basis_dimension(3, 4).unwrap(), 5 * 6 * 11 / 6);
        for n in 0..50 {
            assert_eq!(basis_dimension(2, n).unwrap(), (n + 1) * (n + 1));
        }
        assert!(basis_dimension(1, 3).is_err());
        assert!(matches!(basis_dimension(60, 1 << 40), Err(Error::Overflow(_))));
    }

    #[test]
    fn index_round_trip() {
        for r in 0..400 {
            let (l, m) = HarmonicBasis::degree_order(r);
            assert!(m.unsigned_abs() as usize <= l);
            assert_eq!(HarmonicBasis::index(l, m), r);
        }
    }

    #[test]
    fn constant_and_pole_values() {
        let mut rng = seeded_rng(1);
        let x = random_point(2, &mut rng);
        let y0 = eval_harmonic_basis(0, &x).unwrap();
        assert_relative_eq!(y0[0], (4.0 * PI).sqrt().recip(), max_relative = 1e-15);

        let pole = SpherePoint::north_pole(2);
        let y1 = eval_harmonic_basis(1, &pole).unwrap();
        assert_eq!(y1[HarmonicBasis::index(1, -1)], 0.0);
        assert_eq!(y1[HarmonicBasis::index(1, 1)], 0.0);
        assert_relative_eq!(
            y1[HarmonicBasis::index(1, 0)],
            (3.0 / (4.0 * PI)).sqrt(),
            max_relative = 1e-15
        );
        assert!(matches!(
            eval_harmonic_basis(2, &SpherePoint::north_pole(3)),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn parity() {
        let mut rng = seeded_rng(2);
        let basis = HarmonicBasis::new(12);
        for _ in 0..20 {
            let x = random_point(2, &mut rng);
            let a = basis.eval(&x).unwrap();
            let b = basis.eval(&x.antipode()).unwrap();
            for r in 0..basis.dim() {
                let (l, _) = HarmonicBasis::degree_order(r);
                let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
                assert!((a[r] - sign * b[r]).abs() <= 1e-12 * (1.0 + a[r].abs()));
            }
        }
    }

    #[test]
    fn addition_formula() {
        let mut rng = seeded_rng(4);
        let basis = HarmonicBasis::new(30);
        for _ in 0..25 {
            let x = random_point(2, &mut rng);
            let y = random_point(2, &mut rng);
            let (yx, yy) = (basis.eval(&x).unwrap(), basis.eval(&y).unwrap());
            let t = x.dot(&y);
            for l in 0..=30 {
                let lhs: f64 = (l * l..(l + 1) * (l + 1)).map(|r| yx[r] * yy[r]).sum();
                let rhs = (2.0 * l as f64 + 1.0) / (4.0 * PI) * legendre_eval(l, t).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9, "l={l}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn partial_sum_is_darboux_kernel_over_circle_length() {
        let mut rng = seeded_rng(5);
        for n in [0, 1, 7, 20] {
            let basis = HarmonicBasis::new(n);
            let kernel = DarbouxKernel::build(2, n).unwrap();
            for _ in 0..10 {
                let x = random_point(2, &mut rng);
                let y = random_point(2, &mut rng);
                let (yx, yy) = (basis.eval(&x).unwrap(), basis.eval(&y).unwrap());
                let lhs: f64 = yx.iter().zip(&yy).map(|(a, b)| a * b).sum();
                let rhs = kernel.eval_clamped(x.dot(&y)) / (2.0 * PI);
                assert!((lhs - rhs).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn continuous_at_poles() {
        let basis = HarmonicBasis::new(10);
        let at_pole = basis.eval(&SpherePoint::north_pole(2)).unwrap();
        let near = basis.eval(&SpherePoint::from_angles(1e-9, 1.3)).unwrap();
        for (a, b) in at_pole.iter().zip(&near) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
