//! Points on the unit sphere S^q, geodesic distance, surface areas, the
//! point-set text format and the seeded random utilities used across the
//! crate.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖x‖ − 1|` accepted for a point on the sphere.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector in R^(q+1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps coordinates that are already of unit length.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(format!(
                "a sphere point needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let norm = norm(&coords);
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Domain(format!("point is not on the unit sphere (norm {norm:.17})")));
        }
        Ok(Self { coords })
    }

    /// Point on S^2 from polar angle `theta` (from +z) and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            coords: vec![st * cp, st * sp, ct],
        }
    }

    pub fn north_pole(q: usize) -> Self {
        let mut coords = vec![0.0; q + 1];
        coords[q] = 1.0;
        Self { coords }
    }

    pub fn south_pole(q: usize) -> Self {
        let mut coords = vec![0.0; q + 1];
        coords[q] = -1.0;
        Self { coords }
    }

    /// Dimension q of the sphere the point lives on.
    pub fn q(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.coords, &other.coords)
    }
}

/// A finite proxy for the whole sphere used to approximate suprema.
#[derive(Debug, Clone)]
pub struct EvaluationSet {
    points: Vec<SpherePoint>,
    label: String,
}

impl EvaluationSet {
    pub fn new(points: Vec<SpherePoint>, label: impl Into<String>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Domain("evaluation set is empty".into()));
        };
        let q = first.q();
        if let Some(p) = points.iter().find(|p| p.q() != q) {
            return Err(Error::DimensionMismatch(q, p.q()));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn q(&self) -> usize {
        self.points[0].q()
    }

    /// Union of two sets (points of `self` first).
    pub fn union(&self, other: &EvaluationSet) -> Result<Self> {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Self::new(points, format!("{}+{}", self.label, other.label))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow for huge inputs
    let scale = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|c| (c / scale).powi(2)).sum::<f64>().sqrt()
}

/// Great-circle distance `arccos(a·b)` with the dot product clamped to [−1, 1].
pub fn geodesic_distance(a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
    if a.coords.len() != b.coords.len() {
        return Err(Error::DimensionMismatch(a.q(), b.q()));
    }
    Ok(a.dot(b).clamp(-1.0, 1.0).acos())
}

/// Squared Euclidean (chord) distance between two coordinate slices.
#[inline]
pub(crate) fn chord_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Geodesic angle subtended by a chord of the given length.
#[inline]
pub(crate) fn angle_from_chord(chord: f64) -> f64 {
    2.0 * (0.5 * chord).clamp(0.0, 1.0).asin()
}

/// Chord length subtending the given geodesic angle.
#[inline]
pub(crate) fn chord_from_angle(angle: f64) -> f64 {
    2.0 * (0.5 * angle.clamp(0.0, PI)).sin()
}

/// Γ(k/2) for a positive integer k, by the exact half-integer recurrences.
pub(crate) fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half needs k >= 1");
    let (mut value, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = f64::from(k) / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Surface measure of S^d, `2π^((d+1)/2) / Γ((d+1)/2)`.
pub fn surface_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain(format!("sphere dimension must be >= 1, got {d}")));
    }
    let half = (d as f64 + 1.0) / 2.0;
    Ok(2.0 * PI.powf(half) / gamma_half(d as u32 + 1))
}

/// Scales `v` to unit length.
pub fn normalize(v: &[f64]) -> Result<SpherePoint> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !n.is_finite() {
        return Err(Error::Domain("vector has non-finite entries".into()));
    }
    SpherePoint::new(v.iter().map(|c| c / n).collect())
}

/// Writes points as `# q=<d> N=<count>` followed by one point per line.
pub fn write_points(path: impl AsRef<Path>, points: &[SpherePoint]) -> Result<()> {
    let q = points.first().map_or(2, SpherePoint::q);
    let mut out = String::new();
    writeln!(out, "# q={q} N={}", points.len()).unwrap();
    for p in points {
        let line: Vec<String> = p.coords.iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Parses `key=value` tokens out of a `# ...` header line.
pub(crate) fn parse_header(line: &str, keys: &[&str]) -> Result<Vec<usize>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing '#' header".into(),
        })?;
    let mut values = Vec::with_capacity(keys.len());
    for key in keys {
        let value = body
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header lacks '{key}='"),
            })?;
        values.push(value.parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("bad integer for '{key}': {value}"),
        })?);
    }
    Ok(values)
}

pub(crate) fn parse_reals(line: &str, lineno: usize, expected: usize) -> Result<Vec<f64>> {
    let values = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: {tok}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {expected} values, found {}", values.len()),
        });
    }
    Ok(values)
}

/// Reads a file written by [`write_points`].
pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<SpherePoint>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file".into(),
    })??;
    let hv = parse_header(&header, &["q", "N"])?;
    let (q, count) = (hv[0], hv[1]);
    let mut points = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let coords = parse_reals(&line, lineno, q + 1)?;
        let p = SpherePoint::new(coords).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        points.push(p);
    }
    if points.len() != count {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares N={count} but file has {} points", points.len()),
        });
    }
    Ok(points)
}

/// Seeded generators and random geometric objects for tests and experiments.
pub mod random {
    use super::*;

    pub type TestRng = ChaCha8Rng;

    pub fn seeded_rng(seed: u64) -> TestRng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Uniformly distributed point on S^q.
    pub fn random_point<R: Rng + ?Sized>(q: usize, rng: &mut R) -> SpherePoint {
        loop {
            let v: Vec<f64> = (0..=q).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(p) = normalize(&v) {
                return p;
            }
        }
    }

    pub fn random_points<R: Rng + ?Sized>(q: usize, count: usize, rng: &mut R) -> Vec<SpherePoint> {
        (0..count).map(|_| random_point(q, rng)).collect()
    }

    /// Coefficients uniform in [−1, 1], e.g. for random polynomials in a
    /// harmonic basis.
    pub fn random_coefficients<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| rng.random_range(-1.0..=1.0)).collect()
    }

    /// Haar-distributed orthogonal matrix of size `dim`, with determinant +1.
    pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        q
    }

    pub fn rotate(rotation: &DMatrix<f64>, p: &SpherePoint) -> SpherePoint {
        let v = rotation * nalgebra::DVector::from_column_slice(p.coords());
        normalize(v.as_slice()).expect("rotation preserves the norm")
    }
}

#[cfg(test)]
mod tests {
    use super::random::*;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn e(q: usize, i: usize) -> SpherePoint {
        let mut c = vec![0.0; q + 1];
        c[i] = 1.0;
        SpherePoint::new(c).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e1 = e(2, 0);
        assert_eq!(geodesic_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(geodesic_distance(&e1, &e1.antipode()).unwrap(), PI);
        assert_relative_eq!(geodesic_distance(&e1, &e(2, 1)).unwrap(), PI / 2.0);
        assert!(matches!(
            geodesic_distance(&e1, &e(3, 0)),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn clamped_near_coincident() {
        let a = normalize(&[1.0, 1e-9, 0.0]).unwrap();
        let d = geodesic_distance(&a, &a).unwrap();
        assert!(d.is_finite());
    }

    #[test]
    fn surface_area_examples() {
        assert_relative_eq!(surface_area(1).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(surface_area(2).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(surface_area(3).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert!(matches!(surface_area(0), Err(Error::Domain(_))));
    }

    #[test]
    fn surface_area_slice_recurrence() {
        // |S^d| = |S^(d-1)| ∫ (1-t²)^((d-2)/2) dt, integrated in t = cos θ as
        // ∫_0^π sin^(d-1) θ dθ (analytic in θ, so Gauss converges fast).
        let gauss = crate::orthopoly::gauss_legendre_rule(100).unwrap();
        for d in 2..=9 {
            let slice = gauss.integrate_on(0.0, PI, |t| t.sin().powi(d as i32 - 1));
            let lhs = surface_area(d).unwrap();
            let rhs = surface_area(d - 1).unwrap() * slice;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn gamma_half_values() {
        assert_relative_eq!(gamma_half(1), PI.sqrt());
        assert_relative_eq!(gamma_half(2), 1.0);
        assert_relative_eq!(gamma_half(5), 0.75 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(10), 24.0);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[2.0, 0.0, 0.0]).unwrap().coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(normalize(&[0.0, 0.0, -3.0]).unwrap().coords(), &[0.0, 0.0, -1.0]);
        assert_eq!(normalize(&[1.0; 4]).unwrap().coords(), &[0.5; 4]);
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn rejects_bad_points() {
        assert!(SpherePoint::new(vec![1.0]).is_err());
        assert!(SpherePoint::new(vec![1.0, 1.0]).is_err());
        assert!(EvaluationSet::new(vec![], "empty").is_err());
    }

    #[test]
    fn point_file_round_trip() {
        let mut rng = seeded_rng(3);
        let pts = random_points(2, 17, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.txt");
        write_points(&path, &pts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# q=2 N=17\n"));
        assert_eq!(read_points(&path).unwrap(), pts);

        std::fs::write(&path, "# q=2 N=2\n1 0 0\n").unwrap();
        assert!(matches!(read_points(&path), Err(Error::Parse { line: 1, .. })));
        std::fs::write(&path, "# q=2 N=1\n1 0 0.5\n").unwrap();
        assert!(matches!(read_points(&path), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn triangle_inequality(seed in any::<u64>(), q in 1usize..5) {
            let mut rng = seeded_rng(seed);
            let [a, b, c] = [0, 1, 2].map(|_| random_point(q, &mut rng));
            let ab = geodesic_distance(&a, &b).unwrap();
            let bc = geodesic_distance(&b, &c).unwrap();
            let ac = geodesic_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((0.0..=PI).contains(&ab));
            prop_assert_eq!(ab, geodesic_distance(&b, &a).unwrap());
        }

        #[test]
        fn rotation_invariance(seed in any::<u64>(), q in 1usize..5) {
            let mut rng = seeded_rng(seed);
            let a = random_point(q, &mut rng);
            let b = random_point(q, &mut rng);
            let r = random_rotation(q + 1, &mut rng);
            let d0 = geodesic_distance(&a, &b).unwrap();
            let d1 = geodesic_distance(&rotate(&r, &a), &rotate(&r, &b)).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-10);
        }
    }
}
