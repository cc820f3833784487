//! Spiral point sets, covering and packing statistics of node sets, and the
//! two finite certificates for the stability hypotheses on least-squares
//! nodes: bounded cap counts and comparable consecutive weights.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{angle_from_chord, chord_from_angle, chord_sq, EvaluationSet, SpherePoint};
use crate::quadrature::QuadratureRule;

/// Spiral step constant.
pub const SPIRAL_STEP: f64 = 3.6;

/// Node sets up to this size use the exact all-pairs separation.
pub const ALL_PAIRS_LIMIT: usize = 20_000;

/// Generalized spiral on S² with `M` points: heights
/// `h_k = −1 + 2(k−1)/(M−1)` and azimuths advanced by
/// `(3.6/√M)/√(1 − h_k²)`, first and last point at the poles.
pub fn spiral_points(m: usize) -> Result<EvaluationSet> {
    if m < 2 {
        return Err(Error::Domain(format!("a spiral needs at least 2 points, got {m}")));
    }
    let step = SPIRAL_STEP / (m as f64).sqrt();
    let mut points = Vec::with_capacity(m);
    let mut phi = 0.0_f64;
    for k in 1..=m {
        let h = -1.0 + 2.0 * (k - 1) as f64 / (m - 1) as f64;
        if k == 1 || k == m {
            points.push(SpherePoint::new(vec![0.0, 0.0, h])?);
            continue;
        }
        let s = (1.0 - h * h).sqrt();
        phi += step / s;
        let (sp, cp) = phi.rem_euclid(2.0 * PI).sin_cos();
        points.push(SpherePoint::new(vec![s * cp, s * sp, h])?);
    }
    EvaluationSet::new(points, format!("spiral-{m}"))
}

fn flatten(points: &[SpherePoint]) -> (Vec<f64>, usize) {
    let dim = points.first().map_or(3, |p| p.coords().len());
    let flat = points.iter().flat_map(|p| p.coords().iter().copied()).collect();
    (flat, dim)
}

fn check_same_dimension(a: &[SpherePoint], b: &[SpherePoint]) -> Result<()> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if let Some(p) = a.iter().chain(b).find(|p| p.q() != x.q()) {
            return Err(Error::DimensionMismatch(x.q(), p.q()));
        }
        debug_assert_eq!(x.q(), y.q());
    }
    Ok(())
}

/// `max_{x ∈ eval} min_i d(x, ξ_i)`: a lower bound for the covering radius of
/// `nodes`.
pub fn mesh_norm(nodes: &[SpherePoint], eval: &EvaluationSet) -> Result<f64> {
    mesh_norm_with(nodes, eval, Exec::default())
}

pub fn mesh_norm_with(nodes: &[SpherePoint], eval: &EvaluationSet, exec: Exec) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::Domain("mesh norm of an empty node set".into()));
    }
    check_same_dimension(nodes, eval.points())?;
    let (flat, dim) = flatten(nodes);
    let nearest = exec.map(eval.len(), |i| {
        let x = eval.points()[i].coords();
        flat.chunks_exact(dim)
            .map(|node| chord_sq(node, x))
            .fold(f64::INFINITY, f64::min)
    });
    let worst = nearest.into_iter().fold(0.0, f64::max);
    Ok(angle_from_chord(worst.sqrt()))
}

/// `min_{i≠j} d(ξ_i, ξ_j)`; 0 when a point is repeated.
pub fn separation(nodes: &[SpherePoint]) -> Result<f64> {
    separation_with(nodes, Exec::default())
}

pub fn separation_with(nodes: &[SpherePoint], exec: Exec) -> Result<f64> {
    if nodes.len() <= ALL_PAIRS_LIMIT || nodes[0].q() != 2 {
        separation_all_pairs(nodes, exec)
    } else {
        separation_binned(nodes)
    }
}

/// Exact separation by comparing every pair.
pub fn separation_all_pairs(nodes: &[SpherePoint], exec: Exec) -> Result<f64> {
    check_separable(nodes)?;
    let (flat, dim) = flatten(nodes);
    let per_row = exec.map(nodes.len() - 1, |i| {
        let a = &flat[i * dim..(i + 1) * dim];
        flat[(i + 1) * dim..]
            .chunks_exact(dim)
            .map(|b| chord_sq(a, b))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(angle_from_chord(per_row.into_iter().fold(f64::INFINITY, f64::min).sqrt()))
}

/// Exact separation on S² using a uniform grid of cubes.
///
/// Disjoint caps of angular radius γ/2 give `cos(γ/2) ≥ 1 − 2/N`, so cubes
/// with side equal to that chord put the closest pair in neighbouring cells.
pub fn separation_binned(nodes: &[SpherePoint]) -> Result<f64> {
    check_separable(nodes)?;
    if nodes[0].q() != 2 {
        return Err(Error::UnsupportedDimension(nodes[0].q()));
    }
    let n = nodes.len() as f64;
    let bound = 2.0 * (1.0 - 2.0 / n).max(-1.0).acos();
    let side = chord_from_angle(bound).max(1e-12);
    let cell = |c: &[f64]| -> [i64; 3] { std::array::from_fn(|a| ((c[a] + 1.0) / side).floor() as i64) };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in nodes.iter().enumerate() {
        grid.entry(cell(p.coords())).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, p) in nodes.iter().enumerate() {
        let [cx, cy, cz] = cell(p.coords());
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(members) = grid.get(&[cx + dx, cy + dy, cz + dz]) else {
                        continue;
                    };
                    for &j in members.iter().filter(|&&j| j > i) {
                        best = best.min(chord_sq(p.coords(), nodes[j].coords()));
                    }
                }
            }
        }
    }
    if best.is_infinite() {
        return separation_all_pairs(nodes, Exec::Sequential);
    }
    Ok(angle_from_chord(best.sqrt()))
}

fn check_separable(nodes: &[SpherePoint]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::Domain("separation needs at least two points".into()));
    }
    check_same_dimension(nodes, nodes)
}

/// Largest number of nodes in a closed cap of geodesic radius `radius`
/// centred at any of `centers`.
pub fn cap_count(nodes: &[SpherePoint], radius: f64, centers: &[SpherePoint], exec: Exec) -> Result<usize> {
    check_same_dimension(nodes, centers)?;
    let limit = chord_from_angle(radius).powi(2);
    let (flat, dim) = flatten(nodes);
    let counts = exec.map(centers.len(), |i| {
        let x = centers[i].coords();
        flat.chunks_exact(dim).filter(|node| chord_sq(node, x) <= limit).count()
    });
    Ok(counts.into_iter().max().unwrap_or(0))
}

/// Sup of the number of nodes within geodesic distance `1/n`, taken over the
/// evaluation set together with the nodes themselves.
pub fn cap_count_certificate(nodes: &[SpherePoint], n: usize, eval: &EvaluationSet) -> Result<usize> {
    cap_count_certificate_with(nodes, n, eval, Exec::default())
}

pub fn cap_count_certificate_with(
    nodes: &[SpherePoint],
    n: usize,
    eval: &EvaluationSet,
    exec: Exec,
) -> Result<usize> {
    if n < 1 {
        return Err(Error::Domain("cap certificate needs n >= 1".into()));
    }
    let mut centers = eval.points().to_vec();
    centers.extend_from_slice(nodes);
    cap_count(nodes, 1.0 / n as f64, &centers, exec)
}

/// `max_i λ_i / λ_{i+1}` over weights sorted in non-increasing order.
pub fn weight_ratio(weights: &[f64]) -> Result<f64> {
    if weights.len() < 2 {
        return Err(Error::Domain("weight ratio needs at least two weights".into()));
    }
    if let Some(i) = weights.iter().position(|&w| w.is_nan() || w <= 0.0) {
        return Err(Error::Invariant(format!("non-positive weight {} at node {i}", weights[i])));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted.windows(2).map(|w| w[0] / w[1]).fold(1.0, f64::max))
}

pub fn weight_ratio_certificate(rule: &QuadratureRule) -> Result<f64> {
    weight_ratio(rule.weights())
}

/// Covering and packing statistics of a node set.
#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub node_count: usize,
    /// mesh norm δ (radians)
    pub mesh_norm: f64,
    /// separation γ (radians)
    pub separation: f64,
    pub mesh_ratio: f64,
    pub eval_size: usize,
}

impl MeshStats {
    pub const CSV_HEADER: &'static str = "N,delta,gamma,ratio,eval_size";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{}",
            self.node_count, self.mesh_norm, self.separation, self.mesh_ratio, self.eval_size
        )
    }
}

pub fn mesh_stats(nodes: &[SpherePoint], eval: &EvaluationSet) -> Result<MeshStats> {
    mesh_stats_with(nodes, eval, Exec::default())
}

pub fn mesh_stats_with(nodes: &[SpherePoint], eval: &EvaluationSet, exec: Exec) -> Result<MeshStats> {
    let delta = mesh_norm_with(nodes, eval, exec)?;
    let gamma = separation_with(nodes, exec)?;
    let ratio = if delta == 0.0 {
        0.0
    } else if gamma == 0.0 {
        f64::INFINITY
    } else {
        delta / gamma
    };
    Ok(MeshStats {
        node_count: nodes.len(),
        mesh_norm: delta,
        separation: gamma,
        mesh_ratio: ratio,
        eval_size: eval.len(),
    })
}

/// Both certificates for one rule at projection degree `degree`.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub degree: usize,
    pub node_count: usize,
    pub cap_count_sup: usize,
    pub weight_ratio_max: f64,
}

impl CertificateReport {
    pub const CSV_HEADER: &'static str = "n,N,cap_count,weight_ratio";

    pub fn compute(rule: &QuadratureRule, degree: usize, eval: &EvaluationSet) -> Result<Self> {
        Ok(Self {
            degree,
            node_count: rule.len(),
            cap_count_sup: cap_count_certificate(rule.nodes(), degree.max(1), eval)?,
            weight_ratio_max: weight_ratio_certificate(rule)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.17e}",
            self.degree, self.node_count, self.cap_count_sup, self.weight_ratio_max
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random::{random_points, seeded_rng};
    use crate::quadrature::tensor_gl_rule;
    use approx::assert_relative_eq;

    fn set(points: Vec<SpherePoint>) -> EvaluationSet {
        EvaluationSet::new(points, "test").unwrap()
    }

    #[test]
    fn spiral_basics() {
        let two = spiral_points(2).unwrap();
        assert_eq!(two.points()[0].coords(), &[0.0, 0.0, -1.0]);
        assert_eq!(two.points()[1].coords(), &[0.0, 0.0, 1.0]);
        assert!(spiral_points(1).is_err());
        let s = spiral_points(777).unwrap();
        assert_eq!(s.len(), 777);
        assert_eq!(s.label(), "spiral-777");
        for p in s.points() {
            let norm: f64 = p.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn spiral_is_quasi_uniform() {
        let scaled: Vec<f64> = [500, 2000, 8000]
            .iter()
            .map(|&m| separation(spiral_points(m).unwrap().points()).unwrap() * (m as f64).sqrt())
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo <= 1.5, "{scaled:?}");
    }

    #[test]
    fn mesh_norm_examples() {
        let north = SpherePoint::north_pole(2);
        let south = SpherePoint::south_pole(2);
        assert_relative_eq!(mesh_norm(std::slice::from_ref(&north), &set(vec![south.clone()])).unwrap(), PI);
        let spiral = spiral_points(300).unwrap();
        assert_eq!(mesh_norm(spiral.points(), &spiral).unwrap(), 0.0);
        let sub = set(spiral.points()[10..50].to_vec());
        assert_eq!(mesh_norm(spiral.points(), &sub).unwrap(), 0.0);
    }

    #[test]
    fn separation_examples() {
        let north = SpherePoint::north_pole(2);
        let south = SpherePoint::south_pole(2);
        assert_relative_eq!(separation(&[north.clone(), south]).unwrap(), PI);
        let mut rng = seeded_rng(8);
        let mut pts = random_points(2, 30, &mut rng);
        pts.push(pts[4].clone());
        assert_eq!(separation(&pts).unwrap(), 0.0);
        assert!(separation(&[north]).is_err());
    }

    #[test]
    fn binned_separation_matches_all_pairs() {
        let mut rng = seeded_rng(9);
        let sets = [
            random_points(2, 3000, &mut rng),
            spiral_points(5000).unwrap().points().to_vec(),
            tensor_gl_rule(30).unwrap().nodes().to_vec(),
        ];
        for pts in &sets {
            let exact = separation_all_pairs(pts, Exec::Sequential).unwrap();
            assert_eq!(separation_binned(pts).unwrap(), exact);
        }
        let mut dup = sets[1].clone();
        dup.push(dup[17].clone());
        assert_eq!(separation_binned(&dup).unwrap(), 0.0);
    }

    #[test]
    fn packing_covering_relation() {
        for m in [200, 1000, 3000] {
            let x = spiral_points(m).unwrap();
            let dense = spiral_points(16 * m + 1).unwrap();
            let delta = mesh_norm(x.points(), &dense).unwrap();
            let gamma = separation(x.points()).unwrap();
            assert!(gamma <= 2.0 * delta * 1.05, "m={m}: γ={gamma} δ={delta}");
        }
    }

    #[test]
    fn cap_count_examples() {
        let p = SpherePoint::north_pole(2);
        let centers = set(vec![p.clone(), SpherePoint::south_pole(2)]);
        assert_eq!(cap_count_certificate(&[p], 3, &centers).unwrap(), 1);

        let spiral = spiral_points(400).unwrap();
        assert_eq!(cap_count(spiral.points(), 0.0, spiral.points(), Exec::Sequential).unwrap(), 1);
        let tensor = tensor_gl_rule(12).unwrap();
        assert_eq!(cap_count(tensor.nodes(), 0.0, tensor.nodes(), Exec::Sequential).unwrap(), 1);
        assert!(cap_count_certificate(spiral.points(), 0, &spiral).is_err());
    }

    #[test]
    fn weight_ratio_examples() {
        assert_eq!(weight_ratio(&[2.0, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(weight_ratio(&[1.0, 4.0]).unwrap(), 4.0);
        assert!(matches!(weight_ratio(&[1.0, 0.0]), Err(Error::Invariant(_))));
        assert!(weight_ratio(&[1.0]).is_err());
        assert_eq!(weight_ratio_certificate(&crate::quadrature::octahedron_rule()).unwrap(), 1.0);
    }

    #[test]
    fn mesh_stats_examples() {
        let spiral = spiral_points(1000).unwrap();
        let stats = mesh_stats(spiral.points(), &spiral).unwrap();
        assert_eq!(stats.mesh_norm, 0.0);
        assert_eq!(stats.mesh_ratio, 0.0);
        let pair = [SpherePoint::north_pole(2), SpherePoint::south_pole(2)];
        let stats = mesh_stats(&pair, &spiral).unwrap();
        assert_relative_eq!(stats.separation, PI);
        assert_eq!(MeshStats::CSV_HEADER.split(',').count(), stats.csv_row().split(',').count());
    }
}
