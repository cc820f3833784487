use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sphereproj::geometry::random::{random_coefficients, seeded_rng};
use sphereproj::harmonics::HarmonicBasis;
use sphereproj::pointsets::{mesh_stats, spiral_points, CertificateReport, MeshStats};
use sphereproj::projections::{
    build_ls_basis, lebesgue_constant_estimate, DiscreteProjection, FourierProjection,
    HyperinterpolationOperator, LebesgueReport, OperatorTag,
};
use sphereproj::quadrature::{load_rule, save_rule, tensor_gl_rule, verify_exactness, QuadratureRule};
use sphereproj::{Exec, SpherePoint};

use crate::config::ExperimentConfig;
use crate::output::{write_file, Table};
use crate::CliError;

#[derive(Serialize)]
struct NodeRecord {
    index: usize,
    j: usize,
    k: usize,
    lat_deg: f64,
    lon_deg: f64,
    x: f64,
    y: f64,
    z: f64,
    weight: f64,
}

/// Writes `nodes_n<n>.rule` and the plot table `nodes_n<n>.csv` per degree.
pub fn cmd_nodes(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    config.require_sphere("the tensor Gauss-Legendre rule")?;
    std::fs::create_dir_all(&config.out)?;
    let mut written = Vec::new();
    for &n in &config.degrees {
        let rule = tensor_gl_rule(n)?;
        let rule_path = config.out.join(format!("nodes_n{n}.rule"));
        save_rule(&rule, &rule_path)?;
        written.push(rule_path);

        let per_ring = 2 * n + 2;
        let mut table = Table::new("index,j,k,lat_deg,lon_deg,x,y,z,weight");
        for (index, (p, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let [x, y, z] = [p.coords()[0], p.coords()[1], p.coords()[2]];
            let record = NodeRecord {
                index,
                j: index / per_ring + 1,
                k: index % per_ring,
                lat_deg: z.asin().to_degrees(),
                lon_deg: y.atan2(x).to_degrees(),
                x,
                y,
                z,
                weight: w,
            };
            table.push(
                format!(
                    "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    record.index, record.j, record.k, record.lat_deg, record.lon_deg, x, y, z, w
                ),
                record,
            );
        }
        let stem = format!("nodes_n{n}");
        written.push(table.write(config, &stem, &format!("N={}", rule.len()))?);
        let script = format!(
            "set datafile separator ','\nset xlabel 'longitude (deg)'\nset ylabel 'latitude (deg)'\n\
             set title 'tensor Gauss-Legendre nodes, n={n}, N={}'\nplot '{stem}.csv' using 5:4 with points pt 7 ps 0.4 notitle\n",
            rule.len()
        );
        let script_path = config.out.join(format!("{stem}.gp"));
        write_file(&script_path, &script)?;
        written.push(script_path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct MeshRecord {
    n: usize,
    #[serde(flatten)]
    stats: MeshStats,
}

/// `meshstats.csv` (δ, γ, δ/γ per degree) and `certificates.csv`.
pub fn cmd_meshstats(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    config.require_sphere("mesh statistics of tensor nodes")?;
    let mut stats_table = Table::new("n,N,delta,gamma,ratio,eval_size");
    let mut cert_table = Table::new(CertificateReport::CSV_HEADER);
    for &n in &config.degrees {
        let rule = tensor_gl_rule(n)?;
        let eval = spiral_points(config.eval_mult * rule.len())?;
        let stats = mesh_stats(rule.nodes(), &eval)?;
        stats_table.push(format!("{n},{}", stats.csv_row()), MeshRecord { n, stats });
        let cert = CertificateReport::compute(&rule, n, &eval)?;
        cert_table.push(cert.csv_row(), cert);
    }
    let mut written = vec![
        stats_table.write(config, "meshstats", "eval=spiral")?,
        cert_table.write(config, "certificates", "eval=spiral radius=1/n")?,
    ];
    let script = "set datafile separator ','\nset logscale xy\nset xlabel 'n'\n\
                  plot 'meshstats.csv' using 1:3 with linespoints title 'mesh norm', \
                  '' using 1:4 with linespoints title 'separation', \
                  '' using 1:5 with linespoints title 'mesh ratio'\n";
    let script_path = config.out.join("meshstats.gp");
    write_file(&script_path, script)?;
    written.push(script_path);
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct LebesgueRow {
    pub operator: OperatorTag,
    pub n: usize,
    pub node_count: usize,
    pub estimate: f64,
    pub estimate_over_sqrt_n: f64,
    pub sqrt_n: f64,
}

/// Lebesgue-constant sweep: `lebesgue.csv`, `lebesgue_reports.csv` and a
/// gnuplot script. Returns the rows in output order.
pub fn cmd_lebesgue(config: &ExperimentConfig, operators: &[OperatorTag]) -> Result<Vec<LebesgueRow>, CliError> {
    if operators.is_empty() {
        return Err(CliError::Usage("no operators selected".into()));
    }
    let discrete = operators.iter().any(|o| *o != OperatorTag::Fourier);
    if discrete {
        config.require_sphere("hyperinterpolation and least squares")?;
    }
    if operators.contains(&OperatorTag::LeastSquares) {
        if let Some(&n) = config.degrees.iter().find(|&&n| n > config.max_ls_degree) {
            return Err(CliError::Usage(format!(
                "least-squares degree {n} exceeds the limit --max-ls-degree {} (a QR of a {}x{} matrix); raise the limit to proceed",
                config.max_ls_degree,
                2 * (n + 1) * (n + 1),
                (n + 1) * (n + 1)
            )));
        }
    }

    let mut rows = Vec::new();
    let mut table = Table::new("operator,n,N,estimate,estimate_over_sqrt_n,sqrt_n");
    let mut reports = Table::new(LebesgueReport::CSV_HEADER);
    for &n in &config.degrees {
        let rule = if discrete { Some(tensor_gl_rule(n)?) } else { None };
        let eval = match &rule {
            Some(rule) => Some(spiral_points(config.eval_mult * rule.len())?),
            None => None,
        };
        for &op in operators {
            let report = match (op, &rule, &eval) {
                (OperatorTag::Fourier, _, _) => {
                    let fourier = FourierProjection::new(config.q, n)?;
                    LebesgueReport {
                        tag: OperatorTag::Fourier,
                        degree: n,
                        node_count: 0,
                        eval_label: "continuous".into(),
                        eval_size: 0,
                        estimate: fourier.norm(),
                        argmax: Vec::new(),
                    }
                }
                (OperatorTag::Hyperinterpolation, Some(rule), Some(eval)) => {
                    let hyper = HyperinterpolationOperator::new(rule.clone(), n)?;
                    lebesgue_constant_estimate(&hyper, eval)?
                }
                (OperatorTag::LeastSquares, Some(rule), Some(eval)) => {
                    let basis = build_ls_basis(rule.nodes(), n)?;
                    lebesgue_constant_estimate(&basis, eval)?
                }
                _ => unreachable!("discrete operators always have a rule"),
            };
            let sqrt_n = (n as f64).sqrt();
            let row = LebesgueRow {
                operator: op,
                n,
                node_count: report.node_count,
                estimate: report.estimate,
                estimate_over_sqrt_n: report.estimate / sqrt_n,
                sqrt_n,
            };
            table.push(
                format!(
                    "{},{},{},{:.17e},{:.17e},{:.17e}",
                    row.operator, row.n, row.node_count, row.estimate, row.estimate_over_sqrt_n, row.sqrt_n
                ),
                row.clone(),
            );
            reports.push(report.csv_row(), report);
            rows.push(row);
        }
    }
    let ops = operators.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(",");
    table.write(config, "lebesgue", &format!("operators={ops}"))?;
    reports.write(config, "lebesgue_reports", &format!("operators={ops}"))?;
    let script = "set datafile separator ','\nset logscale xy\nset xlabel 'n'\nset ylabel 'Lebesgue constant'\n\
                  plot 'lebesgue.csv' using 2:(stringcolumn(1) eq 'LS' ? $4 : 1/0) with points pt 6 title 'least squares', \
                  '' using 2:(stringcolumn(1) eq 'hyper' ? $4 : 1/0) with points pt 4 title 'hyperinterpolation', \
                  '' using 2:6 with lines dt 2 title 'sqrt(n)'\n";
    write_file(&config.out.join("lebesgue.gp"), script)?;
    Ok(rows)
}

/// One line of the verification report; `passed` is `None` for
/// informational quantities.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub header: String,
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    fn check(&mut self, name: &'static str, value: f64, tolerance: f64) {
        self.lines.push(CheckLine {
            name,
            value,
            tolerance: Some(tolerance),
            passed: Some(value <= tolerance),
            note: String::new(),
        });
    }

    fn fail(&mut self, name: &'static str, note: String) {
        self.lines.push(CheckLine {
            name,
            value: f64::NAN,
            tolerance: None,
            passed: Some(false),
            note,
        });
    }

    fn info(&mut self, name: &'static str, value: f64) {
        self.lines.push(CheckLine {
            name,
            value,
            tolerance: None,
            passed: None,
            note: String::new(),
        });
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.lines.iter().filter(|l| l.passed == Some(false)).map(|l| l.name).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.header);
        for l in &self.lines {
            let status = match l.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "info",
            };
            let tol = l.tolerance.map_or(String::new(), |t| format!(" (tolerance {t:.3e})"));
            let note = if l.note.is_empty() { String::new() } else { format!(" {}", l.note) };
            writeln!(out, "[{status}] {:<22} {:.6e}{tol}{note}", l.name, l.value).unwrap();
        }
        out
    }

    pub fn into_result(self) -> Result<(), CliError> {
        if self.passed() {
            Ok(())
        } else {
            Err(CliError::Check(self.failures().join(", ")))
        }
    }
}

/// Runs the invariant suite at degree `n` on the tensor rule, or on a rule
/// file (degree ⌊exactness/2⌋ unless `--n` was given).
pub fn cmd_verify(config: &ExperimentConfig, rule_path: Option<&Path>) -> Result<VerifyReport, CliError> {
    config.require_sphere("verification")?;
    let (rule, n, source) = match rule_path {
        Some(path) => {
            let rule = load_rule(path)
                .map_err(|e| CliError::Check(format!("rule file {} rejected: {e}", path.display())))?;
            let n = match config.degrees.as_slice() {
                [n] if config.explicit_degree => *n,
                _ => rule.exactness() / 2,
            };
            (rule, n, path.display().to_string())
        }
        None => {
            let n = config.degrees[0];
            (tensor_gl_rule(n)?, n, "tensor Gauss-Legendre".to_string())
        }
    };
    let mut report = VerifyReport {
        header: format!(
            "# sphereproj {} verify rule={source} n={n} N={} exactness={} seed={}",
            crate::VERSION,
            rule.len(),
            rule.exactness(),
            config.seed
        ),
        lines: Vec::new(),
    };
    let area = 4.0 * PI;
    report.check("exactness_max_error", verify_exactness(&rule)?, 1e-10 * area);
    let total: f64 = sphereproj::sum::compensated_sum(rule.weights().iter().copied());
    report.check("weight_sum_error", (total - area).abs(), 1e-10 * area);

    let eval = spiral_points(500)?;
    let harmonics = HarmonicBasis::new(n);
    let mut rng = seeded_rng(config.seed);
    let coefficients = random_coefficients(harmonics.dim(), &mut rng);
    let poly = |x: &SpherePoint| harmonics.evaluate_expansion(&coefficients, x).expect("q = 2");
    let node_values: Vec<f64> = rule.nodes().iter().map(poly).collect();
    let exact: Vec<f64> = eval.points().iter().map(poly).collect();
    let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let relative_error = |approx: Vec<f64>| {
        approx.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
    };

    match HyperinterpolationOperator::new(rule.clone(), n) {
        Ok(op) => {
            let projected = op.project(&node_values, eval.points(), Exec::default())?;
            report.check("hyper_reproduction", relative_error(projected), 1e-8);
        }
        Err(e) => report.fail("hyper_reproduction", e.to_string()),
    }

    match build_ls_basis(rule.nodes(), n) {
        Ok(basis) => {
            let q = basis.node_values();
            let gram = q.transpose() * q;
            let d = basis.dim();
            let mut deviation: f64 = 0.0;
            for r in 0..d {
                for s in 0..d {
                    let target = if r == s { 1.0 } else { 0.0 };
                    deviation = deviation.max((gram[(r, s)] - target).abs());
                }
            }
            report.check("gram_deviation", deviation, 1e-9);
            report.check("node_kernel_max", basis.max_node_kernel(), 1.0 + 1e-9);
            let trace: f64 = (0..rule.len()).map(|j| basis.node_kernel(j, j)).sum();
            report.check("kernel_trace_error", (trace - d as f64).abs(), 1e-7);
            let projected = basis.project(&node_values, eval.points(), Exec::default())?;
            report.check("ls_reproduction", relative_error(projected), 1e-8);
        }
        Err(e) => report.fail("ls_basis", e.to_string()),
    }

    report_certificates(&mut report, &rule, n)?;
    Ok(report)
}

fn report_certificates(report: &mut VerifyReport, rule: &QuadratureRule, n: usize) -> Result<(), CliError> {
    if rule.len() >= 2 {
        let eval = spiral_points(4 * rule.len())?;
        let cert = CertificateReport::compute(rule, n, &eval)?;
        report.info("weight_ratio", cert.weight_ratio_max);
        report.info("cap_count", cert.cap_count_sup as f64);
    }
    Ok(())
}
