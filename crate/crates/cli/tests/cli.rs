use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sphereproj(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphereproj"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn nodes_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (n, count) in [("15", 512), ("25", 1352), ("0", 2)] {
        let out = sphereproj(&["nodes", "--n", n], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = data_rows(&dir.path().join(format!("nodes_n{n}.csv")));
        assert_eq!(rows.len(), count);
        assert!(dir.path().join(format!("nodes_n{n}.rule")).exists());
        assert!(dir.path().join(format!("nodes_n{n}.gp")).exists());
    }
}

#[test]
fn nodes_csv_starts_with_comment_and_header() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sphereproj(&["nodes", "--n", "3", "--seed", "5"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("nodes_n3.csv")).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# sphereproj v"));
    assert!(comment.contains("seed=5"));
    assert_eq!(lines.next().unwrap(), "index,j,k,lat_deg,lon_deg,x,y,z,weight");
}

#[test]
fn meshstats_default_and_single_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["meshstats", "--eval-mult", "4"], dir.path());
    assert!(out.status.success());
    let rows = data_rows(&dir.path().join("meshstats.csv"));
    assert_eq!(rows.len(), 10);
    let ratio = |r: &Vec<String>| r[4].parse::<f64>().unwrap();
    assert!(ratio(&rows[9]) >= 2.0 * ratio(&rows[0]));
    assert_eq!(data_rows(&dir.path().join("certificates.csv")).len(), 10);

    let single = tempfile::tempdir().unwrap();
    assert!(sphereproj(&["meshstats", "--n", "12"], single.path()).status.success());
    let rows = data_rows(&single.path().join("meshstats.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "12");
}

#[test]
fn lebesgue_rows_and_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["lebesgue", "--n-start", "4", "--n-stop", "16", "--n-step", "4"], dir.path());
    assert!(out.status.success());
    let rows = data_rows(&dir.path().join("lebesgue.csv"));
    assert_eq!(rows.len(), 8);
    for row in &rows {
        assert!(row[0] == "LS" || row[0] == "hyper");
        let ratio: f64 = row[4].parse().unwrap();
        assert!((0.5..=5.0).contains(&ratio), "{row:?}");
    }
}

#[test]
fn lebesgue_degree_zero_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["lebesgue", "--n", "0", "--operators", "LS,hyper,fourier"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for row in data_rows(&dir.path().join("lebesgue.csv")) {
        let estimate: f64 = row[3].parse().unwrap();
        assert!((estimate - 1.0).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn lebesgue_guard_refuses_large_ls_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["lebesgue", "--n", "50"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("40"), "{stderr}");
}

#[test]
fn fourier_runs_in_higher_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["lebesgue", "--q", "3", "--n", "10", "--operators", "fourier"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("lebesgue.csv")).len(), 1);
}

#[test]
fn verify_passes_on_tensor_rule() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["verify", "--n", "10"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] node_kernel_max"));
    assert!(!stdout.contains("[FAIL]"));
}

#[test]
fn verify_accepts_written_rule_and_rejects_corrupted_one() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sphereproj(&["nodes", "--n", "6"], dir.path()).status.success());
    let rule = dir.path().join("nodes_n6.rule");
    let ok = sphereproj(&["verify", "--rule", rule.to_str().unwrap()], dir.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));

    let text = fs::read_to_string(&rule).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<&str> = lines[3].split_whitespace().collect();
    fields[3] = "-1.0";
    lines[3] = fields.join(" ");
    let bad = dir.path().join("bad.rule");
    fs::write(&bad, lines.join("\n")).unwrap();
    let out = sphereproj(&["verify", "--rule", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("non-positive weight"), "{stderr}");
}

#[test]
fn json_format_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sphereproj(&["meshstats", "--n", "5", "--format", "json"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("meshstats.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["rows"].as_array().unwrap().len(), 1);
    assert!(value["comment"].as_str().unwrap().starts_with("# sphereproj"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_sphereproj"))
            .env("SPHEREPROJ_THREADS", threads)
            .args(["meshstats", "--n", "8", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("meshstats.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}

#[test]
fn bad_usage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphereproj(&["meshstats", "--n-start", "10", "--n-stop", "5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = sphereproj(&["nodes", "--q", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
