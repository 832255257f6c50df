use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trigzeros"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trigzeros-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn simulate_is_deterministic_across_reruns_and_workers() {
    let out = scratch("determinism");
    let args = ["simulate", "--n", "50", "--interval", "0:50", "--dist", "gaussian", "--reps", "3000", "--seed", "7"];
    let mut files = Vec::new();
    for workers in ["1", "1", "4", "16"] {
        let o = bin()
            .args(args)
            .args(["--workers", workers, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(fs::read(out.join("counts.csv")).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(files.pop().unwrap()).unwrap();
    assert_eq!(data_rows(&text).len(), 3000);
    assert!(text.contains("replication,count,method,flags\n"));
}

#[test]
fn pinned_cosine_counts_two() {
    let out = scratch("cosine");
    let o = run(
        &["simulate", "--n", "1", "--interval", "0:6.283185307179586", "--debug-coeffs", "1;0", "--reps", "20"],
        &out,
    );
    assert!(o.status.success());
    let rows = data_rows(&fs::read_to_string(out.join("counts.csv")).unwrap());
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[1] == "2"));
}

#[test]
fn outputs_embed_config_and_version() {
    let out = scratch("embed");
    let cfg = out.with_extension("cfg");
    fs::create_dir_all(cfg.parent().unwrap()).unwrap();
    fs::write(&cfg, "# experiment\nn = 12\ninterval = 0:20\nreps = 50\nseed = 5\nm_max = 2\n").unwrap();
    let o = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "6", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let version = format!("trigzeros {}", env!("CARGO_PKG_VERSION"));
    for f in ["counts.csv", "summary.csv", "histogram.svg"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(text.contains(&version), "{f}");
        assert!(text.contains("n = 12"), "{f}");
        assert!(text.contains("seed = 6"), "{f}");
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(json["config"]["interval"], "0:20");
    assert_eq!(json["config"]["m-max"], "2");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows = data_rows(&summary);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["0", "1", "2"]);
    let _ = fs::remove_file(cfg);
}

#[test]
fn config_errors_exit_2() {
    let out = scratch("errors");
    for args in [
        vec!["simulate", "--dist", "poisson"],
        vec!["simulate", "--interval", "3:1"],
        vec!["simulate", "--reps", "0"],
        vec!["compare", "--dist", "gaussian"],
        vec!["gp", "--method", "companion"],
    ] {
        let o = run(&args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failures_exit_3() {
    let out = scratch("zero");
    let o = run(&["simulate", "--debug-coeffs", "0;0", "--reps", "10"], &out);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_mean_matches_finite_degree_rice_mean() {
    let out = scratch("mean");
    let o = run(&["simulate", "--n", "100", "--interval", "0:50", "--reps", "5000", "--seed", "3"], &out);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let (mean, se) = (json["mean"]["estimate"].as_f64().unwrap(), json["mean"]["se"].as_f64().unwrap());
    // Rice formula for X_N: (|I|/pi) sqrt((N+1)(2N+1)/(6N^2))
    let n = 100.0f64;
    let expected = 50.0 / std::f64::consts::PI * ((n + 1.0) * (2.0 * n + 1.0) / (6.0 * n * n)).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn figure1_panels() {
    let out = scratch("figure1");
    let o = run(&["figure1", "--reps", "3000", "--seed", "11"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(out.join("figure1.svg")).unwrap();
    assert_eq!(svg.matches(r#"<g class="panel""#).count(), 4);
    let titles = ["Rademacher", "Uniform on [-1, 1], scaled to variance 1", "Gaussian", "Cauchy (exploratory)"];
    let pos: Vec<usize> = titles
        .iter()
        .map(|t| svg.find(&format!(r#"font-size="13">{t}</text>"#)).expect(t))
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));

    let mut modes = BTreeMap::new();
    for (i, name) in ["rademacher", "uniform", "gaussian", "cauchy"].iter().enumerate() {
        let csv = fs::read_to_string(out.join(format!("figure1_panel{}_{name}.csv", i + 1))).unwrap();
        let rows = data_rows(&csv);
        let pmf: Vec<(u64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
        let total: f64 = pmf.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() <= 1e-12, "{name}: {total}");
        let mode = pmf.iter().fold((0, -1.0), |b, &(k, p)| if p > b.1 { (k, p) } else { b }).0;
        modes.insert(*name, mode);
    }
    let target = (50.0 / (std::f64::consts::PI * 3f64.sqrt())).round() as i64;
    assert!((modes["gaussian"] as i64 - target).abs() <= 2, "{modes:?}");
}

#[test]
fn compare_same_law_passes_and_cauchy_is_exploratory() {
    let out = scratch("compare");
    let o = run(&["compare", "--dist", "gaussian,gaussian", "--n", "40", "--reps", "3000", "--seed", "2"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["report"]["ks"][0]["verdict"], "pass");

    let out = scratch("compare-cauchy");
    let o = run(&["compare", "--dist", "gaussian,cauchy", "--n", "40", "--reps", "3000", "--seed", "2"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let ks = fs::read_to_string(out.join("compare_ks.csv")).unwrap();
    assert!(data_rows(&ks).iter().all(|r| r[4] == "exploratory"));
    let moments = fs::read_to_string(out.join("compare_moments.csv")).unwrap();
    for r in data_rows(&moments) {
        let expected = if r[0].starts_with("cauchy") { "exploratory" } else { "pass" };
        assert_eq!(r[9], expected, "{r:?}");
    }
}

#[test]
fn rice_and_gp_commands() {
    let out = scratch("rice");
    let o = run(&["rice", "--interval", "0:10", "--reps", "20000", "--m-max", "2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&fs::read_to_string(out.join("rice.csv")).unwrap());
    let mean: f64 = rows[0][1].parse().unwrap();
    assert!((mean - 10.0 / (std::f64::consts::PI * 3f64.sqrt())).abs() < 1e-12);
    assert_eq!(rows.len(), 3);

    let out = scratch("gp");
    let o = run(&["gp", "--interval", "0:10", "--reps", "300", "--frequencies", "128"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&fs::read_to_string(out.join("counts.csv")).unwrap()).len(), 300);
}
