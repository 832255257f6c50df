//! The experiment commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;
use trigzeros::coeffs::{derive_seed, CoeffDist, RngStream};
use trigzeros::ensemble::{
    failure_rate, run_ensemble, run_sinc_ensemble, successful_counts, CountMethod, EnsembleSpec, Replication,
    SincSpec,
};
use trigzeros::rice::{m_factorial_moment_mc, mean_zeros, second_factorial_moment, MAX_ORDER};
use trigzeros::stats::{
    ks_null_threshold, summarize, universality_report, EnsembleMeta, EnsembleSummary, MomentEstimate,
    MomentTable, Reference, ReportOptions,
};
use trigzeros::trigpoly::TrigPoly;
use trigzeros::zerocount::ScanOptions;
use trigzeros::Error;

use crate::config::{Command, ExperimentConfig};
use crate::svg::{self, Panel};

pub const MAX_FAILURE_RATE: f64 = 0.01;
pub const KS_LEVEL: f64 = 0.01;
pub const KS_BOOT: usize = 2000;
pub const MC_INNER: usize = 8;
const RICE_TABLE_NODES: usize = 200_000;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Comparison(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Comparison(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Comparison(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::NonConforming(_) | Error::IntervalMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

type Res<T> = Result<T, Failure>;

fn write(dir: &Path, name: &str, contents: &str) -> Res<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn dist(spec: &str) -> Res<CoeffDist> {
    CoeffDist::from_spec(spec, true).map_err(|e| Failure::Config(format!("--dist: {e}")))
}

pub fn counts_csv(cfg: &ExperimentConfig, reps: &[Replication]) -> String {
    let mut s = cfg.header();
    s.push_str("replication,count,method,flags\n");
    for r in reps {
        let count = r.count.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", r.index, count, r.method, r.flags_label());
    }
    s
}

fn summary_csv(cfg: &ExperimentConfig, summary: &EnsembleSummary) -> String {
    let mut s = cfg.header();
    s.push_str("m,estimate,se\n");
    for (m, e) in &summary.factorial_moments {
        let _ = writeln!(s, "{m},{},{}", e.estimate, e.se);
    }
    s
}

fn pmf_json(pmf: &BTreeMap<u64, f64>) -> serde_json::Value {
    pmf.iter().map(|(k, p)| (k.to_string(), json!(p))).collect::<serde_json::Map<_, _>>().into()
}

fn moments_json(m: &BTreeMap<u32, MomentEstimate>) -> serde_json::Value {
    m.iter()
        .map(|(m, e)| json!({"m": m, "estimate": e.estimate, "se": e.se}))
        .collect::<Vec<_>>()
        .into()
}

fn flag_tally(reps: &[Replication]) -> BTreeMap<String, usize> {
    let mut t = BTreeMap::new();
    for r in reps {
        for f in &r.flags {
            *t.entry(f.to_string()).or_insert(0) += 1;
        }
    }
    t
}

fn mode(pmf: &BTreeMap<u64, f64>) -> Option<u64> {
    pmf.iter()
        .fold(None, |best: Option<(u64, f64)>, (&k, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((k, p)),
        })
        .map(|(k, _)| k)
}

fn summarize_reps(reps: &[Replication], m_max: u32, meta: EnsembleMeta) -> Res<EnsembleSummary> {
    let counts = successful_counts(reps);
    if counts.is_empty() {
        return Err(Failure::Numerical("every replication failed".into()));
    }
    Ok(summarize(&counts, m_max)?.with_meta(meta))
}

fn check_failures(reps: &[Replication], what: &str) -> Res<()> {
    let rate = failure_rate(reps);
    if rate > MAX_FAILURE_RATE {
        return Err(Failure::Numerical(format!(
            "{what}: {:.2}% of replications failed numerically (limit {:.0}%)",
            100.0 * rate,
            100.0 * MAX_FAILURE_RATE
        )));
    }
    Ok(())
}

fn ensemble_spec(cfg: &ExperimentConfig, d: CoeffDist, seed: u64) -> Res<EnsembleSpec> {
    let mut spec = EnsembleSpec::new(cfg.n, cfg.interval, d, cfg.replications, seed);
    spec.method = cfg.method;
    spec.workers = cfg.workers;
    if let Some((a, b)) = &cfg.debug_coeffs {
        spec.pinned = Some(TrigPoly::new(a.clone(), b.clone())?);
    }
    Ok(spec)
}

fn svg_comment(cfg: &ExperimentConfig) -> String {
    let fields: Vec<String> = cfg.echo.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("trigzeros {}: {}", env!("CARGO_PKG_VERSION"), fields.join("; "))
}

fn write_ensemble(cfg: &ExperimentConfig, reps: &[Replication], summary: &EnsembleSummary) -> Res<()> {
    let dir = &cfg.out;
    write(dir, "counts.csv", &counts_csv(cfg, reps))?;
    write(dir, "summary.csv", &summary_csv(cfg, summary))?;
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.echo_json(),
        "execution": {"workers": cfg.workers},
        "meta": summary.meta,
        "replications": reps.len(),
        "failures": reps.iter().filter(|r| r.failure.is_some()).count(),
        "failure_rate": failure_rate(reps),
        "flags": flag_tally(reps),
        "mean": summary.mean(),
        "mode": mode(&summary.pmf),
        "limit_mean": mean_zeros(cfg.interval.0, cfg.interval.1),
        "pmf": pmf_json(&summary.pmf),
        "factorial_moments": moments_json(&summary.factorial_moments),
    });
    write(dir, "summary.json", &json_text(&doc))?;
    let title = format!("{} on [{}, {}]", summary.meta.label(), cfg.interval.0, cfg.interval.1);
    let svg = svg::panels(
        &[Panel { title, pmf: summary.pmf.clone() }],
        &format!("{} replications, seed {}", reps.len(), cfg.seed),
        &svg_comment(cfg),
    );
    write(dir, "histogram.svg", &svg)
}

pub fn simulate(cfg: &ExperimentConfig) -> Res<String> {
    if cfg.dists.len() != 1 {
        return Err(Failure::Config("simulate takes exactly one distribution".into()));
    }
    let d = dist(&cfg.dists[0])?;
    let exploratory = !d.is_conforming();
    let reps = run_ensemble(&ensemble_spec(cfg, d, cfg.seed)?)?;
    let meta = EnsembleMeta {
        n: Some(cfg.n),
        distribution: cfg.dists[0].clone(),
        interval: cfg.interval,
        seed: cfg.seed,
        method: cfg.method.to_string(),
        exploratory,
    };
    let summary = summarize_reps(&reps, cfg.m_max, meta)?;
    write_ensemble(cfg, &reps, &summary)?;
    check_failures(&reps, "simulate")?;
    let m = summary.mean();
    Ok(format!(
        "mean {:.5} (se {:.5}) over {} replications; limit mean {:.5}",
        m.estimate,
        m.se,
        summary.replications(),
        mean_zeros(cfg.interval.0, cfg.interval.1)
    ))
}

fn sinc_summary(cfg: &ExperimentConfig, seed: u64) -> Res<(Vec<Replication>, EnsembleSummary)> {
    let reps = run_sinc_ensemble(&SincSpec {
        frequencies: cfg.frequencies,
        interval: cfg.interval,
        replications: cfg.replications,
        seed,
        scan: ScanOptions::default(),
        workers: cfg.workers,
    })?;
    let meta = EnsembleMeta {
        n: None,
        distribution: format!("sinc M={}", cfg.frequencies),
        interval: cfg.interval,
        seed,
        method: "scan".into(),
        exploratory: false,
    };
    let summary = summarize_reps(&reps, cfg.m_max, meta)?;
    Ok((reps, summary))
}

pub fn gp(cfg: &ExperimentConfig) -> Res<String> {
    if cfg.method != CountMethod::Scan {
        return Err(Failure::Config("gp counts zeros by scan only".into()));
    }
    let (reps, summary) = sinc_summary(cfg, cfg.seed)?;
    write_ensemble(cfg, &reps, &summary)?;
    check_failures(&reps, "gp")?;
    let m = summary.mean();
    Ok(format!(
        "mean {:.5} (se {:.5}) over {} sample paths; exact mean {:.5}",
        m.estimate,
        m.se,
        summary.replications(),
        mean_zeros(cfg.interval.0, cfg.interval.1)
    ))
}

struct RiceRow {
    m: u32,
    estimate: f64,
    se: f64,
    method: &'static str,
}

/// Limit moments: exact mean, quadrature for m = 2, Monte Carlo above.
fn rice_rows(cfg: &ExperimentConfig, nodes: usize) -> Res<(Vec<RiceRow>, serde_json::Value)> {
    let (lo, hi) = cfg.interval;
    let mut rows = vec![RiceRow {
        m: 1,
        estimate: mean_zeros(lo, hi),
        se: 0.0,
        method: "exact",
    }];
    let mut notes = serde_json::Map::new();
    if cfg.m_max >= 2 {
        if cfg.epsilon < (hi - lo) / 4.0 {
            let q = second_factorial_moment(lo, hi, cfg.epsilon)?;
            notes.insert("quadrature".into(), serde_json::to_value(&q).expect("serializable"));
            if !q.converged {
                notes.insert("partial".into(), json!(true));
            }
            rows.push(RiceRow {
                m: 2,
                estimate: q.value,
                se: q.error_estimate,
                method: "quadrature",
            });
        } else {
            notes.insert("quadrature".into(), json!("skipped: epsilon must be below |I|/4"));
        }
    }
    for m in 2..=(cfg.m_max as usize).min(MAX_ORDER) {
        let mut stream = RngStream::derive(cfg.seed, 0x51CE + m as u64, 0);
        let r = m_factorial_moment_mc(lo, hi, m, cfg.epsilon, nodes, MC_INNER, &mut stream)?;
        rows.push(RiceRow {
            m: m as u32,
            estimate: r.estimate,
            se: r.se,
            method: "gamma-mc",
        });
    }
    notes.insert("epsilon".into(), json!(cfg.epsilon));
    notes.insert("caveat".into(), json!(trigzeros::rice::TRUNCATION_CAVEAT));
    Ok((rows, notes.into()))
}

pub fn rice(cfg: &ExperimentConfig) -> Res<String> {
    let (rows, notes) = rice_rows(cfg, cfg.replications)?;
    let mut csv = cfg.header();
    csv.push_str("m,estimate,se,method\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.m, r.estimate, r.se, r.method);
    }
    write(&cfg.out, "rice.csv", &csv)?;
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.echo_json(),
        "moments": rows.iter().map(|r| json!({"m": r.m, "estimate": r.estimate, "se": r.se, "method": r.method})).collect::<Vec<_>>(),
        "notes": notes,
    });
    write(&cfg.out, "rice.json", &json_text(&doc))?;
    if notes.get("partial").is_some() {
        return Err(Failure::Numerical("quadrature budget exhausted; rice.csv holds a partial value".into()));
    }
    Ok(rows
        .iter()
        .map(|r| format!("m={} {} {:.6} (se {:.2e})", r.m, r.method, r.estimate, r.se))
        .collect::<Vec<_>>()
        .join("\n"))
}

pub fn compare(cfg: &ExperimentConfig) -> Res<String> {
    let mut summaries = Vec::new();
    for (i, spec) in cfg.dists.iter().enumerate() {
        let d = dist(spec)?;
        let exploratory = !d.is_conforming();
        let seed = derive_seed(cfg.seed, i as u64 + 1);
        let reps = run_ensemble(&ensemble_spec(cfg, d, seed)?)?;
        check_failures(&reps, spec)?;
        let meta = EnsembleMeta {
            n: Some(cfg.n),
            distribution: format!("{spec} #{}", i + 1),
            interval: cfg.interval,
            seed,
            method: cfg.method.to_string(),
            exploratory,
        };
        summaries.push(summarize_reps(&reps, cfg.m_max, meta)?);
    }

    // Null calibration from an independent Gaussian pilot ensemble
    let pilot_seed = derive_seed(cfg.seed, 0xCA11);
    let pilot_reps = run_ensemble(&ensemble_spec(cfg, CoeffDist::gaussian(), pilot_seed)?)?;
    let pilot = summarize_reps(&pilot_reps, 1, EnsembleMeta::default())?;
    let mut boot = RngStream::derive(cfg.seed, 0xB007, 0);
    let threshold = ks_null_threshold(
        &pilot.pmf,
        cfg.replications,
        cfg.replications,
        KS_LEVEL,
        KS_BOOT,
        &mut boot,
    )?;

    let mut table = None;
    let mut sinc = None;
    for r in &cfg.references {
        match r.as_str() {
            "rice" => {
                let (rows, _) = rice_rows(cfg, RICE_TABLE_NODES)?;
                let mut moments = BTreeMap::new();
                for row in rows {
                    // keep the deterministic value where there is one
                    moments.entry(row.m).or_insert(MomentEstimate {
                        estimate: row.estimate,
                        se: row.se,
                    });
                }
                table = Some(MomentTable {
                    label: "rice".into(),
                    interval: cfg.interval,
                    moments,
                });
            }
            "sinc" => sinc = Some(sinc_summary(cfg, derive_seed(cfg.seed, 0x51C))?.1),
            _ => {}
        }
    }
    let mut references = Vec::new();
    if let Some(t) = &table {
        references.push(Reference::Table(t));
    }
    if let Some(s) = &sinc {
        references.push(Reference::Ensemble(s));
    }
    let opts = ReportOptions {
        ks_threshold: threshold,
        m_max: cfg.m_max.min(3),
        ..ReportOptions::default()
    };
    let report = universality_report(&summaries, &references, &opts)?;

    let mut ks_csv = cfg.header();
    ks_csv.push_str("a,b,statistic,threshold,verdict\n");
    for c in &report.ks {
        let _ = writeln!(ks_csv, "{},{},{},{},{}", c.a, c.b, c.statistic, c.threshold, c.verdict);
    }
    write(&cfg.out, "compare_ks.csv", &ks_csv)?;
    let mut m_csv = cfg.header();
    m_csv.push_str("ensemble,reference,m,estimate,se,reference_estimate,reference_se,gap,tolerance,verdict\n");
    for c in &report.moments {
        let _ = writeln!(
            m_csv,
            "{},{},{},{},{},{},{},{},{},{}",
            c.ensemble, c.reference, c.m, c.estimate, c.se, c.reference_estimate, c.reference_se, c.gap, c.tolerance, c.verdict
        );
    }
    write(&cfg.out, "compare_moments.csv", &m_csv)?;
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.echo_json(),
        "execution": {"workers": cfg.workers},
        "calibration": {"pilot_seed": pilot_seed, "level": KS_LEVEL, "bootstrap": KS_BOOT, "threshold": threshold},
        "ensembles": summaries.iter().map(|s| json!({
            "meta": s.meta,
            "pmf": pmf_json(&s.pmf),
            "factorial_moments": moments_json(&s.factorial_moments),
        })).collect::<Vec<_>>(),
        "report": report,
        "passed": report.passed(),
    });
    write(&cfg.out, "compare.json", &json_text(&doc))?;

    let mut text = String::new();
    for c in &report.ks {
        let _ = writeln!(text, "KS {} vs {}: {:.5} (threshold {:.5}) {}", c.a, c.b, c.statistic, c.threshold, c.verdict);
    }
    for c in &report.moments {
        let _ = writeln!(
            text,
            "m={} {} vs {}: gap {:.4} (tolerance {:.4}) {}",
            c.m, c.ensemble, c.reference, c.gap, c.tolerance, c.verdict
        );
    }
    if report.passed() {
        Ok(text.trim_end().to_string())
    } else {
        Err(Failure::Comparison(format!("{}\ncomparison failed", text.trim_end())))
    }
}

fn panel_title(spec: &str) -> String {
    match spec {
        "rademacher" => "Rademacher".into(),
        "uniform" => "Uniform on [-1, 1], scaled to variance 1".into(),
        "gaussian" => "Gaussian".into(),
        "cauchy" => "Cauchy (exploratory)".into(),
        other => other.into(),
    }
}

fn file_stem(spec: &str) -> String {
    spec.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn figure1(cfg: &ExperimentConfig) -> Res<String> {
    let mut panels = Vec::new();
    let mut info = Vec::new();
    let mut text = String::new();
    for (i, spec) in cfg.dists.iter().enumerate() {
        let d = dist(spec)?;
        let exploratory = !d.is_conforming();
        let seed = derive_seed(cfg.seed, i as u64 + 1);
        let reps = run_ensemble(&ensemble_spec(cfg, d, seed)?)?;
        check_failures(&reps, spec)?;
        let meta = EnsembleMeta {
            n: Some(cfg.n),
            distribution: spec.clone(),
            interval: cfg.interval,
            seed,
            method: cfg.method.to_string(),
            exploratory,
        };
        let s = summarize_reps(&reps, cfg.m_max, meta)?;
        let mut csv = cfg.header();
        let _ = writeln!(csv, "# panel = {}", i + 1);
        let _ = writeln!(csv, "# distribution = {spec}");
        csv.push_str("k,pmf\n");
        for (k, p) in &s.pmf {
            let _ = writeln!(csv, "{k},{p}");
        }
        let name = format!("figure1_panel{}_{}.csv", i + 1, file_stem(spec));
        write(&cfg.out, &name, &csv)?;
        let m = s.mean();
        let _ = writeln!(
            text,
            "panel {} {}: mean {:.4} (se {:.4}), mode {:?}",
            i + 1,
            spec,
            m.estimate,
            m.se,
            mode(&s.pmf)
        );
        info.push(json!({
            "panel": i + 1,
            "title": panel_title(spec),
            "file": name,
            "meta": s.meta,
            "mean": m,
            "mode": mode(&s.pmf),
            "pmf": pmf_json(&s.pmf),
        }));
        panels.push(Panel {
            title: panel_title(spec),
            pmf: s.pmf,
        });
    }
    let caption = format!(
        "Zeros of X_{} on [{}, {}]; {} replications per panel, seed {}",
        cfg.n, cfg.interval.0, cfg.interval.1, cfg.replications, cfg.seed
    );
    write(&cfg.out, "figure1.svg", &svg::panels(&panels, &caption, &svg_comment(cfg)))?;
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.echo_json(),
        "panels": info,
    });
    write(&cfg.out, "figure1.json", &json_text(&doc))?;
    Ok(text.trim_end().to_string())
}

pub fn dispatch(cfg: &ExperimentConfig) -> Res<String> {
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Gp => gp(cfg),
        Command::Rice => rice(cfg),
        Command::Compare => compare(cfg),
        Command::Figure1 => figure1(cfg),
    }
}
