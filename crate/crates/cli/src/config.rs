//! Experiment configuration: flat `key = value` files merged with flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use trigzeros::coeffs::CoeffDist;
use trigzeros::ensemble::CountMethod;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Gp,
    Rice,
    Compare,
    Figure1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Gp => "gp",
            Command::Rice => "rice",
            Command::Compare => "compare",
            Command::Figure1 => "figure1",
        }
    }
}

/// Keys of the experiment configuration, in echo order.
pub const KEYS: [&str; 13] = [
    "command",
    "n",
    "interval",
    "dist",
    "reps",
    "seed",
    "method",
    "epsilon",
    "m-max",
    "out",
    "frequencies",
    "reference",
    "debug-coeffs",
];

/// Accepted but not part of the experiment (results do not depend on it).
pub const EXECUTION_KEYS: [&str; 1] = ["workers"];

fn default_for(command: Command, key: &str) -> Option<&'static str> {
    Some(match (command, key) {
        (_, "n") => "50",
        (_, "interval") => "0:50",
        (Command::Compare, "dist") => "rademacher,gaussian",
        (Command::Figure1, "dist") => "rademacher,uniform,gaussian,cauchy",
        (Command::Gp, "dist") => "sinc",
        (_, "dist") => "gaussian",
        (Command::Rice, "reps") => "200000",
        (_, "reps") => "10000",
        (_, "seed") => "0",
        (_, "method") => "scan",
        (_, "epsilon") => "0.05",
        (_, "m-max") => "3",
        (_, "out") => "out",
        (_, "frequencies") => "512",
        (_, "reference") => "rice",
        _ => return None,
    })
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Res<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {}: expected key = value", i + 1));
        };
        let key = normalize_key(k.trim());
        if !KEYS.contains(&key.as_str()) && !EXECUTION_KEYS.contains(&key.as_str()) {
            return err(format!("config line {}: unknown key '{}'", i + 1, k.trim()));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn normalize_key(k: &str) -> String {
    k.replace('_', "-")
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub interval: (f64, f64),
    pub dists: Vec<String>,
    pub replications: usize,
    pub seed: u64,
    pub method: CountMethod,
    pub epsilon: f64,
    pub m_max: u32,
    pub out: PathBuf,
    pub frequencies: usize,
    pub references: Vec<String>,
    pub debug_coeffs: Option<(Vec<f64>, Vec<f64>)>,
    pub workers: Option<usize>,
    /// Resolved value of every key, as given or defaulted.
    pub echo: Vec<(String, String)>,
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Res<T> {
    v.parse()
        .map_err(|_| ConfigError(format!("invalid value for {key}: '{v}'")))
}

fn parse_interval(v: &str) -> Res<(f64, f64)> {
    let Some((a, b)) = v.split_once(':') else {
        return err(format!("interval must be lo:hi, got '{v}'"));
    };
    let (lo, hi): (f64, f64) = (num("interval", a.trim())?, num("interval", b.trim())?);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return err(format!("interval must satisfy lo < hi, got '{v}'"));
    }
    Ok((lo, hi))
}

fn parse_list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_coeffs(v: &str) -> Res<(Vec<f64>, Vec<f64>)> {
    let Some((a, b)) = v.split_once(';') else {
        return err("debug-coeffs must be 'a1,a2,..;b1,b2,..'");
    };
    let side = |s: &str| -> Res<Vec<f64>> { s.split(',').map(|x| num("debug-coeffs", x.trim())).collect() };
    let (a, b) = (side(a)?, side(b)?);
    if a.is_empty() || a.len() != b.len() {
        return err("debug-coeffs needs equally many a and b coefficients");
    }
    Ok((a, b))
}

impl ExperimentConfig {
    /// Resolve a config from file values overridden by flag values.
    pub fn resolve(
        command: Command,
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> Res<Self> {
        let mut map = file;
        map.extend(flags);
        if let Some(c) = map.get("command") {
            if c != command.name() {
                return err(format!("config file is for '{c}', not '{}'", command.name()));
            }
        }
        map.insert("command".into(), command.name().into());
        let get = |k: &str| -> String {
            map.get(k)
                .cloned()
                .or_else(|| default_for(command, k).map(String::from))
                .unwrap_or_default()
        };
        let dists = parse_list(&get("dist"));
        if dists.is_empty() {
            return err("no distribution given");
        }
        if command != Command::Gp {
            for d in &dists {
                if d != "sinc" {
                    CoeffDist::from_spec(d, true).map_err(|e| ConfigError(format!("--dist: {e}")))?;
                }
            }
        }
        if command == Command::Compare && dists.len() < 2 {
            return err("compare needs at least two distributions");
        }
        let replications: usize = num("reps", &get("reps"))?;
        if replications == 0 {
            return err("reps must be at least 1");
        }
        let n: usize = num("n", &get("n"))?;
        let debug_coeffs = match map.get("debug-coeffs") {
            Some(v) => Some(parse_coeffs(v)?),
            None => None,
        };
        if n == 0 && debug_coeffs.is_none() {
            return err("n must be at least 1");
        }
        let epsilon: f64 = num("epsilon", &get("epsilon"))?;
        if epsilon.is_nan() || epsilon <= 0.0 {
            return err("epsilon must be positive");
        }
        let frequencies: usize = num("frequencies", &get("frequencies"))?;
        if frequencies == 0 {
            return err("frequencies must be at least 1");
        }
        let references = parse_list(&get("reference"));
        for r in &references {
            if r != "rice" && r != "sinc" && r != "none" {
                return err(format!("unknown reference '{r}' (expected rice, sinc or none)"));
            }
        }
        let workers = match map.get("workers") {
            Some(v) => Some(num::<usize>("workers", v)?).filter(|&w| w > 0),
            None => None,
        };
        let echo = KEYS
            .iter()
            .filter(|k| map.contains_key(**k) || default_for(command, k).is_some())
            .map(|k| (k.to_string(), get(k)))
            .collect();
        Ok(Self {
            command,
            n: debug_coeffs.as_ref().map_or(n, |(a, _)| a.len()),
            interval: parse_interval(&get("interval"))?,
            dists,
            replications,
            seed: num("seed", &get("seed"))?,
            method: get("method").parse().map_err(|e| ConfigError(format!("{e}")))?,
            epsilon,
            m_max: num("m-max", &get("m-max"))?,
            out: PathBuf::from(get("out")),
            frequencies,
            references,
            debug_coeffs,
            workers,
            echo,
        })
    }

    /// `# key = value` lines for embedding in output files.
    pub fn header(&self) -> String {
        let mut s = format!("# trigzeros {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.echo {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    pub fn echo_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (k, v) in &self.echo {
            m.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        serde_json::Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_echo() {
        let c = ExperimentConfig::resolve(Command::Simulate, BTreeMap::new(), BTreeMap::new()).unwrap();
        assert_eq!(c.n, 50);
        assert_eq!(c.interval, (0.0, 50.0));
        assert_eq!(c.echo[0], ("command".into(), "simulate".into()));
        assert!(c.header().contains("# interval = 0:50\n"));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_kv("# comment\nn = 10\nm_max = 2\nseed=3 # trailing\n").unwrap();
        let c = ExperimentConfig::resolve(Command::Simulate, file, flags(&[("n", "20")])).unwrap();
        assert_eq!(c.n, 20);
        assert_eq!(c.m_max, 2);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            ("interval", "5:1"),
            ("interval", "0-5"),
            ("reps", "0"),
            ("dist", "poisson"),
            ("dist", "cauchy:3"),
            ("method", "fast"),
            ("epsilon", "-1"),
            ("debug-coeffs", "1,2;3"),
        ];
        for (k, v) in bad {
            let r = ExperimentConfig::resolve(Command::Simulate, BTreeMap::new(), flags(&[(k, v)]));
            assert!(r.is_err(), "{k}={v}");
        }
        assert!(parse_kv("bogus = 1").is_err());
        assert!(parse_kv("no equals sign").is_err());
        let r = ExperimentConfig::resolve(Command::Compare, BTreeMap::new(), flags(&[("dist", "gaussian")]));
        assert!(r.is_err());
    }

    #[test]
    fn pinned_coefficients_set_degree() {
        let c = ExperimentConfig::resolve(
            Command::Simulate,
            BTreeMap::new(),
            flags(&[("debug-coeffs", "1,0;0,0.5")]),
        )
        .unwrap();
        assert_eq!(c.n, 2);
    }
}
