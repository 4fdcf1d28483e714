//! Optional TOML configuration, merged under the command-line flags, and
//! the provenance header written into every artifact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Keys accepted in a config file. Every key mirrors a long flag.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub law: Option<String>,
    pub f: Option<String>,
    #[serde(default, deserialize_with = "numbers_as_text")]
    pub grid: Option<String>,
    #[serde(default, deserialize_with = "numbers_as_text")]
    pub t: Option<String>,
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub event: Option<String>,
    pub sampler: Option<String>,
    pub suite: Option<String>,
    #[serde(default, deserialize_with = "numbers_as_text")]
    pub tilts: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Lets `t = 2.5` and `t = [10, 20]` stand for the flag text `"2.5"` and `"10,20"`.
fn numbers_as_text<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Int(i64),
        Num(f64),
        List(Vec<f64>),
    }
    Ok(Some(match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Int(i) => i.to_string(),
        Raw::Num(x) => x.to_string(),
        Raw::List(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    }))
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flag value if present, else the file value.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

pub fn require<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing `{name}` (flag --{name} or config key `{name}`)")))
}

/// SHA-256 of the resolved settings that determine an artifact.
pub fn config_hash<T: Serialize>(command: &str, resolved: &T) -> String {
    let body = serde_json::to_string(resolved).expect("settings serialize");
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// `# renewal-ldp <command> config=<sha256> seed=<seed|none>`.
pub fn header(command: &str, hash: &str, seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("# renewal-ldp {command} config={hash} seed={seed}\n")
}

/// `--threads`, then `RENEWAL_LDP_THREADS`, then 1.
pub fn threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(k) = flag {
        return positive_threads(k);
    }
    match std::env::var("RENEWAL_LDP_THREADS") {
        Ok(v) => {
            let k = v
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("RENEWAL_LDP_THREADS=`{v}` is not a positive integer")))?;
            positive_threads(k)
        }
        Err(_) => Ok(1),
    }
}

fn positive_threads(k: usize) -> Result<usize, CliError> {
    if k == 0 {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(k)
}

/// `a:b:n` (n evenly spaced points, ends included) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("grid `{spec}`: {why}"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
        let b: f64 = parts[1].parse().map_err(|_| bad("end is not a number"))?;
        let n: usize = parts[2].parse().map_err(|_| bad("count is not a positive integer"))?;
        if n == 0 || !a.is_finite() || !b.is_finite() || b < a {
            return Err(bad("need finite a ≤ b and n ≥ 1"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        // snap to 12 digits so decimal steps land on their intended values
        let snap = |x: f64| format!("{x:.11e}").parse::<f64>().unwrap_or(x);
        return Ok((0..n).map(|i| if i + 1 == n { b } else { snap(a + (b - a) * i as f64 / (n - 1) as f64) }).collect());
    }
    parse_list(spec)
}

/// Comma-separated reals.
pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Config(format!("`{spec}` is not a list of numbers"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("1:1:1").unwrap(), vec![1.0]);
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        let g = parse_grid("0.2:3:50").unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[49], 3.0);
        assert_eq!(parse_grid("0.1:3:30").unwrap()[9], 1.0);
        for bad in ["1:0:3", "0:1:0", "a:1:2", "", "1,,2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_name() {
        let err = toml::from_str::<FileConfig>("law = \"exp(1)\"\nsede = 3\n").unwrap_err().to_string();
        assert!(err.contains("sede"), "{err}");
        let ok: FileConfig = toml::from_str("law = \"exp(1)\"\nseed = 3\n").unwrap();
        assert_eq!(ok.seed, Some(3));
    }

    #[test]
    fn numbers_stand_in_for_flag_text() {
        let c: FileConfig = toml::from_str("t = 2.5\ngrid = \"0:1:3\"\ntilts = [0, -0.5]\n").unwrap();
        assert_eq!(c.t.as_deref(), Some("2.5"));
        assert_eq!(c.grid.as_deref(), Some("0:1:3"));
        assert_eq!(c.tilts.as_deref(), Some("0,-0.5"));
        let c: FileConfig = toml::from_str("t = 100\n").unwrap();
        assert_eq!(c.t.as_deref(), Some("100"));
        assert_eq!(toml::from_str::<FileConfig>("").unwrap().t, None);
    }

    #[test]
    fn hash_depends_on_settings() {
        let a = config_hash("rate", &("exp(1)", 1));
        let b = config_hash("rate", &("exp(1)", 2));
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
        assert_eq!(a, config_hash("rate", &("exp(1)", 1)));
    }
}
