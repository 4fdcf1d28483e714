//! Law specifications such as `exp(1)`, `pareto(2,1)` or
//! `atoms(1:0.5,2:0.5)`.
//!
//! Besides the basic families, `mix(w1@spec1;w2@spec2)` builds a finite
//! mixture and `empirical(path)` reads one positive decimal per line.

use std::path::Path;

use super::WaitingLaw;
use crate::error::{Error, Result};

fn err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn number(spec: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(spec, format!("`{}` is not a number", s.trim())))
}

/// Splits on `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn numbers(spec: &str, args: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = args.split(',').collect();
    if parts.len() != n {
        return Err(err(spec, format!("expected {n} argument(s), got {}", parts.len())));
    }
    parts.into_iter().map(|p| number(spec, p)).collect()
}

fn read_samples(spec: &str, path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(spec, format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| err(spec, format!("line {}: `{line}` is not a number", lineno + 1)))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(spec, format!("line {}: sample {v} is not positive", lineno + 1)));
        }
        out.push(v);
    }
    Ok(out)
}

/// Parses a law specification.
pub fn parse_law(spec: &str) -> Result<WaitingLaw> {
    let s = spec.trim();
    let open = s.find('(').ok_or_else(|| err(spec, "missing `(`"))?;
    if !s.ends_with(')') {
        return Err(err(spec, "missing closing `)`"));
    }
    let name = s[..open].trim().to_ascii_lowercase();
    let args = &s[open + 1..s.len() - 1];
    let wrap = |r: Result<WaitingLaw>| {
        r.map_err(|e| match e {
            Error::InvalidLaw(reason) => err(spec, reason),
            other => other,
        })
    };
    match name.as_str() {
        "exp" => {
            let v = numbers(spec, args, 1)?;
            wrap(WaitingLaw::exponential(v[0]))
        }
        "gamma" => {
            let v = numbers(spec, args, 2)?;
            wrap(WaitingLaw::gamma(v[0], v[1]))
        }
        "pareto" => {
            let v = numbers(spec, args, 2)?;
            wrap(WaitingLaw::pareto(v[0], v[1]))
        }
        "weibull" => {
            let v = numbers(spec, args, 2)?;
            wrap(WaitingLaw::weibull(v[0], v[1]))
        }
        "det" => {
            let v = numbers(spec, args, 1)?;
            wrap(WaitingLaw::deterministic(v[0]))
        }
        "atoms" => {
            let mut atoms = Vec::new();
            for part in args.split(',') {
                let (v, p) = part
                    .split_once(':')
                    .ok_or_else(|| err(spec, format!("atom `{}` lacks `value:prob`", part.trim())))?;
                atoms.push((number(spec, v)?, number(spec, p)?));
            }
            wrap(WaitingLaw::atoms(atoms))
        }
        "empirical" => {
            let path = args.trim();
            if path.is_empty() {
                return Err(err(spec, "empty path"));
            }
            let samples = read_samples(spec, Path::new(path))?;
            wrap(WaitingLaw::empirical(&samples, path))
        }
        "mix" => {
            let mut comps = Vec::new();
            for part in split_top(args, ';') {
                let (w, sub) = part
                    .split_once('@')
                    .ok_or_else(|| err(spec, format!("component `{}` lacks `weight@law`", part.trim())))?;
                comps.push((number(spec, w)?, parse_law(sub)?));
            }
            wrap(WaitingLaw::mixture(comps))
        }
        other => Err(err(spec, format!("unknown family `{other}`"))),
    }
}

impl std::str::FromStr for WaitingLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_law(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    #[test]
    fn parses_every_family() {
        for s in [
            "exp(1)",
            "gamma(2,1)",
            "pareto(2, 1)",
            "weibull(2,1)",
            "det(1)",
            "atoms(1:0.5,2:0.5)",
            "mix(0.5@atoms(1:0.5,2:0.5);0.5@pareto(2,1))",
        ] {
            let law = parse_law(s).unwrap();
            // display round-trips through the parser
            let again = parse_law(&law.to_string()).unwrap();
            assert_eq!(law.to_string(), again.to_string());
        }
        assert!(matches!(parse_law("weibull(1,2)").unwrap().family(), Family::Exponential { .. }));
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["exp()", "exp(-1)", "gamma(1)", "atoms(1:0.5)", "foo(1)", "exp(1", "atoms(0:1)"] {
            assert!(matches!(parse_law(s), Err(Error::Parse { .. })), "{s}");
        }
    }

    #[test]
    fn empirical_from_file() {
        let dir = std::env::temp_dir().join(format!("renewal-ldp-parse-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.txt");
        std::fs::write(&path, "2.0\n3.0\n\n").unwrap();
        let law = parse_law(&format!("empirical({})", path.display())).unwrap();
        assert_eq!(law.mean(), 2.5);
        assert_eq!(law.xi(), f64::INFINITY);
        std::fs::write(&path, "2.0\n-1\n").unwrap();
        assert!(parse_law(&format!("empirical({})", path.display())).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
