pub mod mc;
pub mod rate;
pub mod simulate;
pub mod verify;

use renewal_ldp::{parse_law, BoundedFn, WaitingLaw};

use crate::config::{pick, require, FileConfig};
use crate::error::CliError;
use crate::Common;

pub fn law(common: &Common, file: &FileConfig) -> Result<WaitingLaw, CliError> {
    let spec = require(pick(&common.law, &file.law), "law")?;
    Ok(parse_law(&spec)?)
}

pub fn reward(flag: &Option<String>, file: &FileConfig) -> Result<BoundedFn, CliError> {
    let name = pick(flag, &file.f).unwrap_or_else(|| "one".into());
    Ok(BoundedFn::parse(&name)?)
}

/// Output path from the flag or the config file.
pub fn out(common: &Common, file: &FileConfig) -> Option<std::path::PathBuf> {
    pick(&common.out, &file.out)
}

pub fn positive(values: Vec<f64>, name: &str) -> Result<Vec<f64>, CliError> {
    if values.iter().all(|v| *v > 0.0) {
        Ok(values)
    } else {
        Err(CliError::Config(format!("`{name}` values must be positive")))
    }
}
