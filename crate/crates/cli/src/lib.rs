//! Experiment runner behind the `disint` binary.

pub mod bundled;
pub mod config;
pub mod error;
pub mod figure;
pub mod runner;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Overrides, Resolved};
pub use error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DISINT_OUT_DIR";

/// Reads a config from a path, falling back to a bundled config of that name.
pub fn load_config_text(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return fs::read_to_string(path).map_err(|e| CliError::io(path, e));
    }
    bundled::bundled(arg).map(str::to_string).ok_or_else(|| {
        CliError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no such file or bundled config",
            ),
        )
    })
}

pub fn load_and_resolve(arg: &str, overrides: &Overrides) -> Result<Resolved, CliError> {
    ExperimentConfig::parse(&load_config_text(arg)?)?.resolve(overrides)
}

/// `--out-dir` if given, else the environment default, else `disint-out/<name>`.
pub fn output_dir(flag: Option<PathBuf>, env: Option<PathBuf>, name: &str) -> PathBuf {
    flag.or(env)
        .unwrap_or_else(|| Path::new("disint-out").join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_config_resolves() {
        for (name, _) in bundled::BUNDLED {
            let resolved = load_and_resolve(name, &Overrides::default()).unwrap();
            assert_eq!(resolved.config.name, name);
        }
    }

    #[test]
    fn output_dir_precedence() {
        let flag = Some(PathBuf::from("a"));
        let env = Some(PathBuf::from("b"));
        assert_eq!(output_dir(flag, env.clone(), "x"), PathBuf::from("a"));
        assert_eq!(output_dir(None, env, "x"), PathBuf::from("b"));
        assert_eq!(
            output_dir(None, None, "x"),
            Path::new("disint-out").join("x")
        );
    }
}
