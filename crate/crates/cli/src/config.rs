//! TOML experiment configuration. A config file holds the fields of one
//! experiment's config struct; unspecified fields take their defaults and
//! command-line flags override file values.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::GmresSweepConfig;

    #[test]
    fn defaults_without_file() {
        let cfg: GmresSweepConfig = load_config(None).unwrap();
        assert_eq!(cfg.fine_level, 6);
        assert_eq!(cfg.tol, 1e-6);
    }

    #[test]
    fn file_overrides_defaults() {
        let dir = std::env::temp_dir().join("helmfov_cfg");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("exp.toml");
        std::fs::write(&p, "fine_level = 4\nkappa2 = [10.0, 20.0]\n").unwrap();
        let cfg: GmresSweepConfig = load_config(Some(&p)).unwrap();
        assert_eq!(cfg.fine_level, 4);
        assert_eq!(cfg.kappa2, vec![10.0, 20.0]);
        assert_eq!(cfg.tol, 1e-6);
    }
}
