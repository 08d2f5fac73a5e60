//! Merging of command-line flags over a JSON config file.
//!
//! Every command's parameters are a struct of optional fields that is both
//! a clap argument group and a serde record with the same kebab-case keys.
//! The config file is a flat JSON object; keys a command does not know are
//! ignored, so one file can serve every subcommand.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::UsageError;

pub fn load(path: Option<&Path>) -> anyhow::Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(UsageError(format!("config {} must hold a JSON object", path.display())).into()),
        Err(e) => Err(UsageError(format!("config {} is not valid JSON: {e}", path.display())).into()),
    }
}

/// `flags` with every unset field filled from `config`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: &Map<String, Value>) -> anyhow::Result<T> {
    let Value::Object(set) = serde_json::to_value(flags)? else {
        unreachable!("parameter records serialize to objects")
    };
    let mut merged = config.clone();
    merged.extend(set.into_iter().filter(|(_, v)| !v.is_null()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| UsageError(format!("bad config value: {e}")).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Default, Debug, PartialEq)]
    #[serde(rename_all = "kebab-case")]
    struct P {
        n: Option<usize>,
        rho_over_r: Option<f64>,
    }

    #[test]
    fn flags_win_over_config() {
        let cfg: Map<String, Value> = serde_json::from_str(r#"{"n": 5, "rho-over-r": 0.25, "other": true}"#).unwrap();
        let flags = P {
            n: Some(7),
            rho_over_r: None,
        };
        assert_eq!(
            merge(&flags, &cfg).unwrap(),
            P {
                n: Some(7),
                rho_over_r: Some(0.25)
            }
        );
        let bad: Map<String, Value> = serde_json::from_str(r#"{"n": "five"}"#).unwrap();
        assert!(merge(&P::default(), &bad).is_err());
    }
}
