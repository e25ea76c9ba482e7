//! Config assembly: subcommand defaults, then the JSON config file, then
//! `--set` overrides, then `--seed`. Every user-supplied key must already
//! exist in the defaults, so typos fail loudly instead of silently running
//! the default experiment.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config, or input files: exit code 1.
    Config(String),
    /// Failures while running the experiment or writing outputs: exit code 2.
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

/// Errors out of the core library that describe a bad setup keep exit code
/// 1; anything else escaping a run is a runtime failure.
pub fn classify(e: choquet_core::Error) -> CliError {
    use choquet_core::Error;
    match e {
        Error::InvalidShape(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidConfig(_)
        | Error::Csv { .. }
        | Error::Json(_) => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

pub fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn config_error(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn build<T: Serialize + DeserializeOwned>(
    defaults: &T,
    args: &crate::RunArgs,
) -> Result<T, CliError> {
    let mut base = match serde_json::to_value(defaults).map_err(runtime)? {
        Value::Object(m) => m,
        _ => return Err(CliError::Runtime("defaults are not a JSON object".into())),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let user: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let Value::Object(user) = user else {
            return Err(CliError::Config(format!(
                "{}: top level must be a JSON object",
                path.display()
            )));
        };
        for (k, v) in user {
            set_key(&mut base, &k, v)?;
        }
    }
    for spec in &args.set {
        let (k, raw) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set wants KEY=VALUE, got `{spec}`")))?;
        let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_key(&mut base, k, v)?;
    }
    if let Some(seed) = args.seed {
        set_key(&mut base, "seed", Value::from(seed))?;
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Config(e.to_string()))
}

fn set_key(
    base: &mut serde_json::Map<String, Value>,
    key: &str,
    value: Value,
) -> Result<(), CliError> {
    if !base.contains_key(key) {
        let known: Vec<&str> = base.keys().map(|s| s.as_str()).collect();
        return Err(CliError::Config(format!(
            "unknown config key `{key}`; known keys: {}",
            known.join(", ")
        )));
    }
    base.insert(key.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Demo {
        steps: usize,
        name: String,
        seed: u64,
    }

    fn demo() -> Demo {
        Demo {
            steps: 10,
            name: "base".into(),
            seed: 0,
        }
    }

    fn args(set: &[&str], seed: Option<u64>) -> crate::RunArgs {
        crate::RunArgs {
            config: None,
            set: set.iter().map(|s| s.to_string()).collect(),
            out: "unused".into(),
            seed,
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let got: Demo = build(&demo(), &args(&["steps=25", "name=alt"], Some(9))).unwrap();
        assert_eq!(
            got,
            Demo {
                steps: 25,
                name: "alt".into(),
                seed: 9
            }
        );
    }

    #[test]
    fn unknown_key_is_named_in_the_error() {
        let err = build::<Demo>(&demo(), &args(&["stpes=25"], None)).unwrap_err();
        assert_eq!(err.code(), 1);
        assert!(err.to_string().contains("unknown config key `stpes`"));
    }

    #[test]
    fn malformed_set_is_a_config_error() {
        let err = build::<Demo>(&demo(), &args(&["steps"], None)).unwrap_err();
        assert_eq!(err.code(), 1);
    }

    #[test]
    fn wrong_value_type_is_a_config_error() {
        let err = build::<Demo>(&demo(), &args(&["steps=\"many\""], None)).unwrap_err();
        assert_eq!(err.code(), 1);
    }
}
