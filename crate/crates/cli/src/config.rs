use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use std::path::{Path, PathBuf};

/// Default output root when neither `--out` nor `output_dir` is given.
pub const OUTPUT_ENV: &str = "LATBS_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_ROOT: &str = "results";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config: exit 1.
    Usage(String),
    /// The numerical run itself failed: exit 1.
    Run(String),
    /// `--assert` did not hold: exit 2.
    Assertion { expected: String, got: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Run(_) => 1,
            CliError::Assertion { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
            CliError::Assertion { expected, got } => write!(f, "assertion failed: expected {expected}, got {got}"),
        }
    }
}

impl From<latbs::Error> for CliError {
    fn from(e: latbs::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

/// A replayable experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assert: Option<String>,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

impl ExperimentConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: empty_object(),
            output_dir: None,
            seed: 0,
            assert: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        if text.trim().is_empty() {
            return Err(CliError::Usage(format!("{}: config is empty", path.display())));
        }
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| schema_error(&path.display().to_string(), e))
    }

    /// Output directory: `--out`, then `output_dir`, then
    /// `$LATBS_OUTPUT_DIR/<command>`, then `results/<command>`.
    pub fn resolve_output(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        let root = std::env::var_os(OUTPUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
        root.join(&self.command)
    }
}

fn schema_error(origin: &str, e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    let field = if path == "." { "<root>".to_string() } else { path };
    CliError::Usage(format!("{origin}: schema violation at `{field}`: {}", e.into_inner()))
}

/// Overlays non-null flag values onto the file's parameter block and
/// validates the result against `P`.
pub fn merge_params<P: DeserializeOwned + Serialize>(file: &Value, flags: Value) -> Result<(P, Value), CliError> {
    let mut merged = match file {
        Value::Object(m) => m.clone(),
        Value::Null => Map::new(),
        _ => return Err(CliError::Usage("schema violation at `params`: expected an object".into())),
    };
    if let Value::Object(f) = flags {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    let value = Value::Object(merged);
    let params: P = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Usage(format!("schema violation at `params.{path}`: {}", e.into_inner()))
    })?;
    let resolved = serde_json::to_value(&params).map_err(|e| CliError::Run(e.to_string()))?;
    Ok((params, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        d: usize,
        eps: Vec<f64>,
    }

    impl Default for P {
        fn default() -> Self {
            P { d: 3, eps: vec![0.1] }
        }
    }

    #[test]
    fn flags_override_file_values() {
        let (p, _): (P, _) = merge_params(&json!({"d": 2, "eps": [0.5]}), json!({"d": 4, "eps": null})).unwrap();
        assert_eq!(p, P { d: 4, eps: vec![0.5] });
    }

    #[test]
    fn unknown_field_reports_path() {
        let err = merge_params::<P>(&json!({"dd": 2}), json!({})).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
        let err = merge_params::<P>(&json!({"eps": [0.1, "x"]}), json!({})).unwrap_err();
        assert!(err.to_string().contains("params.eps[1]"), "{err}");
    }
}
