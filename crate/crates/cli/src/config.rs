//! Config resolution: defaults < `KINEX_SEED` < JSON file < command-line flags.

use kinex::experiments::{ExperimentConfig, ModelKind, Preset};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("config must be a JSON object")]
    NotAnObject,
    #[error("invalid value for `{field}`: {message}")]
    Type { field: String, message: String },
    #[error(transparent)]
    Invalid(#[from] kinex::Error),
}

/// Values given on the command line; `None` leaves lower levels in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_agents: Option<usize>,
    pub goods: Option<u64>,
    pub money: Option<f64>,
    pub ratio: Option<f64>,
    pub ratios: Option<Vec<f64>>,
    pub model: Option<ModelKind>,
    pub lambda: Option<f64>,
    pub sweeps: Option<u64>,
    pub burn_in: Option<u64>,
    pub out: Option<String>,
    pub preset: Option<Preset>,
}

fn known_keys() -> Vec<String> {
    match serde_json::to_value(ExperimentConfig::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Resolves the experiment config from an optional JSON document, flag
/// overrides and the `KINEX_SEED` value, then validates it.
pub fn parse_config(
    file: Option<&str>,
    overrides: &Overrides,
    env_seed: Option<&str>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    let mut explicit_burn_in = false;
    let mut explicit_snapshots = false;

    if let Some(raw) = env_seed {
        config.seed = raw.trim().parse().map_err(|e| ConfigError::Type {
            field: "KINEX_SEED".into(),
            message: format!("{e} ({raw:?})"),
        })?;
    }

    if let Some(text) = file.filter(|t| !t.trim().is_empty()) {
        let doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let Value::Object(doc) = doc else {
            return Err(ConfigError::NotAnObject);
        };
        explicit_burn_in = doc.contains_key("burn_in_sweeps");
        explicit_snapshots = doc.contains_key("snapshot_sweeps");
        let known = known_keys();
        let unknown: Vec<String> = doc.keys().filter(|k| !known.contains(k)).cloned().collect();
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }
        let Value::Object(mut merged) =
            serde_json::to_value(&config).map_err(kinex::Error::from)?
        else {
            unreachable!("config serializes to an object");
        };
        for (k, v) in doc {
            merged.insert(k, v);
        }
        config = from_object(merged)?;
    }

    let o = overrides;
    if let Some(v) = o.seed {
        config.seed = v;
    }
    if let Some(v) = o.n_agents {
        config.n_agents = v;
    }
    if let Some(v) = o.money {
        config.total_money = v;
    }
    if let Some(v) = o.goods {
        config.total_goods = Some(v);
        config.ratio = None;
    }
    if let Some(p) = o.preset {
        config.ratio = Some(p.ratio());
        config.total_goods = None;
    }
    if let Some(v) = o.ratio {
        config.ratio = Some(v);
        config.total_goods = None;
    }
    if let Some(v) = &o.ratios {
        config.ratios = v.clone();
    }
    if let Some(v) = o.model {
        config.model = v;
    }
    if let Some(v) = o.lambda {
        config.lambda = v;
    }
    if let Some(v) = o.sweeps {
        config.n_sweeps = v;
    }
    if let Some(v) = o.burn_in {
        config.burn_in_sweeps = v;
        explicit_burn_in = true;
    }
    if let Some(v) = &o.out {
        config.output_dir = v.clone();
    }

    // Defaults that were never set explicitly follow a shorter run.
    if !explicit_burn_in {
        config.burn_in_sweeps = config.burn_in_sweeps.min(config.n_sweeps);
    }
    if !explicit_snapshots {
        config.snapshot_sweeps.retain(|&s| s < config.n_sweeps);
        config.snapshot_sweeps.push(config.n_sweeps);
    }

    config.validate()?;
    Ok(config)
}

/// Deserializes field by field so a type error names the offending key.
fn from_object(map: Map<String, Value>) -> Result<ExperimentConfig, ConfigError> {
    let defaults = serde_json::to_value(ExperimentConfig::default()).map_err(kinex::Error::from)?;
    for (k, v) in &map {
        let mut probe = defaults.clone();
        if let Value::Object(obj) = &mut probe {
            obj.insert(k.clone(), v.clone());
        }
        if let Err(e) = serde_json::from_value::<ExperimentConfig>(probe) {
            return Err(ConfigError::Type {
                field: k.clone(),
                message: e.to_string(),
            });
        }
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::Type {
        field: "config".into(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config(Some(""), &Overrides::default(), None).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.n_agents, 1000);
        assert_eq!(c.effective_ratio(), 1.0);
        assert_eq!(c.seed, 42);
        assert_eq!(c.burn_in_sweeps, 1000);
        assert_eq!(parse_config(None, &Overrides::default(), None).unwrap(), c);
    }

    #[test]
    fn flags_beat_file_beats_env() {
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let c = parse_config(Some(r#"{"seed": 7}"#), &flags, Some("5")).unwrap();
        assert_eq!(c.seed, 9);
        let c = parse_config(Some(r#"{"seed": 7}"#), &Overrides::default(), Some("5")).unwrap();
        assert_eq!(c.seed, 7);
        let c = parse_config(None, &Overrides::default(), Some("5")).unwrap();
        assert_eq!(c.seed, 5);
    }

    #[test]
    fn lambda_out_of_range_names_field() {
        let err =
            parse_config(Some(r#"{"lambda": 1.5}"#), &Overrides::default(), None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lambda") && msg.contains("[0, 1)"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err =
            parse_config(Some("{\n  \"seed\": ,\n}"), &Overrides::default(), None).unwrap_err();
        match err {
            ConfigError::Parse { line, column, .. } => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = parse_config(
            Some(r#"{"sede": 1, "n_agent": 3, "seed": 2}"#),
            &Overrides::default(),
            None,
        )
        .unwrap_err();
        match err {
            ConfigError::UnknownKeys(keys) => assert_eq!(keys, vec!["n_agent", "sede"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_field() {
        let err =
            parse_config(Some(r#"{"n_sweeps": "many"}"#), &Overrides::default(), None).unwrap_err();
        assert!(
            matches!(err, ConfigError::Type { ref field, .. } if field == "n_sweeps"),
            "{err}"
        );
    }

    #[test]
    fn ratio_flag_replaces_file_goods() {
        let flags = Overrides {
            ratio: Some(2.0),
            ..Default::default()
        };
        let c = parse_config(Some(r#"{"total_goods": 10}"#), &flags, None).unwrap();
        assert_eq!(c.goods(), 2000);
        assert!(parse_config(
            Some(r#"{"total_goods": 10, "ratio": 1.0}"#),
            &Overrides::default(),
            None
        )
        .is_err());
    }

    #[test]
    fn presets_set_the_ratio() {
        let flags = Overrides {
            preset: Some(Preset::HundredToOne),
            ..Default::default()
        };
        assert_eq!(parse_config(None, &flags, None).unwrap().goods(), 10);
    }

    #[test]
    fn short_runs_adapt_implicit_defaults() {
        let flags = Overrides {
            sweeps: Some(50),
            ..Default::default()
        };
        let c = parse_config(None, &flags, None).unwrap();
        assert_eq!(c.burn_in_sweeps, 50);
        assert_eq!(c.snapshot_sweeps, vec![0, 10, 50]);
        let err = parse_config(Some(r#"{"burn_in_sweeps": 100}"#), &flags, None).unwrap_err();
        assert!(err.to_string().contains("burn_in_sweeps"), "{err}");
    }

    #[test]
    fn bad_env_seed_is_rejected() {
        assert!(matches!(
            parse_config(None, &Overrides::default(), Some("abc")),
            Err(ConfigError::Type { .. })
        ));
    }
}
