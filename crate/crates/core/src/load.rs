//! JSON config files: game keys and run keys live in one flat object.

use crate::discrete::DiscreteFile;
use crate::lqg::LqgFile;
use crate::{DiscreteGameSpec, Error, LqgGameSpec, Result, RunConfig};
use serde_json::{Map, Value};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Discrete,
    Lqg,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnySpec {
    Discrete(DiscreteGameSpec),
    Lqg(LqgGameSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedConfig {
    pub spec: AnySpec,
    pub run: RunConfig,
}

impl AnySpec {
    pub fn kind(&self) -> Kind {
        match self {
            AnySpec::Discrete(_) => Kind::Discrete,
            AnySpec::Lqg(_) => Kind::Lqg,
        }
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Reads and validates a config file. `expect` rejects files of the other kind.
pub fn load_spec(path: impl AsRef<Path>, expect: Option<Kind>) -> Result<LoadedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let cfg = parse_config(&text)?;
    if let Some(k) = expect {
        if cfg.spec.kind() != k {
            return Err(Error::validation(format!(
                "expected a {k:?} config, found {:?}",
                cfg.spec.kind()
            )));
        }
    }
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let v: Value = serde_json::from_str(text).map_err(parse_err)?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing string key `kind`".into()))?;
    let spec = match kind {
        "lqg" => {
            let f: LqgFile = serde_json::from_value(v.clone()).map_err(parse_err)?;
            AnySpec::Lqg(LqgGameSpec::from_file(f)?)
        }
        "discrete" => {
            let f: DiscreteFile = serde_json::from_value(v.clone()).map_err(parse_err)?;
            AnySpec::Discrete(DiscreteGameSpec::from_file(f)?)
        }
        other => return Err(Error::Parse(format!("unknown kind `{other}`"))),
    };
    let run: RunConfig = serde_json::from_value(v).map_err(parse_err)?;
    run.validate()?;
    Ok(LoadedConfig { spec, run })
}

impl LoadedConfig {
    pub fn to_json(&self) -> Value {
        let (kind, game) = match &self.spec {
            AnySpec::Lqg(s) => ("lqg", serde_json::to_value(s.to_file())),
            AnySpec::Discrete(s) => ("discrete", serde_json::to_value(s.to_file())),
        };
        let mut out = Map::new();
        out.insert("kind".into(), Value::String(kind.into()));
        for src in [game.expect("spec serializes"), serde_json::to_value(&self.run).expect("run serializes")] {
            if let Value::Object(m) = src {
                out.extend(m);
            }
        }
        Value::Object(out)
    }

    pub fn lqg(&self) -> Result<&LqgGameSpec> {
        match &self.spec {
            AnySpec::Lqg(s) => Ok(s),
            _ => Err(Error::validation("config is not an lqg game")),
        }
    }

    pub fn discrete(&self) -> Result<&DiscreteGameSpec> {
        match &self.spec {
            AnySpec::Discrete(s) => Ok(s),
            _ => Err(Error::validation("config is not a discrete game")),
        }
    }
}
