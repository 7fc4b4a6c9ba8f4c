use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::user::UserConfig;
use crate::error::{Error, Result};
use crate::motion::MotionConfig;
use crate::pacing::PacingParams;
use crate::speech::PhrasingGraph;
use crate::trajectory::Trajectory;

/// The three compared controllers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlScheme {
    /// Fixed admittance; paces pinned at 1, natural phrase path.
    #[serde(rename = "AC")]
    Ac,
    /// Pace modulation on the natural phrase path.
    #[serde(rename = "LC_noAP", alias = "LC-noAP")]
    LcNoAp,
    /// Pace modulation with adaptive paraphrasing.
    #[serde(rename = "LC")]
    Lc,
}

impl ControlScheme {
    pub const ALL: [ControlScheme; 3] = [ControlScheme::Ac, ControlScheme::LcNoAp, ControlScheme::Lc];

    pub fn name(self) -> &'static str {
        match self {
            ControlScheme::Ac => "AC",
            ControlScheme::LcNoAp => "LC_noAP",
            ControlScheme::Lc => "LC",
        }
    }

    pub fn paced(self) -> bool {
        !matches!(self, ControlScheme::Ac)
    }
}

impl fmt::Display for ControlScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AC" | "ac" => Ok(ControlScheme::Ac),
            "LC_noAP" | "LC-noAP" | "lc_noap" | "lc-noap" => Ok(ControlScheme::LcNoAp),
            "LC" | "lc" => Ok(ControlScheme::Lc),
            other => Err(Error::Config(format!("unknown control scheme {other:?} (expected AC, LC_noAP or LC)"))),
        }
    }
}

fn default_max_duration() -> f64 {
    120.0
}

/// Everything needed to reproduce a session. Asset paths are resolved
/// relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub trajectory: PathBuf,
    pub graph: PathBuf,
    pub scheme: ControlScheme,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_duration")]
    pub max_duration_s: f64,
    #[serde(default)]
    pub motion: MotionConfig,
    #[serde(default)]
    pub pacing: PacingParams,
    #[serde(default)]
    pub user: UserConfig,
}

impl SessionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_overrides(path, &[])
    }

    /// Loads a JSON or TOML config and applies `key.path = value` overrides
    /// before validation. Values parse as JSON where possible and fall back
    /// to plain strings.
    pub fn load_with_overrides(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut value = parse_document(path, &text)?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let mut config: SessionConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.trajectory.is_relative() {
            config.trajectory = base.join(&config.trajectory);
        }
        if config.graph.is_relative() {
            config.graph = base.join(&config.graph);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.motion.params()?;
        self.pacing.validate()?;
        if !(self.max_duration_s > 0.0 && self.max_duration_s.is_finite()) {
            return Err(Error::Config("max_duration_s must be positive".into()));
        }
        Ok(())
    }

    pub fn load_assets(&self) -> Result<(Trajectory, PhrasingGraph)> {
        Ok((Trajectory::load(&self.trajectory)?, PhrasingGraph::load(&self.graph)?))
    }
}

fn parse_document(path: &Path, text: &str) -> Result<Value> {
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    if is_toml {
        let doc: toml::Value =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(doc).map_err(|e| Error::Config(e.to_string()))
    } else {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Sets the dotted `key` inside `doc`, creating intermediate tables.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key {key:?}")));
    }
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
