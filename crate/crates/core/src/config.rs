//! Task variant configuration: the eight items, the agent's preferred
//! ranking, its reasons and phrasing, and turn-taking timing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentProfile, ItemReasons, Phrasebook};
use crate::model::{ObjectId, Ranking, TASK_OBJECTS};
use crate::session::TimingConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing variant config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid variant {variant}: {detail}")]
    Invalid { variant: String, detail: String },
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
}

/// An item as shown to the participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub object_id: ObjectId,
    pub name: String,
    pub description: String,
    pub icon_ref: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemEntry {
    object_id: ObjectId,
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    icon_ref: String,
    raise_reason: String,
    lower_reason: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariantFile {
    variant_id: String,
    #[serde(default)]
    title: String,
    agent_preferred: Vec<u8>,
    #[serde(default)]
    max_moves_per_turn: Option<u32>,
    #[serde(default)]
    timing: TimingConfig,
    #[serde(default)]
    phrasebook: Phrasebook,
    items: Vec<ItemEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskVariantConfig {
    pub variant_id: String,
    pub title: String,
    pub items: Vec<ItemSpec>,
    pub agent_preferred: Ranking,
    pub reasons: BTreeMap<ObjectId, ItemReasons>,
    pub timing: TimingConfig,
    pub max_moves_per_turn: u32,
    pub phrasebook: Phrasebook,
}

const BUILTIN_A: &str = include_str!("../../../configs/desert-a.toml");
const BUILTIN_B: &str = include_str!("../../../configs/desert-b.toml");

impl TaskVariantConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: VariantFile = toml::from_str(text)?;
        let invalid = |detail: String| ConfigError::Invalid {
            variant: file.variant_id.clone(),
            detail,
        };

        if file.variant_id.trim().is_empty() {
            return Err(invalid("variant_id is empty".into()));
        }
        if file.items.len() != TASK_OBJECTS {
            return Err(invalid(format!(
                "expected {TASK_OBJECTS} items, found {}",
                file.items.len()
            )));
        }
        let ids: BTreeSet<u8> = file.items.iter().map(|i| i.object_id.get()).collect();
        if ids != (1..=TASK_OBJECTS as u8).collect() {
            return Err(invalid(format!(
                "item ids must be exactly 1..={TASK_OBJECTS}"
            )));
        }
        let agent_preferred =
            Ranking::task(&file.agent_preferred).map_err(|e| invalid(e.to_string()))?;
        if !agent_preferred.is_complete() {
            return Err(invalid("agent_preferred must fill all five boxes".into()));
        }
        file.timing.validate().map_err(invalid)?;
        let max_moves_per_turn = file
            .max_moves_per_turn
            .unwrap_or(AgentProfile::DEFAULT_MAX_MOVES);
        if max_moves_per_turn == 0 {
            return Err(invalid("max_moves_per_turn must be at least 1".into()));
        }

        let mut items = Vec::with_capacity(TASK_OBJECTS);
        let mut reasons = BTreeMap::new();
        for entry in file.items {
            reasons.insert(
                entry.object_id,
                ItemReasons {
                    item: entry.name.clone(),
                    raise_reason: entry.raise_reason,
                    lower_reason: entry.lower_reason,
                },
            );
            items.push(ItemSpec {
                object_id: entry.object_id,
                name: entry.name,
                description: entry.description,
                icon_ref: entry.icon_ref,
            });
        }
        items.sort_by_key(|i| i.object_id);

        Ok(Self {
            variant_id: file.variant_id,
            title: file.title,
            items,
            agent_preferred,
            reasons,
            timing: file.timing,
            max_moves_per_turn,
            phrasebook: file.phrasebook,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Loads every `*.toml` in `dir`, sorted by variant id.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<Self>, ConfigError> {
        let dir = dir.as_ref();
        let io_err = |source| ConfigError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            if path.extension().is_some_and(|e| e == "toml") {
                out.push(Self::load(&path)?);
            }
        }
        out.sort_by(|a, b| a.variant_id.cmp(&b.variant_id));
        Ok(out)
    }

    /// The two item sets shipped with the crate.
    pub fn builtins() -> Vec<Self> {
        [BUILTIN_A, BUILTIN_B]
            .iter()
            .map(|t| Self::from_toml_str(t).expect("shipped variant configs are valid"))
            .collect()
    }

    pub fn builtin(variant_id: &str) -> Result<Self, ConfigError> {
        Self::builtins()
            .into_iter()
            .find(|v| v.variant_id == variant_id)
            .ok_or_else(|| ConfigError::UnknownVariant(variant_id.to_string()))
    }

    pub fn agent_profile(&self, facework_enabled: bool, seed: u64) -> AgentProfile {
        AgentProfile::new(self.agent_preferred.clone(), self.reasons.clone())
            .and_then(|p| p.with_max_moves(self.max_moves_per_turn))
            .expect("variant config was validated")
            .with_facework(facework_enabled)
            .with_seed(seed)
            .with_phrasebook(self.phrasebook.clone())
    }
}
