use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use facework_core::config::ConfigError;
use facework_core::TaskVariantConfig;

/// Read-only set of task variants, shared by every session.
#[derive(Debug, Clone, Default)]
pub struct VariantRegistry {
    variants: BTreeMap<String, Arc<TaskVariantConfig>>,
}

impl VariantRegistry {
    pub fn new(variants: impl IntoIterator<Item = TaskVariantConfig>) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for v in variants {
            let id = v.variant_id.clone();
            if map.insert(id.clone(), Arc::new(v)).is_some() {
                return Err(ConfigError::Invalid {
                    variant: id,
                    detail: "variant id defined twice".into(),
                });
            }
        }
        Ok(Self { variants: map })
    }

    pub fn builtin() -> Self {
        Self::new(TaskVariantConfig::builtins()).expect("builtin ids are distinct")
    }

    /// Every `*.toml` in `dir`, validated up front.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::new(TaskVariantConfig::load_dir(dir)?)
    }

    pub fn get(&self, variant_id: &str) -> Option<Arc<TaskVariantConfig>> {
        self.variants.get(variant_id).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<TaskVariantConfig>> {
        self.variants.values()
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}
