use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AprioriMiner, McaMiner, MineError, RuleMiner};

/// Miners addressable by name.
#[derive(Clone, Default)]
pub struct MinerRegistry {
    miners: BTreeMap<String, Arc<dyn RuleMiner>>,
}

impl MinerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `mca` and `apriori`.
    pub fn builtin() -> Self {
        let mut registry = Self::new();
        registry.register(Arc::new(McaMiner));
        registry.register(Arc::new(AprioriMiner));
        registry
    }

    /// Adds a miner, replacing any existing one with the same name.
    pub fn register(&mut self, miner: Arc<dyn RuleMiner>) {
        self.miners.insert(miner.name().to_string(), miner);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RuleMiner>, MineError> {
        self.miners
            .get(name)
            .cloned()
            .ok_or_else(|| MineError::UnknownMiner(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.miners.keys().map(String::as_str).collect()
    }
}

impl std::fmt::Debug for MinerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.miners.keys()).finish()
    }
}
