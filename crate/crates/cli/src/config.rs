//! `key = value` experiment files. Blank lines and `#` comments are skipped.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "data",
    "label",
    "bins",
    "missing_as_category",
    "seed",
    "threads",
    "miner.algo",
    "miner.r_max",
    "miner.s_min",
    "miner.mu_min",
    "miner.top",
    "miner.components",
    "miner.signed",
    "miner.max_seconds",
    "miner.max_candidates",
    "brl.chains",
    "brl.lambda",
    "brl.eta",
    "brl.alpha",
    "brl.max_iters",
    "brl.check_interval",
    "brl.rhat",
    "brl.max_list_len",
    "brl.thin",
    "cv.folds",
];

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("line {}: unknown key `{key}`", n + 1);
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow::anyhow!("config key `{key}`: {e}"))
            })
            .transpose()
    }

    /// `flag`, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
