//! Run configuration. Every CLI flag has a key here; flags win over the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::DEFAULT_TRIALS;
use crate::cluster::DEFAULT_MIN_CLUSTER_SIZES;
use crate::embed::DEFAULT_BATCH_SIZE;
use crate::error::{Error, Result};
use crate::repr::ReprMode;
use crate::triples::{RelationForm, SchemePreset};

pub const ENDPOINT_ENV: &str = "TRIPLEX_EMBED_URL";
pub const HASH_PROVIDER: &str = "hash";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Restricts stages to one representation mode.
    pub mode: Option<ReprMode>,
    /// Embedding providers: `hash` or model names served by the endpoint.
    pub providers: Vec<String>,
    pub paths: Paths,
    pub split: SplitConfig,
    pub triples: TriplesConfig,
    pub repr: ReprConfig,
    pub embed: EmbedConfig,
    pub cluster: ClusterConfig,
    pub propagate: PropagateConfig,
    pub classify: ClassifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            threads: 0,
            mode: None,
            providers: vec![HASH_PROVIDER.to_string()],
            paths: Paths::default(),
            split: SplitConfig::default(),
            triples: TriplesConfig::default(),
            repr: ReprConfig::default(),
            embed: EmbedConfig::default(),
            cluster: ClusterConfig::default(),
            propagate: PropagateConfig::default(),
            classify: ClassifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw corpus JSONL.
    pub corpus: PathBuf,
    /// CoNLL-U file or directory of `.conllu` files.
    pub parses: PathBuf,
    /// Working directory for every stage's outputs.
    pub out: PathBuf,
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        for p in [&mut self.corpus, &mut self.parses, &mut self.out] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: PathBuf::from("corpus.jsonl"),
            parses: PathBuf::from("parses"),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub n_cluster: usize,
    pub n_class: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            n_cluster: 5000,
            n_class: 10000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriplesConfig {
    pub scheme: SchemePreset,
    pub relation: RelationForm,
    /// Take passive subjects (`nsubjpass`, `nsubj:pass`) as triple subjects.
    pub accept_passive: bool,
}

impl Default for TriplesConfig {
    fn default() -> Self {
        TriplesConfig {
            scheme: SchemePreset::Spacy,
            relation: RelationForm::Surface,
            accept_passive: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReprConfig {
    /// Appends the serialized knowledge graph to hybrid texts.
    pub include_graph: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    pub hash_dim: usize,
    pub batch_size: usize,
    /// Embedding service base URL; the environment variable wins.
    pub endpoint: Option<String>,
    pub retries: u32,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            hash_dim: 256,
            batch_size: DEFAULT_BATCH_SIZE,
            endpoint: None,
            retries: 4,
        }
    }
}

impl EmbedConfig {
    pub fn resolved_endpoint(&self) -> Option<String> {
        std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| self.endpoint.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub min_cluster_sizes: Vec<usize>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            k_min: 3,
            k_max: 12,
            min_cluster_sizes: DEFAULT_MIN_CLUSTER_SIZES.to_vec(),
        }
    }
}

impl ClusterConfig {
    pub fn ks(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateConfig {
    pub neighbors: usize,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        PropagateConfig { neighbors: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub trials: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { trials: DEFAULT_TRIALS }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("config file {} not found", path.display())),
            _ => Error::io(path, e),
        })?;
        let mut config = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(base) = path.parent() {
            config.paths.rebase(base);
        }
        Ok(config)
    }

    /// Paths are kept as written; [`Config::load`] resolves them against the file's directory.
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster.k_min == 0 || self.cluster.k_min > self.cluster.k_max {
            return Err(Error::Config(format!(
                "invalid k range {}..={}",
                self.cluster.k_min, self.cluster.k_max
            )));
        }
        if self.cluster.min_cluster_sizes.iter().any(|&s| s < 2) {
            return Err(Error::Config("min_cluster_sizes entries must be at least 2".into()));
        }
        if self.providers.is_empty() {
            return Err(Error::Config("no embedding providers configured".into()));
        }
        if self.embed.hash_dim < 2 {
            return Err(Error::Config("hash_dim must be at least 2".into()));
        }
        if self.classify.trials == 0 {
            return Err(Error::Config("classify.trials must be at least 1".into()));
        }
        if self.propagate.neighbors == 0 {
            return Err(Error::Config("propagate.neighbors must be at least 1".into()));
        }
        Ok(())
    }

    /// Modes processed by this run.
    pub fn modes(&self) -> Vec<ReprMode> {
        match self.mode {
            Some(m) => vec![m],
            None => ReprMode::ALL.to_vec(),
        }
    }
}
