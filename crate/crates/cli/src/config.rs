use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hyperevent::estimation::FitOptions;
use hyperevent::sampling::ControlConfig;
use hyperevent::simulation::{RecoveryConfig, SimulationConfig};
use hyperevent::statistics::{AuthorKind, CitationKind, StatKind, TransformSpec};
use hyperevent::stream::{CitationPolicy, IngestOptions};
use serde::{Deserialize, Serialize};

/// One file drives every subcommand; command-line flags override it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub ingest: Ingest,
    pub model: Model,
    pub transform: Transform,
    pub sampling: Sampling,
    pub estimation: FitOptions,
    pub simulation: SimulationConfig,
    pub recovery: Recovery,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub events: Option<PathBuf>,
    pub actors: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    #[default]
    Drop,
    Strict,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ingest {
    pub citation_policy: Policy,
}

impl Ingest {
    pub fn options(&self) -> IngestOptions {
        IngestOptions {
            citation_policy: match self.citation_policy {
                Policy::Drop => CitationPolicy::DropWithWarning,
                Policy::Strict => CitationPolicy::Strict,
            },
        }
    }
}

/// Kinds entering each model. An absent list means every kind; an empty
/// list skips that model.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub author_kinds: Option<Vec<AuthorKind>>,
    pub citation_kinds: Option<Vec<CitationKind>>,
}

impl Model {
    pub fn author(&self) -> Vec<AuthorKind> {
        self.author_kinds.clone().unwrap_or_else(|| AuthorKind::ALL.to_vec())
    }

    pub fn citation(&self) -> Vec<CitationKind> {
        self.citation_kinds.clone().unwrap_or_else(|| CitationKind::ALL.to_vec())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Transform {
    pub sqrt: bool,
    pub standardize: bool,
    pub citation_repetition_sqrt: bool,
}

impl Default for Transform {
    fn default() -> Self {
        Transform { sqrt: true, standardize: true, citation_repetition_sqrt: true }
    }
}

impl Transform {
    pub fn spec(&self, kinds: &[StatKind]) -> TransformSpec {
        let mut spec = TransformSpec::sqrt_standardize(kinds).with_citation_repetition_sqrt(self.citation_repetition_sqrt);
        for c in &mut spec.columns {
            c.sqrt &= self.sqrt;
            c.standardize &= self.standardize;
        }
        spec
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub author_controls: usize,
    pub citation_controls: usize,
    pub seed: Option<u64>,
    pub distinct: bool,
}

impl Default for Sampling {
    fn default() -> Self {
        let d = ControlConfig::default();
        Sampling {
            author_controls: d.author_controls,
            citation_controls: d.citation_controls,
            seed: None,
            distinct: d.distinct,
        }
    }
}

impl Sampling {
    pub fn controls(&self) -> Result<ControlConfig> {
        let Some(seed) = self.seed else {
            bail!("a sampling seed is required (set [sampling] seed or pass --seed)");
        };
        Ok(ControlConfig {
            author_controls: self.author_controls,
            citation_controls: self.citation_controls,
            seed,
            distinct: self.distinct,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recovery {
    pub replicates: usize,
    pub author_kinds: Vec<AuthorKind>,
    pub citation_kinds: Vec<CitationKind>,
}

impl Default for Recovery {
    fn default() -> Self {
        Recovery { replicates: 20, author_kinds: Vec::new(), citation_kinds: Vec::new() }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            }
        }
    }

    pub fn recovery(&self) -> Result<RecoveryConfig> {
        Ok(RecoveryConfig {
            simulation: self.simulation.clone(),
            controls: self.sampling.controls()?,
            fit: self.estimation.clone(),
            replicates: self.recovery.replicates,
            author_kinds: self.recovery.author_kinds.clone(),
            citation_kinds: self.recovery.citation_kinds.clone(),
        })
    }

    pub fn events_path(&self) -> Result<&Path> {
        self.paths.events.as_deref().context("no events file (set [paths] events or pass --events)")
    }

    pub fn actors_path(&self) -> Result<&Path> {
        self.paths.actors.as_deref().context("no actors file (set [paths] actors or pass --actors)")
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.paths.output.as_deref().context("no output directory (set [paths] output or pass --output)")
    }

    /// Writes the resolved configuration next to the artifacts.
    pub fn echo(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = toml::to_string_pretty(self).context("serializing the run configuration")?;
        std::fs::write(dir.join("config.toml"), text)?;
        Ok(())
    }
}
