//! `gen` settings: command-line flags layered over an optional TOML file
//! using the same key names.

use anyhow::{bail, Context, Result};
use articraft::layout::Complexity;
use articraft::Category;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AgentMode {
    Offline,
    Remote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AugmentMode {
    None,
    Full,
}

/// Fractions of simple / mid / complex samples when no complexity is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mix {
    pub simple: f64,
    pub mid: f64,
    pub complex: f64,
}

impl Default for Mix {
    fn default() -> Self {
        Mix {
            simple: 0.2,
            mid: 0.3,
            complex: 0.5,
        }
    }
}

impl Mix {
    pub fn pick(&self, u: f64) -> Complexity {
        let total = self.simple + self.mid + self.complex;
        let u = u * total;
        if u < self.simple {
            Complexity::Simple
        } else if u < self.simple + self.mid {
            Complexity::Mid
        } else {
            Complexity::Complex
        }
    }

    fn check(&self) -> Result<()> {
        let w = [self.simple, self.mid, self.complex];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            bail!("mix weights must be non-negative with a positive sum");
        }
        Ok(())
    }
}

/// Every key is optional in the file; flags win over file values.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenFile {
    pub category: Option<String>,
    pub complexity: Option<String>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub agents: Option<AgentMode>,
    pub augment: Option<AugmentMode>,
    pub points_per_part: Option<usize>,
    pub mix: Option<Mix>,
}

impl GenFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Resolved run configuration, recorded in the manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub category: Option<Category>,
    pub complexity: Option<Complexity>,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub agents: AgentMode,
    pub augment: AugmentMode,
    pub points_per_part: usize,
    pub mix: Mix,
}

pub fn parse_category(s: &str) -> Result<Option<Category>> {
    if s.eq_ignore_ascii_case("any") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(anyhow::Error::msg)
}

pub fn parse_complexity(s: &str) -> Result<Option<Complexity>> {
    if s.eq_ignore_ascii_case("mixed") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(anyhow::Error::msg)
}

pub struct GenFlags {
    pub category: Option<String>,
    pub complexity: Option<String>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub agents: Option<AgentMode>,
    pub augment: Option<AugmentMode>,
    pub points_per_part: Option<usize>,
}

impl GenConfig {
    /// The output directory is left out so that runs into different
    /// directories produce identical manifests.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::json!({
            "category": self.category.map_or("any", |c| c.name()),
            "complexity": self.complexity.map_or("mixed", |c| c.name()),
            "count": self.count,
            "seed": self.seed,
            "agents": self.agents,
            "augment": self.augment,
            "points_per_part": self.points_per_part,
            "mix": self.mix,
        })
    }

    pub fn resolve(flags: GenFlags, file: GenFile) -> Result<Self> {
        let category = flags.category.or(file.category);
        let complexity = flags.complexity.or(file.complexity);
        let cfg = GenConfig {
            category: category.as_deref().map(parse_category).transpose()?.flatten(),
            complexity: complexity.as_deref().map(parse_complexity).transpose()?.flatten(),
            count: flags.count.or(file.count).unwrap_or(10),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags
                .out
                .or(file.out)
                .context("an output directory is required (--out or `out` in the config file)")?,
            agents: flags.agents.or(file.agents).unwrap_or(AgentMode::Offline),
            augment: flags.augment.or(file.augment).unwrap_or(AugmentMode::None),
            points_per_part: flags.points_per_part.or(file.points_per_part).unwrap_or(256),
            mix: file.mix.unwrap_or_default(),
        };
        cfg.mix.check()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: GenFile = toml::from_str(
            "count = 7\nseed = 3\nout = \"data\"\ncomplexity = \"mid\"\n[mix]\nsimple = 1.0\nmid = 0.0\ncomplex = 0.0\n",
        )
        .unwrap();
        let flags = GenFlags {
            category: None,
            complexity: None,
            count: Some(2),
            seed: None,
            out: None,
            agents: None,
            augment: None,
            points_per_part: None,
        };
        let cfg = GenConfig::resolve(flags, file).unwrap();
        assert_eq!((cfg.count, cfg.seed), (2, 3));
        assert_eq!(cfg.complexity, Some(Complexity::Mid));
        assert_eq!(cfg.mix.pick(0.99), Complexity::Simple);
        assert!(toml::from_str::<GenFile>("colour = 1").is_err());
    }

    #[test]
    fn default_mix() {
        let m = Mix::default();
        assert_eq!(m.pick(0.1), Complexity::Simple);
        assert_eq!(m.pick(0.3), Complexity::Mid);
        assert_eq!(m.pick(0.6), Complexity::Complex);
    }
}
