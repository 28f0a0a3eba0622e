//! The run configuration: every constant a command uses, loadable from TOML
//! and echoed into each output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use birdcall::features::BAND_LIMITED;
use birdcall::{CbrnnConfig, FeatureConfig, FeatureSet, TrainConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentFlags {
    pub blocks_mixing: bool,
    pub test_mixing: bool,
    /// Both mixings at once are refused unless this is set.
    pub allow_combined: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub audio_dir: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub features: FeatureConfig,
    pub model: CbrnnConfig,
    pub train: TrainConfig,
    pub augment: AugmentFlags,
    pub paths: Paths,
}

/// Options shared by every command that builds a [`RunConfig`].
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML run configuration; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Feature classes fed to the network: mbe, domfreq or both.
    #[arg(long)]
    pub features: Option<FeatureSet>,
    /// Restrict mel bands and peak picking to 3 to 8 kHz.
    #[arg(long)]
    pub band_limited: bool,
}

impl RunConfig {
    pub fn load(args: &ConfigArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(features) = args.features {
            cfg.model.features = features;
        }
        if args.band_limited {
            cfg.features.band_limited = Some(BAND_LIMITED);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate(birdcall::SAMPLE_RATE)?;
        self.model.validate()?;
        self.train.validate()?;
        if self.augment.blocks_mixing && self.augment.test_mixing && !self.augment.allow_combined {
            bail!("blocks mixing and test mixing together need --allow-combined");
        }
        Ok(())
    }

    /// Writes the resolved configuration as `config.toml` in `dir`.
    pub fn echo(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = toml::to_string_pretty(self).context("serializing config")?;
        let path = dir.join("config.toml");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Returns `flag` if given, else the config value, failing with `what` if
/// neither is set or the path does not exist.
pub fn existing_path(flag: &Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let Some(path) = flag.clone().or_else(|| configured.clone()) else {
        bail!("no {what} given (pass a flag or set it under [paths] in the config)");
    };
    if !path.exists() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(path)
}

/// Like [`existing_path`] for an output location, which is created if needed.
pub fn output_path(flag: &Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let Some(path) = flag.clone().or_else(|| configured.clone()) else {
        bail!("no {what} given (pass a flag or set it under [paths] in the config)");
    };
    std::fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path)
}

/// Independent per-task seeds from one root seed (splitmix64).
pub fn derive_seed(root: u64, task: u64) -> u64 {
    let mut z = root.wrapping_add(task.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
