//! Run configuration: an optional JSON file with command-line flags layered on top.

use std::path::{Path, PathBuf};

use clap::Args;
use potts_core::free_energy::Regime;
use potts_core::model::{ChainConfig, DEFAULT_ENUMERATION_CAP};
use potts_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub n: Option<u32>,
    pub ns: Option<Vec<u32>>,
    pub eps: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub enumeration_cap: Option<u128>,
    /// Glauber fallback for grids above the cap.
    pub mcmc: Option<ChainConfig>,
    pub expected: Option<Regime>,
}

/// Flags shared by every subcommand. Each one overrides the matching config-file field.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short = 'p', long)]
    pub p: Option<u32>,
    #[arg(short = 'q', long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Output file or directory, depending on the command
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_common(common: &CommonArgs) -> CliResult<Self> {
        let mut cfg = match &common.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        override_with(&mut cfg.p, common.p);
        override_with(&mut cfg.q, common.q);
        override_with(&mut cfg.beta, common.beta);
        override_with(&mut cfg.h, common.h);
        override_with(&mut cfg.out, common.out.clone());
        override_with(&mut cfg.seed, common.seed);
        Ok(cfg)
    }

    pub fn pq(&self) -> CliResult<(u32, u32)> {
        let p = self.p.ok_or_else(|| missing("p"))?;
        let q = self.q.ok_or_else(|| missing("q"))?;
        if p < 2 || q < 2 {
            return Err(CliError::Config(format!(
                "need p >= 2 and q >= 2, got p = {p}, q = {q}"
            )));
        }
        Ok((p, q))
    }

    /// Model parameters; `h` defaults to 0.
    pub fn params(&self) -> CliResult<ModelParams> {
        let (p, q) = self.pq()?;
        let beta = self.beta.ok_or_else(|| missing("beta"))?;
        ModelParams::new(p, q, beta, self.h.unwrap_or(0.0))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn n(&self) -> CliResult<u32> {
        match self.n {
            Some(0) => Err(CliError::Config("N must be >= 1".into())),
            Some(n) => Ok(n),
            None => Err(missing("n")),
        }
    }

    pub fn ns(&self) -> CliResult<Vec<u32>> {
        let ns = self.ns.clone().ok_or_else(|| missing("ns"))?;
        if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "ns must be positive and strictly increasing, got {ns:?}"
            )));
        }
        Ok(ns)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| missing("seed"))
    }

    pub fn cap(&self) -> u128 {
        self.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP)
    }

    pub fn out(&self) -> CliResult<&Path> {
        self.out.as_deref().ok_or_else(|| missing("out"))
    }
}

pub fn override_with<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!(
        "missing `{field}` (set it in the config file or pass --{field})"
    ))
}

pub fn parse_regime(text: &str) -> Result<Regime, String> {
    match text.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "regular" => Ok(Regime::Regular),
        "critical" => Ok(Regime::Critical),
        "speciali" | "special1" => Ok(Regime::SpecialI),
        "specialii" | "special2" => Ok(Regime::SpecialII),
        _ => Err(format!("unknown regime `{text}`")),
    }
}
