//! Optional JSON configuration. Keys mirror the command-line flags
//! (`block_size` for `--block-size`, and so on); flags win over the file.

use std::path::{Path, PathBuf};

use blocksplit::{SeedingMode, StrategyKind, UnevenMode};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub strategy: Option<String>,
    pub block_size: Option<usize>,
    pub batch: Option<BatchList>,
    pub batch_range: Option<String>,
    pub insertions: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub seeding: Option<String>,
    pub uneven_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub overlay: Option<String>,
    pub title: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BatchList {
    One(usize),
    Many(Vec<usize>),
}

impl BatchList {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            Self::One(r) => vec![r],
            Self::Many(v) => v,
        }
    }
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Param(format!("{}: invalid config: {e}", path.display())))
}

/// Parses `lo:hi` or `lo:hi:step` (inclusive).
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Param(format!("batch range `{text}` is not lo:hi[:step]"));
    let parts: Vec<usize> = text
        .split(':')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (lo, hi, step) = match parts[..] {
        [lo, hi] => (lo, hi, 1),
        [lo, hi, step] => (lo, hi, step),
        _ => return Err(bad()),
    };
    if step == 0 || lo == 0 || lo > hi {
        return Err(CliError::Param(format!(
            "batch range `{text}` needs 1 <= lo <= hi and step >= 1"
        )));
    }
    Ok((lo..=hi).step_by(step).collect())
}

pub fn parse_strategy(s: &str) -> Result<StrategyKind> {
    s.parse().map_err(|e: blocksplit::Error| CliError::Param(e.to_string()))
}

/// `empty` selects the strategy's own default start.
pub fn parse_seeding(s: &str) -> Result<Option<SeedingMode>> {
    match s {
        "empty" => Ok(None),
        other => other
            .parse()
            .map(Some)
            .map_err(|e: blocksplit::Error| CliError::Param(e.to_string())),
    }
}

pub fn parse_uneven_mode(s: &str) -> Result<UnevenMode> {
    match s {
        "exact" => Ok(UnevenMode::Exact),
        "relaxed" => Ok(UnevenMode::Relaxed),
        _ => Err(CliError::Param(format!("unknown uneven mode `{s}` (exact|relaxed)"))),
    }
}

/// Batch sizes from explicit values or a range; explicit values win.
pub fn batch_values(batch: Option<Vec<usize>>, range: Option<&str>) -> Result<Vec<usize>> {
    let values = match (batch, range) {
        (Some(v), _) if !v.is_empty() => v,
        (_, Some(text)) => parse_range(text)?,
        _ => return Err(CliError::Param("no batch sizes given (--batch or --batch-range)".into())),
    };
    if values.contains(&0) {
        return Err(CliError::Param("batch sizes must be at least 1".into()));
    }
    Ok(values)
}

/// Parameters of one `simulate` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategy: StrategyKind,
    pub uneven_mode: UnevenMode,
    pub block_size: usize,
    pub r_values: Vec<usize>,
    pub total_insertions: u64,
    pub runs: usize,
    pub base_seed: u64,
    /// `None` uses each strategy's own default.
    pub seeding: Option<SeedingMode>,
    pub out: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(strategy: StrategyKind, block_size: usize, r_values: Vec<usize>) -> Self {
        Self {
            strategy,
            uneven_mode: UnevenMode::Exact,
            block_size,
            r_values,
            total_insertions: 200_000,
            runs: 10,
            base_seed: 0,
            seeding: None,
            out: None,
        }
    }
}
