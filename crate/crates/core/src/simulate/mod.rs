//! Drives strategies against the batched random-insertion workload.
//!
//! Three simulators share [`RunConfig`]: Monte Carlo on the block histogram
//! ([`run_monte_carlo`]), the deterministic expected-count recurrence
//! ([`run_expected_recurrence`]), and a key-level oracle ([`run_key_level`])
//! that executes every split literally.

mod oracle;
mod recurrence;

pub use oracle::{key_level_batch, run_key_level, Continuation, MAX_ORACLE_INSERTIONS};
pub use recurrence::{
    run_expected_recurrence, RecurrenceOptions, RecurrenceSpace, RecurrenceState,
    RecurrenceTrajectory,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::{new_histogram, BlockHistogram, FullnessSummary, SeedingMode};
use crate::params::SplitParams;
use crate::strategies::{Strategy, StrategyKind, UnevenMode};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strategy: StrategyKind,
    pub uneven_mode: UnevenMode,
    pub params: SplitParams,
    /// Each run stops at the first batch boundary with at least this many keys.
    pub total_insertions: u64,
    pub runs: usize,
    /// Run `k` is seeded with `base_seed + k`.
    pub base_seed: u64,
    /// `None` uses the strategy's natural seeding.
    pub seeding: Option<SeedingMode>,
    pub record_series: bool,
}

impl RunConfig {
    pub fn new(strategy: StrategyKind, params: SplitParams) -> Self {
        Self {
            strategy,
            uneven_mode: UnevenMode::Exact,
            params,
            total_insertions: 200_000,
            runs: 10,
            base_seed: 0,
            seeding: None,
            record_series: false,
        }
    }

    pub fn insertions(mut self, n: u64) -> Self {
        self.total_insertions = n;
        self
    }

    pub fn runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn seeding(mut self, mode: SeedingMode) -> Self {
        self.seeding = Some(mode);
        self
    }

    pub fn uneven_mode(mut self, mode: UnevenMode) -> Self {
        self.uneven_mode = mode;
        self
    }

    pub fn record_series(mut self, on: bool) -> Self {
        self.record_series = on;
        self
    }

    /// Validates the configuration and resolves the strategy.
    pub fn strategy(&self) -> Result<Strategy> {
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be at least 1".into()));
        }
        if self.total_insertions < self.params.batch() as u64 {
            return Err(Error::Parameter(format!(
                "total insertions {} below batch size {}",
                self.total_insertions,
                self.params.batch()
            )));
        }
        Strategy::new(self.strategy, self.params, self.uneven_mode)
    }

    pub fn seeding_mode(&self, strategy: &Strategy) -> SeedingMode {
        self.seeding.unwrap_or_else(|| strategy.natural_seeding())
    }

    pub(crate) fn rng(&self, run: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.base_seed.wrapping_add(run as u64))
    }

    pub(crate) fn series_interval(&self) -> u64 {
        (self.params.batch() as u64).max(self.total_insertions / 1000)
    }
}

/// Result of one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_fullness: f64,
    pub histogram: BlockHistogram,
    pub batches: u64,
    /// `(n, fullness)` samples; empty unless recording was requested.
    pub series: Vec<(u64, f64)>,
}

/// Runs one seed, calling `observer` with the state after every batch.
pub fn run_single<F>(cfg: &RunConfig, run: usize, mut observer: F) -> Result<RunResult>
where
    F: FnMut(&BlockHistogram) -> Result<()>,
{
    let strategy = cfg.strategy()?;
    let r = cfg.params.batch() as u64;
    let mut rng = cfg.rng(run);
    let mut hist = new_histogram(cfg.seeding_mode(&strategy), cfg.params)?;
    let interval = cfg.series_interval();
    let mut series = Vec::new();
    let mut next_mark = interval;
    let mut batches = 0;

    while hist.total_keys() < cfg.total_insertions {
        let before = hist.total_keys();
        if hist.is_empty() {
            hist.apply_first(&strategy.first_batch())?;
        } else {
            let hit = hist.sample_hit(&mut rng)?;
            let out = strategy.outcome(hit)?;
            hist.apply_outcome(hit, &out)?;
        }
        batches += 1;
        if hist.total_keys() != before + r {
            return Err(Error::Contract(format!(
                "batch moved key count from {before} to {}",
                hist.total_keys()
            )));
        }
        observer(&hist)?;
        if cfg.record_series && hist.total_keys() >= next_mark {
            series.push((hist.total_keys(), hist.fullness()?));
            next_mark = (hist.total_keys() / interval + 1) * interval;
        }
    }
    let final_fullness = hist.fullness()?;
    if cfg.record_series && series.last().map(|p| p.0) != Some(hist.total_keys()) {
        series.push((hist.total_keys(), final_fullness));
    }
    Ok(RunResult {
        final_fullness,
        histogram: hist,
        batches,
        series,
    })
}

/// All runs of `cfg`, in run order. Runs execute in parallel.
pub fn run_monte_carlo_detailed(cfg: &RunConfig) -> Result<Vec<RunResult>> {
    cfg.strategy()?;
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_single(cfg, run, |_| Ok(())))
        .collect()
}

pub fn run_monte_carlo(cfg: &RunConfig) -> Result<FullnessSummary> {
    summarize(cfg, run_monte_carlo_detailed(cfg)?)
}

pub fn summarize(cfg: &RunConfig, results: Vec<RunResult>) -> Result<FullnessSummary> {
    let finals = results.iter().map(|r| r.final_fullness).collect();
    let series = cfg
        .record_series
        .then(|| results.into_iter().map(|r| r.series).collect());
    FullnessSummary::from_runs(cfg.params.batch(), finals, series)
}

/// Fails on the first batch boundary where a strategy with a fixed size set
/// holds a block outside it.
pub fn check_size_invariant(strategy: &Strategy, hist: &BlockHistogram) -> Result<()> {
    if let Some(allowed) = strategy.invariant_sizes() {
        if let Some((bad, _)) = hist.iter().find(|(s, _)| !allowed.contains(s)) {
            return Err(Error::Invariant(format!(
                "block of size {bad} outside {allowed:?}"
            )));
        }
    }
    Ok(())
}
