use std::io::Write;
use std::path::Path;

use blocksplit::bounds::{deferred_closed_form, table_bound};
use blocksplit::simulate::{run_monte_carlo, RunConfig};
use blocksplit::spectral::predicted_fullness;
use blocksplit::SplitParams;
use rayon::prelude::*;

use crate::config::SweepSpec;
use crate::error::{CliError, Result};
use crate::table::{analyze_csv, sweep_csv, AnalyzeRow, SweepRow};

/// Runs every batch size of the sweep; rows come back in `r_values` order.
pub fn run_sweep(sweep: &SweepSpec) -> Result<Vec<SweepRow>> {
    if sweep.r_values.is_empty() {
        return Err(CliError::Param("sweep needs at least one batch size".into()));
    }
    let configs = sweep
        .r_values
        .iter()
        .map(|&r| {
            let mut cfg = RunConfig::new(sweep.strategy, SplitParams::new(sweep.block_size, r)?)
                .insertions(sweep.total_insertions)
                .runs(sweep.runs)
                .seed(sweep.base_seed)
                .uneven_mode(sweep.uneven_mode);
            cfg.seeding = sweep.seeding;
            cfg.strategy()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|cfg| {
            let s = run_monte_carlo(cfg)?;
            Ok(SweepRow {
                batch: s.batch,
                mean: s.mean_fullness,
                min: s.min_fullness,
                max: s.max_fullness,
            })
        })
        .collect()
}

pub fn cmd_simulate(sweep: &SweepSpec) -> Result<()> {
    let rows = run_sweep(sweep)?;
    write_output(sweep.out.as_deref(), &sweep_csv(&rows)?)
}

/// Predicted fullness (odd `B`, `r < B/2`), table bound and deferred closed
/// form for each `r`; `None` where a formula does not apply.
pub fn analyze_rows(block_size: usize, r_values: &[usize]) -> Result<Vec<AnalyzeRow>> {
    if r_values.is_empty() {
        return Err(CliError::Param("analyze needs at least one batch size".into()));
    }
    r_values
        .par_iter()
        .map(|&r| {
            let params = SplitParams::new(block_size, r)?;
            let predicted = if params.half().is_some() && params.below_half() {
                Some(predicted_fullness(params)?)
            } else {
                None
            };
            Ok(AnalyzeRow {
                batch: r,
                predicted,
                table_bound: Some(table_bound(block_size, r)?.fill),
                deferred: deferred_closed_form(block_size, r).ok().map(|c| c.fill),
            })
        })
        .collect()
}

pub fn cmd_analyze(block_size: usize, r_values: &[usize], out: Option<&Path>) -> Result<()> {
    let rows = analyze_rows(block_size, r_values)?;
    write_output(out, &analyze_csv(&rows)?)
}

/// Writes to `path`, or standard output when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}
