//! Key-level simulator. Blocks are materialized as sorted keys for the
//! duration of each batch and every split is carried out literally.

use rand::Rng;

use super::RunConfig;
use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::histogram::{FullnessSummary, SeedingMode};
use crate::strategies::{target_split, Strategy, StrategyKind, UnevenMode};

pub const MAX_ORACLE_INSERTIONS: u64 = 1_000_000;

/// Where insertion continues after an even split in the middle of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Continuation {
    /// Always into the `ceil((B+1)/2)` half.
    #[default]
    LargerHalf,
    /// Into whichever half holds the gap the next batch key belongs in; a key
    /// between the halves goes left.
    GapFollowing,
}

/// Sizes of the blocks produced when a batch is inserted after the `gap`-th
/// key of a block of size `k` (`0 <= gap <= k`).
pub fn key_level_batch(
    strategy: &Strategy,
    k: usize,
    gap: usize,
    continuation: Continuation,
) -> Result<Vec<usize>> {
    let params = strategy.params();
    let (b, r) = (params.block_size(), params.batch());
    if k > b || gap > k {
        return Err(Error::Parameter(format!("gap {gap} in block of {k} (B = {b})")));
    }
    let block: Vec<f64> = (1..=k).map(|x| x as f64).collect();
    let batch: Vec<f64> = (1..=r)
        .map(|t| gap as f64 + t as f64 / (r + 1) as f64)
        .collect();
    match strategy.kind() {
        StrategyKind::Even => Ok(even_literal(block, &batch, b, continuation)),
        StrategyKind::DeferredEven => Ok(deferred_literal(block, &batch, b)),
        StrategyKind::UnevenRegime1 | StrategyKind::UnevenRegime2 => {
            uneven_literal(strategy, block, &batch)
        }
        StrategyKind::Recommended => unreachable!("resolved in Strategy::new"),
    }
}

fn insert_sorted(block: &mut Vec<f64>, x: f64) {
    let at = block.partition_point(|&y| y < x);
    block.insert(at, x);
}

fn even_literal(mut cur: Vec<f64>, batch: &[f64], b: usize, cont: Continuation) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &x) in batch.iter().enumerate() {
        insert_sorted(&mut cur, x);
        if cur.len() == b + 1 {
            let right = cur.split_off(b.div_ceil(2));
            let go_left = cont == Continuation::GapFollowing
                && batch.get(i + 1).is_some_and(|&next| next < right[0]);
            if go_left {
                out.push(right.len());
            } else {
                out.push(cur.len());
                cur = right;
            }
        }
    }
    out.push(cur.len());
    out
}

fn deferred_literal(mut cur: Vec<f64>, batch: &[f64], b: usize) -> Vec<usize> {
    for &x in batch {
        insert_sorted(&mut cur, x);
    }
    let t = cur.len();
    let m = t.div_ceil(b);
    // chunk boundaries at floor(i * t / m)
    (0..m).map(|i| (i + 1) * t / m - i * t / m).collect()
}

fn uneven_literal(strategy: &Strategy, mut cur: Vec<f64>, batch: &[f64]) -> Result<Vec<usize>> {
    let params = strategy.params();
    let (b, r) = (params.block_size(), params.batch());
    let k = cur.len();
    let relaxed = strategy.mode() == UnevenMode::Relaxed;
    let targets = match strategy.kind() {
        StrategyKind::UnevenRegime1 if k == 0 || k == r => None,
        StrategyKind::UnevenRegime1 if k == 2 * r => Some((r, 2 * r)),
        StrategyKind::UnevenRegime2 if k == 0 || k == r / 2 => None,
        StrategyKind::UnevenRegime2 if k == r => Some((r / 2, r + r.div_ceil(2))),
        StrategyKind::UnevenRegime2 if k == r + r / 2 || (relaxed && k == r + r.div_ceil(2)) => {
            Some((r, k))
        }
        _ => return Err(Error::Invariant(format!("block of size {k} in {}", strategy.kind()))),
    };
    for (i, &x) in batch.iter().enumerate() {
        if cur.len() == b {
            let (f_l, f_r) = targets.ok_or_else(|| {
                Error::Invariant(format!("block of size {k} overflowed without split targets"))
            })?;
            let rest = &batch[i + 1..];
            let (left, right) = target_split(&cur, x, f_l, f_r, rest)?;
            if f_l + f_r - b - 1 != rest.len() {
                return Err(Error::Invariant("target split left batch keys over".into()));
            }
            return Ok(vec![left.len(), right.len()]);
        }
        insert_sorted(&mut cur, x);
    }
    match targets {
        // batch fit without overflow; split at the end by position
        Some((f_l, _)) => Ok(vec![f_l, cur.len() - f_l]),
        None => Ok(vec![cur.len()]),
    }
}

/// Key-level counterpart of [`super::run_monte_carlo`].
pub fn run_key_level(cfg: &RunConfig, continuation: Continuation) -> Result<FullnessSummary> {
    let strategy = cfg.strategy()?;
    if cfg.total_insertions > MAX_ORACLE_INSERTIONS {
        return Err(Error::Parameter(format!(
            "key-level oracle is limited to {MAX_ORACLE_INSERTIONS} insertions, got {}",
            cfg.total_insertions
        )));
    }
    let mut finals = Vec::with_capacity(cfg.runs);
    let mut all_series = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let (f, series) = key_level_run(cfg, &strategy, run, continuation)?;
        finals.push(f);
        all_series.push(series);
    }
    FullnessSummary::from_runs(
        cfg.params.batch(),
        finals,
        cfg.record_series.then_some(all_series),
    )
}

fn key_level_run(
    cfg: &RunConfig,
    strategy: &Strategy,
    run: usize,
    continuation: Continuation,
) -> Result<(f64, Vec<(u64, f64)>)> {
    let b = cfg.params.block_size();
    let mut rng = cfg.rng(run);
    let mut sizes: Vec<usize> = Vec::new();
    let mut tree = Fenwick::with_len(0);
    match cfg.seeding_mode(strategy) {
        SeedingMode::EmptyWithDummy => {
            sizes.push(1);
            tree.push(1);
        }
        SeedingMode::Bare => {}
        SeedingMode::HalfBlock => {
            let d = cfg.params.require_half()?;
            if cfg.params.batch() > d - 1 {
                return Err(Error::Parameter("half-block seeding needs r <= (B - 1) / 2".into()));
            }
            sizes.push(d);
            tree.push(d as u64);
        }
    }
    let mut n: u64 = sizes.iter().map(|&s| s as u64).sum();
    let fullness = |n: u64, blocks: usize| n as f64 / (b as f64 * blocks as f64);
    let interval = cfg.series_interval();
    let mut next_mark = interval;
    let mut series = Vec::new();

    while n < cfg.total_insertions {
        let (idx, gap) = if sizes.is_empty() {
            (None, 0)
        } else {
            let g = rng.gen_range(1..=n);
            let idx = tree.lower_bound(g);
            (Some(idx), (g - tree.prefix(idx)) as usize)
        };
        let k = idx.map_or(0, |i| sizes[i]);
        let out = key_level_batch(strategy, k, gap, continuation)?;
        let mut parts = out.into_iter();
        let first = parts.next().expect("batch yields a block");
        match idx {
            Some(i) => {
                tree.add(i, first as i64 - k as i64);
                sizes[i] = first;
            }
            None => {
                sizes.push(first);
                tree.push(first as u64);
            }
        }
        for s in parts {
            sizes.push(s);
            tree.push(s as u64);
        }
        n += cfg.params.batch() as u64;
        if cfg.record_series && n >= next_mark {
            series.push((n, fullness(n, sizes.len())));
            next_mark = (n / interval + 1) * interval;
        }
    }
    let f = fullness(n, sizes.len());
    if cfg.record_series && series.last().map(|p| p.0) != Some(n) {
        series.push((n, f));
    }
    Ok((f, series))
}
