//! Block-population state shared by every simulator.
//!
//! The state is a histogram `counts[s]` of blocks holding `s` keys plus the
//! total key count `n`. A batch lands in a block chosen with probability
//! `s / n` per block, i.e. `s * counts[s] / n` per size.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::params::SplitParams;

/// How the structure is populated before the first batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedingMode {
    /// One block holding only the `-inf` dummy key, so `n = 1`. Hit
    /// probability `s / n` is then exact for every interval, including the
    /// one before the smallest real key.
    EmptyWithDummy,
    /// No blocks and `n = 0`. The first batch creates the structure; later
    /// batches are placed with probability proportional to block size. Use
    /// this for strategies whose size invariants a size-1 block would break.
    Bare,
    /// One block of size `d`: the dummy plus a first batch of `(B - 1) / 2`
    /// keys. Requires odd `B` and `r <= (B - 1) / 2`.
    HalfBlock,
}

impl std::str::FromStr for SeedingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dummy" | "empty-with-dummy" => Ok(Self::EmptyWithDummy),
            "bare" => Ok(Self::Bare),
            "paper" | "half-block" => Ok(Self::HalfBlock),
            other => Err(Error::Parameter(format!("unknown seeding mode `{other}`"))),
        }
    }
}

/// Resulting block sizes after one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    sizes: Vec<usize>,
}

impl Outcome {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Contract("outcome must contain at least one block".into()));
        }
        Ok(Self { sizes })
    }

    pub(crate) fn from_vec(sizes: Vec<usize>) -> Self {
        debug_assert!(!sizes.is_empty());
        Self { sizes }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Sizes in ascending order, for multiset comparison.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.sizes.clone();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone)]
pub struct BlockHistogram {
    params: SplitParams,
    // counts[s] for s in 0..=B; counts[0] stays zero.
    counts: Vec<u64>,
    blocks: u64,
    total_keys: u64,
    // key mass s * counts[s] at index s - 1
    mass: Fenwick,
}

/// Builds the starting histogram for `mode`.
pub fn new_histogram(mode: SeedingMode, params: SplitParams) -> Result<BlockHistogram> {
    let mut hist = BlockHistogram::empty(params);
    match mode {
        SeedingMode::EmptyWithDummy => hist.insert_block(1),
        SeedingMode::Bare => {}
        SeedingMode::HalfBlock => {
            let d = params.require_half()?;
            if params.batch() > d - 1 {
                return Err(Error::Parameter(format!(
                    "half-block seeding needs r <= (B - 1) / 2 = {}, got r = {}",
                    d - 1,
                    params.batch()
                )));
            }
            hist.insert_block(d);
        }
    }
    Ok(hist)
}

impl BlockHistogram {
    fn empty(params: SplitParams) -> Self {
        let b = params.block_size();
        Self {
            params,
            counts: vec![0; b + 1],
            blocks: 0,
            total_keys: 0,
            mass: Fenwick::with_len(b),
        }
    }

    /// Builds a histogram directly from `(size, count)` pairs.
    pub fn from_counts(params: SplitParams, pairs: &[(usize, u64)]) -> Result<Self> {
        let mut hist = Self::empty(params);
        for &(size, count) in pairs {
            if size == 0 || size > params.block_size() {
                return Err(Error::Parameter(format!(
                    "block size {size} outside 1..={}",
                    params.block_size()
                )));
            }
            for _ in 0..count {
                hist.insert_block(size);
            }
        }
        Ok(hist)
    }

    fn insert_block(&mut self, size: usize) {
        self.counts[size] += 1;
        self.blocks += 1;
        self.total_keys += size as u64;
        self.mass.add(size - 1, size as i64);
    }

    fn remove_block(&mut self, size: usize) {
        self.counts[size] -= 1;
        self.blocks -= 1;
        self.total_keys -= size as u64;
        self.mass.add(size - 1, -(size as i64));
    }

    pub fn params(&self) -> SplitParams {
        self.params
    }

    pub fn total_keys(&self) -> u64 {
        self.total_keys
    }

    pub fn block_count(&self) -> u64 {
        self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks == 0
    }

    /// Number of blocks holding exactly `size` keys.
    pub fn count(&self, size: usize) -> u64 {
        self.counts.get(size).copied().unwrap_or(0)
    }

    /// `(size, count)` for every populated size, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(s, &c)| (s, c))
    }

    /// Draws the size of the block the next batch lands in.
    pub fn sample_hit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.blocks == 0 {
            return Err(Error::State("cannot sample from an empty histogram".into()));
        }
        let key = rng.gen_range(1..=self.total_keys);
        Ok(self.mass.lower_bound(key) + 1)
    }

    /// Replaces one block of size `hit` by the blocks in `out`.
    pub fn apply_outcome(&mut self, hit: usize, out: &Outcome) -> Result<()> {
        if self.count(hit) == 0 {
            return Err(Error::State(format!("no block of size {hit} to split")));
        }
        self.check_outcome(hit, out)?;
        self.remove_block(hit);
        for &s in out.sizes() {
            self.insert_block(s);
        }
        Ok(())
    }

    /// Applies the first batch of a structure that holds no blocks yet.
    pub fn apply_first(&mut self, out: &Outcome) -> Result<()> {
        if !self.is_empty() {
            return Err(Error::State("structure is already populated".into()));
        }
        self.check_outcome(0, out)?;
        for &s in out.sizes() {
            self.insert_block(s);
        }
        Ok(())
    }

    fn check_outcome(&self, hit: usize, out: &Outcome) -> Result<()> {
        let b = self.params.block_size();
        if let Some(&bad) = out.sizes().iter().find(|&&s| s == 0 || s > b) {
            return Err(Error::Contract(format!("outcome block size {bad} outside 1..={b}")));
        }
        let expect = hit + self.params.batch();
        if out.total() != expect {
            return Err(Error::Contract(format!(
                "outcome holds {} keys, expected {hit} + {} = {expect}",
                out.total(),
                self.params.batch()
            )));
        }
        Ok(())
    }

    /// `n / (B * blocks)`.
    pub fn fullness(&self) -> Result<f64> {
        if self.blocks == 0 {
            return Err(Error::State("fullness of an empty structure".into()));
        }
        Ok(self.total_keys as f64 / (self.params.block_size() as f64 * self.blocks as f64))
    }

    pub fn mean_block_size(&self) -> Result<f64> {
        if self.blocks == 0 {
            return Err(Error::State("mean block size of an empty structure".into()));
        }
        Ok(self.total_keys as f64 / self.blocks as f64)
    }

    /// Checks `n = sum size * count`.
    pub fn mass_consistent(&self) -> bool {
        let sum: u64 = self.iter().map(|(s, c)| s as u64 * c).sum();
        let blocks: u64 = self.iter().map(|(_, c)| c).sum();
        sum == self.total_keys && blocks == self.blocks && self.mass.prefix(self.mass.len()) == sum
    }
}

/// Fullness over one or more runs.
#[derive(Debug, Clone, PartialEq)]
pub struct FullnessSummary {
    pub batch: usize,
    pub per_run_final_fullness: Vec<f64>,
    pub mean_fullness: f64,
    pub min_fullness: f64,
    pub max_fullness: f64,
    /// `(n, fullness)` samples per run, when recorded.
    pub series: Option<Vec<Vec<(u64, f64)>>>,
}

impl FullnessSummary {
    pub fn from_runs(batch: usize, finals: Vec<f64>, series: Option<Vec<Vec<(u64, f64)>>>) -> Result<Self> {
        if finals.is_empty() {
            return Err(Error::Parameter("summary needs at least one run".into()));
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let min = finals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            batch,
            mean_fullness: mean.clamp(min, max),
            min_fullness: min,
            max_fullness: max,
            per_run_final_fullness: finals,
            series,
        })
    }
}
