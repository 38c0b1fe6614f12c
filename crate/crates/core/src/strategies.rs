//! Per-batch transition functions.
//!
//! Every strategy's effect depends only on the size of the block a batch
//! lands in, so each is a map from hit size to the multiset of resulting
//! block sizes.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::histogram::{Outcome, SeedingMode};
use crate::params::SplitParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Even,
    DeferredEven,
    UnevenRegime1,
    UnevenRegime2,
    /// Picks one of the above from `r / B`; see [`recommended_strategy`].
    Recommended,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Even => "even",
            Self::DeferredEven => "deferred_even",
            Self::UnevenRegime1 => "uneven_regime1",
            Self::UnevenRegime2 => "uneven_regime2",
            Self::Recommended => "recommended",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "even" => Ok(Self::Even),
            "deferred_even" | "deferred" => Ok(Self::DeferredEven),
            "uneven_regime1" | "uneven1" => Ok(Self::UnevenRegime1),
            "uneven_regime2" | "uneven2" => Ok(Self::UnevenRegime2),
            "recommended" => Ok(Self::Recommended),
            _ => Err(Error::Parameter(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Rounding policy for regime II when `r` is odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum UnevenMode {
    /// Targets `r/2, r, 3r/2` exactly; odd `r` is rejected.
    #[default]
    Exact,
    /// Small target `floor(r/2)`, large targets `r + floor(r/2)` and
    /// `r + ceil(r/2)`, so every size is within 1/2 of its exact target.
    Relaxed,
}

/// Choice of algorithm by `r / B`:
/// `(0, 7/18]` even, `(7/18, 1/2]` regime I, `(1/2, 2/3]` regime II,
/// above that deferred even.
pub fn recommended_strategy(params: SplitParams) -> StrategyKind {
    let (b, r) = (params.block_size(), params.batch());
    if 18 * r <= 7 * b {
        StrategyKind::Even
    } else if 2 * r <= b {
        StrategyKind::UnevenRegime1
    } else if 3 * r <= 2 * b {
        StrategyKind::UnevenRegime2
    } else {
        StrategyKind::DeferredEven
    }
}

fn check_hit(k: usize, lo: usize, params: SplitParams) -> Result<()> {
    if k < lo || k > params.block_size() {
        return param(format!(
            "hit size {k} outside {lo}..={}",
            params.block_size()
        ));
    }
    Ok(())
}

/// Even split: `r` single-key insertions; a block reaching `B + 1` keys
/// emits `floor((B+1)/2)` and insertion continues into the `ceil((B+1)/2)`
/// half.
pub fn even_split_outcome(k: usize, params: SplitParams) -> Result<Outcome> {
    check_hit(k, 1, params)?;
    Ok(even_from(k, params))
}

// Closed form of the single-key loop; also valid from an empty block.
fn even_from(k: usize, params: SplitParams) -> Outcome {
    let (b, r) = (params.block_size(), params.batch());
    if k + r <= b {
        return Outcome::from_vec(vec![k + r]);
    }
    let floor_half = (b + 1) / 2;
    let ceil_half = b + 1 - floor_half;
    let rem = r - (b + 1 - k);
    let extra = rem / floor_half;
    let mut sizes = vec![floor_half; 1 + extra];
    sizes.push(ceil_half + rem % floor_half);
    Outcome::from_vec(sizes)
}

/// Deferred even split: the `l + r` keys are spread over the fewest blocks
/// that can hold them, with sizes differing by at most one.
pub fn deferred_even_outcome(l: usize, params: SplitParams) -> Result<Outcome> {
    check_hit(l, 0, params)?;
    let b = params.block_size();
    let t = l + params.batch();
    let m = t.div_ceil(b);
    let (q, big) = (t / m, t % m);
    let mut sizes = vec![q + 1; big];
    sizes.resize(m, q);
    Ok(Outcome::from_vec(sizes))
}

fn regime1_range(params: SplitParams) -> Result<()> {
    let (b, r) = (params.block_size(), params.batch());
    if 3 * r <= b || 2 * r > b {
        return param(format!("regime I needs B/3 < r <= B/2, got B = {b}, r = {r}"));
    }
    Ok(())
}

fn regime2_range(params: SplitParams, mode: UnevenMode) -> Result<()> {
    let (b, r) = (params.block_size(), params.batch());
    if 5 * r <= 2 * b || 3 * r > 2 * b {
        return param(format!("regime II needs 2B/5 < r <= 2B/3, got B = {b}, r = {r}"));
    }
    if mode == UnevenMode::Exact && r % 2 == 1 {
        return param(format!(
            "regime II exact mode needs even r, got r = {r}; use the relaxed mode for odd r"
        ));
    }
    Ok(())
}

/// Regime I: all blocks have size `r` or `2r`.
pub fn uneven1_outcome(k: usize, params: SplitParams) -> Result<Outcome> {
    regime1_range(params)?;
    let r = params.batch();
    if k == r {
        Ok(Outcome::from_vec(vec![2 * r]))
    } else if k == 2 * r {
        Ok(Outcome::from_vec(vec![r, 2 * r]))
    } else {
        Err(Error::Invariant(format!("regime I block of size {k}, expected {r} or {}", 2 * r)))
    }
}

/// Regime II: all blocks have size `r/2`, `r` or `3r/2`.
pub fn uneven2_outcome(k: usize, params: SplitParams) -> Result<Outcome> {
    uneven2_outcome_with(k, params, UnevenMode::Exact)
}

pub fn uneven2_outcome_with(k: usize, params: SplitParams, mode: UnevenMode) -> Result<Outcome> {
    regime2_range(params, mode)?;
    let r = params.batch();
    let small = r / 2;
    let large_lo = r + r / 2;
    let large_hi = r + r.div_ceil(2);
    if k == small {
        Ok(Outcome::from_vec(vec![small + r]))
    } else if k == r {
        Ok(Outcome::from_vec(vec![small, large_hi]))
    } else if k == large_lo || k == large_hi {
        Ok(Outcome::from_vec(vec![r, k]))
    } else {
        Err(Error::Invariant(format!(
            "regime II block of size {k}, expected one of {:?}",
            regime2_sizes(r)
        )))
    }
}

fn regime2_sizes(r: usize) -> Vec<usize> {
    let mut v = vec![r / 2, r, r + r / 2, r + r.div_ceil(2)];
    v.dedup();
    v
}

/// Splits a full block so the halves end with `f_l` and `f_r` keys.
///
/// `keys` is the full block (`B` keys, ascending), `new_key` the key that
/// overflows it, and `remaining` the rest of the batch in ascending order;
/// `new_key` and `remaining` must all fall in the same gap of `keys`, with
/// `new_key` below every key of `remaining`. Exactly `f_l + f_r - B - 1` keys
/// of `remaining` are consumed.
pub fn target_split<T: PartialOrd + Copy>(
    keys: &[T],
    new_key: T,
    f_l: usize,
    f_r: usize,
    remaining: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let b = keys.len();
    if f_l == 0 || f_r == 0 || f_l > b || f_r > b || f_l + f_r <= b {
        return param(format!(
            "targets f_L = {f_l}, f_R = {f_r} need 1 <= f <= B = {b} and f_L + f_R > B"
        ));
    }
    let extra = f_l + f_r - b - 1;
    if remaining.len() < extra {
        return param(format!(
            "target split needs {extra} more batch keys, {} available",
            remaining.len()
        ));
    }
    let batch: Vec<T> = std::iter::once(new_key).chain(remaining[..extra].iter().copied()).collect();
    // j = number of existing keys below the new key
    let j = keys.partition_point(|k| *k < new_key);

    let splice = |base: &[T], at: usize, ins: &[T]| -> Vec<T> {
        let mut v = Vec::with_capacity(base.len() + ins.len());
        v.extend_from_slice(&base[..at]);
        v.extend_from_slice(ins);
        v.extend_from_slice(&base[at..]);
        v
    };

    if j >= f_l {
        let left = keys[..f_l].to_vec();
        let right = splice(&keys[f_l..], j - f_l, &batch);
        Ok((left, right))
    } else if j <= b - f_r {
        let left = splice(&keys[..b - f_r], j, &batch);
        let right = keys[b - f_r..].to_vec();
        Ok((left, right))
    } else {
        let to_left = f_l - j;
        let mut left = keys[..j].to_vec();
        left.extend_from_slice(&batch[..to_left]);
        let mut right = batch[to_left..].to_vec();
        right.extend_from_slice(&keys[j..]);
        Ok((left, right))
    }
}

/// A strategy bound to concrete parameters, with its range checks done.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Strategy {
    kind: StrategyKind,
    params: SplitParams,
    mode: UnevenMode,
}

impl Strategy {
    /// Resolves `Recommended` and checks that `(B, r)` suits the strategy.
    pub fn new(kind: StrategyKind, params: SplitParams, mode: UnevenMode) -> Result<Self> {
        let kind = match kind {
            StrategyKind::Recommended => recommended_strategy(params),
            k => k,
        };
        match kind {
            StrategyKind::UnevenRegime1 => regime1_range(params)?,
            StrategyKind::UnevenRegime2 => regime2_range(params, mode)?,
            _ => {}
        }
        Ok(Self { kind, params, mode })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn params(&self) -> SplitParams {
        self.params
    }

    pub fn mode(&self) -> UnevenMode {
        self.mode
    }

    pub fn outcome(&self, k: usize) -> Result<Outcome> {
        match self.kind {
            StrategyKind::Even => even_split_outcome(k, self.params),
            StrategyKind::DeferredEven => deferred_even_outcome(k, self.params),
            StrategyKind::UnevenRegime1 => uneven1_outcome(k, self.params),
            StrategyKind::UnevenRegime2 => uneven2_outcome_with(k, self.params, self.mode),
            StrategyKind::Recommended => unreachable!("resolved in Strategy::new"),
        }
    }

    /// Outcome of a batch inserted into a structure with no blocks.
    pub fn first_batch(&self) -> Outcome {
        let r = self.params.batch();
        match self.kind {
            StrategyKind::Even => even_from(0, self.params),
            StrategyKind::DeferredEven => {
                deferred_even_outcome(0, self.params).expect("0 is a valid hit size")
            }
            _ => Outcome::from_vec(vec![r]),
        }
    }

    /// Seeding under which the strategy's size invariants hold from the start.
    pub fn natural_seeding(&self) -> SeedingMode {
        match self.kind {
            StrategyKind::Even => SeedingMode::EmptyWithDummy,
            _ => SeedingMode::Bare,
        }
    }

    /// Sizes the strategy may produce at batch boundaries, if it has a fixed set.
    pub fn invariant_sizes(&self) -> Option<Vec<usize>> {
        let r = self.params.batch();
        match self.kind {
            StrategyKind::UnevenRegime1 => Some(vec![r, 2 * r]),
            StrategyKind::UnevenRegime2 => Some(regime2_sizes(r)),
            _ => None,
        }
    }
}
