use crate::error::{Error, Result};
use crate::params::SplitParams;
use crate::spectral::{support_set, TransitionMatrix};

/// Index set the recurrence runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecurrenceSpace {
    /// Sizes reachable from a size-`d` start only.
    #[default]
    Support,
    /// All sizes `d..=B`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrenceOptions {
    pub space: RecurrenceSpace,
    /// Keep every `record_every`-th state; 0 keeps only the first and last.
    pub record_every: usize,
}

impl Default for RecurrenceOptions {
    fn default() -> Self {
        Self {
            space: RecurrenceSpace::Support,
            record_every: 0,
        }
    }
}

/// Expected block counts `v` (indexed like the trajectory's `sizes`) after
/// `n` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceState {
    pub step: usize,
    pub n: u64,
    pub v: Vec<f64>,
}

impl RecurrenceState {
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.v.iter().map(|x| x / n).collect()
    }

    pub fn expected_blocks(&self) -> f64 {
        self.v.iter().sum()
    }

    /// `sum k v_k`, which equals `n` up to rounding.
    pub fn mass(&self, sizes: &[usize]) -> f64 {
        sizes.iter().zip(&self.v).map(|(&k, x)| k as f64 * x).sum()
    }

    /// `n / (B * sum v)`.
    pub fn fullness(&self, block_size: usize) -> f64 {
        self.n as f64 / (block_size as f64 * self.expected_blocks())
    }
}

#[derive(Debug, Clone)]
pub struct RecurrenceTrajectory {
    pub params: SplitParams,
    pub sizes: Vec<usize>,
    pub states: Vec<RecurrenceState>,
}

impl RecurrenceTrajectory {
    pub fn last(&self) -> &RecurrenceState {
        self.states.last().expect("trajectory holds the start state")
    }

    pub fn final_fullness(&self) -> f64 {
        self.last().fullness(self.params.block_size())
    }
}

/// Iterates `v_{n+r} = (I + A/n) v_n` for `steps` batches from one block of
/// size `d` (`n0 = d`).
pub fn run_expected_recurrence(
    params: SplitParams,
    steps: usize,
    opts: RecurrenceOptions,
) -> Result<RecurrenceTrajectory> {
    let d = params.require_half()?;
    if !params.below_half() {
        return Err(Error::Parameter(format!(
            "recurrence needs r <= (B - 1) / 2, got B = {}, r = {}",
            params.block_size(),
            params.batch()
        )));
    }
    if steps == 0 {
        return Err(Error::Parameter("recurrence needs at least one step".into()));
    }
    let a = TransitionMatrix::build(params)?;
    let sizes: Vec<usize> = match opts.space {
        RecurrenceSpace::Support => support_set(params)?.sizes().to_vec(),
        RecurrenceSpace::Full => (d..=params.block_size()).collect(),
    };
    let m = a.restrict_to(&sizes)?;
    let r = params.batch() as u64;

    let mut v = vec![0.0; sizes.len()];
    v[0] = 1.0;
    let mut n = d as u64;
    let mut states = vec![RecurrenceState { step: 0, n, v: v.clone() }];
    let mut av = vec![0.0; sizes.len()];
    for step in 1..=steps {
        m.matvec(&v, &mut av);
        let inv = 1.0 / n as f64;
        for (x, dx) in v.iter_mut().zip(&av) {
            *x += dx * inv;
        }
        n += r;
        if step == steps || (opts.record_every > 0 && step % opts.record_every == 0) {
            states.push(RecurrenceState { step, n, v: v.clone() });
        }
    }
    Ok(RecurrenceTrajectory { params, sizes, states })
}
