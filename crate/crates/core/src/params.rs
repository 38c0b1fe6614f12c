use crate::error::{param, Result};

/// Block capacity `B` and batch size `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitParams {
    block_size: usize,
    batch: usize,
}

impl SplitParams {
    pub fn new(block_size: usize, batch: usize) -> Result<Self> {
        if block_size < 3 {
            return param(format!("block size must be at least 3, got {block_size}"));
        }
        if batch < 1 {
            return param("batch size must be at least 1");
        }
        Ok(Self { block_size, batch })
    }

    /// Capacity `B`.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Batch size `r`.
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Half capacity `d = (B + 1) / 2`, defined for odd `B` only.
    pub fn half(&self) -> Option<usize> {
        (self.block_size % 2 == 1).then(|| self.block_size.div_ceil(2))
    }

    pub(crate) fn require_half(&self) -> Result<usize> {
        match self.half() {
            Some(d) => Ok(d),
            None => param(format!(
                "analysis requires odd block size, got B = {}",
                self.block_size
            )),
        }
    }

    /// `r < B / 2`, the range in which even splitting produces blocks of size
    /// at least `d` and `A(B, r)` is defined.
    pub fn below_half(&self) -> bool {
        2 * self.batch < self.block_size
    }

    /// `r / B` as a float.
    pub fn ratio(&self) -> f64 {
        self.batch as f64 / self.block_size as f64
    }
}
