//! Binary indexed tree over non-negative integer weights.

#[derive(Debug, Clone, Default)]
pub(crate) struct Fenwick {
    // 1-based; tree[0] unused.
    tree: Vec<u64>,
}

impl Fenwick {
    pub fn with_len(len: usize) -> Self {
        Self {
            tree: vec![0; len + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    /// Adds `delta` to the weight at 0-based `index`.
    pub fn add(&mut self, index: usize, delta: i64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
    }

    /// Appends a new slot holding `weight`.
    pub fn push(&mut self, weight: u64) {
        let i = self.tree.len();
        let low = i & i.wrapping_neg();
        // node i covers (i - low, i]
        let covered = self.prefix(i - 1) - self.prefix(i - low);
        self.tree.push(covered + weight);
    }

    /// Sum of weights at 0-based indices `< end`.
    pub fn prefix(&self, end: usize) -> u64 {
        let mut i = end;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i &= i - 1;
        }
        sum
    }

    /// Smallest 0-based index whose inclusive prefix sum reaches `target`
    /// (`1 <= target <= total`).
    pub fn lower_bound(&self, mut target: u64) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut step = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
