use std::io::{self, Write};

use crate::error::{param, Error, Result};
use crate::params::SplitParams;

/// `A(B, r)` with integer entries, rows and columns indexed by size `d..=B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    params: SplitParams,
    d: usize,
    // row-major, (row size - d) * d + (col size - d)
    entries: Vec<i64>,
}

fn analysis_params(params: SplitParams) -> Result<usize> {
    let d = params.require_half()?;
    if !params.below_half() {
        return param(format!(
            "transition matrix needs r < B/2, got B = {}, r = {}",
            params.block_size(),
            params.batch()
        ));
    }
    Ok(d)
}

impl TransitionMatrix {
    pub fn build(params: SplitParams) -> Result<Self> {
        let d = analysis_params(params)?;
        let (b, r) = (params.block_size(), params.batch());
        let mut m = Self {
            params,
            d,
            entries: vec![0; d * d],
        };
        let v = |k: usize| k as i64;

        // first row
        m.set(d, d, -v(d));
        m.set(d, b + 1 - r, 2 * v(b + 1 - r));
        for k in b + 2 - r..=b {
            m.set(d, k, v(k));
        }
        // wraparound rows
        for k in d + 1..d + r {
            m.set(k, k, -v(k));
            m.set(k, d + k - r, v(d + k - r));
        }
        // remaining rows
        for k in d + r..=b {
            m.set(k, k, -v(k));
            m.set(k, k - r, v(k - r));
        }
        Ok(m)
    }

    pub fn params(&self) -> SplitParams {
        self.params
    }

    pub fn half(&self) -> usize {
        self.d
    }

    /// Sizes `d..=B` in index order.
    pub fn sizes(&self) -> std::ops::RangeInclusive<usize> {
        self.d..=self.params.block_size()
    }

    fn index(&self, row: usize, col: usize) -> usize {
        assert!(
            self.sizes().contains(&row) && self.sizes().contains(&col),
            "size ({row}, {col}) outside {}..={}",
            self.d,
            self.params.block_size()
        );
        (row - self.d) * self.d + (col - self.d)
    }

    /// Entry at row size `row`, column size `col`.
    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[self.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        let i = self.index(row, col);
        self.entries[i] = value;
    }

    /// Column for size `k`, in size order.
    pub fn column(&self, k: usize) -> Vec<i64> {
        self.sizes().map(|row| self.get(row, k)).collect()
    }

    /// Column sizes `k` where `sum_i i * A[i][k] != r * k`.
    pub fn left_identity_failures(&self) -> Vec<usize> {
        let r = self.params.batch() as i64;
        self.sizes()
            .filter(|&k| {
                let s: i64 = self.sizes().map(|i| i as i64 * self.get(i, k)).sum();
                s != r * k as i64
            })
            .collect()
    }

    /// Off-diagonal entries are non-negative and the diagonal is `-k`.
    pub fn is_metzler(&self) -> bool {
        self.sizes().all(|i| {
            self.sizes().all(|j| {
                let a = self.get(i, j);
                if i == j {
                    a == -(i as i64)
                } else {
                    a >= 0
                }
            })
        })
    }

    pub fn restrict(&self, s: &SupportSet) -> Result<RestrictedMatrix> {
        if s.params != self.params {
            return Err(Error::Parameter("support set built for different parameters".into()));
        }
        self.restrict_to(s.sizes())
    }

    /// Principal submatrix on `sizes` (ascending, within `d..=B`).
    pub fn restrict_to(&self, sizes: &[usize]) -> Result<RestrictedMatrix> {
        if sizes.is_empty()
            || sizes.windows(2).any(|w| w[0] >= w[1])
            || !sizes.iter().all(|k| self.sizes().contains(k))
        {
            return param(format!("invalid restriction index set {sizes:?}"));
        }
        let n = sizes.len();
        let mut entries = vec![0; n * n];
        let mut nonzeros = Vec::new();
        for (i, &row) in sizes.iter().enumerate() {
            for (j, &col) in sizes.iter().enumerate() {
                let a = self.get(row, col);
                entries[i * n + j] = a;
                if a != 0 {
                    nonzeros.push((i, j, a as f64));
                }
            }
        }
        Ok(RestrictedMatrix {
            params: self.params,
            sizes: sizes.to_vec(),
            entries,
            nonzeros,
        })
    }

    /// CSV with a `size` column followed by one column per size.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "size")?;
        for k in self.sizes() {
            write!(out, ",{k}")?;
        }
        writeln!(out)?;
        for row in self.sizes() {
            write!(out, "{row}")?;
            for col in self.sizes() {
                write!(out, ",{}", self.get(row, col))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Sizes reachable from a single size-`d` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    params: SplitParams,
    sizes: Vec<usize>,
}

impl SupportSet {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.sizes.binary_search(&k).is_ok()
    }
}

/// `S = d + <r>`, sorted.
pub fn support_set(params: SplitParams) -> Result<SupportSet> {
    let d = params.require_half()?;
    let r = params.batch() % d;
    let mut sizes = vec![d];
    let mut x = r;
    while x != 0 {
        sizes.push(d + x);
        x = (x + r) % d;
    }
    sizes.sort_unstable();
    Ok(SupportSet { params, sizes })
}

/// `A_S`: a principal submatrix of `A(B, r)`, indexed by its sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedMatrix {
    params: SplitParams,
    sizes: Vec<usize>,
    entries: Vec<i64>,
    nonzeros: Vec<(usize, usize, f64)>,
}

impl RestrictedMatrix {
    pub fn params(&self) -> SplitParams {
        self.params
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Entry at index position `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim() + j]
    }

    /// Entry by sizes, if both are in the index set.
    pub fn at(&self, row: usize, col: usize) -> Option<i64> {
        let i = self.sizes.binary_search(&row).ok()?;
        let j = self.sizes.binary_search(&col).ok()?;
        Some(self.get(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim()).map(<[i64]>::to_vec).collect()
    }

    /// `out = A_S x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, a) in &self.nonzeros {
            out[i] += a * x[j];
        }
    }

    /// Column sizes `k` where `<w_S, col_k> != r k`.
    pub fn left_identity_failures(&self) -> Vec<usize> {
        let r = self.params.batch() as i64;
        let n = self.dim();
        (0..n)
            .filter(|&j| {
                let s: i64 = (0..n).map(|i| self.sizes[i] as i64 * self.get(i, j)).sum();
                s != r * self.sizes[j] as i64
            })
            .map(|j| self.sizes[j])
            .collect()
    }

    /// Whether the directed graph with an edge `i -> j` for every nonzero
    /// off-diagonal entry is strongly connected.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.dim();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let a = if forward { self.get(i, j) } else { self.get(j, i) };
                    if i != j && a != 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}
