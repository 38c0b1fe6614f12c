//! Closed-form fills and lower bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};

/// One regime of the piecewise fill bound, evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Regime row, 2 through 8.
    pub row: u8,
    /// Interval of `r / B` the row covers.
    pub regime: &'static str,
    pub formula: &'static str,
    pub fill: f64,
}

/// Fill guaranteed by the recommended algorithm for `r / B`.
///
/// The thresholds 0.0058 and 0.21 are compared against `r / B` exactly as
/// written; the rational ones (7/18, 1/2, 2/3, 1) are compared in integers.
pub fn table_bound(block_size: usize, batch: usize) -> Result<BoundResult> {
    let (b, r) = (block_size, batch);
    if b < 3 || r < 1 {
        return param(format!("need B >= 3 and r >= 1, got B = {b}, r = {r}"));
    }
    let (bf, rf) = (b as f64, r as f64);
    let alpha = rf / bf;
    let row = |row, regime, formula, fill| BoundResult { row, regime, formula, fill };
    Ok(if alpha <= 0.0058 {
        row(2, "[1/B, 0.0058]", "ln(2) - 5r/B", std::f64::consts::LN_2 - 5.0 * alpha)
    } else if alpha <= 0.21 {
        row(3, "(0.0058, 0.21]", "2(B+1)/(3B+1+2r)", 2.0 * (bf + 1.0) / (3.0 * bf + 1.0 + 2.0 * rf))
    } else if 18 * r <= 7 * b {
        row(4, "(0.21, 7/18]", "7/12", 7.0 / 12.0)
    } else if 2 * r <= b {
        row(5, "(7/18, 1/2]", "3r/2B", 1.5 * alpha)
    } else if 3 * r <= 2 * b {
        row(6, "(1/2, 2/3]", "10r/9B", 10.0 * alpha / 9.0)
    } else if r <= b {
        row(7, "(2/3, 1]", "r/B", alpha)
    } else {
        let blocks = (b + r).div_ceil(b) as f64;
        row(
            8,
            "(1, inf)",
            "max{(0.5+r/B)/ceil(1+r/B), 2/3}",
            ((0.5 + alpha) / blocks).max(2.0 / 3.0),
        )
    })
}

/// Stationary behavior of deferred even splitting for `B/(2i) < r <= B/(2i-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeferredClosedForm {
    pub i: usize,
    /// `(2ir/B)(H_{2i} - H_i)`.
    pub fill: f64,
    /// `(j, u_j)` for `j = i..2i-1`: the fraction of blocks of size `jr`,
    /// `u_j = 2i / (j (j + 1))`.
    pub distribution: Vec<(usize, f64)>,
}

/// The `i` with `B/(2i) < r <= B/(2i-1)`, if any: exactly when `floor(B/r)`
/// is odd, with `floor(B/r) = 2i - 1`.
pub fn deferred_index(block_size: usize, batch: usize) -> Option<usize> {
    if batch == 0 {
        return None;
    }
    let q = block_size / batch;
    (q % 2 == 1).then_some(q.div_ceil(2))
}

pub fn deferred_closed_form(block_size: usize, batch: usize) -> Result<DeferredClosedForm> {
    let i = deferred_index(block_size, batch).ok_or_else(|| {
        Error::OutOfRange(format!(
            "no i >= 1 with B/(2i) < r <= B/(2i-1) for B = {block_size}, r = {batch}"
        ))
    })?;
    let scale = 2.0 * i as f64 * batch as f64 / block_size as f64;
    let fill = scale * harmonic_difference(i);
    let distribution: Vec<(usize, f64)> = (i..2 * i)
        .map(|j| (j, 2.0 * i as f64 / (j * (j + 1)) as f64))
        .collect();
    let total: f64 = distribution.iter().map(|p| p.1).sum();
    debug_assert!((total - 1.0).abs() < 1e-12);
    Ok(DeferredClosedForm { i, fill, distribution })
}

/// `H_{2i} - H_i`, summed directly.
pub fn harmonic_difference(i: usize) -> f64 {
    neumaier((i + 1..=2 * i).map(|j| 1.0 / j as f64))
}

/// `H_k = 1 + 1/2 + ... + 1/k` with compensated summation.
pub fn harmonic(k: usize) -> Result<f64> {
    if k < 1 {
        return param("harmonic number H_k needs k >= 1");
    }
    Ok(neumaier((1..=k).map(|j| 1.0 / j as f64)))
}

fn neumaier(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Best of the three even-split lower bounds that apply to `(B, r)`, as a
/// fill fraction: `ln 2 - 5r/B` and `2(B+1)/(3B+1+2r)` for `r < B/2`, and
/// `7/12` for `r <= 5B/12`.
pub fn even_split_lower_bound(block_size: usize, batch: usize) -> Result<f64> {
    let (b, r) = (block_size, batch);
    if b < 3 || b % 2 == 0 || r < 1 {
        return param(format!("even-split bounds need odd B >= 3 and r >= 1, got B = {b}, r = {r}"));
    }
    if 2 * r >= b {
        return Err(Error::OutOfRange(format!(
            "even-split bounds need r < B/2, got B = {b}, r = {r}"
        )));
    }
    let (bf, rf) = (b as f64, r as f64);
    let mut best = (std::f64::consts::LN_2 - 5.0 * rf / bf).max(2.0 * (bf + 1.0) / (3.0 * bf + 1.0 + 2.0 * rf));
    if 12 * r <= 5 * b {
        best = best.max(7.0 / 12.0);
    }
    Ok(best)
}

/// `f(x, y, a) = xy(x + y + 2a) / (x^2 + y^2 + a(x + y))`.
pub fn f_ratio(x: f64, y: f64, alpha: f64) -> f64 {
    x * y * (x + y + 2.0 * alpha) / (x * x + y * y + alpha * (x + y))
}

/// `1/2 <= x <= 1`, `1 - a <= y <= 1`, `y - x >= a`, `0 < a < 1/2`.
pub fn f_feasible(x: f64, y: f64, alpha: f64) -> bool {
    let eps = 1e-15;
    alpha > 0.0
        && alpha < 0.5
        && x >= 0.5 - eps
        && x <= 1.0 + eps
        && y >= 1.0 - alpha - eps
        && y <= 1.0 + eps
        && y - x >= alpha - eps
}

#[derive(Debug, Clone, PartialEq)]
pub struct FMinReport {
    pub resolution: usize,
    pub points: usize,
    pub min: f64,
    /// `(x, y, a)` of the minimum.
    pub argmin: (f64, f64, f64),
    /// Random feasible points where a forward difference in `y` was not
    /// positive.
    pub monotone_violations: usize,
}

impl FMinReport {
    pub fn holds(&self) -> bool {
        self.min >= 7.0 / 12.0 - 1e-9 && self.monotone_violations == 0
    }
}

/// Scans a `resolution^3` grid over the feasible region, refines around the
/// best point, and spot-checks that `f` increases in `y`.
pub fn f_min_check(resolution: usize) -> Result<FMinReport> {
    if resolution < 100 {
        return param(format!("f-min grid needs at least 100 points per axis, got {resolution}"));
    }
    let n = resolution;
    let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
    let mut points = 0;
    for ia in 1..n {
        // a = ia / (2n) covers (0, 1/2), including 1/4 when n is even
        let a = ia as f64 / (2 * n) as f64;
        let x_hi = 1.0 - a;
        for ix in 0..n {
            let x = 0.5 + (x_hi - 0.5) * ix as f64 / (n - 1) as f64;
            let y_lo = (1.0 - a).max(x + a);
            for iy in 0..n {
                let y = y_lo + (1.0 - y_lo) * iy as f64 / (n - 1) as f64;
                let v = f_ratio(x, y, a);
                points += 1;
                if v < best.0 {
                    best = (v, (x, y, a));
                }
            }
        }
    }
    let (min, argmin) = refine(best.0, best.1, 0.5 / n as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut monotone_violations = 0;
    let mut checked = 0;
    while checked < 100 {
        let a: f64 = rng.gen_range(1e-3..0.5 - 1e-3);
        let x: f64 = rng.gen_range(0.5..=1.0 - a);
        let y_lo = (1.0 - a).max(x + a);
        if y_lo >= 1.0 - 1e-6 {
            continue;
        }
        let y = rng.gen_range(y_lo..1.0 - 1e-6);
        let h = 1e-7;
        if f_ratio(x, y + h, a) - f_ratio(x, y, a) <= 0.0 {
            monotone_violations += 1;
        }
        checked += 1;
    }
    Ok(FMinReport {
        resolution,
        points,
        min,
        argmin,
        monotone_violations,
    })
}

// Pattern search restricted to the feasible region.
fn refine(mut val: f64, mut at: (f64, f64, f64), mut step: f64) -> (f64, (f64, f64, f64)) {
    let dirs: [(f64, f64, f64); 6] = [
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.0),
        (0.0, 0.0, -1.0),
    ];
    while step > 1e-13 {
        let mut moved = false;
        for (dx, dy, da) in dirs {
            let (x, y, a) = (at.0 + dx * step, at.1 + dy * step, at.2 + da * step);
            if f_feasible(x, y, a) {
                let v = f_ratio(x, y, a);
                if v < val {
                    val = v;
                    at = (x, y, a);
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (val, at)
}
