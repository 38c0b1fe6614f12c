use super::matrix::RestrictedMatrix;
use crate::error::{Error, Result};

/// Principal right eigenvector of `A_S` for eigenvalue `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub block_size: usize,
    pub batch: usize,
    pub sizes: Vec<usize>,
    /// Positive, normalized to sum 1.
    pub u: Vec<f64>,
    /// Left eigenvector `w_S`: the sizes themselves.
    pub w: Vec<usize>,
    /// `||A_S u - r u||_inf`.
    pub residual: f64,
    pub predicted_fullness: f64,
}

impl EigenSolution {
    pub fn value(&self, size: usize) -> Option<f64> {
        self.sizes.binary_search(&size).ok().map(|i| self.u[i])
    }

    /// `<u, w_S>`.
    pub fn mean_block_size(&self) -> f64 {
        self.sizes.iter().zip(&self.u).map(|(&k, x)| k as f64 * x).sum::<f64>()
            / self.u.iter().sum::<f64>()
    }
}

/// How the null space of `A_S - r I` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullSpaceMethod {
    /// State elimination on the `w`-scaled matrix, whose columns sum to zero
    /// and whose off-diagonal entries are non-negative. No subtractions occur,
    /// so even components near `1e-17` keep full relative accuracy.
    #[default]
    SubtractionFree,
    /// Gaussian elimination with partial pivoting. A column whose best pivot
    /// falls below round-off level becomes the free variable; if every column
    /// pivots, the smallest pivot is released instead. Components are only
    /// accurate relative to `max u`.
    PartialPivot,
}

/// Principal eigenvector of `A_S` for eigenvalue `r`, normalized to sum 1.
pub fn principal_eigenvector(a: &RestrictedMatrix, r: usize) -> Result<EigenSolution> {
    principal_eigenvector_with(a, r, NullSpaceMethod::default())
}

pub fn principal_eigenvector_with(
    a: &RestrictedMatrix,
    r: usize,
    method: NullSpaceMethod,
) -> Result<EigenSolution> {
    let mut u = match method {
        NullSpaceMethod::SubtractionFree => null_vector_scaled(a, r)?,
        NullSpaceMethod::PartialPivot => null_vector_pivoted(a, r)?,
    };
    let rf = r as f64;
    let n = a.dim();
    let total: f64 = u.iter().sum();
    for x in &mut u {
        *x /= total;
    }
    if let Some(i) = u.iter().position(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::Spectral(format!(
            "eigenvector not positive at size {} ({})",
            a.sizes()[i],
            u[i]
        )));
    }

    let mut au = vec![0.0; n];
    a.matvec(&u, &mut au);
    let residual = au
        .iter()
        .zip(&u)
        .map(|(x, y)| (x - rf * y).abs())
        .fold(0.0, f64::max);
    let umax = u.iter().copied().fold(0.0, f64::max);
    if residual > 1e-10 * umax {
        return Err(Error::Spectral(format!(
            "eigenvector residual {residual:e} exceeds 1e-10 * {umax:e}"
        )));
    }

    let sizes = a.sizes().to_vec();
    let b = a.params().block_size();
    let mean: f64 = sizes.iter().zip(&u).map(|(&k, x)| k as f64 * x).sum();
    Ok(EigenSolution {
        block_size: b,
        batch: r,
        w: sizes.clone(),
        sizes,
        u,
        residual,
        predicted_fullness: mean / b as f64,
    })
}

// G = (W (A_S - rI) W^-1)^T has zero row sums and non-negative off-diagonal
// entries, so y G = 0 is a stationary-distribution problem; u = W^-1 y.
fn null_vector_scaled(a: &RestrictedMatrix, r: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let w: Vec<f64> = a.sizes().iter().map(|&k| k as f64).collect();
    let mut g: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { w[j] * a.get(j, i) as f64 / w[i] })
                .collect()
        })
        .collect();
    for k in (1..n).rev() {
        let s: f64 = g[k][..k].iter().sum();
        if s.is_nan() || s <= 0.0 {
            return Err(Error::Spectral(format!(
                "size {} is absorbing after elimination; null space of A_S - {r}I is not a line",
                a.sizes()[k]
            )));
        }
        for i in 0..k {
            g[i][k] /= s;
        }
        for i in 0..k {
            let gik = g[i][k];
            if gik == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    let gkj = g[k][j];
                    g[i][j] += gik * gkj;
                }
            }
        }
    }
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    for j in 1..n {
        y[j] = (0..j).map(|i| y[i] * g[i][j]).sum();
    }
    Ok(y.iter().zip(&w).map(|(yi, wi)| yi / wi).collect())
}

fn null_vector_pivoted(a: &RestrictedMatrix, r: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let rf = r as f64;
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.get(i, j) as f64 - if i == j { rf } else { 0.0 })
                .collect()
        })
        .collect();
    let norm = m
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = 64.0 * n as f64 * f64::EPSILON * norm;

    // (column, row, |pivot|)
    let mut pivots: Vec<(usize, usize, f64)> = Vec::with_capacity(n);
    let mut free = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        let p = (rank..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap_or(rank);
        if rank == n || m[p][c].abs() <= tol {
            free.push(c);
            continue;
        }
        m.swap(rank, p);
        let piv = m[rank][c];
        for i in rank + 1..n {
            let f = m[i][c] / piv;
            if f != 0.0 {
                for j in c..n {
                    m[i][j] -= f * m[rank][j];
                }
            }
        }
        pivots.push((c, rank, piv.abs()));
        rank += 1;
    }
    if free.len() > 1 {
        return Err(Error::Spectral(format!(
            "null space of A_S - {r}I has dimension {} (expected 1)",
            free.len()
        )));
    }
    let free_col = match free.first() {
        Some(&c) => c,
        None => {
            let (at, _) = pivots
                .iter()
                .enumerate()
                .min_by(|x, y| x.1 .2.total_cmp(&y.1 .2))
                .expect("nonempty matrix");
            pivots.remove(at).0
        }
    };

    let mut u = vec![0.0; n];
    u[free_col] = 1.0;
    for &(c, row, _) in pivots.iter().rev() {
        let s: f64 = (c + 1..n).map(|j| m[row][j] * u[j]).sum();
        u[c] = -s / m[row][c];
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntraClassReport {
    /// Chains `j0, j0 + r, ...` within `S`, `j0 < d + r`.
    pub classes: Vec<Vec<usize>>,
    /// Largest relative violation of `u_k (k + r) = u_{k-r} (k - r)`.
    pub max_ratio_error: f64,
    /// Largest relative spread of `u_j j (j + r)` within a class.
    pub max_product_error: f64,
    /// Sizes `k` whose ratio relation fails.
    pub violations: Vec<usize>,
}

impl IntraClassReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.max_product_error <= 1e-9
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Checks the recurrence `u_k = (k - r) / (k + r) u_{k-r}` along each class.
pub fn intra_class_check(sol: &EigenSolution) -> IntraClassReport {
    let r = sol.batch;
    let d = sol.sizes[0];
    let mut classes = Vec::new();
    let mut violations = Vec::new();
    let mut max_ratio_error: f64 = 0.0;
    let mut max_product_error: f64 = 0.0;

    for &j0 in sol.sizes.iter().filter(|&&k| k < d + r) {
        let chain: Vec<usize> = (0..)
            .map(|l| j0 + l * r)
            .take_while(|&k| k <= sol.block_size)
            .filter(|&k| sol.value(k).is_some())
            .collect();
        for w in chain.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let e = rel(
                sol.value(hi).unwrap() * (hi + r) as f64,
                sol.value(lo).unwrap() * lo as f64,
            );
            max_ratio_error = max_ratio_error.max(e);
            if e > 1e-9 {
                violations.push(hi);
            }
        }
        let prods: Vec<f64> = chain
            .iter()
            .map(|&k| sol.value(k).unwrap() * (k * (k + r)) as f64)
            .collect();
        for p in &prods {
            max_product_error = max_product_error.max(rel(*p, prods[0]));
        }
        classes.push(chain);
    }
    IntraClassReport {
        classes,
        max_ratio_error,
        max_product_error,
        violations,
    }
}

/// Rank-one projection `u w^T / <w, u>` onto the eigenspace of `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjection {
    pub sizes: Vec<usize>,
    // row-major
    entries: Vec<f64>,
}

impl SpectralProjection {
    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `max |P^2 - P|`.
    pub fn idempotence_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let pp: f64 = (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum();
                worst = worst.max((pp - self.get(i, j)).abs());
            }
        }
        worst
    }

    /// `max(|P A - r P|, |A P - r P|)` entry-wise.
    pub fn commutation_error(&self, a: &RestrictedMatrix, r: usize) -> f64 {
        let n = self.dim();
        let rf = r as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let pa: f64 = (0..n).map(|k| self.get(i, k) * a.get(k, j) as f64).sum();
                let ap: f64 = (0..n).map(|k| a.get(i, k) as f64 * self.get(k, j)).sum();
                let rp = rf * self.get(i, j);
                worst = worst.max((pa - rp).abs()).max((ap - rp).abs());
            }
        }
        worst
    }
}

pub fn spectral_projection(sol: &EigenSolution) -> SpectralProjection {
    let n = sol.sizes.len();
    let wu: f64 = sol.w.iter().zip(&sol.u).map(|(&w, u)| w as f64 * u).sum();
    assert!(wu > 0.0, "<w, u> must be positive");
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(sol.u[i] * sol.w[j] as f64 / wu);
        }
    }
    SpectralProjection {
        sizes: sol.sizes.clone(),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SplitParams;
    use crate::spectral::{analyze, support_set, TransitionMatrix};

    fn solve(b: usize, r: usize) -> EigenSolution {
        analyze(SplitParams::new(b, r).unwrap()).unwrap()
    }

    #[test]
    fn b15_r4() {
        let s = solve(15, 4);
        assert_eq!(s.sizes, vec![8, 12]);
        assert!((s.u[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((s.u[1] - 1.0 / 3.0).abs() < 1e-14);
        assert!((s.predicted_fullness - 28.0 / 45.0).abs() < 1e-14);
        let rep = intra_class_check(&s);
        assert!(rep.holds());
        assert_eq!(rep.classes, vec![vec![8, 12]]);

        let p = spectral_projection(&s);
        let want = [[16.0, 24.0], [8.0, 12.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.get(i, j) - want[i][j] / 28.0).abs() < 1e-14);
            }
        }
        assert!(p.idempotence_error() < 1e-12);
    }

    #[test]
    fn r1_closed_form() {
        let s = solve(63, 1);
        let z: f64 = (32..=63).map(|k| 1.0 / (k * (k + 1)) as f64).sum();
        for (&k, &u) in s.sizes.iter().zip(&s.u) {
            let want = 1.0 / (k * (k + 1)) as f64 / z;
            assert!((u - want).abs() < 1e-12 * want, "k={k}");
        }
        let h = |n: usize| (1..=n).map(|i| 1.0 / i as f64).sum::<f64>();
        let want = (h(64) - h(32)) * 64.0 / 63.0;
        assert!((s.predicted_fullness - want).abs() < 1e-12);
    }

    #[test]
    fn b63_r2_classes() {
        let s = solve(63, 2);
        let rep = intra_class_check(&s);
        assert!(rep.holds(), "{rep:?}");
        assert_eq!(rep.classes.len(), 1);
        assert!(rep.max_ratio_error < 1e-12);
        let rep = intra_class_check(&solve(63, 10));
        assert!(rep.holds(), "{rep:?}");
        assert_eq!(rep.classes.len(), 5);
    }

    #[test]
    fn projection_identities() {
        for (b, r) in [(15, 4), (63, 1), (63, 10), (127, 5)] {
            let params = SplitParams::new(b, r).unwrap();
            let a = TransitionMatrix::build(params)
                .unwrap()
                .restrict(&support_set(params).unwrap())
                .unwrap();
            let s = principal_eigenvector(&a, r).unwrap();
            let p = spectral_projection(&s);
            assert!(p.idempotence_error() < 1e-12);
            assert!(p.commutation_error(&a, r) < 1e-9, "B={b} r={r}");
        }
    }

    #[test]
    fn methods_agree_where_pivoting_succeeds() {
        let (mut ok, mut rejected) = (0, 0);
        for b in (5..=255).step_by(10) {
            for r in 1..=(b - 1) / 2 {
                let params = SplitParams::new(b, r).unwrap();
                let a = TransitionMatrix::build(params)
                    .unwrap()
                    .restrict(&support_set(params).unwrap())
                    .unwrap();
                let fast = principal_eigenvector(&a, r).unwrap();
                match principal_eigenvector_with(&a, r, NullSpaceMethod::PartialPivot) {
                    Ok(piv) => {
                        ok += 1;
                        let diff = (fast.predicted_fullness - piv.predicted_fullness).abs();
                        assert!(diff < 1e-9, "B={b} r={r} {diff:e}");
                    }
                    Err(Error::Spectral(_)) => rejected += 1,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        // pivoting loses the tiny components once r approaches d
        assert!(ok > 10 * rejected, "{ok} ok, {rejected} rejected");
    }

    #[test]
    fn pivoted_method_on_well_scaled_case() {
        let params = SplitParams::new(63, 4).unwrap();
        let a = TransitionMatrix::build(params)
            .unwrap()
            .restrict(&support_set(params).unwrap())
            .unwrap();
        let s = principal_eigenvector_with(&a, 4, NullSpaceMethod::PartialPivot).unwrap();
        let t = principal_eigenvector(&a, 4).unwrap();
        assert!((s.predicted_fullness - t.predicted_fullness).abs() < 1e-13);
    }

    #[test]
    fn tiny_components_stay_positive() {
        let s = solve(149, 73);
        let min = s.u.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > 1e-17 && min < 2e-17, "{min}");
        assert!((s.value(77).unwrap() - 1.6827639671098938e-17).abs() < 1e-27);
    }

    #[test]
    fn solver_contract_grid() {
        for b in (5..=255).step_by(2) {
            for r in 1..=(b - 1) / 2 {
                let s = analyze(SplitParams::new(b, r).unwrap())
                    .unwrap_or_else(|e| panic!("B={b} r={r}: {e}"));
                assert!(s.u.iter().all(|&x| x > 0.0));
                assert!(s.residual <= 1e-10 * s.u.iter().copied().fold(0.0, f64::max));
                assert!(s.predicted_fullness > 0.5 && s.predicted_fullness <= 1.0);
            }
        }
    }
}
