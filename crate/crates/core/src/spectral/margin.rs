use super::eigen::{principal_eigenvector, EigenSolution};
use super::matrix::RestrictedMatrix;
use crate::error::Result;

const MAX_ITERATIONS: usize = 400_000;
const CHECK_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// Shift `c = B` making `M = A_S + cI` non-negative.
    pub shift: f64,
    /// `r + c`, the claimed spectral radius of `M`.
    pub expected_dominant: f64,
    /// Collatz-Wielandt bracket on the spectral radius of `M`.
    pub dominant_lower: f64,
    pub dominant_upper: f64,
    pub dominant_converged: bool,
    /// Spectral radius of `M` restricted to the complement of the
    /// eigenvector of `r`.
    pub subdominant: f64,
    pub subdominant_converged: bool,
    pub iterations: usize,
}

impl MarginReport {
    pub fn dominant(&self) -> f64 {
        0.5 * (self.dominant_lower + self.dominant_upper)
    }

    /// `(r + c) - rho_2`.
    pub fn gap(&self) -> f64 {
        self.expected_dominant - self.subdominant
    }

    /// Both iterations converged.
    pub fn conclusive(&self) -> bool {
        self.dominant_converged && self.subdominant_converged
    }

    /// Dominant modulus matches `r + c` within `1e-8` and the gap is positive.
    pub fn certifies(&self) -> bool {
        self.conclusive()
            && (self.dominant() - self.expected_dominant).abs() <= 1e-8
            && self.gap() > 0.0
    }
}

struct Shifted<'a> {
    a: &'a RestrictedMatrix,
    c: f64,
}

impl Shifted<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.a.matvec(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.c * xi;
        }
    }
}

/// Power iteration on `M = A_S + B I` for the Perron root, then block power
/// iteration on `M (I - P)` for the largest remaining eigenvalue modulus.
pub fn perron_margin(a: &RestrictedMatrix, r: usize) -> Result<MarginReport> {
    let sol = principal_eigenvector(a, r)?;
    let c = a.params().block_size() as f64;
    let m = Shifted { a, c };
    let expected = r as f64 + c;

    let (lo, hi, dom_ok, dom_iters) = dominant(&m);
    let (sub, sub_ok, sub_iters) = subdominant(&m, &sol);
    Ok(MarginReport {
        shift: c,
        expected_dominant: expected,
        dominant_lower: lo,
        dominant_upper: hi,
        dominant_converged: dom_ok,
        subdominant: sub,
        subdominant_converged: sub_ok,
        iterations: dom_iters.max(sub_iters),
    })
}

fn dominant(m: &Shifted) -> (f64, f64, bool, usize) {
    let n = m.a.dim();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for it in 1..=MAX_ITERATIONS {
        m.apply(&x, &mut y);
        lo = f64::INFINITY;
        hi = 0.0;
        for (yi, xi) in y.iter().zip(&x) {
            let q = yi / xi;
            lo = f64::min(lo, q);
            hi = f64::max(hi, q);
        }
        if hi - lo <= 1e-12 * hi {
            return (lo, hi, true, it);
        }
        let norm = y.iter().copied().fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    (lo, hi, false, MAX_ITERATIONS)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Removes the component along u: x - u <w, x> / <w, u>.
fn deflate(x: &mut [f64], u: &[f64], w: &[f64], wu: f64) {
    let t = dot(w, x) / wu;
    for (xi, ui) in x.iter_mut().zip(u) {
        *xi -= t * ui;
    }
}

// Gram-Schmidt on the columns; returns false if a column vanishes.
fn orthonormalize(q: &mut [Vec<f64>]) -> bool {
    for i in 0..q.len() {
        for j in 0..i {
            let (head, tail) = q.split_at_mut(i);
            let t = dot(&head[j], &tail[0]);
            for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                *x -= t * y;
            }
        }
        let norm = dot(&q[i], &q[i]).sqrt();
        if norm.is_nan() || norm <= 1e-300 {
            return false;
        }
        for x in &mut q[i] {
            *x /= norm;
        }
    }
    true
}

// Largest eigenvalue modulus of a real 1x1 or 2x2 matrix.
fn max_modulus(h: &[Vec<f64>]) -> f64 {
    if h.len() == 1 {
        return h[0][0].abs();
    }
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
    } else {
        det.abs().sqrt()
    }
}

fn subdominant(m: &Shifted, sol: &EigenSolution) -> (f64, bool, usize) {
    let n = sol.u.len();
    if n == 1 {
        return (0.0, true, 0);
    }
    let u = &sol.u;
    let w: Vec<f64> = sol.w.iter().map(|&k| k as f64).collect();
    let wu = dot(&w, u);
    // a 2-dimensional block captures a dominant complex pair
    let p = (n - 1).min(2);
    let mut q: Vec<Vec<f64>> = (0..p)
        .map(|col| {
            (0..n)
                .map(|i| match col {
                    0 => 1.0 + i as f64,
                    _ => (if i % 2 == 0 { 1.0 } else { -1.0 }) * (1.0 + (i % 3) as f64),
                })
                .collect()
        })
        .collect();
    for col in &mut q {
        deflate(col, u, &w, wu);
    }
    if !orthonormalize(&mut q) {
        return (0.0, false, 0);
    }

    let mut z = vec![vec![0.0; n]; p];
    let mut history: Vec<f64> = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        for (zc, qc) in z.iter_mut().zip(&q) {
            m.apply(qc, zc);
            deflate(zc, u, &w, wu);
        }
        let h: Vec<Vec<f64>> = (0..p)
            .map(|i| (0..p).map(|j| dot(&q[i], &z[j])).collect())
            .collect();
        let est = max_modulus(&h);
        std::mem::swap(&mut q, &mut z);
        if !orthonormalize(&mut q) {
            // deflated operator annihilated the block: nilpotent remainder
            return (est, true, it);
        }
        if it % CHECK_EVERY == 0 {
            history.push(est);
            let k = history.len();
            if k >= 3 {
                let spread = (history[k - 1] - history[k - 2])
                    .abs()
                    .max((history[k - 2] - history[k - 3]).abs());
                if spread <= 1e-11 * est.max(1.0) {
                    return (est, true, it);
                }
            }
        }
        if it == MAX_ITERATIONS {
            return (est, false, it);
        }
    }
    unreachable!()
}
