//! Spectral results checked against independent computations.

use blocksplit::bounds::{even_split_lower_bound, table_bound};
use blocksplit::spectral::{
    analyze, perron_margin, spectral_projection, support_set, TransitionMatrix,
};
use blocksplit::strategies::even_split_outcome;
use blocksplit::SplitParams;
use nalgebra::DMatrix;

fn params(b: usize, r: usize) -> SplitParams {
    SplitParams::new(b, r).unwrap()
}

#[test]
fn left_eigenvector_identity_exact() {
    for b in (5..=255).step_by(2) {
        for r in 1..=(b - 1) / 2 {
            let a = TransitionMatrix::build(params(b, r)).unwrap();
            assert!(a.left_identity_failures().is_empty(), "B={b} r={r}");
            assert!(a.is_metzler());
        }
    }
}

#[test]
fn columns_are_scaled_outcome_deltas() {
    for b in (5..=101).step_by(2) {
        for r in 1..=(b - 1) / 2 {
            let p = params(b, r);
            let a = TransitionMatrix::build(p).unwrap();
            let d = a.half();
            for k in a.sizes() {
                let mut delta = vec![0i64; d];
                delta[k - d] -= 1;
                for &s in even_split_outcome(k, p).unwrap().sizes() {
                    delta[s - d] += 1;
                }
                let want: Vec<i64> = delta.iter().map(|x| x * k as i64).collect();
                assert_eq!(a.column(k), want, "B={b} r={r} k={k}");
            }
        }
    }
}

fn eigenvalues(b: usize, r: usize) -> Vec<nalgebra::Complex<f64>> {
    let p = params(b, r);
    let m = TransitionMatrix::build(p)
        .unwrap()
        .restrict(&support_set(p).unwrap())
        .unwrap();
    let n = m.dim();
    let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j) as f64);
    dense.complex_eigenvalues().iter().copied().collect()
}

#[test]
fn margin_matches_dense_eigenvalues() {
    for (b, r) in [(15, 1), (15, 4), (15, 7), (63, 1), (63, 2), (63, 4), (63, 31), (127, 2), (127, 63)] {
        let eig = eigenvalues(b, r);
        let (at, _) = eig
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1.re - r as f64).hypot(x.1.im).total_cmp(&(y.1.re - r as f64).hypot(y.1.im)))
            .unwrap();
        assert!((eig[at].re - r as f64).abs() < 1e-8 && eig[at].im.abs() < 1e-8);
        let shift = b as f64;
        let rho2 = eig
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != at)
            .map(|(_, z)| (z.re + shift).hypot(z.im))
            .fold(0.0, f64::max);
        for (i, z) in eig.iter().enumerate() {
            if i != at {
                assert!(z.re < r as f64, "B={b} r={r}: {z}");
            }
        }

        let p = params(b, r);
        let m = TransitionMatrix::build(p).unwrap().restrict(&support_set(p).unwrap()).unwrap();
        let rep = perron_margin(&m, r).unwrap();
        assert!(rep.certifies(), "B={b} r={r}: {rep:?}");
        assert!((rep.subdominant - rho2).abs() < 1e-6 * rho2.max(1.0), "B={b} r={r}: {} vs {rho2}", rep.subdominant);
    }
}

#[test]
fn b15_r4_spectrum() {
    let mut eig: Vec<f64> = eigenvalues(15, 4).iter().map(|z| z.re).collect();
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] + 24.0).abs() < 1e-12 && (eig[1] - 4.0).abs() < 1e-12);
}

#[test]
fn predicted_fullness_dominates_bounds() {
    for b in [63usize, 127, 239] {
        for r in 1..=(b - 1) / 2 {
            let pf = analyze(params(b, r)).unwrap().predicted_fullness;
            assert!(pf > 0.5 && pf <= 1.0);
            assert!(pf >= even_split_lower_bound(b, r).unwrap() - 1e-9, "B={b} r={r}");
            let t = table_bound(b, r).unwrap();
            if (2..=4).contains(&t.row) {
                assert!(pf >= t.fill, "B={b} r={r} row {}: {pf} < {}", t.row, t.fill);
            }
        }
    }
}

#[test]
fn projection_is_rank_one_onto_u() {
    let sol = analyze(params(63, 10)).unwrap();
    let p = spectral_projection(&sol);
    let n = p.dim();
    let dense = DMatrix::from_fn(n, n, |i, j| p.get(i, j));
    let sv = dense.singular_values();
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    assert!(sv[0] > 0.1);
    assert!(sv[1] < 1e-12);
    let pu = p.apply(&sol.u);
    for (x, y) in pu.iter().zip(&sol.u) {
        assert!((x - y).abs() < 1e-14);
    }
}
