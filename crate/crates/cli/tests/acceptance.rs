//! Acceptance criteria, one PASS/FAIL line each. Reference values are
//! computed here from first principles wherever possible.

use std::process::ExitCode;
use std::time::Instant;

use blocksplit::bounds::{even_split_lower_bound, f_min_check, table_bound};
use blocksplit::simulate::{
    key_level_batch, run_expected_recurrence, run_key_level, run_monte_carlo,
    run_monte_carlo_detailed, run_single, Continuation, RecurrenceOptions, RunConfig,
};
use blocksplit::spectral::{
    analyze, perron_margin, predicted_fullness, support_set, TransitionMatrix,
};
use blocksplit::strategies::{even_split_outcome, Strategy};
use blocksplit::{SplitParams, StrategyKind, UnevenMode};
use blocksplit_cli::commands::run_sweep;
use blocksplit_cli::config::SweepSpec;
use blocksplit_cli::table::SweepRow;
use nalgebra::DMatrix;

type Verdict = (bool, String);

fn p(b: usize, r: usize) -> SplitParams {
    SplitParams::new(b, r).unwrap()
}

/// `H_hi - H_lo` by direct summation, largest index first.
fn h_diff(lo: usize, hi: usize) -> f64 {
    (lo + 1..=hi).rev().map(|j| 1.0 / j as f64).sum()
}

/// Smallest `i` with `B/(2i) < r <= B/(2i-1)`, by search.
fn deferred_i(b: usize, r: usize) -> Option<usize> {
    (1..=b).find(|&i| b < 2 * i * r && (2 * i - 1) * r <= b)
}

fn deferred_fill(b: usize, r: usize) -> Option<f64> {
    deferred_i(b, r).map(|i| 2.0 * i as f64 * r as f64 / b as f64 * h_diff(i, 2 * i))
}

fn mc(kind: StrategyKind, b: usize, r: usize) -> RunConfig {
    RunConfig::new(kind, p(b, r)).insertions(200_000).runs(10)
}

fn mean(kind: StrategyKind, b: usize, r: usize) -> f64 {
    run_monte_carlo(&mc(kind, b, r)).unwrap().mean_fullness
}

fn odd_grid() -> impl Iterator<Item = (usize, usize)> {
    (5..=255usize).step_by(2).flat_map(|b| (1..=(b - 1) / 2).map(move |r| (b, r)))
}

fn c1_left_identity() -> Verdict {
    let t = Instant::now();
    let mut cases = 0;
    let mut bad = Vec::new();
    for (b, r) in odd_grid() {
        let a = TransitionMatrix::build(p(b, r)).unwrap();
        let d = (b + 1) / 2;
        for k in d..=b {
            let s: i128 = (d..=b).map(|i| i as i128 * a.get(i, k) as i128).sum();
            if s != (r * k) as i128 {
                bad.push(format!("B={b} r={r} k={k}"));
            }
        }
        cases += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    (bad.is_empty() && secs < 10.0, format!("{cases} matrices, {} mismatches, {secs:.2}s", bad.len()))
}

fn c2_columns() -> Verdict {
    let mut cols = 0;
    let mut bad = 0;
    for (b, r) in odd_grid() {
        let a = TransitionMatrix::build(p(b, r)).unwrap();
        let d = (b + 1) / 2;
        for k in d..=b {
            let mut delta = vec![0i64; b + 1 - d];
            delta[k - d] -= 1;
            for &s in even_split_outcome(k, p(b, r)).unwrap().sizes() {
                delta[s - d] += 1;
            }
            let col: Vec<i64> = (d..=b).map(|i| a.get(i, k)).collect();
            if col != delta.iter().map(|x| x * k as i64).collect::<Vec<_>>() {
                bad += 1;
            }
            cols += 1;
        }
    }
    (bad == 0, format!("{cols} columns, {bad} mismatches"))
}

fn c3_unit_batch() -> Verdict {
    let mut worst: f64 = 0.0;
    for b in [63usize, 127, 239] {
        let want = h_diff((b + 1) / 2, b + 1) * (b + 1) as f64 / b as f64;
        worst = worst.max((predicted_fullness(p(b, 1)).unwrap() - want).abs());
    }
    let f239 = predicted_fullness(p(239, 1)).unwrap();
    let ln2 = (f239 - std::f64::consts::LN_2).abs();
    (
        worst <= 1e-12 && ln2 < 0.01,
        format!("max error {worst:.1e}; B=239 {f239:.6} vs ln 2 off by {ln2:.4}"),
    )
}

fn c4_unit_batch() -> Verdict {
    let t = Instant::now();
    let want = h_diff(120, 240) * 240.0 / 239.0;
    let got = mean(StrategyKind::Even, 239, 1);
    let secs = t.elapsed().as_secs_f64();
    (
        (got - want).abs() <= 0.01 && secs < 60.0,
        format!("simulated {got:.4} vs {want:.4} (diff {:.4}), {secs:.1}s", got - want),
    )
}

fn c5_half_dip() -> Verdict {
    let even = mean(StrategyKind::Even, 240, 120);
    let deferred = mean(StrategyKind::DeferredEven, 240, 120);
    (
        (even - 0.5).abs() <= 0.01 && (deferred - 0.5).abs() <= 0.01,
        format!("even {even:.4}, deferred even {deferred:.4}, target 0.5"),
    )
}

fn c6_deferred() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [65usize, 80, 121, 180, 240] {
        let want = deferred_fill(240, r).unwrap();
        let got = mean(StrategyKind::DeferredEven, 240, r);
        ok &= (got - want).abs() <= 0.01;
        parts.push(format!("r={r} {got:.4}/{want:.4}"));
    }
    let runs = run_monte_carlo_detailed(&mc(StrategyKind::DeferredEven, 240, 80)).unwrap();
    let i = deferred_i(240, 80).unwrap();
    for j in i..2 * i {
        let u = 2.0 * i as f64 / (j * (j + 1)) as f64;
        let frac = runs
            .iter()
            .map(|x| x.histogram.count(j * 80) as f64 / x.histogram.block_count() as f64)
            .sum::<f64>()
            / runs.len() as f64;
        ok &= (frac - u).abs() <= 0.02;
        parts.push(format!("u_{j} {frac:.4}/{u:.4}"));
    }
    (ok, parts.join(", "))
}

fn c7_uneven() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, r, allowed, want) in [
        (StrategyKind::UnevenRegime1, 100usize, vec![100usize, 200], 150.0),
        (StrategyKind::UnevenRegime2, 120, vec![60, 120, 180], 1200.0 / 9.0),
    ] {
        let cfg = mc(kind, 240, r);
        let mut violations = 0u64;
        let mut total = 0.0;
        for run in 0..cfg.runs {
            let res = run_single(&cfg, run, |h| {
                violations += h.iter().filter(|(s, _)| !allowed.contains(s)).count() as u64;
                Ok(())
            })
            .unwrap();
            total += res.histogram.total_keys() as f64 / res.histogram.block_count() as f64;
        }
        let got = total / cfg.runs as f64;
        ok &= violations == 0 && (got - want).abs() <= 0.01 * want;
        parts.push(format!("{kind} r={r}: mean size {got:.2}/{want:.2}, {violations} violations"));
    }
    (ok, parts.join("; "))
}

fn c8_large_batch() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [300usize, 500, 1000] {
        let alpha = r as f64 / 240.0;
        let bound = ((0.5 + alpha) / (1.0 + alpha).ceil()).max(2.0 / 3.0) - 1.0 / 240.0;
        let got = mean(StrategyKind::DeferredEven, 240, r);
        ok &= got >= bound;
        parts.push(format!("r={r} {got:.4} >= {bound:.4}"));
    }
    (ok, parts.join(", "))
}

fn c9_dominance() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for b in [63usize, 127, 239] {
        let bf = b as f64;
        for r in 1..=(b - 1) / 2 {
            let pf = predicted_fullness(p(b, r)).unwrap();
            let alpha = r as f64 / bf;
            let row = if alpha <= 0.0058 {
                Some(std::f64::consts::LN_2 - 5.0 * alpha)
            } else if alpha <= 0.21 {
                Some(2.0 * (bf + 1.0) / (3.0 * bf + 1.0 + 2.0 * r as f64))
            } else if 18 * r <= 7 * b {
                Some(7.0 / 12.0)
            } else {
                None
            };
            if let Some(bound) = row {
                checked += 1;
                let lib = table_bound(b, r).unwrap().fill;
                if pf < bound || (lib - bound).abs() > 1e-15 {
                    bad.push(format!("B={b} r={r} row bound"));
                }
            }
            if pf < even_split_lower_bound(b, r).unwrap() - 1e-9 {
                bad.push(format!("B={b} r={r} even-split bound"));
            }
        }
    }
    (bad.is_empty(), format!("{checked} row-bounded cases, failures {bad:?}"))
}

fn c10_convergence() -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [1usize, 2, 4, 10] {
        let sol = analyze(p(63, r)).unwrap();
        // P e_d / d = u <w, e_d> / (d <w, u>) = u / <w, u>
        let wu: f64 = sol.sizes.iter().zip(&sol.u).map(|(&k, u)| k as f64 * u).sum();
        let limit: Vec<f64> = sol.u.iter().map(|u| u / wu).collect();
        let traj = run_expected_recurrence(p(63, r), 100_000, RecurrenceOptions::default()).unwrap();
        let err = traj
            .last()
            .normalized()
            .iter()
            .zip(&limit)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ok &= err <= 1e-6;
        parts.push(format!("r={r} {err:.1e}"));
    }
    let secs = t.elapsed().as_secs_f64();
    (ok && secs < 30.0, format!("{}, {secs:.2}s", parts.join(", ")))
}

fn dense_spectral_radius_excluding(b: usize, r: usize) -> f64 {
    let params = p(b, r);
    let a = TransitionMatrix::build(params).unwrap();
    let s = support_set(params).unwrap();
    let sizes = s.sizes();
    let n = sizes.len();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(sizes[i], sizes[j]) as f64 + if i == j { b as f64 } else { 0.0 });
    let mut eig: Vec<nalgebra::Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    let top = (r + b) as f64;
    let at = eig
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1.re - top).abs().total_cmp(&(y.1.re - top).abs()))
        .unwrap()
        .0;
    eig.remove(at);
    eig.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c11_margin() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [15usize, 63, 127] {
        for r in [1, 2, 4, (b - 1) / 2] {
            let params = p(b, r);
            let a = TransitionMatrix::build(params).unwrap().restrict(&support_set(params).unwrap()).unwrap();
            let m = perron_margin(&a, r).unwrap();
            let dense = dense_spectral_radius_excluding(b, r);
            let agree = (m.subdominant - dense).abs() <= 1e-6 * (b + r) as f64;
            let strict = m.subdominant < (r + b) as f64 && m.gap() > 0.0 && m.certifies();
            ok &= agree && strict;
            if !(agree && strict) {
                parts.push(format!("B={b} r={r}: {} vs dense {dense}", m.subdominant));
            }
        }
    }
    let a = TransitionMatrix::build(p(15, 4)).unwrap();
    let s = support_set(p(15, 4)).unwrap();
    let sz = s.sizes();
    let m = DMatrix::from_fn(sz.len(), sz.len(), |i, j| a.get(sz[i], sz[j]) as f64);
    let mut ev: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    let hand = ev.len() == 2 && (ev[0] + 24.0).abs() < 1e-9 && (ev[1] - 4.0).abs() < 1e-9;
    ok &= hand;
    parts.push(format!("(15,4) eigenvalues {ev:?}"));
    (ok, parts.join("; "))
}

fn f(x: f64, y: f64, a: f64) -> f64 {
    x * y * (x + y + 2.0 * a) / (x * x + y * y + a * (x + y))
}

fn c12_fmin() -> Verdict {
    let n = 100;
    let mut min = f64::INFINITY;
    for ia in 1..n {
        let a = 0.5 * ia as f64 / n as f64;
        for ix in 0..=n {
            let x = 0.5 + 0.5 * ix as f64 / n as f64;
            for iy in 0..=n {
                let y = (1.0 - a) + a * iy as f64 / n as f64;
                if y - x >= a - 1e-15 {
                    min = min.min(f(x, y, a));
                }
            }
        }
    }
    let rep = f_min_check(200).unwrap();
    let eq = (f(0.5, 0.75, 0.25) - 7.0 / 12.0).abs();
    let floor = 7.0 / 12.0 - 1e-9;
    (
        min >= floor && rep.min >= floor && rep.holds() && eq <= 1e-9,
        format!("independent grid min {min:.12}, library min {:.12}, |f(1/2,3/4,1/4) - 7/12| = {eq:.1e}", rep.min),
    )
}

fn c13_oracle() -> Verdict {
    let cfg = RunConfig::new(StrategyKind::Even, p(15, 4)).insertions(100_000).runs(5);
    let oracle = run_key_level(&cfg, Continuation::LargerHalf).unwrap().mean_fullness;
    let hist = run_monte_carlo(&cfg).unwrap().mean_fullness;
    let mut mismatches = 0;
    let mut cases = 0;
    for b in 3..=31usize {
        for r in 1..=3 * b {
            let s = Strategy::new(StrategyKind::Even, p(b, r), UnevenMode::Exact).unwrap();
            for k in 1..=b {
                let want = s.outcome(k).unwrap().sorted();
                for gap in 0..=k {
                    let mut got = key_level_batch(&s, k, gap, Continuation::LargerHalf).unwrap();
                    got.sort_unstable();
                    cases += 1;
                    mismatches += usize::from(got != want);
                }
            }
        }
    }
    (
        (oracle - hist).abs() < 0.01 && mismatches == 0,
        format!("key-level {oracle:.4} vs histogram {hist:.4}; {cases} single batches, {mismatches} mismatches"),
    )
}

fn sweep(kind: StrategyKind, lo: usize, hi: usize) -> Vec<SweepRow> {
    let mut sweep = SweepSpec::new(kind, 240, (lo..=hi).collect());
    sweep.total_insertions = 200_000;
    sweep.runs = 10;
    run_sweep(&sweep).unwrap()
}

fn c14_sweeps() -> Verdict {
    let t = Instant::now();
    let even_small = sweep(StrategyKind::Even, 1, 240);
    let deferred_small = sweep(StrategyKind::DeferredEven, 1, 240);
    let even_large = sweep(StrategyKind::Even, 240, 1200);
    let deferred_large = sweep(StrategyKind::DeferredEven, 240, 1200);
    let secs = t.elapsed().as_secs_f64();
    let at = |rows: &[SweepRow], r: usize| rows.iter().find(|x| x.batch == r).unwrap().mean;
    let even_at = |r: usize| if r <= 240 { at(&even_small, r) } else { at(&even_large, r) };

    let mut ok = secs < 1800.0;
    let mut parts = vec![format!("sweeps {secs:.0}s")];
    let dips: Vec<String> = (1..=10)
        .map(|m| 120 * m)
        .filter(|&r| (even_at(r) - 0.5).abs() > 0.01)
        .map(|r| format!("{r}:{:.3}", even_at(r)))
        .collect();
    ok &= dips.is_empty();
    parts.push(format!("even dips off 0.5 at {dips:?}"));
    let peaks: Vec<String> = (1..=5)
        .map(|m| 240 * m)
        .filter(|&r| at(&deferred_large, r) < 0.99)
        .map(|r| format!("{r}:{:.3}", at(&deferred_large, r)))
        .collect();
    ok &= peaks.is_empty();
    parts.push(format!("deferred peaks below 1 at {peaks:?}"));
    // segments drawn for i = 1..5, i.e. r in (24, 240]
    let mut worst = (0usize, 0.0f64);
    for row in deferred_small.iter().filter(|x| x.batch > 24) {
        let Some(want) = deferred_fill(240, row.batch) else { continue };
        let e = (row.mean - want).abs();
        if e > worst.1 {
            worst = (row.batch, e);
        }
    }
    ok &= worst.1 <= 0.01;
    parts.push(format!("deferred vs segments worst {:.4} at r={}", worst.1, worst.0));
    (ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 14] = [
        ("exact left-eigenvector identity", c1_left_identity),
        ("column coherence", c2_columns),
        ("spectral vs closed form at r=1", c3_unit_batch),
        ("unit-batch fullness by simulation", c4_unit_batch),
        ("half-fill dip", c5_half_dip),
        ("deferred-even closed form", c6_deferred),
        ("uneven regimes", c7_uneven),
        ("large-batch bound", c8_large_batch),
        ("bound dominance", c9_dominance),
        ("convergence of the expected recurrence", c10_convergence),
        ("Perron margin", c11_margin),
        ("f minimum", c12_fmin),
        ("oracle equivalence", c13_oracle),
        ("sweep reproduction", c14_sweeps),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name} ({:.1}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
