//! Named self-checks. `quick` covers the exact and numerical identities of
//! the even-split analysis; `full` adds the 200k-insertion Monte Carlo
//! comparisons.

use std::time::Instant;

use blocksplit::bounds::{
    deferred_closed_form, even_split_lower_bound, f_min_check, f_ratio, harmonic_difference,
    table_bound,
};
use blocksplit::simulate::{
    check_size_invariant, key_level_batch, run_expected_recurrence, run_key_level,
    run_monte_carlo, run_monte_carlo_detailed, run_single, Continuation, RecurrenceOptions,
    RunConfig,
};
use blocksplit::spectral::{
    intra_class_check, perron_margin, principal_eigenvector, spectral_projection, support_set,
    EigenSolution, RestrictedMatrix, TransitionMatrix,
};
use blocksplit::strategies::{even_split_outcome, Strategy};
use blocksplit::{SplitParams, StrategyKind, UnevenMode};
use rayon::prelude::*;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Level {
    #[default]
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Self::Quick),
            "full" => Ok(Self::Full),
            _ => Err(CliError::Param(format!("unknown verify level `{s}` (quick|full)"))),
        }
    }
}

pub type MatrixBuilder = fn(SplitParams) -> blocksplit::Result<TransitionMatrix>;

/// Injection points for negative controls.
#[derive(Debug, Clone, Copy)]
pub struct Hooks {
    pub build_matrix: MatrixBuilder,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { build_matrix: TransitionMatrix::build }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// `Ok(detail)` on success, `Err(detail)` naming what broke.
type Outcome = std::result::Result<String, String>;
type CheckFn = fn(&Hooks) -> Outcome;

const QUICK: &[(&str, CheckFn)] = &[
    ("left-eigenvector-identity", left_identity),
    ("column-coherence", column_coherence),
    ("metzler-structure", metzler_structure),
    ("principal-eigenvector", eigenvector_grid),
    ("unit-batch-closed-form", unit_batch_closed_form),
    ("intra-class-relation", intra_class),
    ("spectral-projection", projection),
    ("perron-margin", margin),
    ("bound-dominance", bound_dominance),
    ("f-minimum", f_minimum),
    ("deferred-distribution", deferred_distribution),
    ("recurrence-convergence", recurrence_convergence),
    ("single-batch-oracle", single_batch_oracle),
];

const FULL: &[(&str, CheckFn)] = &[
    ("recurrence-convergence-unit-batch", recurrence_convergence_unit),
    ("unit-batch-simulation", unit_batch_simulation),
    ("half-fill-dip", half_fill_dip),
    ("deferred-even-simulation", deferred_simulation),
    ("uneven-regimes", uneven_regimes),
    ("large-batch-bound", large_batch_bound),
    ("key-level-oracle", key_level_oracle),
    ("simulation-above-even-bound", simulation_above_bound),
];

pub fn check_names(level: Level) -> Vec<&'static str> {
    checks(level).map(|(n, _)| *n).collect()
}

fn checks(level: Level) -> impl Iterator<Item = &'static (&'static str, CheckFn)> {
    let extra: &[(&str, CheckFn)] = if level == Level::Full { FULL } else { &[] };
    QUICK.iter().chain(extra)
}

pub fn run_checks(level: Level, hooks: &Hooks) -> Vec<CheckResult> {
    checks(level)
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f(hooks) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
        })
        .collect()
}

pub fn report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for c in results {
        out.push_str(&format!(
            "{} {:<36} {:>7.2}s  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.seconds,
            c.detail
        ));
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", results.len(), failed));
    out
}

pub fn cmd_verify(level: Level) -> Result<()> {
    cmd_verify_with(level, &Hooks::default())
}

/// Prints the report; fails with the names of the failing checks.
pub fn cmd_verify_with(level: Level, hooks: &Hooks) -> Result<()> {
    let results = run_checks(level, hooks);
    print!("{}", report(&results));
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

fn params(b: usize, r: usize) -> SplitParams {
    SplitParams::new(b, r).expect("check parameters are valid")
}

/// Odd `B` in `[5, 255]`, every `r` in `[1, (B-1)/2]`.
fn odd_grid() -> Vec<(usize, usize)> {
    (5..=255usize)
        .step_by(2)
        .flat_map(|b| (1..=(b - 1) / 2).map(move |r| (b, r)))
        .collect()
}

fn tally(cases: usize, failures: Vec<String>) -> Outcome {
    match failures.first() {
        None => Ok(format!("{cases} cases")),
        Some(first) => Err(format!("{} of {cases} cases failed, first: {first}", failures.len())),
    }
}

fn grid_check<F>(grid: &[(usize, usize)], f: F) -> Outcome
where
    F: Fn(usize, usize) -> Option<String> + Sync,
{
    let failures: Vec<String> = grid.par_iter().filter_map(|&(b, r)| f(b, r)).collect();
    tally(grid.len(), failures)
}

fn restricted(hooks: &Hooks, p: SplitParams) -> blocksplit::Result<RestrictedMatrix> {
    let a = (hooks.build_matrix)(p)?;
    a.restrict(&support_set(p)?)
}

fn solve(hooks: &Hooks, p: SplitParams) -> blocksplit::Result<EigenSolution> {
    principal_eigenvector(&restricted(hooks, p)?, p.batch())
}

fn left_identity(hooks: &Hooks) -> Outcome {
    grid_check(&odd_grid(), |b, r| match (hooks.build_matrix)(params(b, r)) {
        Ok(a) => {
            let bad = a.left_identity_failures();
            (!bad.is_empty()).then(|| format!("B={b} r={r} columns {bad:?}"))
        }
        Err(e) => Some(format!("B={b} r={r}: {e}")),
    })
}

fn column_coherence(hooks: &Hooks) -> Outcome {
    grid_check(&odd_grid(), |b, r| {
        let p = params(b, r);
        let a = match (hooks.build_matrix)(p) {
            Ok(a) => a,
            Err(e) => return Some(format!("B={b} r={r}: {e}")),
        };
        let d = a.half();
        for k in a.sizes() {
            let out = match even_split_outcome(k, p) {
                Ok(o) => o,
                Err(e) => return Some(format!("B={b} r={r} k={k}: {e}")),
            };
            let mut delta = vec![0i64; b + 1 - d];
            delta[k - d] -= 1;
            for &s in out.sizes() {
                if s < d {
                    return Some(format!("B={b} r={r} k={k}: outcome size {s} below {d}"));
                }
                delta[s - d] += 1;
            }
            let want: Vec<i64> = delta.iter().map(|x| x * k as i64).collect();
            if a.column(k) != want {
                return Some(format!("B={b} r={r} column {k}"));
            }
        }
        None
    })
}

fn metzler_structure(hooks: &Hooks) -> Outcome {
    grid_check(&odd_grid(), |b, r| match (hooks.build_matrix)(params(b, r)) {
        Ok(a) => (!a.is_metzler()).then(|| format!("B={b} r={r}")),
        Err(e) => Some(format!("B={b} r={r}: {e}")),
    })
}

fn analysis_grid(blocks: &[usize]) -> Vec<(usize, usize)> {
    blocks
        .iter()
        .flat_map(|&b| (1..=(b - 1) / 2).map(move |r| (b, r)))
        .collect()
}

fn eigenvector_grid(hooks: &Hooks) -> Outcome {
    grid_check(&analysis_grid(&[15, 63, 127, 239]), |b, r| match solve(hooks, params(b, r)) {
        Ok(sol) => {
            let max_u = sol.u.iter().copied().fold(0.0, f64::max);
            if sol.u.iter().any(|&x| x <= 0.0) {
                Some(format!("B={b} r={r}: non-positive component"))
            } else if sol.residual > 1e-10 * max_u {
                Some(format!("B={b} r={r}: residual {:e}", sol.residual))
            } else if !(sol.predicted_fullness > 0.5 && sol.predicted_fullness <= 1.0) {
                Some(format!("B={b} r={r}: fullness {}", sol.predicted_fullness))
            } else {
                None
            }
        }
        Err(e) => Some(format!("B={b} r={r}: {e}")),
    })
}

fn unit_batch_closed_form(hooks: &Hooks) -> Outcome {
    let mut worst: f64 = 0.0;
    for b in [63usize, 127, 239] {
        let got = solve(hooks, params(b, 1)).map_err(|e| format!("B={b}: {e}"))?.predicted_fullness;
        let want = harmonic_difference(b.div_ceil(2)) * (b + 1) as f64 / b as f64;
        let err = (got - want).abs();
        if err > 1e-12 {
            return Err(format!("B={b}: {got} vs {want}"));
        }
        worst = worst.max(err);
        if b == 239 && (got - std::f64::consts::LN_2).abs() >= 0.01 {
            return Err(format!("B=239: {got} not within 0.01 of ln 2"));
        }
    }
    Ok(format!("max error {worst:.1e}"))
}

fn intra_class(hooks: &Hooks) -> Outcome {
    grid_check(&analysis_grid(&[15, 63, 127]), |b, r| match solve(hooks, params(b, r)) {
        Ok(sol) => {
            let rep = intra_class_check(&sol);
            (!rep.holds()).then(|| format!("B={b} r={r}: violations at {:?}", rep.violations))
        }
        Err(e) => Some(format!("B={b} r={r}: {e}")),
    })
}

fn projection(hooks: &Hooks) -> Outcome {
    let grid: Vec<(usize, usize)> = [2, 4, 10, 31].iter().map(|&r| (63, r)).collect();
    grid_check(&grid, |b, r| {
        let p = params(b, r);
        let run = || -> blocksplit::Result<Option<String>> {
            let a = restricted(hooks, p)?;
            let proj = spectral_projection(&principal_eigenvector(&a, r)?);
            let idem = proj.idempotence_error();
            let comm = proj.commutation_error(&a, r);
            Ok((idem >= 1e-12 || comm >= 1e-9)
                .then(|| format!("B={b} r={r}: P^2-P {idem:.1e}, PA-rP {comm:.1e}")))
        };
        run().unwrap_or_else(|e| Some(format!("B={b} r={r}: {e}")))
    })
}

fn margin(hooks: &Hooks) -> Outcome {
    let grid: Vec<(usize, usize)> = [15usize, 63, 127]
        .iter()
        .flat_map(|&b| [1, 2, 4, (b - 1) / 2].map(|r| (b, r)))
        .collect();
    grid_check(&grid, |b, r| {
        let m = match restricted(hooks, params(b, r)).and_then(|a| perron_margin(&a, r)) {
            Ok(m) => m,
            Err(e) => return Some(format!("B={b} r={r}: {e}")),
        };
        if !m.certifies() {
            return Some(format!(
                "B={b} r={r}: dominant {} subdominant {} gap {}",
                m.dominant(),
                m.subdominant,
                m.gap()
            ));
        }
        // A_S(15, 4) has eigenvalues {4, -24}; after the shift by B the
        // subdominant modulus is 9
        if (b, r) == (15, 4) && (m.subdominant - 9.0).abs() > 1e-6 {
            return Some(format!("B=15 r=4: subdominant {} instead of 9", m.subdominant));
        }
        None
    })
}

fn bound_dominance(hooks: &Hooks) -> Outcome {
    grid_check(&analysis_grid(&[63, 127, 239]), |b, r| {
        let pf = match solve(hooks, params(b, r)) {
            Ok(s) => s.predicted_fullness,
            Err(e) => return Some(format!("B={b} r={r}: {e}")),
        };
        let lower = even_split_lower_bound(b, r).ok()?;
        if pf < lower - 1e-9 {
            return Some(format!("B={b} r={r}: {pf} below even-split bound {lower}"));
        }
        let t = table_bound(b, r).ok()?;
        ((2..=4).contains(&t.row) && pf < t.fill)
            .then(|| format!("B={b} r={r}: {pf} below row {} bound {}", t.row, t.fill))
    })
}

fn f_minimum(_: &Hooks) -> Outcome {
    let rep = f_min_check(200).map_err(|e| e.to_string())?;
    let at_quarter = f_ratio(0.5, 0.75, 0.25);
    if !rep.holds() {
        return Err(format!(
            "min {} at {:?}, {} monotonicity violations",
            rep.min, rep.argmin, rep.monotone_violations
        ));
    }
    if (at_quarter - 7.0 / 12.0).abs() > 1e-9 {
        return Err(format!("f(1/2, 3/4, 1/4) = {at_quarter}"));
    }
    Ok(format!("min {:.12} over {} points", rep.min, rep.points))
}

fn deferred_distribution(_: &Hooks) -> Outcome {
    let failures: Vec<String> = (1..=64usize)
        .filter_map(|i| {
            // r = 2i sits at the top of (B/(2i), B/(2i-1)] for B = 2i(2i-1)
            let (b, r) = (2 * i * (2 * i - 1), 2 * i);
            let c = match deferred_closed_form(b, r) {
                Ok(c) => c,
                Err(e) => return Some(format!("i={i}: {e}")),
            };
            let total: f64 = c.distribution.iter().map(|(_, u)| u).sum();
            let fill: f64 = c
                .distribution
                .iter()
                .map(|&(j, u)| u * (j * r) as f64 / b as f64)
                .sum();
            if c.i != i || (total - 1.0).abs() > 1e-12 || (fill - c.fill).abs() > 1e-12 {
                Some(format!("i={i}: index {}, mass {total}, fill {fill} vs {}", c.i, c.fill))
            } else {
                None
            }
        })
        .collect();
    tally(64, failures)
}

fn convergence_error(hooks: &Hooks, b: usize, r: usize) -> std::result::Result<f64, String> {
    let p = params(b, r);
    let sol = solve(hooks, p).map_err(|e| e.to_string())?;
    let proj = spectral_projection(&sol);
    let d = sol.sizes[0];
    let mut start = vec![0.0; sol.sizes.len()];
    start[0] = 1.0 / d as f64;
    let limit = proj.apply(&start);
    let t = run_expected_recurrence(p, 100_000, RecurrenceOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(t.last()
        .normalized()
        .iter()
        .zip(&limit)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn convergence(hooks: &Hooks, rs: &[usize]) -> Outcome {
    let mut details = Vec::new();
    let mut failed = false;
    for &r in rs {
        let err = convergence_error(hooks, 63, r).map_err(|e| format!("r={r}: {e}"))?;
        failed |= err > 1e-6;
        details.push(format!("r={r}: {err:.1e}"));
    }
    let detail = format!("B=63, m=1e5, {}", details.join(", "));
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn recurrence_convergence(hooks: &Hooks) -> Outcome {
    convergence(hooks, &[2, 4, 10])
}

fn recurrence_convergence_unit(hooks: &Hooks) -> Outcome {
    convergence(hooks, &[1])
}

fn single_batch_oracle(_: &Hooks) -> Outcome {
    let failures: Vec<String> = (3..=31usize)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut bad = Vec::new();
            for r in 1..=3 * b {
                let p = params(b, r);
                for kind in [StrategyKind::Even, StrategyKind::DeferredEven] {
                    let s = Strategy::new(kind, p, UnevenMode::Exact).expect("always in range");
                    let lo = usize::from(kind == StrategyKind::Even);
                    for k in lo..=b {
                        let want = if k == 0 { s.first_batch() } else { s.outcome(k).expect("valid size") };
                        let want = want.sorted();
                        for gap in [0, k / 2, k] {
                            match key_level_batch(&s, k, gap, Continuation::LargerHalf) {
                                Ok(mut lit) => {
                                    lit.sort_unstable();
                                    if lit != want {
                                        bad.push(format!("{kind} B={b} r={r} k={k} gap={gap}"));
                                    }
                                }
                                Err(e) => bad.push(format!("{kind} B={b} r={r} k={k}: {e}")),
                            }
                        }
                    }
                }
            }
            bad
        })
        .collect();
    tally(29, failures)
}

const SIM_INSERTIONS: u64 = 200_000;
const SIM_RUNS: usize = 10;

fn sim_config(kind: StrategyKind, b: usize, r: usize) -> RunConfig {
    RunConfig::new(kind, params(b, r)).insertions(SIM_INSERTIONS).runs(SIM_RUNS)
}

fn mean_fullness(kind: StrategyKind, b: usize, r: usize) -> std::result::Result<f64, String> {
    run_monte_carlo(&sim_config(kind, b, r))
        .map(|s| s.mean_fullness)
        .map_err(|e| format!("{kind} B={b} r={r}: {e}"))
}

fn compare(items: Vec<(String, f64, f64)>, tol: f64) -> Outcome {
    let detail = items
        .iter()
        .map(|(l, got, want)| format!("{l}: {got:.4} vs {want:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    if items.iter().all(|(_, got, want)| (got - want).abs() <= tol) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit_batch_simulation(hooks: &Hooks) -> Outcome {
    let want = solve(hooks, params(239, 1)).map_err(|e| e.to_string())?.predicted_fullness;
    let got = mean_fullness(StrategyKind::Even, 239, 1)?;
    compare(vec![("even B=239 r=1".into(), got, want)], 0.01)
}

fn half_fill_dip(_: &Hooks) -> Outcome {
    let mut items = Vec::new();
    for kind in [StrategyKind::Even, StrategyKind::DeferredEven] {
        items.push((format!("{kind} B=240 r=120"), mean_fullness(kind, 240, 120)?, 0.5));
    }
    compare(items, 0.01)
}

fn deferred_simulation(_: &Hooks) -> Outcome {
    let mut items = Vec::new();
    for r in [65usize, 80, 121, 180, 240] {
        let want = deferred_closed_form(240, r).map_err(|e| e.to_string())?.fill;
        items.push((format!("r={r}"), mean_fullness(StrategyKind::DeferredEven, 240, r)?, want));
    }
    let fill = compare(items, 0.01);
    let runs = run_monte_carlo_detailed(&sim_config(StrategyKind::DeferredEven, 240, 80))
        .map_err(|e| e.to_string())?;
    let c = deferred_closed_form(240, 80).map_err(|e| e.to_string())?;
    let mut hist_items = Vec::new();
    for &(j, u) in &c.distribution {
        let frac = runs
            .iter()
            .map(|res| res.histogram.count(j * 80) as f64 / res.histogram.block_count() as f64)
            .sum::<f64>()
            / runs.len() as f64;
        hist_items.push((format!("u_{j}"), frac, u));
    }
    let hist = compare(hist_items, 0.02);
    match (fill, hist) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn uneven_regimes(_: &Hooks) -> Outcome {
    let mut items = Vec::new();
    for (kind, r, want) in [
        (StrategyKind::UnevenRegime1, 100usize, 150.0),
        (StrategyKind::UnevenRegime2, 120, 1200.0 / 9.0),
    ] {
        let cfg = sim_config(kind, 240, r);
        let strategy = cfg.strategy().map_err(|e| e.to_string())?;
        let mut total = 0.0;
        for run in 0..SIM_RUNS {
            let res = run_single(&cfg, run, |h| check_size_invariant(&strategy, h))
                .map_err(|e| format!("{kind} r={r} run {run}: {e}"))?;
            total += res.histogram.mean_block_size().map_err(|e| e.to_string())?;
        }
        let got = total / SIM_RUNS as f64;
        items.push((format!("{kind} r={r} mean block size"), got, want));
    }
    let detail = items
        .iter()
        .map(|(l, g, w)| format!("{l}: {g:.2} vs {w:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    if items.iter().all(|(_, g, w)| (g - w).abs() <= 0.01 * w) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn large_batch_bound(_: &Hooks) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in [300usize, 500, 1000] {
        let bound = table_bound(240, r).map_err(|e| e.to_string())?.fill - 1.0 / 240.0;
        let got = mean_fullness(StrategyKind::DeferredEven, 240, r)?;
        ok &= got >= bound;
        parts.push(format!("r={r}: {got:.4} >= {bound:.4}"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn key_level_oracle(_: &Hooks) -> Outcome {
    let cfg = RunConfig::new(StrategyKind::Even, params(15, 4)).insertions(100_000).runs(5);
    let oracle = run_key_level(&cfg, Continuation::LargerHalf).map_err(|e| e.to_string())?;
    let hist = run_monte_carlo(&cfg).map_err(|e| e.to_string())?;
    compare(vec![("B=15 r=4".into(), oracle.mean_fullness, hist.mean_fullness)], 0.01)
}

fn simulation_above_bound(_: &Hooks) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in [1usize, 10, 50, 90] {
        let bound = even_split_lower_bound(239, r).map_err(|e| e.to_string())?;
        let got = mean_fullness(StrategyKind::Even, 239, r)?;
        ok &= got >= bound - 0.01;
        parts.push(format!("r={r}: {got:.4} vs {bound:.4}"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}
