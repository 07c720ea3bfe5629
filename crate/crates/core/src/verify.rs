//! The acceptance suite: end-to-end checks holding the exact solver, the
//! simulator, and the limit-law samplers against each other and against
//! the closed-form constants.
//!
//! The checks come in two sizes: `Quick` bounds runtime to about a minute
//! for CI smoke runs, `Full` runs the complete battery (a few minutes).
//! Every tolerance is pinned here. Independent oracles used by the checks
//! (the mixed-strategy grid search and the brute-force recursion) live in
//! this module and never call into the solver path they are checking.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::engine::{payoff, Move};
use crate::limit::{self, LimitRep};
use crate::montecarlo::{self, ExperimentConfig, SummaryStats};
use crate::solver::{
    compute_value_table, greedy_chain_expectation, optimal_r_mix, CountsState, ValueTable,
};
use crate::stats::Moments;
use crate::strategies::greedy_r_mix;

/// Result of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, details: String) -> CheckOutcome {
        CheckOutcome {
            name,
            passed,
            details,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Every knob and tolerance of the suite, pinned per level.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub table_n: u64,
    pub curve_ns: Vec<u64>,
    pub chain_ns: Vec<u64>,
    pub mix_total_max: u64,
    pub value_chain_tol: f64,
    pub mix_tol: f64,
    pub bf_total_max: u64,
    pub bf_grid_step: f64,
    pub bf_tol: f64,
    pub exact_tol: f64,
    pub limit_draws: usize,
    pub ks_pair_tol: f64,
    /// Gate in standard errors for statistical equalities.
    pub sigma_gate: f64,
    pub mc_n: u64,
    pub mc_games: u64,
    pub mc_mean_tol: f64,
    pub mc_var_tol: f64,
    pub mc_win_tol: f64,
    pub mc_ks_tol: f64,
    pub espiro_n: u64,
    pub espiro_games: u64,
    pub erock_n: u64,
    pub erock_games: u64,
    pub erock_atom_tol: f64,
    pub erock_var_lo: f64,
    pub erock_var_hi: f64,
    pub erock_ks_tol: f64,
    pub l1_ns: [u64; 3],
    pub l1_games: u64,
    pub l1_ratio_max: f64,
    pub t1_tol: f64,
    pub t1_oracle_draws: usize,
}

impl SuiteParams {
    pub fn full() -> SuiteParams {
        SuiteParams {
            table_n: 200,
            curve_ns: vec![10, 20, 50, 100, 200],
            chain_ns: (1..=50).chain([100, 200]).collect(),
            mix_total_max: 30,
            value_chain_tol: 1e-9,
            mix_tol: 1e-9,
            bf_total_max: 6,
            bf_grid_step: 1e-3,
            bf_tol: 5e-3,
            exact_tol: 1e-12,
            limit_draws: 1_000_000,
            ks_pair_tol: 0.003,
            sigma_gate: 4.0,
            mc_n: 2500,
            mc_games: 100_000,
            mc_mean_tol: 0.05,
            mc_var_tol: 0.20,
            mc_win_tol: 0.006,
            mc_ks_tol: 0.02,
            espiro_n: 100,
            espiro_games: 100_000,
            erock_n: 10_000,
            erock_games: 100_000,
            erock_atom_tol: 0.02,
            erock_var_lo: 0.348,
            erock_var_hi: 5.008,
            erock_ks_tol: 0.02,
            l1_ns: [100, 1000, 10_000],
            l1_games: 10_000,
            l1_ratio_max: 3.0,
            t1_tol: 0.1,
            t1_oracle_draws: 1_000_000,
        }
    }

    /// CI-friendly smoke sizes: same checks, smaller samples, tolerances
    /// widened with the extra sampling noise.
    pub fn quick() -> SuiteParams {
        SuiteParams {
            table_n: 100,
            curve_ns: vec![10, 20, 50, 100],
            chain_ns: (1..=30).chain([100]).collect(),
            limit_draws: 100_000,
            ks_pair_tol: 0.0095,
            mc_n: 400,
            mc_games: 20_000,
            mc_mean_tol: 0.08,
            mc_var_tol: 0.30,
            mc_win_tol: 0.012,
            mc_ks_tol: 0.035,
            espiro_games: 20_000,
            erock_n: 2500,
            erock_games: 20_000,
            erock_atom_tol: 0.03,
            erock_ks_tol: 0.035,
            l1_games: 2000,
            t1_tol: 0.2,
            t1_oracle_draws: 200_000,
            ..SuiteParams::full()
        }
    }

    pub fn for_level(level: Level) -> SuiteParams {
        match level {
            Level::Quick => SuiteParams::quick(),
            Level::Full => SuiteParams::full(),
        }
    }
}

fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h = DefaultHasher::new();
    master.hash(&mut h);
    tag.hash(&mut h);
    h.finish()
}

/// All data the criteria need, computed once and shared.
pub struct Artifacts {
    pub table: ValueTable,
    /// `(n, V(n,n,n), greedy chain expectation)` for the comparison set.
    pub chain_pairs: Vec<(u64, f64, f64)>,
    /// Sorted draws per representation, indexed like [`LimitRep::EQUIVALENT`].
    pub rep_draws_sorted: Vec<Vec<f64>>,
    pub rep_moments: Vec<Moments>,
    pub rep_p_negative: Vec<f64>,
    pub erock_draws_sorted: Vec<f64>,
    pub greedy_mc: SummaryStats,
    pub rock_mc: SummaryStats,
    pub erock_mc: SummaryStats,
    pub espiro_mc: SummaryStats,
    /// Greedy-vs-greedy diagnostic runs at the three residual scales; the
    /// largest doubles as the T1-scaling run.
    pub l1_runs: Vec<SummaryStats>,
    /// `3 * mean(max_i V_i)` estimated from limit-law draws.
    pub t1_oracle: f64,
}

impl Artifacts {
    pub fn compute(p: &SuiteParams, seed: u64) -> Artifacts {
        let table = compute_value_table(p.table_n).expect("value table");
        let chain_pairs = p
            .chain_ns
            .iter()
            .map(|&n| {
                let v = table
                    .value(CountsState::new(n, n, n))
                    .expect("chain n within table");
                (n, v, greedy_chain_expectation(n))
            })
            .collect();

        let mut rep_draws_sorted = Vec::new();
        let mut rep_moments = Vec::new();
        let mut rep_p_negative = Vec::new();
        for rep in LimitRep::EQUIVALENT {
            let mut draws = limit::sample_batch(rep, p.limit_draws, derive_seed(seed, rep.name()));
            let mut m = Moments::new();
            m.extend(draws.iter().copied());
            let neg = draws.iter().filter(|&&x| x < 0.0).count();
            rep_p_negative.push(neg as f64 / draws.len() as f64);
            draws.sort_unstable_by(|a, b| a.total_cmp(b));
            rep_draws_sorted.push(draws);
            rep_moments.push(m);
        }
        let mut erock_draws_sorted =
            limit::sample_batch(LimitRep::Erock, p.limit_draws, derive_seed(seed, "erock"));
        erock_draws_sorted.sort_unstable_by(|a, b| a.total_cmp(b));

        let experiment = |n, games, r: &str, nn: &str, tag: &str, diag| {
            montecarlo::run_experiment(&ExperimentConfig {
                n,
                games,
                strategy_r: r.into(),
                strategy_n: nn.into(),
                master_seed: derive_seed(seed, tag),
                record_diagnostics: diag,
            })
            .expect("experiment")
        };

        let greedy_mc = experiment(
            p.mc_n,
            p.mc_games,
            "greedy-r",
            "greedy-n",
            "mc-greedy",
            true,
        );
        let rock_mc = experiment(
            p.mc_n,
            p.mc_games,
            "greedy-r",
            "rock-then-greedy-n",
            "mc-rock",
            true,
        );
        let erock_mc = experiment(
            p.erock_n,
            p.erock_games,
            "greedy-r",
            "rock-then-greedy-n",
            "mc-erock",
            true,
        );
        let espiro_mc = experiment(
            p.espiro_n,
            p.espiro_games,
            "cyclic-r",
            "greedy-n",
            "mc-espiro",
            false,
        );
        let l1_runs = p
            .l1_ns
            .iter()
            .map(|&n| {
                experiment(
                    n,
                    p.l1_games,
                    "greedy-r",
                    "greedy-n",
                    &format!("mc-l1-{n}"),
                    true,
                )
            })
            .collect();

        let mut oracle = Moments::new();
        oracle.extend(limit::sample_max_v_batch(
            p.t1_oracle_draws,
            derive_seed(seed, "t1-oracle"),
        ));
        let t1_oracle = 3.0 * oracle.mean();

        Artifacts {
            table,
            chain_pairs,
            rep_draws_sorted,
            rep_moments,
            rep_p_negative,
            erock_draws_sorted,
            greedy_mc,
            rock_mc,
            erock_mc,
            espiro_mc,
            l1_runs,
            t1_oracle,
        }
    }
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Minimax value by exhaustive search over a simplex grid of row mixes
/// (the minimizer), best-responded by the columns. Approximates the value
/// from above within the grid resolution.
pub fn grid_minimax(payoffs: &[[f64; 3]], step: f64) -> f64 {
    let steps = (1.0 / step).round() as usize;
    let col_max = |x: &[f64]| -> f64 {
        (0..3)
            .map(|j| {
                payoffs
                    .iter()
                    .zip(x)
                    .map(|(row, &w)| w * row[j])
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    match payoffs.len() {
        1 => payoffs[0].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        2 => (0..=steps)
            .map(|i| {
                let x0 = i as f64 * step;
                col_max(&[x0, 1.0 - x0])
            })
            .fold(f64::INFINITY, f64::min),
        _ => (0..=steps)
            .into_par_iter()
            .map(|i| {
                let x0 = i as f64 * step;
                let mut best = f64::INFINITY;
                for j in 0..=(steps - i) {
                    let x1 = j as f64 * step;
                    best = best.min(col_max(&[x0, x1, 1.0 - x0 - x1]));
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min),
    }
}

/// Backward recursion over states with total count at most `max_total`,
/// valuing every stage by [`grid_minimax`]. Completely independent of the
/// matrix-game solver and the DP sweep.
pub fn brute_force_values(max_total: u64, step: f64) -> HashMap<CountsState, f64> {
    let mut values: HashMap<CountsState, f64> = HashMap::new();
    values.insert(CountsState::new(0, 0, 0), 0.0);
    for total in 1..=max_total {
        let mut layer = Vec::new();
        for a in 0..=total {
            for b in 0..=(total - a) {
                layer.push(CountsState::new(a, b, total - a - b));
            }
        }
        let solved: Vec<(CountsState, f64)> = layer
            .par_iter()
            .map(|&s| {
                let mut payoffs = Vec::new();
                for mv in Move::ALL {
                    if let Some(child) = s.without(mv) {
                        let v = values[&child];
                        payoffs.push([
                            payoff(mv, Move::Rock) as f64 + v,
                            payoff(mv, Move::Paper) as f64 + v,
                            payoff(mv, Move::Scissors) as f64 + v,
                        ]);
                    }
                }
                (s, grid_minimax(&payoffs, step))
            })
            .collect();
        values.extend(solved);
    }
    values
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

pub fn exact_value_curve(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let curve: Vec<(u64, f64)> = p
        .curve_ns
        .iter()
        .map(|&n| {
            let v = a.table.value(CountsState::new(n, n, n)).unwrap();
            (n, v / (n as f64).sqrt())
        })
        .collect();
    let v100 = a.table.value(CountsState::new(100, 100, 100)).unwrap() / 10.0;
    let in_window = (1.44..=1.48).contains(&v100);
    let increasing = curve.windows(2).all(|w| w[1].1 > w[0].1);
    let cap = limit::constants().mean + 0.01;
    let bounded = curve.iter().all(|&(_, c)| c <= cap);
    // the cyclic defector's 4/3 is beaten strictly from n = 2 on
    let above_cyclic =
        (2..=p.table_n).all(|n| a.table.value(CountsState::new(n, n, n)).unwrap() > 4.0 / 3.0);
    let seq = curve
        .iter()
        .map(|(n, c)| format!("{n}:{c:.6}"))
        .collect::<Vec<_>>()
        .join(" ");
    CheckOutcome::new(
        "exact_value_curve",
        in_window && increasing && bounded && above_cyclic,
        format!(
            "V(100)/10={v100:.6} in [1.44,1.48]; scaled curve {seq}; cap {cap:.6}; \
             V > 4/3 for 2 <= n <= {}: {above_cyclic}",
            p.table_n
        ),
    )
}

pub fn oracle_equivalence(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let mut max_value_dev: f64 = 0.0;
    for &(_, v, chain) in &a.chain_pairs {
        max_value_dev = max_value_dev.max((v - chain).abs());
    }
    let mut max_mix_dev: f64 = 0.0;
    let mut states = 0u64;
    for total in 1..=p.mix_total_max {
        for aa in 0..=total {
            for bb in 0..=(total - aa) {
                let s = CountsState::new(aa, bb, total - aa - bb);
                let solved = optimal_r_mix(s, &a.table).expect("stage solve").probs();
                let greedy = greedy_r_mix(s.0).expect("nonempty").probs();
                for i in 0..3 {
                    max_mix_dev = max_mix_dev.max((solved[i] - greedy[i]).abs());
                }
                states += 1;
            }
        }
    }
    CheckOutcome::new(
        "oracle_equivalence",
        max_value_dev <= p.value_chain_tol && max_mix_dev <= p.mix_tol,
        format!(
            "max |V - chain| = {max_value_dev:.3e} over {} n's (tol {:.0e}); \
             max mix dev = {max_mix_dev:.3e} over {states} states (tol {:.0e})",
            a.chain_pairs.len(),
            p.value_chain_tol,
            p.mix_tol
        ),
    )
}

pub fn small_state_brute_force(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let oracle = brute_force_values(p.bf_total_max, p.bf_grid_step);
    let mut max_dev: f64 = 0.0;
    for (&s, &bf) in &oracle {
        let dp = a.table.value(s).unwrap();
        max_dev = max_dev.max((dp - bf).abs());
    }
    let exact = [
        (CountsState::new(0, 0, 1), 1.0),
        (CountsState::new(1, 1, 0), 4.0 / 3.0),
        (CountsState::new(1, 1, 1), 4.0 / 3.0),
    ];
    let mut max_exact_dev: f64 = 0.0;
    for (s, want) in exact {
        max_exact_dev = max_exact_dev.max((a.table.value(s).unwrap() - want).abs());
    }
    CheckOutcome::new(
        "small_state_brute_force",
        max_dev <= p.bf_tol && max_exact_dev <= p.exact_tol,
        format!(
            "max |DP - grid| = {max_dev:.2e} over {} states (tol {:.0e}); \
             pinned values dev = {max_exact_dev:.2e} (tol {:.0e})",
            oracle.len(),
            p.bf_tol,
            p.exact_tol
        ),
    )
}

pub fn limit_law_constants(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let c = limit::constants();
    let gate = p.sigma_gate;
    let mut passed = true;
    // worst standardized deviation per target across the representations
    let mut worst = [("mean", 0.0f64), ("var", 0.0), ("winprob", 0.0)];
    for (k, _rep) in LimitRep::EQUIVALENT.into_iter().enumerate() {
        let m = &a.rep_moments[k];
        let p_neg = a.rep_p_negative[k];
        let se_p = (p_neg * (1.0 - p_neg) / m.count() as f64).sqrt();
        let zs = [
            (m.mean() - c.mean).abs() / m.std_error(),
            (m.variance() - c.variance).abs() / m.variance_std_error(),
            (p_neg - c.win_prob).abs() / se_p,
        ];
        for (slot, z) in worst.iter_mut().zip(zs) {
            slot.1 = slot.1.max(z);
            if z > gate {
                passed = false;
            }
        }
    }
    let mut max_ks: f64 = 0.0;
    for i in 0..a.rep_draws_sorted.len() {
        for j in i + 1..a.rep_draws_sorted.len() {
            let d = montecarlo::ks_distance(&a.rep_draws_sorted[i], &a.rep_draws_sorted[j])
                .expect("nonempty");
            max_ks = max_ks.max(d);
        }
    }
    if max_ks > p.ks_pair_tol {
        passed = false;
    }
    let zs = worst
        .iter()
        .map(|(label, z)| format!("{label} z={z:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    CheckOutcome::new(
        "limit_law_constants",
        passed,
        format!(
            "worst over reps: {zs} (gate {gate}); pairwise KS max = {max_ks:.4} \
             (tol {}) over {} draws/rep",
            p.ks_pair_tol, p.limit_draws
        ),
    )
}

pub fn greedy_convergence(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let c = limit::constants();
    let stats = &a.greedy_mc;
    let n = p.mc_n as f64;
    let scaled_mean = stats.mean() / n.sqrt();
    let scaled_var = stats.variance() / n;
    let p_win = stats.p_r_wins();
    let rep_a = &a.rep_draws_sorted[1]; // LimitRep::A
    let ks = montecarlo::ks_distance(&stats.scaled_scores_sorted(), rep_a).expect("nonempty");
    let ok_mean = (scaled_mean - c.mean).abs() <= p.mc_mean_tol;
    let ok_var = (scaled_var - c.variance).abs() <= p.mc_var_tol;
    let ok_win = (p_win - c.win_prob).abs() <= p.mc_win_tol;
    let ok_ks = ks <= p.mc_ks_tol;
    CheckOutcome::new(
        "greedy_convergence",
        ok_mean && ok_var && ok_win && ok_ks,
        format!(
            "n={}: mean/sqrt(n)={scaled_mean:.4} (want {:.4}+-{}), var/n={scaled_var:.4} \
             (want {:.4}+-{}), P(R wins)={p_win:.4} (want {:.4}+-{}), KS={ks:.4} (tol {})",
            p.mc_n,
            c.mean,
            p.mc_mean_tol,
            c.variance,
            p.mc_var_tol,
            c.win_prob,
            p.mc_win_tol,
            p.mc_ks_tol
        ),
    )
}

pub fn phase_identity(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, stats) in [("greedy", &a.greedy_mc), ("rock-then-greedy", &a.rock_mc)] {
        let gap = montecarlo::esn_consistency(stats, p.mc_n).expect("diagnostics on");
        let se = stats.diagnostics.as_ref().unwrap().esn_gap_std_error();
        if gap.abs() > p.sigma_gate * se {
            passed = false;
        }
        parts.push(format!("{label}: gap={gap:.4} se={se:.4}"));
    }
    CheckOutcome::new(
        "phase_identity",
        passed,
        format!("{} (gate {} se)", parts.join("; "), p.sigma_gate),
    )
}

pub fn cyclic_example(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let stats = &a.espiro_mc;
    let dev = (stats.mean() - 4.0 / 3.0).abs();
    let se = stats.std_error();
    CheckOutcome::new(
        "cyclic_example",
        dev <= p.sigma_gate * se,
        format!(
            "n={}: mean={:.5} vs 4/3 (dev {dev:.5}, {} se = {:.5})",
            p.espiro_n,
            stats.mean(),
            p.sigma_gate,
            p.sigma_gate * se
        ),
    )
}

pub fn rock_opening_example(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let c = limit::constants();
    let stats = &a.erock_mc;
    let n = p.erock_n as f64;
    let threshold = n.powf(0.4);
    let below = stats
        .final_scores
        .iter()
        .filter(|&&s| (s as f64) <= threshold)
        .count();
    let p_atom = below as f64 / stats.count() as f64;
    // the exact limit sampler evaluated at the same (scaled) threshold
    let cutoff = threshold / n.sqrt();
    let sampler_below = a.erock_draws_sorted.partition_point(|&x| x <= cutoff);
    let p_sampler = sampler_below as f64 / a.erock_draws_sorted.len() as f64;
    let scaled_mean = stats.mean() / n.sqrt();
    let scaled_var = stats.variance() / n;
    let ok_atom = (p_atom - 1.0 / 3.0).abs() <= p.erock_atom_tol;
    let ok_mean = (scaled_mean - c.mean).abs() <= p.mc_mean_tol;
    let ok_var = scaled_var >= p.erock_var_lo && scaled_var <= p.erock_var_hi;
    CheckOutcome::new(
        "rock_opening_example",
        ok_atom && ok_mean && ok_var,
        format!(
            "n={}: P(S<=n^0.4)={p_atom:.4} vs 1/3 (tol {}; exact limit law itself gives \
             {p_sampler:.4} at this threshold), mean/sqrt(n)={scaled_mean:.4} \
             (want {:.4}+-{}), var/n={scaled_var:.4} in [{}, {}]",
            p.erock_n, p.erock_atom_tol, c.mean, p.mc_mean_tol, p.erock_var_lo, p.erock_var_hi
        ),
    )
}

/// Companion invariant to [`rock_opening_example`]: above the atom
/// threshold, the scaled simulated scores and the exact sampler draws must
/// agree as distributions.
pub fn erock_positive_part_agreement(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let n = p.erock_n as f64;
    let cutoff = n.powf(0.4) / n.sqrt();
    let sim: Vec<f64> = a
        .erock_mc
        .scaled_scores_sorted()
        .into_iter()
        .filter(|&x| x > cutoff)
        .collect();
    let sampler: Vec<f64> = a
        .erock_draws_sorted
        .iter()
        .copied()
        .filter(|&x| x > cutoff)
        .collect();
    let ks = montecarlo::ks_distance(&sim, &sampler).expect("positive parts nonempty");
    CheckOutcome::new(
        "erock_positive_part",
        ks <= p.erock_ks_tol,
        format!(
            "KS of S_n/sqrt(n) vs exact draws above cutoff {cutoff:.3}: {ks:.4} (tol {})",
            p.erock_ks_tol
        ),
    )
}

pub fn l1_residual_scaling(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let scaled: Vec<(u64, f64)> = a
        .l1_runs
        .iter()
        .map(|stats| {
            let n = stats.config.n;
            let r = stats.diagnostics.as_ref().unwrap().mean_abs_l1_residual()
                / (n as f64).powf(1.0 / 3.0);
            (n, r)
        })
        .collect();
    let lo = scaled.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let hi = scaled
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = hi / lo;
    let seq = scaled
        .iter()
        .map(|(n, r)| format!("{n}:{r:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    CheckOutcome::new(
        "l1_residual_scaling",
        ratio <= p.l1_ratio_max,
        format!(
            "mean|residual|/n^(1/3) at {seq}; spread ratio {ratio:.3} (max {})",
            p.l1_ratio_max
        ),
    )
}

pub fn t1_scaling_oracle(a: &Artifacts, p: &SuiteParams) -> CheckOutcome {
    let stats = a.l1_runs.last().expect("at least one diagnostic run");
    let measured = montecarlo::t1_scaling(stats, stats.config.n).expect("diagnostics on");
    let dev = (measured - a.t1_oracle).abs();
    CheckOutcome::new(
        "t1_scaling_oracle",
        dev <= p.t1_tol,
        format!(
            "n={}: mean(3n-T1)/sqrt(n)={measured:.4} vs oracle {:.4} (dev {dev:.4}, tol {})",
            stats.config.n, a.t1_oracle, p.t1_tol
        ),
    )
}

/// Every criterion in order, plus the positive-part agreement invariant.
pub fn all_criteria(a: &Artifacts, p: &SuiteParams) -> Vec<CheckOutcome> {
    vec![
        exact_value_curve(a, p),
        oracle_equivalence(a, p),
        small_state_brute_force(a, p),
        limit_law_constants(a, p),
        greedy_convergence(a, p),
        phase_identity(a, p),
        cyclic_example(a, p),
        rock_opening_example(a, p),
        l1_residual_scaling(a, p),
        t1_scaling_oracle(a, p),
        erock_positive_part_agreement(a, p),
    ]
}

/// Computes the artifacts and runs the whole suite.
pub fn run_suite(level: Level, seed: u64) -> Vec<CheckOutcome> {
    let params = SuiteParams::for_level(level);
    let artifacts = Artifacts::compute(&params, seed);
    all_criteria(&artifacts, &params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_minimax_on_known_games() {
        // fair RPS
        let rps = [[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]];
        assert!(grid_minimax(&rps, 1e-3).abs() < 3e-3);
        // the worked two-row game; fixes the solver example's 4/3 by search
        let g = [[1.0, 2.0, 0.0], [0.0, 1.0, 2.0]];
        assert!((grid_minimax(&g, 1e-3) - 4.0 / 3.0).abs() < 3e-3);
        // forced row
        assert_eq!(grid_minimax(&[[0.0, 1.0, -1.0]], 1e-3), 1.0);
    }

    #[test]
    fn brute_force_reproduces_hand_values() {
        let bf = brute_force_values(3, 1e-3);
        assert!((bf[&CountsState::new(0, 0, 1)] - 1.0).abs() < 3e-3);
        assert!((bf[&CountsState::new(1, 1, 0)] - 4.0 / 3.0).abs() < 3e-3);
        assert!((bf[&CountsState::new(1, 1, 1)] - 4.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn derive_seed_is_stable_and_tag_sensitive() {
        assert_eq!(derive_seed(1, "x"), derive_seed(1, "x"));
        assert_ne!(derive_seed(1, "x"), derive_seed(1, "y"));
        assert_ne!(derive_seed(1, "x"), derive_seed(2, "x"));
    }
}
