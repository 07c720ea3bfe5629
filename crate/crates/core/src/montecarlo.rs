//! Batch experiment runner: many independent games of one strategy pair,
//! with score statistics and the stopping-time diagnostics needed for the
//! asymptotic checks.
//!
//! Reproducibility: every game draws from its own ChaCha substream keyed by
//! the master seed and the game index, and per-chunk partial accumulators
//! are merged in fixed chunk order, so results are bit-identical for a
//! given config regardless of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, Game};
use crate::stats::Moments;
use crate::strategies::{strategy_by_name, Strategy};

#[derive(Debug, Error)]
pub enum McError {
    #[error("unknown strategy name `{0}`")]
    UnknownStrategy(String),
    #[error("diagnostics were not recorded for this experiment")]
    DiagnosticsMissing,
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One batch: `games` independent games of `strategy_r` vs `strategy_n` at
/// restriction parameter `n`.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub n: u64,
    pub games: u64,
    pub strategy_r: String,
    pub strategy_n: String,
    pub master_seed: u64,
    pub record_diagnostics: bool,
}

/// Smallest `m` with `m^3 >= n^2`, i.e. `ceil(n^(2/3))`, in exact integer
/// arithmetic.
fn ceil_pow_two_thirds(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let nn = (n as u128).pow(2);
    let mut m = (n as f64).powf(2.0 / 3.0).ceil() as u64;
    while (m as u128).pow(3) < nn {
        m += 1;
    }
    while m > 0 && ((m - 1) as u128).pow(3) >= nn {
        m -= 1;
    }
    m
}

/// The deterministic diagnostic reference time `T0 = 3n - 3 ceil(n^(2/3))`.
pub fn reference_time(n: u64) -> u64 {
    (3 * n).saturating_sub(3 * ceil_pow_two_thirds(n))
}

/// Per-game diagnostics measured at the reference time `T0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiagnosticRecord {
    pub final_score: i64,
    pub t1: u64,
    pub t2: u64,
    /// Score at round `T0`.
    pub s_t0: i64,
    /// Centered move counts at `T0`: `x[i] = N_{T0,i} - T0/3`. Sums to zero
    /// exactly.
    pub x: [i64; 3],
    pub x_max: i64,
    /// `S_n - S(T0) - max(X1+2X2, X2+2X3, X3+2X1)`.
    pub l1_residual: i64,
    /// Set when the first quota was already exhausted by `T0`; the fields
    /// above still reflect the realized counts.
    pub t1_before_t0: bool,
}

/// Diagnostic aggregates kept alongside the per-game records.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticsSummary {
    pub t0: u64,
    pub records: Vec<DiagnosticRecord>,
    esn: Moments,
    abs_l1: Moments,
}

impl DiagnosticsSummary {
    /// Mean of the per-game gap `S_n - [(T2-T1)/3 + (3n-T2)]`.
    pub fn esn_gap(&self) -> f64 {
        self.esn.mean()
    }

    /// Standard error of [`DiagnosticsSummary::esn_gap`]; the per-game gap
    /// couples score and stopping times, so this is the combined SE.
    pub fn esn_gap_std_error(&self) -> f64 {
        self.esn.std_error()
    }

    pub fn mean_abs_l1_residual(&self) -> f64 {
        self.abs_l1.mean()
    }
}

/// Aggregate results of one experiment.
#[derive(Clone, Debug)]
pub struct SummaryStats {
    pub config: ExperimentConfig,
    score: Moments,
    t1: Moments,
    t2: Moments,
    r_wins: u64,
    draws: u64,
    /// Final score of every game in game order: the empirical CDF handle.
    pub final_scores: Vec<i64>,
    pub diagnostics: Option<DiagnosticsSummary>,
}

impl SummaryStats {
    pub fn count(&self) -> u64 {
        self.score.count()
    }

    pub fn mean(&self) -> f64 {
        self.score.mean()
    }

    /// Unbiased sample variance of the final score.
    pub fn variance(&self) -> f64 {
        self.score.variance()
    }

    pub fn std_error(&self) -> f64 {
        self.score.std_error()
    }

    /// Standard error of the sample variance (fourth-moment formula).
    pub fn variance_std_error(&self) -> f64 {
        self.score.variance_std_error()
    }

    /// Fraction of games the restricted player won (`S_n < 0`).
    pub fn p_r_wins(&self) -> f64 {
        if self.count() == 0 {
            0.0
        } else {
            self.r_wins as f64 / self.count() as f64
        }
    }

    pub fn p_draw(&self) -> f64 {
        if self.count() == 0 {
            1.0
        } else {
            self.draws as f64 / self.count() as f64
        }
    }

    pub fn p_n_wins(&self) -> f64 {
        1.0 - self.p_r_wins() - self.p_draw()
    }

    pub fn mean_t1(&self) -> f64 {
        self.t1.mean()
    }

    pub fn mean_t2(&self) -> f64 {
        self.t2.mean()
    }

    /// `S_n / sqrt(n)` for every game, sorted ascending (for KS tests).
    pub fn scaled_scores_sorted(&self) -> Vec<f64> {
        let scale = if self.config.n > 0 {
            (self.config.n as f64).sqrt()
        } else {
            1.0
        };
        let mut xs: Vec<f64> = self
            .final_scores
            .iter()
            .map(|&s| s as f64 / scale)
            .collect();
        xs.sort_unstable_by(|a, b| a.total_cmp(b));
        xs
    }
}

#[derive(Default)]
struct ChunkOut {
    score: Moments,
    t1: Moments,
    t2: Moments,
    r_wins: u64,
    draws: u64,
    final_scores: Vec<i64>,
    records: Vec<DiagnosticRecord>,
    esn: Moments,
    abs_l1: Moments,
}

struct GameOutcome {
    final_score: i64,
    t1: u64,
    t2: u64,
    at_t0: Option<(i64, [u64; 3])>,
}

fn play_one(
    n: u64,
    t0: u64,
    game: &mut Game,
    strat_r: &dyn Strategy,
    strat_n: &dyn Strategy,
    rng: &mut ChaCha8Rng,
    want_diag: bool,
) -> Result<GameOutcome, EngineError> {
    game.reset(n);
    let mut at_t0 = None;
    while !game.is_over() {
        if want_diag && at_t0.is_none() && game.state().t == t0 {
            at_t0 = Some((game.state().score, game.state().remaining));
        }
        let obs = game.observation();
        let r_move = strat_r.stage_mix(&obs).sample(rng);
        let n_move = strat_n.stage_mix(&obs).sample(rng);
        game.play(r_move, n_move)?;
    }
    if want_diag && at_t0.is_none() {
        // only for n = 0, where T0 = 3n = 0 and the loop never runs
        at_t0 = Some((game.state().score, game.state().remaining));
    }
    Ok(GameOutcome {
        final_score: game.state().score,
        t1: game.state().t1.unwrap_or(0),
        t2: game.state().t2.unwrap_or(0),
        at_t0,
    })
}

fn build_record(n: u64, t0: u64, out: &GameOutcome) -> DiagnosticRecord {
    let (s_t0, remaining) = out.at_t0.expect("diagnostics were captured");
    let third = (t0 / 3) as i64;
    let x = [
        (n - remaining[0]) as i64 - third,
        (n - remaining[1]) as i64 - third,
        (n - remaining[2]) as i64 - third,
    ];
    let x_max = x[0].max(x[1]).max(x[2]);
    let l1_arg = (x[0] + 2 * x[1]).max(x[1] + 2 * x[2]).max(x[2] + 2 * x[0]);
    DiagnosticRecord {
        final_score: out.final_score,
        t1: out.t1,
        t2: out.t2,
        s_t0,
        x,
        x_max,
        l1_residual: out.final_score - s_t0 - l1_arg,
        t1_before_t0: out.t1 <= t0,
    }
}

const GAMES_PER_CHUNK: u64 = 256;

/// Runs the experiment. Behaviour and output are a pure function of the
/// config; worker count only affects wall time.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SummaryStats, McError> {
    let strat_r = strategy_by_name(&cfg.strategy_r)
        .ok_or_else(|| McError::UnknownStrategy(cfg.strategy_r.clone()))?;
    let strat_n = strategy_by_name(&cfg.strategy_n)
        .ok_or_else(|| McError::UnknownStrategy(cfg.strategy_n.clone()))?;
    let t0 = reference_time(cfg.n);
    let rounds = 3 * cfg.n;

    let n_chunks = cfg.games.div_ceil(GAMES_PER_CHUNK);
    let chunk_results: Result<Vec<ChunkOut>, EngineError> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * GAMES_PER_CHUNK;
            let hi = cfg.games.min(lo + GAMES_PER_CHUNK);
            let mut out = ChunkOut::default();
            let mut game = Game::new(cfg.n);
            for g in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
                rng.set_stream(g);
                let res = play_one(
                    cfg.n,
                    t0,
                    &mut game,
                    strat_r.as_ref(),
                    strat_n.as_ref(),
                    &mut rng,
                    cfg.record_diagnostics,
                )?;
                out.score.push(res.final_score as f64);
                out.t1.push(res.t1 as f64);
                out.t2.push(res.t2 as f64);
                if res.final_score < 0 {
                    out.r_wins += 1;
                } else if res.final_score == 0 {
                    out.draws += 1;
                }
                out.final_scores.push(res.final_score);
                if cfg.record_diagnostics {
                    let rec = build_record(cfg.n, t0, &res);
                    let expected_tail = (rec.t2 - rec.t1) as f64 / 3.0 + (rounds - rec.t2) as f64;
                    out.esn.push(rec.final_score as f64 - expected_tail);
                    out.abs_l1.push(rec.l1_residual.unsigned_abs() as f64);
                    out.records.push(rec);
                }
            }
            Ok(out)
        })
        .collect();
    let chunk_results = chunk_results?;

    let mut stats = SummaryStats {
        config: cfg.clone(),
        score: Moments::new(),
        t1: Moments::new(),
        t2: Moments::new(),
        r_wins: 0,
        draws: 0,
        final_scores: Vec::with_capacity(cfg.games as usize),
        diagnostics: cfg.record_diagnostics.then(|| DiagnosticsSummary {
            t0,
            records: Vec::with_capacity(cfg.games as usize),
            ..DiagnosticsSummary::default()
        }),
    };
    for chunk in chunk_results {
        stats.score = stats.score.merge(&chunk.score);
        stats.t1 = stats.t1.merge(&chunk.t1);
        stats.t2 = stats.t2.merge(&chunk.t2);
        stats.r_wins += chunk.r_wins;
        stats.draws += chunk.draws;
        stats.final_scores.extend(chunk.final_scores);
        if let Some(diag) = stats.diagnostics.as_mut() {
            diag.records.extend(chunk.records);
            diag.esn = diag.esn.merge(&chunk.esn);
            diag.abs_l1 = diag.abs_l1.merge(&chunk.abs_l1);
        }
    }
    Ok(stats)
}

/// Two-sample Kolmogorov-Smirnov sup-distance between empirical CDFs.
/// Inputs must be sorted ascending; ties are handled by evaluating the
/// right-continuous CDFs at the merged sample points.
pub fn ks_distance(sorted_a: &[f64], sorted_b: &[f64]) -> Result<f64, McError> {
    if sorted_a.is_empty() || sorted_b.is_empty() {
        return Err(McError::EmptySample);
    }
    debug_assert!(sorted_a.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(sorted_b.windows(2).all(|w| w[0] <= w[1]));
    let (na, nb) = (sorted_a.len() as f64, sorted_b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < sorted_a.len() || ib < sorted_b.len() {
        let v = match (sorted_a.get(ia), sorted_b.get(ib)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while ia < sorted_a.len() && sorted_a[ia] <= v {
            ia += 1;
        }
        while ib < sorted_b.len() && sorted_b[ib] <= v {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    Ok(d)
}

/// Mean gap of the phase-count identity: `mean S_n` minus
/// `mean[(T2 - T1)/3 + (3n - T2)]`. Zero in expectation whenever the
/// restricted player is greedy and N never plays a move that cannot win;
/// the identity is per-expectation, not per-path.
pub fn esn_consistency(stats: &SummaryStats, n: u64) -> Result<f64, McError> {
    debug_assert_eq!(n, stats.config.n);
    let diag = stats
        .diagnostics
        .as_ref()
        .ok_or(McError::DiagnosticsMissing)?;
    Ok(diag.esn_gap())
}

/// `mean(3n - T1) / sqrt(n)`: converges to three times the mean of the
/// largest centered count deviation (about 2.5388).
pub fn t1_scaling(stats: &SummaryStats, n: u64) -> Result<f64, McError> {
    debug_assert_eq!(n, stats.config.n);
    if stats.diagnostics.is_none() {
        return Err(McError::DiagnosticsMissing);
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(((3 * n) as f64 - stats.mean_t1()) / (n as f64).sqrt())
}
