//! Stage strategies: what each player does with one round to play.
//!
//! A strategy maps the observable state to a [`StageMix`], a probability
//! vector over the three moves; deterministic strategies return point
//! masses. Sampling is by inverse CDF over move order against a single
//! uniform draw, so transcripts are reproducible across platforms.

use rand::Rng;
use thiserror::Error;

use crate::engine::Move;

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    /// Every quota is zero; no mix exists.
    #[error("all moves are exhausted")]
    AllExhausted,
    /// The probabilities are not a distribution.
    #[error("invalid stage mix {0:?}: must be nonnegative and sum to 1")]
    InvalidMix([f64; 3]),
}

/// Everything a strategy may condition on before a round: the restriction
/// parameter, the current round, R's remaining quotas (common knowledge),
/// and both players' full prior move histories.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    pub n: u64,
    /// Rounds already played; the upcoming round is `t + 1`.
    pub t: u64,
    pub remaining: [u64; 3],
    pub history_r: &'a [Move],
    pub history_n: &'a [Move],
}

/// Per-move selection probabilities for one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageMix {
    probs: [f64; 3],
}

const MIX_SUM_TOL: f64 = 1e-12;

impl StageMix {
    pub fn new(probs: [f64; 3]) -> Result<StageMix, StrategyError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > MIX_SUM_TOL {
            return Err(StrategyError::InvalidMix(probs));
        }
        Ok(StageMix { probs })
    }

    pub fn point(m: Move) -> StageMix {
        let mut probs = [0.0; 3];
        probs[m.index()] = 1.0;
        StageMix { probs }
    }

    pub fn uniform() -> StageMix {
        StageMix {
            probs: [1.0 / 3.0; 3],
        }
    }

    #[inline]
    pub fn probs(&self) -> [f64; 3] {
        self.probs
    }

    #[inline]
    pub fn prob(&self, m: Move) -> f64 {
        self.probs[m.index()]
    }

    /// Inverse-CDF selection over move order (Rock, Paper, Scissors)
    /// against one uniform draw.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Move {
        self.sample_from_u(rng.random::<f64>())
    }

    /// Deterministic kernel of [`StageMix::sample`]: `u` in `[0, 1)`.
    #[inline]
    pub(crate) fn sample_from_u(&self, u: f64) -> Move {
        let mut cum = 0.0;
        let mut last_positive = Move::Rock;
        for m in Move::ALL {
            let p = self.probs[m.index()];
            if p > 0.0 {
                last_positive = m;
                cum += p;
                if u < cum {
                    return m;
                }
            }
        }
        // u landed in the rounding gap above the last positive entry.
        last_positive
    }
}

/// Available-move classification used by the stage rules: the first
/// `count` entries of the array are the moves with positive quota.
#[inline]
fn available(remaining: [u64; 3]) -> (usize, [Move; 3]) {
    let mut avail = [Move::Rock; 3];
    let mut count = 0;
    for m in Move::ALL {
        if remaining[m.index()] > 0 {
            avail[count] = m;
            count += 1;
        }
    }
    (count, avail)
}

/// When exactly two moves remain they are `x` and `successor(x)` for a
/// unique `x` (the beaten move); returns `x`.
fn beaten_of_pair(a: Move, b: Move) -> Move {
    if a.successor() == b {
        a
    } else {
        debug_assert_eq!(b.successor(), a);
        b
    }
}

/// R's greedy stage mix: the single-round optimal play given the remaining
/// quotas. Uniform with three moves available; `1/3` on the beaten move and
/// `2/3` on its beater with two; forced with one.
pub fn greedy_r_mix(remaining: [u64; 3]) -> Result<StageMix, StrategyError> {
    let (count, avail) = available(remaining);
    match count {
        0 => Err(StrategyError::AllExhausted),
        1 => Ok(StageMix::point(avail[0])),
        2 => {
            let beaten = beaten_of_pair(avail[0], avail[1]);
            let mut probs = [0.0; 3];
            probs[beaten.index()] = 1.0 / 3.0;
            probs[beaten.successor().index()] = 2.0 / 3.0;
            StageMix::new(probs)
        }
        _ => Ok(StageMix::uniform()),
    }
}

/// N's greedy stage mix against R's remaining quotas. Uniform with three
/// available; with two available (`x` beaten), `2/3` on `successor(x)` and
/// `1/3` on `successor(successor(x))`; with one available the sure winner.
pub fn greedy_n_mix(remaining: [u64; 3]) -> Result<StageMix, StrategyError> {
    let (count, avail) = available(remaining);
    match count {
        0 => Err(StrategyError::AllExhausted),
        1 => Ok(StageMix::point(avail[0].successor())),
        2 => {
            let beaten = beaten_of_pair(avail[0], avail[1]);
            let beater = beaten.successor();
            let mut probs = [0.0; 3];
            probs[beater.index()] = 2.0 / 3.0;
            probs[beater.successor().index()] = 1.0 / 3.0;
            StageMix::new(probs)
        }
        _ => Ok(StageMix::uniform()),
    }
}

/// N's mix when playing uniformly over the moves that can still win: all
/// three while R has three choices, the two beaters with two, the unique
/// winner with one.
pub fn uniform_nonstupid_mix(remaining: [u64; 3]) -> Result<StageMix, StrategyError> {
    let (count, avail) = available(remaining);
    match count {
        0 => Err(StrategyError::AllExhausted),
        1 => Ok(StageMix::point(avail[0].successor())),
        2 => {
            let beaten = beaten_of_pair(avail[0], avail[1]);
            let beater = beaten.successor();
            let mut probs = [0.0; 3];
            probs[beater.index()] = 0.5;
            probs[beater.successor().index()] = 0.5;
            StageMix::new(probs)
        }
        _ => Ok(StageMix::uniform()),
    }
}

/// The deterministic cyclic move for round `t + 1` (0-based `t`):
/// Rock, Paper, Scissors, Rock, ...
#[inline]
pub fn cyclic_move(t: u64) -> Move {
    Move::from_index((t % 3) as usize)
}

/// A decision rule queried once per round. Strategies are stateless: all
/// state lives in the [`Observation`], so one instance is safely shared
/// read-only across workers.
pub trait Strategy: Send + Sync {
    /// The mix for the upcoming round. The engine only queries while at
    /// least one quota remains, so this cannot fail on legal observations.
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix;
}

/// R's optimal strategy: play each round as if it were the last.
pub struct GreedyR;

impl Strategy for GreedyR {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        greedy_r_mix(obs.remaining).expect("observation has a move remaining")
    }
}

/// N playing greedily against R's remaining quotas.
pub struct GreedyN;

impl Strategy for GreedyN {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        greedy_n_mix(obs.remaining).expect("observation has a move remaining")
    }
}

/// R playing 1,2,3,1,2,3,... deterministically. Never exhausts a quota
/// before round `3n - 2`.
pub struct CyclicR;

impl Strategy for CyclicR {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        StageMix::point(cyclic_move(obs.t))
    }
}

/// N playing Rock while R has all three choices, then switching to the
/// greedy endgame.
pub struct RockThenGreedyN;

impl Strategy for RockThenGreedyN {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        if obs.remaining.iter().all(|&c| c > 0) {
            StageMix::point(Move::Rock)
        } else {
            greedy_n_mix(obs.remaining).expect("observation has a move remaining")
        }
    }
}

/// N playing uniformly over the non-stupid moves.
pub struct UniformNonstupidN;

impl Strategy for UniformNonstupidN {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        uniform_nonstupid_mix(obs.remaining).expect("observation has a move remaining")
    }
}

/// Plays a fixed move sequence; useful for forced transcripts in tests and
/// diagnostics.
pub struct Scripted {
    moves: Vec<Move>,
}

impl Scripted {
    pub fn new(moves: Vec<Move>) -> Scripted {
        Scripted { moves }
    }

    /// The cyclic script 1,2,3,... of the given length.
    pub fn cyclic(rounds: u64) -> Scripted {
        Scripted {
            moves: (0..rounds).map(cyclic_move).collect(),
        }
    }
}

impl Strategy for Scripted {
    fn stage_mix(&self, obs: &Observation<'_>) -> StageMix {
        StageMix::point(self.moves[obs.t as usize])
    }
}

/// Strategy names accepted on the command line.
pub const STRATEGY_NAMES: [&str; 5] = [
    "greedy-r",
    "greedy-n",
    "cyclic-r",
    "rock-then-greedy-n",
    "uniform-n",
];

/// Looks up a strategy by its command-line name.
pub fn strategy_by_name(name: &str) -> Option<Box<dyn Strategy>> {
    match name {
        "greedy-r" => Some(Box::new(GreedyR)),
        "greedy-n" => Some(Box::new(GreedyN)),
        "cyclic-r" => Some(Box::new(CyclicR)),
        "rock-then-greedy-n" => Some(Box::new(RockThenGreedyN)),
        "uniform-n" => Some(Box::new(UniformNonstupidN)),
        _ => None,
    }
}
