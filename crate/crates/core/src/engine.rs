//! Game mechanics: moves, payoffs, per-round state transitions, and
//! execution of complete `3n`-round games.

use rand::Rng;
use serde_json::json;
use thiserror::Error;

use crate::strategies::{Observation, Strategy};

/// Errors raised by the game engine.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    /// The restricted player selected a move whose quota is already spent.
    /// Signals an invalid restricted-player strategy.
    #[error("restricted player has no {0:?} left at round {1}")]
    RMoveExhausted(Move, u64),
    /// A round was played after all `3n` rounds finished.
    #[error("game is over, all rounds have been played")]
    GameOver,
}

/// One of the three moves. `successor` beats `self`: Paper beats Rock,
/// Scissors beats Paper, Rock beats Scissors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Move {
    Rock = 0,
    Paper = 1,
    Scissors = 2,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Rock, Move::Paper, Move::Scissors];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Inverse of [`Move::index`]. Panics on `i >= 3`.
    #[inline]
    pub fn from_index(i: usize) -> Move {
        Move::ALL[i]
    }

    /// The move that beats this one (cyclic).
    #[inline]
    pub fn successor(self) -> Move {
        Move::ALL[(self as usize + 1) % 3]
    }

    pub fn as_char(self) -> char {
        match self {
            Move::Rock => 'R',
            Move::Paper => 'P',
            Move::Scissors => 'S',
        }
    }
}

/// Per-round payoff to the unrestricted player N: `+1` if N's move beats
/// R's, `-1` if R's beats N's, `0` on a draw.
#[inline]
pub fn payoff(r_move: Move, n_move: Move) -> i64 {
    if n_move == r_move.successor() {
        1
    } else if r_move == n_move.successor() {
        -1
    } else {
        0
    }
}

/// State of a game in progress, from the restricted player's side:
/// round counter, per-move remaining quota, and N's running score.
///
/// `t1`/`t2` record the rounds on which the first and second quota hit
/// zero (the stopping times of the quota-depletion process).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameState {
    pub n: u64,
    pub t: u64,
    pub remaining: [u64; 3],
    pub score: i64,
    pub t1: Option<u64>,
    pub t2: Option<u64>,
}

impl GameState {
    pub fn new(n: u64) -> GameState {
        GameState {
            n,
            t: 0,
            remaining: [n; 3],
            score: 0,
            t1: None,
            t2: None,
        }
    }

    /// Total number of rounds in the game.
    #[inline]
    pub fn rounds(&self) -> u64 {
        3 * self.n
    }

    #[inline]
    pub fn is_over(&self) -> bool {
        self.t == self.rounds()
    }

    /// Number of moves the restricted player can still play.
    #[inline]
    pub fn alive_moves(&self) -> usize {
        self.remaining.iter().filter(|&&c| c > 0).count()
    }
}

/// Plays one round: decrements R's quota for `r_move`, adds the payoff to
/// the score, and marks `t1`/`t2` when the count of available moves drops.
/// The input state is unchanged; the successor state is returned.
pub fn play_round(state: &GameState, r_move: Move, n_move: Move) -> Result<GameState, EngineError> {
    if state.is_over() {
        return Err(EngineError::GameOver);
    }
    if state.remaining[r_move.index()] == 0 {
        return Err(EngineError::RMoveExhausted(r_move, state.t));
    }
    let mut next = *state;
    next.t += 1;
    next.remaining[r_move.index()] -= 1;
    next.score += payoff(r_move, n_move);
    if next.remaining[r_move.index()] == 0 {
        // One decrement can deplete at most one quota, so the number of
        // exhausted moves rises by exactly one here.
        let exhausted = next.remaining.iter().filter(|&&c| c == 0).count();
        match exhausted {
            1 => next.t1 = Some(next.t),
            2 => next.t2 = Some(next.t),
            _ => {} // third quota empties on the final round; T3 = 3n is implicit
        }
    }
    Ok(next)
}

/// Full record of one finished game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub n: u64,
    pub r_moves: Vec<Move>,
    pub n_moves: Vec<Move>,
    /// `scores[i]` is S(i+1), the score after round `i+1`.
    pub scores: Vec<i64>,
    /// Round on which R's first quota hit zero (0 only when `n = 0`).
    pub t1: u64,
    /// Round on which R's second quota hit zero (0 only when `n = 0`).
    pub t2: u64,
    pub final_score: i64,
}

impl Transcript {
    /// Score after round `t`; `S(0) = 0`.
    pub fn score_at(&self, t: u64) -> i64 {
        if t == 0 {
            0
        } else {
            self.scores[(t - 1) as usize]
        }
    }

    fn moves_string(moves: &[Move]) -> String {
        moves.iter().map(|m| m.as_char()).collect()
    }

    /// One-record JSON form for diagnostics dumps.
    pub fn record_json(&self, seed: Option<u64>, include_moves: bool) -> serde_json::Value {
        let mut v = json!({
            "n": self.n,
            "seed": seed,
            "final_score": self.final_score,
            "t1": self.t1,
            "t2": self.t2,
        });
        if include_moves {
            v["r_moves"] = json!(Self::moves_string(&self.r_moves));
            v["n_moves"] = json!(Self::moves_string(&self.n_moves));
        }
        v
    }
}

/// A game being played, with the joint history both strategies observe.
///
/// Buffers are reusable across games via [`Game::reset`], so batch runners
/// can avoid reallocating per game.
#[derive(Clone, Debug)]
pub struct Game {
    state: GameState,
    r_moves: Vec<Move>,
    n_moves: Vec<Move>,
    scores: Vec<i64>,
}

impl Game {
    pub fn new(n: u64) -> Game {
        let rounds = (3 * n) as usize;
        Game {
            state: GameState::new(n),
            r_moves: Vec::with_capacity(rounds),
            n_moves: Vec::with_capacity(rounds),
            scores: Vec::with_capacity(rounds),
        }
    }

    /// Clears all history and restarts with restriction parameter `n`.
    pub fn reset(&mut self, n: u64) {
        self.state = GameState::new(n);
        self.r_moves.clear();
        self.n_moves.clear();
        self.scores.clear();
    }

    #[inline]
    pub fn state(&self) -> &GameState {
        &self.state
    }

    #[inline]
    pub fn is_over(&self) -> bool {
        self.state.is_over()
    }

    /// What both players see before the current round. Moves within a round
    /// are simultaneous: the observation never includes the current round.
    #[inline]
    pub fn observation(&self) -> Observation<'_> {
        Observation {
            n: self.state.n,
            t: self.state.t,
            remaining: self.state.remaining,
            history_r: &self.r_moves,
            history_n: &self.n_moves,
        }
    }

    /// Score after round `t`; `S(0) = 0`.
    pub fn score_at(&self, t: u64) -> i64 {
        if t == 0 {
            0
        } else {
            self.scores[(t - 1) as usize]
        }
    }

    pub fn play(&mut self, r_move: Move, n_move: Move) -> Result<(), EngineError> {
        self.state = play_round(&self.state, r_move, n_move)?;
        self.r_moves.push(r_move);
        self.n_moves.push(n_move);
        self.scores.push(self.state.score);
        Ok(())
    }

    /// Finishes the game into a transcript. Panics if rounds remain.
    pub fn into_transcript(self) -> Transcript {
        assert!(self.is_over(), "game still has rounds to play");
        Transcript {
            n: self.state.n,
            r_moves: self.r_moves,
            n_moves: self.n_moves,
            scores: self.scores,
            t1: self.state.t1.unwrap_or(0),
            t2: self.state.t2.unwrap_or(0),
            final_score: self.state.score,
        }
    }
}

/// Runs one complete game of `3n` rounds.
///
/// Both strategies are queried against the same pre-round observation
/// before either move is applied; R's move is sampled before N's from the
/// shared stream, so replays with the same seed are bit-identical.
pub fn run_game<R: Rng>(
    n: u64,
    strategy_r: &dyn Strategy,
    strategy_n: &dyn Strategy,
    rng: &mut R,
) -> Result<Transcript, EngineError> {
    let mut game = Game::new(n);
    while !game.is_over() {
        let obs = game.observation();
        let r_move = strategy_r.stage_mix(&obs).sample(rng);
        let n_move = strategy_n.stage_mix(&obs).sample(rng);
        game.play(r_move, n_move)?;
    }
    Ok(game.into_transcript())
}
