//! Semi-restricted Rock-Paper-Scissors laboratory.
//!
//! The game: two players play `3n` rounds of Rock-Paper-Scissors. Player R
//! (restricted) must use each of the three moves exactly `n` times; player N
//! (normal) is unrestricted. The score `S_n` is N's wins minus losses.
//!
//! This crate provides:
//!
//! * [`engine`] — moves, payoffs, game state, and round-by-round execution;
//! * [`strategies`] — the stage-mix strategy interface and the concrete
//!   strategies of interest (greedy, cyclic, rock-then-greedy, uniform);
//! * [`solver`] — exact optimal game values by backward induction over
//!   remaining-count states, each stage solved as a small zero-sum matrix
//!   game, plus the independent greedy-chain expectation oracle;
//! * [`limit`] — exact samplers for the limit distribution of
//!   `S_n / sqrt(n)` under greedy play and its closed-form constants;
//! * [`montecarlo`] — a reproducible batch experiment runner with
//!   stopping-time diagnostics;
//! * [`verify`] — the acceptance checks wiring all of the above together.

pub mod engine;
pub mod limit;
pub mod montecarlo;
pub mod solver;
pub mod stats;
pub mod strategies;
pub mod verify;

pub use engine::{payoff, run_game, GameState, Move, Transcript};
pub use solver::{compute_value_table, greedy_chain_expectation, optimal_value, CountsState};
pub use strategies::{StageMix, Strategy};
