//! Core of the arena ladder: the MiniBrawl fighting-game Markov game, tabular
//! and scripted policies, exact and learned best responses, population
//! self-play (FSP, PSRO, League) and the evaluation suite (CPU ladders, Elo,
//! exploitability, curriculum training).
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature enables rayon fan-out for match simulation.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arena;
pub mod engine;
pub mod error;
pub mod eval;
pub mod exact;
pub mod game;
pub mod learner;
pub mod matrix_game;
pub mod metagame;
pub mod num;
pub mod policy;
pub mod presets;
pub mod seed;

pub use error::{Error, Result};
pub use game::{MarkovGame, Outcome, Side};
