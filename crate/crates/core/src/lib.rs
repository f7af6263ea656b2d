//! Iterated social dilemmas: one-shot analysis, memory-one and
//! zero-determinant strategies, exact Markov payoffs, round-robin
//! tournaments and finite-population evolutionary dynamics.

pub mod engine;
pub mod error;
pub mod evolution;
pub mod game;
pub mod rng;
pub mod strategy;
pub mod tournament;

pub use engine::{exact_payoffs, MatchParams, Method, PayoffPair};
pub use error::{Error, Result};
pub use game::{Game2x2, GameClass, Player, Quadruple, ThresholdGame, TravelersDilemma};
pub use strategy::{compile_zd, MemoryOne, Phi, ZdKind, ZdSpec};
