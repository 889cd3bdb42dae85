//! Minesweeper simulation environment and evaluation harness for
//! language-model agents.

pub mod engine;
pub mod boardgen;
pub mod textboard;
pub mod tasks;
pub mod session;
pub mod metrics;
pub mod suite;
pub mod understanding;
