//! Operator side of the arena ladder: versioned run storage, the layered run
//! configuration, the `arenaladder` command line and the live play server.

pub mod cli;
pub mod config;
pub mod digest;
pub mod playserver;
pub mod store;
