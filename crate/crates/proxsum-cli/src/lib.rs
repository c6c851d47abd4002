//! Harness library behind the `proxsum` binary: configuration parsing,
//! experiment execution, rate fits, reports, verification suites, and the
//! lower-bound demo.

pub mod config;
pub mod experiment;
pub mod fit;
pub mod game;
pub mod report;
pub mod verify;
