//! Scenario configs, weight generators, report bundles, separation search
//! and the self-test suite behind the `hwl` command.

pub mod bundle;
pub mod config;
pub mod export;
pub mod parallel;
pub mod real;
pub mod scenario;
pub mod search;
pub mod selftest;
pub mod weights;
