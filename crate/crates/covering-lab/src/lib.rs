//! Simulation laboratory for random covering sets on Ahlfors-regular metric
//! spaces.
//!
//! The crate studies sets of the form `E = limsup_n B(xi_n, r_n)`: points hit
//! infinitely often by balls whose centers `xi_n` come from an exponentially
//! mixing stationary process and whose radii `r_n` follow a deterministic
//! schedule. It provides:
//!
//! * [`space`]: five concrete Ahlfors-regular spaces (circle, interval with
//!   three reference measures, ternary Cantor set) with exact ball-measure
//!   oracles and measure-preserving samplers;
//! * [`process`]: center processes (iid, doubling map, beta shift, Gauss map,
//!   finite-state Markov mixer) plus empirical mixing-coefficient estimation;
//! * [`schedule`]: radius schedules, series classification, convergence
//!   exponents, mass-transference inflation, and the Shepp boundary series;
//! * [`engine`]: Monte Carlo covering trials — hit counts over geometric
//!   ladders, limsup membership proxies, second-moment lower bounds, and a
//!   grid index that accelerates ball lookups without changing results;
//! * [`dimension`]: box-counting dimension estimates and natural covering
//!   sums for dimension functions;
//! * [`config`] / [`experiments`] / [`report`]: a flat key-value experiment
//!   format, the eight runnable experiment kinds, and deterministic JSON/CSV
//!   reports.
//!
//! Everything downstream of a master seed is reproducible: reports are
//! byte-identical across runs and across thread-pool sizes.

#![forbid(unsafe_code)]

pub mod config;
pub mod dimension;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod process;
pub mod report;
pub mod schedule;
pub mod space;
pub mod util;

pub use error::{Error, Result};

/// Master seed used when a run does not specify one.
pub const DEFAULT_MASTER_SEED: u64 = 0x00C0_FFEE_0000_0001;
