//! Planning and simulation toolkit for robotic aerial IRS (RA-IRS) fleets
//! serving an urban mmWave microcell.
//!
//! The pipeline for one Monte Carlo trial is
//! [`geometry`] → [`channel`] → [`traffic`] → [`planner`] → [`routing`],
//! with [`energy`] accounting on top and [`harness`] driving sweeps.
//! [`oracle`] holds brute-force and Monte Carlo reference checks that are
//! kept independent of the production code paths.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod traffic;

pub use error::{Error, Result};
