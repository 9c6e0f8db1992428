//! Pitch-axis flight control with a robust model reference adaptive
//! augmentation.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: small dense matrices, Lyapunov and Riccati solvers, RK4.
//! - [`plant`]: the linearized short-period model across c.g. positions.
//! - [`baseline`]: LQ feedback, feedforward and integral action.
//! - [`mrac`]: companion-form reference model and the adaptive laws with
//!   dead zone and projection.
//! - [`sim`]: closed-loop simulation, traces and metrics.
//! - [`config`] and [`cli`]: flat-file configuration and the command line.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod config;
pub mod error;
pub mod fmt;
pub mod mrac;
pub mod numerics;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
