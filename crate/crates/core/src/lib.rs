//! Competing prediction algorithms as a game.
//!
//! Players pick predictors from their hypothesis classes and compete for
//! users; a user adopts any prediction within their tolerance and splits one
//! unit of payoff equally among the players that satisfy them. This crate
//! builds the empirical game over a drawn sample, runs potential-based
//! better-response dynamics to approximate equilibria, provides exact
//! best-response oracles for finite and low-dimensional linear classes, and
//! evaluates the sample-complexity formulas that connect empirical to
//! population payoffs.
//!
//! # Modules
//!
//! - `model` - user points, hypotheses, classes, profiles, payoff calculus
//! - `dynamics` - potential function, better-response runs, equilibrium
//!   verification and enumeration
//! - `linear` - feasibility of per-point region labelings and the best
//!   linear response
//! - `bounds` - uniform-convergence bound, required sample size, the
//!   sample-then-converge learner
//! - `scenarios` - seeded synthetic distributions and packaged games
//! - `io` - CSV/JSON formats and reports
//! - `cli` - the command front end used by the `predgame` binary
//!
//! Everything numeric is generic over [`arith::Scalar`] with two
//! instantiations: `f64` (floating mode) and [`arith::Q`] (exact rationals).

pub mod arith;
pub mod bounds;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linear;
pub mod model;
pub mod scenarios;

pub use arith::{ArithmeticMode, Scalar, Q};
pub use error::{Error, Result};
