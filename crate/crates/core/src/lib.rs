//! Stationary equilibria, dynamics and efficiency of stateless mean-field
//! congestion games.
//!
//! Agents of total mass `m` repeatedly pick actions whose completion times
//! depend on how the population is spread over the actions. The crate
//! computes sojourn times from a fluid queueing model ([`sojourn`]),
//! discounted utilities and best responses ([`utility`]), stationary
//! equilibria ([`equilibrium`]), two-action projection dynamics
//! ([`dynamics`]) and welfare / price-of-anarchy figures ([`welfare`]).

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod numeric;
pub mod sojourn;
pub mod utility;
pub mod welfare;

pub use error::{Error, Result};
pub use game::{
    rates_from, strategy_from_distribution, validate_instance, Discount, DiscountedPayoffVector,
    EquilibriumReport, ExecTimeCurve, GameInstance, MassDistribution, ResourceModel,
    SojournProfile, Tolerances, Verdict, Violation,
};
