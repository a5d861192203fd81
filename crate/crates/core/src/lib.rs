//! Opportunistic coded-caching content delivery over Rayleigh-fading
//! Gaussian broadcast channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`caching`]: load formulas, effective weights, and bit-exact placement,
//!   XOR codeword delivery and decoding.
//! - [`channel`]: exponential fading draws, seeded substreams and the
//!   multicast rate primitive.
//! - [`power_alloc`]: weighted-sum-rate maximisation over the degraded
//!   broadcast channel (utility envelope, Lagrange level, optimal split).
//! - [`schemes`]: per-realization sum delivery rate of the five delivery
//!   schemes.
//! - [`asymptotics`]: exponential integral, Lambert W and the closed-form /
//!   limiting rate expressions.
//! - [`harness`]: Monte Carlo estimation, sweeps to CSV and the acceptance
//!   runner.
//!
//! All rates are in nats/s/Hz.

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod caching;
pub mod channel;
mod error;
pub mod subset;
pub mod harness;
pub mod power_alloc;
pub mod schemes;

pub use caching::{Placement, SystemParams};
pub use channel::{ChannelDraw, Power};
pub use error::{Error, Result};
pub use power_alloc::PowerAllocation;
pub use schemes::{Scheme, SchemeOutcome};
pub use subset::UserSet;
