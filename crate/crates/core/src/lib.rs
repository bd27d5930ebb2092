//! Kinetic exchange economies: a buyer-model market of agents trading goods
//! for money, reference money-exchange models, and the distribution analysis
//! and experiment runners built on them.

// Guards like `!(x > 0.0)` are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod market;
pub mod reference;
pub mod rng;

pub use error::{Error, Result};
pub use market::{Agent, Population, PriceRange};
pub use rng::RngStream;
