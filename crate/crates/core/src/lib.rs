//! Near-optimal signaling schemes for Bayesian games and for second-price
//! auctions with a bounded number of signals.
//!
//! The game side enumerates a net of small-support mixed profiles, builds the
//! polytope of posteriors under which each profile is an approximate
//! equilibrium, and picks the best decomposition of the prior with one LP.
//! The auction side runs greedy maximization of a submodular welfare function
//! over a net of winner tuples.

pub mod auction;
pub mod error;
pub mod game;
pub mod io;
pub mod lp;
pub mod model;
pub mod net;
pub mod polytope;

pub use error::{FileError, LpError, ModelError, SolveError};
pub use model::{AuctionInstance, BayesianGame, MixedProfile, SignalingScheme, Tensor, Tolerances};
pub use net::EquilibriumConcept;
