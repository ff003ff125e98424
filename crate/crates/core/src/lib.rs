//! Four-group-decodable distributed differential space-time codes for
//! amplify-and-forward relay networks with R = 2^λ relays.
//!
//! The crate builds the codes from the left-regular representation of the
//! extended Clifford algebra A_2^L, constructs the relay matrices that make the
//! codes usable in a two-stage cooperative protocol, checks every algebraic
//! condition exactly over the Gaussian integers, and simulates the network with
//! differential encoding and both exhaustive and group-wise decoding.
//!
//! ```
//! use ddstc::{algebra::RepContext, design::build_design, relays::{build_relay_matrices, verify_conditions}};
//!
//! let ctx = RepContext::for_relays(4).unwrap();
//! let relays = build_relay_matrices(&ctx);
//! let design = build_design(4).unwrap();
//! assert!(verify_conditions(&relays, &design, 100, 0).unwrap().passed());
//! ```

pub mod algebra;
pub mod cli;
pub mod design;
pub mod error;
pub mod export;
pub mod linalg;
pub mod parallel;
pub mod relays;
pub mod signal_sets;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
