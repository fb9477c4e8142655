//! Monte-Carlo simulation of beamformed coded caching.
//!
//! A multi-antenna server fills two single-antenna cache nodes during a
//! placement phase, then serves both of them with one superposition-coded
//! broadcast during a delivery phase. This crate draws Rayleigh channels,
//! picks DFT codebook beams (a Queen-based genetic search for the shared
//! delivery beam), searches the power split, and estimates the successful
//! transmission probability (STP) and throughput of coded and uncoded caching
//! under four decoding methods.
//!
//! ```
//! use ccbeam::orchestrator::{estimate_point, Scheme, SimConfig};
//! use ccbeam::linkmodel::DecodingMethod;
//!
//! let config = SimConfig { realizations: 200, ..SimConfig::desk_scale() };
//! let row = estimate_point(&config, 20.0, Scheme::CodedBf, Some(DecodingMethod::JointSic)).unwrap();
//! assert!(row.stp > 0.9);
//! ```
//!
//! The guide under `book/` walks through the model chapter by chapter; its
//! code listings run as doctests of this crate.

pub mod channel;
pub mod cli;
pub mod codebook;
pub mod error;
pub mod gaopt;
pub mod linkmodel;
pub mod orchestrator;

pub use error::{Error, Result};

// Book chapters compiled as doctests so the guide cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/codebook.md")]
    mod codebook {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/genetic-search.md")]
    mod genetic_search {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
