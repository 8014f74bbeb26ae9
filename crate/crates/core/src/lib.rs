//! Time-orthogonal pulse shaping for linear space-time block codes.
//!
//! Weight-matrix supports split a code into groups that can ride on mutually
//! orthogonal pulses; after matched filtering each group decodes on its own.
//! The crate covers the code algebra, a catalog of codes, pulse families, a
//! waveform-level simulator, decoders with exact complexity accounting and the
//! experiment runner behind the `tops-stbc` binary.

pub mod catalog;
pub mod constellation;
pub mod decode;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod pulse;
pub mod rng;
pub mod sim;
pub mod stbc;

pub use constellation::Constellation;
pub use error::{Error, Result};
pub use grid::ComplexGrid;
pub use stbc::LinearStbc;
