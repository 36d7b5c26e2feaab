//! QAOA parameter transfer for MaxCut.
//!
//! The crate builds a database of donor graphs with pre-optimized QAOA
//! schedules, embeds whole graphs into a vector space, picks donors for new
//! acceptor graphs by Euclidean proximity, and evaluates how well the donor
//! schedules perform on the acceptor under ideal and noisy simulation.
//!
//! Module map:
//!
//! - [`graph`]: simple undirected graphs, parity-controlled generators,
//!   Weisfeiler-Lehman fingerprints, line graphs, JSON serialization.
//! - [`maxcut`]: exact classical MaxCut (enumeration and branch-and-bound).
//! - [`qaoa`]: statevector QAOA simulation and Nelder-Mead optimization.
//! - [`embed`]: Graph2Vec, GL2Vec, spectral features and FEATHER embeddings.
//! - [`donor`]: donor database, nearest/farthest queries, transfer and
//!   warm-start evaluation, speed-up protocol.
//! - [`noise`]: stochastic Pauli trajectory simulation and error statistics.

pub mod donor;
pub mod embed;
mod error;
pub mod graph;
pub mod maxcut;
pub mod noise;
pub mod qaoa;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use graph::Graph;
