//! Continuous-time reversible random walks on lattices with varying dimension.
//!
//! The state space is a plane with the closed disk `B_eps` collapsed to a
//! single darning vertex `a*`, plus a half-line (the rod) attached at `a*`.
//! At scale `k` the plane is discretised by `2^-k Z^2` and the rod by
//! `2^-k Z_+`; walks hold an exponential time of rate `4^k` at each vertex.
//!
//! * [`lattice`] builds the graphs `G^k` / `G_0^k`, the geodesic metric and
//!   the projection maps.
//! * [`measures`] holds the reference measures and the jump kernels.
//! * [`walker`] simulates reflected, killed and resurrected walks and
//!   provides path utilities.
//! * [`generator`] contains the test-function class, discrete and continuum
//!   generators, and martingale diagnostics.
//! * [`harness`] drives named experiments and emits reports.

pub mod error;
pub mod generator;
pub mod harness;
pub mod lattice;
pub mod measures;
pub mod walker;

pub use error::{Error, Result};
pub use lattice::{LatticeGraph, LatticeParams, Rational, Vertex, VertexId};
