//! Lattice spaces `E^k`, the graphs `G^k` / `G_0^k`, and continuum geometry.

mod geometry;
mod graph;
pub(crate) mod params;

pub use geometry::{geodesic_rho, project_f, rho_norm, segment_meets_disk, Point, Vertex};
pub use graph::{Classification, Flags, GraphKind, LatticeGraph, Local, StarStructure, VertexId, GRID_DIRS, STAR_BIT};
pub use params::{parse_rational, LatticeParams, Rational, MAX_K};
