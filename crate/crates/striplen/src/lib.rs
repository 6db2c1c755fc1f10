//! striplen: a strip-decomposition notion of path length in the plane.
//!
//! For a piecewise-linear path or graph map into the plane, slice the plane
//! into a family of closed parallel strips (width `mu`, rotation `t` half
//! turns, offset `x`), take the connected components of the strip preimages,
//! and add their perpendicular extents with geometrically decaying weights.
//! Averaging that weighted sum over the unit cube of `(x, t, mu)` parameters
//! yields a length functional that is finite for every path (always below 1),
//! invariant under isometries and reparameterization, monotone under
//! restriction, and continuous under uniform convergence.
//!
//! The crate provides:
//!
//! * [`geometry`] -- plane primitives, PL paths & graph maps, strip coordinates;
//! * [`fiber`] -- per-parameter strip decompositions and their weighted sums;
//! * [`integrate`] -- Monte Carlo / jittered-grid estimates of the length
//!   integral, coupled estimation, cumulative length profiles, and an
//!   independent closed-form oracle for straight segments;
//! * [`reparam`] -- parameterization by length, the disjoint-interval
//!   statistic, and explicit equicontinuity moduli;
//! * [`homotopy`] -- shortest paths in a fixed homotopy class of a polygonal
//!   domain with holes, via signature-preserving shortcutting;
//! * [`selftest`] -- the runnable acceptance checks behind `striplen selftest`.

pub mod error;
pub mod fiber;
pub mod geometry;
pub mod integrate;
pub mod reparam;
pub mod homotopy;
pub mod selftest;

pub use error::Error;
pub use fiber::{
    decompose_graph, decompose_path, fiber_length, ComponentSupport, Decomposable,
    FiberComponent, FiberDecomposition,
};
pub use geometry::{
    diameter_of_points, perp_extent, strip_coordinate, PLGraphMap, Point, PolyPath, StripParams,
    Tolerances,
};
pub use integrate::{
    cumulative_profile, estimate_length, estimate_lengths_coupled, segment_length_oracle,
    LengthEstimate, Method, SampleBudget,
};
pub use reparam::{
    disjoint_interval_count, equicontinuity_delta, modulus_of_continuity,
    standard_representation, EquicontinuityReport, ReparamResult,
};
pub use homotopy::{
    hausdorff, homotopy_signature, segment_in_closure, shorten, validate_domain,
    visibility_geodesic, DomainDiagnostics, GeodesicResult, HomotopySignature, PolygonalDomain,
};
