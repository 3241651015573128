//! Construction and numerical verification of scalar-flat Kähler metrics on
//! unbounded toric 4-manifolds from moment polytope data.
//!
//! The pipeline: validate a moment polytope ([`polytope`]), derive the exact
//! chart constants ([`constants`]), assemble the harmonic ansatz and its
//! moment map ([`ansatz`]), then verify the constructive claims numerically:
//! metric nondegeneracy, scalar flatness, boundary behavior at the polytope
//! edges, cone angles, and asymptotic geometry.

pub mod ansatz;
pub mod asymptotics;
pub mod boundary;
pub mod conical;
pub mod constants;
pub mod geometry;
pub mod polytope;
pub mod rational;
pub mod sample;
pub mod vec2;
