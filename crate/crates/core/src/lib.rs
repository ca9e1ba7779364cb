//! Convex bodies at desk-scale dimensions: exact polytope geometry, isotropic
//! positions, Ball bodies, log-Laplace perturbations, covering nets, volume
//! products and M-ellipsoids.

pub mod ballbodies;
pub mod bodies;
pub mod covering;
pub mod error;
pub mod hull;
pub mod laplace;
pub mod linalg;
pub mod mposition;
pub mod randgeom;
pub mod report;
pub mod santalo;
pub mod suites;
pub mod zoo;

pub use bodies::{AffineMap, ConvexBody, Ellipsoid, HPolytope, VPolytope};
pub use error::{GeomError, Result};
