//! Polytopes, ellipsoids and the operations between them.

mod affine;
mod body;
mod ellipsoid;
mod json;
mod ops;
mod polytope;

pub use affine::AffineMap;
pub use body::{polytope_moments, BodyRep, ConvexBody, ExactMoments, CONTAINS_TOL};
pub use ellipsoid::Ellipsoid;
pub use json::{body_from_json, body_to_json, BodyJson};
pub use ops::{
    affine_image, convex_hull_union, difference_body, minkowski_sum, minkowski_sum_bodies,
    minkowski_sum_points, polar, polar0, scale, translate, POLAR_MARGIN,
};
pub use polytope::{chebyshev_center, HPolytope, PolytopeData, VPolytope, VERTEX_TOL};
