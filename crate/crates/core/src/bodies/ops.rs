use super::{AffineMap, BodyRep, ConvexBody, Ellipsoid, HPolytope, VPolytope};
use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// Interiority margin required before taking a polar.
pub const POLAR_MARGIN: f64 = 1e-9;

/// `(K - x)° = { y : <z - x, y> <= 1 for all z in K }`.
pub fn polar(k: &ConvexBody, x: &Vector) -> Result<ConvexBody> {
    let n = k.dim();
    if x.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let margin = k.margin(x);
    if margin < -POLAR_MARGIN {
        return Err(GeomError::PointNotInterior { margin });
    }
    if margin < POLAR_MARGIN {
        return Err(GeomError::UnboundedResult { margin });
    }
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let p = e.inv_shape();
            let d = e.center() - x;
            let q = p - &d * d.transpose();
            let q = (&q + q.transpose()) * 0.5;
            let qinv = q
                .clone()
                .try_inverse()
                .ok_or(GeomError::UnboundedResult { margin })?;
            let qd = &qinv * &d;
            let center = -&qd;
            let shape = q / (1.0 + d.dot(&qd));
            Ok(Ellipsoid::new(center, shape)?.into())
        }
        BodyRep::V(vp) => {
            let d = vp.data();
            let rows: Vec<f64> = d.vertices.iter().flat_map(|v| (v - x).iter().copied().collect::<Vec<_>>()).collect();
            let a = Matrix::from_row_slice(d.vertices.len(), n, &rows);
            let b = Vector::from_element(d.vertices.len(), 1.0);
            let verts = dual_points(k, x);
            Ok(HPolytope::with_vertices(a, b, &verts)?.into())
        }
        BodyRep::H(_) => Ok(VPolytope::new(dual_points(k, x))?.into()),
    }
}

/// Vertices of `(K - x)°`: facet normals scaled by inverse facet distance.
fn dual_points(k: &ConvexBody, x: &Vector) -> Vec<Vector> {
    let d = k.polytope_data().expect("polytope");
    d.normals
        .iter()
        .zip(&d.offsets)
        .map(|(a, b)| a / (b - a.dot(x)))
        .collect()
}

/// Polar about the origin.
pub fn polar0(k: &ConvexBody) -> Result<ConvexBody> {
    polar(k, &Vector::zeros(k.dim()))
}

pub fn minkowski_sum(k: &VPolytope, l: &VPolytope) -> Result<VPolytope> {
    minkowski_sum_points(k.vertices(), l.vertices())
}

/// Minkowski sum of two finite point sets' hulls. Operands may be lower dimensional
/// as long as the sum is full dimensional.
pub fn minkowski_sum_points(k: &[Vector], l: &[Vector]) -> Result<VPolytope> {
    let n = k.first().map_or(0, |p| p.len());
    if let Some(p) = l.iter().find(|p| p.len() != n) {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let mut pts = Vec::with_capacity(k.len() * l.len());
    for a in k {
        for b in l {
            pts.push(a + b);
        }
    }
    VPolytope::new(pts)
}

/// `K + L` for arbitrary bodies; ellipsoids enter through boundary samples.
pub fn minkowski_sum_bodies(k: &ConvexBody, l: &ConvexBody) -> Result<ConvexBody> {
    if k.dim() != l.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    if let (Some(a), Some(b)) = (k.as_ellipsoid(), l.as_ellipsoid()) {
        if a.shape() == b.shape() {
            // homothetic ellipsoids add exactly
            return Ok(Ellipsoid::new(a.center() + b.center(), a.shape() / 4.0)?.into());
        }
    }
    Ok(minkowski_sum_points(&k.polytope_points(), &l.polytope_points())?.into())
}

/// `K - K`.
pub fn difference_body(k: &ConvexBody) -> Result<ConvexBody> {
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let n = e.dim();
            Ok(Ellipsoid::new(Vector::zeros(n), e.shape() / 4.0)?.into())
        }
        _ => {
            let v = k.vertices()?;
            let neg: Vec<Vector> = v.iter().map(|p| -p).collect();
            Ok(minkowski_sum_points(v, &neg)?.into())
        }
    }
}

/// `conv(K ∪ L)`.
pub fn convex_hull_union(k: &ConvexBody, l: &ConvexBody) -> Result<ConvexBody> {
    if k.dim() != l.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    if k == l {
        return Ok(k.clone());
    }
    let mut pts = k.polytope_points();
    pts.extend(l.polytope_points());
    Ok(VPolytope::new(pts)?.into())
}

pub fn affine_image(k: &ConvexBody, t: &AffineMap) -> Result<ConvexBody> {
    if k.dim() != t.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k.dim(),
            got: t.dim(),
        });
    }
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let li = t.inverse_linear();
            let m = li.transpose() * e.shape() * li;
            Ok(Ellipsoid::new(t.apply(e.center()), (&m + m.transpose()) * 0.5)?.into())
        }
        BodyRep::V(v) => Ok(VPolytope::new(v.vertices().iter().map(|p| t.apply(p)).collect())?.into()),
        BodyRep::H(h) => {
            let a = h.a() * t.inverse_linear();
            let b = h.b() + &a * t.shift();
            let verts: Vec<Vector> = h.data().vertices.iter().map(|p| t.apply(p)).collect();
            Ok(HPolytope::with_vertices(a, b, &verts)?.into())
        }
    }
}

pub fn translate(k: &ConvexBody, v: &Vector) -> Result<ConvexBody> {
    affine_image(k, &AffineMap::translation(v.clone()))
}

pub fn scale(k: &ConvexBody, s: f64) -> Result<ConvexBody> {
    affine_image(k, &AffineMap::scaling(s, k.dim())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> ConvexBody {
        let pts = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        ConvexBody::vpolytope(pts.iter().map(|p| Vector::from_row_slice(p)).collect()).unwrap()
    }

    #[test]
    fn polar_of_square_is_cross_polytope() {
        let p = polar0(&square()).unwrap();
        let mut v: Vec<(i64, i64)> = p
            .vertices()
            .unwrap()
            .iter()
            .map(|x| ((x[0] * 1e6).round() as i64, (x[1] * 1e6).round() as i64))
            .collect();
        v.sort();
        assert_eq!(v, vec![(-1000000, 0), (0, -1000000), (0, 1000000), (1000000, 0)]);
        // membership oracle: |y1| + |y2| <= 1
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let y = random_unit(&mut rng, 2) * 1.3 * rand::Rng::random::<f64>(&mut rng);
            let inside = y[0].abs() + y[1].abs() <= 1.0;
            if (y[0].abs() + y[1].abs() - 1.0).abs() > 1e-9 {
                assert_eq!(p.contains(&y), inside);
            }
        }
    }

    #[test]
    fn boundary_point_gives_unbounded_polar() {
        let err = polar(&square(), &Vector::from_vec(vec![1.0, 0.0])).unwrap_err();
        assert!(matches!(err, GeomError::UnboundedResult { .. }));
        let err = polar(&square(), &Vector::from_vec(vec![2.0, 0.0])).unwrap_err();
        assert!(matches!(err, GeomError::PointNotInterior { .. }));
    }

    #[test]
    fn ball_polar_inverts_radius() {
        let b = ConvexBody::ball(3, 2.0).unwrap();
        let p = polar0(&b).unwrap();
        let e = p.as_ellipsoid().unwrap();
        assert!((e.shape() - Matrix::identity(3, 3) * 4.0).amax() < 1e-12);
    }

    #[test]
    fn off_center_ellipsoid_polar_support_matches_gauge() {
        let e = ConvexBody::ellipsoid(
            Vector::from_vec(vec![0.2, -0.1]),
            Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
        )
        .unwrap();
        let p = polar0(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = random_unit(&mut rng, 2);
            assert!((p.support(&u) - e.gauge(&u).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn zonotope_from_segments() {
        let s1 = vec![Vector::from_vec(vec![-1.0, 0.0]), Vector::from_vec(vec![1.0, 0.0])];
        let s2 = vec![Vector::from_vec(vec![0.0, -1.0]), Vector::from_vec(vec![0.0, 1.0])];
        let z = minkowski_sum_points(&s1, &s2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sq = square();
        for _ in 0..100 {
            let u = random_unit(&mut rng, 2);
            assert!((z.data().support(&u) - sq.support(&u)).abs() < 1e-12);
        }
    }

    #[test]
    fn adding_the_origin_is_identity() {
        let sq = square();
        let z = minkowski_sum_points(sq.vertices().unwrap(), &[Vector::zeros(2)]).unwrap();
        assert_eq!(z.vertices(), sq.vertices().unwrap());
    }

    #[test]
    fn hull_union_of_square_and_scaled_cross() {
        let cross: Vec<Vector> = [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]]
            .iter()
            .map(|p| Vector::from_row_slice(p))
            .collect();
        let c = ConvexBody::vpolytope(cross).unwrap();
        let u = convex_hull_union(&square(), &c).unwrap();
        // shoelace on the octagon
        let oct = [[2.0, 0.0], [1.0, 1.0], [0.0, 2.0], [-1.0, 1.0], [-2.0, 0.0], [-1.0, -1.0], [0.0, -2.0], [1.0, -1.0]];
        let mut area = 0.0;
        for i in 0..8 {
            let (p, q) = (oct[i], oct[(i + 1) % 8]);
            area += p[0] * q[1] - p[1] * q[0];
        }
        area /= 2.0;
        assert!((u.volume() - area).abs() < 1e-12);
        assert_eq!(u.vertices().unwrap().len(), 4);
    }
}
