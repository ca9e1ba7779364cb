use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{GeomError, Result};
use crate::hull::convex_hull;
use crate::linalg::{det_in_place, factorial, Matrix, Vector};

/// Vertex dedup tolerance (absolute).
pub const VERTEX_TOL: f64 = 1e-10;

/// Both descriptions of a polytope plus a simplicial decomposition of its boundary.
#[derive(Debug, Clone)]
pub struct PolytopeData {
    pub dim: usize,
    /// Extreme points.
    pub vertices: Vec<Vector>,
    /// Irredundant facets with unit outer normals: `normals[i] . x <= offsets[i]`.
    pub normals: Vec<Vector>,
    pub offsets: Vec<f64>,
    /// Boundary simplices, as index lists into `points`.
    pub cells: Vec<Vec<usize>>,
    pub points: Vec<Vector>,
    /// Interior point used as cone apex.
    pub interior: Vector,
    pub volume: f64,
}

impl PolytopeData {
    pub fn from_points(points: &[Vector]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        let raw: Vec<Vec<f64>> = points.iter().map(|p| p.iter().copied().collect()).collect();
        let hull = convex_hull(&raw, dim)?;

        let mut used = vec![usize::MAX; raw.len()];
        let mut pts = Vec::new();
        let mut cells = Vec::with_capacity(hull.facets.len());
        for f in &hull.facets {
            let cell = f
                .vertices
                .iter()
                .map(|&i| {
                    if used[i] == usize::MAX {
                        used[i] = pts.len();
                        pts.push(points[i].clone());
                    }
                    used[i]
                })
                .collect();
            cells.push(cell);
        }
        let mut vertices: Vec<Vector> = Vec::with_capacity(hull.vertices.len());
        for &i in &hull.vertices {
            let p = &points[i];
            if !vertices.iter().any(|v| (v - p).amax() <= VERTEX_TOL) {
                vertices.push(p.clone());
            }
        }
        let normals = hull
            .planes
            .iter()
            .map(|p| Vector::from_column_slice(&p.normal))
            .collect();
        let offsets = hull.planes.iter().map(|p| p.offset).collect();
        let interior = vertices.iter().fold(Vector::zeros(dim), |acc, v| acc + v) / vertices.len() as f64;

        let mut data = PolytopeData {
            dim,
            vertices,
            normals,
            offsets,
            cells,
            points: pts,
            interior,
            volume: 0.0,
        };
        data.volume = data.cones().map(|(_, v)| v).sum();
        if !(data.volume > 0.0) {
            return Err(GeomError::DegenerateBody("zero volume".into()));
        }
        Ok(data)
    }

    /// Cones from the interior point over each boundary cell: (cell index, volume).
    pub fn cones(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.dim;
        let nf = factorial(n);
        let mut m = vec![0.0; n * n];
        self.cells.iter().enumerate().map(move |(ci, cell)| {
            for (r, &p) in cell.iter().enumerate() {
                for c in 0..n {
                    m[r * n + c] = self.points[p][c] - self.interior[c];
                }
            }
            (ci, det_in_place(&mut m, n).abs() / nf)
        })
    }

    /// Simplices (apex first) of the cone decomposition.
    pub fn simplex(&self, cell: usize) -> Vec<&Vector> {
        let mut s = Vec::with_capacity(self.dim + 1);
        s.push(&self.interior);
        s.extend(self.cells[cell].iter().map(|&i| &self.points[i]));
        s
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i (n_i . x - o_i)`: negative inside, positive outside.
    pub fn violation(&self, x: &Vector) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.dot(x) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter_bound(&self) -> f64 {
        let mut d: f64 = 0.0;
        for v in &self.vertices {
            d = d.max((v - &self.interior).norm());
        }
        2.0 * d
    }
}

#[derive(Debug, Clone)]
pub struct HPolytope {
    a: Matrix,
    b: Vector,
    data: Arc<PolytopeData>,
}

impl PartialEq for HPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl HPolytope {
    /// `{x : A x <= b}`. Fails if the system is unbounded, empty or flat.
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        Self::check_shape(&a, &b)?;
        let data = resolve_h(&a, &b)?;
        Ok(HPolytope {
            a,
            b,
            data: Arc::new(data),
        })
    }

    /// Build when the vertex set is already known (polar of a V-polytope).
    pub(crate) fn with_vertices(a: Matrix, b: Vector, vertices: &[Vector]) -> Result<Self> {
        Self::check_shape(&a, &b)?;
        let data = PolytopeData::from_points(vertices)?;
        Ok(HPolytope {
            a,
            b,
            data: Arc::new(data),
        })
    }

    fn check_shape(a: &Matrix, b: &Vector) -> Result<()> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(GeomError::DimensionMismatch {
                expected: m,
                got: b.len(),
            });
        }
        if n < 2 {
            return Err(GeomError::InvalidBody("dimension must be at least 2".into()));
        }
        if m < n + 1 {
            return Err(GeomError::InvalidBody(format!(
                "{m} inequalities cannot bound a body in dimension {n}"
            )));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidBody("non-finite entry".into()));
        }
        if a.row_iter().any(|r| r.amax() == 0.0) {
            return Err(GeomError::InvalidBody("zero row in A".into()));
        }
        Ok(())
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn data(&self) -> &PolytopeData {
        &self.data
    }
}

#[derive(Debug, Clone)]
pub struct VPolytope {
    vertices: Vec<Vector>,
    data: Arc<PolytopeData>,
}

impl PartialEq for VPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl VPolytope {
    /// Convex hull of `points`; redundant points are dropped.
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.len());
        if n < 2 {
            return Err(GeomError::InvalidBody("dimension must be at least 2".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let data = PolytopeData::from_points(&points)?;
        Ok(VPolytope {
            vertices: data.vertices.clone(),
            data: Arc::new(data),
        })
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn data(&self) -> &PolytopeData {
        &self.data
    }
}

/// Center and radius of the largest ball inside `{Ax <= b}`.
pub fn chebyshev_center(a: &Matrix, b: &Vector) -> Result<(Vector, f64)> {
    let (m, n) = a.shape();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let r = lp.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..m {
        let row = a.row(i);
        let mut terms: Vec<_> = xs.iter().zip(row.iter()).map(|(&v, &c)| (v, c)).collect();
        terms.push((r, row.norm()));
        lp.add_constraint(&terms[..], ComparisonOp::Le, b[i]);
    }
    let sol = lp.solve().map_err(|e| match e {
        minilp::Error::Unbounded => GeomError::InvalidBody("inequalities describe an unbounded set".into()),
        minilp::Error::Infeasible => GeomError::DegenerateBody("inequalities are infeasible".into()),
    })?;
    let c = Vector::from_iterator(n, xs.iter().map(|&v| sol[v]));
    Ok((c, sol[r]))
}

fn resolve_h(a: &Matrix, b: &Vector) -> Result<PolytopeData> {
    let n = a.ncols();
    let (c, radius) = chebyshev_center(a, b)?;
    let scale = b.amax().max(1.0);
    if radius <= 1e-12 * scale {
        return Err(GeomError::DegenerateBody("empty interior".into()));
    }
    // polar of (P - c) is the hull of a_i / (b_i - a_i.c)
    let dual: Vec<Vector> = a
        .row_iter()
        .zip(b.iter())
        .map(|(row, &bi)| {
            let row = row.transpose();
            let slack = bi - row.dot(&c);
            row / slack
        })
        .collect();
    let raw: Vec<Vec<f64>> = dual.iter().map(|p| p.iter().copied().collect()).collect();
    let hull = convex_hull(&raw, n).map_err(|_| GeomError::InvalidBody("inequalities describe an unbounded set".into()))?;
    let dscale = dual.iter().map(|d| d.amax()).fold(0.0, f64::max);
    let mut verts = Vec::with_capacity(hull.planes.len());
    for p in &hull.planes {
        if p.offset <= 1e-12 * dscale {
            return Err(GeomError::InvalidBody("inequalities describe an unbounded set".into()));
        }
        let w = Vector::from_column_slice(&p.normal);
        verts.push(&c + w / p.offset);
    }
    PolytopeData::from_points(&verts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_h() -> HPolytope {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        HPolytope::new(a, Vector::from_element(4, 1.0)).unwrap()
    }

    #[test]
    fn square_from_inequalities() {
        let p = square_h();
        assert_eq!(p.data().vertices.len(), 4);
        assert!((p.data().volume - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_strip_rejected() {
        let a = Matrix::from_row_slice(3, 2, &[0.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
        let err = HPolytope::new(a, Vector::from_vec(vec![1.0, 1.0, 2.0])).unwrap_err();
        assert!(matches!(err, GeomError::InvalidBody(_)), "{err:?}");
    }

    #[test]
    fn redundant_inequalities_dropped() {
        let a = Matrix::from_row_slice(5, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 1.0]);
        let p = HPolytope::new(a, Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0, 5.0])).unwrap();
        assert_eq!(p.data().normals.len(), 4);
    }

    #[test]
    fn interior_points_are_dropped() {
        let pts = vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0]),
            Vector::from_vec(vec![0.2, 0.2]),
        ];
        let v = VPolytope::new(pts).unwrap();
        assert_eq!(v.vertices().len(), 3);
        assert!((v.data().volume - 0.5).abs() < 1e-15);
    }
}
