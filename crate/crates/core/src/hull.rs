//! Quickhull in arbitrary (small) dimension.
//!
//! Produces a simplicial boundary: every facet carries exactly `dim` vertex
//! indices, so coplanar faces (a cube's squares, say) come out triangulated.
//! Coplanar pieces are grouped afterwards into merged supporting planes.

use std::collections::HashMap;

use crate::error::{GeomError, Result};
use crate::linalg::det_in_place;

#[derive(Debug, Clone)]
pub struct HullFacet {
    /// Indices into the input point slice.
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// `<normal, x> <= offset` on the hull.
    pub offset: f64,
    /// Index of the merged plane this facet belongs to.
    pub plane: usize,
}

#[derive(Debug, Clone)]
pub struct HullPlane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexHull {
    pub dim: usize,
    pub facets: Vec<HullFacet>,
    pub planes: Vec<HullPlane>,
    /// Interior point (centroid of the starting simplex).
    pub interior: Vec<f64>,
    /// Indices of extreme points (vertices of the hull).
    pub vertices: Vec<usize>,
    pub eps: f64,
}

struct WorkFacet {
    verts: Vec<usize>,
    nbrs: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
    outside: Vec<usize>,
    furthest: usize,
    furthest_dist: f64,
    alive: bool,
}

const NONE: usize = usize::MAX;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Builder<'a> {
    dim: usize,
    pts: &'a [Vec<f64>],
    facets: Vec<WorkFacet>,
    interior: Vec<f64>,
    eps: f64,
    scratch: Vec<f64>,
}

impl<'a> Builder<'a> {
    fn point(&self, i: usize) -> &[f64] {
        &self.pts[i]
    }

    fn dist(&self, f: usize, p: usize) -> f64 {
        let fa = &self.facets[f];
        dot(&fa.normal, self.point(p)) - fa.offset
    }

    /// Oriented unit normal of the hyperplane through `verts`.
    fn plane_through(&mut self, verts: &[usize]) -> (Vec<f64>, f64) {
        let n = self.dim;
        let m = n - 1;
        let base = self.point(verts[0]).to_vec();
        let mut edges = vec![0.0; m * n];
        for (r, &v) in verts[1..].iter().enumerate() {
            let p = self.point(v);
            for c in 0..n {
                edges[r * n + c] = p[c] - base[c];
            }
        }
        let mut normal = vec![0.0; n];
        if m == 0 {
            normal[0] = 1.0;
        } else {
            self.scratch.resize(m * m, 0.0);
            for (j, nj) in normal.iter_mut().enumerate() {
                for r in 0..m {
                    let mut cc = 0;
                    for c in 0..n {
                        if c != j {
                            self.scratch[r * m + cc] = edges[r * n + c];
                            cc += 1;
                        }
                    }
                }
                let d = det_in_place(&mut self.scratch, m);
                *nj = if j % 2 == 0 { d } else { -d };
            }
        }
        let norm = dot(&normal, &normal).sqrt();
        if norm > 0.0 {
            normal.iter_mut().for_each(|x| *x /= norm);
        }
        let mut offset = dot(&normal, &base);
        if dot(&normal, &self.interior) - offset > 0.0 {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        (normal, offset)
    }

    fn add_facet(&mut self, verts: Vec<usize>, nbrs: Vec<usize>) -> usize {
        let (normal, offset) = self.plane_through(&verts);
        self.facets.push(WorkFacet {
            verts,
            nbrs,
            normal,
            offset,
            outside: Vec::new(),
            furthest: NONE,
            furthest_dist: 0.0,
            alive: true,
        });
        self.facets.len() - 1
    }

    fn assign(&mut self, p: usize, candidates: &[usize]) {
        let mut best = NONE;
        let mut best_d = self.eps;
        for &f in candidates {
            let d = self.dist(f, p);
            if d > best_d {
                best_d = d;
                best = f;
            }
        }
        if best != NONE {
            let fa = &mut self.facets[best];
            fa.outside.push(p);
            if best_d > fa.furthest_dist {
                fa.furthest_dist = best_d;
                fa.furthest = p;
            }
        }
    }
}

fn initial_simplex(pts: &[Vec<f64>], dim: usize, eps: f64) -> Result<Vec<usize>> {
    let mut lo = 0;
    for (i, p) in pts.iter().enumerate() {
        if p[0] < pts[lo][0] {
            lo = i;
        }
    }
    let mut chosen = vec![lo];
    let origin = pts[lo].clone();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..dim {
        let mut best = NONE;
        let mut best_d = 0.0;
        let mut best_r = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            let mut r: Vec<f64> = p.iter().zip(&origin).map(|(a, b)| a - b).collect();
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let d = dot(&r, &r).sqrt();
            if d > best_d {
                best_d = d;
                best = i;
                best_r = r;
            }
        }
        if best == NONE || best_d <= 10.0 * eps {
            return Err(GeomError::DegenerateBody(format!(
                "point set spans only {} of {} dimensions",
                basis.len(),
                dim
            )));
        }
        best_r.iter_mut().for_each(|x| *x /= best_d);
        basis.push(best_r);
        chosen.push(best);
    }
    Ok(chosen)
}

/// Convex hull of `points` (each of length `dim`, `dim >= 2`).
pub fn convex_hull(points: &[Vec<f64>], dim: usize) -> Result<ConvexHull> {
    if dim < 2 {
        return Err(GeomError::InvalidBody("hulls need dimension >= 2".into()));
    }
    if points.len() < dim + 1 {
        return Err(GeomError::DegenerateBody(format!(
            "{} points cannot span dimension {dim}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(GeomError::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(GeomError::InvalidBody("non-finite coordinate".into()));
    }
    let scale = points
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1e-300);
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(points, dim, eps)?;
    let mut interior = vec![0.0; dim];
    for &i in &simplex {
        for c in 0..dim {
            interior[c] += points[i][c] / (dim + 1) as f64;
        }
    }

    let mut b = Builder {
        dim,
        pts: points,
        facets: Vec::new(),
        interior,
        eps,
        scratch: Vec::new(),
    };

    // facet i omits simplex[i]; its neighbour opposite simplex[j] is facet j
    for i in 0..=dim {
        let verts: Vec<usize> = (0..=dim).filter(|&j| j != i).map(|j| simplex[j]).collect();
        let nbrs: Vec<usize> = (0..=dim).filter(|&j| j != i).collect();
        b.add_facet(verts, nbrs);
    }
    let initial: Vec<usize> = (0..=dim).collect();
    let mut in_simplex = vec![false; points.len()];
    for &i in &simplex {
        in_simplex[i] = true;
    }
    for p in 0..points.len() {
        if !in_simplex[p] {
            b.assign(p, &initial);
        }
    }

    let mut stack: Vec<usize> = initial
        .iter()
        .copied()
        .filter(|&f| !b.facets[f].outside.is_empty())
        .collect();
    let mut visible_mark: Vec<u32> = Vec::new();
    let mut stamp: u32 = 0;

    while let Some(f) = stack.pop() {
        if !b.facets[f].alive || b.facets[f].outside.is_empty() {
            continue;
        }
        let apex = b.facets[f].furthest;
        stamp += 1;
        visible_mark.resize(b.facets.len(), 0);
        // 2*stamp marks visible, 2*stamp+1 marks checked-invisible
        let vis_tag = stamp * 2;
        let invis_tag = stamp * 2 + 1;
        let mut visible = vec![f];
        visible_mark[f] = vis_tag;
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut qi = 0;
        while qi < visible.len() {
            let v = visible[qi];
            qi += 1;
            for k in 0..dim {
                let g = b.facets[v].nbrs[k];
                if visible_mark[g] == vis_tag {
                    continue;
                }
                if visible_mark[g] != invis_tag && b.dist(g, apex) > eps {
                    visible_mark[g] = vis_tag;
                    visible.push(g);
                } else {
                    visible_mark[g] = invis_tag;
                    horizon.push((v, k));
                }
            }
        }

        let mut new_facets = Vec::with_capacity(horizon.len());
        let mut ridges: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &(v, k) in &horizon {
            let mut verts = b.facets[v].verts.clone();
            verts[k] = apex;
            let hidden = b.facets[v].nbrs[k];
            let mut nbrs = vec![NONE; dim];
            nbrs[k] = hidden;
            let nf = b.add_facet(verts.clone(), nbrs);
            if let Some(slot) = b.facets[hidden].nbrs.iter().position(|&x| x == v) {
                b.facets[hidden].nbrs[slot] = nf;
            }
            for j in 0..dim {
                if j == k {
                    continue;
                }
                let mut key: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &x)| x)
                    .collect();
                key.sort_unstable();
                if let Some((other, oslot)) = ridges.remove(&key) {
                    b.facets[nf].nbrs[j] = other;
                    b.facets[other].nbrs[oslot] = nf;
                } else {
                    ridges.insert(key, (nf, j));
                }
            }
            new_facets.push(nf);
        }

        let mut orphans = Vec::new();
        for &v in &visible {
            let fa = &mut b.facets[v];
            fa.alive = false;
            orphans.append(&mut fa.outside);
        }
        for p in orphans {
            if p != apex {
                b.assign(p, &new_facets);
            }
        }
        for &nf in &new_facets {
            if !b.facets[nf].outside.is_empty() {
                stack.push(nf);
            }
        }
    }

    // compact alive facets
    let mut remap = vec![NONE; b.facets.len()];
    let mut alive_ids = Vec::new();
    for (i, fa) in b.facets.iter().enumerate() {
        if fa.alive {
            remap[i] = alive_ids.len();
            alive_ids.push(i);
        }
    }

    // group coplanar neighbours with a union-find
    let mut parent: Vec<usize> = (0..alive_ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let merge_tol = 1e-9;
    for (ci, &fi) in alive_ids.iter().enumerate() {
        let fa = &b.facets[fi];
        for &g in &fa.nbrs {
            let cg = remap[g];
            if cg == NONE || cg <= ci {
                continue;
            }
            let gb = &b.facets[g];
            let dn = fa
                .normal
                .iter()
                .zip(&gb.normal)
                .map(|(a, c)| (a - c).abs())
                .fold(0.0, f64::max);
            if dn < merge_tol && (fa.offset - gb.offset).abs() < merge_tol * scale {
                let (ra, rb) = (find(&mut parent, ci), find(&mut parent, cg));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut plane_of_root = HashMap::new();
    let mut planes: Vec<HullPlane> = Vec::new();
    let mut facets = Vec::with_capacity(alive_ids.len());
    for (ci, &fi) in alive_ids.iter().enumerate() {
        let root = find(&mut parent, ci);
        let fa = &b.facets[fi];
        let plane = *plane_of_root.entry(root).or_insert_with(|| {
            let rf = &b.facets[alive_ids[root]];
            planes.push(HullPlane {
                normal: rf.normal.clone(),
                offset: rf.offset,
            });
            planes.len() - 1
        });
        facets.push(HullFacet {
            vertices: fa.verts.clone(),
            normal: fa.normal.clone(),
            offset: fa.offset,
            plane,
        });
    }
    // merged plane offset: max over incident vertices keeps every point inside
    for f in &facets {
        for &v in &f.vertices {
            let pl = &mut planes[f.plane];
            let d = dot(&pl.normal, &points[v]);
            if d > pl.offset {
                pl.offset = d;
            }
        }
    }

    let vertices = extreme_vertices(points, dim, &facets, &planes);

    Ok(ConvexHull {
        dim,
        facets,
        planes,
        interior: b.interior,
        vertices,
        eps,
    })
}

/// A boundary point is a vertex iff the merged planes through it have full rank.
fn extreme_vertices(
    points: &[Vec<f64>],
    dim: usize,
    facets: &[HullFacet],
    planes: &[HullPlane],
) -> Vec<usize> {
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for f in facets {
        for &v in &f.vertices {
            let list = incident.entry(v).or_default();
            if !list.contains(&f.plane) {
                list.push(f.plane);
            }
        }
    }
    let _ = points;
    let mut out: Vec<usize> = incident
        .into_iter()
        .filter(|(_, pls)| {
            if pls.len() < dim {
                return false;
            }
            if pls.len() == dim || dim <= 1 {
                // quick path: determinant of the normals
                let mut m = Vec::with_capacity(dim * dim);
                for &p in pls.iter().take(dim) {
                    m.extend_from_slice(&planes[p].normal);
                }
                if pls.len() == dim {
                    return det_in_place(&mut m, dim).abs() > 1e-9;
                }
            }
            rank(pls.iter().map(|&p| planes[p].normal.as_slice()), dim) == dim
        })
        .map(|(v, _)| v)
        .collect();
    out.sort_unstable();
    out
}

fn rank<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut r = row.to_vec();
        for b in &basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&r, &r).sqrt();
        if norm > 1e-7 {
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
            if basis.len() == dim {
                break;
            }
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize) -> Vec<Vec<f64>> {
        (0..1usize << n)
            .map(|m| {
                (0..n)
                    .map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn square_with_interior_points() {
        let mut pts = cube(2);
        pts.push(vec![0.0, 0.0]);
        pts.push(vec![0.5, -0.2]);
        pts.push(vec![1.0, 0.0]); // on an edge
        let h = convex_hull(&pts, 2).unwrap();
        assert_eq!(h.vertices, vec![0, 1, 2, 3]);
        assert_eq!(h.planes.len(), 4);
    }

    #[test]
    fn cube_planes_merge() {
        for n in 2..=5 {
            let h = convex_hull(&cube(n), n).unwrap();
            assert_eq!(h.planes.len(), 2 * n, "n = {n}");
            assert_eq!(h.vertices.len(), 1 << n);
            for p in &h.planes {
                assert!((p.offset - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_input_is_rejected() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(convex_hull(&pts, 3), Err(GeomError::DegenerateBody(_))));
    }

    #[test]
    fn neighbours_are_symmetric() {
        let pts = crate::linalg::sphere_directions(4, 200)
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect::<Vec<Vec<f64>>>();
        let h = convex_hull(&pts, 4).unwrap();
        assert_eq!(h.vertices.len(), 200);
        // every point inside every facet plane
        for f in &h.facets {
            for p in &pts {
                assert!(dot(&f.normal, p) - f.offset < 1e-9);
            }
        }
    }
}
