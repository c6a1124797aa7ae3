//! Conforming simplicial meshes in one to three dimensions, vertex stars, and the
//! nodal basis bookkeeping used by the deep compilation route.

mod generate;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cpwl::AffineFunc;
use crate::geometry::{self, dot, hyperplane_normal, GEOM_TOL};

pub use generate::*;

/// Absolute determinant below which a simplex counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Residual tolerance for the nodal interpolation conditions of a vertex star.
pub const INTERPOLATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("unsupported mesh dimension {0} (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("vertex {vertex} has {got} coordinates, expected {expected}")]
    VertexDimension {
        vertex: usize,
        got: usize,
        expected: usize,
    },
    #[error("simplex {simplex} has {got} vertices, expected {expected}")]
    SimplexArity {
        simplex: usize,
        got: usize,
        expected: usize,
    },
    #[error("simplex {simplex} references vertex {vertex} out of range")]
    VertexOutOfRange { simplex: usize, vertex: usize },
    #[error("simplex {simplex} is degenerate (|det| = {det:e})")]
    DegenerateSimplex { simplex: usize, det: f64 },
    #[error("simplices {a} and {b} do not meet in a shared face")]
    NonConforming { a: usize, b: usize },
    #[error("interpolation system for simplex {0} is singular")]
    SingularSystem(usize),
    #[error("vertex index {0} out of range")]
    NoSuchVertex(usize),
    #[error("boundary marker list has length {got}, expected {expected}")]
    BoundaryLength { got: usize, expected: usize },
}

/// A conforming simplicial grid with precomputed vertex-to-simplex adjacency.
#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    vertex_simplices: Vec<Vec<usize>>,
    // row-major inverse of each simplex's edge matrix, for barycentric coordinates
    inverse_edges: Vec<Vec<f64>>,
}

/// The patch of simplices around one vertex, with the affine extension of the vertex's
/// nodal basis function from every incident simplex.
#[derive(Clone, Debug)]
pub struct VertexStar {
    pub center: usize,
    pub incident: Vec<usize>,
    pub local_affines: Vec<AffineFunc>,
}

/// Builds and validates a mesh; boundary markers are derived from boundary facets.
pub fn build_mesh(
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
) -> Result<SimplicialMesh, MeshError> {
    let dim = vertices.first().map_or(0, Vec::len);
    SimplicialMesh::new(dim, vertices, simplices, None, true)
}

impl SimplicialMesh {
    /// Creates a mesh. With `validate`, the O(#simplices^2) conformity check runs too;
    /// range, arity and degeneracy checks always run.
    pub fn new(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        simplices: Vec<Vec<usize>>,
        boundary: Option<Vec<bool>>,
        validate: bool,
    ) -> Result<Self, MeshError> {
        if !(1..=3).contains(&dim) {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(MeshError::VertexDimension {
                    vertex: i,
                    got: v.len(),
                    expected: dim,
                });
            }
        }
        let mut vertex_simplices = vec![Vec::new(); vertices.len()];
        for (s, simplex) in simplices.iter().enumerate() {
            if simplex.len() != dim + 1 {
                return Err(MeshError::SimplexArity {
                    simplex: s,
                    got: simplex.len(),
                    expected: dim + 1,
                });
            }
            for &v in simplex {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { simplex: s, vertex: v });
                }
                vertex_simplices[v].push(s);
            }
        }
        let mut mesh = Self {
            dim,
            vertices,
            simplices,
            boundary: Vec::new(),
            vertex_simplices,
            inverse_edges: Vec::new(),
        };
        for s in 0..mesh.simplices.len() {
            let det = mesh.edge_determinant(s);
            let mut distinct = mesh.simplices[s].clone();
            distinct.sort_unstable();
            distinct.dedup();
            if det.abs() <= DEGENERACY_TOL || distinct.len() != dim + 1 {
                return Err(MeshError::DegenerateSimplex { simplex: s, det });
            }
            let p = mesh.simplex_points(s);
            let a = DMatrix::from_fn(dim, dim, |r, c| p[c + 1][r] - p[0][r]);
            let inv = a.try_inverse().ok_or(MeshError::SingularSystem(s))?;
            mesh.inverse_edges
                .push((0..dim * dim).map(|k| inv[(k / dim, k % dim)]).collect());
        }
        mesh.boundary = match boundary {
            Some(b) if b.len() != mesh.vertices.len() => {
                return Err(MeshError::BoundaryLength {
                    got: b.len(),
                    expected: mesh.vertices.len(),
                })
            }
            Some(b) => b,
            None => mesh.boundary_from_facets(),
        };
        if validate {
            mesh.check_conforming()?;
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    /// Indices of the simplices containing vertex `i`.
    pub fn incident(&self, i: usize) -> &[usize] {
        &self.vertex_simplices[i]
    }

    pub fn bounding_box(&self) -> geometry::BoundingBox {
        geometry::BoundingBox::around(&self.vertices)
    }

    fn simplex_points(&self, s: usize) -> Vec<&[f64]> {
        self.simplices[s]
            .iter()
            .map(|&v| self.vertices[v].as_slice())
            .collect()
    }

    /// Determinant of the d x d edge matrix of simplex `s`.
    pub fn edge_determinant(&self, s: usize) -> f64 {
        let p = self.simplex_points(s);
        let d = self.dim;
        DMatrix::from_fn(d, d, |r, c| p[r + 1][c] - p[0][c]).determinant()
    }

    /// Barycentric coordinates of `x` with respect to simplex `s`.
    pub fn barycentric(&self, s: usize, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim;
        let p0 = &self.vertices[self.simplices[s][0]];
        let inv = &self.inverse_edges[s];
        let mut out = vec![0.0; d + 1];
        for r in 0..d {
            out[r + 1] = (0..d).map(|c| inv[r * d + c] * (x[c] - p0[c])).sum();
        }
        out[0] = 1.0 - out[1..].iter().sum::<f64>();
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    /// Simplices containing `x` (closed, barycentric tolerance [`GEOM_TOL`]) together
    /// with the barycentric coordinates.
    pub fn locate(&self, x: &[f64]) -> Vec<(usize, Vec<f64>)> {
        (0..self.simplices.len())
            .filter_map(|s| {
                let lam = self.barycentric(s, x)?;
                lam.iter().all(|l| *l >= -GEOM_TOL).then_some((s, lam))
            })
            .collect()
    }

    /// Value at `x` of the finite element function with nodal values `coeffs`, extended by
    /// zero outside the mesh.
    pub fn eval_fem(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        for s in 0..self.simplices.len() {
            if let Some(lam) = self.barycentric(s, x) {
                if lam.iter().all(|l| *l >= -GEOM_TOL) {
                    return self.simplices[s]
                        .iter()
                        .zip(&lam)
                        .map(|(&v, l)| coeffs[v] * l)
                        .sum();
                }
            }
        }
        0.0
    }

    fn facets_of(&self, s: usize) -> impl Iterator<Item = (Vec<usize>, usize)> + '_ {
        let simplex = &self.simplices[s];
        (0..simplex.len()).map(move |omit| {
            let mut f: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != omit)
                .map(|(_, v)| *v)
                .collect();
            f.sort_unstable();
            (f, simplex[omit])
        })
    }

    fn boundary_from_facets(&self) -> Vec<bool> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for s in 0..self.simplices.len() {
            for (f, _) in self.facets_of(s) {
                *count.entry(f).or_default() += 1;
            }
        }
        let mut boundary = vec![false; self.vertices.len()];
        for (f, c) in count {
            if c == 1 {
                for v in f {
                    boundary[v] = true;
                }
            }
        }
        boundary
    }

    /// Pairwise conformity check. Two simplices conform when their interiors are disjoint
    /// and their intersection is the face spanned by their shared vertices.
    pub fn check_conforming(&self) -> Result<(), MeshError> {
        let n = self.simplices.len();
        let samples: Vec<Vec<Vec<f64>>> = (0..n).map(|s| self.boundary_samples(s)).collect();
        for a in 0..n {
            for b in a + 1..n {
                if !self.pair_conforms(a, b, &samples[a], &samples[b]) {
                    return Err(MeshError::NonConforming { a, b });
                }
            }
        }
        Ok(())
    }

    /// Barycentric lattice points (resolution 4) of simplex `s`, vertices included.
    fn boundary_samples(&self, s: usize) -> Vec<Vec<f64>> {
        const RES: usize = 4;
        let d = self.dim;
        let p = self.simplex_points(s);
        let mut out = Vec::new();
        let mut idx = vec![0usize; d + 1];
        fn rec(
            k: usize,
            left: usize,
            idx: &mut Vec<usize>,
            p: &[&[f64]],
            out: &mut Vec<Vec<f64>>,
        ) {
            let d1 = idx.len();
            if k == d1 - 1 {
                idx[k] = left;
                let mut x = vec![0.0; p[0].len()];
                for (j, w) in idx.iter().enumerate() {
                    for c in 0..x.len() {
                        x[c] += (*w as f64 / RES as f64) * p[j][c];
                    }
                }
                out.push(x);
                return;
            }
            for w in 0..=left {
                idx[k] = w;
                rec(k + 1, left - w, idx, p, out);
            }
        }
        rec(0, RES, &mut idx, &p, &mut out);
        let _ = d;
        out
    }

    fn pair_conforms(&self, a: usize, b: usize, sa: &[Vec<f64>], sb: &[Vec<f64>]) -> bool {
        // lattice points of one simplex lying in the other must have zero weight on
        // the vertices the two do not share
        let check = |from: usize, to: usize, pts: &[Vec<f64>]| {
            let other = &self.simplices[to];
            for x in pts {
                let Some(lam) = self.barycentric(to, x) else {
                    return false;
                };
                if lam.iter().all(|l| *l >= -GEOM_TOL) {
                    let Some(own) = self.barycentric(from, x) else {
                        return false;
                    };
                    for (k, &v) in self.simplices[from].iter().enumerate() {
                        if !other.contains(&v) && own[k] > 1e-9 {
                            return false;
                        }
                    }
                }
            }
            true
        };
        if !check(a, b, sa) || !check(b, a, sb) {
            return false;
        }
        // interiors must be separated by some facet plane of either simplex
        self.separated(a, b) || self.separated(b, a)
    }

    fn separated(&self, a: usize, b: usize) -> bool {
        let pb = self.simplex_points(b);
        for (facet, opposite) in self.facets_of(a) {
            let pts: Vec<&[f64]> = facet.iter().map(|&v| self.vertices[v].as_slice()).collect();
            let Some(n) = hyperplane_normal(&pts) else {
                continue;
            };
            let c = dot(&n, pts[0]);
            let side = dot(&n, &self.vertices[opposite]) - c;
            if pb.iter().all(|q| (dot(&n, q) - c) * side.signum() <= 1e-10) {
                return true;
            }
        }
        // In 3D two tetrahedra can also be separated by a plane spanned by an edge of each.
        if self.dim == 3 {
            let ea = edges(&self.simplices[a]);
            let eb = edges(&self.simplices[b]);
            let pa = self.simplex_points(a);
            for (i0, i1) in &ea {
                for (j0, j1) in &eb {
                    let u: Vec<f64> = (0..3).map(|c| self.vertices[*i1][c] - self.vertices[*i0][c]).collect();
                    let w: Vec<f64> = (0..3).map(|c| self.vertices[*j1][c] - self.vertices[*j0][c]).collect();
                    let n = [
                        u[1] * w[2] - u[2] * w[1],
                        u[2] * w[0] - u[0] * w[2],
                        u[0] * w[1] - u[1] * w[0],
                    ];
                    if geometry::norm(&n) < 1e-12 {
                        continue;
                    }
                    let (amin, amax) = project_range(&n, &pa);
                    let (bmin, bmax) = project_range(&n, &pb);
                    if amax <= bmin + 1e-10 || bmax <= amin + 1e-10 {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Local affine pieces of the nodal basis function of vertex `i`.
    pub fn vertex_star(&self, i: usize) -> Result<VertexStar, MeshError> {
        if i >= self.vertices.len() {
            return Err(MeshError::NoSuchVertex(i));
        }
        let d = self.dim;
        let incident = self.vertex_simplices[i].clone();
        let mut local_affines = Vec::with_capacity(incident.len());
        for &s in &incident {
            let simplex = &self.simplices[s];
            // rows [x_j^T, 1] c = delta_{ij}
            let a = DMatrix::from_fn(d + 1, d + 1, |r, c| {
                if c < d {
                    self.vertices[simplex[r]][c]
                } else {
                    1.0
                }
            });
            let rhs = DVector::from_fn(d + 1, |r, _| if simplex[r] == i { 1.0 } else { 0.0 });
            let sol = geometry::solve(a, rhs).ok_or(MeshError::SingularSystem(s))?;
            let g = AffineFunc::new(sol.iter().take(d).copied().collect(), sol[d]);
            for &v in simplex {
                let target = if v == i { 1.0 } else { 0.0 };
                if (g.eval(&self.vertices[v]) - target).abs() > 1e-9 {
                    return Err(MeshError::SingularSystem(s));
                }
            }
            local_affines.push(g);
        }
        Ok(VertexStar {
            center: i,
            incident,
            local_affines,
        })
    }

    /// Boundary facets of the star of vertex `i`, each as (facet vertices, opposite vertex
    /// in its simplex).
    pub fn star_boundary_facets(&self, i: usize) -> Vec<(Vec<usize>, usize)> {
        let mut count: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &s in &self.vertex_simplices[i] {
            for (f, opp) in self.facets_of(s) {
                count.entry(f).or_insert((0, opp)).0 += 1;
            }
        }
        let mut out: Vec<(Vec<usize>, usize)> = count
            .into_iter()
            .filter(|(_, (c, _))| *c == 1)
            .map(|(f, (_, opp))| (f, opp))
            .collect();
        out.sort();
        out
    }

    /// Outward half-spaces `{x : n . x <= c}` bounding the star of vertex `i`, one per
    /// boundary facet. Their intersection is the star when the star is convex.
    pub fn star_halfspaces(&self, i: usize) -> Vec<geometry::HalfSpace> {
        self.star_boundary_facets(i)
            .into_iter()
            .filter_map(|(facet, opp)| {
                let pts: Vec<&[f64]> = facet.iter().map(|&v| self.vertices[v].as_slice()).collect();
                let n = if self.dim == 1 {
                    // facet is a point; orient away from the opposite vertex
                    vec![1.0]
                } else {
                    hyperplane_normal(&pts)?
                };
                let c = dot(&n, pts[0]);
                let inner = dot(&n, &self.vertices[opp]) - c;
                Some(if inner > 0.0 {
                    geometry::HalfSpace::new(n.iter().map(|v| -v).collect(), -c)
                } else {
                    geometry::HalfSpace::new(n, c)
                })
            })
            .collect()
    }

    /// True iff the union of simplices around vertex `i` is convex: every vertex of the
    /// star lies weakly inside every boundary facet's supporting half-space.
    pub fn is_locally_convex(&self, i: usize) -> bool {
        let star_vertices: Vec<usize> = {
            let mut v: Vec<usize> = self.vertex_simplices[i]
                .iter()
                .flat_map(|&s| self.simplices[s].iter().copied())
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        self.star_halfspaces(i).iter().all(|h| {
            star_vertices
                .iter()
                .all(|&v| h.contains(&self.vertices[v], GEOM_TOL))
        })
    }

    /// Vertices whose stars are not convex.
    pub fn non_convex_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| !self.is_locally_convex(i))
            .collect()
    }

    /// Maximum number of simplices sharing one vertex.
    pub fn compute_kh(&self) -> usize {
        self.vertex_simplices.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Inradius / circumradius per simplex. One-dimensional elements report 1.
    pub fn shape_regularity(&self) -> Vec<f64> {
        (0..self.simplices.len())
            .map(|s| self.radius_ratio(s))
            .collect()
    }

    fn radius_ratio(&self, s: usize) -> f64 {
        let p = self.simplex_points(s);
        let d = self.dim;
        if d == 1 {
            return 1.0;
        }
        let volume = self.edge_determinant(s).abs() / if d == 2 { 2.0 } else { 6.0 };
        // facet measures
        let facet_measure = |omit: usize| -> f64 {
            let q: Vec<&[f64]> = p
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != omit)
                .map(|(_, v)| *v)
                .collect();
            if d == 2 {
                let e: Vec<f64> = (0..2).map(|c| q[1][c] - q[0][c]).collect();
                geometry::norm(&e)
            } else {
                let u: Vec<f64> = (0..3).map(|c| q[1][c] - q[0][c]).collect();
                let w: Vec<f64> = (0..3).map(|c| q[2][c] - q[0][c]).collect();
                let n = [
                    u[1] * w[2] - u[2] * w[1],
                    u[2] * w[0] - u[0] * w[2],
                    u[0] * w[1] - u[1] * w[0],
                ];
                0.5 * geometry::norm(&n)
            }
        };
        let boundary: f64 = (0..=d).map(facet_measure).sum();
        let inradius = d as f64 * volume / boundary;
        // circumcenter: 2 (p_k - p_0) . c = |p_k|^2 - |p_0|^2
        let a = DMatrix::from_fn(d, d, |r, c| 2.0 * (p[r + 1][c] - p[0][c]));
        let b = DVector::from_fn(d, |r, _| dot(p[r + 1], p[r + 1]) - dot(p[0], p[0]));
        let center = geometry::solve(a, b).expect("non-degenerate simplex");
        let circumradius = (0..d)
            .map(|c| (center[c] - p[0][c]).powi(2))
            .sum::<f64>()
            .sqrt();
        inradius / circumradius
    }

    /// Value of nodal basis function `i` at `x`, via the vertex star and point location.
    pub fn basis_value(&self, star: &VertexStar, x: &[f64]) -> f64 {
        for (k, &s) in star.incident.iter().enumerate() {
            if let Some(lam) = self.barycentric(s, x) {
                if lam.iter().all(|l| *l >= -GEOM_TOL) {
                    return star.local_affines[k].eval(x);
                }
            }
        }
        0.0
    }
}

fn edges(simplex: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..simplex.len() {
        for b in a + 1..simplex.len() {
            out.push((simplex[a], simplex[b]));
        }
    }
    out
}

fn project_range(n: &[f64], pts: &[&[f64]]) -> (f64, f64) {
    pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = dot(n, p);
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_interval_mesh() {
        let m = build_mesh(vec![vec![0.0], vec![0.5], vec![1.0]], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(m.simplex_count(), 2);
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.boundary(), &[true, false, true]);
        assert_eq!(m.compute_kh(), 2);
    }

    #[test]
    fn two_triangle_square_kh() {
        let m = two_triangle_square();
        // diagonal from (0,0) to (1,1): both endpoints touch two triangles
        assert_eq!(m.incident(0).len(), 2);
        assert_eq!(m.incident(2).len(), 2);
        assert_eq!(m.incident(1).len(), 1);
        assert_eq!(m.compute_kh(), 2);
        for i in 0..4 {
            let n = m.vertex_star(i).unwrap().incident.len();
            assert!((1..=2).contains(&n));
        }
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let err = build_mesh(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0, 1, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateSimplex { .. }));
    }

    #[test]
    fn out_of_range_vertex() {
        let err = build_mesh(vec![vec![0.0], vec![1.0]], vec![vec![0, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::VertexOutOfRange { .. }));
    }

    #[test]
    fn overlapping_triangles_rejected() {
        let err = build_mesh(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]],
            vec![vec![0, 1, 2], vec![0, 1, 3]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonConforming { .. }));
    }

    #[test]
    fn hanging_node_rejected() {
        // vertex 4 = (0.5, 0) lies on the edge of the big triangle
        let err = build_mesh(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
                vec![0.5, 0.0],
            ],
            vec![vec![0, 1, 2], vec![0, 4, 3], vec![4, 1, 3]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonConforming { .. }));
    }

    #[test]
    fn hat_on_unit_spacing() {
        let m = uniform_interval(2, 0.0, 2.0);
        let star = m.vertex_star(1).unwrap();
        assert_eq!(star.local_affines.len(), 2);
        let left = &star.local_affines[0];
        let right = &star.local_affines[1];
        assert!((left.gradient[0] - 1.0).abs() < 1e-12 && left.offset.abs() < 1e-12);
        assert!((right.gradient[0] + 1.0).abs() < 1e-12 && (right.offset - 2.0).abs() < 1e-12);
    }

    #[test]
    fn structured_interior_star_has_six_affines() {
        let m = structured_triangles(4, 4);
        let center = 2 * 5 + 2;
        let star = m.vertex_star(center).unwrap();
        assert_eq!(star.local_affines.len(), 6);
        // independent check: each affine solves its own 3x3 nodal system
        for (k, &s) in star.incident.iter().enumerate() {
            let g = &star.local_affines[k];
            for &v in &m.simplices()[s] {
                let want = if v == center { 1.0 } else { 0.0 };
                assert!((g.eval(&m.vertices()[v]) - want).abs() < INTERPOLATION_TOL);
            }
        }
        assert_eq!(m.compute_kh(), 6);
    }

    #[test]
    fn convexity_examples() {
        let hex = hexagon_with_center();
        assert!(hex.is_locally_convex(0));
        let dent = reflex_star();
        assert!(!dent.is_locally_convex(0));
        let line = uniform_interval(5, 0.0, 1.0);
        assert!((0..line.vertex_count()).all(|i| line.is_locally_convex(i)));
    }

    #[test]
    fn kh_examples() {
        assert_eq!(uniform_interval(4, 0.0, 1.0).compute_kh(), 2);
        assert_eq!(single_simplex(2).compute_kh(), 1);
        assert_eq!(single_simplex(3).compute_kh(), 1);
        let m = structured_triangles(3, 5);
        let brute = (0..m.vertex_count())
            .map(|i| m.simplices().iter().filter(|s| s.contains(&i)).count())
            .max()
            .unwrap();
        assert_eq!(m.compute_kh(), brute);
    }

    #[test]
    fn shape_regularity_examples() {
        let h = 3f64.sqrt() / 2.0;
        let eq = build_mesh(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!((eq.shape_regularity()[0] - 0.5).abs() < 1e-12);
        assert_eq!(uniform_interval(3, 0.0, 1.0).shape_regularity(), vec![1.0; 3]);
        // sliver with two 1-degree angles
        let t = 1f64.to_radians().tan();
        let sliver = build_mesh(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.5 * t]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(sliver.shape_regularity()[0] < 0.02);
        // regular tetrahedron: r/R = 1/3
        let tet = build_mesh(
            vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        assert!((tet.shape_regularity()[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn partition_of_unity_and_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [structured_triangles(3, 3), kuhn_cube(2), uniform_interval(6, 0.0, 1.0)] {
            let stars: Vec<VertexStar> = (0..m.vertex_count()).map(|i| m.vertex_star(i).unwrap()).collect();
            for (i, star) in stars.iter().enumerate() {
                for (j, xj) in m.vertices().iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((m.basis_value(star, xj) - want).abs() < 1e-10);
                }
            }
            let bb = m.bounding_box();
            for _ in 0..200 {
                let x: Vec<f64> = bb.lo.iter().zip(&bb.hi).map(|(l, h)| rng.gen_range(*l..*h)).collect();
                let s: f64 = stars.iter().map(|st| m.basis_value(st, &x)).sum();
                assert!((s - 1.0).abs() < 1e-10);
            }
        }
    }
}
