//! Small geometric kernels shared by the mesh and CPWL modules: half-spaces, boxes,
//! convex polygon clipping and brute-force polytope vertex enumeration.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for half-space and containment tests.
pub const GEOM_TOL: f64 = 1e-10;

/// Cells or polygons with area below this are treated as measure zero.
pub const AREA_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The closed half-space `{x : normal . x <= offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    #[serde(rename = "a")]
    pub normal: Vec<f64>,
    #[serde(rename = "b")]
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Signed violation `normal . x - offset`; non-positive inside.
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.excess(x) <= tol
    }

    /// The complementary closed half-space.
    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|v| -v).collect(),
            offset: -self.offset,
        }
    }
}

pub fn contains_all(halfspaces: &[HalfSpace], x: &[f64], tol: f64) -> bool {
    halfspaces.iter().all(|h| h.contains(x, tol))
}

/// Axis-aligned box `[lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corner dimensions differ");
        Self { lo, hi }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }

    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            out.push(HalfSpace::new(e.clone(), self.hi[k]));
            e[k] = -1.0;
            out.push(HalfSpace::new(e, -self.lo[k]));
        }
        out
    }

    /// Counter-clockwise corner polygon of a 2D box.
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        assert_eq!(self.dim(), 2);
        vec![
            [self.lo[0], self.lo[1]],
            [self.hi[0], self.lo[1]],
            [self.hi[0], self.hi[1]],
            [self.lo[0], self.hi[1]],
        ]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| if h > l { rng.gen_range(*l..*h) } else { *l })
            .collect()
    }

    /// Smallest box containing all points.
    pub fn around(points: &[Vec<f64>]) -> Self {
        let d = points.first().map_or(0, Vec::len);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Self { lo, hi }
    }

    /// Box enlarged by `margin` times its extent on every side.
    pub fn inflated(&self, margin: f64) -> Self {
        let lo = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l - margin * (h - l))
            .collect();
        let hi = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h + margin * (h - l))
            .collect();
        Self { lo, hi }
    }
}

/// Signed area of a polygon (positive for counter-clockwise order).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

/// Vertex average of a polygon. Always interior for a convex polygon.
pub fn vertex_centroid(poly: &[[f64; 2]]) -> [f64; 2] {
    let n = poly.len() as f64;
    let (sx, sy) = poly
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    [sx / n, sy / n]
}

/// Sutherland-Hodgman clip of a convex polygon against one half-plane.
pub fn clip_polygon(poly: &[[f64; 2]], h: &HalfSpace) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = h.excess(&p);
        let fq = h.excess(&q);
        let p_in = fp <= 0.0;
        let q_in = fq <= 0.0;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    dedup_polygon(out)
}

fn dedup_polygon(mut poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    poly.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    while poly.len() > 1 {
        let (f, l) = (poly[0], poly[poly.len() - 1]);
        if (f[0] - l[0]).abs() < 1e-14 && (f[1] - l[1]).abs() < 1e-14 {
            poly.pop();
        } else {
            break;
        }
    }
    poly
}

/// Solves `a x = b` by LU; `None` when singular.
pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b)
}

/// Vertices of the bounded polytope `{x : h . x <= b for all h}` in dimension `dim`,
/// found by intersecting every `dim`-subset of the bounding hyperplanes.
pub fn polytope_vertices(halfspaces: &[HalfSpace], dim: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let n = halfspaces.len();
    if dim == 0 || n < dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let a = DMatrix::from_fn(dim, dim, |r, c| halfspaces[idx[r]].normal[c]);
        let b = DVector::from_fn(dim, |r, _| halfspaces[idx[r]].offset);
        if a.determinant().abs() > 1e-12 {
            if let Some(x) = solve(a, b) {
                let x: Vec<f64> = x.iter().copied().collect();
                if contains_all(halfspaces, &x, 1e-9)
                    && !out
                        .iter()
                        .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9))
                {
                    out.push(x);
                }
            }
        }
        // next combination
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < n - dim + k {
                idx[k] += 1;
                for j in k + 1..dim {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unit normal of the hyperplane through `points` (exactly `dim` affinely independent
/// points in R^dim), from the null space of the edge matrix.
pub fn hyperplane_normal(points: &[&[f64]]) -> Option<Vec<f64>> {
    let dim = points[0].len();
    if dim == 1 {
        return Some(vec![1.0]);
    }
    let rows = points.len() - 1;
    let edges = DMatrix::from_fn(rows, dim, |r, c| points[r + 1][c] - points[0][c]);
    // Pad to square so the SVD exposes the full right singular basis.
    let mut sq = DMatrix::zeros(dim, dim);
    sq.view_mut((0, 0), (rows, dim)).copy_from(&edges);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t?;
    let imin = svd.singular_values.imin();
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return None;
    }
    // the second-smallest singular value must be clearly nonzero
    let mut sorted: Vec<f64> = svd.singular_values.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    if dim >= 2 && sorted[1] < 1e-12 * smax {
        return None;
    }
    Some(v_t.row(imin).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_by_diagonal() {
        let sq = BoundingBox::cube(2, 0.0, 1.0).polygon();
        let half = clip_polygon(&sq, &HalfSpace::new(vec![1.0, -1.0], 0.0));
        assert_eq!(half.len(), 3);
        assert!((polygon_area(&half) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_keeps_polygon_inside() {
        let sq = BoundingBox::cube(2, 0.0, 1.0).polygon();
        let same = clip_polygon(&sq, &HalfSpace::new(vec![1.0, 0.0], 2.0));
        assert_eq!(same, sq);
        let gone = clip_polygon(&sq, &HalfSpace::new(vec![1.0, 0.0], -1.0));
        assert!(gone.is_empty());
    }

    #[test]
    fn unit_cube_has_eight_vertices() {
        let hs = BoundingBox::cube(3, 0.0, 1.0).halfspaces();
        assert_eq!(polytope_vertices(&hs, 3).len(), 8);
    }

    #[test]
    fn triangle_vertices_from_halfspaces() {
        let hs = vec![
            HalfSpace::new(vec![-1.0, 0.0], 0.0),
            HalfSpace::new(vec![0.0, -1.0], 0.0),
            HalfSpace::new(vec![1.0, 1.0], 1.0),
        ];
        assert_eq!(polytope_vertices(&hs, 2).len(), 3);
    }

    #[test]
    fn normal_of_segment_in_plane() {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        let n = hyperplane_normal(&[&a, &b]).unwrap();
        assert!(dot(&n, &[1.0, 1.0]).abs() < 1e-12);
        assert!((norm(&n) - 1.0).abs() < 1e-12);
    }
}
