//! Sample point generators shared by verification and tests.

use rand::Rng;

use crate::geometry::BoundingBox;
use crate::mesh::SimplicialMesh;

/// `n` uniform points in the box.
pub fn box_points<R: Rng + ?Sized>(b: &BoundingBox, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| b.sample(rng)).collect()
}

/// Uniform point in simplex `s` of the mesh.
pub fn simplex_point<R: Rng + ?Sized>(mesh: &SimplicialMesh, s: usize, rng: &mut R) -> Vec<f64> {
    // normalized exponentials give uniform barycentric weights
    let w: Vec<f64> = (0..=mesh.dim()).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; mesh.dim()];
    for (k, &v) in mesh.simplices()[s].iter().enumerate() {
        for (xi, p) in x.iter_mut().zip(&mesh.vertices()[v]) {
            *xi += w[k] / total * p;
        }
    }
    x
}

/// Sample for mesh functions: all vertices (up to `n`), then uniform points in random simplices.
pub fn mesh_points<R: Rng + ?Sized>(mesh: &SimplicialMesh, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = mesh.vertices().iter().take(n).cloned().collect();
    while pts.len() < n {
        let s = rng.gen_range(0..mesh.simplex_count());
        pts.push(simplex_point(mesh, s, rng));
    }
    pts
}

/// Regular grid with `res` points per axis over the box.
pub fn grid_points(b: &BoundingBox, res: usize) -> Vec<Vec<f64>> {
    let d = b.dim();
    let res = res.max(2);
    let total = res.pow(d as u32);
    (0..total)
        .map(|mut k| {
            (0..d)
                .map(|axis| {
                    let i = k % res;
                    k /= res;
                    b.lo[axis] + (b.hi[axis] - b.lo[axis]) * i as f64 / (res - 1) as f64
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_triangles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_points_inside() {
        let m = structured_triangles(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in 0..m.simplex_count() {
            let x = simplex_point(&m, s, &mut rng);
            let l = m.barycentric(s, &x).unwrap();
            assert!(l.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn grid_shape() {
        let g = grid_points(&BoundingBox::cube(2, 0.0, 1.0), 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[8], vec![1.0, 1.0]);
    }

    #[test]
    fn mesh_points_count() {
        let m = structured_triangles(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(mesh_points(&m, 500, &mut rng).len(), 500);
    }
}
