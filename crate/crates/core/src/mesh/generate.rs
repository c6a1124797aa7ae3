//! Mesh generators for tests, examples and the acceptance corpus.

use rand::Rng;

use super::SimplicialMesh;

fn mesh(dim: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> SimplicialMesh {
    SimplicialMesh::new(dim, vertices, simplices, None, false).expect("generator produced an invalid mesh")
}

/// `n` equal elements on `[a, b]`.
pub fn uniform_interval(n: usize, a: f64, b: f64) -> SimplicialMesh {
    let pts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    interval_from_points(&pts)
}

/// Chain of elements through sorted, distinct points.
pub fn interval_from_points(points: &[f64]) -> SimplicialMesh {
    let vertices = points.iter().map(|p| vec![*p]).collect();
    let simplices = (0..points.len() - 1).map(|k| vec![k, k + 1]).collect();
    mesh(1, vertices, simplices)
}

/// Random chain on `[0, 1]` with `n` elements.
pub fn random_interval<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SimplicialMesh {
    let mut pts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    interval_from_points(&pts)
}

fn grid_vertices(nx: usize, ny: usize) -> Vec<Vec<f64>> {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push(vec![i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }
    v
}

/// Unit square cut into `nx * ny` cells, each split along the same diagonal.
/// Interior vertices touch six triangles.
pub fn structured_triangles(nx: usize, ny: usize) -> SimplicialMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut s = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            s.push(vec![a, b, c]);
            s.push(vec![a, c, d]);
        }
    }
    mesh(2, grid_vertices(nx, ny), s)
}

/// Unit square with alternating diagonals (union-jack pattern); interior vertices touch
/// eight or four triangles.
pub fn union_jack(nx: usize, ny: usize) -> SimplicialMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut s = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                s.push(vec![a, b, c]);
                s.push(vec![a, c, d]);
            } else {
                s.push(vec![a, b, d]);
                s.push(vec![b, c, d]);
            }
        }
    }
    mesh(2, grid_vertices(nx, ny), s)
}

/// Unit square with both diagonals of every cell drawn: each cell gets a center vertex
/// and four triangles. Interior grid vertices touch eight triangles, centers four.
pub fn criss_cross(nx: usize, ny: usize) -> SimplicialMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut v = grid_vertices(nx, ny);
    let mut s = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = v.len();
            v.push(vec![(i as f64 + 0.5) / nx as f64, (j as f64 + 0.5) / ny as f64]);
            let (a, b, cc, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            s.push(vec![a, b, c]);
            s.push(vec![b, cc, c]);
            s.push(vec![cc, d, c]);
            s.push(vec![d, a, c]);
        }
    }
    mesh(2, v, s)
}

/// Unit square split into two triangles by the diagonal from (0,0) to (1,1).
pub fn two_triangle_square() -> SimplicialMesh {
    mesh(
        2,
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
        vec![vec![0, 1, 2], vec![0, 2, 3]],
    )
}

/// Reference simplex in dimension `d`.
pub fn single_simplex(d: usize) -> SimplicialMesh {
    let mut v = vec![vec![0.0; d]];
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        v.push(e);
    }
    mesh(d, v, vec![(0..=d).collect()])
}

/// Regular hexagon around a center vertex (index 0), six triangles.
pub fn hexagon_with_center() -> SimplicialMesh {
    let mut v = vec![vec![0.0, 0.0]];
    for k in 0..6 {
        let a = std::f64::consts::PI / 3.0 * k as f64;
        v.push(vec![a.cos(), a.sin()]);
    }
    let s = (0..6).map(|k| vec![0, 1 + k, 1 + (k + 1) % 6]).collect();
    mesh(2, v, s)
}

/// Four-triangle fan around vertex 0 whose outer boundary has a reflex corner.
pub fn reflex_star() -> SimplicialMesh {
    mesh(
        2,
        vec![
            vec![0.0, 0.0],
            vec![2.0, -1.0],
            vec![0.0, 2.0],
            vec![-2.0, -1.0],
            vec![0.0, -0.5],
        ],
        vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 1]],
    )
}

/// Delaunay triangulation of `n` random points in convex position on an ellipse. Every
/// vertex star is a sub-polygon of a convex polygon, hence convex.
pub fn convex_position_delaunay<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SimplicialMesh {
    let (ax, ay) = (rng.gen_range(0.6..1.4), rng.gen_range(0.6..1.4));
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let pts: Vec<delaunator::Point> = angles
        .iter()
        .map(|a| delaunator::Point {
            x: ax * a.cos(),
            y: ay * a.sin(),
        })
        .collect();
    let tri = delaunator::triangulate(&pts);
    let vertices = pts.iter().map(|p| vec![p.x, p.y]).collect();
    let simplices = tri
        .triangles
        .chunks(3)
        .map(|t| t.to_vec())
        .collect();
    mesh(2, vertices, simplices)
}

/// Kuhn (Freudenthal) subdivision of the unit cube into `6 n^3` tetrahedra, all cells
/// split around the main diagonal so the mesh is conforming.
pub fn kuhn_cube(n: usize) -> SimplicialMesh {
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(vec![i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut simplices = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in PERMS {
                    let mut c = [i, j, k];
                    let mut s = vec![id(c[0], c[1], c[2])];
                    for axis in p {
                        c[axis] += 1;
                        s.push(id(c[0], c[1], c[2]));
                    }
                    simplices.push(s);
                }
            }
        }
    }
    mesh(3, vertices, simplices)
}
