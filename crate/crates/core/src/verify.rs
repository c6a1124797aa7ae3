//! Sampling-based comparison of networks with their sources, and activation-pattern labels.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cpwl::{CpwlError, CpwlPieces};
use crate::mesh::SimplicialMesh;
use crate::net::{NetError, ReluNetwork};
use crate::sampling::{box_points, grid_points, mesh_points};
use crate::geometry::BoundingBox;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub tol: f64,
    pub max_error: f64,
    pub worst_point: Vec<f64>,
    pub expected: f64,
    pub actual: f64,
    pub passed: bool,
}

/// Largest deviation of `net` from `reference` over `points`.
pub fn compare(
    net: &ReluNetwork,
    points: &[Vec<f64>],
    tol: f64,
    reference: impl Fn(&[f64]) -> Result<f64, CpwlError>,
) -> Result<VerifyReport, crate::Error> {
    let mut report = VerifyReport {
        samples: points.len(),
        tol,
        max_error: 0.0,
        worst_point: Vec::new(),
        expected: f64::NAN,
        actual: f64::NAN,
        passed: true,
    };
    for x in points {
        let want = reference(x)?;
        let got = net.eval_scalar(x)?;
        let err = (got - want).abs();
        if err > report.max_error || report.worst_point.is_empty() || err.is_nan() {
            report.max_error = if err.is_nan() { f64::INFINITY } else { err };
            report.worst_point = x.clone();
            report.expected = want;
            report.actual = got;
        }
    }
    report.passed = report.max_error <= tol;
    Ok(report)
}

/// Compares with the FEM function `sum coeffs_i phi_i` (zero outside the mesh).
///
/// Points are drawn inside the mesh. When every boundary coefficient is zero the function
/// vanishes near the mesh boundary, compiled networks vanish outside it too, and a tenth of
/// the points are drawn from a box reaching half the mesh extent beyond it.
pub fn verify_fem<R: Rng + ?Sized>(
    net: &ReluNetwork,
    mesh: &SimplicialMesh,
    coeffs: &[f64],
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<VerifyReport, crate::Error> {
    if net.input_dim() != mesh.dim() {
        return Err(NetError::DimensionMismatch {
            expected: mesh.dim(),
            got: net.input_dim(),
        }
        .into());
    }
    let mut pts = mesh_points(mesh, samples, rng);
    let zero_boundary = mesh.boundary().iter().zip(coeffs).all(|(&b, &c)| !b || c == 0.0);
    if zero_boundary {
        let outer = mesh.bounding_box().inflated(0.5);
        let keep = samples - samples / 10;
        pts.truncate(keep.max(mesh.vertex_count().min(samples)));
        let extra = samples - pts.len();
        pts.extend(box_points(&outer, extra, rng));
    }
    compare(net, &pts, tol, |x| Ok(mesh.eval_fem(coeffs, x)))
}

/// Compares with a CPWL function on its domain box.
pub fn verify_cpwl<R: Rng + ?Sized>(
    net: &ReluNetwork,
    f: &CpwlPieces,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<VerifyReport, crate::Error> {
    let b = f.domain().ok_or(CpwlError::UnboundedRegionUnsupported(0))?;
    let pts = box_points(b, samples, rng);
    compare(net, &pts, tol, |x| f.eval(x))
}

/// Activation pattern of all hidden neurons at `x`, as a bit vector.
pub fn activation_pattern(net: &ReluNetwork, x: &[f64]) -> Result<Vec<bool>, NetError> {
    let pre = net.pre_activations(x)?;
    Ok(pre.iter().flatten().map(|&v| v > 0.0).collect())
}

/// Labels grid points of a 2D box by activation pattern; labels are consecutive integers
/// in order of first appearance.
pub fn region_labels(net: &ReluNetwork, b: &BoundingBox, res: usize) -> Result<Vec<(Vec<f64>, usize)>, NetError> {
    if net.input_dim() != 2 {
        return Err(NetError::DimensionMismatch {
            expected: 2,
            got: net.input_dim(),
        });
    }
    let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut out = Vec::new();
    for x in grid_points(b, res) {
        let p = activation_pattern(net, &x)?;
        let next = seen.len();
        let label = *seen.entry(p).or_insert(next);
        out.push((x, label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile_basis_deep, compile_fem_deep};
    use crate::cpwl::AffineFunc;
    use crate::mesh::structured_triangles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn detects_flipped_weight() {
        let m = structured_triangles(2, 2);
        let mut c = vec![0.0; m.vertex_count()];
        c[4] = 1.0;
        let (mut net, _) = compile_fem_deep(&m, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(verify_fem(&net, &m, &c, 2000, 1e-9, &mut rng).unwrap().passed);
        let w = net.weight_mut(1, 0, 0).unwrap();
        w.1 = -w.1;
        assert!(!verify_fem(&net, &m, &c, 2000, 1e-9, &mut rng).unwrap().passed);
    }

    #[test]
    fn affine_net_single_label() {
        let net = ReluNetwork::from_affine(&AffineFunc::new(vec![1.0, 2.0], 0.0));
        let labels = region_labels(&net, &BoundingBox::cube(2, -1.0, 1.0), 20).unwrap();
        assert!(labels.iter().all(|(_, l)| *l == 0));
    }

    #[test]
    fn hat_is_affine_on_each_activation_region() {
        let m = structured_triangles(3, 3);
        let net = compile_basis_deep(&m, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut refined = 0;
        for s in 0..m.simplex_count() {
            let pts: Vec<Vec<f64>> = (0..3).map(|_| crate::sampling::simplex_point(&m, s, &mut rng)).collect();
            let pats: Vec<Vec<bool>> = pts.iter().map(|x| activation_pattern(&net, x).unwrap()).collect();
            if pats.windows(2).any(|w| w[0] != w[1]) {
                refined += 1;
            }
            // a simplex may be split into several activation regions, but the function is
            // the interpolant everywhere
            for x in &pts {
                let want = m.basis_value(&m.vertex_star(5).unwrap(), x);
                assert!((net.eval_scalar(x).unwrap() - want).abs() < 1e-12);
            }
        }
        assert!(refined < m.simplex_count());
    }
}
