use super::bounds::{account, AccountMeta, BoundReport};
use super::gadget::{affine_tree, ceil_log2, max_with_zero, GadgetOp};
use super::CompileError;
use crate::mesh::{SimplicialMesh, VertexStar};
use crate::net::{AffineLayer, ReluNetwork};

/// `scale * max{0, min_k g_k}` for the local affines of a star, with `scale > 0` folded
/// into the input layer.
pub fn compile_star_deep(star: &VertexStar, scale: f64) -> ReluNetwork {
    let leaves: Vec<_> = star.local_affines.iter().map(|g| g.scaled(scale)).collect();
    max_with_zero(&affine_tree(&leaves, GadgetOp::Min))
}

/// Nodal basis function of vertex `i` as a network with `ceil(log2 |N(i)|) + 1` hidden
/// layers.
pub fn compile_basis_deep(mesh: &SimplicialMesh, i: usize) -> Result<ReluNetwork, CompileError> {
    let star = mesh.vertex_star(i)?;
    if !mesh.is_locally_convex(i) {
        return Err(CompileError::NotLocallyConvex(vec![i]));
    }
    Ok(compile_star_deep(&star, 1.0))
}

/// The finite element function `sum_i nu_i phi_i`. Every basis network is padded to
/// `ceil(log2 k_h) + 1` hidden layers; `|nu_i|` scales the input layer and `sign(nu_i)`
/// the output layer, so hidden weights stay in `{0, ±1/2, ±1}`.
pub fn compile_fem_deep(mesh: &SimplicialMesh, coeffs: &[f64]) -> Result<(ReluNetwork, BoundReport), CompileError> {
    if coeffs.len() != mesh.vertex_count() {
        return Err(CompileError::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: coeffs.len(),
        });
    }
    let active: Vec<usize> = (0..coeffs.len()).filter(|&i| coeffs[i] != 0.0).collect();
    let bad: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| !mesh.is_locally_convex(i))
        .collect();
    if !bad.is_empty() {
        return Err(CompileError::NotLocallyConvex(bad));
    }
    let kh = mesh.compute_kh();
    let depth = ceil_log2(kh.max(1)) + 1;
    let d = mesh.dim();
    let net = if active.is_empty() {
        ReluNetwork::from_affine(&crate::cpwl::AffineFunc::constant(d, 0.0))
    } else {
        let mut bases = Vec::with_capacity(active.len());
        for &i in &active {
            let star = mesh.vertex_star(i)?;
            bases.push(compile_star_deep(&star, coeffs[i].abs()).padded_to(depth));
        }
        let signs: Vec<(usize, f64)> = active
            .iter()
            .enumerate()
            .map(|(k, &i)| (k, coeffs[i].signum()))
            .collect();
        let par = ReluNetwork::parallel(&bases)?;
        par.map_output(&AffineLayer::new(active.len(), vec![signs], vec![0.0])?)?
    };
    let report = account(
        &net,
        AccountMeta::FemDeep {
            d,
            kh,
            n_basis: active.len(),
        },
    )?;
    Ok((net, report))
}
