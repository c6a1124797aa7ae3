use super::bounds::{account, AccountMeta, BoundReport};
use super::expand::{expand_hat, expand_lattice, MAX_CLAUSES};
use super::gadget::{affine_tree, ceil_log2, GadgetOp};
use super::max_of_m::compile_max_of_m;
use super::reduce::{merge_terms, reduce_to_width, MaxTerm, Verifier};
use super::CompileError;
use crate::cpwl::{
    lattice_from_convex_regions, lattice_from_unique_order, unique_order_partition, AffineFunc,
    CpwlPieces, LatticeForm,
};
use crate::mesh::SimplicialMesh;
use crate::net::{AffineLayer, ReluNetwork};

/// Network for a signed sum of maxima with at most `d + 1` arguments each. Each maximum
/// is a gadget tree whose leaves carry `|coeff|`; signs go to the output layer.
/// Returns the network and the largest hidden-layer count of a single term.
pub fn compile_terms(terms: &[MaxTerm], d: usize) -> Result<(ReluNetwork, usize), CompileError> {
    if terms.is_empty() {
        return Ok((ReluNetwork::from_affine(&AffineFunc::constant(d, 0.0)), 0));
    }
    let mut nets = Vec::with_capacity(terms.len());
    let mut widest = 0;
    for (k, t) in terms.iter().enumerate() {
        if t.arity() > d + 1 {
            return Err(CompileError::ClauseTooWide {
                clause: k,
                arity: t.arity(),
                limit: d + 1,
            });
        }
        let scale = t.coeff.abs();
        let mut leaves: Vec<AffineFunc> = t.args.iter().map(|a| a.scaled(scale)).collect();
        if let Some(c) = t.constant {
            leaves.push(AffineFunc::constant(d, c * scale));
        }
        let net = affine_tree(&leaves, GadgetOp::Max);
        widest = widest.max(net.hidden_layers());
        nets.push(net);
    }
    let row: Vec<(usize, f64)> = terms
        .iter()
        .enumerate()
        .map(|(k, t)| (k, t.coeff.signum()))
        .collect();
    let par = ReluNetwork::parallel(&nets)?;
    let net = par.map_output(&AffineLayer::new(terms.len(), vec![row], vec![0.0])?)?;
    Ok((net, widest))
}

/// Reduces every term to arity at most `d + 1` and merges identical terms.
pub fn reduce_terms(terms: &[MaxTerm], d: usize) -> Result<Vec<MaxTerm>, CompileError> {
    let mut verifier = Verifier::new(d, 24, 4.0, 0x1a77);
    let mut out = Vec::new();
    for t in terms {
        out.extend(reduce_to_width(t, d, &mut verifier)?);
    }
    Ok(merge_terms(out))
}

/// Nodal basis function through the expansion
/// `max{0, min g_k} = sum (-1)^{|S|+1} max{0, g_S}` and arity reduction.
pub fn compile_basis_shallow(mesh: &SimplicialMesh, i: usize) -> Result<(ReluNetwork, BoundReport), CompileError> {
    let star = mesh.vertex_star(i)?;
    if !mesh.is_locally_convex(i) {
        return Err(CompileError::NotLocallyConvex(vec![i]));
    }
    let net = basis_shallow_scaled(mesh, &star.local_affines, 1.0)?;
    let d = mesh.dim();
    let report = account(
        &net,
        AccountMeta::BasisShallow {
            d,
            n: star.local_affines.len(),
        },
    )?;
    Ok((net, report))
}

fn basis_shallow_scaled(mesh: &SimplicialMesh, affines: &[AffineFunc], scale: f64) -> Result<ReluNetwork, CompileError> {
    let d = mesh.dim();
    let scaled: Vec<AffineFunc> = affines.iter().map(|g| g.scaled(scale)).collect();
    let terms = reduce_terms(&expand_hat(&scaled), d)?;
    Ok(compile_terms(&terms, d)?.0)
}

/// FEM function `sum nu_i phi_i` as a sum of shallow nodal networks.
pub fn compile_fem_shallow(mesh: &SimplicialMesh, coeffs: &[f64]) -> Result<(ReluNetwork, BoundReport), CompileError> {
    if coeffs.len() != mesh.vertex_count() {
        return Err(CompileError::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: coeffs.len(),
        });
    }
    let bad = mesh.non_convex_vertices();
    let bad: Vec<usize> = bad.into_iter().filter(|&i| coeffs[i] != 0.0).collect();
    if !bad.is_empty() {
        return Err(CompileError::NotLocallyConvex(bad));
    }
    let d = mesh.dim();
    let mut nets = Vec::new();
    let mut weights = Vec::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            let star = mesh.vertex_star(i)?;
            nets.push(basis_shallow_scaled(mesh, &star.local_affines, c.abs())?);
            weights.push(c.signum());
        }
    }
    let net = if nets.is_empty() {
        ReluNetwork::from_affine(&AffineFunc::constant(d, 0.0))
    } else {
        ReluNetwork::linear_combine(&nets, &weights, 0.0)?
    };
    let report = account(
        &net,
        AccountMeta::FemShallow {
            d,
            kh: mesh.compute_kh(),
            n_basis: nets.len(),
        },
    )?;
    Ok((net, report))
}

/// Lattice form used by the shallow route: the unique-order construction when it stays
/// within the clause cap, otherwise the convex-region construction.
pub fn shallow_lattice(f: &CpwlPieces) -> Result<LatticeForm, CompileError> {
    let partition = unique_order_partition(f)?;
    if partition.len() <= MAX_CLAUSES {
        let mut l = lattice_from_unique_order(f, &partition)?;
        l.dedup();
        return Ok(l);
    }
    let mut l = lattice_from_convex_regions(f)?;
    l.dedup();
    Ok(l)
}

/// General CPWL function (d <= 2) as a network with at most `ceil(log2(d+1))` hidden layers.
pub fn compile_cpwl_shallow(f: &CpwlPieces) -> Result<(ReluNetwork, BoundReport), CompileError> {
    let d = f.dim();
    let lattice = shallow_lattice(f)?;
    let terms = reduce_terms(&expand_lattice(&lattice)?, d)?;
    let (net, _) = compile_terms(&terms, d)?;
    let report = account(
        &net,
        AccountMeta::LatticeShallow {
            d,
            m: lattice.m(),
            clauses: lattice.clause_count(),
        },
    )?;
    Ok((net, report))
}

/// Direct max-of-min compilation of a lattice form whose clauses have at most `d + 1`
/// pieces: every clause is a min-gadget tree, the clauses are joined by
/// [`compile_max_of_m`].
pub fn compile_lattice_shallow(lattice: &LatticeForm, d: usize) -> Result<ReluNetwork, CompileError> {
    let mut nets = Vec::with_capacity(lattice.clause_count());
    for (k, c) in lattice.clauses.iter().enumerate() {
        if c.len() > d + 1 {
            return Err(CompileError::ClauseTooWide {
                clause: k,
                arity: c.len(),
                limit: d + 1,
            });
        }
        let leaves: Vec<AffineFunc> = c.iter().map(|&i| lattice.pieces[i].clone()).collect();
        let net = affine_tree(&leaves, GadgetOp::Min);
        if net.hidden_layers() > ceil_log2(d + 1) {
            return Err(CompileError::BoundViolated(format!(
                "clause {k} uses {} hidden layers",
                net.hidden_layers()
            )));
        }
        nets.push(net);
    }
    compile_max_of_m(&nets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpwl::{abs_function, random_cpwl};
    use crate::geometry::BoundingBox;
    use crate::mesh::{structured_triangles, uniform_interval, single_simplex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn abs_lattice_direct() {
        let l = LatticeForm::new(
            vec![AffineFunc::new(vec![1.0], 0.0), AffineFunc::new(vec![-1.0], 0.0)],
            vec![vec![0], vec![1]],
        )
        .unwrap();
        let net = compile_lattice_shallow(&l, 1).unwrap();
        assert_eq!(net.hidden_layers(), 1);
        assert_eq!(net.size(), 4);
        assert_eq!(net.eval_scalar(&[-2.5]).unwrap(), 2.5);
    }

    #[test]
    fn wide_clause_rejected() {
        let l = LatticeForm::new(
            (0..3).map(|k| AffineFunc::new(vec![k as f64], 0.0)).collect(),
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(compile_lattice_shallow(&l, 1), Err(CompileError::ClauseTooWide { .. })));
    }

    #[test]
    fn single_piece_is_affine() {
        let l = LatticeForm::new(vec![AffineFunc::new(vec![2.0, 1.0], 1.0)], vec![vec![0]]).unwrap();
        assert_eq!(compile_lattice_shallow(&l, 2).unwrap().hidden_layers(), 0);
    }

    #[test]
    fn abs_pipeline() {
        let (net, report) = compile_cpwl_shallow(&abs_function(1.0)).unwrap();
        assert_eq!(net.hidden_layers(), 1);
        assert!(report.holds());
        for k in 0..=200 {
            let x = [-1.0 + 0.01 * k as f64];
            assert!((net.eval_scalar(&x).unwrap() - x[0].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_pipeline() {
        let f = CpwlPieces::affine(AffineFunc::new(vec![1.0, -2.0], 0.5), BoundingBox::cube(2, 0.0, 1.0));
        let (net, _) = compile_cpwl_shallow(&f).unwrap();
        assert_eq!(net.hidden_layers(), 0);
        assert!((net.eval_scalar(&[0.5, 0.25]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in 1..=2 {
            for _ in 0..4 {
                let f = random_cpwl(d, 4, &mut rng);
                let (net, report) = compile_cpwl_shallow(&f).unwrap();
                assert!(net.hidden_layers() <= ceil_log2(d + 1));
                assert!(report.holds());
                let bx = f.domain().unwrap().clone();
                for _ in 0..300 {
                    let x = bx.sample(&mut rng);
                    assert!((net.eval_scalar(&x).unwrap() - f.eval(&x).unwrap()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn basis_shallow_matches_deep() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for (m, i) in [(uniform_interval(2, 0.0, 2.0), 1), (structured_triangles(2, 2), 4), (single_simplex(2), 0)] {
            let (net, report) = compile_basis_shallow(&m, i).unwrap();
            assert!(report.holds(), "{report:?}");
            let deep = super::super::compile_basis_deep(&m, i).unwrap();
            let bx = m.bounding_box().inflated(0.2);
            for _ in 0..500 {
                let x = bx.sample(&mut rng);
                assert!((net.eval_scalar(&x).unwrap() - deep.eval_scalar(&x).unwrap()).abs() < 1e-9);
            }
        }
    }
}
