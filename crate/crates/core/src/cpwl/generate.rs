//! Builders for common and random CPWL instances.

use rand::seq::SliceRandom;
use rand::Rng;

use super::partition::arrangement_cells;
use super::{AffineFunc, CpwlError, CpwlPieces};
use crate::geometry::{dot, hyperplane_normal, BoundingBox, HalfSpace};
use crate::mesh::SimplicialMesh;

/// `|x|` on `[-a, a]` as the two pieces `x` and `-x`.
pub fn abs_function(a: f64) -> CpwlPieces {
    CpwlPieces::new(
        1,
        vec![AffineFunc::new(vec![1.0], 0.0), AffineFunc::new(vec![-1.0], 0.0)],
        vec![
            vec![HalfSpace::new(vec![-1.0], 0.0)],
            vec![HalfSpace::new(vec![1.0], 0.0)],
        ],
        None,
        Some(BoundingBox::cube(1, -a, a)),
    )
    .expect("valid pieces")
}

/// Piece list for a function `f` known to coincide with one of `candidates` everywhere in
/// `domain` (d <= 2). Regions are the arrangement cells of the candidates; only candidates
/// that are active somewhere are kept.
pub fn from_function(
    dim: usize,
    candidates: &[AffineFunc],
    domain: &BoundingBox,
    f: impl Fn(&[f64]) -> f64,
) -> Result<CpwlPieces, CpwlError> {
    let cells = arrangement_cells(candidates, domain)?;
    let mut used: Vec<usize> = Vec::new();
    let mut regions = Vec::with_capacity(cells.len());
    let mut region_pieces = Vec::with_capacity(cells.len());
    for (k, cell) in cells.into_iter().enumerate() {
        let fx = f(&cell.sample);
        let active = (0..candidates.len())
            .min_by(|&a, &b| {
                (candidates[a].eval(&cell.sample) - fx)
                    .abs()
                    .total_cmp(&(candidates[b].eval(&cell.sample) - fx).abs())
            })
            .ok_or(CpwlError::AmbiguousActivePiece(k))?;
        if (candidates[active].eval(&cell.sample) - fx).abs() > 1e-9 * (1.0 + fx.abs()) {
            return Err(CpwlError::AmbiguousActivePiece(k));
        }
        let slot = match used.iter().position(|&u| u == active) {
            Some(s) => s,
            None => {
                used.push(active);
                used.len() - 1
            }
        };
        regions.push(cell.halfspaces);
        region_pieces.push(slot);
    }
    let pieces = used.iter().map(|&i| candidates[i].clone()).collect();
    CpwlPieces::new(dim, pieces, regions, Some(region_pieces), Some(domain.clone()))
}

/// Random CPWL on `[-1, 1]^dim` with at most `m` pieces: a random max-of-mins of `m`
/// random affine functions.
pub fn random_cpwl<R: Rng + ?Sized>(dim: usize, m: usize, rng: &mut R) -> CpwlPieces {
    let domain = BoundingBox::cube(dim, -1.0, 1.0);
    loop {
        let candidates: Vec<AffineFunc> = (0..m)
            .map(|_| {
                AffineFunc::new(
                    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    rng.gen_range(-0.5..0.5),
                )
            })
            .collect();
        let clause_count = rng.gen_range(1..=m.max(1));
        let clauses: Vec<Vec<usize>> = (0..clause_count)
            .map(|_| {
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(rng);
                idx.truncate(rng.gen_range(1..=m));
                idx
            })
            .collect();
        let lattice = super::LatticeForm::new(candidates.clone(), clauses).expect("valid clauses");
        if let Ok(f) = from_function(dim, &candidates, &domain, |x| lattice.eval(x)) {
            return f;
        }
    }
}

/// A random continuous path on `[0, 1]` satisfying the hypotheses of the path witness, as knots and
/// pieces.
pub fn random_path_instance<R: Rng + ?Sized>(rng: &mut R) -> (Vec<f64>, Vec<AffineFunc>) {
    loop {
        let r1 = rng.gen_range(3..=7);
        let mut knots: Vec<f64> = (0..r1 - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
        knots.push(0.0);
        knots.push(1.0);
        knots.sort_by(f64::total_cmp);
        if knots.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        let mut y = rng.gen_range(-1.0..1.0);
        let mut pieces = Vec::with_capacity(r1);
        for i in 0..r1 {
            let k: f64 = rng.gen_range(-4.0..4.0);
            pieces.push(AffineFunc::new(vec![k], y - k * knots[i]));
            y += k * (knots[i + 1] - knots[i]);
        }
        let (k0, b0) = (pieces[0].gradient[0], pieces[0].offset);
        let (kr, br) = (pieces[r1 - 1].gradient[0], pieces[r1 - 1].offset);
        if b0 > br && k0 + b0 > kr + br {
            return (knots, pieces);
        }
    }
}

/// Half-spaces of simplex `s`, oriented inward.
pub fn simplex_halfspaces(mesh: &SimplicialMesh, s: usize) -> Vec<HalfSpace> {
    let simplex = &mesh.simplices()[s];
    let verts = mesh.vertices();
    (0..simplex.len())
        .map(|omit| {
            let facet: Vec<&[f64]> = simplex
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != omit)
                .map(|(_, &v)| verts[v].as_slice())
                .collect();
            let n = hyperplane_normal(&facet).expect("non-degenerate simplex");
            let c = dot(&n, facet[0]);
            if dot(&n, &verts[simplex[omit]]) > c {
                HalfSpace::new(n.iter().map(|v| -v).collect(), -c)
            } else {
                HalfSpace::new(n, c)
            }
        })
        .collect()
}

/// `max{0, min_k g_k}` for the local affines `g_k` of vertex `i`, as a piece list on the
/// mesh bounding box inflated by a quarter of its extent. On the mesh this is the nodal
/// basis function. For an interior vertex the pieces are the star affines followed by the
/// zero function and the complement of the star is split into one convex region per
/// boundary facet; a boundary vertex (d <= 2) goes through the arrangement of its pieces.
pub fn hat_function(mesh: &SimplicialMesh, i: usize) -> Result<CpwlPieces, CpwlError> {
    if !mesh.is_locally_convex(i) {
        return Err(CpwlError::PreconditionViolated(format!("star of vertex {i} is not convex")));
    }
    let d = mesh.dim();
    let star = mesh
        .vertex_star(i)
        .map_err(|e| CpwlError::Invalid(e.to_string()))?;
    let domain = mesh.bounding_box().inflated(0.25);
    let mut pieces = star.local_affines.clone();
    let zero = pieces.len();
    pieces.push(AffineFunc::constant(d, 0.0));
    if mesh.boundary()[i] {
        let g = star.local_affines;
        return from_function(d, &pieces, &domain, |x| {
            g.iter().map(|a| a.eval(x)).fold(f64::INFINITY, f64::min).max(0.0)
        });
    }
    let mut regions: Vec<Vec<HalfSpace>> = star
        .incident
        .iter()
        .map(|&s| simplex_halfspaces(mesh, s))
        .collect();
    let mut region_pieces: Vec<usize> = (0..zero).collect();
    let facets = mesh.star_halfspaces(i);
    for (e, h) in facets.iter().enumerate() {
        let mut r = vec![h.flipped()];
        r.extend(facets[..e].iter().cloned());
        regions.push(r);
        region_pieces.push(zero);
    }
    CpwlPieces::new(d, pieces, regions, Some(region_pieces), Some(domain))
}
