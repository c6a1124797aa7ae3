//! Continuous piecewise-linear functions: explicit piece lists over polyhedral regions,
//! unique-order partitions, and the max-of-mins lattice form.

mod generate;
mod lattice;
mod partition;
mod path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, BoundingBox, HalfSpace};

pub use generate::*;
pub use lattice::{lattice_from_convex_regions, lattice_from_unique_order};
pub use partition::{unique_order_partition, OrderCell, UniqueOrderPartition};
pub use path::{path_witness, verify_1d_path_lemma};

/// Componentwise tolerance under which two affine functions are the same piece.
pub const PIECE_TOL: f64 = 1e-12;

/// Containment slack when locating a point in a region.
pub const REGION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpwlError {
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("operation supports dimension <= 2, got {0}")]
    DimensionUnsupported(usize),
    #[error("pieces {0} and {1} are identical")]
    DuplicatePieces(usize, usize),
    #[error("no piece matches the function on cell {0}")]
    AmbiguousActivePiece(usize),
    #[error("region {0} is unbounded; a domain box is required")]
    UnboundedRegionUnsupported(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid CPWL description: {0}")]
    Invalid(String),
    #[error("partition check failed: {0}")]
    PartitionCheck(String),
}

/// `x -> a . x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFunc {
    #[serde(rename = "a")]
    pub gradient: Vec<f64>,
    #[serde(rename = "b")]
    pub offset: f64,
}

impl AffineFunc {
    pub fn new(gradient: Vec<f64>, offset: f64) -> Self {
        Self { gradient, offset }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(vec![0.0; dim], c)
    }

    /// The coordinate function `x_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut g = vec![0.0; dim];
        g[k] = 1.0;
        Self::new(g, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        geometry::dot(&self.gradient, x) + self.offset
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.gradient.iter().map(|v| v * s).collect(), self.offset * s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.gradient
                .iter()
                .zip(&other.gradient)
                .map(|(a, b)| a - b)
                .collect(),
            self.offset - other.offset,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.gradient
                .iter()
                .zip(&other.gradient)
                .map(|(a, b)| a + b)
                .collect(),
            self.offset + other.offset,
        )
    }

    pub fn is_constant(&self) -> bool {
        self.gradient.iter().all(|g| *g == 0.0)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.offset - other.offset).abs() < tol
            && self
                .gradient
                .iter()
                .zip(&other.gradient)
                .all(|(a, b)| (a - b).abs() < tol)
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.gradient.iter().all(|g| g.is_finite())
    }

    /// `{x : self(x) <= other(x)}` as a half-space.
    pub fn below(&self, other: &Self) -> HalfSpace {
        let d = self.sub(other);
        HalfSpace::new(d.gradient, -d.offset)
    }
}

/// A CPWL function given by affine pieces on polyhedral regions. Several regions may
/// carry the same piece; `region_pieces[r]` names the piece active on region `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpwlPieces {
    dim: usize,
    pieces: Vec<AffineFunc>,
    regions: Vec<Vec<HalfSpace>>,
    region_pieces: Vec<usize>,
    domain: Option<BoundingBox>,
}

impl CpwlPieces {
    /// Validates dimensions and piece distinctness. With `region_pieces = None` region `r`
    /// carries piece `r`.
    pub fn new(
        dim: usize,
        pieces: Vec<AffineFunc>,
        regions: Vec<Vec<HalfSpace>>,
        region_pieces: Option<Vec<usize>>,
        domain: Option<BoundingBox>,
    ) -> Result<Self, CpwlError> {
        if dim == 0 {
            return Err(CpwlError::Invalid("dimension must be positive".into()));
        }
        if pieces.is_empty() {
            return Err(CpwlError::Invalid("no pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.dim() != dim || !p.is_finite() {
                return Err(CpwlError::Invalid(format!("piece {i} is malformed")));
            }
        }
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if pieces[i].approx_eq(&pieces[j], PIECE_TOL) {
                    return Err(CpwlError::DuplicatePieces(i, j));
                }
            }
        }
        let region_pieces = match region_pieces {
            Some(rp) => rp,
            None if regions.len() == pieces.len() => (0..pieces.len()).collect(),
            None => {
                return Err(CpwlError::Invalid(format!(
                    "{} regions for {} pieces without a region-to-piece map",
                    regions.len(),
                    pieces.len()
                )))
            }
        };
        if region_pieces.len() != regions.len() {
            return Err(CpwlError::Invalid("region-to-piece map has the wrong length".into()));
        }
        if let Some(&bad) = region_pieces.iter().find(|&&p| p >= pieces.len()) {
            return Err(CpwlError::Invalid(format!("region refers to missing piece {bad}")));
        }
        for r in &regions {
            if r.iter().any(|h| h.normal.len() != dim) {
                return Err(CpwlError::Invalid("half-space of the wrong dimension".into()));
            }
        }
        if let Some(b) = &domain {
            if b.dim() != dim {
                return Err(CpwlError::Invalid("domain box of the wrong dimension".into()));
            }
        }
        Ok(Self {
            dim,
            pieces,
            regions,
            region_pieces,
            domain,
        })
    }

    /// A single affine function on a box.
    pub fn affine(f: AffineFunc, domain: BoundingBox) -> Self {
        let dim = f.dim();
        Self::new(dim, vec![f], vec![vec![]], None, Some(domain)).expect("valid affine")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffineFunc] {
        &self.pieces
    }

    pub fn regions(&self) -> &[Vec<HalfSpace>] {
        &self.regions
    }

    pub fn region_pieces(&self) -> &[usize] {
        &self.region_pieces
    }

    pub fn domain(&self) -> Option<&BoundingBox> {
        self.domain.as_ref()
    }

    /// Number of distinct pieces.
    pub fn m(&self) -> usize {
        self.pieces.len()
    }

    /// Index of the first region containing `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if let Some(b) = &self.domain {
            if !b.contains(x, REGION_TOL) {
                return None;
            }
        }
        self.regions
            .iter()
            .position(|r| geometry::contains_all(r, x, REGION_TOL))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, CpwlError> {
        if x.len() != self.dim {
            return Err(CpwlError::OutsideDomain(x.to_vec()));
        }
        self.locate(x)
            .map(|r| self.pieces[self.region_pieces[r]].eval(x))
            .ok_or_else(|| CpwlError::OutsideDomain(x.to_vec()))
    }

    /// Half-spaces of region `r`, clipped to the domain box when there is one.
    pub fn clipped_region(&self, r: usize) -> Vec<HalfSpace> {
        let mut hs = self.regions[r].clone();
        if let Some(b) = &self.domain {
            hs.extend(b.halfspaces());
        }
        hs
    }

    /// Vertices of region `r` clipped to the domain box.
    pub fn region_vertices(&self, r: usize) -> Result<Vec<Vec<f64>>, CpwlError> {
        if self.domain.is_none() {
            return Err(CpwlError::UnboundedRegionUnsupported(r));
        }
        let hs = self.clipped_region(r);
        if self.dim == 2 {
            let poly = self.region_polygon(r);
            return Ok(poly.iter().map(|p| p.to_vec()).collect());
        }
        Ok(geometry::polytope_vertices(&hs, self.dim))
    }

    /// Convex polygon of region `r` in 2D (empty if the region has no area).
    pub fn region_polygon(&self, r: usize) -> Vec<[f64; 2]> {
        let Some(b) = &self.domain else {
            return Vec::new();
        };
        let mut poly = b.polygon();
        for h in &self.regions[r] {
            poly = geometry::clip_polygon(&poly, h);
            if poly.is_empty() {
                break;
            }
        }
        if geometry::polygon_area(&poly).abs() < geometry::AREA_TOL {
            Vec::new()
        } else {
            poly
        }
    }

    /// Sampling check of the region partition: every sample is covered, no sample is
    /// strictly inside two regions, and pieces agree at points on region boundaries.
    pub fn check_partition<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<(), CpwlError> {
        let Some(b) = &self.domain else {
            return Err(CpwlError::UnboundedRegionUnsupported(0));
        };
        for _ in 0..samples {
            let x = b.sample(rng);
            let covering: Vec<usize> = (0..self.regions.len())
                .filter(|&r| geometry::contains_all(&self.regions[r], &x, REGION_TOL))
                .collect();
            if covering.is_empty() {
                return Err(CpwlError::PartitionCheck(format!("{x:?} is not covered")));
            }
            let strict = (0..self.regions.len())
                .filter(|&r| geometry::contains_all(&self.regions[r], &x, -1e-9))
                .count();
            if strict > 1 {
                return Err(CpwlError::PartitionCheck(format!("{x:?} lies inside two regions")));
            }
        }
        for x in self.boundary_samples(rng) {
            let vals: Vec<f64> = (0..self.regions.len())
                .filter(|&r| geometry::contains_all(&self.regions[r], &x, 1e-12))
                .map(|r| self.pieces[self.region_pieces[r]].eval(&x))
                .collect();
            if let (Some(lo), Some(hi)) = (
                vals.iter().copied().reduce(f64::min),
                vals.iter().copied().reduce(f64::max),
            ) {
                if hi - lo > 1e-10 * (1.0 + hi.abs()) {
                    return Err(CpwlError::PartitionCheck(format!(
                        "discontinuity {:.3e} at {x:?}",
                        hi - lo
                    )));
                }
            }
        }
        Ok(())
    }

    fn boundary_samples<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        match self.dim {
            1 => {
                for r in 0..self.regions.len() {
                    if let Ok(v) = self.region_vertices(r) {
                        out.extend(v);
                    }
                }
            }
            2 => {
                for r in 0..self.regions.len() {
                    let poly = self.region_polygon(r);
                    for k in 0..poly.len() {
                        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
                        for _ in 0..3 {
                            let t: f64 = rng.gen();
                            out.push(vec![p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                        }
                    }
                }
            }
            _ => {}
        }
        out
    }
}

/// `max_k min_{i in s_k} l_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeForm {
    pub pieces: Vec<AffineFunc>,
    pub clauses: Vec<Vec<usize>>,
}

impl LatticeForm {
    pub fn new(pieces: Vec<AffineFunc>, clauses: Vec<Vec<usize>>) -> Result<Self, CpwlError> {
        if clauses.is_empty() {
            return Err(CpwlError::Invalid("lattice form without clauses".into()));
        }
        for (k, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(CpwlError::Invalid(format!("clause {k} is empty")));
            }
            if let Some(i) = c.iter().find(|&&i| i >= pieces.len()) {
                return Err(CpwlError::Invalid(format!("clause {k} refers to missing piece {i}")));
            }
        }
        Ok(Self { pieces, clauses })
    }

    pub fn dim(&self) -> usize {
        self.pieces.first().map_or(0, AffineFunc::dim)
    }

    pub fn m(&self) -> usize {
        self.pieces.len()
    }

    /// Number of clauses.
    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&i| self.pieces[i].eval(x))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Removes clauses that are exactly identical (as sorted index sets) to an earlier one.
    pub fn dedup(&mut self) {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        self.clauses.retain(|c| {
            let mut s = c.clone();
            s.sort_unstable();
            s.dedup();
            if seen.contains(&s) {
                false
            } else {
                seen.push(s);
                true
            }
        });
    }
}

/// Half-spaces of a convex polygon given counter-clockwise.
pub fn polygon_halfspaces(poly: &[[f64; 2]]) -> Vec<HalfSpace> {
    let n = poly.len();
    (0..n)
        .filter_map(|k| {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            let normal = vec![q[1] - p[1], p[0] - q[0]];
            let len = geometry::norm(&normal);
            if len < 1e-14 {
                return None;
            }
            let normal: Vec<f64> = normal.iter().map(|v| v / len).collect();
            let offset = geometry::dot(&normal, &p);
            Some(HalfSpace::new(normal, offset))
        })
        .collect()
}

/// Half-spaces of the interval `[a, b]`.
pub fn interval_halfspaces(a: f64, b: f64) -> Vec<HalfSpace> {
    vec![HalfSpace::new(vec![-1.0], -a), HalfSpace::new(vec![1.0], b)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn abs_value_pieces() {
        let f = abs_function(1.0);
        assert_eq!(f.eval(&[-0.75]).unwrap(), 0.75);
        assert_eq!(f.eval(&[0.0]).unwrap(), 0.0);
        assert!(matches!(f.eval(&[2.0]), Err(CpwlError::OutsideDomain(_))));
    }

    #[test]
    fn lattice_abs() {
        let l = LatticeForm::new(
            vec![AffineFunc::new(vec![1.0], 0.0), AffineFunc::new(vec![-1.0], 0.0)],
            vec![vec![0], vec![1]],
        )
        .unwrap();
        assert_eq!(l.eval(&[2.0]), 2.0);
        assert_eq!(l.eval(&[-1.5]), 1.5);
    }

    #[test]
    fn duplicate_pieces_rejected() {
        let p = AffineFunc::new(vec![1.0], 0.0);
        let err = CpwlPieces::new(1, vec![p.clone(), p], vec![vec![], vec![]], None, None).unwrap_err();
        assert_eq!(err, CpwlError::DuplicatePieces(0, 1));
    }

    #[test]
    fn empty_clause_rejected() {
        let p = AffineFunc::new(vec![1.0], 0.0);
        assert!(LatticeForm::new(vec![p], vec![vec![]]).is_err());
    }

    #[test]
    fn dedup_only_identical_clauses() {
        let p = vec![AffineFunc::new(vec![1.0], 0.0), AffineFunc::new(vec![-1.0], 0.0)];
        let mut l = LatticeForm::new(p, vec![vec![0, 1], vec![1, 0], vec![0]]).unwrap();
        l.dedup();
        assert_eq!(l.clauses, vec![vec![0, 1], vec![0]]);
    }

    #[test]
    fn hat_partition_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = crate::mesh::structured_triangles(2, 2);
        let hat = hat_function(&m, 4).unwrap();
        hat.check_partition(2000, &mut rng).unwrap();
        assert!((hat.eval(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_instances_are_valid_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=2 {
            for _ in 0..5 {
                let f = random_cpwl(d, 4, &mut rng);
                f.check_partition(500, &mut rng).unwrap();
                assert!(f.m() <= 4);
            }
        }
    }
}
