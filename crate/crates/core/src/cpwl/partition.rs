use serde::{Deserialize, Serialize};

use super::{interval_halfspaces, polygon_halfspaces, AffineFunc, CpwlError, CpwlPieces, PIECE_TOL};
use crate::geometry::{self, BoundingBox, HalfSpace, AREA_TOL};

/// One cell of the arrangement of pairwise-equality hyperplanes, with the ascending order
/// of piece values on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderCell {
    pub halfspaces: Vec<HalfSpace>,
    pub vertices: Vec<Vec<f64>>,
    pub sample: Vec<f64>,
    pub order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniqueOrderPartition {
    pub cells: Vec<OrderCell>,
}

impl UniqueOrderPartition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Ascending order of the piece values at `x` (ties by index).
pub fn value_order(pieces: &[AffineFunc], x: &[f64]) -> Vec<usize> {
    let vals: Vec<f64> = pieces.iter().map(|p| p.eval(x)).collect();
    let mut idx: Vec<usize> = (0..pieces.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    idx
}

pub fn unique_order_partition(f: &CpwlPieces) -> Result<UniqueOrderPartition, CpwlError> {
    let domain = f.domain().ok_or(CpwlError::UnboundedRegionUnsupported(0))?;
    arrangement_cells(f.pieces(), domain).map(|cells| UniqueOrderPartition { cells })
}

/// Cells of the arrangement of `{l_i = l_j}` inside `domain`, for `d <= 2`.
pub fn arrangement_cells(pieces: &[AffineFunc], domain: &BoundingBox) -> Result<Vec<OrderCell>, CpwlError> {
    let d = domain.dim();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if pieces[i].approx_eq(&pieces[j], PIECE_TOL) {
                return Err(CpwlError::DuplicatePieces(i, j));
            }
        }
    }
    match d {
        1 => Ok(cells_1d(pieces, domain.lo[0], domain.hi[0])),
        2 => Ok(cells_2d(pieces, domain)),
        _ => Err(CpwlError::DimensionUnsupported(d)),
    }
}

fn cells_1d(pieces: &[AffineFunc], lo: f64, hi: f64) -> Vec<OrderCell> {
    let mut cuts = vec![lo, hi];
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let dk = pieces[i].gradient[0] - pieces[j].gradient[0];
            if dk.abs() < PIECE_TOL {
                continue;
            }
            let t = -(pieces[i].offset - pieces[j].offset) / dk;
            if t > lo && t < hi {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < AREA_TOL);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] >= AREA_TOL)
        .map(|w| {
            let sample = vec![0.5 * (w[0] + w[1])];
            OrderCell {
                halfspaces: interval_halfspaces(w[0], w[1]),
                vertices: vec![vec![w[0]], vec![w[1]]],
                order: value_order(pieces, &sample),
                sample,
            }
        })
        .collect()
}

fn cells_2d(pieces: &[AffineFunc], domain: &BoundingBox) -> Vec<OrderCell> {
    let mut polys = vec![domain.polygon()];
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let h = pieces[i].below(&pieces[j]);
            if geometry::norm(&h.normal) < PIECE_TOL {
                continue;
            }
            let flipped = h.flipped();
            let mut next = Vec::with_capacity(polys.len() * 2);
            for p in &polys {
                for side in [&h, &flipped] {
                    let q = geometry::clip_polygon(p, side);
                    if geometry::polygon_area(&q).abs() >= AREA_TOL {
                        next.push(q);
                    }
                }
            }
            polys = next;
        }
    }
    polys
        .into_iter()
        .map(|poly| {
            let c = geometry::vertex_centroid(&poly);
            let sample = vec![c[0], c[1]];
            OrderCell {
                halfspaces: polygon_halfspaces(&poly),
                vertices: poly.iter().map(|p| p.to_vec()).collect(),
                order: value_order(pieces, &sample),
                sample,
            }
        })
        .collect()
}
