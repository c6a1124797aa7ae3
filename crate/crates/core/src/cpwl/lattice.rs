use super::{CpwlError, CpwlPieces, LatticeForm, UniqueOrderPartition};

/// Tolerance for matching the active piece to the function value at a cell sample.
const ACTIVE_TOL: f64 = 1e-9;

/// One clause per unique-order cell: the pieces lying above the active piece there.
pub fn lattice_from_unique_order(
    f: &CpwlPieces,
    p: &UniqueOrderPartition,
) -> Result<LatticeForm, CpwlError> {
    let pieces = f.pieces();
    let mut clauses = Vec::with_capacity(p.cells.len());
    for (k, cell) in p.cells.iter().enumerate() {
        let x = &cell.sample;
        let fx = f.eval(x)?;
        let vals: Vec<f64> = pieces.iter().map(|l| l.eval(x)).collect();
        let scale = 1.0 + fx.abs();
        let active = (0..pieces.len())
            .filter(|&i| (vals[i] - fx).abs() <= ACTIVE_TOL * scale)
            .min_by(|&a, &b| (vals[a] - fx).abs().total_cmp(&(vals[b] - fx).abs()))
            .ok_or(CpwlError::AmbiguousActivePiece(k))?;
        let clause: Vec<usize> = (0..pieces.len())
            .filter(|&i| vals[i] >= vals[active])
            .collect();
        clauses.push(clause);
    }
    LatticeForm::new(pieces.to_vec(), clauses)
}

/// One clause per region: the pieces that dominate the region's piece at every vertex of
/// the region (clipped to the domain box). Regions without interior are skipped.
pub fn lattice_from_convex_regions(f: &CpwlPieces) -> Result<LatticeForm, CpwlError> {
    let pieces = f.pieces();
    let d = f.dim();
    let mut clauses = Vec::new();
    for r in 0..f.regions().len() {
        let verts = f.region_vertices(r)?;
        if verts.len() < d + 1 {
            continue;
        }
        let k = f.region_pieces()[r];
        let clause: Vec<usize> = (0..pieces.len())
            .filter(|&i| {
                verts.iter().all(|v| {
                    let diff = pieces[i].eval(v) - pieces[k].eval(v);
                    diff >= -1e-9 * (1.0 + pieces[k].eval(v).abs())
                })
            })
            .collect();
        clauses.push(clause);
    }
    LatticeForm::new(pieces.to_vec(), clauses)
}
