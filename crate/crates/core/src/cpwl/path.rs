use super::{AffineFunc, CpwlError, CpwlPieces};

/// Witness piece for a CPWL path on `[0, 1]` with knots `0 = t_0 < ... < t_{r+1} = 1`
/// and pieces `l_i(t) = k_i t + b_i` on `[t_i, t_{i+1}]`, assuming `l_0 > l_r` at both
/// ends. Returns the index `p` of the smallest slope, which satisfies `b_p >= b_0` and
/// `k_p + b_p <= k_r + b_r`.
pub fn path_witness(knots: &[f64], pieces: &[AffineFunc]) -> Result<usize, CpwlError> {
    let r1 = pieces.len();
    if r1 < 2 || knots.len() != r1 + 1 {
        return Err(CpwlError::PreconditionViolated(
            "need at least two pieces and one more knot than pieces".into(),
        ));
    }
    if pieces.iter().any(|p| p.dim() != 1) {
        return Err(CpwlError::PreconditionViolated("pieces must be one-dimensional".into()));
    }
    if knots[0] != 0.0 || knots[r1] != 1.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CpwlError::PreconditionViolated("knots must increase from 0 to 1".into()));
    }
    for i in 1..r1 {
        let t = knots[i];
        let jump = (pieces[i - 1].eval(&[t]) - pieces[i].eval(&[t])).abs();
        if jump > 1e-10 {
            return Err(CpwlError::PreconditionViolated(format!("path is discontinuous at knot {i}")));
        }
    }
    let (k0, b0) = (pieces[0].gradient[0], pieces[0].offset);
    let (kr, br) = (pieces[r1 - 1].gradient[0], pieces[r1 - 1].offset);
    if !(b0 > br && k0 + b0 > kr + br) {
        return Err(CpwlError::PreconditionViolated(
            "first piece must lie strictly above the last piece at both ends".into(),
        ));
    }
    let p = (0..r1)
        .min_by(|&a, &b| pieces[a].gradient[0].total_cmp(&pieces[b].gradient[0]))
        .expect("non-empty");
    let (kp, bp) = (pieces[p].gradient[0], pieces[p].offset);
    let slack = 1e-10 * (1.0 + b0.abs() + bp.abs() + kr.abs() + br.abs());
    if bp < b0 - slack || kp + bp > kr + br + slack {
        return Err(CpwlError::PreconditionViolated(format!(
            "witness {p} fails the separating inequalities"
        )));
    }
    Ok(p)
}

/// [`path_witness`] for a one-dimensional [`CpwlPieces`] over `[0, 1]`, taking the regions in
/// left-to-right order.
pub fn verify_1d_path_lemma(f: &CpwlPieces) -> Result<usize, CpwlError> {
    if f.dim() != 1 {
        return Err(CpwlError::PreconditionViolated("path must be one-dimensional".into()));
    }
    let mut spans: Vec<(f64, f64, usize)> = Vec::new();
    for r in 0..f.regions().len() {
        let v = f.region_vertices(r)?;
        if v.len() < 2 {
            continue;
        }
        let a = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let b = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        spans.push((a, b, f.region_pieces()[r]));
    }
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut knots: Vec<f64> = spans.iter().map(|s| s.0).collect();
    knots.push(spans.last().map_or(1.0, |s| s.1));
    let pieces: Vec<AffineFunc> = spans.iter().map(|s| f.pieces()[s.2].clone()).collect();
    path_witness(&knots, &pieces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(knots: &[f64], slopes: &[f64], start: f64) -> Vec<AffineFunc> {
        let mut y = start;
        let mut out = Vec::new();
        for (i, k) in slopes.iter().enumerate() {
            out.push(AffineFunc::new(vec![*k], y - k * knots[i]));
            y += k * (knots[i + 1] - knots[i]);
        }
        out
    }

    #[test]
    fn tent_path_middle_witness() {
        let knots = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let pieces = path(&knots, &[1.0, -2.0, 1.0], 0.0);
        let p = path_witness(&knots, &pieces).unwrap();
        assert_eq!(p, 1);
        let (kp, bp) = (pieces[p].gradient[0], pieces[p].offset);
        assert!(bp >= pieces[0].offset);
        assert!(kp + bp <= pieces[2].gradient[0] + pieces[2].offset);
    }

    #[test]
    fn reversed_hypothesis_rejected() {
        let knots = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let pieces = path(&knots, &[-1.0, 2.0, -1.0], 0.0);
        assert!(matches!(
            path_witness(&knots, &pieces),
            Err(CpwlError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn equal_slopes_rejected() {
        let knots = [0.0, 0.5, 1.0];
        let pieces = path(&knots, &[1.0, 1.0], 0.0);
        assert!(path_witness(&knots, &pieces).is_err());
    }

    #[test]
    fn from_pieces_object() {
        let knots = [0.0, 0.25, 0.75, 1.0];
        let pieces = path(&knots, &[2.0, -3.0, 2.0], 0.0);
        let regions = (0..3)
            .map(|i| crate::cpwl::interval_halfspaces(knots[i], knots[i + 1]))
            .collect();
        let f = CpwlPieces::new(
            1,
            pieces,
            regions,
            None,
            Some(crate::geometry::BoundingBox::cube(1, 0.0, 1.0)),
        )
        .unwrap();
        assert_eq!(verify_1d_path_lemma(&f).unwrap(), 1);
    }
}
