use nalgebra::DMatrix;
use rand::Rng;

use super::NetError;

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

/// Numerical rank of the `samples x m` matrix `[ReLU(w_i . x_j + b_i)]` at random points of
/// `[-half_width, half_width]^d`.
pub fn feature_rank<R: Rng + ?Sized>(
    params: &[(Vec<f64>, f64)],
    sample_count: usize,
    half_width: f64,
    rng: &mut R,
) -> usize {
    let Some((w0, _)) = params.first() else { return 0 };
    let d = w0.len();
    let points: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect())
        .collect();
    rank_at(params, &points)
}

fn rank_at(params: &[(Vec<f64>, f64)], points: &[Vec<f64>]) -> usize {
    let m = params.len();
    if m == 0 || points.is_empty() {
        return 0;
    }
    let mut a = DMatrix::zeros(points.len(), m);
    for (j, x) in points.iter().enumerate() {
        for (i, (w, b)) in params.iter().enumerate() {
            let z: f64 = w.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b;
            a[(j, i)] = z.max(0.0);
        }
    }
    let sv = a.singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * smax).count()
}

/// Checks that the one-hidden-layer features `ReLU(w_i . x + b_i)` are linearly
/// independent by sampling on a box `[-h, h]^d` with `h >= 10` large enough that every
/// kink hyperplane passes through its inner half, with every other point moved to within
/// unit distance of one of the hyperplanes. Pairwise dependent parameter rows are
/// reported as an error, since independence cannot hold for them.
pub fn independence_check<R: Rng + ?Sized>(
    params: &[(Vec<f64>, f64)],
    sample_count: usize,
    rng: &mut R,
) -> Result<bool, NetError> {
    let rows: Vec<Vec<f64>> = params
        .iter()
        .map(|(w, b)| w.iter().copied().chain(std::iter::once(*b)).collect())
        .collect();
    for (i, r) in rows.iter().enumerate() {
        if r.iter().all(|v| *v == 0.0) {
            return Err(NetError::ZeroFeature(i));
        }
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (u, v) = (&rows[i], &rows[j]);
            let uu: f64 = u.iter().map(|a| a * a).sum();
            let vv: f64 = v.iter().map(|a| a * a).sum();
            let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            // Gram determinant vanishes exactly for parallel rows
            if uu * vv - uv * uv <= 1e-12 * uu * vv {
                return Err(NetError::PairwiseDependent(i, j));
            }
        }
    }
    let reach = params
        .iter()
        .map(|(w, b)| {
            let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 { b.abs() / n } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let h = (2.0 * reach + 1.0).max(10.0);
    let d = params[0].0.len();
    // half the points uniform in the box, half close to the kinks
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(sample_count);
    for j in 0..sample_count {
        let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(-h..h)).collect();
        let (w, b) = &params[j % params.len()];
        let ww: f64 = w.iter().map(|v| v * v).sum();
        if j % 2 == 1 && ww > 0.0 {
            let z: f64 = w.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + b;
            let shift = (z - rng.gen_range(-1.0..1.0) * ww.sqrt()) / ww;
            for (xi, wi) in x.iter_mut().zip(w) {
                *xi -= shift * wi;
            }
        }
        points.push(x);
    }
    Ok(rank_at(params, &points) == params.len())
}
