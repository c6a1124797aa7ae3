use super::quadrature::{GAUSS5_NODES as XI, GAUSS5_WEIGHTS as W};
use super::{Bvp1dProblem, GalerkinError};

/// `n` equispaced points on `[0, 1]`, endpoints included.
pub fn uniform_knots(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn check_knots(t: &[f64]) -> Result<(), GalerkinError> {
    if t.len() < 2 || t[0] != 0.0 || t[t.len() - 1] != 1.0 {
        return Err(GalerkinError::InvalidKnots);
    }
    for i in 1..t.len() {
        if !(t[i] > t[i - 1]) {
            return Err(GalerkinError::KnotOrderViolated { index: i });
        }
    }
    Ok(())
}

fn check_state(t: &[f64], theta: &[f64]) -> Result<(), GalerkinError> {
    check_knots(t)?;
    if theta.len() != t.len() - 1 {
        return Err(GalerkinError::SlopeCount {
            expected: t.len() - 1,
            got: theta.len(),
        });
    }
    Ok(())
}

/// Values at the knots, starting from `u(0) = 0`.
pub fn nodal_values(t: &[f64], theta: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(t.len());
    u.push(0.0);
    for (e, th) in theta.iter().enumerate() {
        u.push(u[e] + th * (t[e + 1] - t[e]));
    }
    u
}

pub fn slopes_from_nodal(t: &[f64], u: &[f64]) -> Vec<f64> {
    (0..t.len() - 1).map(|e| (u[e + 1] - u[e]) / (t[e + 1] - t[e])).collect()
}

/// Galerkin solution on the fixed grid `t`, returned as slopes.
pub fn solve_fem_on_grid(t: &[f64], problem: &Bvp1dProblem) -> Result<Vec<f64>, GalerkinError> {
    check_knots(t)?;
    let n = t.len() - 1;
    if n < 2 {
        return Ok(vec![0.0; n]);
    }
    // interior unknowns 1..n-1 as a tridiagonal system
    let m = n - 1;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    let mut rhs = vec![0.0; m];
    for e in 0..n {
        let h = t[e + 1] - t[e];
        let (mut left, mut right) = (0.0, 0.0);
        for q in 0..5 {
            let fx = problem.f(t[e] + h * XI[q]);
            left += W[q] * fx * (1.0 - XI[q]);
            right += W[q] * fx * XI[q];
        }
        if e >= 1 {
            diag[e - 1] += 1.0 / h;
            rhs[e - 1] += h * left;
        }
        if e + 1 <= m {
            diag[e] += 1.0 / h;
            rhs[e] += h * right;
        }
        if e >= 1 && e + 1 <= m {
            off[e - 1] = -1.0 / h;
        }
    }
    let interior = thomas(&diag, &off, &rhs)?;
    let mut u = vec![0.0; n + 1];
    u[1..n].copy_from_slice(&interior);
    Ok(slopes_from_nodal(t, &u))
}

/// Symmetric tridiagonal solve.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>, GalerkinError> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..m {
        let lower = if i > 0 { off[i - 1] } else { 0.0 };
        let denom = diag[i] - lower * prev_c;
        if !denom.is_finite() || denom.abs() < 1e-300 {
            return Err(GalerkinError::SingularSystem);
        }
        c[i] = if i + 1 < m { off[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower * prev_d) / denom;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        x[i] = d[i] - if i + 1 < m { c[i] * x[i + 1] } else { 0.0 };
    }
    Ok(x)
}

/// `E(u) = int (u'^2 / 2 - f u)` for the function with knots `t` and slopes `theta`.
pub fn energy(t: &[f64], theta: &[f64], problem: &Bvp1dProblem) -> Result<f64, GalerkinError> {
    check_state(t, theta)?;
    let u = nodal_values(t, theta);
    let mut e_total = 0.0;
    for (e, &th) in theta.iter().enumerate() {
        let h = t[e + 1] - t[e];
        let load: f64 = (0..5)
            .map(|q| W[q] * problem.f(t[e] + h * XI[q]) * (u[e] + th * h * XI[q]))
            .sum();
        e_total += 0.5 * th * th * h - h * load;
    }
    Ok(e_total)
}

/// Energy of the Galerkin solution on `t`.
pub fn reduced_energy(t: &[f64], problem: &Bvp1dProblem) -> Result<f64, GalerkinError> {
    let theta = solve_fem_on_grid(t, problem)?;
    energy(t, &theta, problem)
}

/// `|u - u_exact|_1`.
pub fn h1_error(t: &[f64], theta: &[f64], problem: &Bvp1dProblem) -> Result<f64, GalerkinError> {
    check_state(t, theta)?;
    let mut s = 0.0;
    for (e, &th) in theta.iter().enumerate() {
        let h = t[e + 1] - t[e];
        s += h * (0..5)
            .map(|q| W[q] * (th - problem.du_exact(t[e] + h * XI[q])).powi(2))
            .sum::<f64>();
    }
    Ok(s.sqrt())
}

/// Derivative of [`energy`] with respect to the interior knots, slopes held fixed.
/// The quadrature rule is differentiated exactly, so this matches finite differences of
/// [`energy`] itself. Entries for `t_0` and `t_n` are zero.
pub fn grad_knots(t: &[f64], theta: &[f64], problem: &Bvp1dProblem) -> Result<Vec<f64>, GalerkinError> {
    check_state(t, theta)?;
    let n = theta.len();
    let u = nodal_values(t, theta);
    let mut load = vec![0.0; n];
    let mut dh = vec![0.0; n];
    let mut dt = vec![0.0; n];
    for e in 0..n {
        let h = t[e + 1] - t[e];
        let th = theta[e];
        let (mut sf, mut sfv, mut sdfv, mut sdfvx, mut sfx) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for q in 0..5 {
            let x = t[e] + h * XI[q];
            let (fx, dfx) = (problem.f(x), problem.df(x));
            let v = u[e] + th * h * XI[q];
            sf += W[q] * fx;
            sfv += W[q] * fx * v;
            sdfv += W[q] * dfx * v;
            sdfvx += W[q] * dfx * v * XI[q];
            sfx += W[q] * fx * XI[q];
        }
        load[e] = h * sf;
        dh[e] = sfv + h * sdfvx + h * th * sfx;
        dt[e] = h * sdfv;
    }
    let mut tail = vec![0.0; n + 1];
    for e in (0..n).rev() {
        tail[e] = tail[e + 1] + load[e];
    }
    let mut g = vec![0.0; n + 1];
    for i in 1..n {
        let (a, b) = (theta[i - 1], theta[i]);
        let dq = dh[i - 1] + dt[i] - dh[i] + a * load[i] + (a - b) * tail[i + 1];
        g[i] = 0.5 * a * a - 0.5 * b * b - dq;
    }
    Ok(g)
}

/// Derivative of [`reduced_energy`] with respect to the interior knots. Since the Galerkin
/// solution is stationary in its nodal values, this is the partial derivative of the energy
/// with nodal values held fixed.
pub fn grad_knots_nodal(t: &[f64], theta: &[f64], problem: &Bvp1dProblem) -> Result<Vec<f64>, GalerkinError> {
    check_state(t, theta)?;
    let n = theta.len();
    let u = nodal_values(t, theta);
    // per element: d/d(upper end) and d/d(lower end) of the load integral
    let mut up = vec![0.0; n];
    let mut lo = vec![0.0; n];
    for e in 0..n {
        let h = t[e + 1] - t[e];
        let (mut sfv, mut sdfvx, mut sdfvy) = (0.0, 0.0, 0.0);
        for q in 0..5 {
            let x = t[e] + h * XI[q];
            let v = u[e] * (1.0 - XI[q]) + u[e + 1] * XI[q];
            let (fx, dfx) = (problem.f(x), problem.df(x));
            sfv += W[q] * fx * v;
            sdfvx += W[q] * dfx * v * XI[q];
            sdfvy += W[q] * dfx * v * (1.0 - XI[q]);
        }
        up[e] = sfv + h * sdfvx;
        lo[e] = -sfv + h * sdfvy;
    }
    let mut g = vec![0.0; n + 1];
    for i in 1..n {
        let (a, b) = (theta[i - 1], theta[i]);
        g[i] = 0.5 * b * b - 0.5 * a * a - up[i - 1] - lo[i];
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_knots<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
        let mut t: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(0.02..0.98)).collect();
        t.push(0.0);
        t.push(1.0);
        t.sort_by(f64::total_cmp);
        t
    }

    #[test]
    fn zero_source() {
        let p = Bvp1dProblem::constant(0.0);
        let t = uniform_knots(7);
        assert!(solve_fem_on_grid(&t, &p).unwrap().iter().all(|&th| th == 0.0));
        assert_eq!(energy(&t, &[0.0; 6], &p).unwrap(), 0.0);
        let g = grad_knots(&t, &[0.0; 6], &p).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_source_nodally_exact() {
        let p = Bvp1dProblem::constant(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in [uniform_knots(9), random_knots(12, &mut rng)] {
            let th = solve_fem_on_grid(&t, &p).unwrap();
            let u = nodal_values(&t, &th);
            for (x, ux) in t.iter().zip(&u) {
                assert!((ux - x * (1.0 - x) / 2.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sine_energy_converges() {
        let p = Bvp1dProblem::sine();
        let e = reduced_energy(&uniform_knots(201), &p).unwrap();
        let want = -std::f64::consts::PI.powi(2) / 4.0;
        assert!((e - want).abs() < 1e-3, "{e}");
    }

    #[test]
    fn galerkin_minimality() {
        let p = Bvp1dProblem::model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_knots(15, &mut rng);
        let th = solve_fem_on_grid(&t, &p).unwrap();
        let e0 = energy(&t, &th, &p).unwrap();
        let u = nodal_values(&t, &th);
        for _ in 0..100 {
            let mut v = u.clone();
            for x in v.iter_mut().skip(1).take(t.len() - 2) {
                *x += rng.gen_range(-1e-2..1e-2);
            }
            let e = energy(&t, &slopes_from_nodal(&t, &v), &p).unwrap();
            assert!(e >= e0 - 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = Bvp1dProblem::model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let t = random_knots(10, &mut rng);
            let th: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = grad_knots(&t, &th, &p).unwrap();
            let gn = grad_knots_nodal(&t, &solve_fem_on_grid(&t, &p).unwrap(), &p).unwrap();
            for i in 1..9 {
                let step = 1e-6;
                let mut tp = t.clone();
                let mut tm = t.clone();
                tp[i] += step;
                tm[i] -= step;
                let fd = (energy(&tp, &th, &p).unwrap() - energy(&tm, &th, &p).unwrap()) / (2.0 * step);
                assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1e-2), "theta fixed, knot {i}: {fd} vs {}", g[i]);
                let fdr = (reduced_energy(&tp, &p).unwrap() - reduced_energy(&tm, &p).unwrap()) / (2.0 * step);
                assert!((fdr - gn[i]).abs() < 1e-5 * gn[i].abs().max(1e-2), "reduced, knot {i}: {fdr} vs {}", gn[i]);
            }
        }
    }

    #[test]
    fn symmetric_problem_antisymmetric_gradient() {
        let p = Bvp1dProblem::sine();
        let t = uniform_knots(11);
        let th = solve_fem_on_grid(&t, &p).unwrap();
        let g = grad_knots_nodal(&t, &th, &p).unwrap();
        assert!(g.iter().any(|x| x.abs() > 1e-8));
        for i in 0..t.len() {
            assert!((g[i] + g[t.len() - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn bad_knots() {
        let p = Bvp1dProblem::sine();
        assert_eq!(
            solve_fem_on_grid(&[0.0, 0.5, 0.5, 1.0], &p).unwrap_err(),
            GalerkinError::KnotOrderViolated { index: 2 }
        );
        assert_eq!(energy(&[0.0, 1.0], &[], &p).unwrap_err(), GalerkinError::SlopeCount { expected: 1, got: 0 });
    }
}
