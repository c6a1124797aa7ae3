use super::fem::{solve_fem_on_grid, uniform_knots};
use super::quadrature::{GAUSS5_NODES as XI, GAUSS5_WEIGHTS as W};
use super::{Bvp1dProblem, Bvp1dState, GalerkinError};

/// Points of the coarsest grid.
pub const INITIAL_POINTS: usize = 5;
/// Share of the total indicator carried by the marked elements.
pub const DORFLER_FRACTION: f64 = 0.5;

fn indicators(t: &[f64], theta: &[f64], problem: &Bvp1dProblem) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(e, &th)| {
            let h = t[e + 1] - t[e];
            h * (0..5)
                .map(|q| W[q] * (th - problem.du_exact(t[e] + h * XI[q])).powi(2))
                .sum::<f64>()
        })
        .collect()
}

/// Adaptive grid with exactly `target` points, refined by bisection of Dörfler-marked
/// elements using exact-solution H1 indicators.
pub fn afem_grid(problem: &Bvp1dProblem, target: usize) -> Result<Vec<f64>, GalerkinError> {
    if target < 3 {
        return Err(GalerkinError::TargetUnreachable { target, minimum: 3 });
    }
    let mut t = uniform_knots(target.min(INITIAL_POINTS));
    while t.len() < target {
        let theta = solve_fem_on_grid(&t, problem)?;
        let eta = indicators(&t, &theta, problem);
        let mut order: Vec<usize> = (0..eta.len()).collect();
        order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
        let total: f64 = eta.iter().sum();
        let mut acc = 0.0;
        let mut marked = 0;
        for &e in &order {
            acc += eta[e];
            marked += 1;
            if acc >= DORFLER_FRACTION * total {
                break;
            }
        }
        marked = marked.min(target - t.len());
        let mut mids: Vec<f64> = order[..marked].iter().map(|&e| 0.5 * (t[e] + t[e + 1])).collect();
        t.append(&mut mids);
        t.sort_by(f64::total_cmp);
    }
    Ok(t)
}

/// FEM solution on [`afem_grid`].
pub fn solve_afem(problem: &Bvp1dProblem, target: usize) -> Result<Bvp1dState, GalerkinError> {
    Bvp1dState::from_grid(afem_grid(problem, target)?, problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_point_count() {
        let p = Bvp1dProblem::model();
        for n in [3, 5, 6, 23, 37, 53] {
            assert_eq!(afem_grid(&p, n).unwrap().len(), n);
        }
        assert!(afem_grid(&p, 2).is_err());
    }

    #[test]
    fn initial_size_is_uniform() {
        let p = Bvp1dProblem::model();
        assert_eq!(afem_grid(&p, INITIAL_POINTS).unwrap(), uniform_knots(INITIAL_POINTS));
    }

    #[test]
    fn smooth_solution_stays_near_uniform() {
        let t = afem_grid(&Bvp1dProblem::sine(), 33).unwrap();
        let gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let max = gaps.iter().cloned().fold(0.0, f64::max);
        let min = gaps.iter().cloned().fold(1.0, f64::min);
        assert!(max / min < 4.0 + 1e-12, "{max} / {min}");
    }
}
