use serde::{Deserialize, Serialize};

use super::afem::afem_grid;
use super::fem::{energy, grad_knots_nodal, h1_error, solve_fem_on_grid};
use super::{Bvp1dProblem, Bvp1dState, GalerkinError, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub eta: f64,
}

/// Alternating slope/knot minimization started from the adaptive grid with `config.n` points.
pub fn solve_algorithm1(problem: &Bvp1dProblem, config: &SolverConfig) -> Result<Bvp1dState, GalerkinError> {
    config.validate()?;
    solve_algorithm1_from(afem_grid(problem, config.n)?, problem, config)
}

/// Alternating minimization from the knot vector `t`: solve for the slopes, take a
/// backtracking Armijo step along the knot gradient, repeat.
pub fn solve_algorithm1_from(
    t: Vec<f64>,
    problem: &Bvp1dProblem,
    config: &SolverConfig,
) -> Result<Bvp1dState, GalerkinError> {
    config.validate()?;
    let mut t = t;
    let mut theta = solve_fem_on_grid(&t, problem)?;
    let mut e = energy(&t, &theta, problem)?;
    let mut trace = Vec::new();
    let mut history = vec![t.clone()];
    let mut stalled = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        let g = grad_knots_nodal(&t, &theta, problem)?;
        let gg: f64 = g.iter().map(|x| x * x).sum();
        if gg.sqrt() < config.grad_tol {
            break;
        }
        let mut eta = config.eta;
        let accepted = loop {
            let cand: Vec<f64> = t.iter().zip(&g).map(|(ti, gi)| ti - eta * gi).collect();
            if cand.windows(2).all(|w| w[1] - w[0] >= config.gap_floor) {
                let th = solve_fem_on_grid(&cand, problem)?;
                let en = energy(&cand, &th, problem)?;
                if en <= e - config.armijo_c * eta * gg {
                    break Some((cand, th, en));
                }
            }
            eta *= config.backtrack;
            if eta < config.min_eta {
                break None;
            }
        };
        let Some((tn, thn, en)) = accepted else {
            stalled = true;
            break;
        };
        t = tn;
        theta = thn;
        e = en;
        iterations += 1;
        trace.push(TraceEntry {
            iteration: iterations,
            energy: e,
            grad_norm: gg.sqrt(),
            eta,
        });
        history.push(t.clone());
    }
    let h1 = h1_error(&t, &theta, problem)?;
    Ok(Bvp1dState {
        t,
        theta,
        energy: e,
        h1_error: h1,
        trace,
        knot_history: history,
        iterations,
        stalled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin1d::uniform_knots;

    #[test]
    fn energy_decreases() {
        let p = Bvp1dProblem::model();
        let mut c = SolverConfig::new(13);
        c.max_iter = 30;
        let s = solve_algorithm1_from(uniform_knots(13), &p, &c).unwrap();
        let start = Bvp1dState::from_grid(uniform_knots(13), &p).unwrap().energy;
        let mut prev = start;
        for tr in &s.trace {
            assert!(tr.energy <= prev + 1e-12);
            prev = tr.energy;
        }
        assert!(s.energy < start);
        assert!(s.boundary_residual().abs() < 1e-10);
        assert!(s.t.windows(2).all(|w| w[1] - w[0] >= c.gap_floor));
    }

    #[test]
    fn quadratic_solution_exact_at_nodes() {
        let p = Bvp1dProblem::constant(2.0);
        let mut c = SolverConfig::new(9);
        c.max_iter = 20;
        let s = solve_algorithm1_from(uniform_knots(9), &p, &c).unwrap();
        for &x in &s.t {
            assert!((s.eval(x) - x * (1.0 - x)).abs() < 1e-12);
        }
        // interpolation error of a quadratic on the final grid: |u|_1^2 = sum h^3 u''^2 / 12
        let want: f64 = s.t.windows(2).map(|w| (w[1] - w[0]).powi(3) * 4.0 / 12.0).sum::<f64>().sqrt();
        assert!((s.h1_error - want).abs() < 1e-10);
    }
}
