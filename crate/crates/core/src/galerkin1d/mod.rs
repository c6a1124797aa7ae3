//! Moving-knot Galerkin solver for `-u'' = f` on `[0, 1]` with `u(0) = u(1) = 0`.
//!
//! A state is a knot vector `0 = t_0 < ... < t_n = 1` and one slope per element; the
//! trial function is the continuous piecewise linear function starting at `u(0) = 0`.

mod afem;
mod algorithm;
mod fem;
mod quadrature;
mod table;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use afem::{afem_grid, solve_afem, DORFLER_FRACTION, INITIAL_POINTS};
pub use algorithm::{solve_algorithm1, solve_algorithm1_from, TraceEntry};
pub use fem::{
    energy, grad_knots, grad_knots_nodal, h1_error, nodal_values, reduced_energy, slopes_from_nodal,
    solve_fem_on_grid, uniform_knots,
};
pub use quadrature::{gauss5, GAUSS5_NODES, GAUSS5_WEIGHTS};
pub use table::{report_table, to_csv, to_markdown, TableRow, REFERENCE_TABLE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalerkinError {
    #[error("knots not strictly increasing at index {index}")]
    KnotOrderViolated { index: usize },
    #[error("knot vector must start at 0, end at 1 and have at least 2 entries")]
    InvalidKnots,
    #[error("slope vector has {got} entries for {expected} elements")]
    SlopeCount { expected: usize, got: usize },
    #[error("singular stiffness system")]
    SingularSystem,
    #[error("target {target} is below the smallest grid of {minimum} points")]
    TargetUnreachable { target: usize, minimum: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Source term, exact solution and their derivatives.
#[derive(Clone)]
pub struct Bvp1dProblem {
    pub name: String,
    f: ScalarFn,
    df: ScalarFn,
    u: ScalarFn,
    du: ScalarFn,
}

impl std::fmt::Debug for Bvp1dProblem {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Bvp1dProblem").field("name", &self.name).finish()
    }
}

impl Bvp1dProblem {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            u: Arc::new(u),
            du: Arc::new(du),
        }
    }

    /// `u(x) = x (exp(-(x - 1/3)^2 / K) - exp(-4 / (9 K)))`, a sharp bump near `x = 1/3`.
    pub fn bump(k: f64) -> Self {
        let c = (-4.0 / (9.0 * k)).exp();
        let e = move |x: f64| (-(x - 1.0 / 3.0).powi(2) / k).exp();
        let e1 = move |x: f64| -2.0 * (x - 1.0 / 3.0) / k * e(x);
        let e2 = move |x: f64| {
            let s = x - 1.0 / 3.0;
            (4.0 * s * s / (k * k) - 2.0 / k) * e(x)
        };
        let e3 = move |x: f64| {
            let s = x - 1.0 / 3.0;
            (12.0 * s / (k * k) - 8.0 * s * s * s / (k * k * k)) * e(x)
        };
        Self::new(
            format!("bump K={k}"),
            move |x| -(2.0 * e1(x) + x * e2(x)),
            move |x| -(3.0 * e2(x) + x * e3(x)),
            move |x| x * (e(x) - c),
            move |x| e(x) - c + x * e1(x),
        )
    }

    /// The benchmark problem with `K = 0.01`.
    pub fn model() -> Self {
        Self::bump(0.01)
    }

    /// `u = sin(pi x)`, `f = pi^2 sin(pi x)`.
    pub fn sine() -> Self {
        Self::new(
            "sine",
            |x| PI * PI * (PI * x).sin(),
            |x| PI * PI * PI * (PI * x).cos(),
            |x| (PI * x).sin(),
            |x| PI * (PI * x).cos(),
        )
    }

    /// `f = c`, `u = c x (1 - x) / 2`.
    pub fn constant(c: f64) -> Self {
        Self::new(
            format!("constant {c}"),
            move |_| c,
            |_| 0.0,
            move |x| c * x * (1.0 - x) / 2.0,
            move |x| c * (0.5 - x),
        )
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn u_exact(&self, x: f64) -> f64 {
        (self.u)(x)
    }

    pub fn du_exact(&self, x: f64) -> f64 {
        (self.du)(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Total number of grid points, boundary included.
    #[serde(rename = "N")]
    pub n: usize,
    pub eta: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub min_eta: f64,
    pub grad_tol: f64,
    pub gap_floor: f64,
}

impl SolverConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            eta: 0.5,
            max_iter: 200,
            armijo_c: 1e-4,
            backtrack: 0.5,
            min_eta: 1e-14,
            grad_tol: 1e-10,
            gap_floor: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), GalerkinError> {
        let bad = |m: &str| Err(GalerkinError::InvalidConfig(m.into()));
        if self.n < 3 {
            return bad("N must be at least 3");
        }
        if !(self.eta > 0.0 && self.min_eta > 0.0 && self.gap_floor > 0.0 && self.grad_tol >= 0.0) {
            return bad("step sizes and tolerances must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0 && self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("line-search factors must lie in (0, 1)");
        }
        Ok(())
    }
}

/// A knot vector with one slope per element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bvp1dState {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub h1_error: f64,
    pub trace: Vec<TraceEntry>,
    /// Knot vectors after each accepted step, starting with the initial grid.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub knot_history: Vec<Vec<f64>>,
    pub iterations: usize,
    pub stalled: bool,
}

impl Bvp1dState {
    /// FEM solution on `t`, with energy and error filled in.
    pub fn from_grid(t: Vec<f64>, problem: &Bvp1dProblem) -> Result<Self, GalerkinError> {
        let theta = solve_fem_on_grid(&t, problem)?;
        let energy = energy(&t, &theta, problem)?;
        let h1 = h1_error(&t, &theta, problem)?;
        Ok(Self {
            t,
            theta,
            energy,
            h1_error: h1,
            trace: Vec::new(),
            knot_history: Vec::new(),
            iterations: 0,
            stalled: false,
        })
    }

    /// Evaluates the piecewise linear function at `x` in `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut u = 0.0;
        for (e, th) in self.theta.iter().enumerate() {
            let (a, b) = (self.t[e], self.t[e + 1]);
            if x <= b || e + 1 == self.theta.len() {
                return u + th * (x - a);
            }
            u += th * (b - a);
        }
        u
    }

    /// `sum_i theta_i (t_{i+1} - t_i)`, which is `u(1)`.
    pub fn boundary_residual(&self) -> f64 {
        self.theta
            .iter()
            .zip(self.t.windows(2))
            .map(|(th, w)| th * (w[1] - w[0]))
            .sum()
    }

    /// One-hidden-layer network `theta_0 ReLU(x) + sum_i (theta_i - theta_{i-1}) ReLU(x - t_i)`.
    pub fn to_network(&self) -> crate::net::ReluNetwork {
        use crate::net::{AffineLayer, ReluNetwork};
        let n = self.theta.len();
        let first = AffineLayer::new(
            1,
            (0..n).map(|_| vec![(0, 1.0)]).collect(),
            self.t[..n].iter().map(|t| -t).collect(),
        )
        .expect("hidden layer");
        let out: Vec<(usize, f64)> = (0..n)
            .map(|i| (i, if i == 0 { self.theta[0] } else { self.theta[i] - self.theta[i - 1] }))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        let last = AffineLayer::new(n, vec![out], vec![0.0]).expect("output layer");
        ReluNetwork::new(1, vec![first, last]).expect("chained layers")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(g: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (g(x + h) - g(x - h)) / (2.0 * h)
    }

    #[test]
    fn bump_derivatives_consistent() {
        let p = Problem::model();
        assert!(p.u_exact(0.0).abs() < 1e-12 && p.u_exact(1.0).abs() < 1e-12);
        for k in 1..40 {
            let x = k as f64 / 40.0;
            let du = central(|y| p.u_exact(y), x);
            assert!((du - p.du_exact(x)).abs() < 1e-6 * (1.0 + du.abs()), "u' at {x}");
            let d2 = central(|y| p.du_exact(y), x);
            assert!((-d2 - p.f(x)).abs() < 1e-5 * (1.0 + d2.abs()), "f at {x}");
            let d3 = central(|y| p.f(y), x);
            assert!((d3 - p.df(x)).abs() < 1e-4 * (1.0 + d3.abs()), "f' at {x}");
        }
    }

    type Problem = Bvp1dProblem;

    #[test]
    fn network_matches_state() {
        let p = Problem::model();
        let s = Bvp1dState::from_grid(uniform_knots(12), &p).unwrap();
        let net = s.to_network();
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            assert!((net.eval_scalar(&[x]).unwrap() - s.eval(x)).abs() < 1e-12);
        }
        assert!(s.boundary_residual().abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(23).validate().is_ok());
        assert!(SolverConfig::new(2).validate().is_err());
        let mut c = SolverConfig::new(10);
        c.backtrack = 1.5;
        assert!(c.validate().is_err());
    }
}
