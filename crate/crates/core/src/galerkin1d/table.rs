use serde::{Deserialize, Serialize};

use super::afem::solve_afem;
use super::algorithm::solve_algorithm1;
use super::fem::uniform_knots;
use super::{Bvp1dProblem, Bvp1dState, GalerkinError, SolverConfig};

/// Published reference values `(N, uFEM err, AFEM err, DNN err, uFEM E, AFEM E, DNN E)`.
pub const REFERENCE_TABLE: [(usize, [f64; 6]); 3] = [
    (23, [0.2779, 0.1375, 0.1094, -0.7047, -0.7338, -0.7373]),
    (37, [0.1717, 0.0760, 0.0663, -0.7285, -0.7404, -0.7411]),
    (53, [0.1193, 0.0511, 0.0456, -0.7362, -0.7420, -0.7422]),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ufem_h1: f64,
    pub afem_h1: f64,
    pub dnn_h1: f64,
    pub ufem_energy: f64,
    pub afem_energy: f64,
    pub dnn_energy: f64,
    pub dnn_iterations: usize,
}

impl TableRow {
    pub fn compute(problem: &Bvp1dProblem, config: &SolverConfig) -> Result<(Self, Bvp1dState), GalerkinError> {
        let u = Bvp1dState::from_grid(uniform_knots(config.n), problem)?;
        let a = solve_afem(problem, config.n)?;
        let d = solve_algorithm1(problem, config)?;
        let row = Self {
            n: config.n,
            ufem_h1: u.h1_error,
            afem_h1: a.h1_error,
            dnn_h1: d.h1_error,
            ufem_energy: u.energy,
            afem_energy: a.energy,
            dnn_energy: d.energy,
            dnn_iterations: d.iterations,
        };
        Ok((row, d))
    }

    pub fn values(&self) -> [f64; 6] {
        [
            self.ufem_h1,
            self.afem_h1,
            self.dnn_h1,
            self.ufem_energy,
            self.afem_energy,
            self.dnn_energy,
        ]
    }
}

/// One row per grid size, with `base` supplying everything but `n`.
pub fn report_table(problem: &Bvp1dProblem, ns: &[usize], base: &SolverConfig) -> Result<Vec<TableRow>, GalerkinError> {
    ns.iter()
        .map(|&n| {
            let mut c = base.clone();
            c.n = n;
            TableRow::compute(problem, &c).map(|(r, _)| r)
        })
        .collect()
}

pub fn to_markdown(rows: &[TableRow]) -> String {
    let mut s = String::from(
        "| N | \\|u_uFEM - u\\|_1 | \\|u_AFEM - u\\|_1 | \\|u_DNN - u\\|_1 | E(u_uFEM) | E(u_AFEM) | E(u_DNN) |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let v = r.values();
        s.push_str(&format!(
            "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
            r.n, v[0], v[1], v[2], v[3], v[4], v[5]
        ));
    }
    s
}

pub fn to_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("N,ufem_h1,afem_h1,dnn_h1,ufem_energy,afem_energy,dnn_energy\n");
    for r in rows {
        let v = r.values();
        s.push_str(&format!(
            "{},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10}\n",
            r.n, v[0], v[1], v[2], v[3], v[4], v[5]
        ));
    }
    s
}
