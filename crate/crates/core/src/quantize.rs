//! Low bit-width weight grids and the structural check for compiled networks.

use serde::{Deserialize, Serialize};

use crate::net::{AffineLayer, ReluNetwork};

/// The grid `2^k * {0, ±2^e : 1 - 2^(l-2) <= e <= 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantGrid {
    pub k: i32,
    pub l: u32,
    values: Vec<f64>,
}

impl QuantGrid {
    /// Panics if `l < 2` or the exponent range does not fit in an `f64`.
    pub fn new(k: i32, l: u32) -> Self {
        assert!(l >= 2, "bit-width parameter must be at least 2");
        assert!(l <= 11, "bit-width parameter too large");
        let scale = 2f64.powi(k);
        let lowest = 1 - (1i32 << (l - 2));
        let mut values = vec![0.0];
        for e in lowest..=0 {
            let v = scale * 2f64.powi(e);
            values.push(v);
            values.push(-v);
        }
        values.sort_by(f64::total_cmp);
        Self { k, l, values }
    }

    /// `{0, ±1/2, ±1}`.
    pub fn q03() -> Self {
        Self::new(0, 3)
    }

    /// Sorted grid values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, w: f64) -> bool {
        self.values.iter().any(|&v| v == w)
    }

    pub fn contains_approx(&self, w: f64, tol: f64) -> bool {
        self.values.iter().any(|&v| (v - w).abs() <= tol)
    }

    /// Nearest grid value; ties go to the smaller magnitude.
    pub fn project(&self, w: f64) -> f64 {
        let mut best = 0.0f64;
        let mut dist = w.abs();
        for &v in &self.values {
            let d = (w - v).abs();
            if d < dist || (d == dist && v.abs() < best.abs()) {
                best = v;
                dist = d;
            }
        }
        best
    }

    /// Entrywise projection, which solves the Frobenius-norm problem exactly.
    pub fn project_matrix(&self, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
        w.iter().map(|r| r.iter().map(|&x| self.project(x)).collect()).collect()
    }

    /// Projects all weights (not biases) of layers `first..` onto the grid.
    pub fn project_network(&self, net: &ReluNetwork, first: usize) -> ReluNetwork {
        let layers = net
            .layers()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if i < first {
                    return l.clone();
                }
                let rows = l
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|&(c, w)| (c, self.project(w))).filter(|&(_, w)| w != 0.0).collect())
                    .collect();
                AffineLayer {
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    rows,
                    bias: l.bias.clone(),
                }
            })
            .collect();
        ReluNetwork::new(net.input_dim(), layers).expect("projection keeps layer shapes")
    }
}

/// A weight or bias outside the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub layer: usize,
    pub row: usize,
    /// `None` for a bias entry.
    pub col: Option<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredLowBitReport {
    pub conforms: bool,
    pub offending: Vec<Offender>,
    /// Half-open range of checked layer indices.
    pub layers_checked: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// Checks that every layer after the first has weights in `{0, ±1/2, ±1}` and zero bias.
pub fn check_structured(net: &ReluNetwork) -> StructuredLowBitReport {
    check_with(net, |w| QuantGrid::q03().contains(w), |b| b == 0.0)
}

/// As [`check_structured`] with an absolute tolerance, for networks read from files.
pub fn check_structured_tol(net: &ReluNetwork, tol: f64) -> StructuredLowBitReport {
    check_with(net, |w| QuantGrid::q03().contains_approx(w, tol), |b| b.abs() <= tol)
}

fn check_with(net: &ReluNetwork, weight_ok: impl Fn(f64) -> bool, bias_ok: impl Fn(f64) -> bool) -> StructuredLowBitReport {
    let n = net.layers().len();
    if net.hidden_layers() == 0 {
        return StructuredLowBitReport {
            conforms: true,
            offending: Vec::new(),
            layers_checked: (1, 1),
            warning: Some("network has no hidden layer; check is vacuous".into()),
        };
    }
    let mut offending = Vec::new();
    for (li, layer) in net.layers().iter().enumerate().skip(1) {
        for (r, row) in layer.rows.iter().enumerate() {
            for &(c, w) in row {
                if !weight_ok(w) {
                    offending.push(Offender { layer: li, row: r, col: Some(c), value: w });
                }
            }
            if !bias_ok(layer.bias[r]) {
                offending.push(Offender { layer: li, row: r, col: None, value: layer.bias[r] });
            }
        }
    }
    StructuredLowBitReport {
        conforms: offending.is_empty(),
        offending,
        layers_checked: (1, n),
        warning: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_basis_deep;
    use crate::mesh::structured_triangles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q03_values() {
        assert_eq!(QuantGrid::q03().values(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = QuantGrid::new(2, 4);
        assert_eq!(g.values().len(), 9);
        assert!(g.contains(4.0) && g.contains(-0.5) && !g.contains(0.25));
    }

    #[test]
    fn projection_examples() {
        let g = QuantGrid::q03();
        assert_eq!(g.project(0.6), 0.5);
        assert_eq!(g.project(0.75), 0.5);
        assert_eq!(g.project(-0.75), -0.5);
        assert_eq!(g.project(0.25), 0.0);
        assert_eq!(g.project(0.0), 0.0);
        assert_eq!(g.project(7.0), 1.0);
    }

    #[test]
    fn projection_is_idempotent_and_entrywise() {
        let g = QuantGrid::new(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let p = g.project_matrix(&w);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p[i][j], g.project(w[i][j]));
                assert_eq!(g.project(p[i][j]), p[i][j]);
            }
        }
        assert_eq!(g.project_matrix(&[vec![0.0; 2]]), vec![vec![0.0; 2]]);
    }

    #[test]
    fn compiled_basis_conforms() {
        let m = structured_triangles(3, 3);
        for i in 0..m.vertex_count() {
            let r = check_structured(&compile_basis_deep(&m, i).unwrap());
            assert!(r.conforms, "{r:?}");
        }
    }

    #[test]
    fn offender_reported() {
        let m = structured_triangles(2, 2);
        let mut net = compile_basis_deep(&m, 4).unwrap();
        net.weight_mut(2, 0, 0).unwrap().1 = 0.3;
        let r = check_structured(&net);
        assert!(!r.conforms);
        assert_eq!(r.offending.len(), 1);
        assert_eq!(r.offending[0].value, 0.3);
    }

    #[test]
    fn affine_is_vacuous() {
        let net = ReluNetwork::from_affine(&crate::cpwl::AffineFunc::new(vec![0.3], 0.1));
        let r = check_structured(&net);
        assert!(r.conforms && r.warning.is_some());
    }
}
