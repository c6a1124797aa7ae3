//! ReLU networks as chains of sparse affine layers.
//!
//! A network with layers `T_0, ..., T_k` computes `T_k(ReLU(T_{k-1}(... ReLU(T_0(x)))))`;
//! it has `k` hidden layers and its size is the total hidden width.

mod independence;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpwl::AffineFunc;

pub use independence::{feature_rank, independence_check};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("network has no layers")]
    Empty,
    #[error("layer {0} does not chain with its predecessor")]
    LayerChain(usize),
    #[error("feature parameters {0} and {1} are linearly dependent")]
    PairwiseDependent(usize, usize),
    #[error("feature parameter {0} is zero")]
    ZeroFeature(usize),
    #[error("invalid network: {0}")]
    Invalid(String),
}

/// Sparse affine map: `y_r = sum_{(c, w) in rows[r]} w x_c + bias[r]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub bias: Vec<f64>,
}

impl AffineLayer {
    pub fn new(in_dim: usize, rows: Vec<Vec<(usize, f64)>>, bias: Vec<f64>) -> Result<Self, NetError> {
        if rows.len() != bias.len() {
            return Err(NetError::Invalid("bias length differs from row count".into()));
        }
        if rows.iter().flatten().any(|(c, _)| *c >= in_dim) {
            return Err(NetError::Invalid("column index out of range".into()));
        }
        Ok(Self {
            in_dim,
            out_dim: rows.len(),
            rows: rows.into_iter().map(merge_entries).collect(),
            bias,
        })
    }

    pub fn from_dense(w: &[Vec<f64>], b: Vec<f64>, in_dim: usize) -> Result<Self, NetError> {
        if w.iter().any(|r| r.len() != in_dim) {
            return Err(NetError::Invalid("ragged weight matrix".into()));
        }
        let rows = w
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::new(in_dim, rows, b)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.in_dim];
                for (c, v) in r {
                    d[*c] += v;
                }
                d
            })
            .collect()
    }

    /// Rows given by affine functions of the input.
    pub fn from_affines(fs: &[AffineFunc]) -> Self {
        let in_dim = fs.first().map_or(0, AffineFunc::dim);
        let rows = fs
            .iter()
            .map(|f| {
                f.gradient
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self {
            in_dim,
            out_dim: fs.len(),
            rows,
            bias: fs.iter().map(|f| f.offset).collect(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.bias)
            .map(|(r, b)| r.iter().fold(*b, |acc, (c, w)| acc + w * x[*c]))
            .collect()
    }

    pub fn nonzero_weights(&self) -> usize {
        self.rows.iter().flatten().filter(|(_, v)| *v != 0.0).count()
    }

    pub fn nonzero_biases(&self) -> usize {
        self.bias.iter().filter(|v| **v != 0.0).count()
    }

    /// `self ∘ inner`, i.e. the affine map `x -> self(inner(x))`.
    pub fn after(&self, inner: &AffineLayer) -> AffineLayer {
        assert_eq!(self.in_dim, inner.out_dim, "layers do not chain");
        let mut rows = Vec::with_capacity(self.out_dim);
        let mut bias = Vec::with_capacity(self.out_dim);
        for (r, b0) in self.rows.iter().zip(&self.bias) {
            let mut acc: Vec<(usize, f64)> = Vec::new();
            let mut b = *b0;
            for (j, w) in r {
                b += w * inner.bias[*j];
                acc.extend(inner.rows[*j].iter().map(|(c, v)| (*c, w * v)));
            }
            rows.push(merge_entries(acc));
            bias.push(b);
        }
        AffineLayer {
            in_dim: inner.in_dim,
            out_dim: self.out_dim,
            rows,
            bias,
        }
    }

    /// Rows of all layers stacked, each shifted into its own column block.
    pub fn block_diagonal(layers: &[&AffineLayer]) -> AffineLayer {
        let mut rows = Vec::new();
        let mut bias = Vec::new();
        let mut offset = 0;
        for l in layers {
            rows.extend(
                l.rows
                    .iter()
                    .map(|r| r.iter().map(|(c, v)| (c + offset, *v)).collect::<Vec<_>>()),
            );
            bias.extend_from_slice(&l.bias);
            offset += l.in_dim;
        }
        AffineLayer {
            in_dim: offset,
            out_dim: rows.len(),
            rows,
            bias,
        }
    }

    /// Rows of all layers stacked over a shared input.
    pub fn stacked(layers: &[&AffineLayer]) -> AffineLayer {
        let in_dim = layers.first().map_or(0, |l| l.in_dim);
        let mut rows = Vec::new();
        let mut bias = Vec::new();
        for l in layers {
            assert_eq!(l.in_dim, in_dim, "stacked layers need a shared input");
            rows.extend(l.rows.iter().cloned());
            bias.extend_from_slice(&l.bias);
        }
        AffineLayer {
            in_dim,
            out_dim: rows.len(),
            rows,
            bias,
        }
    }
}

/// Sums duplicate column entries and drops exact zeros.
fn merge_entries(mut acc: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    acc.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
    for (c, v) in acc {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| *v != 0.0);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub hidden_layers: usize,
    pub size: usize,
    pub nonzero_params: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<AffineLayer>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<AffineLayer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::Empty);
        }
        let mut prev = input_dim;
        for (k, l) in layers.iter().enumerate() {
            if l.in_dim != prev || l.rows.len() != l.out_dim || l.bias.len() != l.out_dim {
                return Err(NetError::LayerChain(k));
            }
            prev = l.out_dim;
        }
        Ok(Self { input_dim, layers })
    }

    /// Zero-hidden-layer network computing the given affine functions.
    pub fn affine(input_dim: usize, fs: &[AffineFunc]) -> Self {
        let mut layer = AffineLayer::from_affines(fs);
        layer.in_dim = input_dim;
        Self {
            input_dim,
            layers: vec![layer],
        }
    }

    /// Zero-hidden-layer scalar network computing one affine function.
    pub fn from_affine(f: &AffineFunc) -> Self {
        Self::affine(f.dim(), std::slice::from_ref(f))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// Total number of hidden neurons.
    pub fn size(&self) -> usize {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .sum()
    }

    /// Hidden widths `n_1, ..., n_k`.
    pub fn widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    pub fn nonzero_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.nonzero_weights() + l.nonzero_biases())
            .sum()
    }

    pub fn stats(&self) -> NetworkStats {
        NetworkStats {
            hidden_layers: self.hidden_layers(),
            size: self.size(),
            nonzero_params: self.nonzero_params(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// First output component.
    pub fn eval_scalar(&self, x: &[f64]) -> Result<f64, NetError> {
        self.eval(x).map(|v| v[0])
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let (last, hidden) = self.layers.split_last().expect("non-empty");
        let mut h = x.to_vec();
        for l in hidden {
            h = l.apply(&h);
            for v in &mut h {
                *v = v.max(0.0);
            }
        }
        last.apply(&h)
    }

    /// Pre-activation vectors of every hidden layer at `x`.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.hidden_layers());
        let mut h = x.to_vec();
        for l in &self.layers[..self.layers.len() - 1] {
            let z = l.apply(&h);
            h = z.iter().map(|v| v.max(0.0)).collect();
            out.push(z);
        }
        Ok(out)
    }

    /// Appends identity gadgets (`y = ReLU(y) - ReLU(-y)`, two neurons per output) until
    /// the network has `hidden` hidden layers.
    pub fn padded_to(&self, hidden: usize) -> Self {
        let mut net = self.clone();
        while net.hidden_layers() < hidden {
            net = net.then_identity();
        }
        net
    }

    fn then_identity(&self) -> Self {
        let n = self.output_dim();
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        let neg = AffineLayer {
            in_dim: last.in_dim,
            out_dim: last.out_dim,
            rows: last
                .rows
                .iter()
                .map(|r| r.iter().map(|(c, v)| (*c, -v)).collect())
                .collect(),
            bias: last.bias.iter().map(|b| -b).collect(),
        };
        let hidden = AffineLayer::stacked(&[&last, &neg]);
        let out_rows = (0..n).map(|k| vec![(k, 1.0), (n + k, -1.0)]).collect();
        let out = AffineLayer::new(2 * n, out_rows, vec![0.0; n]).expect("valid identity");
        layers.push(hidden);
        layers.push(out);
        Self {
            input_dim: self.input_dim,
            layers,
        }
    }

    /// Networks side by side over a shared input: outputs are concatenated. Shallower
    /// networks are padded with identity gadgets first.
    pub fn parallel(nets: &[ReluNetwork]) -> Result<Self, NetError> {
        let first = nets.first().ok_or(NetError::Empty)?;
        for n in nets {
            if n.input_dim != first.input_dim {
                return Err(NetError::DimensionMismatch {
                    expected: first.input_dim,
                    got: n.input_dim,
                });
            }
        }
        let depth = nets.iter().map(ReluNetwork::hidden_layers).max().expect("non-empty");
        let padded: Vec<ReluNetwork> = nets
            .iter()
            .map(|n| {
                if n.hidden_layers() < depth {
                    n.padded_to(depth)
                } else {
                    n.clone()
                }
            })
            .collect();
        let mut layers = Vec::with_capacity(depth + 1);
        let first_layers: Vec<&AffineLayer> = padded.iter().map(|n| &n.layers[0]).collect();
        layers.push(AffineLayer::stacked(&first_layers));
        for k in 1..=depth {
            let ls: Vec<&AffineLayer> = padded.iter().map(|n| &n.layers[k]).collect();
            layers.push(AffineLayer::block_diagonal(&ls));
        }
        Ok(Self {
            input_dim: first.input_dim,
            layers,
        })
    }

    /// Post-composes an affine map on the outputs, merged into the last layer.
    pub fn map_output(&self, map: &AffineLayer) -> Result<Self, NetError> {
        if map.in_dim != self.output_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.output_dim(),
                got: map.in_dim,
            });
        }
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        layers.push(map.after(&last));
        Ok(Self {
            input_dim: self.input_dim,
            layers,
        })
    }

    /// `outer ∘ self`: the first layer of `outer` is merged into the last layer of `self`.
    pub fn then(&self, outer: &ReluNetwork) -> Result<Self, NetError> {
        if outer.input_dim != self.output_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.output_dim(),
                got: outer.input_dim,
            });
        }
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        layers.push(outer.layers[0].after(&last));
        layers.extend(outer.layers[1..].iter().cloned());
        Ok(Self {
            input_dim: self.input_dim,
            layers,
        })
    }

    /// `sum_i c_i f_i + constant` for scalar networks `f_i`.
    pub fn linear_combine(nets: &[ReluNetwork], coeffs: &[f64], constant: f64) -> Result<Self, NetError> {
        if nets.len() != coeffs.len() {
            return Err(NetError::DimensionMismatch {
                expected: nets.len(),
                got: coeffs.len(),
            });
        }
        let par = Self::parallel(nets)?;
        let mut row = Vec::new();
        let mut col = 0;
        for (n, c) in nets.iter().zip(coeffs) {
            for k in 0..n.output_dim() {
                if *c != 0.0 {
                    row.push((col + k, *c));
                }
            }
            col += n.output_dim();
        }
        let map = AffineLayer::new(par.output_dim(), vec![row], vec![constant])?;
        par.map_output(&map)
    }

    /// Mutable access to a single weight, used by negative-control experiments.
    pub fn weight_mut(&mut self, layer: usize, row: usize, entry: usize) -> Option<&mut (usize, f64)> {
        self.layers.get_mut(layer)?.rows.get_mut(row)?.get_mut(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hat_012() -> ReluNetwork {
        // ReLU(x) - 2 ReLU(x - 1) + ReLU(x - 2)
        let hidden = AffineLayer::new(1, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]], vec![0.0, -1.0, -2.0]).unwrap();
        let out = AffineLayer::new(3, vec![vec![(0, 1.0), (1, -2.0), (2, 1.0)]], vec![0.0]).unwrap();
        ReluNetwork::new(1, vec![hidden, out]).unwrap()
    }

    fn hat_123() -> ReluNetwork {
        let hidden = AffineLayer::new(1, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]], vec![-1.0, -2.0, -3.0]).unwrap();
        let out = AffineLayer::new(3, vec![vec![(0, 1.0), (1, -2.0), (2, 1.0)]], vec![0.0]).unwrap();
        ReluNetwork::new(1, vec![hidden, out]).unwrap()
    }

    fn random_net<R: Rng>(widths: &[usize], rng: &mut R) -> ReluNetwork {
        let mut layers = Vec::new();
        for w in widths.windows(2) {
            let dense: Vec<Vec<f64>> = (0..w[1]).map(|_| (0..w[0]).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let b = (0..w[1]).map(|_| rng.gen_range(-1.0..1.0)).collect();
            layers.push(AffineLayer::from_dense(&dense, b, w[0]).unwrap());
        }
        ReluNetwork::new(widths[0], layers).unwrap()
    }

    #[test]
    fn identity_net() {
        let net = ReluNetwork::affine(2, &[AffineFunc::coordinate(2, 0), AffineFunc::coordinate(2, 1)]);
        assert_eq!(net.eval(&[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);
        assert_eq!(net.hidden_layers(), 0);
        assert_eq!(net.size(), 0);
    }

    #[test]
    fn one_d_hat_values() {
        let net = hat_012();
        assert_eq!(net.eval_scalar(&[1.0]).unwrap(), 1.0);
        assert_eq!(net.eval_scalar(&[3.0]).unwrap(), 0.0);
        assert_eq!(net.eval_scalar(&[0.5]).unwrap(), 0.5);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            hat_012().eval(&[1.0, 2.0]),
            Err(NetError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn parallel_sizes_add() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_net(&[2, 3, 1], &mut rng);
        let b = random_net(&[2, 4, 1], &mut rng);
        let p = ReluNetwork::parallel(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.size(), 7);
        assert_eq!(p.output_dim(), 2);
        let x = [0.3, -0.7];
        assert_eq!(p.eval(&x).unwrap(), vec![a.eval_scalar(&x).unwrap(), b.eval_scalar(&x).unwrap()]);
    }

    #[test]
    fn parallel_pads_shallower() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_net(&[2, 3, 1], &mut rng);
        let b = random_net(&[2, 4, 2, 1], &mut rng);
        let p = ReluNetwork::parallel(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.hidden_layers(), 2);
        assert_eq!(p.size(), 3 + 2 + 4 + 2);
        for _ in 0..100 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let v = p.eval(&x).unwrap();
            assert_eq!(v[0], a.eval_scalar(&x).unwrap());
            assert_eq!(v[1], b.eval_scalar(&x).unwrap());
        }
        let single = ReluNetwork::parallel(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single, a);
    }

    #[test]
    fn combine_hats() {
        let net = ReluNetwork::linear_combine(&[hat_012(), hat_123()], &[2.0, 3.0], 0.0).unwrap();
        assert_eq!(net.eval_scalar(&[2.0]).unwrap(), 3.0);
        assert_eq!(net.eval_scalar(&[1.5]).unwrap(), 2.5);
        let five = ReluNetwork::linear_combine(&[hat_012(), hat_123()], &[0.0, 0.0], 5.0).unwrap();
        assert_eq!(five.eval_scalar(&[1.3]).unwrap(), 5.0);
        let same = ReluNetwork::linear_combine(&[hat_012()], &[1.0], 0.0).unwrap();
        for k in 0..30 {
            let x = [-0.5 + 0.1 * k as f64];
            assert_eq!(same.eval_scalar(&x).unwrap(), hat_012().eval_scalar(&x).unwrap());
        }
    }

    #[test]
    fn stats_count_nonzeros() {
        let net = hat_012();
        assert_eq!(
            net.stats(),
            NetworkStats {
                hidden_layers: 1,
                size: 3,
                nonzero_params: 3 + 2 + 3
            }
        );
    }

    #[test]
    fn networks_are_piecewise_linear_on_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let net = random_net(&[2, 5, 5, 1], &mut rng);
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let q: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let n = 2000;
            let vals: Vec<f64> = (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                    net.eval_scalar(&x).unwrap()
                })
                .collect();
            let kinks = vals
                .windows(3)
                .filter(|w| (w[0] - 2.0 * w[1] + w[2]).abs() > 1e-8)
                .count();
            // each breakpoint spoils at most two second differences; at most 10 neurons
            // cross the segment a bounded number of times
            assert!(kinks <= 2 * 60, "kinks = {kinks}");
        }
    }

    #[test]
    fn then_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_net(&[2, 3, 2], &mut rng);
        let b = random_net(&[2, 4, 1], &mut rng);
        let c = a.then(&b).unwrap();
        assert_eq!(c.hidden_layers(), 2);
        let x = [0.2, 0.9];
        let want = b.eval(&a.eval(&x).unwrap()).unwrap();
        assert!((c.eval_scalar(&x).unwrap() - want[0]).abs() < 1e-12);
    }
}
