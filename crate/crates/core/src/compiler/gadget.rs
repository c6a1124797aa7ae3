use crate::cpwl::AffineFunc;
use crate::net::{AffineLayer, ReluNetwork};

/// The four-neuron networks computing `min{a, b}` and `max{a, b}`:
/// `v . ReLU(W [a, b]^T)` with `W = [[1, 1], [-1, -1], [1, -1], [-1, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinMaxGadget {
    pub w: [[f64; 2]; 4],
    pub v: [f64; 4],
}

pub const GADGET_W: [[f64; 2]; 4] = [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetOp {
    Min,
    Max,
}

impl MinMaxGadget {
    pub const fn min() -> Self {
        Self {
            w: GADGET_W,
            v: [0.5, -0.5, -0.5, -0.5],
        }
    }

    pub const fn max() -> Self {
        Self {
            w: GADGET_W,
            v: [0.5, -0.5, 0.5, 0.5],
        }
    }

    pub const fn of(op: GadgetOp) -> Self {
        match op {
            GadgetOp::Min => Self::min(),
            GadgetOp::Max => Self::max(),
        }
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..4 {
            s += self.v[k] * (self.w[k][0] * a + self.w[k][1] * b).max(0.0);
        }
        s
    }

    /// The gadget as a two-input network.
    pub fn network(&self) -> ReluNetwork {
        let hidden = AffineLayer::new(
            2,
            self.w
                .iter()
                .map(|r| vec![(0, r[0]), (1, r[1])])
                .collect(),
            vec![0.0; 4],
        )
        .expect("valid gadget");
        let out = AffineLayer::new(4, vec![(0..4).map(|k| (k, self.v[k])).collect()], vec![0.0]).expect("valid gadget");
        ReluNetwork::new(2, vec![hidden, out]).expect("valid gadget")
    }

    /// The gadget with its second input fixed to zero, as a one-input network.
    pub fn against_zero(&self) -> ReluNetwork {
        let hidden = AffineLayer::new(1, self.w.iter().map(|r| vec![(0, r[0])]).collect(), vec![0.0; 4]).expect("valid gadget");
        let out = AffineLayer::new(4, vec![(0..4).map(|k| (k, self.v[k])).collect()], vec![0.0]).expect("valid gadget");
        ReluNetwork::new(1, vec![hidden, out]).expect("valid gadget")
    }
}

/// `op{left, right}` for two scalar networks, padding the shallower one.
pub fn combine(left: &ReluNetwork, right: &ReluNetwork, op: GadgetOp) -> ReluNetwork {
    let pair = ReluNetwork::parallel(&[left.clone(), right.clone()]).expect("same input");
    pair.then(&MinMaxGadget::of(op).network()).expect("two outputs")
}

/// `max{0, net}` through one max gadget.
pub fn max_with_zero(net: &ReluNetwork) -> ReluNetwork {
    net.then(&MinMaxGadget::max().against_zero()).expect("scalar output")
}

/// Balanced tree of gadgets over `leaves`; the left half gets the extra element.
pub fn gadget_tree(leaves: &[ReluNetwork], op: GadgetOp) -> ReluNetwork {
    match leaves.len() {
        0 => panic!("gadget tree over no leaves"),
        1 => leaves[0].clone(),
        n => {
            let split = n.div_ceil(2);
            let l = gadget_tree(&leaves[..split], op);
            let r = gadget_tree(&leaves[split..], op);
            combine(&l, &r, op)
        }
    }
}

/// Balanced tree of gadgets over affine leaves.
pub fn affine_tree(leaves: &[AffineFunc], op: GadgetOp) -> ReluNetwork {
    let nets: Vec<ReluNetwork> = leaves.iter().map(ReluNetwork::from_affine).collect();
    gadget_tree(&nets, op)
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}
