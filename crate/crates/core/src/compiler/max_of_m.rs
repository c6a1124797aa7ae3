use super::gadget::{ceil_log2, combine, GadgetOp};
use super::CompileError;
use crate::net::ReluNetwork;

/// Depth and size estimates for the maximum of `nets`: hidden layers at most
/// `max k_i + ceil(log2 m)`, size at most `sum s_i + 4(2m - 1)` plus two identity neurons
/// per layer of depth difference `max k - k_i`.
pub fn max_of_m_limits(nets: &[ReluNetwork]) -> (usize, usize, usize) {
    let m = nets.len();
    let kmax = nets.iter().map(ReluNetwork::hidden_layers).max().unwrap_or(0);
    let sizes: usize = nets.iter().map(ReluNetwork::size).sum();
    let strict = sizes + 4 * (2 * m - 1);
    let padding: usize = nets.iter().map(|n| 2 * (kmax - n.hidden_layers())).sum();
    (kmax + ceil_log2(m), strict, strict + padding)
}

/// `max{f_1, ..., f_m}` by recursive halving: the first `floor(m/2)` networks form the left
/// subtree.
pub fn compile_max_of_m(nets: &[ReluNetwork]) -> Result<ReluNetwork, CompileError> {
    if nets.is_empty() {
        return Err(CompileError::EmptyList);
    }
    for n in nets {
        if n.output_dim() != 1 || n.input_dim() != nets[0].input_dim() {
            return Err(CompileError::DimensionMismatch {
                expected: nets[0].input_dim(),
                got: n.input_dim(),
            });
        }
    }
    let net = halve(nets);
    let (depth_limit, _, size_limit) = max_of_m_limits(nets);
    if net.hidden_layers() > depth_limit || net.size() > size_limit {
        return Err(CompileError::BoundViolated(format!(
            "max of {} networks: depth {} (limit {depth_limit}), size {} (limit {size_limit})",
            nets.len(),
            net.hidden_layers(),
            net.size()
        )));
    }
    Ok(net)
}

fn halve(nets: &[ReluNetwork]) -> ReluNetwork {
    match nets.len() {
        1 => nets[0].clone(),
        m => {
            let left = halve(&nets[..m / 2]);
            let right = halve(&nets[m / 2..]);
            combine(&left, &right, GadgetOp::Max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpwl::AffineFunc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_affine<R: Rng>(rng: &mut R) -> AffineFunc {
        AffineFunc::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn single_net_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = ReluNetwork::from_affine(&random_affine(&mut rng));
        assert_eq!(compile_max_of_m(std::slice::from_ref(&n)).unwrap(), n);
    }

    #[test]
    fn two_affines_one_gadget() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nets = [ReluNetwork::from_affine(&random_affine(&mut rng)), ReluNetwork::from_affine(&random_affine(&mut rng))];
        let net = compile_max_of_m(&nets).unwrap();
        assert_eq!(net.size(), 4);
        assert_eq!(net.hidden_layers(), 1);
    }

    #[test]
    fn five_affines() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fs: Vec<AffineFunc> = (0..5).map(|_| random_affine(&mut rng)).collect();
        let nets: Vec<ReluNetwork> = fs.iter().map(ReluNetwork::from_affine).collect();
        let net = compile_max_of_m(&nets).unwrap();
        assert_eq!(net.hidden_layers(), 3);
        for _ in 0..1000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let want = fs.iter().map(|f| f.eval(&x)).fold(f64::NEG_INFINITY, f64::max);
            assert!((net.eval_scalar(&x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_list() {
        assert_eq!(compile_max_of_m(&[]).unwrap_err(), CompileError::EmptyList);
    }
}
