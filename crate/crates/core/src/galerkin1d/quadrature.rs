/// 5-point Gauss-Legendre nodes on `[0, 1]`.
pub const GAUSS5_NODES: [f64; 5] = [
    0.046_910_077_030_668_018,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_331_93,
];

/// Weights matching [`GAUSS5_NODES`]; they sum to 1.
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_71,
    0.239_314_335_249_683_1,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_1,
    0.118_463_442_528_094_71,
];

/// `int_a^b g(x) dx` by the 5-point rule.
pub fn gauss5(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let h = b - a;
    h * GAUSS5_NODES
        .iter()
        .zip(GAUSS5_WEIGHTS)
        .map(|(xi, w)| w * g(a + h * xi))
        .sum::<f64>()
}
