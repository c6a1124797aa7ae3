use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::gadget::ceil_log2;
use super::CompileError;
use crate::net::ReluNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pathway {
    FemDeep,
    LatticeShallow,
    BasisShallow,
    FemShallow,
}

/// Provenance needed to evaluate the size and depth estimates of a compiled network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccountMeta {
    /// `n_basis` nodal functions with nonzero weight on a mesh with `k_h = kh`.
    FemDeep { d: usize, kh: usize, n_basis: usize },
    /// A lattice form with `m` pieces and `clauses` clauses.
    LatticeShallow { d: usize, m: usize, clauses: usize },
    /// A single nodal function whose star has `n` simplices.
    BasisShallow { d: usize, n: usize },
    /// Sum of `n_basis` shallow nodal networks on a mesh with `k_h = kh`.
    FemShallow { d: usize, kh: usize, n_basis: usize },
}

/// Compiled network measured against its predicted depth and size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pathway: Pathway,
    pub predicted_depth: usize,
    pub actual_depth: usize,
    #[serde(with = "big_decimal")]
    pub predicted_size_bound: BigUint,
    pub actual_size: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nonzero_params_bound: Option<u64>,
    pub nonzero_params: usize,
    pub kh: Option<usize>,
    pub m: Option<usize>,
    #[serde(rename = "M")]
    pub clauses: Option<usize>,
    pub d: usize,
    pub n_basis: Option<usize>,
    /// How the bounds were evaluated.
    pub derivation: String,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.actual_depth <= self.predicted_depth
            && BigUint::from(self.actual_size) <= self.predicted_size_bound
            && self
                .nonzero_params_bound
                .map_or(true, |b| self.nonzero_params as u64 <= b)
    }
}

mod big_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut r = BigUint::from(1u32);
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Size estimate for the shallow route on a lattice form:
/// `(10d + 6) (2^m - 1)^M (2^{d+1} - 1)^e`, where `e = m - d` once maxima of more than
/// `d + 1` pieces occur and `e = 0` otherwise.
pub fn lattice_size_bound(d: usize, m: usize, clauses: usize) -> BigUint {
    let per_term = BigUint::from(10 * d + 6);
    let subsets = (BigUint::from(1u32) << m) - 1u32;
    let branches = (BigUint::from(1u32) << (d + 1)) - 1u32;
    let e = if m > d + 1 { m - d } else { 0 };
    per_term * subsets.pow(clauses as u32) * branches.pow(e as u32)
}

/// Size estimate for one nodal function through the shallow route:
/// `sum_{1<=j<=d} C(n,j)(10j+6) + (10d+6) sum_{j>d} C(n,j)(2^{d+1}-1)^{j-d}`.
pub fn basis_shallow_size_bound(n: usize, d: usize) -> BigUint {
    let branches = (BigUint::from(1u32) << (d + 1)) - 1u32;
    let mut s = BigUint::from(0u32);
    for j in 1..=n {
        if j <= d {
            s += binomial(n, j) * BigUint::from(10 * j + 6);
        } else {
            s += binomial(n, j) * BigUint::from(10 * d + 6) * branches.pow((j - d) as u32);
        }
    }
    s
}

/// Size estimate for the deep route: `8 k_h N`.
pub fn fem_deep_size_bound(kh: usize, n_basis: usize) -> BigUint {
    BigUint::from(8 * kh * n_basis)
}

/// Fills a [`BoundReport`] and fails if the network exceeds any estimate.
pub fn account(net: &ReluNetwork, meta: AccountMeta) -> Result<BoundReport, CompileError> {
    let actual_depth = net.hidden_layers();
    let actual_size = net.size();
    let nonzero_params = net.nonzero_params();
    let report = match meta {
        AccountMeta::FemDeep { d, kh, n_basis } => {
            let size_bound = fem_deep_size_bound(kh, n_basis);
            let per_neuron = (d + 1).max(8) as u64 + 1;
            BoundReport {
                pathway: Pathway::FemDeep,
                predicted_depth: ceil_log2(kh.max(1)) + 1,
                actual_depth,
                nonzero_params_bound: Some(per_neuron * 8 * (kh * n_basis) as u64 + 1),
                predicted_size_bound: size_bound,
                actual_size,
                nonzero_params,
                kh: Some(kh),
                m: None,
                clauses: None,
                d,
                n_basis: Some(n_basis),
                derivation: format!(
                    "depth ceil(log2 k_h)+1; size 8*k_h*N: per basis at most (k_h-1) min gadgets \
                     and one max gadget of 4 neurons plus 2-neuron identity padding; nonzero \
                     parameters at most (max(d+1,8)+1) per neuron plus the output bias, with k_h={kh}, N={n_basis}"
                ),
            }
        }
        AccountMeta::LatticeShallow { d, m, clauses } => BoundReport {
            pathway: Pathway::LatticeShallow,
            predicted_depth: ceil_log2(d + 1),
            actual_depth,
            predicted_size_bound: lattice_size_bound(d, m, clauses),
            actual_size,
            nonzero_params_bound: None,
            nonzero_params,
            kh: None,
            m: Some(m),
            clauses: Some(clauses),
            d,
            n_basis: None,
            derivation: format!(
                "depth ceil(log2(d+1)); size (10d+6)(2^m-1)^M(2^(d+1)-1)^e with e = m-d if m > d+1 else 0; \
                 d={d}, m={m}, M={clauses}"
            ),
        },
        AccountMeta::BasisShallow { d, n } => BoundReport {
            pathway: Pathway::BasisShallow,
            predicted_depth: ceil_log2(d + 1),
            actual_depth,
            predicted_size_bound: basis_shallow_size_bound(n, d),
            actual_size,
            nonzero_params_bound: None,
            nonzero_params,
            kh: Some(n),
            m: Some(n + 1),
            clauses: None,
            d,
            n_basis: Some(1),
            derivation: format!(
                "depth ceil(log2(d+1)); size sum_(j<=d) C(n,j)(10j+6) + (10d+6) sum_(j>d) C(n,j)(2^(d+1)-1)^(j-d); \
                 d={d}, n={n}"
            ),
        },
        AccountMeta::FemShallow { d, kh, n_basis } => BoundReport {
            pathway: Pathway::FemShallow,
            predicted_depth: ceil_log2(d + 1),
            actual_depth,
            predicted_size_bound: basis_shallow_size_bound(kh, d) * BigUint::from(n_basis),
            actual_size,
            nonzero_params_bound: None,
            nonzero_params,
            kh: Some(kh),
            m: None,
            clauses: None,
            d,
            n_basis: Some(n_basis),
            derivation: format!(
                "depth ceil(log2(d+1)); size N times the nodal estimate with n = k_h; d={d}, k_h={kh}, N={n_basis}"
            ),
        },
    };
    if report.holds() {
        Ok(report)
    } else {
        Err(CompileError::BoundViolated(format!(
            "{:?}: depth {} (limit {}), size {} (limit {}), nonzeros {} (limit {:?})",
            report.pathway,
            report.actual_depth,
            report.predicted_depth,
            report.actual_size,
            report.predicted_size_bound,
            report.nonzero_params,
            report.nonzero_params_bound
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_bound_values() {
        // n = 1: a single max{0, g}
        assert_eq!(basis_shallow_size_bound(1, 1), BigUint::from(16u32));
        // n = 2, d = 1: 2*16 + 16*1*3
        assert_eq!(basis_shallow_size_bound(2, 1), BigUint::from(80u32));
        // n = 6, d = 2: 6*16 + 15*26 + 26*(20*7 + 15*49 + 6*343 + 1*2401)
        let want = 6 * 16 + 15 * 26 + 26 * (20 * 7 + 15 * 49 + 6 * 343 + 2401);
        assert_eq!(basis_shallow_size_bound(6, 2), BigUint::from(want as u64));
    }

    #[test]
    fn lattice_bound_values() {
        // |x|: d = 1, m = 2, M = 2 -> 16 * 3^2
        assert_eq!(lattice_size_bound(1, 2, 2), BigUint::from(144u32));
        // m = 5, d = 2, M = 3 -> 26 * 31^3 * 7^3
        assert_eq!(lattice_size_bound(2, 5, 3), BigUint::from(26u64 * 29791 * 343));
    }

    #[test]
    fn report_serializes_bound_as_string() {
        let net = ReluNetwork::from_affine(&crate::cpwl::AffineFunc::constant(1, 0.0));
        let r = account(&net, AccountMeta::LatticeShallow { d: 1, m: 1, clauses: 1 }).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"predicted_size_bound\":\"16\""));
        let back: BoundReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
