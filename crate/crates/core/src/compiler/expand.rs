use std::collections::BTreeMap;

use super::reduce::MaxTerm;
use super::CompileError;
use crate::cpwl::{AffineFunc, LatticeForm};

/// Largest piece count accepted by the lattice expansion.
pub const MAX_PIECES: usize = 8;
/// Largest clause count accepted by the lattice expansion.
pub const MAX_CLAUSES: usize = 24;

/// `max{0, min_k g_k} = sum_{S != {}} (-1)^{|S|+1} max{0, g_S}`.
pub fn expand_hat(affines: &[AffineFunc]) -> Vec<MaxTerm> {
    let n = affines.len();
    assert!(n < 32, "too many affine pieces for subset expansion");
    (1u32..(1 << n))
        .map(|mask| {
            let args: Vec<AffineFunc> = (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| affines[k].clone())
                .collect();
            let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
            MaxTerm::new(sign, Some(0.0), args)
        })
        .collect()
}

/// Signed expansion of `max_k min_{i in s_k} l_i` into integer multiples of `max_{i in S} l_i`.
///
/// Uses `max{X, min_{i in s} l_i} = sum_{U ⊆ s, U != {}} (-1)^{|U|+1} max{X, max_U l}`
/// clause by clause; coefficients are kept per subset `S`, so at most `2^m - 1` terms remain.
pub fn expand_lattice(lattice: &LatticeForm) -> Result<Vec<MaxTerm>, CompileError> {
    let m = lattice.m();
    let big_m = lattice.clause_count();
    if m > MAX_PIECES || big_m > MAX_CLAUSES {
        return Err(CompileError::Overflow { m, clauses: big_m });
    }
    let mut coeffs: BTreeMap<u32, i64> = BTreeMap::new();
    coeffs.insert(0, 1);
    for clause in lattice.clauses.iter().rev() {
        let s: u32 = clause.iter().fold(0, |acc, &i| acc | (1 << i));
        let mut next: BTreeMap<u32, i64> = BTreeMap::new();
        for (&set, &c) in &coeffs {
            // every non-empty sub-mask of s
            let mut u = s;
            while u != 0 {
                let sign = if u.count_ones() % 2 == 1 { 1 } else { -1 };
                *next.entry(set | u).or_insert(0) += sign * c;
                u = (u - 1) & s;
            }
        }
        next.retain(|_, c| *c != 0);
        coeffs = next;
    }
    Ok(coeffs
        .into_iter()
        .map(|(set, c)| {
            let args = (0..m)
                .filter(|i| set & (1 << i) != 0)
                .map(|i| lattice.pieces[i].clone())
                .collect();
            MaxTerm::new(c as f64, None, args)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::reduce::eval_terms;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hat_expansion_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gs: Vec<AffineFunc> = (0..5)
            .map(|_| AffineFunc::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(-0.5..1.0)))
            .collect();
        let terms = expand_hat(&gs);
        assert_eq!(terms.len(), 31);
        for _ in 0..1000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let want = gs.iter().map(|g| g.eval(&x)).fold(f64::INFINITY, f64::min).max(0.0);
            assert!((eval_terms(&terms, &x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_expansion_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = rng.gen_range(1..=6);
            let pieces: Vec<AffineFunc> = (0..m)
                .map(|_| AffineFunc::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(-1.0..1.0)))
                .collect();
            let clauses: Vec<Vec<usize>> = (0..rng.gen_range(1..=5))
                .map(|_| {
                    let mut c: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
                    if c.is_empty() {
                        c.push(rng.gen_range(0..m));
                    }
                    c
                })
                .collect();
            let l = LatticeForm::new(pieces, clauses).unwrap();
            let terms = expand_lattice(&l).unwrap();
            assert!(terms.len() < 1 << m);
            for _ in 0..200 {
                let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                assert!((eval_terms(&terms, &x) - l.eval(&x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn overflow_reported() {
        let pieces: Vec<AffineFunc> = (0..9).map(|k| AffineFunc::new(vec![k as f64], 0.0)).collect();
        let l = LatticeForm::new(pieces, vec![vec![0]]).unwrap();
        assert_eq!(expand_lattice(&l).unwrap_err(), CompileError::Overflow { m: 9, clauses: 1 });
    }
}
