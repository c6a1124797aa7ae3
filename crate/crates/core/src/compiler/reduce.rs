use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CompileError;
use crate::cpwl::AffineFunc;

/// `coeff * max{constant, args...}`; a missing constant means no constant argument.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxTerm {
    pub coeff: f64,
    pub constant: Option<f64>,
    pub args: Vec<AffineFunc>,
}

impl MaxTerm {
    pub fn new(coeff: f64, constant: Option<f64>, args: Vec<AffineFunc>) -> Self {
        Self { coeff, constant, args }
    }

    /// Number of arguments of the maximum, the constant included.
    pub fn arity(&self) -> usize {
        self.args.len() + usize::from(self.constant.is_some())
    }

    pub fn max_value(&self, x: &[f64]) -> f64 {
        self.args
            .iter()
            .map(|a| a.eval(x))
            .fold(self.constant.unwrap_or(f64::NEG_INFINITY), f64::max)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeff * self.max_value(x)
    }
}

pub fn eval_terms(terms: &[MaxTerm], x: &[f64]) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

/// Singular values at or below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-8;
/// Dependency fits with relative residual in `[AMBIGUOUS_LO, AMBIGUOUS_HI]` are rejected.
const AMBIGUOUS_LO: f64 = 1e-8;
const AMBIGUOUS_HI: f64 = 1e-4;
/// Coefficients this close to 0 or 1 are snapped.
const SNAP_TOL: f64 = 1e-11;

/// Three-branch rewrite of `max{f, g, alpha g + h}` with `abar = 1 / (1 - alpha)`:
/// signs of `max{f, g, abar h}`, `max{f, alpha g + h, abar h}` and `max{f, gbar}`, and which
/// of `g`, `alpha g + h`, `abar h` plays `gbar`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GBar {
    G,
    AlphaGPlusH,
    AbarH,
}

pub fn key_reduce_case(alpha: f64) -> ([f64; 3], GBar) {
    assert!(alpha != 1.0 && alpha != 0.0, "alpha must differ from 0 and 1");
    if alpha > 1.0 {
        ([-1.0, 1.0, 1.0], GBar::G)
    } else if alpha > 0.0 {
        ([1.0, -1.0, 1.0], GBar::AlphaGPlusH)
    } else {
        ([1.0, 1.0, -1.0], GBar::AbarH)
    }
}

/// Right-hand side of the four-term identity for `max{f, g, alpha g + h}` evaluated on
/// scalars.
pub fn four_term_rhs(f: f64, g: f64, h: f64, alpha: f64) -> f64 {
    let abar = 1.0 / (1.0 - alpha);
    let u = g - abar * h;
    f.max(alpha.max(1.0) * u.max(0.0) + abar * h) + f.max(alpha.min(1.0) * u.min(0.0) + abar * h)
        - f.max(abar * h)
}

/// Three-term form of the same identity on scalars.
pub fn key_reduce_rhs(f: f64, g: f64, h: f64, alpha: f64) -> f64 {
    let abar = 1.0 / (1.0 - alpha);
    let (s, gbar) = key_reduce_case(alpha);
    let gb = match gbar {
        GBar::G => g,
        GBar::AlphaGPlusH => alpha * g + h,
        GBar::AbarH => abar * h,
    };
    s[0] * f.max(g).max(abar * h) + s[1] * f.max(alpha * g + h).max(abar * h) + s[2] * f.max(gb)
}

/// Sampling verifier for term rewrites.
pub struct Verifier {
    points: Vec<Vec<f64>>,
    pub checks: usize,
}

impl Verifier {
    pub fn new(dim: usize, count: usize, half_width: f64, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| (0..dim).map(|_| rng.gen_range(-half_width..half_width)).collect())
            .collect();
        Self { points, checks: 0 }
    }

    pub fn check(&mut self, before: &[MaxTerm], after: &[MaxTerm], context: &str) -> Result<(), CompileError> {
        self.checks += 1;
        for x in &self.points {
            let a = eval_terms(before, x);
            let b = eval_terms(after, x);
            let scale = 1.0
                + before
                    .iter()
                    .map(|t| t.coeff.abs() * t.max_value(x).abs())
                    .sum::<f64>();
            if (a - b).abs() > 1e-9 * scale {
                return Err(CompileError::IdentityCheckFailed {
                    context: context.to_string(),
                    error: (a - b).abs(),
                });
            }
        }
        Ok(())
    }
}

/// One elimination step: rewrites `max{c0, l_1, ..., l_L}` as a signed sum of maxima with
/// at most `L - 1` affine arguments each. Returns the input unchanged when its arity is
/// already at most `d + 1`.
pub fn reduce_clause(c0: Option<f64>, ls: &[AffineFunc], d: usize) -> Result<Vec<MaxTerm>, CompileError> {
    let term = MaxTerm::new(1.0, c0, ls.to_vec());
    if term.arity() <= d + 1 {
        return Ok(vec![term]);
    }
    let mut verifier = Verifier::new(d, 32, 5.0, 0x5eed);
    reduce_once(&term, &mut verifier)
}

/// Repeats [`reduce_clause`] until every term has arity at most `d + 1`.
pub fn reduce_to_width(term: &MaxTerm, d: usize, verifier: &mut Verifier) -> Result<Vec<MaxTerm>, CompileError> {
    let mut done = Vec::new();
    let mut work = vec![term.clone()];
    while let Some(t) = work.pop() {
        if t.arity() <= d + 1 {
            done.push(t);
        } else {
            work.extend(reduce_once(&t, verifier)?);
        }
    }
    Ok(done)
}

fn reduce_once(term: &MaxTerm, verifier: &mut Verifier) -> Result<Vec<MaxTerm>, CompileError> {
    let (dep, coeffs, a0) = find_dependency(&term.args)?;
    let mut out = Vec::new();
    eliminate(
        term.constant,
        term.args.clone(),
        dep,
        coeffs,
        a0,
        term.coeff,
        &mut out,
        verifier,
    )?;
    verifier.check(std::slice::from_ref(term), &out, "elimination")?;
    Ok(out)
}

/// Greedy basis of the gradients; returns the last item outside the basis and its
/// coefficients `l_dep = sum alpha_j l_j + alpha_0` over basis items.
fn find_dependency(items: &[AffineFunc]) -> Result<(usize, Vec<(usize, f64)>, f64), CompileError> {
    let d = items[0].dim();
    let mut basis: Vec<usize> = Vec::new();
    let mut dependent: Option<(usize, Vec<(usize, f64)>, f64)> = None;
    for (k, item) in items.iter().enumerate() {
        let norm = crate::geometry::norm(&item.gradient);
        if norm == 0.0 {
            dependent = Some((k, Vec::new(), item.offset));
            continue;
        }
        if basis.is_empty() {
            basis.push(k);
            continue;
        }
        let (alpha, residual) = fit(items, &basis, k, d);
        let rel = residual / norm;
        if rel > AMBIGUOUS_HI {
            if basis.len() < d {
                basis.push(k);
            } else {
                return Err(CompileError::NumericalDependenceAmbiguous { residual: rel });
            }
        } else if rel >= AMBIGUOUS_LO {
            return Err(CompileError::NumericalDependenceAmbiguous { residual: rel });
        } else {
            let mut coeffs = Vec::new();
            let mut a0 = item.offset;
            for (j, a) in basis.iter().zip(alpha) {
                a0 -= a * items[*j].offset;
                if a.abs() > SNAP_TOL {
                    coeffs.push((*j, snap_one(a)));
                }
            }
            dependent = Some((k, coeffs, a0));
        }
    }
    dependent.ok_or_else(|| CompileError::Internal("no dependent argument found".into()))
}

fn snap_one(a: f64) -> f64 {
    if (a - 1.0).abs() <= SNAP_TOL {
        1.0
    } else {
        a
    }
}

/// Least-squares coefficients of item `k`'s gradient over the basis gradients.
fn fit(items: &[AffineFunc], basis: &[usize], k: usize, d: usize) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(d, basis.len(), |r, c| items[basis[c]].gradient[r]);
    let b = DVector::from_column_slice(&items[k].gradient);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd
        .solve(&b, RANK_TOL * smax)
        .unwrap_or_else(|_| DVector::zeros(basis.len()));
    let residual = (&a * &sol - &b).norm();
    (sol.iter().copied().collect(), residual)
}

/// Removes the listed positions from `items`.
fn without(items: &[AffineFunc], drop: &[usize]) -> Vec<AffineFunc> {
    items
        .iter()
        .enumerate()
        .filter(|(k, _)| !drop.contains(k))
        .map(|(_, a)| a.clone())
        .collect()
}

fn combination(items: &[AffineFunc], coeffs: &[(usize, f64)], a0: f64) -> AffineFunc {
    let d = items[0].dim();
    let mut out = AffineFunc::constant(d, a0);
    for (j, a) in coeffs {
        out = out.add(&items[*j].scaled(*a));
    }
    out
}

/// Eliminates `items[dep] = sum alpha_j items[j] + a0` from `sign * max{c0, items}`.
#[allow(clippy::too_many_arguments)]
fn eliminate(
    c0: Option<f64>,
    items: Vec<AffineFunc>,
    dep: usize,
    coeffs: Vec<(usize, f64)>,
    a0: f64,
    sign: f64,
    out: &mut Vec<MaxTerm>,
    verifier: &mut Verifier,
) -> Result<(), CompileError> {
    if coeffs.is_empty() {
        let c = Some(c0.map_or(a0, |c| c.max(a0)));
        out.push(MaxTerm::new(sign, c, without(&items, &[dep])));
        return Ok(());
    }
    if coeffs.iter().all(|(_, a)| *a == 1.0) {
        if coeffs.len() == 1 {
            // max{l_j, l_j + a0} keeps whichever lies above
            let j = coeffs[0].0;
            let drop = if a0 >= 0.0 { j } else { dep };
            out.push(MaxTerm::new(sign, c0, without(&items, &[drop])));
            return Ok(());
        }
        // swap roles: l_eta = l_dep - sum_{j != eta} l_j - a0
        let eta = coeffs.last().expect("non-empty").0;
        let mut swapped: Vec<(usize, f64)> = coeffs
            .iter()
            .filter(|(j, _)| *j != eta)
            .map(|(j, _)| (*j, -1.0))
            .collect();
        swapped.push((dep, 1.0));
        swapped.sort_by_key(|e| e.0);
        return eliminate(c0, items, eta, swapped, -a0, sign, out, verifier);
    }
    let (pos, &(eta, alpha)) = coeffs
        .iter()
        .enumerate()
        .rev()
        .find(|(_, (_, a))| *a != 1.0)
        .expect("some coefficient differs from 1");
    let abar = 1.0 / (1.0 - alpha);
    let rest: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != pos)
        .map(|(_, (j, a))| (*j, a * abar))
        .filter(|(_, a)| a.abs() > SNAP_TOL)
        .map(|(j, a)| (j, snap_one(a)))
        .collect();
    let h_coeffs: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != pos)
        .map(|(_, e)| *e)
        .collect();
    let abar_h = combination(&items, &h_coeffs, a0).scaled(abar);
    let a0_bar = a0 * abar;
    let (sigma, gbar) = key_reduce_case(alpha);

    let before = MaxTerm::new(sign, c0, items.clone());
    let start = out.len();

    // max{f, g, abar h}: the dependent argument becomes abar h
    let mut t1 = items.clone();
    t1[dep] = abar_h.clone();
    eliminate(c0, t1, dep, rest.clone(), a0_bar, sign * sigma[0], out, verifier)?;

    // max{f, alpha g + h, abar h}: g becomes abar h
    let mut t2 = items.clone();
    t2[eta] = abar_h.clone();
    eliminate(c0, t2, eta, rest, a0_bar, sign * sigma[1], out, verifier)?;

    // max{f, gbar}
    let t3 = match gbar {
        GBar::G => without(&items, &[dep]),
        GBar::AlphaGPlusH => without(&items, &[eta]),
        GBar::AbarH => {
            let mut v = without(&items, &[eta, dep]);
            v.push(abar_h);
            v
        }
    };
    out.push(MaxTerm::new(sign * sigma[2], c0, t3));

    verifier.check(std::slice::from_ref(&before), &out[start..], "three-branch rewrite")
}

/// Merges terms with identical arguments (bitwise), dropping those whose coefficients
/// cancel.
pub fn merge_terms(terms: Vec<MaxTerm>) -> Vec<MaxTerm> {
    use std::collections::HashMap;
    let key = |t: &MaxTerm| -> Vec<u64> {
        let mut args: Vec<Vec<u64>> = t
            .args
            .iter()
            .map(|a| {
                a.gradient
                    .iter()
                    .map(|v| v.to_bits())
                    .chain(std::iter::once(a.offset.to_bits()))
                    .collect()
            })
            .collect();
        args.sort();
        args.dedup();
        let mut k = vec![t.constant.map_or(u64::MAX, f64::to_bits)];
        for a in args {
            k.extend(a);
        }
        k
    };
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut merged: Vec<MaxTerm> = Vec::new();
    for t in terms {
        let k = key(&t);
        match index.get(&k) {
            Some(&i) => merged[i].coeff += t.coeff,
            None => {
                index.insert(k, merged.len());
                merged.push(t);
            }
        }
    }
    merged.retain(|t| t.coeff != 0.0);
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_affine<R: Rng>(d: usize, rng: &mut R) -> AffineFunc {
        AffineFunc::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn four_term_identity_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for alpha in [2.0, 0.5, -1.5, 3.7, -0.2, 0.9] {
            let (f, g, h) = (random_affine(2, &mut rng), random_affine(2, &mut rng), random_affine(2, &mut rng));
            for _ in 0..10_000 {
                let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
                let (fv, gv, hv) = (f.eval(&x), g.eval(&x), h.eval(&x));
                let lhs = fv.max(gv).max(alpha * gv + hv);
                assert!((lhs - four_term_rhs(fv, gv, hv, alpha)).abs() < 1e-12 * (1.0 + lhs.abs()) * 10.0);
                assert!((lhs - key_reduce_rhs(fv, gv, hv, alpha)).abs() < 1e-12 * (1.0 + lhs.abs()) * 10.0);
            }
        }
    }

    #[test]
    fn narrow_clause_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ls = vec![random_affine(2, &mut rng), random_affine(2, &mut rng)];
        let out = reduce_clause(Some(0.5), &ls, 2).unwrap();
        assert_eq!(out, vec![MaxTerm::new(1.0, Some(0.5), ls)]);
    }

    #[test]
    fn unit_coefficients_use_swap() {
        // d = 1, l3 = l1 + l2 with every coefficient 1
        let l1 = AffineFunc::new(vec![1.0], 0.3);
        let l2 = AffineFunc::new(vec![-2.0], 0.1);
        let l3 = l1.add(&l2);
        let out = reduce_clause(None, &[l1.clone(), l2.clone(), l3.clone()], 1).unwrap();
        assert!(out.len() <= 3);
        for t in &out {
            assert!(t.args.len() <= 2);
        }
        let src = MaxTerm::new(1.0, None, vec![l1, l2, l3]);
        for k in 0..=1000 {
            let x = [-5.0 + 0.01 * k as f64];
            assert!((eval_terms(&out, &x) - src.eval(&x)).abs() < 1e-10);
        }
    }

    #[test]
    fn reduce_to_width_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=3 {
            for l in d + 1..=d + 4 {
                let ls: Vec<AffineFunc> = (0..l).map(|_| random_affine(d, &mut rng)).collect();
                let term = MaxTerm::new(1.0, Some(rng.gen_range(-1.0..1.0)), ls);
                let mut v = Verifier::new(d, 32, 5.0, 9);
                let out = reduce_to_width(&term, d, &mut v).unwrap();
                assert!(out.iter().all(|t| t.arity() <= d + 1));
                for _ in 0..500 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                    assert!((eval_terms(&out, &x) - term.eval(&x)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn branch_count_per_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..=3 {
            for _ in 0..20 {
                let ls: Vec<AffineFunc> = (0..d + 1).map(|_| random_affine(d, &mut rng)).collect();
                let out = reduce_clause(Some(0.0), &ls, d).unwrap();
                assert!(out.len() < 1 << (d + 1));
                assert!(out.iter().all(|t| t.args.len() <= d));
            }
        }
    }

    #[test]
    fn merge_cancels_opposites() {
        let a = AffineFunc::new(vec![1.0], 0.0);
        let t = vec![
            MaxTerm::new(1.0, Some(0.0), vec![a.clone()]),
            MaxTerm::new(-1.0, Some(0.0), vec![a.clone()]),
            MaxTerm::new(2.0, None, vec![a.clone()]),
        ];
        assert_eq!(merge_terms(t), vec![MaxTerm::new(2.0, None, vec![a])]);
    }
}
