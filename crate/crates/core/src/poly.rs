//! Sparse multivariate polynomials in the monomial basis.
//!
//! Terms are kept in a `BTreeMap` keyed by [`MultiIndex`], whose ordering is
//! graded lexicographic, so two polynomials with the same terms compare equal
//! and iterate identically regardless of how they were built.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};
use core::ops::{Add, Neg, Sub};

use crate::error::{check_len, Error, Result};

/// Exponent vector `α` with `|α| = Σ α_i` and `α! = Π α_i!`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// `e_axis`: 1 on `axis`, 0 elsewhere.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α!` as a float; exact while every factor fits in 2^53.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| (1..=a as u64).product::<u64>() as f64).product()
    }

    /// `α + e_axis`.
    pub fn bump(&self, axis: usize) -> Self {
        let mut e = self.0.clone();
        e[axis] += 1;
        MultiIndex(e)
    }

    /// `α - e_axis`, or `None` if that exponent is already zero.
    pub fn lower(&self, axis: usize) -> Option<Self> {
        let mut e = self.0.clone();
        e[axis] = e[axis].checked_sub(1)?;
        Some(MultiIndex(e))
    }

    /// Highest axis with a nonzero exponent, if any.
    pub fn last_axis(&self) -> Option<usize> {
        self.0.iter().rposition(|&a| a > 0)
    }

    /// `Π x_i^{α_i}`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &v)| powu(v, a)).product()
    }

    /// Every multi-index of length `dim` with `|α| <= order`, graded order.
    pub fn all_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(dim)];
        let mut frontier = out.clone();
        for _ in 0..order {
            let mut next = Vec::new();
            for alpha in &frontier {
                // Extending only at or after the last used axis visits each index once.
                let start = alpha.last_axis().unwrap_or(0);
                for axis in start..dim {
                    next.push(alpha.bump(axis));
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// File-name friendly label, e.g. `d_2_1`.
    pub fn label(&self) -> String {
        let mut s = String::from("d");
        for a in &self.0 {
            let _ = write!(s, "_{a}");
        }
        s
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn powu(x: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Polynomial over `dim` variables with nonzero coefficients only.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    /// Sums coefficients of repeated indices and drops exact zeros.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (alpha, c) in terms {
            check_len(dim, alpha.dim())?;
            p.add_term(alpha, c);
        }
        p.canonicalize();
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        *self.terms.entry(alpha).or_insert(0.0) += c;
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Highest total degree among stored terms; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim, x.len())?;
        Ok(self.terms.iter().map(|(alpha, c)| c * alpha.monomial(x)).sum())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut p = Polynomial { dim: self.dim, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * s)).collect() };
        p.canonicalize();
        p
    }

    /// Drops every term with `|c| <= eps`.
    pub fn prune(&self, eps: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, c)| libm::fabs(**c) > eps).map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    /// Human-readable form with `decimals` fractional digits (trailing zeros
    /// trimmed). Terms print in descending graded order, unit coefficients and
    /// zero exponents are omitted, and terms that round to zero are skipped.
    pub fn format(&self, var_names: &[&str], decimals: usize) -> String {
        let mut out = String::new();
        for (alpha, c) in self.terms.iter().rev() {
            let mag = trim_number(libm::fabs(*c), decimals);
            if mag == "0" {
                continue;
            }
            let mut mono = String::new();
            for (name, &e) in var_names.iter().zip(alpha.exponents()) {
                match e {
                    0 => {}
                    1 => mono.push_str(name),
                    _ => {
                        let _ = write!(mono, "{name}^{e}");
                    }
                }
            }
            let negative = *c < 0.0;
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if mono.is_empty() || mag != "1" {
                out.push_str(&mag);
            }
            out.push_str(&mono);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn trim_number(v: f64, decimals: usize) -> String {
    let mut s = alloc::format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

impl fmt::Display for Polynomial {
    /// Two decimals, variables `x` (1D) or `x1..xn`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_var_names(self.dim);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.format(&refs, 2))
    }
}

/// `["x"]` for one variable, `["x1", .., "xn"]` otherwise.
pub fn default_var_names(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![String::from("x")]
    } else {
        (1..=dim).map(|i| alloc::format!("x{i}")).collect()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut p = self.clone();
        for (k, v) in &rhs.terms {
            p.add_term(k.clone(), *v);
        }
        p.canonicalize();
        p
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &-rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Expands `Σ_{|α|<=order} D[α] / α! · (x - center)^α` into monomials.
///
/// Each factor `(x_i - c_i)^{α_i}` is expanded with exact integer binomial
/// coefficients before being multiplied out.
pub fn taylor_to_monomial(center: &[f64], derivs: &BTreeMap<MultiIndex, f64>, order: u32) -> Result<Polynomial> {
    let dim = center.len();
    if dim == 0 {
        return Err(Error::Data("center must have at least one coordinate".into()));
    }
    let mut p = Polynomial::zero(dim);
    for alpha in MultiIndex::all_up_to(dim, order) {
        let d = *derivs.get(&alpha).ok_or_else(|| Error::IncompleteChain(alloc::format!("{alpha}")))?;
        if d == 0.0 {
            continue;
        }
        // Start with the single term d/α! and multiply in one axis factor at a time.
        let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; dim], d / alpha.factorial())];
        for (axis, &a) in alpha.exponents().iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(partial.len() * (a as usize + 1));
            for (exps, c) in &partial {
                for j in 0..=a {
                    let coef = binomial(a, j) as f64 * powu(-center[axis], a - j);
                    let mut e = exps.clone();
                    e[axis] = j;
                    next.push((e, c * coef));
                }
            }
            partial = next;
        }
        for (e, c) in partial {
            p.add_term(MultiIndex(e), c);
        }
    }
    p.canonicalize();
    Ok(p)
}

/// Directly evaluates the centered sum `Σ D[α]/α! · (x - c)^α`.
pub fn eval_centered(center: &[f64], derivs: &BTreeMap<MultiIndex, f64>, x: &[f64]) -> Result<f64> {
    check_len(center.len(), x.len())?;
    let shifted: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    Ok(derivs.iter().map(|(alpha, d)| d / alpha.factorial() * alpha.monomial(&shifted)).sum())
}

/// Coefficient-wise mean; absent terms count as zero.
pub fn average(polys: &[Polynomial]) -> Result<Polynomial> {
    let first = polys.first().ok_or_else(|| Error::Data("cannot average an empty list".into()))?;
    let mut acc = Polynomial::zero(first.dim);
    for p in polys {
        check_len(first.dim, p.dim)?;
        for (k, v) in &p.terms {
            acc.add_term(k.clone(), *v);
        }
    }
    let n = polys.len() as f64;
    for v in acc.terms.values_mut() {
        *v /= n;
    }
    acc.canonicalize();
    Ok(acc)
}

pub fn eval(p: &Polynomial, x: &[f64]) -> Result<f64> {
    p.eval(x)
}

pub fn prune(p: &Polynomial, eps: f64) -> Polynomial {
    p.prune(eps)
}

pub fn format(p: &Polynomial, var_names: &[&str]) -> String {
    p.format(var_names, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn derivs_1d(values: &[f64]) -> BTreeMap<MultiIndex, f64> {
        values.iter().enumerate().map(|(k, v)| (mi(&[k as u32]), *v)).collect()
    }

    #[test]
    fn graded_order() {
        let mut v = vec![mi(&[0, 2]), mi(&[1, 0]), mi(&[0, 0]), mi(&[1, 1]), mi(&[2, 0]), mi(&[0, 1])];
        v.sort();
        assert_eq!(v, vec![mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0]), mi(&[0, 2]), mi(&[1, 1]), mi(&[2, 0])]);
    }

    #[test]
    fn all_up_to_counts() {
        // C(n + m, m)
        assert_eq!(MultiIndex::all_up_to(1, 3).len(), 4);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(3, 4).len(), 35);
        let idx = MultiIndex::all_up_to(2, 2);
        let mut sorted = idx.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(idx, sorted);
    }

    #[test]
    fn factorial_and_label() {
        assert_eq!(mi(&[3, 2]).factorial(), 12.0);
        assert_eq!(mi(&[2, 1]).label(), "d_2_1");
    }

    #[test]
    fn first_table_row_expands_to_printed_polynomial() {
        let p = taylor_to_monomial(&[7.0], &derivs_1d(&[11.5, 4.89, 1.02, 0.0]), 3).unwrap();
        assert!((p.coefficient(&mi(&[2])) - 0.51).abs() < 1e-12);
        assert!((p.coefficient(&mi(&[1])) + 2.25).abs() < 1e-12);
        assert!((p.coefficient(&mi(&[0])) - 2.26).abs() < 1e-12);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.format(&["x"], 2), "0.51x^2 - 2.25x + 2.26");
        assert!((p.eval(&[7.0]).unwrap() - 11.5).abs() < 5e-3);
    }

    #[test]
    fn zero_center_divides_by_factorial() {
        let p = taylor_to_monomial(&[0.0], &derivs_1d(&[1.0, 2.0, 6.0, 24.0]), 3).unwrap();
        for (k, want) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_eq!(p.coefficient(&mi(&[k as u32])), *want);
        }
    }

    #[test]
    fn newton_row_collapses_to_ma() {
        let mut d = BTreeMap::new();
        d.insert(mi(&[0, 0]), 42.0);
        d.insert(mi(&[1, 0]), 6.0);
        d.insert(mi(&[0, 1]), 7.0);
        d.insert(mi(&[2, 0]), 0.0);
        d.insert(mi(&[1, 1]), 1.0);
        d.insert(mi(&[0, 2]), 0.0);
        let p = taylor_to_monomial(&[7.0, 6.0], &d, 2).unwrap();
        assert_eq!(p, Polynomial::from_terms(2, [(mi(&[1, 1]), 1.0)]).unwrap());
        assert_eq!(p.format(&["m", "a"], 2), "ma");
    }

    #[test]
    fn missing_derivative_is_reported() {
        let d = derivs_1d(&[1.0, 2.0]);
        assert!(matches!(taylor_to_monomial(&[0.0], &d, 2), Err(Error::IncompleteChain(_))));
    }

    #[test]
    fn average_examples() {
        let p = Polynomial::from_terms(1, [(mi(&[2]), 0.51), (mi(&[0]), 1.0)]).unwrap();
        assert_eq!(average(&[p.clone()]).unwrap(), p);
        assert!(average(&[p.clone(), -&p]).unwrap().is_zero());
        assert!(average(&[]).is_err());
        assert!(average(&[p, Polynomial::zero(2)]).is_err());
    }

    #[test]
    fn prune_examples() {
        let p = Polynomial::from_terms(2, [(mi(&[1, 1]), 1.0), (mi(&[1, 0]), -0.02), (mi(&[0, 0]), 0.09)]).unwrap();
        let q = p.prune(0.05);
        assert_eq!(q, Polynomial::from_terms(2, [(mi(&[1, 1]), 1.0), (mi(&[0, 0]), 0.09)]).unwrap());
        assert_eq!(q.format(&["m", "a"], 2), "ma + 0.09");
        assert_eq!(p.prune(0.0), p);
        assert!(Polynomial::zero(3).prune(10.0).is_zero());
    }

    #[test]
    fn from_terms_drops_exact_zeros() {
        let p = Polynomial::from_terms(1, [(mi(&[1]), 2.0), (mi(&[1]), -2.0), (mi(&[0]), 0.0)]).unwrap();
        assert!(p.is_zero());
        assert!(Polynomial::from_terms(1, [(mi(&[1, 0]), 1.0)]).is_err());
    }

    #[test]
    fn format_examples() {
        let p = Polynomial::from_terms(1, [(mi(&[2]), 0.51), (mi(&[1]), -2.25), (mi(&[0]), 2.2)]).unwrap();
        assert_eq!(p.format(&["x"], 2), "0.51x^2 - 2.25x + 2.2");
        assert_eq!(p.to_string(), "0.51x^2 - 2.25x + 2.2");
        assert_eq!(Polynomial::zero(2).format(&["m", "a"], 2), "0");
        let q = Polynomial::from_terms(2, [(mi(&[1, 2]), -1.0), (mi(&[0, 0]), 1.0), (mi(&[2, 0]), 0.001)]).unwrap();
        assert_eq!(q.format(&["x", "y"], 2), "-xy^2 + 1");
        assert_eq!(q.format(&["x", "y"], 3), "-xy^2 + 0.001x^2 + 1");
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::zero(2).eval(&[3.0, 4.0]).unwrap(), 0.0);
        let p = Polynomial::from_terms(1, [(mi(&[2]), 0.51), (mi(&[1]), -2.25), (mi(&[0]), 2.26)]).unwrap();
        assert!((p.eval(&[7.0]).unwrap() - 11.5).abs() < 0.005);
        assert!(p.eval(&[1.0, 2.0]).is_err());
    }
}
