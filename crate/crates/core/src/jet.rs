//! Truncated multivariate polynomials.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: lower total degree first, then larger
/// exponents of earlier variables first (`x1^2 < x1*x2 < x2^2`).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[u8; 8]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exponent(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Monomials of exact total degree `degree` in `nvars` variables, in
    /// graded-lex order.
    pub fn all_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Monomial>) {
            let n = cur.len();
            if n == 0 {
                if left == 0 {
                    out.push(Monomial(SmallVec::new()));
                }
                return;
            }
            if i == n - 1 {
                cur[i] = left as u8;
                out.push(Monomial::from_exponents(cur));
                cur[i] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur[i] = e as u8;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, degree, &mut cur, &mut out);
        out
    }

    /// Monomials with total degree in `lo..=hi`, in graded-lex order.
    pub fn all_in_degrees(nvars: usize, lo: u32, hi: u32) -> Vec<Monomial> {
        (lo..=hi).flat_map(|d| Self::all_of_degree(nvars, d)).collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `nvars` variables truncated at total degree `order`.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// jets.
#[derive(Clone, PartialEq, Debug)]
pub struct Jet<S> {
    nvars: usize,
    order: u32,
    coeffs: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Jet<S> {
    pub fn zero(nvars: usize, order: u32) -> Self {
        Jet {
            nvars,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: u32, c: S) -> Self {
        let mut j = Self::zero(nvars, order);
        j.add_term(Monomial::one(nvars), c);
        j
    }

    pub fn one(nvars: usize, order: u32) -> Self {
        Self::constant(nvars, order, S::one())
    }

    /// The coordinate function `x_i` (zero if `order == 0`).
    pub fn var(nvars: usize, order: u32, i: usize) -> Self {
        let mut j = Self::zero(nvars, order);
        j.add_term(Monomial::var(nvars, i), S::one());
        j
    }

    pub fn monomial(nvars: usize, order: u32, m: Monomial, c: S) -> Self {
        let mut j = Self::zero(nvars, order);
        j.add_term(m, c);
        j
    }

    pub fn from_terms(
        nvars: usize,
        order: u32,
        terms: impl IntoIterator<Item = (Monomial, S)>,
    ) -> Self {
        let mut j = Self::zero(nvars, order);
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            j.add_term(m, c);
        }
        j
    }

    /// Adds `c * m` in place, dropping it if `m` exceeds the order.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        if m.degree() > self.order || c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&m) {
            Some(v) => {
                let nv = core::mem::replace(v, S::zero()) + c;
                if nv.is_zero() {
                    self.coeffs.remove(&m);
                } else {
                    *v = nv;
                }
            }
            None => {
                self.coeffs.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> + '_ {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every stored coefficient is negligible in the field.
    pub fn is_negligible(&self) -> bool {
        self.coeffs.values().all(|c| c.is_negligible())
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.coeffs.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Coefficient of `x_i`.
    pub fn linear_coeff(&self, i: usize) -> S {
        self.coeff(&Monomial::var(self.nvars, i))
    }

    /// Highest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().map(Monomial::degree)
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().map(Monomial::degree)
    }

    pub fn max_abs_coeff(&self) -> S {
        crate::scalar::max_abs(self.coeffs.values())
    }

    /// Homogeneous component of degree `k`.
    pub fn homogeneous(&self, k: u32) -> Self {
        self.filter(|m| m.degree() == k)
    }

    /// Terms of degree in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        self.filter(|m| (lo..=hi).contains(&m.degree()))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Jet {
            nvars: self.nvars,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same polynomial viewed at another order (truncating if lower).
    pub fn with_order(&self, order: u32) -> Self {
        let mut j = self.filter(|m| m.degree() <= order);
        j.order = order;
        j
    }

    fn check_compatible(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Dimension {
                op,
                expected: self.nvars,
                found: other.nvars,
            });
        }
        if self.order != other.order {
            return Err(Error::Dimension {
                op,
                expected: self.order as usize,
                found: other.order as usize,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "jet_add")?;
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "jet_sub")?;
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "jet_mul")?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (ma, ca) in &self.coeffs {
            let da = ma.degree();
            for (mb, cb) in &other.coeffs {
                if da + mb.degree() > self.order {
                    // `other` is sorted by degree
                    break;
                }
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.order);
        }
        Jet {
            nvars: self.nvars,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.order);
        for _ in 0..e {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Partial derivative along `x_i`, kept at the same order.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (m, c) in &self.coeffs {
            let e = m.exponent(i);
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c.clone() * S::from_i64(e as i64));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Multiplies by `x_i` (truncating).
    pub fn mul_var(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (m, c) in &self.coeffs {
            let mut nm = m.clone();
            nm.0[i] += 1;
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Exact division by `x_i`; `None` if some term is not divisible.
    pub fn div_var(&self, i: usize) -> Option<Self> {
        let mut out = Self::zero(self.nvars, self.order);
        for (m, c) in &self.coeffs {
            if m.exponent(i) == 0 {
                return None;
            }
            let mut nm = m.clone();
            nm.0[i] -= 1;
            out.add_term(nm, c.clone());
        }
        Some(out)
    }

    /// Restriction to the hyperplane `x_i = 0`.
    pub fn at_var_zero(&self, i: usize) -> Self {
        self.filter(|m| m.exponent(i) == 0)
    }

    /// Integral along `x_i` vanishing on `x_i = 0`.
    pub fn integrate(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (m, c) in &self.coeffs {
            let mut nm = m.clone();
            nm.0[i] += 1;
            let e = nm.exponent(i) as i64;
            out.add_term(nm, c.clone() / S::from_i64(e));
        }
        out
    }

    pub fn eval(&self, point: &[S]) -> S {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = S::zero();
        for (m, c) in &self.coeffs {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Re-indexes variables: variable `i` of `self` becomes variable
    /// `positions[i]` of a jet in `nvars` variables.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.nvars);
        let mut out = Self::zero(nvars, self.order);
        for (m, c) in &self.coeffs {
            let mut e: SmallVec<[u8; 8]> = SmallVec::from_elem(0, nvars);
            for (i, &p) in positions.iter().enumerate() {
                e[p] += m.exponent(i);
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Keeps only variables `positions` (other variables must not appear);
    /// inverse of [`Jet::embed`].
    pub fn restrict_vars(&self, positions: &[usize]) -> Option<Self> {
        let mut out = Self::zero(positions.len(), self.order);
        for (m, c) in &self.coeffs {
            let mut e: SmallVec<[u8; 8]> = SmallVec::from_elem(0, positions.len());
            let mut used = 0u32;
            for (k, &p) in positions.iter().enumerate() {
                e[k] = m.exponent(p);
                used += m.exponent(p) as u32;
            }
            if used != m.degree() {
                return None;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Some(out)
    }

    /// Substitution `f(args_1, .., args_n)`, truncated at `self.order`.
    ///
    /// Every argument must vanish at the origin.
    pub fn compose(&self, args: &[Jet<S>]) -> Result<Self> {
        if args.len() != self.nvars {
            return Err(Error::Dimension {
                op: "jet_compose",
                expected: self.nvars,
                found: args.len(),
            });
        }
        check_vanishing(args, "jet_compose")?;
        let target_nvars = args.first().map_or(0, Jet::nvars);
        if args.iter().any(|a| a.nvars != target_nvars) {
            return Err(Error::Dimension {
                op: "jet_compose",
                expected: target_nvars,
                found: args.iter().map(Jet::nvars).find(|&n| n != target_nvars).unwrap_or(0),
            });
        }
        let order = self.order;
        let args: Vec<Jet<S>> = args.iter().map(|a| a.with_order(order)).collect();
        Ok(substitute(self, &args, target_nvars, order))
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> JetDisplay<'a, S> {
        JetDisplay { jet: self, names }
    }

    /// Parses a polynomial string over variables named `names`.
    pub fn parse_with(s: &str, names: &[String], order: u32) -> Result<Self> {
        crate::parse::parse_polynomial(s, names, order)
    }

    /// Parses a polynomial over the default names `x1..xn`.
    pub fn parse(s: &str, nvars: usize, order: u32) -> Result<Self> {
        Self::parse_with(s, &default_names(nvars), order)
    }
}

/// Substitution needs every argument to vanish at the origin.
pub(crate) fn check_vanishing<S: Scalar>(args: &[Jet<S>], op: &'static str) -> Result<()> {
    match args.iter().position(|a| !a.constant_term().is_zero()) {
        Some(component) => Err(Error::InvalidMap { op, component }),
        None => Ok(()),
    }
}

/// Substitution without argument checks; `args` already truncated at `order`.
pub(crate) fn substitute<S: Scalar>(
    f: &Jet<S>,
    args: &[Jet<S>],
    target_nvars: usize,
    order: u32,
) -> Jet<S> {
    Substitution::new(args, target_nvars, order).apply(f)
}

/// Substitution of fixed arguments into several jets, sharing the products
/// of argument powers between them.
pub(crate) struct Substitution<'a, S> {
    args: &'a [Jet<S>],
    nvars: usize,
    order: u32,
    // powers[j][e] = args[j]^e
    powers: Vec<Vec<Jet<S>>>,
    // keyed by exponent prefixes ending in a nonzero entry
    products: BTreeMap<Vec<u8>, Jet<S>>,
}

impl<'a, S: Scalar> Substitution<'a, S> {
    pub(crate) fn new(args: &'a [Jet<S>], nvars: usize, order: u32) -> Self {
        Substitution {
            args,
            nvars,
            order,
            powers: args.iter().map(|_| vec![Jet::one(nvars, order)]).collect(),
            products: BTreeMap::new(),
        }
    }

    pub(crate) fn apply(&mut self, f: &Jet<S>) -> Jet<S> {
        let mut out = Jet::zero(self.nvars, self.order);
        for (m, c) in f.terms() {
            // every argument has valuation >= 1, so high-degree monomials drop out
            if m.degree() > self.order {
                break;
            }
            let exps = m.exponents();
            match exps.iter().rposition(|&e| e > 0) {
                None => out.add_term(Monomial::one(self.nvars), c.clone()),
                Some(last) => {
                    self.ensure_product(&exps[..=last]);
                    for (tm, tc) in &self.products[&exps[..=last]].coeffs {
                        out.add_term(tm.clone(), tc.clone() * c.clone());
                    }
                }
            }
        }
        out
    }

    fn power(&mut self, j: usize, e: u8) -> &Jet<S> {
        let p = &mut self.powers[j];
        while p.len() <= e as usize {
            let next = p[p.len() - 1].mul_unchecked(&self.args[j]);
            p.push(next);
        }
        &p[e as usize]
    }

    fn ensure_product(&mut self, exps: &[u8]) {
        if self.products.contains_key(exps) {
            return;
        }
        let (&e, head) = exps.split_last().expect("nonempty exponent prefix");
        let j = exps.len() - 1;
        let p = match head.iter().rposition(|&h| h > 0) {
            None => self.power(j, e).clone(),
            Some(l) => {
                self.ensure_product(&head[..=l]);
                self.power(j, e);
                self.products[&head[..=l]].mul_unchecked(&self.powers[j][e as usize])
            }
        };
        self.products.insert(exps.to_vec(), p);
    }
}

/// `x1, .., xn`.
pub fn default_names(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| alloc::format!("x{i}")).collect()
}

pub struct JetDisplay<'a, S> {
    jet: &'a Jet<S>,
    names: &'a [String],
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial, names: &[String]) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        f.write_str(&names[i])?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl<S: Scalar> fmt::Display for JetDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.jet.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.jet.terms().enumerate() {
            let negative = *c < S::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.degree() == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write_monomial(f, m, self.names)?;
            } else {
                write!(f, "{mag}*")?;
                write_monomial(f, m, self.names)?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Display for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        write!(f, "{}", self.display_with(&names))
    }
}

impl<S: Scalar> Jet<S> {
    /// Canonical serialization over `x1..xn`.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

impl<S: Scalar> Add for &Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: Self) -> Jet<S> {
        self.checked_add(rhs).expect("jet addition")
    }
}

impl<S: Scalar> Sub for &Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: Self) -> Jet<S> {
        self.checked_sub(rhs).expect("jet subtraction")
    }
}

impl<S: Scalar> Mul for &Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: Self) -> Jet<S> {
        self.checked_mul(rhs).expect("jet multiplication")
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: Self) -> Jet<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: Self) -> Jet<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: Self) -> Jet<S> {
        &self * &rhs
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type J = Jet<Rational>;

    fn p(s: &str, n: usize, order: u32) -> J {
        J::parse(s, n, order).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let ms = Monomial::all_of_degree(2, 2);
        let e: Vec<_> = ms.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(e, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(Monomial::var(2, 1) < Monomial::from_exponents(&[2, 0]));
    }

    #[test]
    fn product_truncates() {
        let a = p("1 + x1", 1, 2);
        let b = p("1 - x1", 1, 2);
        assert_eq!(&a * &b, p("1 - x1^2", 1, 2));
        let s = p("x1 + x2", 2, 2);
        assert_eq!(&s * &s, p("x1^2 + 2*x1*x2 + x2^2", 2, 2));
        assert_eq!((&a * &a).to_canonical(), "1 + 2*x1 + x1^2");
        assert_eq!(&a + &J::zero(1, 2), a);
    }

    #[test]
    fn mismatched_order_is_an_error() {
        let a = p("x1", 1, 2);
        let b = p("x1", 1, 3);
        assert!(matches!(a.checked_add(&b), Err(Error::Dimension { .. })));
        let c = p("x1", 2, 2);
        assert!(matches!(a.checked_mul(&c), Err(Error::Dimension { .. })));
    }

    #[test]
    fn composition_examples() {
        let f = p("x1 + x1^2", 1, 3);
        assert_eq!(f.compose(&[p("x1", 1, 3)]).unwrap(), f);
        let g = p("x1", 2, 3);
        assert_eq!(g.compose(&[p("x1 + x2^2", 2, 3), p("x2", 2, 3)]).unwrap(), p("x1 + x2^2", 2, 3));
        let h = p("x1^2", 1, 4);
        assert_eq!(h.compose(&[p("x1 + x1^2", 1, 4)]).unwrap(), p("x1^2 + 2*x1^3 + x1^4", 1, 4));
        assert!(matches!(
            h.compose(&[p("1 + x1", 1, 4)]),
            Err(Error::InvalidMap { .. })
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let j = p("-3/2*x1^2*x3 + x2 - 1 + 5*x1*x2", 3, 4);
        assert_eq!(j.to_canonical(), "-1 + x2 + 5*x1*x2 - 3/2*x1^2*x3");
        assert_eq!(p(&j.to_canonical(), 3, 4), j);
    }

    #[test]
    fn calculus_helpers() {
        let j = p("x1^2*x2 + 3*x2", 2, 4);
        assert_eq!(j.derivative(0), p("2*x1*x2", 2, 4));
        assert_eq!(j.integrate(1), p("1/2*x1^2*x2^2 + 3/2*x2^2", 2, 4));
        assert_eq!(j.div_var(1), Some(p("x1^2 + 3", 2, 4)));
        assert_eq!(j.div_var(0), None);
        assert_eq!(j.eval(&[Rational::from_i64(2), Rational::from_i64(1)]), Rational::from_i64(7));
    }
}
