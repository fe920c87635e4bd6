//! Differential forms with jet coefficients.
//!
//! A k-form is stored as `Σ f_I dx_I` over strictly increasing index tuples.
//! The radial homotopy operator divides the coefficient of a monomial of
//! degree `d` inside a k-form by `d + k`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::jet::{check_vanishing, Jet, Monomial, Substitution};
use crate::linalg::Matrix;
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// Strictly increasing index tuple.
pub type Indices = SmallVec<[u8; 6]>;

/// Sorts `idx`, returning the permutation sign, or `None` on a repeated index.
fn canonical(idx: &[usize]) -> Option<(Indices, bool)> {
    let mut v: Indices = idx.iter().map(|&i| i as u8).collect();
    let mut negative = false;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, negative))
}

/// Sign and merged indices of `dx_I ∧ dx_J`.
fn merge(a: &Indices, b: &Indices) -> Option<(Indices, bool)> {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    let mut out: Indices = a.iter().chain(b.iter()).copied().collect();
    out.sort_unstable();
    Some((out, inversions % 2 == 1))
}

#[derive(Clone, PartialEq, Debug)]
pub struct FormJet<S> {
    nvars: usize,
    order: u32,
    degree: usize,
    terms: BTreeMap<Indices, Jet<S>>,
}

impl<S: Scalar> FormJet<S> {
    pub fn zero(nvars: usize, order: u32, degree: usize) -> Self {
        FormJet {
            nvars,
            order,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A 0-form.
    pub fn function(f: Jet<S>) -> Self {
        let mut w = Self::zero(f.nvars(), f.order(), 0);
        w.add_term(&[], f);
        w
    }

    /// `dx_i`.
    pub fn dx(nvars: usize, order: u32, i: usize) -> Self {
        let mut w = Self::zero(nvars, order, 1);
        w.add_term(&[i], Jet::one(nvars, order));
        w
    }

    /// Builds a form from `(indices, coefficient)` pairs; indices may be in
    /// any order (the permutation sign is applied) and repeated indices give
    /// zero.
    pub fn from_terms(
        nvars: usize,
        order: u32,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Jet<S>)>,
    ) -> Result<Self> {
        let mut w = Self::zero(nvars, order, degree);
        for (idx, f) in terms {
            if idx.len() != degree {
                return Err(Error::Dimension {
                    op: "form",
                    expected: degree,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= nvars) {
                return Err(Error::Dimension {
                    op: "form",
                    expected: nvars,
                    found: bad + 1,
                });
            }
            if f.nvars() != nvars {
                return Err(Error::Dimension {
                    op: "form",
                    expected: nvars,
                    found: f.nvars(),
                });
            }
            w.add_term(&idx, f.with_order(order));
        }
        Ok(w)
    }

    /// Adds `f dx_idx` (any index order).
    pub fn add_term(&mut self, idx: &[usize], f: Jet<S>) {
        if idx.len() > self.nvars {
            return;
        }
        let Some((key, negative)) = canonical(idx) else { return };
        let f = if negative { -f } else { f };
        self.add_canonical(key, f);
    }

    fn add_canonical(&mut self, key: Indices, f: Jet<S>) {
        if f.is_zero() {
            return;
        }
        match self.terms.remove(&key) {
            Some(old) => {
                let s = &old + &f;
                if !s.is_zero() {
                    self.terms.insert(key, s);
                }
            }
            None => {
                self.terms.insert(key, f);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Indices, &Jet<S>)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Jet<S> {
        match canonical(idx) {
            Some((key, negative)) => {
                let c = self
                    .terms
                    .get(&key)
                    .cloned()
                    .unwrap_or_else(|| Jet::zero(self.nvars, self.order));
                if negative {
                    -c
                } else {
                    c
                }
            }
            None => Jet::zero(self.nvars, self.order),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_negligible(&self) -> bool {
        self.terms.values().all(Jet::is_negligible)
    }

    pub fn max_abs_coeff(&self) -> S {
        let maxes: Vec<S> = self.terms.values().map(Jet::max_abs_coeff).collect();
        crate::scalar::max_abs(maxes.iter())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Jet<S>) -> Jet<S>) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.degree);
        for (k, c) in &self.terms {
            out.add_canonical(k.clone(), f(c));
        }
        if let Some(first) = out.terms.values().next() {
            out.order = first.order();
        }
        out
    }

    pub fn with_order(&self, order: u32) -> Self {
        let mut out = self.map_coeffs(|c| c.with_order(order));
        out.order = order;
        out
    }

    /// Part whose coefficients are homogeneous of degree `k`.
    pub fn homogeneous(&self, k: u32) -> Self {
        self.map_coeffs(|c| c.homogeneous(k))
    }

    pub fn constant_part(&self) -> Self {
        self.homogeneous(0)
    }

    fn check_same(&self, other: &Self, op: &'static str) {
        assert_eq!(
            (self.nvars, self.order, self.degree),
            (other.nvars, other.order, other.degree),
            "{op}: incompatible forms"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other, "form_add");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_canonical(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other, "form_sub");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_canonical(k.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map_coeffs(|j| j.scale(c))
    }

    pub fn mul_function(&self, f: &Jet<S>) -> Self {
        self.map_coeffs(|j| j * f)
    }

    /// Exterior derivative.
    pub fn exterior_d(&self) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.degree + 1);
        if self.degree >= self.nvars {
            return out;
        }
        for (idx, f) in &self.terms {
            for j in 0..self.nvars {
                if idx.contains(&(j as u8)) {
                    continue;
                }
                let d = f.derivative(j);
                if d.is_zero() {
                    continue;
                }
                let before = idx.iter().filter(|&&i| (i as usize) < j).count();
                let mut key = idx.clone();
                key.insert(before, j as u8);
                out.add_canonical(key, if before % 2 == 1 { -d } else { d });
            }
        }
        out
    }

    /// Exterior derivative along the variables in `vars` only.
    pub fn partial_d(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.degree + 1);
        for (idx, f) in &self.terms {
            for &j in vars {
                if idx.contains(&(j as u8)) {
                    continue;
                }
                let d = f.derivative(j);
                if d.is_zero() {
                    continue;
                }
                let before = idx.iter().filter(|&&i| (i as usize) < j).count();
                let mut key = idx.clone();
                key.insert(before, j as u8);
                out.add_canonical(key, if before % 2 == 1 { -d } else { d });
            }
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "wedge: nvars");
        assert_eq!(self.order, other.order, "wedge: order");
        let mut out = Self::zero(self.nvars, self.order, self.degree + other.degree);
        if self.degree + other.degree > self.nvars {
            return out;
        }
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                if let Some((key, negative)) = merge(a, b) {
                    let p = fa * fb;
                    out.add_canonical(key, if negative { -p } else { p });
                }
            }
        }
        out
    }

    /// Interior product `i_v η`.
    pub fn interior(&self, v: &VectorFieldJet<S>) -> Self {
        assert_eq!(v.nvars(), self.nvars, "interior: nvars");
        let mut out = Self::zero(self.nvars, self.order, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        let v = v.with_order(self.order);
        for (idx, f) in &self.terms {
            for p in 0..idx.len() {
                let vi = v.comp(idx[p] as usize);
                if vi.is_zero() {
                    continue;
                }
                let mut key = idx.clone();
                key.remove(p);
                let t = vi * f;
                out.add_canonical(key, if p % 2 == 1 { -t } else { t });
            }
        }
        out
    }

    /// `L_v η = i_v dη + d i_v η`.
    pub fn lie_derivative(&self, v: &VectorFieldJet<S>) -> Self {
        let a = self.exterior_d().interior(v);
        let b = self.interior(v).exterior_d();
        a.add(&b)
    }

    /// `m^* η`, with coefficients truncated at `self.order()`.
    pub fn pullback(&self, m: &PolyMap<S>) -> Result<Self> {
        if m.target_dim() != self.nvars {
            return Err(Error::Dimension {
                op: "pullback",
                expected: self.nvars,
                found: m.target_dim(),
            });
        }
        let src = m.source_dim();
        let order = self.order;
        let comps: Vec<Jet<S>> = m.comps().iter().map(|c| c.with_order(order + 1)).collect();
        // dm^i as 1-forms
        let dm: Vec<FormJet<S>> = comps
            .iter()
            .map(|c| {
                let mut w = FormJet::zero(src, order, 1);
                for j in 0..src {
                    w.add_term(&[j], c.derivative(j).with_order(order));
                }
                w
            })
            .collect();
        let args: Vec<Jet<S>> = comps.iter().map(|c| c.with_order(order)).collect();
        check_vanishing(&args, "pullback")?;
        let mut sub = Substitution::new(&args, src, order);
        let mut out = FormJet::zero(src, order, self.degree);
        for (idx, f) in &self.terms {
            let pulled = sub.apply(f);
            if pulled.is_zero() {
                continue;
            }
            let mut w = FormJet::function(pulled);
            for &i in idx.iter() {
                w = w.wedge(&dm[i as usize]);
                if w.is_zero() {
                    break;
                }
            }
            out = out.add(&w);
        }
        Ok(out)
    }

    /// Radial primitive in the variables `vars`: for a form built only from
    /// `dx_i` with `i ∈ vars`, returns `H η` with `d_vars H η = η` whenever
    /// `d_vars η = 0`. Coefficients may depend on the other variables, which
    /// act as parameters. The result has order `self.order() + 1`.
    pub fn partial_primitive(&self, vars: &[usize]) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Invalid {
                op: "poincare_primitive",
                reason: String::from("form degree must be at least 1"),
            });
        }
        if self
            .terms
            .keys()
            .any(|idx| idx.iter().any(|&i| !vars.contains(&(i as usize))))
        {
            return Err(Error::Invalid {
                op: "poincare_primitive",
                reason: String::from("form involves differentials outside the chosen variables"),
            });
        }
        let residual = self.partial_d(vars);
        if !residual.is_negligible() {
            return Err(Error::NotClosed {
                op: "poincare_primitive",
                residual: format!("{}", residual.max_abs_coeff()),
            });
        }
        Ok(self.radial_operator(vars))
    }

    /// Radial homotopy operator without the closedness check.
    pub fn radial_operator(&self, vars: &[usize]) -> Self {
        let order = self.order + 1;
        let k = self.degree as i64;
        let mut out = FormJet::zero(self.nvars, order, self.degree - 1);
        for (idx, f) in &self.terms {
            for (m, c) in f.terms() {
                let d: i64 = vars.iter().map(|&v| m.exponent(v) as i64).sum();
                let weight = c.clone() / S::from_i64(d + k);
                for p in 0..idx.len() {
                    let var = idx[p] as usize;
                    let mut nm = m.clone();
                    let mut e: Vec<u8> = nm.exponents().to_vec();
                    e[var] += 1;
                    nm = Monomial::from_exponents(&e);
                    let mut key = idx.clone();
                    key.remove(p);
                    let coeff = if p % 2 == 1 { -weight.clone() } else { weight.clone() };
                    out.add_canonical(key, Jet::monomial(self.nvars, order, nm, coeff));
                }
            }
        }
        out
    }

    /// Antisymmetric coefficient matrix of a 2-form:
    /// `η = Σ_{i<j} W_ij dx_i ∧ dx_j`, `W_ji = -W_ij`.
    pub fn to_matrix(&self) -> Vec<Vec<Jet<S>>> {
        assert_eq!(self.degree, 2, "to_matrix needs a 2-form");
        let n = self.nvars;
        let mut w = vec![vec![Jet::zero(n, self.order); n]; n];
        for (idx, f) in &self.terms {
            let (i, j) = (idx[0] as usize, idx[1] as usize);
            w[i][j] = f.clone();
            w[j][i] = -f;
        }
        w
    }

    pub fn from_matrix(w: &[Vec<Jet<S>>], order: u32) -> Self {
        let n = w.len();
        let mut out = Self::zero(n, order, 2);
        for i in 0..n {
            for j in i + 1..n {
                out.add_term(&[i, j], w[i][j].with_order(order));
            }
        }
        out
    }

    /// Constant coefficient matrix of a 2-form at the origin.
    pub fn constant_matrix(&self) -> Matrix<S> {
        let n = self.nvars;
        let mut m = Matrix::zeros(n, n);
        for (idx, f) in &self.terms {
            let (i, j) = (idx[0] as usize, idx[1] as usize);
            let c = f.constant_term();
            m[(i, j)] = c.clone();
            m[(j, i)] = -c;
        }
        m
    }

    /// The constant 2-form with matrix `w`.
    pub fn constant_from_matrix(w: &Matrix<S>, order: u32) -> Self {
        let n = w.rows();
        let mut out = Self::zero(n, order, 2);
        for i in 0..n {
            for j in i + 1..n {
                out.add_term(&[i, j], Jet::constant(n, order, w[(i, j)].clone()));
            }
        }
        out
    }

    /// Coordinates of the degree-`d` homogeneous part in the basis
    /// `(index tuple, monomial)` with all k-subsets in lexicographic order.
    pub fn coordinates(&self, monomials: &[Monomial]) -> Vec<S> {
        let mut out = Vec::new();
        for idx in index_tuples(self.nvars, self.degree) {
            let key: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            let c = self.coeff(&key);
            for m in monomials {
                out.push(c.coeff(m));
            }
        }
        out
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> FormDisplay<'a, S> {
        FormDisplay { form: self, names }
    }
}

/// All strictly increasing k-tuples of `0..n`, lexicographically.
pub fn index_tuples(n: usize, k: usize) -> Vec<Indices> {
    let mut out = Vec::new();
    let mut cur: Indices = SmallVec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Indices, out: &mut Vec<Indices>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as u8);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// `d η`.
pub fn exterior_d<S: Scalar>(eta: &FormJet<S>) -> FormJet<S> {
    eta.exterior_d()
}

pub fn wedge<S: Scalar>(eta: &FormJet<S>, zeta: &FormJet<S>) -> FormJet<S> {
    eta.wedge(zeta)
}

pub fn interior<S: Scalar>(v: &VectorFieldJet<S>, eta: &FormJet<S>) -> FormJet<S> {
    eta.interior(v)
}

pub fn pullback<S: Scalar>(eta: &FormJet<S>, m: &PolyMap<S>) -> Result<FormJet<S>> {
    eta.pullback(m)
}

/// Radial homotopy primitive over all variables; fails on non-closed input.
pub fn poincare_primitive<S: Scalar>(eta: &FormJet<S>) -> Result<FormJet<S>> {
    let vars: Vec<usize> = (0..eta.nvars()).collect();
    eta.partial_primitive(&vars)
}

pub struct FormDisplay<'a, S> {
    form: &'a FormJet<S>,
    names: &'a [String],
}

impl<S: Scalar> fmt::Display for FormDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.form.is_zero() {
            return f.write_str("0");
        }
        for (k, (idx, c)) in self.form.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})", c.display_with(self.names))?;
            for (p, &i) in idx.iter().enumerate() {
                f.write_str(if p == 0 { " " } else { "^" })?;
                write!(f, "d{}", self.names[i as usize])?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Display for FormJet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = crate::jet::default_names(self.nvars);
        write!(f, "{}", self.display_with(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type F = FormJet<Rational>;

    fn j(s: &str, n: usize, order: u32) -> Jet<Rational> {
        Jet::parse(s, n, order).unwrap()
    }

    fn two_form(n: usize, order: u32, entries: &[(usize, usize, &str)]) -> F {
        F::from_terms(
            n,
            order,
            2,
            entries.iter().map(|&(a, b, s)| (vec![a, b], j(s, n, order))),
        )
        .unwrap()
    }

    #[test]
    fn d_of_x_dy() {
        let w = F::from_terms(2, 3, 1, [(vec![1], j("x1", 2, 3))]).unwrap();
        assert_eq!(w.exterior_d(), two_form(2, 3, &[(0, 1, "1")]));
    }

    #[test]
    fn interior_of_coordinate_field() {
        let w = two_form(2, 3, &[(0, 1, "1")]);
        let dx = VectorFieldJet::coordinate(2, 3, 0);
        assert_eq!(w.interior(&dx), F::dx(2, 3, 1));
    }

    #[test]
    fn pullback_by_cubic_shear() {
        let w = two_form(2, 4, &[(0, 1, "1")]);
        let m = PolyMap::new(vec![j("x1 + 1/3*x1^3", 2, 5), j("x2", 2, 5)]).unwrap();
        assert_eq!(w.pullback(&m).unwrap(), two_form(2, 4, &[(0, 1, "1 + x1^2")]));
    }

    #[test]
    fn primitive_examples() {
        let w = two_form(2, 3, &[(0, 1, "1")]);
        let expect = F::from_terms(
            2,
            4,
            1,
            [(vec![1], j("1/2*x1", 2, 4)), (vec![0], j("-1/2*x2", 2, 4))],
        )
        .unwrap();
        assert_eq!(poincare_primitive(&w).unwrap(), expect);
        assert!(poincare_primitive(&F::zero(2, 3, 2)).unwrap().is_zero());
        let w2 = two_form(2, 3, &[(0, 1, "2*x1")]);
        let h = poincare_primitive(&w2).unwrap();
        assert_eq!(h.exterior_d().with_order(3), w2);
    }

    #[test]
    fn primitive_rejects_non_closed() {
        let w = F::from_terms(2, 3, 1, [(vec![1], j("x1", 2, 3))]).unwrap();
        assert!(matches!(poincare_primitive(&w), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn sign_of_reordered_indices() {
        let w = two_form(3, 2, &[(2, 0, "1")]);
        assert_eq!(w.coeff(&[0, 2]), j("-1", 3, 2));
        assert!(F::from_terms(3, 2, 2, [(vec![1, 1], j("1", 3, 2))]).unwrap().is_zero());
    }

    #[test]
    fn degree_overflow_gives_zero() {
        let w = two_form(2, 2, &[(0, 1, "x1")]);
        assert!(w.exterior_d().is_zero());
        assert!(w.wedge(&F::dx(2, 2, 0)).is_zero());
    }
}
