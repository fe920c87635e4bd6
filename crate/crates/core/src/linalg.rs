//! Dense linear algebra over a [`Scalar`] field.
//!
//! Exact fields pivot on the first nonzero entry (so solutions are
//! reproducible in the monomial basis order); floats use partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Scalar;

/// Relative singular-value threshold for float ranks.
pub const RANK_REL_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| S::from_i64(v)).collect()).collect())
    }

    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_negligible())
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn max_abs(&self) -> S {
        crate::scalar::max_abs(self.data.iter())
    }

    /// Stacks `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Stacks `self` above `other`.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let pivot_row = if S::EXACT {
                // the reduced form does not depend on the pivot row, so take the
                // sparsest one to limit fill-in
                (r..m.rows)
                    .filter(|&i| !m[(i, c)].is_zero())
                    .min_by_key(|&i| m.row(i)[c..].iter().filter(|v| !v.is_zero()).count())
            } else {
                let best = (r..m.rows)
                    .max_by(|&a, &b| m[(a, c)].magnitude().total_cmp(&m[(b, c)].magnitude()));
                best.filter(|&i| !m[(i, c)].is_negligible())
            };
            let Some(p) = pivot_row else { continue };
            m.swap_rows(r, p);
            let inv = S::one() / m[(r, c)].clone();
            for j in c..m.cols {
                let v = m[(r, j)].clone();
                m[(r, j)] = v * inv.clone();
            }
            let pivot_entries: Vec<(usize, S)> = (c..m.cols)
                .filter(|&j| !m[(r, j)].is_zero())
                .map(|j| (j, m[(r, j)].clone()))
                .collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m[(i, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for (j, pv) in &pivot_entries {
                    let v = m[(i, *j)].clone() - f.clone() * pv.clone();
                    m[(i, *j)] = v;
                }
                if !S::EXACT {
                    m[(i, c)] = S::zero();
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Rank by elimination (tolerance-based for floats).
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Rank using singular values for floats and elimination for exact fields.
    pub fn rank_auto(&self, rel_tol: f64) -> usize {
        if S::EXACT {
            self.rank()
        } else {
            let f: Vec<f64> = self.data.iter().map(Scalar::to_f64).collect();
            svd_rank(self.rows, self.cols, &f, rel_tol).0
        }
    }

    /// Basis of the null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(k, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// A solution of `self * x = b` with free variables set to zero, or
    /// `None` when the system is inconsistent.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hcat(&Matrix::from_columns(&[b.to_vec()]));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (k, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(k, self.cols)].clone();
        }
        Some(x)
    }

    /// The solution of `self * x = b` of least Euclidean norm.
    pub fn solve_min_norm(&self, b: &[S]) -> Option<Vec<S>> {
        let x = self.solve(b)?;
        let null = self.nullspace();
        if null.is_empty() {
            return Some(x);
        }
        // remove the component of x along the null space
        let n = Matrix::from_columns(&null);
        let nt = n.transpose();
        let gram = nt.mul(&n);
        let rhs = nt.mul_vec(&x);
        let coef = gram.solve(&rhs)?;
        let shift = n.mul_vec(&coef);
        Some(x.into_iter().zip(shift).map(|(a, b)| a - b).collect())
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hcat(&Self::identity(n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = S::one();
        for c in 0..n {
            let p = if S::EXACT {
                (c..n).find(|&i| !m[(i, c)].is_zero())
            } else {
                (c..n)
                    .max_by(|&a, &b| m[(a, c)].magnitude().total_cmp(&m[(b, c)].magnitude()))
                    .filter(|&i| !m[(i, c)].is_negligible())
            };
            let Some(p) = p else { return S::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let pv = m[(c, c)].clone();
            det = det * pv.clone();
            for i in c + 1..n {
                let f = m[(i, c)].clone() / pv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m[(i, j)].clone() - f.clone() * m[(c, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        det
    }
}

impl<S> core::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> core::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Numeric rank of a row-major `rows x cols` matrix together with its
/// singular values (descending). Values below `rel_tol * max` count as zero.
pub fn svd_rank(rows: usize, cols: usize, data: &[f64], rel_tol: f64) -> (usize, Vec<f64>) {
    if rows == 0 || cols == 0 {
        return (0, Vec::new());
    }
    let m = nalgebra::DMatrix::from_row_slice(rows, cols, data);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return (0, sv);
    }
    let rank = sv.iter().filter(|&&s| s > rel_tol * largest).count();
    (rank, sv)
}

/// `v^T B w`.
pub fn bilinear<S: Scalar>(b: &Matrix<S>, v: &[S], w: &[S]) -> S {
    let bw = b.mul_vec(w);
    v.iter().zip(&bw).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Symplectic Gram–Schmidt for an antisymmetric form `b`.
///
/// Walks `candidates` in order and returns pairs `(e_i, f_i)` with
/// `b(e_i, f_j) = δ_ij` and `b(e_i, e_j) = b(f_i, f_j) = 0`, spanning a
/// subspace of `span(candidates)` on which `b` is nondegenerate. Candidates
/// that become isotropic leftovers are returned separately (after being
/// made orthogonal to all pairs).
pub fn symplectic_basis<S: Scalar>(
    b: &Matrix<S>,
    candidates: Vec<Vec<S>>,
) -> (Vec<(Vec<S>, Vec<S>)>, Vec<Vec<S>>) {
    let mut pool = candidates;
    let mut pairs = Vec::new();
    let mut leftover = Vec::new();
    while !pool.is_empty() {
        let e = pool.remove(0);
        if e.iter().all(|x| x.is_negligible()) {
            continue;
        }
        let partner = pool.iter().position(|c| !bilinear(b, &e, c).is_negligible());
        let Some(k) = partner else {
            leftover.push(e);
            continue;
        };
        let f_raw = pool.remove(k);
        let s = bilinear(b, &e, &f_raw);
        let f: Vec<S> = f_raw.into_iter().map(|x| x / s.clone()).collect();
        let reduce = |c: Vec<S>| -> Vec<S> {
            let a = bilinear(b, &c, &f);
            let bb = bilinear(b, &c, &e);
            // c' = c - b(c,f) e + b(c,e) f
            c.iter()
                .zip(e.iter().zip(&f))
                .map(|(ci, (ei, fi))| ci.clone() - a.clone() * ei.clone() + bb.clone() * fi.clone())
                .collect()
        };
        pool = pool.into_iter().map(reduce).collect();
        leftover = leftover.into_iter().map(reduce).collect();
        pairs.push((e, f));
    }
    (pairs, leftover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type M = Matrix<Rational>;
    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn inverse_and_determinant() {
        let a = M::from_int_rows(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), M::identity(2));
        assert_eq!(a.determinant(), q(1, 1));
        let s = M::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.determinant(), q(0, 1));
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn min_norm_solution_is_orthogonal_to_kernel() {
        let a = M::from_int_rows(&[&[1, 1, 0]]);
        let x = a.solve_min_norm(&[q(2, 1)]).unwrap();
        assert_eq!(x, vec![q(1, 1), q(1, 1), q(0, 1)]);
        assert!(M::from_int_rows(&[&[0, 0]]).solve(&[q(1, 1)]).is_none());
    }

    #[test]
    fn symplectic_basis_of_degenerate_form() {
        // b = e1^e2 on R^3
        let b = M::from_int_rows(&[&[0, 2, 0], &[-2, 0, 0], &[0, 0, 0]]);
        let cands: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { q(1, 1) } else { q(0, 1) }).collect())
            .collect();
        let (pairs, rest) = symplectic_basis(&b, cands);
        assert_eq!(pairs.len(), 1);
        assert_eq!(bilinear(&b, &pairs[0].0, &pairs[0].1), q(1, 1));
        assert_eq!(rest.len(), 1);
    }

    #[test]
    fn float_svd_rank() {
        let (r, sv) = svd_rank(2, 2, &[1.0, 0.0, 0.0, 1e-12], RANK_REL_TOL);
        assert_eq!(r, 1);
        assert_eq!(sv.len(), 2);
    }
}
