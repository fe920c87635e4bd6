//! Small dense matrices with jet entries.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub type JetMatrix<S> = Vec<Vec<Jet<S>>>;

pub fn constant_part<S: Scalar>(m: &JetMatrix<S>) -> Matrix<S> {
    Matrix::from_rows(m.iter().map(|r| r.iter().map(Jet::constant_term).collect()).collect())
}

pub fn from_constant<S: Scalar>(m: &Matrix<S>, nvars: usize, order: u32) -> JetMatrix<S> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| Jet::constant(nvars, order, m[(i, j)].clone())).collect())
        .collect()
}

pub fn mul_vec<S: Scalar>(m: &JetMatrix<S>, v: &[Jet<S>]) -> Vec<Jet<S>> {
    m.iter()
        .map(|row| {
            let mut acc = Jet::zero(v[0].nvars(), v[0].order());
            for (a, b) in row.iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        })
        .collect()
}

pub fn mul<S: Scalar>(a: &JetMatrix<S>, b: &JetMatrix<S>) -> JetMatrix<S> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let proto = &b[0][0];
    let mut out = vec![vec![Jet::zero(proto.nvars(), proto.order()); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][l] * &b[l][j]);
                }
            }
        }
    }
    out
}

/// Inverse by the Neumann series around the constant part, which
/// terminates at the jet order.
pub fn inverse<S: Scalar>(m: &JetMatrix<S>) -> Result<JetMatrix<S>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (nv, order) = (m[0][0].nvars(), m[0][0].order());
    let c = constant_part(m);
    let cinv = c.inverse().ok_or(Error::NonInvertible { op: "jet_matrix_inverse" })?;
    let cinv_j = from_constant(&cinv, nv, order);
    // -C⁻¹ (M - C)
    let rest: JetMatrix<S> = m
        .iter()
        .map(|r| r.iter().map(|e| e.degree_range(1, order)).collect())
        .collect();
    let step: JetMatrix<S> = mul(&cinv_j, &rest)
        .into_iter()
        .map(|r| r.into_iter().map(|e| -e).collect())
        .collect();
    let mut term = cinv_j.clone();
    let mut acc = cinv_j;
    for _ in 0..=order {
        term = mul(&step, &term);
        if term.iter().all(|r| r.iter().all(Jet::is_zero)) {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = &acc[i][j] + &term[i][j];
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn inverse_of_one_plus_x() {
        let m = vec![vec![Jet::<Rational>::parse("1 + x1", 1, 3).unwrap()]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0][0], Jet::parse("1 - x1 + x1^2 - x1^3", 1, 3).unwrap());
    }
}
