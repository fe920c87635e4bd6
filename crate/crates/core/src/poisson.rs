//! Poisson bivectors: Schouten bracket, duality with b-forms, and the formal
//! Weinstein splitting.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bform::BForm;
use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::form::FormJet;
use crate::jet::Jet;
use crate::jetmat;
use crate::lie::LinearPart;
use crate::linalg::{symplectic_basis, Matrix};
use crate::polymap::PolyMap;
use crate::scalar::Scalar;
use crate::symplectic::{commutation_residual, standard_matrix};

/// `Π = Σ_{i<j} Π^{ij} ∂_i ∧ ∂_j`, stored as a full antisymmetric matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct BivectorJet<S> {
    entries: Vec<Vec<Jet<S>>>,
    order: u32,
}

/// Trivector with components `T^{ijk}` for `i < j < k`.
#[derive(Clone, PartialEq, Debug)]
pub struct TrivectorJet<S> {
    nvars: usize,
    order: u32,
    comps: BTreeMap<(usize, usize, usize), Jet<S>>,
}

impl<S: Scalar> TrivectorJet<S> {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn comp(&self, i: usize, j: usize, k: usize) -> Jet<S> {
        self.comps
            .get(&(i, j, k))
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.nvars, self.order))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Jet<S>)> + '_ {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn max_abs_coeff(&self) -> S {
        self.comps.values().fold(S::zero(), |acc, f| {
            let m = f.max_abs_coeff();
            if m > acc {
                m
            } else {
                acc
            }
        })
    }
}

impl<S: Scalar> BivectorJet<S> {
    pub fn zero(nvars: usize, order: u32) -> Self {
        BivectorJet {
            entries: vec![vec![Jet::zero(nvars, order); nvars]; nvars],
            order,
        }
    }

    /// From `(i, j, Π^{ij})` triples; a later triple for the same pair adds.
    pub fn from_terms(nvars: usize, order: u32, terms: impl IntoIterator<Item = (usize, usize, Jet<S>)>) -> Result<Self> {
        let mut out = Self::zero(nvars, order);
        for (i, j, f) in terms {
            if i >= nvars || j >= nvars || f.nvars() != nvars {
                return Err(Error::Dimension {
                    op: "bivector",
                    expected: nvars,
                    found: i.max(j).max(f.nvars()),
                });
            }
            if i == j {
                if f.is_zero() {
                    continue;
                }
                return Err(Error::Invalid {
                    op: "bivector",
                    reason: format!("diagonal entry ({i}, {i})"),
                });
            }
            let f = f.with_order(order);
            out.entries[i][j] = &out.entries[i][j] + &f;
            out.entries[j][i] = &out.entries[j][i] - &f;
        }
        Ok(out)
    }

    /// Checks antisymmetry of a full matrix of jets.
    pub fn from_matrix(entries: Vec<Vec<Jet<S>>>) -> Result<Self> {
        let n = entries.len();
        let order = entries.first().and_then(|r| r.first()).map_or(0, Jet::order);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    op: "bivector",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, f) in row.iter().enumerate() {
                if f.nvars() != n || f.order() != order {
                    return Err(Error::Dimension {
                        op: "bivector",
                        expected: n,
                        found: f.nvars(),
                    });
                }
                if !(f + &entries[j][i]).is_zero() {
                    return Err(Error::Invalid {
                        op: "bivector",
                        reason: format!("entries ({i}, {j}) and ({j}, {i}) are not opposite"),
                    });
                }
            }
        }
        Ok(BivectorJet { entries, order })
    }

    /// `Σ ∂_{x_i} ∧ ∂_{y_i}` on the first `2k` variables.
    pub fn standard(nvars: usize, k: usize, order: u32) -> Self {
        Self::constant(&standard_matrix(2 * k).direct_sum_zero(nvars), order)
    }

    pub fn constant(p: &Matrix<S>, order: u32) -> Self {
        let n = p.rows();
        let mut out = Self::zero(n, order);
        for i in 0..n {
            for j in 0..n {
                out.entries[i][j] = Jet::constant(n, order, p[(i, j)].clone());
            }
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.entries.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> &Jet<S> {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Jet<S>>] {
        &self.entries
    }

    /// Nonzero entries above the diagonal.
    pub fn upper_terms(&self) -> impl Iterator<Item = (usize, usize, &Jet<S>)> + '_ {
        let n = self.nvars();
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, &self.entries[i][j]))
            .filter(|(_, _, f)| !f.is_zero())
    }

    pub fn with_order(&self, order: u32) -> Self {
        BivectorJet {
            entries: self.entries.iter().map(|r| r.iter().map(|f| f.with_order(order)).collect()).collect(),
            order,
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Jet<S>, &Jet<S>) -> Jet<S>) -> Self {
        assert_eq!(self.nvars(), other.nvars(), "bivectors in different dimensions");
        let order = self.order.min(other.order);
        let (a, b) = (self.with_order(order), other.with_order(order));
        BivectorJet {
            entries: a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| f(x, y)).collect())
                .collect(),
            order,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Jet::is_zero)
    }

    pub fn is_negligible(&self) -> bool {
        self.entries.iter().flatten().all(Jet::is_negligible)
    }

    pub fn max_abs_coeff(&self) -> S {
        self.entries.iter().flatten().fold(S::zero(), |acc, f| {
            let m = f.max_abs_coeff();
            if m > acc {
                m
            } else {
                acc
            }
        })
    }

    pub fn constant_matrix(&self) -> Matrix<S> {
        let n = self.nvars();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entries[i][j].constant_term();
            }
        }
        m
    }

    /// `{f, g} = Σ Π^{ij} ∂_i f ∂_j g`, at the order of `Π`. Derivatives of
    /// jets of order `N` are only exact through degree `N - 1`, so pass
    /// `f, g` at order `N + 1` when the top degree matters.
    pub fn bracket(&self, f: &Jet<S>, g: &Jet<S>) -> Jet<S> {
        let n = self.nvars();
        let df: Vec<Jet<S>> = (0..n).map(|i| f.derivative(i).with_order(self.order)).collect();
        let dg: Vec<Jet<S>> = (0..n).map(|j| g.derivative(j).with_order(self.order)).collect();
        let mut acc = Jet::zero(n, self.order);
        for i in 0..n {
            if df[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if i == j || dg[j].is_zero() || self.entries[i][j].is_zero() {
                    continue;
                }
                acc = &acc + &(&(&self.entries[i][j] * &df[i]) * &dg[j]);
            }
        }
        acc
    }

    /// `X_f = {f, ·}`, i.e. `X_f^j = Σ_i ∂_i f Π^{ij}`.
    pub fn hamiltonian(&self, f: &Jet<S>) -> VectorFieldJet<S> {
        let n = self.nvars();
        let comps = (0..n)
            .map(|j| {
                (0..n).fold(Jet::zero(n, self.order), |acc, i| {
                    &acc + &(&f.derivative(i).with_order(self.order) * &self.entries[i][j])
                })
            })
            .collect();
        VectorFieldJet::new(comps).expect("matching shapes")
    }

    /// `[Π, Π]^{ijk} = 2 Σ_l (Π^{li} ∂_l Π^{jk} + Π^{lj} ∂_l Π^{ki} + Π^{lk} ∂_l Π^{ij})`.
    ///
    /// The top degree would need the next order of `Π`, so the result has
    /// order `Π.order() - 1`.
    pub fn schouten_square(&self) -> TrivectorJet<S> {
        let n = self.nvars();
        let order = self.order.saturating_sub(1);
        let p = self.with_order(order);
        let dp: Vec<Vec<Vec<Jet<S>>>> = (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| (0..n).map(|j| self.entries[i][j].derivative(l).with_order(order)).collect())
                    .collect()
            })
            .collect();
        let two = S::from_i64(2);
        let mut comps = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut acc = Jet::zero(n, order);
                    for l in 0..n {
                        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            let (pla, dbc) = (&p.entries[l][a], &dp[l][b][c]);
                            if !pla.is_zero() && !dbc.is_zero() {
                                acc = &acc + &(pla * dbc);
                            }
                        }
                    }
                    let acc = acc.scale(&two);
                    if !acc.is_zero() {
                        comps.insert((i, j, k), acc);
                    }
                }
            }
        }
        TrivectorJet { nvars: n, order, comps }
    }

    /// Largest coefficient of `[Π, Π]`.
    pub fn check_poisson(&self) -> S {
        self.schouten_square().max_abs_coeff()
    }

    /// `(L_v Π)^{ij} = v(Π^{ij}) - Π^{lj} ∂_l v^i - Π^{il} ∂_l v^j`.
    pub fn lie_derivative(&self, v: &VectorFieldJet<S>) -> Self {
        let n = self.nvars();
        let order = self.order.min(v.order());
        let p = self.with_order(order);
        let v = v.with_order(order);
        let mut out = Self::zero(n, order);
        for i in 0..n {
            for j in i + 1..n {
                let mut acc = v.apply(&p.entries[i][j]);
                for l in 0..n {
                    acc = &acc - &(&p.entries[l][j] * &v.comp(i).derivative(l));
                    acc = &acc - &(&p.entries[i][l] * &v.comp(j).derivative(l));
                }
                out.entries[j][i] = -&acc;
                out.entries[i][j] = acc;
            }
        }
        out
    }

    /// `m_* Π = {m^a, m^b} ∘ m⁻¹`. The result has order
    /// `min(Π.order(), m.order() - 1)`.
    pub fn pushforward(&self, m: &PolyMap<S>) -> Result<Self> {
        let n = self.nvars();
        if m.source_dim() != n || m.target_dim() != n {
            return Err(Error::Dimension {
                op: "bivector pushforward",
                expected: n,
                found: m.target_dim(),
            });
        }
        let order = self.order.min(m.order().saturating_sub(1));
        let p = self.with_order(order);
        let inv = m.with_order(order).inverse()?;
        let mut out = Self::zero(n, order);
        for a in 0..n {
            for b in a + 1..n {
                let f = p.bracket(m.comp(a), m.comp(b)).compose(inv.comps())?;
                out.entries[b][a] = -&f;
                out.entries[a][b] = f;
            }
        }
        Ok(out)
    }

    /// The b-symplectic form dual to a b-Poisson bivector whose `z` row is
    /// divisible by `z`.
    ///
    /// In the frame `(∂_i, z ∂_z)` the entries `Π^{zj}` become `Π^{zj}/z`,
    /// and the frame matrix of the dual form is `-P⁻¹`. The result has order
    /// `Π.order() - 1`, the division by `z` costing one degree.
    pub fn to_b_form(&self, z: usize) -> Result<BForm<S>> {
        let n = self.nvars();
        let order = self.order.saturating_sub(1);
        let mut frame = self.entries.clone();
        for j in 0..n {
            if j == z {
                continue;
            }
            let f = self.entries[z][j].div_var(z).ok_or(Error::Invalid {
                op: "to_b_form",
                reason: format!("entry ({z}, {j}) is not divisible by z"),
            })?;
            frame[z][j] = f.clone();
            frame[j][z] = -&f;
        }
        let frame: Vec<Vec<Jet<S>>> = frame
            .iter()
            .map(|r| r.iter().map(|f| f.with_order(order)).collect())
            .collect();
        let inv = jetmat::inverse(&frame).map_err(|_| Error::NonInvertible { op: "to_b_form" })?;
        let w: Vec<Vec<Jet<S>>> = inv.iter().map(|r| r.iter().map(|f| -f).collect()).collect();
        Ok(BForm::from_frame(FormJet::from_matrix(&w, order), z))
    }
}

impl<S: Scalar> Matrix<S> {
    /// `self ⊕ 0` padded to `n × n`.
    fn direct_sum_zero(&self, n: usize) -> Self {
        let mut out = Matrix::zeros(n, n);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        out
    }
}

pub fn poisson_bracket<S: Scalar>(pi: &BivectorJet<S>, f: &Jet<S>, g: &Jet<S>) -> Jet<S> {
    pi.bracket(f, g)
}

pub fn schouten_square<S: Scalar>(pi: &BivectorJet<S>) -> TrivectorJet<S> {
    pi.schouten_square()
}

pub fn check_poisson<S: Scalar>(pi: &BivectorJet<S>) -> S {
    pi.check_poisson()
}

/// Output of [`weinstein_split`].
#[derive(Clone, PartialEq, Debug)]
pub struct SplitResult<S> {
    /// New coordinates as functions of the old ones.
    pub map: PolyMap<S>,
    /// Linear normalization applied first.
    pub linear: Matrix<S>,
    /// Rank `2k` of `Π(0)`; the first `2k` new coordinates are `x_i, y_i`.
    pub rank: usize,
    /// `f_ij` for `i < j`, as jets in the `n - 2k` transverse coordinates.
    pub transverse: Vec<(usize, usize, Jet<S>)>,
    /// `m_* Π` in the new coordinates.
    pub pushed: BivectorJet<S>,
}

/// Largest deviation of `Π` from split form with a symplectic block on the
/// first `rank` variables: the block must be the constant standard matrix,
/// cross terms must vanish, and the transverse entries must vanish at the
/// origin and depend only on the transverse variables.
pub fn split_defect<S: Scalar>(pi: &BivectorJet<S>, rank: usize) -> S {
    let n = pi.nvars();
    let j = standard_matrix::<S>(rank);
    let mut worst = S::zero();
    let mut see = |v: S| {
        if v > worst {
            worst = v;
        }
    };
    for a in 0..n {
        for b in a + 1..n {
            let f = pi.entry(a, b);
            if b < rank {
                see((f - &Jet::constant(n, pi.order(), j[(a, b)].clone())).max_abs_coeff());
            } else if a < rank {
                see(f.max_abs_coeff());
            } else {
                see(f.constant_term().abs());
                for (m, c) in f.terms() {
                    if (0..rank).any(|u| m.exponent(u) > 0) {
                        see(c.abs());
                    }
                }
            }
        }
    }
    worst
}

/// Rows `A` with `A Π(0) Aᵀ = J ⊕ 0`.
fn linear_split_frame<S: Scalar>(p0: &Matrix<S>) -> Result<(Matrix<S>, usize)> {
    let n = p0.rows();
    let basis: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    let (pairs, leftover) = symplectic_basis(p0, basis);
    let rank = 2 * pairs.len();
    let rows: Vec<Vec<S>> = pairs.into_iter().flat_map(|(e, f)| [e, f]).chain(leftover).collect();
    let a = Matrix::from_rows(rows);
    if a.rows() != n || a.rank() != n || a.mul(p0).mul(&a.transpose()) != standard_matrix(rank).direct_sum_zero(n) {
        return Err(Error::SplitFailure { degree: 0 });
    }
    Ok((a, rank))
}

fn check_is_poisson<S: Scalar>(pi: &BivectorJet<S>, op: &'static str) -> Result<()> {
    let r = pi.check_poisson();
    if !r.is_negligible() {
        return Err(Error::NotPoisson {
            op,
            residual: format!("{r}"),
        });
    }
    Ok(())
}

/// Coordinates `U_a` (`a < rank`) and `W_j` with `{U_a, U_b} = J_ab` and
/// `{U_a, W_j} = 0` through degree `order`, for `Π(0) = J ⊕ 0`.
///
/// At each degree the defect of `{U_a, U_b}` is a 2-form `E` in the block
/// variables (the rest act as parameters); a correction `J v` to `U`
/// changes it by `J (dv) Jᵀ`, so `v` is the radial primitive of
/// `-J⁻¹ E J⁻ᵀ`. The defect `e_j` of `{U_a, W_j}` changes by `J dψ_j`.
fn split_coordinates<S: Scalar>(pi: &BivectorJet<S>, rank: usize, order: u32) -> Result<Vec<Jet<S>>> {
    let n = pi.nvars();
    let top = order + 1;
    if rank == 0 {
        return Ok((0..n).map(|i| Jet::var(n, top, i)).collect());
    }
    let block: Vec<usize> = (0..rank).collect();
    let j = standard_matrix::<S>(rank);
    let jinv = j.inverse().expect("standard matrix");
    let jinv_t = jinv.transpose();
    let mut coords: Vec<Jet<S>> = (0..n).map(|i| Jet::var(n, top, i)).collect();
    let constant = |a: usize, b: usize| Jet::constant(n, order, j[(a, b)].clone());
    let defect_u = |coords: &[Jet<S>], d: u32| -> Vec<Vec<Jet<S>>> {
        let mut e = vec![vec![Jet::zero(n, order); n]; n];
        for a in 0..rank {
            for b in a + 1..rank {
                let f = (&pi.bracket(&coords[a], &coords[b]) - &constant(a, b)).homogeneous(d);
                e[b][a] = -&f;
                e[a][b] = f;
            }
        }
        e
    };
    let defect_w = |coords: &[Jet<S>], d: u32| -> Vec<Vec<Jet<S>>> {
        (rank..n)
            .map(|w| (0..rank).map(|a| pi.bracket(&coords[a], &coords[w]).homogeneous(d)).collect())
            .collect()
    };
    let is_zero = |m: &[Vec<Jet<S>>]| m.iter().flatten().all(Jet::is_negligible);

    for d in 2..=top {
        let e = defect_u(&coords, d - 1);
        if is_zero(&e) {
            continue;
        }
        // D = -J⁻¹ E J⁻ᵀ on the block
        let mut dmat = vec![vec![Jet::zero(n, order); n]; n];
        for c in 0..rank {
            for f in 0..rank {
                let mut acc = Jet::zero(n, order);
                for a in 0..rank {
                    for b in 0..rank {
                        let w = jinv[(c, a)].clone() * jinv_t[(b, f)].clone();
                        if !w.is_zero() && !e[a][b].is_zero() {
                            acc = &acc + &e[a][b].scale(&w);
                        }
                    }
                }
                dmat[c][f] = -&acc;
            }
        }
        let v = FormJet::from_matrix(&dmat, order)
            .partial_primitive(&block)
            .map_err(|_| Error::SplitFailure { degree: d })?;
        for a in 0..rank {
            let mut corr = Jet::zero(n, top);
            for b in 0..rank {
                if !j[(a, b)].is_zero() {
                    corr = &corr + &v.coeff(&[b]).with_order(top).scale(&j[(a, b)]);
                }
            }
            coords[a] = &coords[a] + &corr.homogeneous(d);
        }
        if !is_zero(&defect_u(&coords, d - 1)) {
            return Err(Error::SplitFailure { degree: d });
        }
    }
    for d in 2..=top {
        let e = defect_w(&coords, d - 1);
        if is_zero(&e) {
            continue;
        }
        for (k, ew) in e.iter().enumerate() {
            if ew.iter().all(Jet::is_zero) {
                continue;
            }
            let mut beta = FormJet::zero(n, order, 1);
            for c in 0..rank {
                let mut acc = Jet::zero(n, order);
                for (a, ea) in ew.iter().enumerate() {
                    if !jinv[(c, a)].is_zero() {
                        acc = &acc - &ea.scale(&jinv[(c, a)]);
                    }
                }
                beta.add_term(&[c], acc);
            }
            let psi = beta
                .partial_primitive(&block)
                .map_err(|_| Error::SplitFailure { degree: d })?;
            let w = rank + k;
            coords[w] = &coords[w] + &psi.coeff(&[]).with_order(top).homogeneous(d);
        }
        if !is_zero(&defect_w(&coords, d - 1)) {
            return Err(Error::SplitFailure { degree: d });
        }
    }
    Ok(coords)
}

fn finish_split<S: Scalar>(pi: &BivectorJet<S>, map: PolyMap<S>, linear: Matrix<S>, rank: usize) -> Result<SplitResult<S>> {
    let n = pi.nvars();
    let pushed = pi.pushforward(&map)?;
    let defect = split_defect(&pushed, rank);
    if !defect.is_negligible() || pushed.order() < pi.order() {
        return Err(Error::SplitFailure { degree: pi.order() });
    }
    let positions: Vec<usize> = (rank..n).collect();
    let mut transverse = Vec::new();
    for a in rank..n {
        for b in a + 1..n {
            let f = pushed.entry(a, b);
            if f.is_zero() {
                continue;
            }
            let f = f.restrict_vars(&positions).ok_or(Error::SplitFailure { degree: pi.order() })?;
            transverse.push((a - rank, b - rank, f));
        }
    }
    Ok(SplitResult {
        map,
        linear,
        rank,
        transverse,
        pushed,
    })
}

/// Coordinates in which `Π` is `Σ ∂_{x_i}∧∂_{y_i} + Σ f_ij(z) ∂_{z_i}∧∂_{z_j}`
/// through order `order`, with `f_ij(0) = 0`. The map has order `order + 1`.
pub fn weinstein_split<S: Scalar>(pi: &BivectorJet<S>, order: u32) -> Result<SplitResult<S>> {
    let pi = pi.with_order(order);
    check_is_poisson(&pi, "weinstein_split")?;
    let n = pi.nvars();
    let (a, rank) = linear_split_frame(&pi.constant_matrix())?;
    let lin = PolyMap::linear(&a, order + 1);
    let normalized = pi.pushforward(&lin)?;
    let coords = split_coordinates(&normalized, rank, order)?;
    let map = PolyMap::new(coords)?.compose(&lin)?;
    debug_assert_eq!(map.source_dim(), n);
    finish_split(&pi, map, a, rank)
}

/// [`weinstein_split`] commuting with a linear action that preserves `Π`.
///
/// Requires `Π(0) = J ⊕ 0` already and each `A_i` block diagonal for the
/// splitting of the variables into the symplectic block and the rest, so
/// the action preserves both coordinate subspaces. The construction uses
/// only operations natural under such maps; the commutation is checked.
pub fn equivariant_weinstein_split<S: Scalar>(pi: &BivectorJet<S>, lp: &LinearPart<S>, order: u32) -> Result<SplitResult<S>> {
    let op = "equivariant_weinstein_split";
    let pi = pi.with_order(order);
    check_is_poisson(&pi, op)?;
    let n = pi.nvars();
    if lp.nvars() != n {
        return Err(Error::Dimension {
            op,
            expected: n,
            found: lp.nvars(),
        });
    }
    let p0 = pi.constant_matrix();
    let rank = p0.rank();
    if p0 != standard_matrix(rank).direct_sum_zero(n) {
        return Err(Error::NormalizeFirst { op });
    }
    for (i, a) in lp.mats.iter().enumerate() {
        let mixes = (0..n).any(|r| (0..n).any(|c| (r < rank) != (c < rank) && !a[(r, c)].is_zero()));
        if mixes {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    for (i, v) in lp.fields(order).iter().enumerate() {
        if !pi.lie_derivative(v).is_negligible() {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    let coords = split_coordinates(&pi, rank, order)?;
    let map = PolyMap::new(coords)?;
    for (i, r) in commutation_residual(&map, lp)?.into_iter().enumerate() {
        if !r.is_negligible() {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    finish_split(&pi, map, Matrix::identity(n), rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    type Q = Rational;

    fn jet(s: &str, n: usize, order: u32) -> Jet<Q> {
        Jet::parse(s, n, order).unwrap()
    }

    fn biv(n: usize, order: u32, terms: &[(usize, usize, &str)]) -> BivectorJet<Q> {
        BivectorJet::from_terms(n, order, terms.iter().map(|&(i, j, s)| (i, j, jet(s, n, order)))).unwrap()
    }

    /// Jacobiator `{x_a, {x_b, x_c}} + cyclic` on coordinate functions.
    fn jacobiator(pi: &BivectorJet<Q>, a: usize, b: usize, c: usize) -> Jet<Q> {
        let n = pi.nvars();
        let o = pi.order();
        let x = |i| Jet::var(n, o + 1, i);
        let br = |f: &Jet<Q>, g: &Jet<Q>| pi.bracket(f, g).with_order(o + 1);
        let t1 = br(&x(a), &br(&x(b), &x(c)));
        let t2 = br(&x(b), &br(&x(c), &x(a)));
        let t3 = br(&x(c), &br(&x(a), &x(b)));
        (&(&t1 + &t2) + &t3).with_order(o - 1)
    }

    #[test]
    fn constant_bivector_is_poisson() {
        assert!(check_poisson(&biv(2, 3, &[(0, 1, "1")])).is_zero());
    }

    #[test]
    fn b_poisson_fixture_is_poisson() {
        let pi = biv(4, 4, &[(2, 3, "x3"), (0, 1, "1")]);
        assert!(pi.check_poisson().is_zero());
    }

    #[test]
    fn rotation_wedge_axis_is_poisson() {
        // x ∂y∧∂z + y ∂z∧∂x = (x ∂y - y ∂x)∧∂z, and the two fields commute
        let pi = biv(3, 3, &[(1, 2, "x1"), (2, 0, "x2")]);
        assert!(pi.check_poisson().is_zero());
        assert!(jacobiator(&pi, 0, 1, 2).is_zero());
        assert!(biv(3, 3, &[(1, 2, "x1"), (2, 0, "x2"), (0, 1, "x3")]).check_poisson().is_zero());
    }

    #[test]
    fn jacobi_failure_is_detected() {
        // {x, {y, z}} = {x, y} = 1
        let pi = biv(3, 3, &[(1, 2, "x2"), (0, 1, "1")]);
        let jac = jacobiator(&pi, 0, 1, 2);
        assert_eq!(jac, Jet::one(3, 2));
        let s = pi.schouten_square().comp(0, 1, 2);
        assert_eq!(s, jac.scale(&Q::from_i64(-2)));
        assert_eq!(pi.check_poisson(), Q::from_i64(2));
    }

    #[test]
    fn schouten_agrees_with_jacobiator() {
        let pi = biv(3, 4, &[(0, 1, "x3^2 + x1"), (1, 2, "x1*x2"), (0, 2, "1 + x2^2")]);
        let jac = jacobiator(&pi, 0, 1, 2);
        let s = pi.schouten_square().comp(0, 1, 2);
        assert_eq!(s, jac.scale(&Q::from_i64(-2)));
    }

    #[test]
    fn dual_of_standard_b_poisson() {
        let pi = biv(4, 5, &[(2, 3, "x3"), (0, 1, "1")]);
        assert_eq!(pi.to_b_form(2).unwrap(), BForm::standard(4, 4));
        let scaled = biv(4, 5, &[(2, 3, "x3 + x3^2"), (0, 1, "1")]);
        let w = scaled.to_b_form(2).unwrap();
        assert!(w.b_d().is_zero());
        assert!(biv(4, 3, &[(2, 3, "1")]).to_b_form(2).is_err());
    }

    #[test]
    fn pushforward_is_functorial() {
        let pi = biv(3, 4, &[(0, 1, "1 + x3"), (1, 2, "x1*x2")]);
        let m1 = PolyMap::new(alloc::vec![jet("x1 + x2^2", 3, 5), jet("x2 + x3*x1", 3, 5), jet("x3 - x1^2", 3, 5)]).unwrap();
        let m2 = PolyMap::new(alloc::vec![jet("2*x2", 3, 5), jet("x1 + x3^3", 3, 5), jet("x3 + x2*x1", 3, 5)]).unwrap();
        let a = pi.pushforward(&m1).unwrap().pushforward(&m2).unwrap();
        let b = pi.pushforward(&m2.compose(&m1).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn already_split_gives_identity() {
        let pi = biv(4, 4, &[(0, 1, "1"), (2, 3, "x3")]);
        let out = weinstein_split(&pi, 4).unwrap();
        assert_eq!(out.map, PolyMap::identity(4, 5));
        assert_eq!(out.rank, 2);
        assert_eq!(out.transverse, alloc::vec![(0, 1, jet("x1", 2, 4))]);
    }

    #[test]
    fn rank_zero_is_pure_transverse() {
        let pi = biv(3, 3, &[(1, 2, "x1"), (2, 0, "x2"), (0, 1, "x3")]);
        let out = weinstein_split(&pi, 3).unwrap();
        assert_eq!(out.rank, 0);
        assert_eq!(out.map, PolyMap::identity(3, 4));
        assert_eq!(out.transverse.len(), 3);
    }

    #[test]
    fn recovers_split_form_after_pushforward() {
        let split = biv(5, 4, &[(0, 1, "1"), (2, 3, "1")]);
        let m = PolyMap::new(alloc::vec![
            jet("x1 + x2 + x5^2", 5, 5),
            jet("x2 - x3*x1", 5, 5),
            jet("x3 + x5 + x1^2", 5, 5),
            jet("x4 + x2*x5 + x3^3", 5, 5),
            jet("x5 + x1*x4", 5, 5),
        ])
        .unwrap();
        let pi = split.pushforward(&m).unwrap();
        let out = weinstein_split(&pi, 4).unwrap();
        assert_eq!(out.rank, 4);
        assert!(split_defect(&out.pushed, 4).is_zero());
        assert!(out.transverse.is_empty());

        let transverse = biv(5, 4, &[(0, 1, "1"), (2, 3, "x3 + x4^2 + x3*x5")]);
        assert!(transverse.check_poisson().is_zero());
        let pi = transverse.pushforward(&m).unwrap();
        let out = weinstein_split(&pi, 4).unwrap();
        assert_eq!(out.rank, 2);
        assert!(split_defect(&out.pushed, 2).is_zero());
    }

    #[test]
    fn not_poisson_is_rejected() {
        let pi = biv(3, 3, &[(1, 2, "x2"), (0, 1, "1")]);
        assert!(matches!(weinstein_split(&pi, 3), Err(Error::NotPoisson { .. })));
    }

    #[test]
    fn equivariant_split_under_rotation() {
        // rotation in (x1, x2) and in (x3, x4) preserves this bivector
        let pi = biv(4, 4, &[(0, 1, "1 + x1^2 + x2^2"), (2, 3, "x3^2 + x4^2")]);
        let a = Matrix::<Q>::from_int_rows(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]);
        let lp = LinearPart::new(alloc::vec![a]);
        let out = equivariant_weinstein_split(&pi, &lp, 4).unwrap();
        assert!(split_defect(&out.pushed, 2).is_zero());
        assert!(commutation_residual(&out.map, &lp).unwrap().iter().all(|r| r.is_zero()));
        let mix = Matrix::<Q>::from_int_rows(&[&[0, 0, 1, 0], &[0; 4], &[0; 4], &[0; 4]]);
        assert!(matches!(
            equivariant_weinstein_split(&pi, &LinearPart::new(alloc::vec![mix]), 4),
            Err(Error::NotEquivariant { .. })
        ));
    }
}
