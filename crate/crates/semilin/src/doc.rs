//! JSON input documents.
//!
//! Scalars may be JSON numbers or strings (`"3/4"`, `"-1.25"`); polynomials
//! are strings over the document's variable names, `x1..xn` by default.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use semilin_core::bform::BForm;
use semilin_core::field::VectorFieldJet;
use semilin_core::form::FormJet;
use semilin_core::jet::{default_names, Jet};
use semilin_core::lie::{LieAlgebra, LinearPart, Representation};
use semilin_core::linalg::Matrix;
use semilin_core::poisson::BivectorJet;
use semilin_core::scalar::Scalar;

use crate::Failure;

pub fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn scalar<S: Scalar>(v: &Value) -> Result<S, Failure> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(Failure::Usage(format!("expected a number, found {other}"))),
    };
    S::parse_literal(&text).ok_or_else(|| Failure::Usage(format!("invalid number {text:?}")))
}

fn names(given: &Option<Vec<String>>, nvars: usize) -> Result<Vec<String>, Failure> {
    match given {
        None => Ok(default_names(nvars)),
        Some(v) if v.len() == nvars => Ok(v.clone()),
        Some(v) => Err(Failure::Usage(format!("{} variable names for {nvars} variables", v.len()))),
    }
}

fn poly<S: Scalar>(s: &str, names: &[String], order: u32) -> Result<Jet<S>, Failure> {
    Ok(Jet::parse_with(s, names, order)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub dim: usize,
    /// `(i, j, k, c)` meaning `[e_i, e_j]` has `e_k` coefficient `c`. An
    /// entry whose mirror `(j, i, k)` is not listed also sets `c_ji^k = -c`.
    pub structure_constants: Vec<(usize, usize, usize, Value)>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
}

impl AlgebraDoc {
    pub fn build<S: Scalar>(&self) -> Result<LieAlgebra<S>, Failure> {
        let listed: Vec<(usize, usize, usize)> = self.structure_constants.iter().map(|&(i, j, k, _)| (i, j, k)).collect();
        let mut entries = Vec::new();
        for (i, j, k, v) in &self.structure_constants {
            let c: S = scalar(v)?;
            if !listed.contains(&(*j, *i, *k)) && i != j {
                entries.push((*j, *i, *k, -c.clone()));
            }
            entries.push((*i, *j, *k, c));
        }
        let g = LieAlgebra::from_constants(self.dim, entries)?;
        match &self.names {
            Some(n) if n.len() == self.dim => Ok(g.with_names(n.clone())),
            Some(n) => Err(Failure::Usage(format!("{} generator names for dimension {}", n.len(), self.dim))),
            None => Ok(g),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub components: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFieldsDoc {
    pub nvars: usize,
    pub order: u32,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    /// Names of the fibre coordinates of the cotangent bundle.
    #[serde(default)]
    pub momenta: Option<Vec<String>>,
    pub fields: Vec<FieldDoc>,
}

/// A representation, optionally with sample points for `orbit-dim`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDoc {
    pub algebra: AlgebraDoc,
    pub rep: RepFieldsDoc,
    #[serde(default)]
    pub points: Vec<Vec<Value>>,
}

impl RepDoc {
    pub fn names(&self) -> Result<Vec<String>, Failure> {
        names(&self.rep.variables, self.rep.nvars)
    }

    /// Position names followed by momentum names.
    pub fn cotangent_names(&self) -> Result<Vec<String>, Failure> {
        let n = self.rep.nvars;
        match (&self.rep.variables, &self.rep.momenta) {
            (None, None) => Ok(default_names(2 * n)),
            (vars, moms) => {
                let q = names(vars, n)?;
                let p = match moms {
                    Some(_) => names(moms, n)?,
                    None => q.iter().map(|s| format!("p_{s}")).collect(),
                };
                Ok(q.into_iter().chain(p).collect())
            }
        }
    }

    pub fn build<S: Scalar>(&self, order: u32) -> Result<Representation<S>, Failure> {
        let g = self.algebra.build()?;
        let names = self.names()?;
        let n = self.rep.nvars;
        let mut fields = Vec::new();
        for (i, f) in self.rep.fields.iter().enumerate() {
            if f.components.len() != n {
                return Err(Failure::Usage(format!("field {i} has {} components for {n} variables", f.components.len())));
            }
            let comps = f
                .components
                .iter()
                .map(|c| poly(c, &names, order))
                .collect::<Result<Vec<_>, _>>()?;
            fields.push(VectorFieldJet::new(comps)?);
        }
        Ok(Representation::new(g, fields)?)
    }

    pub fn points<S: Scalar>(&self) -> Result<Vec<Vec<S>>, Failure> {
        self.points
            .iter()
            .map(|p| {
                if p.len() != self.rep.nvars {
                    return Err(Failure::Usage(format!("point of length {} for {} variables", p.len(), self.rep.nvars)));
                }
                p.iter().map(scalar).collect()
            })
            .collect()
    }
}

/// A differential form as `(indices, coefficient)` entries, optionally with
/// a linear action for the equivariant normal form.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDoc {
    pub nvars: usize,
    pub order: u32,
    #[serde(default = "two")]
    pub degree: usize,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    pub terms: Vec<(Vec<usize>, String)>,
    #[serde(default)]
    pub algebra: Option<AlgebraDoc>,
    /// One matrix per generator, acting by `x -> A x`.
    #[serde(default)]
    pub action: Option<Vec<Vec<Vec<Value>>>>,
}

fn two() -> usize {
    2
}

impl FormDoc {
    pub fn names(&self) -> Result<Vec<String>, Failure> {
        names(&self.variables, self.nvars)
    }

    pub fn build<S: Scalar>(&self, order: u32) -> Result<FormJet<S>, Failure> {
        let names = self.names()?;
        let terms = self
            .terms
            .iter()
            .map(|(idx, c)| Ok((idx.clone(), poly(c, &names, order)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        check_indices(terms.iter().flat_map(|(idx, _)| idx.iter().copied()), self.nvars)?;
        Ok(FormJet::from_terms(self.nvars, order, self.degree, terms)?)
    }

    pub fn action<S: Scalar>(&self) -> Result<(LieAlgebra<S>, LinearPart<S>), Failure> {
        let (Some(g), Some(mats)) = (&self.algebra, &self.action) else {
            return Err(Failure::Usage("equivariant-darboux needs `algebra` and `action`".into()));
        };
        let g = g.build()?;
        let mats = mats.iter().map(|m| matrix(m, self.nvars)).collect::<Result<Vec<_>, _>>()?;
        if mats.len() != g.dim() {
            return Err(Failure::Usage(format!("{} action matrices for an algebra of dimension {}", mats.len(), g.dim())));
        }
        Ok((g, LinearPart::new(mats)))
    }
}

fn matrix<S: Scalar>(rows: &[Vec<Value>], n: usize) -> Result<Matrix<S>, Failure> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Failure::Usage(format!("action matrices must be {n} x {n}")));
    }
    let rows = rows
        .iter()
        .map(|r| r.iter().map(scalar).collect::<Result<Vec<S>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows))
}

fn check_indices(idx: impl Iterator<Item = usize>, n: usize) -> Result<(), Failure> {
    for i in idx {
        if i >= n {
            return Err(Failure::Usage(format!("index {i} out of range for {n} variables")));
        }
    }
    Ok(())
}

/// A bivector as `(i, j, Π^{ij})` triples; the b-form variant also accepts
/// a smooth part and a log part `(dz/z) ∧ β` instead.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BivectorDoc {
    pub nvars: usize,
    pub order: u32,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    /// Index of the coordinate cutting out the singular hypersurface.
    #[serde(default)]
    pub z: Option<usize>,
    #[serde(default)]
    pub bivector: Option<Vec<(usize, usize, String)>>,
    #[serde(default)]
    pub smooth: Option<Vec<(Vec<usize>, String)>>,
    #[serde(default)]
    pub log: Option<Vec<(Vec<usize>, String)>>,
}

impl BivectorDoc {
    pub fn names(&self) -> Result<Vec<String>, Failure> {
        names(&self.variables, self.nvars)
    }

    pub fn bivector<S: Scalar>(&self, order: u32) -> Result<BivectorJet<S>, Failure> {
        let Some(terms) = &self.bivector else {
            return Err(Failure::Usage("missing `bivector`".into()));
        };
        let names = self.names()?;
        check_indices(terms.iter().flat_map(|(i, j, _)| [*i, *j]), self.nvars)?;
        let terms = terms
            .iter()
            .map(|(i, j, c)| Ok((*i, *j, poly(c, &names, order)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        Ok(BivectorJet::from_terms(self.nvars, order, terms)?)
    }

    /// The b-form, read directly or as the dual of the bivector. Returns the
    /// form and whether it came from a bivector.
    pub fn b_form<S: Scalar>(&self, order: u32) -> Result<(BForm<S>, bool), Failure> {
        let Some(z) = self.z else {
            return Err(Failure::Usage("b-darboux needs `z`".into()));
        };
        check_indices([z].into_iter(), self.nvars)?;
        if self.bivector.is_some() {
            if self.smooth.is_some() || self.log.is_some() {
                return Err(Failure::Usage("give either `bivector` or `smooth`/`log`, not both".into()));
            }
            // the dual loses one order
            return Ok((self.bivector(order + 1)?.to_b_form(z)?, true));
        }
        let names = self.names()?;
        let part = |terms: &Option<Vec<(Vec<usize>, String)>>, degree: usize| -> Result<FormJet<S>, Failure> {
            let terms = terms
                .iter()
                .flatten()
                .map(|(idx, c)| Ok((idx.clone(), poly(c, &names, order)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            check_indices(terms.iter().flat_map(|(idx, _)| idx.iter().copied()), self.nvars)?;
            Ok(FormJet::from_terms(self.nvars, order, degree, terms)?)
        };
        let smooth = part(&self.smooth, 2)?;
        let log = part(&self.log, 1)?;
        Ok((BForm::new(&smooth, &log, z)?, false))
    }
}
