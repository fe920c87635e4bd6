//! Jet-level normal forms for Lie algebra actions, symplectic, b-symplectic
//! and Poisson structures.
//!
//! Everything works on truncated Taylor polynomials ("jets") with either
//! exact rational or `f64` coefficients.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bform;
pub mod cotangent;
pub mod error;
pub mod field;
pub mod flow;
pub mod form;
pub mod invariant;
pub mod jet;
pub mod jetmat;
pub mod lie;
pub mod linalg;
pub mod linearize;
pub mod numeric;
mod parse;
pub mod poisson;
pub mod polymap;
pub mod scalar;
pub mod symplectic;

pub use error::{Error, Result};
pub use field::{bracket_vf, VectorFieldJet};
pub use form::{exterior_d, interior, poincare_primitive, pullback, wedge, FormJet};
pub use jet::{Jet, Monomial};
pub use linalg::Matrix;
pub use polymap::{polymap_compose, polymap_inverse, PolyMap};
pub use scalar::{Rational, Scalar};
