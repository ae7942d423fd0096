//! Kolmogorov numbers and degrees of freedom of finite linear channels.
//!
//! A channel is a dense matrix `T: X → Y` between finite-dimensional spaces
//! carrying (weighted) ℓ1, ℓ2 or ℓ∞ norms. The crate computes
//!
//! * the Kolmogorov numbers `d_n(T) = inf { ‖Q_S T‖ : dim S < n }`,
//! * the degrees of freedom `N(ε) = #{n : d_n(T) > ε}` and an independent
//!   bisection estimate of its jump points,
//! * width ladders of domain truncations of sequence and kernel operators,
//! * checkers for the s-number axioms.
//!
//! The crate is `no_std` with `alloc`.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod axioms;
pub mod channels;
pub mod dof;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod operator;
pub mod quadrature;
pub mod spaces;
pub mod truncation;
pub mod widths;

pub use error::{Error, Result};
pub use operator::Operator;
pub use spaces::{NormKind, NormSpec, SpaceModel, Subspace};
