//! Combinatorial and homological-algebra layer of wrapped Floer theory.
//!
//! The crate covers the stratifications of popsicle and cascade moduli
//! spaces, the explicit sign formulas attached to their boundary strata,
//! exact linear algebra over the rationals and prime fields, assembly of
//! the wrapped A-infinity operations and the restriction homomorphism from
//! user-supplied structure constants, and machine checks of the algebraic
//! identities these structures satisfy.
//!
//! Structure constants are always input data; nothing here counts
//! pseudo-holomorphic curves.
//!
//! The crate is `no_std` (with `alloc`): every type is an immutable value
//! and every operation is pure, so concurrent use needs no coordination.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ainfty;
pub mod cascade;
pub mod field;
pub mod popsicle;
pub mod sign;
pub mod symbolic;
pub mod telescope;
pub mod tree;
pub mod viterbo;

pub use field::{FieldDescriptor, GradedModule, Scalar, SparseMap};
pub use tree::{FDecomposition, Flavour, RibbonTree, Weights};
