//! Distance of a matrix to the nearest defective matrix.
//!
//! The solver couples an inner gradient flow on the unit Frobenius sphere
//! (minimising `|yᴴx|` for a tracked eigenvalue of `A + εE`) with an outer
//! Newton-bisection iteration on `ε` that exploits the square-root behaviour
//! of `r(ε)` close to a coalescence of two eigenvalues.
//!
//! Four perturbation classes are supported, see [`StructureMode`].

// `!(x <= tol)` style tests are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod flow;
pub mod init;
pub mod io;
pub mod linalg;
pub mod outer;

pub mod cli;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
pub use field::Field;
pub use flow::{FlowOptions, FlowState, InnerStatus, Perturbation, StructureMode};

pub use init::{candidate, condition_rates, upper_bound, CoalescenceCandidate};
pub use linalg::{eig_pairs, group_inverse, nearest_triple, EigenTriple, GroupInverse};
pub use outer::{solve_distance, DistanceReport, OuterIterate, OuterOptions};

/// Complex double precision scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
/// Boolean sparsity mask; `true` marks an admissible entry.
pub type Mask = nalgebra::DMatrix<bool>;
