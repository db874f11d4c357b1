//! Numerical checks for quasinormality and related operator identities.
//!
//! Operators are represented by their exact actions on finitely supported
//! vectors ([`operator::LocalOperator`]), which makes finite matrices,
//! weighted shifts on directed trees, banded Toeplitz matrices and orthogonal
//! sums all checkable with the same predicates. Every predicate returns a
//! [`verdict::Verdict`]; failures carry a replayable witness vector.

pub mod corpus;
pub mod error;
pub mod exhibits;
pub mod hilbert;
pub mod operator;
pub mod predicates;
pub mod probe;
pub mod spectral;
pub mod tree;
pub mod verdict;

pub use error::{Error, Result};
pub use hilbert::{Label, SparseVec, TolerancePolicy, VertexKey};
pub use operator::{CMat, FiniteMatrixOp, LocalOperator, OpRef};
