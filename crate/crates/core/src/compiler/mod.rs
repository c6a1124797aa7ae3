//! Compilation of FEM and general CPWL functions into ReLU networks.

mod bounds;
mod deep;
mod expand;
mod gadget;
mod max_of_m;
mod reduce;
mod shallow;

use thiserror::Error;

use crate::cpwl::CpwlError;
use crate::mesh::MeshError;
use crate::net::NetError;

pub use bounds::{
    account, basis_shallow_size_bound, fem_deep_size_bound, lattice_size_bound, AccountMeta,
    BoundReport, Pathway,
};
pub use deep::{compile_basis_deep, compile_fem_deep, compile_star_deep};
pub use expand::{expand_hat, expand_lattice, MAX_CLAUSES, MAX_PIECES};
pub use gadget::{
    affine_tree, ceil_log2, combine, gadget_tree, max_with_zero, GadgetOp, MinMaxGadget, GADGET_W,
};
pub use max_of_m::{compile_max_of_m, max_of_m_limits};
pub use reduce::{
    eval_terms, key_reduce_case, key_reduce_rhs, four_term_rhs, merge_terms, reduce_clause,
    reduce_to_width, GBar, MaxTerm, Verifier,
};
pub use shallow::{
    compile_basis_shallow, compile_cpwl_shallow, compile_fem_shallow, compile_lattice_shallow, compile_terms,
    reduce_terms, shallow_lattice,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("vertex stars are not convex at {0:?}")]
    NotLocallyConvex(Vec<usize>),
    #[error("clause {clause} has {arity} arguments, more than {limit}")]
    ClauseTooWide { clause: usize, arity: usize, limit: usize },
    #[error("cannot decide linear dependence (relative residual {residual:e})")]
    NumericalDependenceAmbiguous { residual: f64 },
    #[error("rewrite identity failed in {context} (error {error:e})")]
    IdentityCheckFailed { context: String, error: f64 },
    #[error("empty list of networks")]
    EmptyList,
    #[error("expansion too large: m = {m}, M = {clauses} (limits {MAX_PIECES} and {MAX_CLAUSES})")]
    Overflow { m: usize, clauses: usize },
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Cpwl(#[from] CpwlError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("internal error: {0}")]
    Internal(String),
}
