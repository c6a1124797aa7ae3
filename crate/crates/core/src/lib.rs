//! Exact compilation of continuous piecewise-linear (CPWL) functions into ReLU networks.
//!
//! Two constructive routes are implemented:
//!
//! - the *deep* route for linear simplicial finite element functions, which writes every
//!   nodal basis function as `max{0, min_k g_k}` and evaluates the minimum with a balanced
//!   tree of 4-neuron min gadgets ([`compiler::compile_fem_deep`]);
//! - the *shallow* route for general CPWL functions, which goes through a max-min lattice
//!   form, an inclusion-exclusion expansion into signed maxima, and rank-based reduction of
//!   every maximum to at most `d + 1` arguments ([`compiler::compile_cpwl_shallow`]).
//!
//! Every compiled network can be checked against its source by sampling, accounted against
//! the depth and size estimates it is expected to satisfy ([`compiler::BoundReport`]), and
//! checked for the low bit-width structure of its hidden layers ([`quantize`]).
//!
//! The [`galerkin1d`] module reproduces the one-dimensional moving-knot Galerkin experiment:
//! uniform FEM, adaptive FEM, and alternating knot/slope optimization of a one-hidden-layer
//! ReLU network.

pub mod compiler;
pub mod cpwl;
pub mod galerkin1d;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod net;
pub mod quantize;
pub mod sampling;
pub mod verify;

mod error;

pub use error::{Error, Result};

pub use cpwl::{AffineFunc, CpwlPieces, LatticeForm, UniqueOrderPartition};
pub use mesh::{SimplicialMesh, VertexStar};
pub use net::{AffineLayer, NetworkStats, ReluNetwork};
pub use quantize::QuantGrid;
