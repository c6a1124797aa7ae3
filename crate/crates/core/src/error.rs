use thiserror::Error;

use crate::compiler::CompileError;
use crate::cpwl::CpwlError;
use crate::galerkin1d::GalerkinError;
use crate::mesh::MeshError;
use crate::net::NetError;

/// Crate-wide error, wrapping the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Cpwl(#[from] CpwlError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Galerkin(#[from] GalerkinError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
