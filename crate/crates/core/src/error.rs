// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::index::PacketIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index out of domain: {0}")]
    Domain(String),

    #[error("grid too small for packet {index}: {reason}")]
    GridTooSmall { index: PacketIndex, reason: String },

    #[error("sampled values do not decay at the grid boundary (ratio {ratio:.3e} > {limit:.0e}); use a larger grid")]
    BoundaryDecay { ratio: f64, limit: f64 },

    #[error("quadrature tail check failed: {0}")]
    Quadrature(String),

    #[error("partition of unity: {0}")]
    Partition(String),

    #[error("signal is not band-limited to the covered disk: {0}")]
    NotBandLimited(String),

    #[error(
        "conjugate gradients stagnated after {iterations} iterations \
         (relative residual {residual:.3e}); try a smaller lattice step delta"
    )]
    Stagnation { iterations: usize, residual: f64 },

    #[error("malformed field data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
