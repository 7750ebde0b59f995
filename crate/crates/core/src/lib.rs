// SPDX-License-Identifier: Apache-2.0

//! Wave packet coverings and wave packet systems in the frequency plane.
//!
//! The crate builds the dyadic, rotated, anisotropic covering of the frequency
//! plane parametrised by `(alpha, beta)`, the wave packet system generated from
//! two prototype functions, the phase-space distance between packet indices and
//! the Gram matrix of the system. Around these sit numerical certificates for the
//! structural properties of the system: metric axioms of the index distance,
//! separation and summability of the index space, and polynomial decay of the
//! Gram matrix away from its diagonal.
//!
//! Module map:
//!
//! | module        | contents                                                   |
//! |---------------|------------------------------------------------------------|
//! | [`params`]    | [`SystemParams`] and validation                            |
//! | [`index`]     | index sets, angles, matrices, phase-space coordinates      |
//! | [`covering`]  | tiles, intersection tests, coverage and moderateness       |
//! | [`metric`]    | index distance, metric axioms, separation, summability     |
//! | [`prototype`] | prototype functions and their decay checks                 |
//! | [`packet`]    | evaluation and sampling of individual wave packets         |
//! | [`field`]     | sampled fields, their binary format and discrete transforms|
//! | [`gram`]      | inner products, Gram matrix, decay and localisation checks |
//! | [`frame`]     | analysis, synthesis, frame operator, reconstruction        |
//! | [`partition`] | partition of unity and decomposition-space norms           |

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod field;
pub mod frame;
pub mod geometry;
pub mod gram;
pub mod index;
pub mod metric;
pub mod packet;
pub mod params;
pub mod partition;
pub mod prototype;

mod fft;

pub use error::{Error, Result};
pub use field::{Domain, GridSpec, SampledField};
pub use geometry::{Mat2, Rect, Vec2};
pub use gram::GramRecord;
pub use index::{FrequencyIndex, PacketIndex};
pub use metric::DistanceBreakdown;
pub use packet::WavePacketSystem;
pub use params::SystemParams;
pub use prototype::{Gaussian, Prototype, Prototypes};

pub use num_complex::Complex64;
