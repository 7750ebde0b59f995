// SPDX-License-Identifier: Apache-2.0

//! Individual wave packets.
//!
//! For a non-zero block with `A = A_j`, `R = R_jl`, `c = R B_jm` and
//! `t_i = delta R A^-1 k`:
//!
//! ```text
//! psi_i(t)   = |det A|^{1/2}  e^{ 2 pi i <c, t>}          psi(A R^-1 (t - t_i))
//! psi_i^(xi) = |det A|^{-1/2} e^{-2 pi i <t_i, xi - c>}  psi^(A^-1 R^-1 (xi - c))
//! ```
//!
//! and for the zero block `psi_i(t) = gamma(t - delta k)`. Both lines are an
//! exact Fourier pair, every packet has the energy of its prototype, and the
//! frequency lobe of `psi_i` sits inside the tile `R (A Q + B)`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{unit_phase, Domain, GridSpec, SampledField};
use crate::geometry::{row_norms, Mat2, Rect, Vec2};
use crate::index::{
    enumerate_frequency_indices, modulation_vector, rotation_matrix, scale_matrix, time_lattice_map, FrequencyIndex,
    PacketIndex,
};
use crate::params::SystemParams;
use crate::prototype::{Prototype, Prototypes};

/// Relative modulus a sampled packet may still have on the grid boundary.
pub const BOUNDARY_DECAY: f64 = 1e-10;

/// Relative tail used for support bounding boxes.
pub const SUPPORT_TAIL: f64 = 1e-16;

/// Cached affine data of one frequency block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGeometry {
    pub freq: FrequencyIndex,
    /// Frequency peak `R B` (zero for the zero block).
    pub center: Vec2,
    /// `R A`, identity for the zero block.
    pub freq_map: Mat2,
    /// `A^-1 R^-1`, identity for the zero block.
    pub freq_map_inv: Mat2,
    /// `R A^-1`, identity for the zero block.
    pub time_map: Mat2,
    /// `A R^-1`, identity for the zero block.
    pub time_map_inv: Mat2,
    /// `k -> t_i`.
    pub lattice: Mat2,
    /// `|det A|^{1/2}`.
    pub sqrt_det: f64,
}

impl BlockGeometry {
    pub fn new(params: &SystemParams, freq: FrequencyIndex) -> Self {
        let lattice = time_lattice_map(params, freq);
        if freq.is_zero() {
            let id = Mat2::identity();
            return BlockGeometry {
                freq,
                center: Vec2::zeros(),
                freq_map: id,
                freq_map_inv: id,
                time_map: id,
                time_map_inv: id,
                lattice,
                sqrt_det: 1.0,
            };
        }
        let a = scale_matrix(params, freq.j);
        let a_inv = Mat2::new(1.0 / a[(0, 0)], 0.0, 0.0, 1.0 / a[(1, 1)]);
        let r = rotation_matrix(params, freq.j, freq.l);
        let r_inv = r.transpose();
        BlockGeometry {
            freq,
            center: r * modulation_vector(params, freq.j, freq.m),
            freq_map: r * a,
            freq_map_inv: a_inv * r_inv,
            time_map: r * a_inv,
            time_map_inv: a * r_inv,
            lattice,
            sqrt_det: (a[(0, 0)] * a[(1, 1)]).sqrt(),
        }
    }
}

/// A wave packet system: parameters, prototypes and per-block geometry.
#[derive(Clone, Debug)]
pub struct WavePacketSystem {
    pub params: SystemParams,
    pub protos: Prototypes,
    blocks: Vec<BlockGeometry>,
    lookup: HashMap<FrequencyIndex, usize>,
}

impl WavePacketSystem {
    pub fn new(params: SystemParams, protos: Prototypes) -> Result<Self> {
        params.validate()?;
        let blocks: Vec<BlockGeometry> =
            enumerate_frequency_indices(&params).into_iter().map(|f| BlockGeometry::new(&params, f)).collect();
        let lookup = blocks.iter().enumerate().map(|(n, b)| (b.freq, n)).collect();
        Ok(WavePacketSystem { params, protos, blocks, lookup })
    }

    pub fn gaussian(params: SystemParams) -> Result<Self> {
        Self::new(params, Prototypes::gaussian())
    }

    /// Blocks in enumeration order.
    pub fn blocks(&self) -> &[BlockGeometry] {
        &self.blocks
    }

    pub fn block_position(&self, f: FrequencyIndex) -> Result<usize> {
        self.lookup
            .get(&f)
            .copied()
            .ok_or_else(|| Error::Domain(format!("{f} is not a frequency index of this system")))
    }

    pub fn block(&self, f: FrequencyIndex) -> Result<&BlockGeometry> {
        Ok(&self.blocks[self.block_position(f)?])
    }

    pub fn prototype(&self, f: FrequencyIndex) -> &dyn Prototype {
        if f.is_zero() {
            self.protos.gamma.as_ref()
        } else {
            self.protos.psi.as_ref()
        }
    }

    fn check(&self, i: PacketIndex) -> Result<&BlockGeometry> {
        let k = self.params.k_radius as i32;
        if i.k1.abs() > k || i.k2.abs() > k {
            return Err(Error::Domain(format!("{i} lies outside the lattice |k| <= {k}")));
        }
        self.block(i.freq())
    }

    pub fn time_center(&self, i: PacketIndex) -> Result<Vec2> {
        Ok(self.check(i)?.lattice * i.k())
    }

    pub fn packet_time(&self, i: PacketIndex, t: Vec2) -> Result<Complex64> {
        let b = self.check(i)?;
        Ok(eval_time(b, self.prototype(i.freq()), b.lattice * i.k(), t))
    }

    pub fn packet_freq(&self, i: PacketIndex, xi: Vec2) -> Result<Complex64> {
        let b = self.check(i)?;
        Ok(eval_freq(b, self.prototype(i.freq()), b.lattice * i.k(), xi))
    }

    /// `int |psi_i|^2`, which equals the prototype energy.
    pub fn packet_energy(&self, i: PacketIndex) -> f64 {
        self.prototype(i.freq()).energy()
    }

    /// Box outside which `|psi_i^|` is below `tail` of its maximum.
    pub fn freq_bbox(&self, f: FrequencyIndex, tail: f64) -> Result<Rect> {
        let b = self.block(f)?;
        let sup = self.prototype(f).freq_support(tail);
        Ok(Rect::centered(b.center + b.freq_map * sup.center, row_norms(&b.freq_map) * sup.radius))
    }

    /// Box outside which `|psi_i|` is below `tail` of its maximum.
    pub fn time_bbox(&self, i: PacketIndex, tail: f64) -> Result<Rect> {
        let b = self.check(i)?;
        let sup = self.prototype(i.freq()).time_support(tail);
        Ok(Rect::centered(b.lattice * i.k() + b.time_map * sup.center, row_norms(&b.time_map) * sup.radius))
    }

    /// Samples `psi_i` or `psi_i^` at every node of `grid` and enforces the
    /// boundary-decay contract.
    pub fn sample_packet(&self, i: PacketIndex, domain: Domain, grid: GridSpec) -> Result<SampledField> {
        let b = self.check(i)?;
        let proto = self.prototype(i.freq());
        let ti = b.lattice * i.k();
        let n1 = grid.counts[1];
        let values: Vec<Complex64> = (0..grid.counts[0])
            .into_par_iter()
            .flat_map_iter(|p0| {
                (0..n1).map(move |p1| {
                    let x = grid.point(p0, p1);
                    match domain {
                        Domain::Time => eval_time(b, proto, ti, x),
                        Domain::Freq => eval_freq(b, proto, ti, x),
                    }
                })
            })
            .collect();
        let mut field = SampledField { grid, domain, values, boundary_ratio: None };
        let ratio = field.compute_boundary_ratio();
        field.boundary_ratio = Some(ratio);
        if ratio >= BOUNDARY_DECAY {
            return Err(Error::GridTooSmall {
                index: i,
                reason: format!(
                    "boundary modulus is {ratio:.3e} of the maximum (limit {BOUNDARY_DECAY:.0e}); enlarge the grid"
                ),
            });
        }
        Ok(field)
    }

    /// An `n x n` time grid for packet `i` whose reciprocal grid resolves the
    /// packet's frequency lobe without aliasing, together with the matching
    /// reciprocal origin centred on that lobe.
    pub fn auto_grid(&self, i: PacketIndex, n: usize) -> Result<(GridSpec, [f64; 2])> {
        let fb = self.freq_bbox(i.freq(), SUPPORT_TAIL)?;
        let tb = self.time_bbox(i, SUPPORT_TAIL)?;
        let h = 1.0 / (1.1 * fb.width(0).max(fb.width(1)));
        if (n as f64 - 1.0) * h < tb.width(0).max(tb.width(1)) {
            return Err(Error::GridTooSmall {
                index: i,
                reason: format!(
                    "{n} nodes at step {h:.4} span less than the time support {:.4}",
                    tb.width(0).max(tb.width(1))
                ),
            });
        }
        let grid = GridSpec::centered(tb.center(), h, n)?;
        let d = grid.reciprocal_step();
        let c = fb.center();
        let freq_origin = [c.x - (n / 2) as f64 * d[0], c.y - (n / 2) as f64 * d[1]];
        Ok((grid, freq_origin))
    }
}

/// Time-domain value of the packet of block `b` located at `ti`.
#[inline]
pub(crate) fn eval_time(b: &BlockGeometry, proto: &dyn Prototype, ti: Vec2, t: Vec2) -> Complex64 {
    if b.freq.is_zero() {
        return proto.time_eval(t - ti);
    }
    unit_phase(b.center.dot(&t)) * proto.time_eval(b.time_map_inv * (t - ti)) * b.sqrt_det
}

/// Frequency-domain value of the packet of block `b` located at `ti`.
#[inline]
pub(crate) fn eval_freq(b: &BlockGeometry, proto: &dyn Prototype, ti: Vec2, xi: Vec2) -> Complex64 {
    let shifted = xi - b.center;
    unit_phase(-ti.dot(&shifted)) * proto.freq_eval(b.freq_map_inv * shifted) / b.sqrt_det
}

/// Relative `l2` distance between a discretely transformed time sample of
/// `psi_i` and the analytic transform on the same reciprocal grid.
pub fn dft_consistency(system: &WavePacketSystem, i: PacketIndex, n: usize) -> Result<f64> {
    let (grid, freq_origin) = system.auto_grid(i, n)?;
    let sampled = system.sample_packet(i, Domain::Time, grid)?;
    let numeric = sampled.forward_transform(freq_origin);
    let analytic = system.sample_packet(i, Domain::Freq, numeric.grid)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in numeric.values.iter().zip(&analytic.values) {
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Serializable summary of a packet's location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketSummary {
    pub index: PacketIndex,
    pub time_center: [f64; 2],
    pub freq_center: [f64; 2],
}
