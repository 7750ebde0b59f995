// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use wavepacket::index::enumerate_indices;
use wavepacket::{GridSpec, PacketIndex, SystemParams, Vec2, WavePacketSystem};

/// Reference parameters with the time lattice cut to `k_radius`.
pub fn params(j_max: u32, k_radius: u32) -> SystemParams {
    SystemParams { j_max, k_radius, ..SystemParams::default() }
}

pub fn system(p: &SystemParams) -> WavePacketSystem {
    WavePacketSystem::gaussian(p.clone()).expect("reference parameters are valid")
}

pub fn indices(p: &SystemParams) -> Vec<PacketIndex> {
    enumerate_indices(p)
}

/// Time grid wide enough for every packet with `k_radius <= 1`.
pub fn frame_grid() -> GridSpec {
    GridSpec::centered(Vec2::zeros(), 0.05, 200).expect("valid grid")
}
