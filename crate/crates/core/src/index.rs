// SPDX-License-Identifier: Apache-2.0

//! Index sets of the covering and the wave packet system, and the per-index
//! geometry: angles, scale/modulation/rotation matrices and phase-space
//! positions.
//!
//! Frequency indices `(j, m, l)` label tiles; packet indices `(j, m, l, k1, k2)`
//! add a point of the truncated translation lattice. `(0, 0, 0)` is the zero
//! block (the low-frequency disk). All enumerations are lexicographic in
//! `(j, l, m, k1, k2)`.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotation, Mat2, Vec2};
use crate::params::SystemParams;

/// Absolute tolerance of the integrality test deciding whether an angle
/// survives to the next scale.
pub const ANGLE_MATCH_TOL: f64 = 1e-9;

/// Slack subtracted before taking ceilings of quantities that are integers in
/// exact arithmetic (e.g. `10 * 2^1`).
const CEIL_SLACK: f64 = 1e-9;

fn ceil_exact(x: f64) -> f64 {
    (x - CEIL_SLACK).ceil()
}

/// A tile label `(j, m, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyIndex {
    pub j: u32,
    pub m: u32,
    pub l: u32,
}

impl FrequencyIndex {
    pub const ZERO: FrequencyIndex = FrequencyIndex { j: 0, m: 0, l: 0 };

    pub fn new(j: u32, m: u32, l: u32) -> Self {
        FrequencyIndex { j, m, l }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    fn key(&self) -> (u32, u32, u32) {
        (self.j, self.l, self.m)
    }
}

impl Ord for FrequencyIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for FrequencyIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.j, self.m, self.l)
    }
}

/// A wave packet label `(j, m, l, k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacketIndex {
    pub j: u32,
    pub m: u32,
    pub l: u32,
    pub k1: i32,
    pub k2: i32,
}

impl PacketIndex {
    pub fn new(freq: FrequencyIndex, k1: i32, k2: i32) -> Self {
        PacketIndex { j: freq.j, m: freq.m, l: freq.l, k1, k2 }
    }

    pub fn freq(&self) -> FrequencyIndex {
        FrequencyIndex { j: self.j, m: self.m, l: self.l }
    }

    pub fn k(&self) -> Vec2 {
        Vec2::new(self.k1 as f64, self.k2 as f64)
    }

    pub fn is_zero_block(&self) -> bool {
        self.freq().is_zero()
    }

    fn key(&self) -> (u32, u32, u32, i32, i32) {
        (self.j, self.l, self.m, self.k1, self.k2)
    }
}

impl Ord for PacketIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for PacketIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PacketIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {}, {})", self.j, self.m, self.l, self.k1, self.k2)
    }
}

fn check_scale(params: &SystemParams, j: u32) -> Result<()> {
    if j == 0 || j > params.j_max {
        return Err(Error::Domain(format!("scale j = {j} outside 1..={}", params.j_max)));
    }
    Ok(())
}

/// Largest angular slot at scale `j`: `ceil(N 2^((1-beta) j)) - 1`.
///
/// Defined for every `j >= 1`, including `j_max + 1`, which the radial slot
/// count of the finest scale refers to.
pub fn l_max(params: &SystemParams, j: u32) -> Result<u32> {
    if j == 0 {
        return Err(Error::Domain("the zero block has no angular slots".into()));
    }
    let n = params.n_sectors as f64;
    Ok(ceil_exact(n * 2f64.powf((1.0 - params.beta) * j as f64)) as u32 - 1)
}

/// Angle `2 pi 2^((beta-1) j) l / N` of slot `l` at scale `j`.
pub fn theta_jl(params: &SystemParams, j: u32, l: u32) -> Result<f64> {
    check_scale(params, j)?;
    let lm = l_max(params, j)?;
    if l > lm {
        return Err(Error::Domain(format!("angular slot l = {l} exceeds l_max({j}) = {lm}")));
    }
    Ok(raw_theta(params, j, l))
}

fn raw_theta(params: &SystemParams, j: u32, l: u32) -> f64 {
    TAU * 2f64.powf((params.beta - 1.0) * j as f64) * l as f64 / params.n_sectors as f64
}

/// Whether `theta_{j,l}` equals some `theta_{j+1,l'}` with `l' <= l_max(j+1)`.
///
/// Decided through the equivalent integrality condition `l 2^(1-beta) in Z`.
pub fn angle_survives(params: &SystemParams, j: u32, l: u32) -> Result<bool> {
    let target = l as f64 * 2f64.powf(1.0 - params.beta);
    let nearest = target.round();
    if (target - nearest).abs() > ANGLE_MATCH_TOL {
        return Ok(false);
    }
    Ok(nearest as u64 <= l_max(params, j + 1)? as u64)
}

/// Largest radial slot of angular slot `l` at scale `j`.
///
/// `ceil(2^((1-alpha) j - 1)) - 1` if the angle survives to scale `j + 1` or
/// `j = j_max`, and `ceil(2^((1-alpha) j - 1))` otherwise.
pub fn m_max(params: &SystemParams, j: u32, l: u32) -> Result<u32> {
    check_scale(params, j)?;
    let lm = l_max(params, j)?;
    if l > lm {
        return Err(Error::Domain(format!("angular slot l = {l} exceeds l_max({j}) = {lm}")));
    }
    let slots = ceil_exact(2f64.powf((1.0 - params.alpha) * j as f64 - 1.0)) as u32;
    if j == params.j_max || angle_survives(params, j, l)? {
        Ok(slots - 1)
    } else {
        Ok(slots)
    }
}

/// The frequency index set: the zero block followed by every admissible
/// `(j, m, l)` in `(j, l, m)` order.
pub fn enumerate_frequency_indices(params: &SystemParams) -> Vec<FrequencyIndex> {
    let mut out = vec![FrequencyIndex::ZERO];
    for j in 1..=params.j_max {
        let lm = l_max(params, j).expect("j >= 1");
        for l in 0..=lm {
            let mm = m_max(params, j, l).expect("indices in range");
            out.extend((0..=mm).map(|m| FrequencyIndex { j, m, l }));
        }
    }
    out
}

/// The truncated packet index set: every frequency index paired with every
/// lattice point `|k|_inf <= k_radius`, in `(j, l, m, k1, k2)` order.
pub fn enumerate_indices(params: &SystemParams) -> Vec<PacketIndex> {
    let k = params.k_radius as i32;
    enumerate_frequency_indices(params)
        .into_iter()
        .flat_map(|f| (-k..=k).flat_map(move |k1| (-k..=k).map(move |k2| PacketIndex::new(f, k1, k2))))
        .collect()
}

/// `A_j = diag(2^(alpha j), 2^(beta j))`.
pub fn scale_matrix(params: &SystemParams, j: u32) -> Mat2 {
    let j = j as f64;
    Mat2::new(2f64.powf(params.alpha * j), 0.0, 0.0, 2f64.powf(params.beta * j))
}

/// `B_jm = (2^(j-1) + m 2^(alpha j), 0)`.
pub fn modulation_vector(params: &SystemParams, j: u32, m: u32) -> Vec2 {
    let jf = j as f64;
    Vec2::new(2f64.powf(jf - 1.0) + m as f64 * 2f64.powf(params.alpha * jf), 0.0)
}

/// Rotation by `theta_jl`.
pub fn rotation_matrix(params: &SystemParams, j: u32, l: u32) -> Mat2 {
    rotation(raw_theta(params, j, l))
}

/// Frequency-plane peak position `xi_i = R_jl B_jm` (zero for the zero block).
pub fn freq_center(params: &SystemParams, f: FrequencyIndex) -> Vec2 {
    if f.is_zero() {
        return Vec2::zeros();
    }
    rotation_matrix(params, f.j, f.l) * modulation_vector(params, f.j, f.m)
}

/// Polar radius `r_i = 2^(j-1) + m 2^(alpha j)` of the frequency peak.
pub fn freq_radius(params: &SystemParams, f: FrequencyIndex) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    modulation_vector(params, f.j, f.m).x
}

/// Polar angle `theta_i` of the frequency peak, in `[0, 2 pi)`.
pub fn freq_angle(params: &SystemParams, f: FrequencyIndex) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    raw_theta(params, f.j, f.l)
}

/// Time-plane position `t_i`: `delta k` for the zero block and
/// `delta R_jl A_j^-1 k` otherwise.
pub fn time_center(params: &SystemParams, i: PacketIndex) -> Vec2 {
    time_lattice_map(params, i.freq()) * i.k()
}

/// The linear map `k -> t_i` of a frequency block.
pub fn time_lattice_map(params: &SystemParams, f: FrequencyIndex) -> Mat2 {
    if f.is_zero() {
        return Mat2::identity() * params.delta;
    }
    let a = scale_matrix(params, f.j);
    let a_inv = Mat2::new(1.0 / a[(0, 0)], 0.0, 0.0, 1.0 / a[(1, 1)]);
    rotation_matrix(params, f.j, f.l) * a_inv * params.delta
}

/// Phase-space coordinates of one packet, cached for pair scans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub radius: f64,
    pub angle: f64,
    pub time: [f64; 2],
}

impl PhaseSpacePoint {
    pub fn of(params: &SystemParams, i: PacketIndex) -> Self {
        let t = time_center(params, i);
        PhaseSpacePoint { radius: freq_radius(params, i.freq()), angle: freq_angle(params, i.freq()), time: [t.x, t.y] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;
    use std::f64::consts::PI;

    fn params(alpha: f64, beta: f64, j_max: u32) -> SystemParams {
        SystemParams { alpha, beta, j_max, ..Default::default() }
    }

    #[test]
    fn theta_examples() {
        let p = params(1.0, 1.0, 3);
        assert_eq!(theta_jl(&p, 1, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(theta_jl(&p, 1, 1).unwrap(), PI / 5.0, epsilon = 1e-15);
        let p = params(0.5, 0.5, 3);
        assert_abs_diff_eq!(theta_jl(&p, 2, 3).unwrap(), 3.0 * PI / 10.0, epsilon = 1e-15);
        assert!(theta_jl(&p, 0, 0).is_err());
        assert!(theta_jl(&p, 4, 0).is_err());
        assert!(theta_jl(&p, 2, 20).is_err());
    }

    #[test]
    fn l_max_examples() {
        assert_eq!(l_max(&params(1.0, 1.0, 2), 1).unwrap(), 9);
        assert_eq!(l_max(&params(0.5, 0.5, 2), 2).unwrap(), 19);
        // 10 * 2^0.7 = 16.2450479271247...
        assert_eq!(l_max(&params(0.5, 0.3, 2), 1).unwrap(), 16);
        assert_eq!(l_max(&params(0.5, 0.5, 2), 1).unwrap(), 14);
        assert!(l_max(&params(0.5, 0.5, 2), 0).is_err());
    }

    #[test]
    fn m_max_examples() {
        // Finest scale always takes the reduced count.
        let p = params(0.5, 0.5, 3);
        for l in 0..=l_max(&p, 3).unwrap() {
            assert_eq!(m_max(&p, 3, l).unwrap(), 2f64.powf(0.5 * 3.0 - 1.0).ceil() as u32 - 1);
        }
        // j = 3, l = 0, alpha = 1/2: 2^((1 - 1/2) 3 - 1) = 2^0.5, ceil = 2, minus one.
        let p = params(0.5, 0.5, 4);
        assert_eq!(m_max(&p, 3, 0).unwrap(), 1);
        // j = 2, l = 1, alpha = beta = 1/2: 1 * sqrt(2) is not an integer.
        assert_eq!(m_max(&p, 2, 1).unwrap(), 1);
        assert!(!angle_survives(&p, 2, 1).unwrap());
        assert!(angle_survives(&p, 2, 0).unwrap());
    }

    #[test]
    fn frequency_count_matches_double_loop() {
        let p = params(0.0, 0.0, 1);
        let mut count = 1;
        for l in 0..20u32 {
            // beta = 0: l * 2 is always an integer and 2l <= l_max(2) = 39.
            let survives = 2 * l <= 39;
            let slots = 1; // ceil(2^(1 - 1)) = 1
            let mm = if survives || p.j_max == 1 { slots - 1 } else { slots };
            count += mm + 1;
        }
        let idx = enumerate_frequency_indices(&p);
        assert_eq!(idx.len(), count as usize);
        assert_eq!(idx[0], FrequencyIndex::ZERO);
    }

    #[test]
    fn frequency_indices_reference_config() {
        let p = params(0.5, 0.5, 1);
        let idx = enumerate_frequency_indices(&p);
        let max_l = idx.iter().filter(|f| f.j == 1).map(|f| f.l).max().unwrap();
        assert_eq!(max_l, 14);
        // j = 1 = j_max: every slot takes the reduced radial count, m = 0 only.
        assert_eq!(idx.len(), 1 + 15);

        let p = params(0.5, 0.5, 2);
        let idx = enumerate_frequency_indices(&p);
        // j = 1: l = 0 -> 1 entry, l = 1..14 -> 2 entries; j = 2 = j_max: 20 slots x 1.
        assert_eq!(idx.len(), 1 + 1 + 28 + 20);
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(sorted, idx);
        let unique: HashSet<_> = idx.iter().collect();
        assert_eq!(unique.len(), idx.len());
    }

    #[test]
    fn packet_indices_are_a_product() {
        let p = SystemParams { j_max: 1, k_radius: 1, ..Default::default() };
        let f = enumerate_frequency_indices(&p);
        let all = enumerate_indices(&p);
        assert_eq!(all.len(), f.len() * 9);
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);

        let p0 = SystemParams { k_radius: 0, ..p };
        assert!(enumerate_indices(&p0).iter().all(|i| i.k1 == 0 && i.k2 == 0));
    }

    #[test]
    fn matrices() {
        let p = params(1.0, 0.0, 3);
        assert_eq!(scale_matrix(&p, 2), Mat2::new(4.0, 0.0, 0.0, 1.0));
        let p = params(0.5, 0.5, 3);
        let b = modulation_vector(&p, 3, 1);
        assert_abs_diff_eq!(b.x, 4.0 + 2f64.powf(1.5), epsilon = 1e-14);
        assert_eq!(b.y, 0.0);
        for j in 1..=3 {
            assert_eq!(rotation_matrix(&p, j, 0), Mat2::identity());
            for l in 0..=l_max(&p, j).unwrap() {
                let r = rotation_matrix(&p, j, l);
                assert!((r * r.transpose() - Mat2::identity()).norm() < 1e-14);
                assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn phase_space_coordinates() {
        let p = SystemParams::default();
        let i = PacketIndex::new(FrequencyIndex::new(1, 0, 0), 0, 0);
        assert_eq!(freq_center(&p, i.freq()), Vec2::new(1.0, 0.0));
        assert_eq!(freq_radius(&p, i.freq()), 1.0);
        assert_eq!(freq_angle(&p, i.freq()), 0.0);

        let z = PacketIndex::new(FrequencyIndex::ZERO, 2, -1);
        assert_eq!(time_center(&p, z), Vec2::new(0.5, -0.25));
        assert_eq!(freq_center(&p, z.freq()), Vec2::zeros());

        let p3 = SystemParams { j_max: 3, ..p };
        let idx = enumerate_frequency_indices(&p3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = idx[rng.random_range(1..idx.len())];
            let xi = freq_center(&p3, f);
            assert_abs_diff_eq!(xi.norm(), freq_radius(&p3, f), epsilon = 1e-12);
            let ang = xi.y.atan2(xi.x).rem_euclid(TAU);
            let diff = (ang - freq_angle(&p3, f)).rem_euclid(TAU);
            assert!(diff < 1e-12 || TAU - diff < 1e-12);
        }
    }

    #[test]
    fn radius_and_angle_bounds() {
        for (a, b) in [(0.0, 0.0), (0.5, 0.5), (0.75, 0.25), (0.9, 0.3)] {
            let p = params(a, b, 3);
            for f in enumerate_frequency_indices(&p).into_iter().skip(1) {
                let r = freq_radius(&p, f);
                let j = f.j as f64;
                assert!(r >= 2f64.powf(j - 1.0));
                assert!(r < 2f64.powf(j) + 2f64.powf(a * j), "{f} r = {r}");
                let th = freq_angle(&p, f);
                assert!((0.0..TAU).contains(&th));
            }
        }
    }

    #[test]
    fn frequency_indices_are_injective() {
        for (a, b) in [(0.0, 0.0), (0.5, 0.5), (0.75, 0.25)] {
            let p = params(a, b, 3);
            let idx = enumerate_frequency_indices(&p);
            for (n, f) in idx.iter().enumerate() {
                for g in &idx[n + 1..] {
                    let same_center = (freq_center(&p, *f) - freq_center(&p, *g)).norm() < 1e-12;
                    let tf = rotation_matrix(&p, f.j, f.l) * scale_matrix(&p, f.j);
                    let tg = rotation_matrix(&p, g.j, g.l) * scale_matrix(&p, g.j);
                    let same_shape = f.is_zero() == g.is_zero() && (tf - tg).norm() < 1e-12;
                    assert!(!(same_center && same_shape), "{f} and {g} coincide");
                }
            }
        }
    }
}
