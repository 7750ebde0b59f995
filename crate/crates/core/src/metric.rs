// SPDX-License-Identifier: Apache-2.0

//! The phase-space distance `rho = r + theta + t1 + t2` between packet indices
//! and the numerical checks of its metric, separation and summability
//! properties.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{PacketIndex, PhaseSpacePoint};
use crate::params::SystemParams;

/// Tolerance of the metric axiom checks.
pub const AXIOM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBreakdown {
    pub r_component: f64,
    pub theta_component: f64,
    pub t1_component: f64,
    pub t2_component: f64,
    pub total: f64,
}

impl DistanceBreakdown {
    pub const ZERO: DistanceBreakdown =
        DistanceBreakdown { r_component: 0.0, theta_component: 0.0, t1_component: 0.0, t2_component: 0.0, total: 0.0 };
}

/// Angular difference wrapped into `[0, pi]`.
pub fn wrapped_angle(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d).clamp(0.0, PI)
}

/// Distance between two cached phase-space points. Every component is an
/// absolute difference, so the result is bitwise symmetric.
#[inline]
pub fn rho_points(a: &PhaseSpacePoint, b: &PhaseSpacePoint) -> DistanceBreakdown {
    let r = (a.radius - b.radius).abs();
    let theta = wrapped_angle(a.angle, b.angle);
    let t1 = (a.time[0] - b.time[0]).abs();
    let t2 = (a.time[1] - b.time[1]).abs();
    DistanceBreakdown {
        r_component: r,
        theta_component: theta,
        t1_component: t1,
        t2_component: t2,
        total: r + theta + t1 + t2,
    }
}

pub fn rho(i: PacketIndex, i2: PacketIndex, params: &SystemParams) -> DistanceBreakdown {
    rho_points(&PhaseSpacePoint::of(params, i), &PhaseSpacePoint::of(params, i2))
}

fn points(indices: &[PacketIndex], params: &SystemParams) -> Vec<PhaseSpacePoint> {
    indices.iter().map(|&i| PhaseSpacePoint::of(params, i)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub pairs_checked: u64,
    pub negative: u64,
    pub asymmetric: u64,
    /// `rho(i, i) != 0`.
    pub nonzero_self_distance: u64,
    /// Distinct indices at distance `<= AXIOM_TOL`.
    pub indiscernible: u64,
    pub triangle_trials: u64,
    pub triangle_violations: u64,
    /// Largest `rho(a, c) - rho(a, b) - rho(b, c)` seen.
    pub worst_triangle_excess: f64,
}

impl AxiomReport {
    pub fn violations(&self) -> u64 {
        self.negative + self.asymmetric + self.nonzero_self_distance + self.indiscernible + self.triangle_violations
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Exhaustive pair checks plus `trials` seeded random triangle triples.
pub fn check_metric_axioms(indices: &[PacketIndex], params: &SystemParams, trials: u64, seed: u64) -> AxiomReport {
    let pts = points(indices, params);
    let n = pts.len();
    let rows: Vec<[u64; 5]> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut c = [0u64; 5];
            let self_d = rho_points(&pts[a], &pts[a]).total;
            if self_d != 0.0 {
                c[3] += 1;
            }
            for b in a + 1..n {
                let d = rho_points(&pts[a], &pts[b]);
                let back = rho_points(&pts[b], &pts[a]);
                c[0] += 1;
                let parts = [d.r_component, d.theta_component, d.t1_component, d.t2_component, d.total];
                if parts.iter().any(|&x| x < 0.0) {
                    c[1] += 1;
                }
                if d.total.to_bits() != back.total.to_bits() {
                    c[2] += 1;
                }
                if d.total <= AXIOM_TOL && indices[a] != indices[b] {
                    c[4] += 1;
                }
            }
            c
        })
        .collect();
    let mut report = AxiomReport {
        pairs_checked: 0,
        negative: 0,
        asymmetric: 0,
        nonzero_self_distance: 0,
        indiscernible: 0,
        triangle_trials: trials,
        triangle_violations: 0,
        worst_triangle_excess: f64::NEG_INFINITY,
    };
    for c in rows {
        report.pairs_checked += c[0];
        report.negative += c[1];
        report.asymmetric += c[2];
        report.nonzero_self_distance += c[3];
        report.indiscernible += c[4];
    }
    if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            let excess = rho_points(&pts[a], &pts[c]).total
                - rho_points(&pts[a], &pts[b]).total
                - rho_points(&pts[b], &pts[c]).total;
            report.worst_triangle_excess = report.worst_triangle_excess.max(excess);
            if excess > AXIOM_TOL {
                report.triangle_violations += 1;
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// `min rho` over distinct pairs.
    pub infimum: f64,
    pub infimum_pair: (PacketIndex, PacketIndex),
    /// `min (r + theta)` over pairs in different blocks; `inf` with one block.
    pub c1: f64,
    /// `min rho` over distinct pairs in the same block; `inf` without such pairs.
    pub same_block_min: f64,
    /// `delta 2^-(alpha j_max + 1)`.
    pub lattice_bound: f64,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.infimum > 0.0
            && self.infimum >= self.c1.min(self.lattice_bound)
            && self.same_block_min >= self.lattice_bound
    }
}

pub fn lattice_bound(params: &SystemParams) -> f64 {
    params.delta * 2f64.powf(-(params.alpha * params.j_max as f64 + 1.0))
}

pub fn separation(indices: &[PacketIndex], params: &SystemParams) -> Result<SeparationReport> {
    if indices.len() < 2 {
        return Err(Error::Domain("separation needs at least two indices".into()));
    }
    let pts = points(indices, params);
    let n = pts.len();
    // (infimum, a, b, c1, same_block_min) per row, merged in row order.
    let rows: Vec<(f64, usize, usize, f64, f64)> = (0..n - 1)
        .into_par_iter()
        .map(|a| {
            let (mut inf, mut arg, mut c1, mut same) = (f64::INFINITY, a + 1, f64::INFINITY, f64::INFINITY);
            for b in a + 1..n {
                let d = rho_points(&pts[a], &pts[b]);
                if d.total < inf {
                    inf = d.total;
                    arg = b;
                }
                if indices[a].freq() == indices[b].freq() {
                    same = same.min(d.total);
                } else {
                    c1 = c1.min(d.r_component + d.theta_component);
                }
            }
            (inf, a, arg, c1, same)
        })
        .collect();
    let mut report = SeparationReport {
        infimum: f64::INFINITY,
        infimum_pair: (indices[0], indices[1]),
        c1: f64::INFINITY,
        same_block_min: f64::INFINITY,
        lattice_bound: lattice_bound(params),
    };
    for (inf, a, b, c1, same) in rows {
        if inf < report.infimum {
            report.infimum = inf;
            report.infimum_pair = (indices[a], indices[b]);
        }
        report.c1 = report.c1.min(c1);
        report.same_block_min = report.same_block_min.min(same);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub exponent: f64,
    pub sup_row_sum: f64,
    pub argmax: PacketIndex,
}

/// `max_i sum_i' (1 + rho(i, i'))^-n` over the given set.
pub fn summability(indices: &[PacketIndex], params: &SystemParams, n: f64) -> Result<SummabilityReport> {
    if !(n > 5.0) {
        return Err(Error::Domain(format!("summability exponent must exceed 5, got {n}")));
    }
    if indices.is_empty() {
        return Err(Error::Domain("empty index set".into()));
    }
    let pts = points(indices, params);
    let integral = n == n.round() && n <= 64.0;
    let sums: Vec<f64> = pts
        .par_iter()
        .map(|a| {
            pts.iter()
                .map(|b| {
                    let x = 1.0 / (1.0 + rho_points(a, b).total);
                    if integral {
                        x.powi(n as i32)
                    } else {
                        x.powf(n)
                    }
                })
                .sum()
        })
        .collect();
    let (pos, &sup) =
        sums.iter().enumerate().fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(SummabilityReport { exponent: n, sup_row_sum: sup, argmax: indices[pos] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_indices, FrequencyIndex};
    use proptest::prelude::*;

    fn reference() -> (SystemParams, Vec<PacketIndex>) {
        let p = SystemParams::default();
        let idx = enumerate_indices(&p);
        (p, idx)
    }

    #[test]
    fn examples() {
        let p = SystemParams::default();
        let i = PacketIndex::new(FrequencyIndex::new(2, 0, 5), 1, -2);
        assert_eq!(rho(i, i, &p), DistanceBreakdown::ZERO);

        let a = PacketIndex::new(FrequencyIndex::ZERO, 0, 0);
        let b = PacketIndex::new(FrequencyIndex::ZERO, 1, 0);
        let d = rho(a, b, &p);
        assert_eq!(d.total, 0.25);
        assert_eq!(d.t1_component, 0.25);

        let a = PacketIndex::new(FrequencyIndex::new(1, 0, 0), 0, 0);
        let b = PacketIndex::new(FrequencyIndex::new(2, 0, 0), 0, 0);
        let d = rho(a, b, &p);
        assert_eq!((d.r_component, d.theta_component, d.total), (1.0, 0.0, 1.0));
    }

    #[test]
    fn angle_wraps() {
        assert!((wrapped_angle(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(wrapped_angle(0.0, PI), PI);
    }

    #[test]
    fn axioms_reference() {
        let (p, idx) = reference();
        let r = check_metric_axioms(&idx, &p, 100_000, 1);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.pairs_checked as usize, idx.len() * (idx.len() - 1) / 2);
    }

    #[test]
    fn separation_reference() {
        let (p, idx) = reference();
        let r = separation(&idx, &p).unwrap();
        assert_eq!(r.lattice_bound, 0.0625);
        assert!(r.infimum > 0.0);
        assert!(r.same_block_min >= r.lattice_bound);
        assert!(r.passed(), "{r:?}");

        // brute-force oracle
        let mut inf = f64::INFINITY;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                inf = inf.min(rho(idx[a], idx[b], &p).total);
            }
        }
        assert_eq!(inf, r.infimum);
        assert!(separation(&idx[..1], &p).is_err());
    }

    #[test]
    fn same_block_minimum_scales_with_delta() {
        let (p, idx) = reference();
        let half = SystemParams { delta: p.delta / 2.0, ..p.clone() };
        let a = separation(&idx, &p).unwrap().same_block_min;
        let b = separation(&idx, &half).unwrap().same_block_min;
        assert_eq!(b, a / 2.0);
    }

    #[test]
    fn summability_basics() {
        let p = SystemParams::default();
        let one = [PacketIndex::new(FrequencyIndex::ZERO, 0, 0)];
        assert_eq!(summability(&one, &p, 6.0).unwrap().sup_row_sum, 1.0);
        assert!(summability(&one, &p, 5.0).is_err());

        let mut last = 0.0;
        for k in [1, 2, 4] {
            let pk = SystemParams { k_radius: k, j_max: 1, ..p.clone() };
            let s = summability(&enumerate_indices(&pk), &pk, 6.0).unwrap().sup_row_sum;
            assert!(s >= last);
            last = s;
        }
    }

    proptest! {
        #[test]
        fn lattice_translation_invariance(pos in 0usize..50, k1 in -2i32..=-1, k2 in -2i32..=-1,
                                          d1 in 0i32..=2, d2 in 0i32..=2) {
            let p = SystemParams::default();
            let f = crate::index::enumerate_frequency_indices(&p)[pos];
            let a = PacketIndex::new(f, k1, k2);
            let b = PacketIndex::new(f, k1 + d1, k2 + d2);
            let a2 = PacketIndex::new(f, k1 + 1, k2 + 1);
            let b2 = PacketIndex::new(f, k1 + d1 + 1, k2 + d2 + 1);
            let x = rho(a, b, &p).total;
            let y = rho(a2, b2, &p).total;
            prop_assert!((x - y).abs() < 1e-12);
        }

        #[test]
        fn triangle_on_random_triples(a in 0usize..1250, b in 0usize..1250, c in 0usize..1250) {
            let (p, idx) = reference();
            let ac = rho(idx[a], idx[c], &p).total;
            let ab = rho(idx[a], idx[b], &p).total;
            let bc = rho(idx[b], idx[c], &p).total;
            prop_assert!(ac <= ab + bc + AXIOM_TOL);
        }
    }
}
