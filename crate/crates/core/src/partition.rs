// SPDX-License-Identifier: Apache-2.0

//! Smooth partition of unity subordinate to the covering, and the
//! decomposition-space quasi-norm of band-limited signals.
//!
//! Each tile carries a product bump: a smooth step in each pulled-back
//! coordinate, equal to one on the base rectangle `[0, 1] x [-1, 1]` and
//! vanishing at distance `epsilon / 2` from it, so its support stays inside the
//! open tile. The disk carries a radial step with plateau `|xi| <= 3.9`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::covering::{tiles, weight, Tile, DISK_RADIUS};
use crate::error::{Error, Result};
use crate::field::{Domain, SampledField};
use crate::geometry::{Rect, Vec2};
use crate::index::FrequencyIndex;
use crate::params::SystemParams;

/// Smallest admissible value of `sum_i eta_i` on the covered disk.
pub const MIN_DENOMINATOR: f64 = 1e-12;
/// Relative spectral mass tolerated outside the covered disk.
pub const BAND_LIMIT_TAIL: f64 = 1e-10;

const DISK_PLATEAU: f64 = DISK_RADIUS - 0.1;
const DISK_MARGIN: f64 = 0.05;

/// `0` for `x <= 0`, `1` for `x >= 1`, smooth in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Equal to one on `[lo, hi]`, zero outside `(lo - margin, hi + margin)`.
fn plateau(x: f64, lo: f64, hi: f64, margin: f64) -> f64 {
    smooth_step((x - lo + margin) / margin) * smooth_step((hi + margin - x) / margin)
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub params: SystemParams,
    tiles: Vec<(FrequencyIndex, Tile)>,
    boxes: Vec<Rect>,
}

/// Builds the partition and checks that the bumps have no common zero on a
/// grid over the disk of radius `R1`.
pub fn build_partition(params: &SystemParams) -> Result<PartitionOfUnity> {
    params.validate_covering()?;
    let tiles = tiles(params);
    let boxes = tiles.iter().map(|(_, t)| t.bbox()).collect();
    let pou = PartitionOfUnity { params: params.clone(), tiles, boxes };
    let r1 = params.inner_radius();
    let n = 161;
    let worst = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst: Option<(f64, Vec2)> = None;
            for b in 0..n {
                let xi =
                    Vec2::new(-r1 + 2.0 * r1 * a as f64 / (n - 1) as f64, -r1 + 2.0 * r1 * b as f64 / (n - 1) as f64);
                if xi.norm() >= r1 {
                    continue;
                }
                let d = pou.denominator(xi);
                if worst.is_none_or(|(w, _)| d < w) {
                    worst = Some((d, xi));
                }
            }
            worst
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    if let Some((d, xi)) = worst {
        if d < MIN_DENOMINATOR {
            return Err(Error::Partition(format!("bump sum {d:.3e} at ({:.6}, {:.6})", xi.x, xi.y)));
        }
    }
    Ok(pou)
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = FrequencyIndex> + '_ {
        self.tiles.iter().map(|(f, _)| *f)
    }

    /// Unnormalised bump of tile `pos`.
    pub fn bump(&self, pos: usize, xi: Vec2) -> f64 {
        match &self.tiles[pos].1 {
            Tile::Disk { .. } => plateau(xi.norm(), -1.0, DISK_PLATEAU, DISK_MARGIN),
            t @ Tile::MappedRectangle { epsilon, .. } => {
                let u = t.pull_back(xi);
                let m = 0.5 * epsilon;
                plateau(u.x, 0.0, 1.0, m) * plateau(u.y, -1.0, 1.0, m)
            }
        }
    }

    fn candidates(&self, xi: Vec2) -> impl Iterator<Item = usize> + '_ {
        self.boxes.iter().enumerate().filter(move |(_, b)| b.contains(xi)).map(|(p, _)| p)
    }

    pub fn denominator(&self, xi: Vec2) -> f64 {
        self.candidates(xi).map(|p| self.bump(p, xi)).sum()
    }

    /// Non-zero values `(position, phi_i(xi))`.
    pub fn eval_all(&self, xi: Vec2) -> Result<Vec<(usize, f64)>> {
        let vals: Vec<(usize, f64)> =
            self.candidates(xi).map(|p| (p, self.bump(p, xi))).filter(|(_, v)| *v > 0.0).collect();
        let d: f64 = vals.iter().map(|(_, v)| v).sum();
        if d < MIN_DENOMINATOR {
            return Err(Error::Partition(format!("({}, {}) is not covered", xi.x, xi.y)));
        }
        Ok(vals.into_iter().map(|(p, v)| (p, v / d)).collect())
    }

    /// `phi_i(xi)` for the tile at position `pos`.
    pub fn eval(&self, pos: usize, xi: Vec2) -> Result<f64> {
        Ok(self.eval_all(xi)?.into_iter().find(|(p, _)| *p == pos).map_or(0.0, |(_, v)| v))
    }
}

/// Spectrum of `f` on its centred reciprocal grid, after checking that it is
/// negligible outside the disk of radius `radius`.
pub fn band_limited_spectrum(f: &SampledField, radius: f64) -> Result<SampledField> {
    if f.domain != Domain::Time {
        return Err(Error::Domain("expected a time-domain field".into()));
    }
    let spec = f.forward_transform(f.grid.centered_reciprocal_origin());
    let peak = spec.max_abs();
    let [n0, n1] = spec.grid.counts;
    let mut outside = 0.0f64;
    for q0 in 0..n0 {
        for q1 in 0..n1 {
            if spec.grid.point(q0, q1).norm() >= radius {
                outside = outside.max(spec.at(q0, q1).norm());
            }
        }
    }
    if outside > BAND_LIMIT_TAIL * peak {
        return Err(Error::NotBandLimited(format!(
            "spectral modulus {:.3e} of the peak outside |xi| < {radius}",
            outside / peak
        )));
    }
    Ok(spec)
}

/// Decomposition-space quasi-norm
/// `( sum_i (w_i^s |F^-1(phi_i f^)|_p)^q )^(1/q)` of a band-limited signal.
pub fn decomposition_norm(f: &SampledField, pou: &PartitionOfUnity, s: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Domain(format!("exponents must lie in (0, inf], got p = {p}, q = {q}")));
    }
    let spec = band_limited_spectrum(f, pou.params.inner_radius())?;
    let g = spec.grid;
    let [n0, n1] = g.counts;
    let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pou.len()];
    for q0 in 0..n0 {
        for q1 in 0..n1 {
            let node = q0 * n1 + q1;
            if spec.values[node] == Complex64::new(0.0, 0.0) {
                continue;
            }
            // outside the covered region the spectrum is already negligible
            if let Ok(vals) = pou.eval_all(g.point(q0, q1)) {
                for (pos, v) in vals {
                    weights[pos].push((node, v));
                }
            }
        }
    }
    let pieces: Vec<f64> = weights
        .par_iter()
        .zip(pou.tiles.par_iter())
        .map(|(w, (freq, _))| {
            if w.is_empty() {
                return 0.0;
            }
            let mut piece = SampledField::zeros(g, Domain::Freq);
            for &(node, v) in w {
                piece.values[node] = spec.values[node] * v;
            }
            weight(*freq, s) * piece.inverse_transform(f.grid.origin).lp_norm(p)
        })
        .collect();
    Ok(if q.is_infinite() {
        pieces.into_iter().fold(0.0, f64::max)
    } else {
        pieces.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}
