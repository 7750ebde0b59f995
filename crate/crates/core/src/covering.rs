// SPDX-License-Identifier: Apache-2.0

//! The wave packet covering of the frequency plane.
//!
//! Tile `(0, 0, 0)` is the open disk of radius 4. Every other tile is the image
//! `R_jl (A_j Q + B_jm)` of the open base rectangle
//! `Q = (-eps, 1 + eps) x (-1 - eps, 1 + eps)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Mat2, Rect, Vec2};
use crate::index::{enumerate_frequency_indices, modulation_vector, rotation_matrix, scale_matrix, FrequencyIndex};
use crate::params::SystemParams;

/// Radius of the zero-block disk.
pub const DISK_RADIUS: f64 = 4.0;

/// Slack of the separating-axis and closest-point comparisons.
pub const GEOMETRY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tile {
    Disk {
        radius: f64,
    },
    MappedRectangle {
        /// `T = R A`.
        linear: Mat2,
        /// `T^-1`.
        inverse: Mat2,
        /// `b = R B`.
        offset: Vec2,
        epsilon: f64,
    },
}

/// The tile of frequency index `f`.
pub fn tile(params: &SystemParams, f: FrequencyIndex) -> Tile {
    if f.is_zero() {
        return Tile::Disk { radius: DISK_RADIUS };
    }
    let r = rotation_matrix(params, f.j, f.l);
    let a = scale_matrix(params, f.j);
    let a_inv = Mat2::new(1.0 / a[(0, 0)], 0.0, 0.0, 1.0 / a[(1, 1)]);
    Tile::MappedRectangle {
        linear: r * a,
        inverse: a_inv * r.transpose(),
        offset: r * modulation_vector(params, f.j, f.m),
        epsilon: params.epsilon,
    }
}

/// Tiles of every frequency index, in enumeration order.
pub fn tiles(params: &SystemParams) -> Vec<(FrequencyIndex, Tile)> {
    enumerate_frequency_indices(params).into_iter().map(|f| (f, tile(params, f))).collect()
}

impl Tile {
    /// Strict membership in the open tile.
    pub fn contains(&self, xi: Vec2) -> bool {
        match self {
            Tile::Disk { radius } => xi.norm_squared() < radius * radius,
            Tile::MappedRectangle { inverse, offset, epsilon, .. } => {
                let u = inverse * (xi - offset);
                -epsilon < u.x && u.x < 1.0 + epsilon && u.y.abs() < 1.0 + epsilon
            }
        }
    }

    /// Pull-back of `xi` into base coordinates (`xi` itself for the disk).
    pub fn pull_back(&self, xi: Vec2) -> Vec2 {
        match self {
            Tile::Disk { .. } => xi,
            Tile::MappedRectangle { inverse, offset, .. } => inverse * (xi - offset),
        }
    }

    /// Corners in counter-clockwise order of the base rectangle; empty for the disk.
    pub fn corners(&self) -> Vec<Vec2> {
        match self {
            Tile::Disk { .. } => Vec::new(),
            Tile::MappedRectangle { linear, offset, epsilon, .. } => {
                let (lo, hi) = (-epsilon, 1.0 + epsilon);
                let w = 1.0 + epsilon;
                [(lo, -w), (hi, -w), (hi, w), (lo, w)].iter().map(|&(a, b)| linear * Vec2::new(a, b) + offset).collect()
            }
        }
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Tile::Disk { radius } => Rect::centered(Vec2::zeros(), Vec2::new(*radius, *radius)),
            Tile::MappedRectangle { .. } => Rect::from_points(self.corners()),
        }
    }

    /// Linear part of the affine map generating the tile (`radius * I` for the disk).
    pub fn linear(&self) -> Mat2 {
        match self {
            Tile::Disk { radius } => Mat2::identity() * *radius,
            Tile::MappedRectangle { linear, .. } => *linear,
        }
    }

    /// Area of the open tile.
    pub fn area(&self) -> f64 {
        match self {
            Tile::Disk { radius } => std::f64::consts::PI * radius * radius,
            Tile::MappedRectangle { linear, epsilon, .. } => {
                (1.0 + 2.0 * epsilon) * (2.0 + 2.0 * epsilon) * linear.determinant().abs()
            }
        }
    }

    /// Closures touching within [`GEOMETRY_SLACK`] count as intersecting.
    pub fn intersects(&self, other: &Tile) -> bool {
        match (self, other) {
            (Tile::Disk { radius: a }, Tile::Disk { radius: b }) => a + b > 0.0,
            (Tile::Disk { radius }, rect) | (rect, Tile::Disk { radius }) => {
                polygon_distance_to_origin(&rect.corners()) <= radius + GEOMETRY_SLACK
            }
            _ => polygons_overlap(&self.corners(), &other.corners()),
        }
    }
}

fn edge_normals(poly: &[Vec2]) -> impl Iterator<Item = Vec2> + '_ {
    (0..poly.len()).map(move |n| {
        let e = poly[(n + 1) % poly.len()] - poly[n];
        Vec2::new(-e.y, e.x)
    })
}

fn project(poly: &[Vec2], axis: Vec2) -> (f64, f64) {
    poly.iter().map(|p| p.dot(&axis)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Separating-axis test for two convex polygons.
fn polygons_overlap(a: &[Vec2], b: &[Vec2]) -> bool {
    for axis in edge_normals(a).chain(edge_normals(b)) {
        let n = axis.norm();
        if n == 0.0 {
            continue;
        }
        let axis = axis / n;
        let (alo, ahi) = project(a, axis);
        let (blo, bhi) = project(b, axis);
        if ahi < blo - GEOMETRY_SLACK || bhi < alo - GEOMETRY_SLACK {
            return false;
        }
    }
    true
}

/// Distance from the origin to a convex polygon given counter-clockwise (zero inside).
fn polygon_distance_to_origin(poly: &[Vec2]) -> f64 {
    let inside = (0..poly.len()).all(|n| {
        let (p, q) = (poly[n], poly[(n + 1) % poly.len()]);
        (q - p).perp(&-p) >= 0.0
    });
    if inside {
        return 0.0;
    }
    (0..poly.len())
        .map(|n| {
            let (p, q) = (poly[n], poly[(n + 1) % poly.len()]);
            let e = q - p;
            let s = (-p.dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
            (p + e * s).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Neighbor lists (including the tile itself), each sorted by position.
///
/// Sweep-and-prune over bounding boxes sorted by their lower x edge; only
/// overlapping boxes reach the exact test.
pub fn neighbor_lists(tiles: &[Tile]) -> Vec<Vec<usize>> {
    let boxes: Vec<Rect> = tiles.iter().map(Tile::bbox).collect();
    let mut order: Vec<usize> = (0..tiles.len()).collect();
    order.sort_by(|&a, &b| boxes[a].lo[0].total_cmp(&boxes[b].lo[0]).then(a.cmp(&b)));
    let mut lists = vec![Vec::new(); tiles.len()];
    for (pos, &a) in order.iter().enumerate() {
        lists[a].push(a);
        for &b in &order[pos + 1..] {
            if boxes[b].lo[0] > boxes[a].hi[0] + GEOMETRY_SLACK {
                break;
            }
            let y_overlap =
                boxes[b].lo[1] <= boxes[a].hi[1] + GEOMETRY_SLACK && boxes[a].lo[1] <= boxes[b].hi[1] + GEOMETRY_SLACK;
            if y_overlap && tiles[a].intersects(&tiles[b]) {
                lists[a].push(b);
                lists[b].push(a);
            }
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    lists
}

/// Exhaustive `O(n^2)` neighbor lists.
pub fn brute_force_neighbor_lists(tiles: &[Tile]) -> Vec<Vec<usize>> {
    (0..tiles.len()).map(|a| (0..tiles.len()).filter(|&b| tiles[a].intersects(&tiles[b])).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborStats {
    pub max_neighbors: usize,
    /// Neighbor count -> number of tiles with that count.
    pub histogram: BTreeMap<usize, usize>,
}

impl NeighborStats {
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        let mut histogram = BTreeMap::new();
        for l in lists {
            *histogram.entry(l.len()).or_insert(0) += 1;
        }
        NeighborStats { max_neighbors: lists.iter().map(Vec::len).max().unwrap_or(0), histogram }
    }
}

pub fn neighbor_stats(params: &SystemParams) -> NeighborStats {
    let t: Vec<Tile> = tiles(params).into_iter().map(|(_, t)| t).collect();
    NeighborStats::from_lists(&neighbor_lists(&t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub grid_resolution: usize,
    pub radius: f64,
    pub points_tested: usize,
    pub uncovered: Vec<[f64; 2]>,
    pub min_multiplicity: usize,
    pub max_multiplicity: usize,
    pub origin_multiplicity: usize,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Checks that every node of an endpoint-inclusive `grid x grid` lattice on
/// `[-R1, R1]^2` with `|xi| < R1 = 2^j_max` lies in at least one tile.
pub fn verify_covering(params: &SystemParams, grid_resolution: usize) -> crate::Result<CoverageReport> {
    params.validate_covering()?;
    if grid_resolution < 64 {
        return Err(crate::Error::Domain(format!("grid resolution must be at least 64, got {grid_resolution}")));
    }
    let all: Vec<Tile> = tiles(params).into_iter().map(|(_, t)| t).collect();
    let boxes: Vec<Rect> = all.iter().map(Tile::bbox).collect();
    let radius = params.inner_radius();
    let h = 2.0 * radius / (grid_resolution - 1) as f64;
    let multiplicity = |xi: Vec2| (0..all.len()).filter(|&n| boxes[n].contains(xi) && all[n].contains(xi)).count();

    let rows: Vec<(usize, Vec<[f64; 2]>, usize, usize)> = (0..grid_resolution)
        .into_par_iter()
        .map(|p0| {
            let (mut tested, mut uncovered, mut lo, mut hi) = (0, Vec::new(), usize::MAX, 0);
            for p1 in 0..grid_resolution {
                let xi = Vec2::new(-radius + p0 as f64 * h, -radius + p1 as f64 * h);
                if xi.norm() >= radius {
                    continue;
                }
                tested += 1;
                let m = multiplicity(xi);
                if m == 0 {
                    uncovered.push([xi.x, xi.y]);
                }
                lo = lo.min(m);
                hi = hi.max(m);
            }
            (tested, uncovered, lo, hi)
        })
        .collect();

    let mut report = CoverageReport {
        grid_resolution,
        radius,
        points_tested: 0,
        uncovered: Vec::new(),
        min_multiplicity: usize::MAX,
        max_multiplicity: 0,
        origin_multiplicity: multiplicity(Vec2::zeros()),
    };
    for (tested, uncovered, lo, hi) in rows {
        report.points_tested += tested;
        report.uncovered.extend(uncovered);
        report.min_multiplicity = report.min_multiplicity.min(lo);
        report.max_multiplicity = report.max_multiplicity.max(hi);
    }
    Ok(report)
}

/// `2^(j s)`, and 1 for the zero block.
pub fn weight(f: FrequencyIndex, s: f64) -> f64 {
    if f.is_zero() {
        1.0
    } else {
        2f64.powf(f.j as f64 * s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModerateReport {
    /// `max w_i / w_i'` over intersecting pairs.
    pub constant: f64,
    /// Largest scale gap between intersecting tiles.
    pub max_scale_gap: u32,
    /// `2^(|s| max_scale_gap)`.
    pub bound: f64,
    /// Largest spectral norm of `T_i^-1 T_i'` over intersecting pairs.
    pub max_transition_norm: f64,
}

pub fn verify_moderate(params: &SystemParams, s: f64) -> crate::Result<ModerateReport> {
    params.validate_covering()?;
    let all = tiles(params);
    let t: Vec<Tile> = all.iter().map(|(_, t)| t.clone()).collect();
    let lists = neighbor_lists(&t);
    let mut report = ModerateReport { constant: 1.0, max_scale_gap: 0, bound: 1.0, max_transition_norm: 0.0 };
    for (a, list) in lists.iter().enumerate() {
        let (fa, ta) = &all[a];
        let inv = ta.linear().try_inverse().expect("tile maps are invertible");
        for &b in list {
            let (fb, tb) = &all[b];
            report.constant = report.constant.max(weight(*fa, s) / weight(*fb, s));
            report.max_scale_gap = report.max_scale_gap.max(fa.j.abs_diff(fb.j));
            report.max_transition_norm = report.max_transition_norm.max(spectral_norm(&(inv * tb.linear())));
        }
    }
    report.bound = 2f64.powf(s.abs() * report.max_scale_gap as f64);
    Ok(report)
}

fn spectral_norm(m: &Mat2) -> f64 {
    let g = m.transpose() * m;
    let (tr, det) = (g.trace(), g.determinant());
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 + disc).sqrt()
}
