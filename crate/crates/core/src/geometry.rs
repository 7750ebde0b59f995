// SPDX-License-Identifier: Apache-2.0

//! Small planar helpers shared by the covering, packet and quadrature code.

use serde::{Deserialize, Serialize};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Counter-clockwise rotation by `angle` radians.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Euclidean lengths of the two rows of `m`.
///
/// The axis-aligned bounding box of the ellipse `{m u : |u| <= r}` has
/// half-widths `r * row_norms(m)`.
pub fn row_norms(m: &Mat2) -> Vec2 {
    Vec2::new(m[(0, 0)].hypot(m[(0, 1)]), m[(1, 0)].hypot(m[(1, 1)]))
}

/// Closed axis-aligned rectangle `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn centered(center: Vec2, half_widths: Vec2) -> Self {
        Rect {
            lo: [center.x - half_widths.x, center.y - half_widths.y],
            hi: [center.x + half_widths.x, center.y + half_widths.y],
        }
    }

    pub fn from_points<I: IntoIterator<Item = Vec2>>(points: I) -> Self {
        let mut r = Rect { lo: [f64::INFINITY; 2], hi: [f64::NEG_INFINITY; 2] };
        for p in points {
            for a in 0..2 {
                r.lo[a] = r.lo[a].min(p[a]);
                r.hi[a] = r.hi[a].max(p[a]);
            }
        }
        r
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1]))
    }

    pub fn is_empty(&self) -> bool {
        self.lo[0] > self.hi[0] || self.lo[1] > self.hi[1]
    }

    pub fn intersection(&self, other: &Rect) -> Rect {
        Rect {
            lo: [self.lo[0].max(other.lo[0]), self.lo[1].max(other.lo[1])],
            hi: [self.hi[0].min(other.hi[0]), self.hi[1].min(other.hi[1])],
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            lo: [self.lo[0].min(other.lo[0]), self.lo[1].min(other.lo[1])],
            hi: [self.hi[0].max(other.hi[0]), self.hi[1].max(other.hi[1])],
        }
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        !self.intersection(other).is_empty()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.lo[0] && p.x <= self.hi[0] && p.y >= self.lo[1] && p.y <= self.hi[1]
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.lo[0] >= self.lo[0] && other.lo[1] >= self.lo[1] && other.hi[0] <= self.hi[0] && other.hi[1] <= self.hi[1]
    }
}
