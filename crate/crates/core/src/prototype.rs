// SPDX-License-Identifier: Apache-2.0

//! Prototype functions `gamma` (zero block) and `psi` (all other blocks).
//!
//! A prototype is a pair of a time-domain function and its continuous Fourier
//! transform together with the bookkeeping the quadrature code needs: where the
//! function lives, how large its transform gets and how fast it decays.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::unit_phase;
use crate::geometry::Vec2;

/// Disk outside of which a function is below a relative tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub center: Vec2,
    pub radius: f64,
}

pub trait Prototype: Send + Sync + fmt::Debug {
    fn label(&self) -> &str;

    fn time_eval(&self, t: Vec2) -> Complex64;

    /// Continuous Fourier transform of [`time_eval`](Self::time_eval).
    fn freq_eval(&self, xi: Vec2) -> Complex64;

    /// Spatial decay exponent; `inf` for superpolynomial decay.
    fn kappa0(&self) -> f64;

    /// Frequency decay exponent; `inf` for superpolynomial decay.
    fn kappa(&self) -> f64;

    /// Disk outside which `|time_eval| <= tail * sup |time_eval|`.
    fn time_support(&self, tail: f64) -> Support;

    /// Disk outside which `|freq_eval| <= tail * sup |freq_eval|`.
    fn freq_support(&self, tail: f64) -> Support;

    /// `sup |freq_eval|`.
    fn freq_sup(&self) -> f64;

    /// `int |freq_eval|`.
    fn freq_l1(&self) -> f64;

    /// `int |time_eval|^2`.
    fn energy(&self) -> f64;
}

/// `e^{-pi |xi - c|^2}` in frequency, `e^{2 pi i <c, t>} e^{-pi |t|^2}` in time.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    pub label: String,
    pub freq_center: Vec2,
}

impl Gaussian {
    pub fn new(label: impl Into<String>, freq_center: Vec2) -> Self {
        Gaussian { label: label.into(), freq_center }
    }

    fn radius(tail: f64) -> f64 {
        let tail = tail.clamp(f64::MIN_POSITIVE, 1.0);
        ((1.0 / tail).ln() / PI).sqrt()
    }
}

impl Prototype for Gaussian {
    fn label(&self) -> &str {
        &self.label
    }

    fn time_eval(&self, t: Vec2) -> Complex64 {
        unit_phase(self.freq_center.dot(&t)) * (-PI * t.norm_squared()).exp()
    }

    fn freq_eval(&self, xi: Vec2) -> Complex64 {
        Complex64::new((-PI * (xi - self.freq_center).norm_squared()).exp(), 0.0)
    }

    fn kappa0(&self) -> f64 {
        f64::INFINITY
    }

    fn kappa(&self) -> f64 {
        f64::INFINITY
    }

    fn time_support(&self, tail: f64) -> Support {
        Support { center: Vec2::zeros(), radius: Self::radius(tail) }
    }

    fn freq_support(&self, tail: f64) -> Support {
        Support { center: self.freq_center, radius: Self::radius(tail) }
    }

    fn freq_sup(&self) -> f64 {
        1.0
    }

    fn freq_l1(&self) -> f64 {
        1.0
    }

    fn energy(&self) -> f64 {
        0.5
    }
}

/// `gamma(t) = e^{-pi |t|^2}`.
pub fn default_gamma() -> Gaussian {
    Gaussian::new("gaussian", Vec2::zeros())
}

/// `psi^(xi) = e^{-pi ((xi_1 - 1/2)^2 + xi_2^2)}`, centred on the base rectangle.
pub fn default_psi() -> Gaussian {
    Gaussian::new("gaussian", Vec2::new(0.5, 0.0))
}

/// The prototype pair of a wave packet system.
#[derive(Clone, Debug)]
pub struct Prototypes {
    pub gamma: Arc<dyn Prototype>,
    pub psi: Arc<dyn Prototype>,
}

impl Prototypes {
    pub fn gaussian() -> Self {
        Prototypes { gamma: Arc::new(default_gamma()), psi: Arc::new(default_psi()) }
    }

    /// Built-in prototype pair by name. Only `"gaussian"` exists.
    pub fn from_label(label: &str) -> Result<Self> {
        match label {
            "gaussian" => Ok(Self::gaussian()),
            other => Err(Error::InvalidParams(format!("unknown prototype {other:?} (available: gaussian)"))),
        }
    }

    pub fn label(&self) -> &str {
        self.psi.label()
    }
}

impl Default for Prototypes {
    fn default() -> Self {
        Self::gaussian()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Time,
    Freq,
}

fn eval(proto: &dyn Prototype, side: Side, x: Vec2) -> Complex64 {
    match side {
        Side::Time => proto.time_eval(x),
        Side::Freq => proto.freq_eval(x),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub supremum: f64,
    pub argmax_radius: f64,
}

/// Number of directions sampled by [`verify_decay`].
pub const DECAY_DIRECTIONS: usize = 16;

/// Estimates `sup (1 + |x|)^exponent |f(x)|` over `sample_count` log-spaced
/// radii in `[1e-3, 64]` (plus the origin) along [`DECAY_DIRECTIONS`] rays.
pub fn verify_decay(proto: &dyn Prototype, side: Side, exponent: f64, sample_count: usize) -> Result<DecayEstimate> {
    if !(exponent >= 0.0) {
        return Err(Error::Domain(format!("decay exponent must be non-negative, got {exponent}")));
    }
    if sample_count < 2 {
        return Err(Error::Domain("need at least two radial samples".into()));
    }
    let (r_lo, r_hi) = (1e-3f64, 64.0f64);
    let ratio = (r_hi / r_lo).ln() / (sample_count - 1) as f64;
    let mut best = DecayEstimate { supremum: eval(proto, side, Vec2::zeros()).norm(), argmax_radius: 0.0 };
    for d in 0..DECAY_DIRECTIONS {
        let (s, c) = (2.0 * PI * d as f64 / DECAY_DIRECTIONS as f64).sin_cos();
        for n in 0..sample_count {
            let r = r_lo * (ratio * n as f64).exp();
            // log form avoids overflow of (1 + r)^exponent
            let m = eval(proto, side, Vec2::new(c * r, s * r)).norm();
            if m == 0.0 {
                continue;
            }
            let v = (exponent * r.ln_1p() + m.ln()).exp();
            if v > best.supremum {
                best = DecayEstimate { supremum: v, argmax_radius: r };
            }
        }
    }
    Ok(best)
}

/// Compact frequency regions on which a prototype transform must not vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Closed disk of radius 4 about the origin.
    Disk4,
    /// `[-eps, 1 + eps] x [-1 - eps, 1 + eps]`.
    BaseRectangle { epsilon: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonvanishingReport {
    pub min_abs: f64,
    pub argmin: [f64; 2],
}

/// Minimum of `|freq_eval|` over an endpoint-inclusive `grid x grid` lattice of
/// the region's bounding box restricted to the region. For the disk the
/// boundary circle is sampled as well.
pub fn verify_nonvanishing(proto: &dyn Prototype, region: Region, grid: usize) -> Result<NonvanishingReport> {
    if grid < 2 {
        return Err(Error::Domain("need at least a 2 x 2 grid".into()));
    }
    let (lo, hi) = match region {
        Region::Disk4 => ([-4.0, -4.0], [4.0, 4.0]),
        Region::BaseRectangle { epsilon } => ([-epsilon, -1.0 - epsilon], [1.0 + epsilon, 1.0 + epsilon]),
    };
    let mut best = NonvanishingReport { min_abs: f64::INFINITY, argmin: [0.0; 2] };
    let mut visit = |x: Vec2| {
        let v = proto.freq_eval(x).norm();
        if v < best.min_abs {
            best = NonvanishingReport { min_abs: v, argmin: [x.x, x.y] };
        }
    };
    let step = |a: usize| (hi[a] - lo[a]) / (grid - 1) as f64;
    for p0 in 0..grid {
        for p1 in 0..grid {
            let x = Vec2::new(lo[0] + p0 as f64 * step(0), lo[1] + p1 as f64 * step(1));
            if matches!(region, Region::Disk4) && x.norm() > 4.0 {
                continue;
            }
            visit(x);
        }
    }
    if matches!(region, Region::Disk4) {
        for n in 0..4 * grid {
            let (s, c) = (2.0 * PI * n as f64 / (4 * grid) as f64).sin_cos();
            visit(Vec2::new(4.0 * c, 4.0 * s));
        }
    }
    Ok(best)
}
