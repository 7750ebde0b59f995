// SPDX-License-Identifier: Apache-2.0

//! Complex fields sampled on uniform Cartesian grids, their on-disk format and
//! the discrete approximation of the continuous Fourier transform
//! `f^(xi) = int f(t) e^{-2 pi i <t, xi>} dt`.
//!
//! Binary layout (all little-endian): `u32 n0`, `u32 n1`, `f64 h0`, `f64 h1`,
//! then `n0 * n1` interleaved `(re, im)` pairs of `f64` in row-major order (axis 1
//! varies fastest). The grid origin and the remaining metadata live in a JSON
//! sidecar next to the binary file (`<file>.json`).

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fft2;
use crate::geometry::{Rect, Vec2};

pub const HEADER_LEN: usize = 24;

/// Uniform grid: point `p = (p0, p1)` sits at `origin + (p0 h0, p1 h1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub step: [f64; 2],
    pub counts: [usize; 2],
}

impl GridSpec {
    pub fn new(origin: [f64; 2], step: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        let g = GridSpec { origin, step, counts };
        g.validate()?;
        Ok(g)
    }

    /// `n x n` grid with step `h` whose nodes are symmetric about `center`
    /// (`center` itself is the node `(n/2, n/2)` for even `n`).
    pub fn centered(center: Vec2, step: f64, n: usize) -> Result<Self> {
        let half = (n / 2) as f64 * step;
        GridSpec::new([center.x - half, center.y - half], [step, step], [n, n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts[0] < 2 || self.counts[1] < 2 {
            return Err(Error::Format(format!("grid needs at least 2 nodes per axis, got {:?}", self.counts)));
        }
        if !(self.step[0] > 0.0 && self.step[1] > 0.0 && self.step.iter().all(|h| h.is_finite())) {
            return Err(Error::Format(format!("grid steps must be positive, got {:?}", self.step)));
        }
        if !self.origin.iter().all(|o| o.is_finite()) {
            return Err(Error::Format("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, p0: usize, p1: usize) -> Vec2 {
        Vec2::new(self.origin[0] + p0 as f64 * self.step[0], self.origin[1] + p1 as f64 * self.step[1])
    }

    pub fn cell_area(&self) -> f64 {
        self.step[0] * self.step[1]
    }

    /// Closed rectangle spanned by the nodes.
    pub fn extent(&self) -> Rect {
        Rect {
            lo: self.origin,
            hi: [
                self.origin[0] + (self.counts[0] - 1) as f64 * self.step[0],
                self.origin[1] + (self.counts[1] - 1) as f64 * self.step[1],
            ],
        }
    }

    /// Steps of the reciprocal grid used by the discrete transform.
    pub fn reciprocal_step(&self) -> [f64; 2] {
        [1.0 / (self.counts[0] as f64 * self.step[0]), 1.0 / (self.counts[1] as f64 * self.step[1])]
    }

    /// Origin of the reciprocal grid that is symmetric about zero.
    pub fn centered_reciprocal_origin(&self) -> [f64; 2] {
        let d = self.reciprocal_step();
        [-((self.counts[0] / 2) as f64) * d[0], -((self.counts[1] / 2) as f64) * d[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Freq,
}

/// Values of a complex function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub domain: Domain,
    /// Row-major, axis 1 fastest.
    pub values: Vec<Complex64>,
    /// Largest boundary modulus relative to the largest modulus, when checked.
    pub boundary_ratio: Option<f64>,
}

/// JSON sidecar describing a binary field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub origin: [f64; 2],
    pub step: [f64; 2],
    pub counts: [usize; 2],
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_ratio: Option<f64>,
}

impl SampledField {
    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        SampledField { grid, domain, values: vec![Complex64::new(0.0, 0.0); grid.len()], boundary_ratio: None }
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(Vec2) -> Complex64>(grid: GridSpec, domain: Domain, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for p0 in 0..grid.counts[0] {
            for p1 in 0..grid.counts[1] {
                values.push(f(grid.point(p0, p1)));
            }
        }
        SampledField { grid, domain, values, boundary_ratio: None }
    }

    pub fn at(&self, p0: usize, p1: usize) -> Complex64 {
        self.values[p0 * self.grid.counts[1] + p1]
    }

    /// Riemann-sum inner product `h0 h1 sum conj(self) other`.
    pub fn inner(&self, other: &SampledField) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_area()
    }

    /// Riemann-sum `L^p` norm; `p = inf` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_area()).powf(1.0 / p)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of nodes divided by the largest
    /// modulus overall (zero for an all-zero field).
    pub fn compute_boundary_ratio(&self) -> f64 {
        let [n0, n1] = self.grid.counts;
        let mut edge = 0.0f64;
        for p0 in 0..n0 {
            for p1 in 0..n1 {
                if p0 == 0 || p1 == 0 || p0 == n0 - 1 || p1 == n1 - 1 {
                    edge = edge.max(self.at(p0, p1).norm());
                }
            }
        }
        let max = self.max_abs();
        if max == 0.0 {
            0.0
        } else {
            edge / max
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// Discrete approximation of the continuous Fourier transform on the
    /// reciprocal grid starting at `freq_origin`.
    ///
    /// Exact (up to rounding) for functions supported inside the window whose
    /// transform is supported inside a reciprocal period.
    pub fn forward_transform(&self, freq_origin: [f64; 2]) -> SampledField {
        let g = self.grid;
        let d = g.reciprocal_step();
        let [n0, n1] = g.counts;
        let pre: [Vec<Complex64>; 2] =
            [0, 1].map(|a| (0..g.counts[a]).map(|p| unit_phase(-(p as f64) * g.step[a] * freq_origin[a])).collect());
        let post: [Vec<Complex64>; 2] = [0, 1]
            .map(|a| (0..g.counts[a]).map(|q| unit_phase(-g.origin[a] * (freq_origin[a] + q as f64 * d[a]))).collect());
        let mut data = self.values.clone();
        for p0 in 0..n0 {
            for p1 in 0..n1 {
                data[p0 * n1 + p1] *= pre[0][p0] * pre[1][p1];
            }
        }
        fft2(&mut data, n0, n1, FftDirection::Forward);
        let area = g.cell_area();
        for q0 in 0..n0 {
            for q1 in 0..n1 {
                data[q0 * n1 + q1] *= post[0][q0] * post[1][q1] * area;
            }
        }
        SampledField {
            grid: GridSpec { origin: freq_origin, step: d, counts: g.counts },
            domain: Domain::Freq,
            values: data,
            boundary_ratio: None,
        }
    }

    /// Exact inverse of [`forward_transform`](Self::forward_transform): maps a
    /// reciprocal-grid field back to the grid starting at `time_origin`.
    pub fn inverse_transform(&self, time_origin: [f64; 2]) -> SampledField {
        let g = self.grid;
        let h = g.reciprocal_step();
        let [n0, n1] = g.counts;
        let pre: [Vec<Complex64>; 2] =
            [0, 1].map(|a| (0..g.counts[a]).map(|q| unit_phase(time_origin[a] * q as f64 * g.step[a])).collect());
        let post: [Vec<Complex64>; 2] = [0, 1]
            .map(|a| (0..g.counts[a]).map(|p| unit_phase((time_origin[a] + p as f64 * h[a]) * g.origin[a])).collect());
        let mut data = self.values.clone();
        for q0 in 0..n0 {
            for q1 in 0..n1 {
                data[q0 * n1 + q1] *= pre[0][q0] * pre[1][q1];
            }
        }
        fft2(&mut data, n0, n1, FftDirection::Inverse);
        let area = g.cell_area();
        for p0 in 0..n0 {
            for p1 in 0..n1 {
                data[p0 * n1 + p1] *= post[0][p0] * post[1][p1] * area;
            }
        }
        SampledField {
            grid: GridSpec { origin: time_origin, step: h, counts: g.counts },
            domain: Domain::Time,
            values: data,
            boundary_ratio: None,
        }
    }

    pub fn sidecar(&self) -> FieldSidecar {
        FieldSidecar {
            origin: self.grid.origin,
            step: self.grid.step,
            counts: self.grid.counts,
            domain: self.domain,
            boundary_ratio: self.boundary_ratio,
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let [n0, n1] = self.grid.counts;
        let to_u32 = |n: usize| u32::try_from(n).map_err(|_| Error::Format(format!("axis length {n} exceeds u32")));
        w.write_all(&to_u32(n0)?.to_le_bytes())?;
        w.write_all(&to_u32(n1)?.to_le_bytes())?;
        w.write_all(&self.grid.step[0].to_le_bytes())?;
        w.write_all(&self.grid.step[1].to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary layout. The origin is not part of it; without one the
    /// grid is centred on zero.
    pub fn read_binary<R: Read>(mut r: R, origin: Option<[f64; 2]>, domain: Domain) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        let n0 = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
        let n1 = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let h0 = f64::from_le_bytes(header[8..16].try_into().unwrap());
        let h1 = f64::from_le_bytes(header[16..24].try_into().unwrap());
        let origin = origin.unwrap_or([-((n0 / 2) as f64) * h0, -((n1 / 2) as f64) * h1]);
        let grid = GridSpec::new(origin, [h0, h1], [n0, n1])?;
        let len = n0.checked_mul(n1).ok_or_else(|| Error::Format("grid size overflows".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 16 {
            return Err(Error::Format(format!(
                "expected {} payload bytes for a {n0} x {n1} grid, found {}",
                len * 16,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        Ok(SampledField { grid, domain, values, boundary_ratio: None })
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes the binary file and its JSON sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        let sidecar =
            serde_json::to_string_pretty(&self.sidecar()).map_err(|e| Error::Format(format!("sidecar: {e}")))?;
        std::fs::write(Self::sidecar_path(path), sidecar)?;
        Ok(())
    }

    /// Reads a binary field; the sidecar, if present, supplies origin and domain.
    pub fn load(path: &Path) -> Result<Self> {
        let side_path = Self::sidecar_path(path);
        let sidecar: Option<FieldSidecar> = if side_path.exists() {
            let text = std::fs::read_to_string(&side_path)?;
            Some(serde_json::from_str(&text).map_err(|e| Error::Format(format!("sidecar: {e}")))?)
        } else {
            None
        };
        let r = BufReader::new(File::open(path)?);
        let mut field = SampledField::read_binary(
            r,
            sidecar.as_ref().map(|s| s.origin),
            sidecar.as_ref().map_or(Domain::Time, |s| s.domain),
        )?;
        if let Some(s) = sidecar {
            if s.counts != field.grid.counts || s.step != field.grid.step {
                return Err(Error::Format("sidecar disagrees with the binary header".into()));
            }
            field.boundary_ratio = s.boundary_ratio;
        }
        Ok(field)
    }
}

/// `e^{2 pi i x}` with the argument reduced mod 1 first.
pub(crate) fn unit_phase(x: f64) -> Complex64 {
    let (s, c) = (TAU * x.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}
