// SPDX-License-Identifier: Apache-2.0

//! Analysis, synthesis and the frame operator `S f = sum_i <psi_i, f> psi_i` on
//! sampled signals, the coefficient-space quasi-norm and conjugate-gradient
//! reconstruction.
//!
//! [`analyze`] and [`synthesize`] work pointwise in the time domain.
//! [`FrameOperator`] evaluates the same operators in the frequency domain: the
//! signal spectrum is sampled once per application with an FFT, and within a
//! block the packet transforms differ only by the phase `u^k1 v^k2`, so all
//! lattice points of a block are handled by one pass over its frequency nodes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::covering::weight;
use crate::error::{Error, Result};
use crate::fft::fft2;
use crate::field::{unit_phase, Domain, GridSpec, SampledField};
use crate::geometry::Vec2;
use crate::index::{enumerate_indices, FrequencyIndex, PacketIndex};
use crate::packet::{eval_time, WavePacketSystem, BOUNDARY_DECAY, SUPPORT_TAIL};
use crate::params::SystemParams;
use crate::partition::band_limited_spectrum;

/// Analysis coefficients `c_i = <psi_i, f>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub params: SystemParams,
    pub values: BTreeMap<PacketIndex, Complex64>,
}

impl CoefficientSet {
    pub fn new(params: SystemParams) -> Self {
        CoefficientSet { params, values: BTreeMap::new() }
    }

    pub fn zeros(params: SystemParams) -> Self {
        let values = enumerate_indices(&params).into_iter().map(|i| (i, Complex64::new(0.0, 0.0))).collect();
        CoefficientSet { params, values }
    }

    pub fn get(&self, i: PacketIndex) -> Complex64 {
        self.values.get(&i).copied().unwrap_or_default()
    }

    /// Euclidean pairing `sum conj(self_i) other_i`.
    pub fn dot(&self, other: &CoefficientSet) -> Complex64 {
        self.values.iter().map(|(i, a)| a.conj() * other.get(*i)).sum()
    }

    /// Index with the largest modulus.
    pub fn argmax(&self) -> Option<PacketIndex> {
        self.values
            .iter()
            .fold(None, |best: Option<(PacketIndex, f64)>, (i, v)| match best {
                Some((_, m)) if m >= v.norm() => best,
                _ => Some((*i, v.norm())),
            })
            .map(|(i, _)| i)
    }
}

fn check_window(system: &WavePacketSystem, i: PacketIndex, grid: &GridSpec, tail: f64) -> Result<()> {
    let need = system.time_bbox(i, tail)?;
    if !grid.extent().contains_rect(&need) {
        return Err(Error::GridTooSmall {
            index: i,
            reason: format!("its time support {need:?} leaves the signal window {:?}", grid.extent()),
        });
    }
    Ok(())
}

/// `c_i = <psi_i, f>` by time-domain quadrature over each packet's support box.
pub fn analyze(f: &SampledField, system: &WavePacketSystem) -> Result<CoefficientSet> {
    let grid = f.grid;
    let indices = enumerate_indices(&system.params);
    for &i in &indices {
        check_window(system, i, &grid, BOUNDARY_DECAY)?;
    }
    let values: Vec<Complex64> = indices
        .par_iter()
        .map(|&i| {
            let b = system.block(i.freq()).expect("enumerated");
            let proto = system.prototype(i.freq());
            let ti = b.lattice * i.k();
            let bbox = system.time_bbox(i, SUPPORT_TAIL).expect("enumerated");
            let range = |axis: usize| {
                let lo = ((bbox.lo[axis] - grid.origin[axis]) / grid.step[axis]).floor().max(0.0) as usize;
                let hi = ((bbox.hi[axis] - grid.origin[axis]) / grid.step[axis]).ceil() as usize;
                lo..=hi.min(grid.counts[axis] - 1)
            };
            let mut s = Complex64::new(0.0, 0.0);
            for p0 in range(0) {
                for p1 in range(1) {
                    s += eval_time(b, proto, ti, grid.point(p0, p1)).conj() * f.at(p0, p1);
                }
            }
            s * grid.cell_area()
        })
        .collect();
    Ok(CoefficientSet { params: system.params.clone(), values: indices.into_iter().zip(values).collect() })
}

/// `sum_i c_i psi_i` evaluated at every node of `grid`.
pub fn synthesize(c: &CoefficientSet, grid: GridSpec, system: &WavePacketSystem) -> Result<SampledField> {
    let mut terms = Vec::new();
    for (&i, &v) in &c.values {
        if v != Complex64::new(0.0, 0.0) {
            let b = system.block(i.freq())?;
            system.time_center(i)?;
            terms.push((b, system.prototype(i.freq()), b.lattice * i.k(), v));
        }
    }
    let n1 = grid.counts[1];
    let values: Vec<Complex64> = (0..grid.counts[0])
        .into_par_iter()
        .flat_map_iter(|p0| {
            let terms = &terms;
            (0..n1).map(move |p1| {
                let t = grid.point(p0, p1);
                let mut s = Complex64::new(0.0, 0.0);
                for (b, proto, ti, v) in terms {
                    s += v * eval_time(b, *proto, *ti, t);
                }
                s
            })
        })
        .collect();
    Ok(SampledField { grid, domain: Domain::Time, values, boundary_ratio: None })
}

/// Mixed `l^q(l^p)` quasi-norm with weight `2^(j (s + (alpha + beta)(1/2 - 1/p)))`.
pub fn coefficient_norm(c: &CoefficientSet, s: f64, p: f64, q: f64, params: &SystemParams) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Domain(format!("exponents must lie in (0, inf], got p = {p}, q = {q}")));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let exponent = s + (params.alpha + params.beta) * (0.5 - inv_p);
    let mut blocks: BTreeMap<FrequencyIndex, Vec<f64>> = BTreeMap::new();
    for (i, v) in &c.values {
        blocks.entry(i.freq()).or_default().push(v.norm());
    }
    let inner = |mods: &[f64]| -> f64 {
        if p.is_infinite() {
            mods.iter().copied().fold(0.0, f64::max)
        } else {
            mods.iter().map(|m| m.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    let outer: Vec<f64> = blocks.iter().map(|(f, mods)| weight(*f, exponent) * inner(mods)).collect();
    Ok(if q.is_infinite() {
        outer.into_iter().fold(0.0, f64::max)
    } else {
        outer.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

/// Relative tail at which the fast operator truncates packet spectra.
pub const OPERATOR_TAIL: f64 = 1e-12;

/// Frequency nodes of one block.
#[derive(Clone, Debug)]
struct BlockNodes {
    indices: Vec<PacketIndex>,
    /// Position of the node in the FFT array.
    flat: Vec<usize>,
    /// `Delta^2 h^2 e^{-2 pi i <o, xi>} conj(g(xi))`.
    analysis: Vec<Complex64>,
    /// `g(xi) e^{2 pi i <o, xi>}`.
    synthesis: Vec<Complex64>,
    /// `e^{2 pi i <L e_1, xi - c>}` and `e^{2 pi i <L e_2, xi - c>}`.
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

/// Frame operator of a system on a fixed signal grid, evaluated via FFT.
#[derive(Clone, Debug)]
pub struct FrameOperator {
    grid: GridSpec,
    band_radius: f64,
    k_radius: usize,
    blocks: Vec<BlockNodes>,
}

fn powers(z: Complex64, k: usize, out: &mut [Complex64]) {
    out[k] = Complex64::new(1.0, 0.0);
    let zc = z.conj();
    for m in 1..=k {
        out[k + m] = out[k + m - 1] * z;
        out[k - m] = out[k - m + 1] * zc;
    }
}

impl FrameOperator {
    /// Prepares the operator for signals on `grid`. Fails if a packet leaves
    /// the time window or a packet spectrum leaves the reciprocal window.
    pub fn new(system: &WavePacketSystem, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let [n0, n1] = grid.counts;
        let d = grid.reciprocal_step();
        let lo = grid.centered_reciprocal_origin();
        let window = [lo[0] + n0 as f64 * d[0], lo[1] + n1 as f64 * d[1]];
        let k_radius = system.params.k_radius as usize;
        let kk = system.params.k_radius as i32;
        let area = grid.cell_area() * d[0] * d[1];

        let blocks: Vec<Result<BlockNodes>> = system
            .blocks()
            .par_iter()
            .map(|b| {
                let mut indices = Vec::new();
                for k1 in -kk..=kk {
                    for k2 in -kk..=kk {
                        let i = PacketIndex::new(b.freq, k1, k2);
                        check_window(system, i, &grid, OPERATOR_TAIL)?;
                        indices.push(i);
                    }
                }
                let proto = system.prototype(b.freq);
                let sup = proto.freq_support(OPERATOR_TAIL);
                let bbox = system.freq_bbox(b.freq, OPERATOR_TAIL)?;
                for axis in 0..2 {
                    if bbox.lo[axis] < lo[axis] || bbox.hi[axis] >= window[axis] {
                        return Err(Error::GridTooSmall {
                            index: indices[0],
                            reason: format!(
                                "its spectrum {bbox:?} exceeds the reciprocal window; use a finer time step"
                            ),
                        });
                    }
                }
                let q_range = |axis: usize| {
                    let a = (bbox.lo[axis] / d[axis]).ceil() as i64;
                    let z = (bbox.hi[axis] / d[axis]).floor() as i64;
                    a..=z
                };
                let l = b.lattice;
                let (e1, e2) = (Vec2::new(l[(0, 0)], l[(1, 0)]), Vec2::new(l[(0, 1)], l[(1, 1)]));
                let mut nodes = BlockNodes {
                    indices,
                    flat: Vec::new(),
                    analysis: Vec::new(),
                    synthesis: Vec::new(),
                    u: Vec::new(),
                    v: Vec::new(),
                };
                for q0 in q_range(0) {
                    for q1 in q_range(1) {
                        let xi = Vec2::new(q0 as f64 * d[0], q1 as f64 * d[1]);
                        let eta = b.freq_map_inv * (xi - b.center);
                        if (eta - sup.center).norm() > sup.radius {
                            continue;
                        }
                        let g = proto.freq_eval(eta) / b.sqrt_det;
                        let origin_phase = unit_phase(grid.origin[0] * xi.x + grid.origin[1] * xi.y);
                        let f0 = q0.rem_euclid(n0 as i64) as usize;
                        let f1 = q1.rem_euclid(n1 as i64) as usize;
                        nodes.flat.push(f0 * n1 + f1);
                        nodes.analysis.push(origin_phase.conj() * g.conj() * area);
                        nodes.synthesis.push(origin_phase * g);
                        nodes.u.push(unit_phase(e1.dot(&(xi - b.center))));
                        nodes.v.push(unit_phase(e2.dot(&(xi - b.center))));
                    }
                }
                Ok(nodes)
            })
            .collect();
        let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(FrameOperator { grid, band_radius: system.params.inner_radius(), k_radius, blocks })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of packets.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of frequency nodes over all blocks.
    pub fn node_count(&self) -> usize {
        self.blocks.iter().map(|b| b.flat.len()).sum()
    }

    fn check_grid(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::Format(format!("expected {} samples, got {}", self.grid.len(), f.len())));
        }
        Ok(())
    }

    /// Coefficient vector in enumeration order.
    pub fn analyze_vec(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_grid(f)?;
        let mut spec = f.to_vec();
        fft2(&mut spec, self.grid.counts[0], self.grid.counts[1], FftDirection::Forward);
        let side = 2 * self.k_radius + 1;
        let k = self.k_radius;
        let per_block: Vec<Vec<Complex64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let mut acc = vec![Complex64::new(0.0, 0.0); side * side];
                let (mut up, mut vp) = (vec![Complex64::default(); side], vec![Complex64::default(); side]);
                for n in 0..b.flat.len() {
                    let g = b.analysis[n] * spec[b.flat[n]];
                    powers(b.u[n], k, &mut up);
                    powers(b.v[n], k, &mut vp);
                    for (a, ua) in up.iter().enumerate() {
                        let ga = ua * g;
                        for (slot, vb) in acc[a * side..(a + 1) * side].iter_mut().zip(&vp) {
                            *slot += ga * vb;
                        }
                    }
                }
                acc
            })
            .collect();
        Ok(per_block.into_iter().flatten().collect())
    }

    /// Synthesis from a coefficient vector in enumeration order.
    pub fn synthesize_vec(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if c.len() != self.len() {
            return Err(Error::Format(format!("expected {} coefficients, got {}", self.len(), c.len())));
        }
        let side = 2 * self.k_radius + 1;
        let k = self.k_radius;
        let chunks: Vec<Vec<Complex64>> = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(pos, b)| {
                let coef = &c[pos * side * side..(pos + 1) * side * side];
                let (mut up, mut vp) = (vec![Complex64::default(); side], vec![Complex64::default(); side]);
                (0..b.flat.len())
                    .map(|n| {
                        // sum_k c_k u^-k1 v^-k2
                        powers(b.u[n].conj(), k, &mut up);
                        powers(b.v[n].conj(), k, &mut vp);
                        let mut s = Complex64::new(0.0, 0.0);
                        for (a, ua) in up.iter().enumerate() {
                            let row: Complex64 =
                                coef[a * side..(a + 1) * side].iter().zip(&vp).map(|(x, y)| x * y).sum();
                            s += ua * row;
                        }
                        b.synthesis[n] * s
                    })
                    .collect()
            })
            .collect();
        let mut spec = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (b, vals) in self.blocks.iter().zip(chunks) {
            for (&f, v) in b.flat.iter().zip(vals) {
                spec[f] += v;
            }
        }
        fft2(&mut spec, self.grid.counts[0], self.grid.counts[1], FftDirection::Inverse);
        let d = self.grid.reciprocal_step();
        let scale = d[0] * d[1];
        for v in &mut spec {
            *v *= scale;
        }
        Ok(spec)
    }

    pub fn apply_vec(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.synthesize_vec(&self.analyze_vec(f)?)
    }

    pub fn analyze(&self, f: &SampledField, params: &SystemParams) -> Result<CoefficientSet> {
        self.ensure_grid(f)?;
        let c = self.analyze_vec(&f.values)?;
        let indices = self.blocks.iter().flat_map(|b| b.indices.iter().copied());
        Ok(CoefficientSet { params: params.clone(), values: indices.zip(c).collect() })
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        self.ensure_grid(f)?;
        Ok(SampledField {
            grid: self.grid,
            domain: Domain::Time,
            values: self.apply_vec(&f.values)?,
            boundary_ratio: None,
        })
    }

    fn ensure_grid(&self, f: &SampledField) -> Result<()> {
        if f.grid != self.grid {
            return Err(Error::Format("signal grid differs from the operator grid".into()));
        }
        Ok(())
    }
}

/// `S f`, evaluated with a [`FrameOperator`] built for `f`'s grid.
pub fn frame_operator_apply(f: &SampledField, system: &WavePacketSystem) -> Result<SampledField> {
    FrameOperator::new(system, f.grid)?.apply(f)
}

/// Residual reduction below which a 50-iteration window counts as stagnation.
pub const STAGNATION_FACTOR: f64 = 1e-3;
pub const STAGNATION_WINDOW: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub iterations: usize,
    pub converged: bool,
    /// `|S x - S f| / |S f|` at exit.
    pub relative_residual: f64,
    /// `|x - f| / |f|`.
    pub relative_error: f64,
    pub residual_history: Vec<f64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `S x = S f` by conjugate gradients from `x = 0` and compares `x`
/// with `f`, which must be band-limited to the covered disk.
pub fn reconstruct(
    op: &FrameOperator,
    f: &SampledField,
    max_iterations: usize,
    tol: f64,
) -> Result<(SampledField, ReconstructionReport)> {
    op.ensure_grid(f)?;
    band_limited_spectrum(f, op.band_radius)?;
    let b = op.apply_vec(&f.values)?;
    let b_norm = norm(&b);
    let mut x = vec![Complex64::new(0.0, 0.0); b.len()];
    let mut history = vec![1.0];
    let mut converged = b_norm == 0.0;
    if !converged {
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r).re;
        for it in 1..=max_iterations {
            let sp = op.apply_vec(&p)?;
            let denom = dot(&p, &sp).re;
            if denom <= 0.0 {
                break;
            }
            let alpha = rr / denom;
            for n in 0..x.len() {
                x[n] += p[n] * alpha;
                r[n] -= sp[n] * alpha;
            }
            let rr_new = dot(&r, &r).re;
            let rel = rr_new.sqrt() / b_norm;
            history.push(rel);
            if rel <= tol {
                converged = true;
                break;
            }
            if it >= STAGNATION_WINDOW && rel > history[it - STAGNATION_WINDOW] * (1.0 - STAGNATION_FACTOR) {
                return Err(Error::Stagnation { iterations: it, residual: rel });
            }
            let beta = rr_new / rr;
            for n in 0..p.len() {
                p[n] = r[n] + p[n] * beta;
            }
            rr = rr_new;
        }
    }
    let diff: Vec<Complex64> = x.iter().zip(&f.values).map(|(a, b)| a - b).collect();
    let f_norm = norm(&f.values);
    let relative_error = if f_norm == 0.0 { norm(&x) } else { norm(&diff) / f_norm };
    let report = ReconstructionReport {
        iterations: history.len() - 1,
        converged,
        relative_residual: *history.last().unwrap(),
        relative_error,
        residual_history: history,
    };
    Ok((SampledField { grid: f.grid, domain: Domain::Time, values: x, boundary_ratio: None }, report))
}

/// Isotropic Gaussian `e^{-|t - center|^2 / (2 sigma^2)}` sampled on `grid`.
pub fn gaussian_signal(grid: GridSpec, center: Vec2, sigma: f64) -> SampledField {
    SampledField::from_fn(grid, Domain::Time, |t| {
        Complex64::new((-(t - center).norm_squared() / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}
