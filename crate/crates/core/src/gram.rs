// SPDX-License-Identifier: Apache-2.0

//! Inner products `<psi_i, psi_i'> = int conj(psi_i^) psi_i'^`, the Gram matrix
//! and its decay statistics.
//!
//! Quadrature runs on a uniform frequency grid that depends only on the pair of
//! frequency blocks, never on the lattice points. Every packet of a block pair
//! is therefore sampled on the same nodes, which makes the matrix entries and
//! the stand-alone [`inner_product`] bitwise identical, and swapping the
//! arguments conjugates the result exactly.
//!
//! The grid covers the intersection of both frequency support boxes. Its step
//! keeps the periodisation error of the Riemann sum below the support tail:
//! the integrand is the spectrum of a correlation supported within
//! `|t_i - t_i'| + w_i + w_i'` per axis, so the step stays below the reciprocal
//! of that extent.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{unit_phase, GridSpec};
use crate::geometry::{row_norms, Rect, Vec2};
use crate::index::{PacketIndex, PhaseSpacePoint};
use crate::metric::{rho_points, DistanceBreakdown};
use crate::packet::{eval_time, BlockGeometry, WavePacketSystem, SUPPORT_TAIL};
use crate::prototype::Prototype;

/// Default pruning threshold for Gram entries.
pub const DEFAULT_THRESHOLD: f64 = 1e-14;

/// Safety factor on the reciprocal extent that fixes the quadrature step.
const STEP_MARGIN: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramRecord {
    pub i: PacketIndex,
    pub i2: PacketIndex,
    pub rho: DistanceBreakdown,
    /// `None` when the entry is provably below the pruning threshold.
    pub value: Option<Complex64>,
}

impl GramRecord {
    pub fn modulus(&self) -> Option<f64> {
        self.value.map(|v| v.norm())
    }

    pub fn is_diagonal(&self) -> bool {
        self.i == self.i2
    }
}

/// Per-block data the pair planner needs.
#[derive(Clone, Debug)]
struct BlockInfo {
    freq_box: Rect,
    /// Half-widths of the time support box of one packet.
    time_half: Vec2,
    /// `max_k |t_k|` per axis over the full lattice.
    span: Vec2,
    /// `sup |psi_i^|`.
    sup: f64,
    /// `int |psi_i^|`.
    l1: f64,
}

fn block_info(sys: &WavePacketSystem, b: &BlockGeometry) -> BlockInfo {
    let proto = sys.prototype(b.freq);
    let fs = proto.freq_support(SUPPORT_TAIL);
    let ts = proto.time_support(SUPPORT_TAIL);
    let k = sys.params.k_radius as f64;
    let l = b.lattice;
    BlockInfo {
        freq_box: Rect::centered(b.center + b.freq_map * fs.center, row_norms(&b.freq_map) * fs.radius),
        time_half: row_norms(&b.time_map) * ts.radius + (b.time_map * ts.center).abs(),
        span: Vec2::new(k * (l[(0, 0)].abs() + l[(0, 1)].abs()), k * (l[(1, 0)].abs() + l[(1, 1)].abs())),
        sup: proto.freq_sup() / b.sqrt_det,
        l1: proto.freq_l1() * b.sqrt_det,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum PairPlan {
    Grid(GridSpec),
    Pruned,
}

/// Quadrature grid for a block pair. Symmetric in its arguments.
fn plan(a: &BlockInfo, b: &BlockInfo, threshold: f64) -> PairPlan {
    let overlap = a.freq_box.intersection(&b.freq_box);
    let region = if overlap.is_empty() {
        // Outside its own box each transform is below tail * sup, so the
        // integral is bounded by tail * (sup_a l1_b + sup_b l1_a).
        if SUPPORT_TAIL * (a.sup * b.l1 + b.sup * a.l1) < threshold {
            return PairPlan::Pruned;
        }
        a.freq_box.union(&b.freq_box)
    } else {
        overlap
    };
    let extent = (a.span + b.span) + (a.time_half + b.time_half);
    let mut counts = [0usize; 2];
    let mut step = [0.0; 2];
    for axis in 0..2 {
        let max_step = 1.0 / (STEP_MARGIN * extent[axis]);
        let width = region.width(axis);
        let n = (width / max_step).ceil().max(1.0) as usize + 1;
        counts[axis] = n;
        step[axis] = width / (n - 1) as f64;
    }
    PairPlan::Grid(GridSpec { origin: region.lo, step, counts })
}

/// Samples `psi^` of the packet of block `b` at `ti` on `grid`, factoring the
/// translation phase per axis.
fn block_values(b: &BlockGeometry, proto: &dyn Prototype, ti: Vec2, grid: &GridSpec) -> Vec<Complex64> {
    let axis_phase = |axis: usize| -> Vec<Complex64> {
        (0..grid.counts[axis])
            .map(|q| unit_phase(-ti[axis] * (grid.origin[axis] + q as f64 * grid.step[axis] - b.center[axis])))
            .collect()
    };
    let (px, py) = (axis_phase(0), axis_phase(1));
    let mut out = Vec::with_capacity(grid.len());
    for (q0, ph0) in px.iter().enumerate() {
        for (q1, ph1) in py.iter().enumerate() {
            let xi = grid.point(q0, q1);
            let g = proto.freq_eval(b.freq_map_inv * (xi - b.center)) / b.sqrt_det;
            out.push(g * (ph0 * ph1));
        }
    }
    out
}

/// `sum_q conj(a_q) b_q`, summed in node order. Swapping the arguments yields
/// the exact conjugate.
#[inline]
fn pair_sum(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

/// `<psi_i, psi_i'>` by frequency-domain quadrature; `None` if pruned below
/// `threshold`.
pub fn inner_product_pruned(
    system: &WavePacketSystem,
    i: PacketIndex,
    i2: PacketIndex,
    threshold: f64,
) -> Result<Option<Complex64>> {
    let (ba, bb) = (system.block(i.freq())?, system.block(i2.freq())?);
    let (ta, tb) = (system.time_center(i)?, system.time_center(i2)?);
    match plan(&block_info(system, ba), &block_info(system, bb), threshold) {
        PairPlan::Pruned => Ok(None),
        PairPlan::Grid(grid) => {
            let va = block_values(ba, system.prototype(i.freq()), ta, &grid);
            let vb = block_values(bb, system.prototype(i2.freq()), tb, &grid);
            Ok(Some(pair_sum(&va, &vb) * grid.cell_area()))
        }
    }
}

/// `<psi_i, psi_i'>` by frequency-domain quadrature (never pruned).
pub fn inner_product(system: &WavePacketSystem, i: PacketIndex, i2: PacketIndex) -> Result<Complex64> {
    Ok(inner_product_pruned(system, i, i2, 0.0)?.expect("threshold 0 never prunes"))
}

/// `<psi_i, psi_i'>` by time-domain quadrature. Independent cross-check of
/// [`inner_product`].
pub fn inner_product_time(system: &WavePacketSystem, i: PacketIndex, i2: PacketIndex) -> Result<Complex64> {
    let (ba, bb) = (system.block(i.freq())?, system.block(i2.freq())?);
    let (ta, tb) = (system.time_center(i)?, system.time_center(i2)?);
    let (boxa, boxb) = (system.time_bbox(i, SUPPORT_TAIL)?, system.time_bbox(i2, SUPPORT_TAIL)?);
    let (fa, fb) = (system.freq_bbox(i.freq(), SUPPORT_TAIL)?, system.freq_bbox(i2.freq(), SUPPORT_TAIL)?);
    let overlap = boxa.intersection(&boxb);
    let region = if overlap.is_empty() { boxa.union(&boxb) } else { overlap };
    let mut counts = [0usize; 2];
    let mut step = [0.0; 2];
    for axis in 0..2 {
        let extent = (fa.center()[axis] - fb.center()[axis]).abs() + 0.5 * (fa.width(axis) + fb.width(axis));
        let max_step = 1.0 / (STEP_MARGIN * extent);
        let n = (region.width(axis) / max_step).ceil().max(1.0) as usize + 1;
        counts[axis] = n;
        step[axis] = region.width(axis) / (n - 1) as f64;
    }
    let grid = GridSpec { origin: region.lo, step, counts };
    let (pa, pb) = (system.prototype(i.freq()), system.prototype(i2.freq()));
    let rows: Vec<Complex64> = (0..counts[0])
        .into_par_iter()
        .map(|q0| {
            let mut s = Complex64::new(0.0, 0.0);
            for q1 in 0..counts[1] {
                let t = grid.point(q0, q1);
                s += eval_time(ba, pa, ta, t).conj() * eval_time(bb, pb, tb, t);
            }
            s
        })
        .collect();
    Ok(rows.iter().sum::<Complex64>() * grid.cell_area())
}

/// All records `(i, i')` with `i` not after `i'` in `indices`, ordered by that
/// position pair. Entries proven to be below `threshold` are stored pruned.
pub fn gram_matrix(indices: &[PacketIndex], system: &WavePacketSystem, threshold: f64) -> Result<Vec<GramRecord>> {
    let blocks = system.blocks();
    let infos: Vec<BlockInfo> = blocks.iter().map(|b| block_info(system, b)).collect();
    // block position -> [(input position, packet)]
    let mut members: BTreeMap<usize, Vec<(usize, PacketIndex)>> = BTreeMap::new();
    for (pos, &i) in indices.iter().enumerate() {
        system.time_center(i)?;
        members.entry(system.block_position(i.freq())?).or_default().push((pos, i));
    }
    let points: Vec<PhaseSpacePoint> = indices.iter().map(|&i| PhaseSpacePoint::of(&system.params, i)).collect();
    let present: Vec<usize> = members.keys().copied().collect();
    let mut pairs = Vec::new();
    for (n, &a) in present.iter().enumerate() {
        for &b in &present[n..] {
            pairs.push((a, b));
        }
    }

    let chunks: Vec<Vec<(usize, usize, GramRecord)>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ma, mb) = (&members[&a], &members[&b]);
            let plan = plan(&infos[a], &infos[b], threshold);
            let sample = |blk: usize, list: &[(usize, PacketIndex)], grid: &GridSpec| -> Vec<Vec<Complex64>> {
                let g = &blocks[blk];
                let proto = system.prototype(g.freq);
                list.iter().map(|(_, i)| block_values(g, proto, g.lattice * i.k(), grid)).collect()
            };
            let (va, vb) = match &plan {
                PairPlan::Grid(grid) => {
                    let va = sample(a, ma, grid);
                    let vb = if a == b { Vec::new() } else { sample(b, mb, grid) };
                    (va, vb)
                }
                PairPlan::Pruned => (Vec::new(), Vec::new()),
            };
            let mut out = Vec::new();
            for (x, &(px, ix)) in ma.iter().enumerate() {
                for (y, &(py, iy)) in mb.iter().enumerate() {
                    if a == b && py < px {
                        continue;
                    }
                    let value = match &plan {
                        PairPlan::Pruned => None,
                        PairPlan::Grid(grid) => {
                            let vy = if a == b { &va[y] } else { &vb[y] };
                            Some(pair_sum(&va[x], vy) * grid.cell_area())
                        }
                    };
                    let (p, q, i, i2, value) =
                        if px <= py { (px, py, ix, iy, value) } else { (py, px, iy, ix, value.map(|v| v.conj())) };
                    let rho = rho_points(&points[p], &points[q]);
                    let value = value.filter(|v| v.norm() >= threshold);
                    out.push((p, q, GramRecord { i, i2, rho, value }));
                }
            }
            out
        })
        .collect();

    let mut all: Vec<(usize, usize, GramRecord)> = chunks.into_iter().flatten().collect();
    all.par_sort_unstable_by_key(|&(p, q, _)| (p, q));
    Ok(all.into_iter().map(|(_, _, r)| r).collect())
}

/// Restricted envelope `max_{rho >= rho0} |G| (1 + rho)^6` at one `rho0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub rho0: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub records: usize,
    pub pruned: usize,
    /// `max |G| (1 + rho)^6` over resolved records.
    pub c_emp: f64,
    pub c_emp_pair: (PacketIndex, PacketIndex),
    pub c_emp_rho: f64,
    /// Largest `|G|` among records at `rho = 0`.
    pub diagonal_max: f64,
    /// Whether every record at `rho = 0` is diagonal.
    pub zero_rho_only_diagonal: bool,
    pub envelope: Vec<EnvelopePoint>,
    pub envelope_monotone: bool,
    /// Least-squares slope of `ln |G|` against `ln(1 + rho)` over `|G| > 1e-14`.
    pub slope: f64,
    pub intercept: f64,
    pub fit_points: usize,
    pub slope_ok: bool,
    /// `max |G| (1 + t1 + t2)^(kappa0/4) (1 + r + theta)^(kappa/4)` with `kappa0 = kappa = 24`.
    pub product_form_constant: f64,
    /// `max |G| (1 + t1 + t2)^(kappa0/2)` over records with `r = theta = 0`.
    pub time_envelope_constant: f64,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.envelope_monotone && self.slope_ok && self.c_emp.is_finite()
    }
}

/// Lower cutoff of the decay regression.
pub const FIT_FLOOR: f64 = 1e-14;
/// Exponent the regression slope has to reach.
pub const DECAY_EXPONENT: f64 = 6.0;
/// Slack of the envelope monotonicity check.
pub const ENVELOPE_SLACK: f64 = 1e-12;
const KAPPA: f64 = 24.0;
const RHO0_STEP: f64 = 0.25;

pub fn decay_report(records: &[GramRecord]) -> Result<DecayReport> {
    if records.is_empty() {
        return Err(Error::Domain("decay report needs at least one record".into()));
    }
    let resolved: Vec<(&GramRecord, f64)> = records.iter().filter_map(|r| r.modulus().map(|m| (r, m))).collect();
    let weighted = |r: &GramRecord, m: f64| m * decay_weight(r.rho.total, DECAY_EXPONENT);

    let mut c_emp = (f64::NEG_INFINITY, records[0].i, records[0].i2, 0.0);
    let mut diagonal_max = 0.0f64;
    let mut zero_rho_only_diagonal = true;
    let mut product = 0.0f64;
    let mut time_env = 0.0f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0usize);
    for &(r, m) in &resolved {
        let w = weighted(r, m);
        if w > c_emp.0 {
            c_emp = (w, r.i, r.i2, r.rho.total);
        }
        if r.rho.total == 0.0 {
            diagonal_max = diagonal_max.max(m);
            zero_rho_only_diagonal &= r.is_diagonal();
        }
        let t = r.rho.t1_component + r.rho.t2_component;
        let f = r.rho.r_component + r.rho.theta_component;
        product = product.max(m * (1.0 + t).powf(KAPPA / 4.0) * (1.0 + f).powf(KAPPA / 4.0));
        if f == 0.0 {
            time_env = time_env.max(m * (1.0 + t).powf(KAPPA / 2.0));
        }
        if m > FIT_FLOOR {
            let (x, y) = ((1.0 + r.rho.total).ln(), m.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1;
        }
    }
    let nf = n as f64;
    let denom = nf * sxx - sx * sx;
    let slope = if n >= 2 && denom > 0.0 { (nf * sxy - sx * sy) / denom } else { f64::NAN };
    let intercept = if slope.is_finite() { (sy - slope * sx) / nf } else { f64::NAN };

    // Suffix maxima over records sorted by rho.
    let mut by_rho: Vec<(f64, f64)> = resolved.iter().map(|&(r, m)| (r.rho.total, weighted(r, m))).collect();
    by_rho.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_rho = by_rho.last().map_or(0.0, |x| x.0);
    let steps = (max_rho / RHO0_STEP).floor() as usize;
    let mut envelope = Vec::with_capacity(steps + 1);
    let mut cursor = by_rho.len();
    let mut running = 0.0f64;
    for s in (0..=steps).rev() {
        let rho0 = s as f64 * RHO0_STEP;
        while cursor > 0 && by_rho[cursor - 1].0 >= rho0 {
            cursor -= 1;
            running = running.max(by_rho[cursor].1);
        }
        envelope.push(EnvelopePoint { rho0, envelope: running });
    }
    envelope.reverse();
    let envelope_monotone = envelope.windows(2).all(|w| w[1].envelope <= w[0].envelope + ENVELOPE_SLACK);

    Ok(DecayReport {
        records: records.len(),
        pruned: records.len() - resolved.len(),
        c_emp: c_emp.0,
        c_emp_pair: (c_emp.1, c_emp.2),
        c_emp_rho: c_emp.3,
        diagonal_max,
        zero_rho_only_diagonal,
        envelope,
        envelope_monotone,
        slope,
        intercept,
        fit_points: n,
        slope_ok: slope <= -DECAY_EXPONENT,
        product_form_constant: product,
        time_envelope_constant: time_env,
    })
}

/// `(1 + rho)^n`, the same bits wherever a constant is computed and checked.
fn decay_weight(rho: f64, n: f64) -> f64 {
    if n == n.round() && n.abs() <= 64.0 {
        (1.0 + rho).powi(n as i32)
    } else {
        (1.0 + rho).powf(n)
    }
}

/// `max |G| (1 + rho)^n` over resolved records.
pub fn localization_constant(records: &[GramRecord], n: f64) -> f64 {
    records.iter().filter_map(|r| r.modulus().map(|m| m * decay_weight(r.rho.total, n))).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub exponent: f64,
    pub constant: f64,
    pub holds: bool,
    /// Pair with the largest `|G| (1 + rho)^n / constant`.
    pub tightest: Option<(PacketIndex, PacketIndex)>,
    pub tightest_ratio: f64,
    /// First pair (in record order) violating the bound.
    pub witness: Option<(PacketIndex, PacketIndex)>,
    pub violations: usize,
}

/// Checks `|G| <= constant (1 + rho)^-n` on every record. Pruned records are
/// checked with their modulus bound `pruned_bound`.
pub fn intrinsic_localization_check(
    records: &[GramRecord],
    n: f64,
    constant: f64,
    pruned_bound: f64,
) -> Result<LocalizationReport> {
    if !(n > 5.0) {
        return Err(Error::Domain(format!("localization exponent must exceed the index dimension 5, got {n}")));
    }
    let mut report = LocalizationReport {
        exponent: n,
        constant,
        holds: true,
        tightest: None,
        tightest_ratio: 0.0,
        witness: None,
        violations: 0,
    };
    for r in records {
        let m = r.modulus().unwrap_or(pruned_bound);
        let lhs = m * decay_weight(r.rho.total, n);
        let ratio = lhs / constant;
        if ratio > report.tightest_ratio || report.tightest.is_none() {
            report.tightest_ratio = ratio;
            report.tightest = Some((r.i, r.i2));
        }
        if lhs > constant {
            report.holds = false;
            report.violations += 1;
            if report.witness.is_none() {
                report.witness = Some((r.i, r.i2));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_indices, FrequencyIndex};
    use crate::params::SystemParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference() -> WavePacketSystem {
        WavePacketSystem::gaussian(SystemParams::default()).unwrap()
    }

    #[test]
    fn diagonal_is_prototype_energy() {
        let sys = reference();
        for i in enumerate_indices(&sys.params).into_iter().step_by(37) {
            let v = inner_product(&sys, i, i).unwrap();
            assert!((v.re - 0.5).abs() < 1e-10 && v.im.abs() < 1e-12, "{i}: {v}");
        }
    }

    #[test]
    fn zero_block_closed_form() {
        // int e^{-pi |t - a|^2} e^{-pi |t - b|^2} dt = e^{-pi |a - b|^2 / 2} / 2
        let sys = reference();
        let z = FrequencyIndex::ZERO;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut k = || rng.random_range(-2..=2);
            let (a, b) = (PacketIndex::new(z, k(), k()), PacketIndex::new(z, k(), k()));
            let d = (a.k() - b.k()) * sys.params.delta;
            let exact = 0.5 * (-std::f64::consts::PI * d.norm_squared() / 2.0).exp();
            let v = inner_product(&sys, a, b).unwrap();
            assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-9, "{a} {b}: {v} vs {exact}");
        }
    }

    #[test]
    fn hermitian_bitwise() {
        let sys = reference();
        let a = PacketIndex::new(FrequencyIndex::new(1, 1, 4), 1, -1);
        let b = PacketIndex::new(FrequencyIndex::new(2, 0, 6), -2, 0);
        let x = inner_product(&sys, a, b).unwrap();
        let y = inner_product(&sys, b, a).unwrap();
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), (-y.im).to_bits());
    }

    #[test]
    fn plancherel() {
        let sys = reference();
        let all = enumerate_indices(&sys.params);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..6 {
            let a = all[rng.random_range(0..all.len())];
            let b = all[rng.random_range(0..all.len())];
            let f = inner_product(&sys, a, b).unwrap();
            let t = inner_product_time(&sys, a, b).unwrap();
            assert!((f - t).norm() / 0.5 < 1e-8, "{a} {b}: {f} vs {t}");
        }
    }

    #[test]
    fn matrix_matches_standalone_entries() {
        let p = SystemParams { j_max: 1, k_radius: 1, ..Default::default() };
        let sys = WavePacketSystem::gaussian(p).unwrap();
        let idx = enumerate_indices(&sys.params);
        let recs = gram_matrix(&idx, &sys, 0.0).unwrap();
        assert_eq!(recs.len(), idx.len() * (idx.len() + 1) / 2);
        let mut n = 0;
        for a in 0..idx.len() {
            for b in a..idx.len() {
                let r = &recs[n];
                assert_eq!((r.i, r.i2), (idx[a], idx[b]));
                if n % 17 == 0 {
                    assert_eq!(r.value, Some(inner_product(&sys, idx[a], idx[b]).unwrap()));
                }
                assert!(r.modulus().unwrap() <= 0.5 + 1e-8);
                n += 1;
            }
        }
    }

    #[test]
    fn subset_order_and_conjugation() {
        let sys = reference();
        let all = enumerate_indices(&sys.params);
        // reversed order forces the conjugate branch
        let subset: Vec<PacketIndex> = all.iter().rev().step_by(97).copied().collect();
        let recs = gram_matrix(&subset, &sys, 0.0).unwrap();
        assert_eq!(recs.len(), subset.len() * (subset.len() + 1) / 2);
        for r in recs.iter().step_by(5) {
            assert_eq!(r.value, Some(inner_product(&sys, r.i, r.i2).unwrap()));
        }
    }

    #[test]
    fn decay_and_localization() {
        // K = 1 puts the maximising pair on a rounding boundary
        for k_radius in [1, 2] {
            let p = SystemParams { j_max: 1, k_radius, ..Default::default() };
            let sys = WavePacketSystem::gaussian(p).unwrap();
            let recs = gram_matrix(&enumerate_indices(&sys.params), &sys, DEFAULT_THRESHOLD).unwrap();
            let rep = decay_report(&recs).unwrap();
            let ok = intrinsic_localization_check(&recs, 6.0, rep.c_emp, DEFAULT_THRESHOLD).unwrap();
            assert!(ok.holds, "K = {k_radius}: {ok:?}");
            assert_eq!(ok.tightest_ratio, 1.0);
        }
        let p = SystemParams { j_max: 1, k_radius: 2, ..Default::default() };
        let sys = WavePacketSystem::gaussian(p).unwrap();
        let recs = gram_matrix(&enumerate_indices(&sys.params), &sys, DEFAULT_THRESHOLD).unwrap();
        let rep = decay_report(&recs).unwrap();
        assert!(rep.envelope_monotone);
        assert!(rep.zero_rho_only_diagonal);
        assert_relative_eq!(rep.diagonal_max, 0.5, max_relative = 1e-8);
        assert!(rep.c_emp.is_finite());

        let ok = intrinsic_localization_check(&recs, 6.0, rep.c_emp, DEFAULT_THRESHOLD).unwrap();
        assert!(ok.holds, "{ok:?}");
        let bad = intrinsic_localization_check(&recs, 6.0, rep.c_emp / 2.0, DEFAULT_THRESHOLD).unwrap();
        assert!(!bad.holds && bad.witness.is_some());
        assert!(localization_constant(&recs, 7.0) > localization_constant(&recs, 6.0));
        assert!(intrinsic_localization_check(&recs, 5.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn thread_count_does_not_change_records() {
        let p = SystemParams { j_max: 1, k_radius: 1, ..Default::default() };
        let sys = WavePacketSystem::gaussian(p).unwrap();
        let idx = enumerate_indices(&sys.params);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| gram_matrix(&idx, &sys, DEFAULT_THRESHOLD).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
