// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use wavepacket::covering::{
    brute_force_neighbor_lists, neighbor_lists, tiles, verify_covering, verify_moderate, CoverageReport,
    ModerateReport, NeighborStats, Tile,
};
use wavepacket::frame::{analyze, coefficient_norm, reconstruct, FrameOperator, ReconstructionReport};
use wavepacket::gram::{
    decay_report, gram_matrix, intrinsic_localization_check, localization_constant, DecayReport, GramRecord,
    LocalizationReport,
};
use wavepacket::index::{enumerate_indices, PhaseSpacePoint};
use wavepacket::metric::{
    check_metric_axioms, separation, summability, AxiomReport, SeparationReport, SummabilityReport,
};
use wavepacket::params::extended_real;
use wavepacket::prototype::{verify_nonvanishing, NonvanishingReport, Region};
use wavepacket::{
    Complex64, DistanceBreakdown, FrequencyIndex, PacketIndex, SampledField, SystemParams, WavePacketSystem,
};

use crate::config::RunConfig;
use crate::svg::decay_plot;

/// How a command that ran to completion ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    ChecksFailed,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Passed
        } else {
            Outcome::ChecksFailed
        }
    }
}

fn out_dir(c: &RunConfig) -> anyhow::Result<&Path> {
    fs::create_dir_all(&c.output_dir).with_context(|| format!("creating {}", c.output_dir.display()))?;
    Ok(&c.output_dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

#[derive(Serialize)]
struct IndexRow {
    j: u32,
    m: u32,
    l: u32,
    k1: i32,
    k2: i32,
    radius: f64,
    angle: f64,
    t1: f64,
    t2: f64,
}

#[derive(Serialize)]
struct TileEntry {
    j: u32,
    m: u32,
    l: u32,
    #[serde(flatten)]
    tile: Tile,
}

#[derive(Serialize)]
struct TileManifest<'a> {
    params: &'a SystemParams,
    tiles: Vec<TileEntry>,
}

pub fn gen(c: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = out_dir(c)?;
    let p = &c.params;
    let mut w = csv_writer(&dir.join("indices.csv"))?;
    for i in enumerate_indices(p) {
        let pt = PhaseSpacePoint::of(p, i);
        w.serialize(IndexRow {
            j: i.j,
            m: i.m,
            l: i.l,
            k1: i.k1,
            k2: i.k2,
            radius: pt.radius,
            angle: pt.angle,
            t1: pt.time[0],
            t2: pt.time[1],
        })?;
    }
    w.flush()?;
    let manifest = TileManifest {
        params: p,
        tiles: tiles(p).into_iter().map(|(f, tile)| TileEntry { j: f.j, m: f.m, l: f.l, tile }).collect(),
    };
    write_json(&dir.join("tiles.json"), &manifest)?;
    println!("wrote indices.csv and tiles.json to {}", dir.display());
    Ok(Outcome::Passed)
}

#[derive(Serialize)]
struct Check<T> {
    passed: bool,
    #[serde(flatten)]
    details: T,
}

impl<T> Check<T> {
    fn new(passed: bool, details: T) -> Self {
        Check { passed, details }
    }
}

#[derive(Serialize)]
struct SummabilityCheck {
    at_k: SummabilityReport,
    at_2k: SummabilityReport,
    relative_change: f64,
}

#[derive(Serialize)]
struct NeighborCheck {
    spatial: NeighborStats,
    brute_force: NeighborStats,
}

#[derive(Serialize)]
struct PrototypeCheck {
    gamma_on_disk: NonvanishingReport,
    psi_on_base_rectangle: NonvanishingReport,
}

#[derive(Serialize)]
struct VerifyReport {
    params: SystemParams,
    prototype: String,
    passed: bool,
    metric_axioms: Check<AxiomReport>,
    separation: Check<SeparationReport>,
    summability: Check<SummabilityCheck>,
    covering: Check<CoverageReport>,
    neighbors: Check<NeighborCheck>,
    moderate_weight: Check<ModerateReport>,
    prototypes: Check<PrototypeCheck>,
}

pub fn verify(c: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = out_dir(c)?;
    let p = &c.params;
    let idx = enumerate_indices(p);

    let axioms = check_metric_axioms(&idx, p, c.triangle_trials, c.seed);
    let sep = separation(&idx, p)?;

    let doubled = SystemParams { k_radius: 2 * p.k_radius.max(1), ..p.clone() };
    let at_k = summability(&idx, p, c.summability_exponent)?;
    let at_2k = summability(&enumerate_indices(&doubled), &doubled, c.summability_exponent)?;
    let relative_change = (at_2k.sup_row_sum - at_k.sup_row_sum) / at_k.sup_row_sum;
    let summ_ok =
        at_k.sup_row_sum.is_finite() && at_2k.sup_row_sum.is_finite() && at_2k.sup_row_sum >= at_k.sup_row_sum;

    let coverage = verify_covering(p, c.grid_resolution)?;
    let t: Vec<Tile> = tiles(p).into_iter().map(|(_, t)| t).collect();
    let spatial = NeighborStats::from_lists(&neighbor_lists(&t));
    let brute_force = NeighborStats::from_lists(&brute_force_neighbor_lists(&t));
    let neighbors_ok = spatial == brute_force;

    let moderate = verify_moderate(p, p.s)?;
    let moderate_ok = moderate.constant.is_finite() && moderate.constant <= moderate.bound;

    let protos = c.prototypes()?;
    let gamma_on_disk = verify_nonvanishing(protos.gamma.as_ref(), Region::Disk4, 256)?;
    let psi_on_base_rectangle =
        verify_nonvanishing(protos.psi.as_ref(), Region::BaseRectangle { epsilon: p.epsilon }, 256)?;
    let protos_ok = gamma_on_disk.min_abs > 0.0 && psi_on_base_rectangle.min_abs > 0.0;

    let report = VerifyReport {
        params: p.clone(),
        prototype: c.prototype.clone(),
        passed: false,
        metric_axioms: Check::new(axioms.passed(), axioms),
        separation: Check::new(sep.passed(), sep),
        summability: Check::new(summ_ok, SummabilityCheck { at_k, at_2k, relative_change }),
        covering: Check::new(coverage.passed(), coverage),
        neighbors: Check::new(neighbors_ok, NeighborCheck { spatial, brute_force }),
        moderate_weight: Check::new(moderate_ok, moderate),
        prototypes: Check::new(protos_ok, PrototypeCheck { gamma_on_disk, psi_on_base_rectangle }),
    };
    let checks = [
        ("metric axioms", report.metric_axioms.passed),
        ("separation", report.separation.passed),
        ("summability", report.summability.passed),
        ("covering", report.covering.passed),
        ("neighbors", report.neighbors.passed),
        ("moderate weight", report.moderate_weight.passed),
        ("prototypes", report.prototypes.passed),
    ];
    let passed = checks.iter().all(|(_, ok)| *ok);
    write_json(&dir.join("verify.json"), &VerifyReport { passed, ..report })?;
    for (name, ok) in checks {
        println!("{:<16} {}", name, if ok { "ok" } else { "FAILED" });
    }
    Ok(Outcome::from_bool(passed))
}

/// One line of `gram.csv`; primed index fields carry a `_2` suffix.
#[derive(Debug, Serialize, Deserialize)]
pub struct GramRow {
    pub j: u32,
    pub m: u32,
    pub l: u32,
    pub k1: i32,
    pub k2: i32,
    pub j_2: u32,
    pub m_2: u32,
    pub l_2: u32,
    pub k1_2: i32,
    pub k2_2: i32,
    pub r: f64,
    pub theta: f64,
    pub t1: f64,
    pub t2: f64,
    pub rho: f64,
    pub re: Option<f64>,
    pub im: Option<f64>,
    pub abs: Option<f64>,
}

impl From<&GramRecord> for GramRow {
    fn from(g: &GramRecord) -> Self {
        GramRow {
            j: g.i.j,
            m: g.i.m,
            l: g.i.l,
            k1: g.i.k1,
            k2: g.i.k2,
            j_2: g.i2.j,
            m_2: g.i2.m,
            l_2: g.i2.l,
            k1_2: g.i2.k1,
            k2_2: g.i2.k2,
            r: g.rho.r_component,
            theta: g.rho.theta_component,
            t1: g.rho.t1_component,
            t2: g.rho.t2_component,
            rho: g.rho.total,
            re: g.value.map(|v| v.re),
            im: g.value.map(|v| v.im),
            abs: g.modulus(),
        }
    }
}

impl From<GramRow> for GramRecord {
    fn from(r: GramRow) -> Self {
        GramRecord {
            i: PacketIndex::new(FrequencyIndex::new(r.j, r.m, r.l), r.k1, r.k2),
            i2: PacketIndex::new(FrequencyIndex::new(r.j_2, r.m_2, r.l_2), r.k1_2, r.k2_2),
            rho: DistanceBreakdown {
                r_component: r.r,
                theta_component: r.theta,
                t1_component: r.t1,
                t2_component: r.t2,
                total: r.rho,
            },
            value: r.re.zip(r.im).map(|(re, im)| Complex64::new(re, im)),
        }
    }
}

pub fn read_gram_csv(path: &Path) -> anyhow::Result<Vec<GramRecord>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rd.deserialize::<GramRow>()
        .map(|row| Ok(row.with_context(|| format!("parsing {}", path.display()))?.into()))
        .collect()
}

#[derive(Serialize)]
struct DecayOutput {
    passed: bool,
    threshold: f64,
    decay: DecayReport,
    localization: LocalizationReport,
    /// `max |G| (1 + rho)^7`, for comparison with the exponent-6 constant.
    constant_exponent_7: f64,
}

fn decay_outputs(dir: &Path, records: &[GramRecord], threshold: f64) -> anyhow::Result<bool> {
    let decay = decay_report(records)?;
    let localization = intrinsic_localization_check(records, 6.0, decay.c_emp, threshold)?;
    let passed = decay.passed() && localization.holds;
    fs::write(dir.join("decay.svg"), decay_plot(records, &decay))?;
    println!(
        "{} records, {} pruned; C_emp = {:.6e}; slope = {:.3}; envelope monotone: {}; localization holds: {}",
        decay.records, decay.pruned, decay.c_emp, decay.slope, decay.envelope_monotone, localization.holds
    );
    let out = DecayOutput {
        passed,
        threshold,
        constant_exponent_7: localization_constant(records, 7.0),
        decay,
        localization,
    };
    write_json(&dir.join("decay.json"), &out)?;
    Ok(passed)
}

pub fn gram(c: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = out_dir(c)?;
    let system = WavePacketSystem::new(c.params.clone(), c.prototypes()?)?;
    let idx = enumerate_indices(&c.params);
    let records = gram_matrix(&idx, &system, c.threshold)?;
    let mut w = csv_writer(&dir.join("gram.csv"))?;
    for r in &records {
        w.serialize(GramRow::from(r))?;
    }
    w.flush()?;
    Ok(Outcome::from_bool(decay_outputs(dir, &records, c.threshold)?))
}

pub fn decay_report_cmd(c: &RunConfig, gram_csv: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let dir = out_dir(c)?;
    let path = gram_csv.unwrap_or_else(|| dir.join("gram.csv"));
    let records = read_gram_csv(&path)?;
    anyhow::ensure!(!records.is_empty(), "{} has no records", path.display());
    Ok(Outcome::from_bool(decay_outputs(dir, &records, c.threshold)?))
}

#[derive(Serialize)]
struct CoefficientRow {
    j: u32,
    m: u32,
    l: u32,
    k1: i32,
    k2: i32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct NormEntry {
    #[serde(with = "extended_real")]
    q: f64,
    value: f64,
}

#[derive(Serialize)]
struct FrameOutput {
    signal: PathBuf,
    counts: [usize; 2],
    step: [f64; 2],
    origin: [f64; 2],
    coefficients: usize,
    largest_coefficient: Option<PacketIndex>,
    s: f64,
    #[serde(with = "extended_real")]
    p: f64,
    #[serde(with = "extended_real")]
    q: f64,
    coefficient_norm: f64,
    /// Same coefficients, `q` in {1, 2, inf}.
    norms_by_q: Vec<NormEntry>,
    reconstruction: Option<ReconstructionReport>,
    /// Why the reconstruction was skipped.
    reconstruction_note: Option<String>,
}

/// Marks the error as a problem with the input rather than a failed check.
#[derive(Debug)]
pub struct InputError(pub anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

pub fn frame(c: &RunConfig, signal: &Path) -> anyhow::Result<Outcome> {
    let f = SampledField::load(signal)
        .with_context(|| format!("reading signal {}", signal.display()))
        .map_err(InputError)?;
    if f.domain != wavepacket::Domain::Time {
        return Err(InputError(anyhow::anyhow!("signal must be a time-domain field")).into());
    }
    let dir = out_dir(c)?;
    let p = &c.params;
    let system = WavePacketSystem::new(p.clone(), c.prototypes()?)?;
    let coeffs = analyze(&f, &system).map_err(|e| InputError(e.into()))?;

    let mut w = csv_writer(&dir.join("coefficients.csv"))?;
    for (i, v) in &coeffs.values {
        w.serialize(CoefficientRow { j: i.j, m: i.m, l: i.l, k1: i.k1, k2: i.k2, re: v.re, im: v.im })?;
    }
    w.flush()?;

    let norms_by_q = [1.0, 2.0, f64::INFINITY]
        .into_iter()
        .map(|q| Ok(NormEntry { q, value: coefficient_norm(&coeffs, p.s, p.p, q, p)? }))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (reconstruction, reconstruction_note) = match FrameOperator::new(&system, f.grid) {
        Err(e) => (None, Some(e.to_string())),
        Ok(op) => match reconstruct(&op, &f, c.cg_max_iterations, c.cg_tolerance) {
            Ok((_, report)) => (Some(report), None),
            Err(e @ wavepacket::Error::NotBandLimited(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
    };
    let out = FrameOutput {
        signal: signal.to_path_buf(),
        counts: f.grid.counts,
        step: f.grid.step,
        origin: f.grid.origin,
        coefficients: coeffs.values.len(),
        largest_coefficient: coeffs.argmax(),
        s: p.s,
        p: p.p,
        q: p.q,
        coefficient_norm: coefficient_norm(&coeffs, p.s, p.p, p.q, p)?,
        norms_by_q,
        reconstruction,
        reconstruction_note,
    };
    write_json(&dir.join("reconstruction.json"), &out)?;
    match (&out.reconstruction, &out.reconstruction_note) {
        (Some(r), _) => println!(
            "{} coefficients; norm {:.6e}; reconstruction error {:.3e} after {} iterations",
            out.coefficients, out.coefficient_norm, r.relative_error, r.iterations
        ),
        (None, Some(note)) => {
            println!(
                "{} coefficients; norm {:.6e}; reconstruction skipped: {note}",
                out.coefficients, out.coefficient_norm
            )
        }
        (None, None) => {}
    }
    let _ = std::io::stdout().flush();
    Ok(Outcome::Passed)
}
