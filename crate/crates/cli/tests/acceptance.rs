// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavepacket::covering::{brute_force_neighbor_lists, neighbor_lists, tile, tiles, verify_covering, NeighborStats};
use wavepacket::frame::{gaussian_signal, reconstruct, FrameOperator};
use wavepacket::gram::{
    decay_report, gram_matrix, inner_product, inner_product_time, intrinsic_localization_check, DecayReport,
    GramRecord, DEFAULT_THRESHOLD,
};
use wavepacket::index::enumerate_indices;
use wavepacket::metric::{check_metric_axioms, rho, separation, summability};
use wavepacket::packet::dft_consistency;
use wavepacket::partition::build_partition;
use wavepacket::{GridSpec, PacketIndex, SystemParams, Vec2, WavePacketSystem};

const SEED: u64 = 20240611;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn reference() -> SystemParams {
    SystemParams::default()
}

fn gaussian(p: &SystemParams) -> WavePacketSystem {
    WavePacketSystem::gaussian(p.clone()).expect("valid system")
}

fn metric_axioms() -> Verdict {
    let p = reference();
    let idx = enumerate_indices(&p);
    let start = Instant::now();
    let r = check_metric_axioms(&idx, &p, 100_000, SEED);
    let elapsed = start.elapsed();
    verdict(
        r.violations() == 0 && r.triangle_trials == 100_000 && elapsed < Duration::from_secs(60),
        format!(
            "{} pairs, {} triples, {} violations, {:.1?}",
            r.pairs_checked,
            r.triangle_trials,
            r.violations(),
            elapsed
        ),
    )
}

fn separated() -> Verdict {
    let p = reference();
    let r = separation(&enumerate_indices(&p), &p).expect("separation");
    verdict(
        r.infimum > 0.0 && r.lattice_bound == 0.0625 && r.same_block_min >= 0.0625,
        format!("infimum {:.6}, same-block minimum {:.6}, bound {}", r.infimum, r.same_block_min, r.lattice_bound),
    )
}

fn summable() -> Verdict {
    let sums: Vec<(u32, f64)> = [2, 4, 8, 16]
        .into_iter()
        .map(|k| {
            let p = SystemParams { j_max: 1, k_radius: k, ..reference() };
            (k, summability(&enumerate_indices(&p), &p, 6.0).expect("summability").sup_row_sum)
        })
        .collect();
    let monotone = sums.windows(2).all(|w| w[1].1 >= w[0].1);
    let change = (sums[3].1 - sums[2].1) / sums[2].1;
    let listing: Vec<String> = sums.iter().map(|(k, s)| format!("K={k}: {s:.4}")).collect();
    verdict(
        monotone && change < 0.01,
        format!("{}; change 8 -> 16 {:.3}%, monotone {monotone}", listing.join(", "), 100.0 * change),
    )
}

fn covered() -> Verdict {
    let p = reference();
    let r = verify_covering(&p, 256).expect("covering");
    let t: Vec<_> = tiles(&p).into_iter().map(|(_, t)| t).collect();
    let spatial = NeighborStats::from_lists(&neighbor_lists(&t));
    let brute = NeighborStats::from_lists(&brute_force_neighbor_lists(&t));
    verdict(
        r.uncovered.is_empty() && spatial == brute,
        format!(
            "{} uncovered of {}; max neighbours {} (spatial) / {} (brute force)",
            r.uncovered.len(),
            r.points_tested,
            spatial.max_neighbors,
            brute.max_neighbors
        ),
    )
}

fn random_indices(idx: &[PacketIndex], n: usize, rng: &mut ChaCha8Rng) -> Vec<PacketIndex> {
    (0..n).map(|_| idx[rng.random_range(0..idx.len())]).collect()
}

fn dft_identity() -> Verdict {
    let p = reference();
    let system = gaussian(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let worst = random_indices(&enumerate_indices(&p), 10, &mut rng)
        .into_iter()
        .map(|i| dft_consistency(&system, i, 256).expect("dft"))
        .fold(0.0, f64::max);
    verdict(worst <= 1e-6, format!("worst relative l2 {worst:.3e} over 10 indices"))
}

fn plancherel() -> Verdict {
    let p = reference();
    let system = gaussian(&p);
    let idx = enumerate_indices(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for i in random_indices(&idx, 20, &mut rng) {
        // partner within rho 4, so the inner product is not negligible
        let near: Vec<PacketIndex> = idx.iter().copied().filter(|&j| rho(i, j, &p).total <= 4.0).collect();
        let j = near[rng.random_range(0..near.len())];
        let freq = inner_product(&system, i, j).expect("frequency quadrature");
        let time = inner_product_time(&system, i, j).expect("time quadrature");
        // relative to |psi_i| |psi_j| = 1/2
        worst = worst.max((freq - time).norm() / 0.5);
    }
    verdict(worst <= 1e-8, format!("worst relative difference {worst:.3e} over 20 pairs"))
}

fn gram_oracle(records: &[GramRecord], delta: f64) -> Verdict {
    let (mut zero_pairs, mut zero_worst) = (0usize, 0.0f64);
    let (mut diag, mut diag_worst) = (0usize, 0.0f64);
    for r in records {
        let Some(g) = r.value else { continue };
        if r.i.is_zero_block() && r.i2.is_zero_block() {
            let dk = r.i.k() - r.i2.k();
            let expected = 0.5 * (-std::f64::consts::PI * delta * delta * dk.norm_squared() / 2.0).exp();
            zero_worst = zero_worst.max((g - expected).norm());
            zero_pairs += 1;
        } else if r.i == r.i2 {
            diag_worst = diag_worst.max((g - 0.5).norm());
            diag += 1;
        }
    }
    let diag_expected = records.iter().filter(|r| r.i == r.i2 && !r.i.is_zero_block()).count();
    verdict(
        zero_pairs >= 50 && zero_worst <= 1e-9 && diag == diag_expected && diag_worst <= 1e-8,
        format!(
            "{zero_pairs} zero-block pairs, worst {zero_worst:.2e}; {diag} diagonal entries, worst {diag_worst:.2e}"
        ),
    )
}

fn near_orthogonal(report: &DecayReport, elapsed: Duration) -> Verdict {
    verdict(
        report.envelope_monotone && report.slope <= -6.0 && elapsed < Duration::from_secs(600),
        format!(
            "{} records, envelope monotone {}, slope {:.3}, scan {:.1?}",
            report.records, report.envelope_monotone, report.slope, elapsed
        ),
    )
}

fn localized(records: &[GramRecord], report: &DecayReport) -> Verdict {
    let full = intrinsic_localization_check(records, 6.0, report.c_emp, DEFAULT_THRESHOLD).expect("check");
    let half = intrinsic_localization_check(records, 6.0, report.c_emp / 2.0, DEFAULT_THRESHOLD).expect("check");
    verdict(
        full.holds && half.witness.is_some(),
        format!(
            "C_emp {:.4e}: {} violations; C_emp/2: {} violations, witness {:?}",
            report.c_emp, full.violations, half.violations, half.witness
        ),
    )
}

fn partition() -> Verdict {
    let p = reference();
    let pou = build_partition(&p).expect("partition");
    let freqs: Vec<_> = pou.frequencies().collect();
    let r1 = p.inner_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let (mut worst, mut outside) = (0.0f64, 0usize);
    for _ in 0..10_000 {
        let xi = loop {
            let xi = Vec2::new(rng.random_range(-r1..r1), rng.random_range(-r1..r1));
            if xi.norm() < r1 {
                break xi;
            }
        };
        let vals = pou.eval_all(xi).expect("covered point");
        worst = worst.max((vals.iter().map(|(_, v)| v).sum::<f64>() - 1.0).abs());
        outside += vals.iter().filter(|(pos, _)| !tile(&p, freqs[*pos]).contains(xi)).count();
    }
    verdict(
        worst <= 1e-10 && outside == 0,
        format!("worst |sum - 1| {worst:.2e} at 10^4 points; {outside} values outside their tile"),
    )
}

fn frame_round_trip() -> Verdict {
    let grid = GridSpec::centered(Vec2::zeros(), 0.05, 200).expect("grid");
    let f = gaussian_signal(grid, Vec2::zeros(), 0.6);
    let mut errors = Vec::new();
    for (delta, k_radius) in [(0.25, 6), (0.125, 12)] {
        let p = SystemParams { delta, k_radius, ..reference() };
        let op = FrameOperator::new(&gaussian(&p), grid).expect("operator");
        match reconstruct(&op, &f, 200, 1e-5) {
            Ok((_, r)) => errors.push((delta, r.iterations, r.relative_error)),
            Err(e) => return verdict(false, format!("delta {delta}: {e}")),
        }
    }
    let listing: Vec<String> =
        errors.iter().map(|(d, it, e)| format!("delta {d}: error {e:.3e} after {it} iterations")).collect();
    let (coarse, fine) = (errors[0].2, errors[1].2);
    verdict(fine <= 1e-2 && errors[1].1 <= 200 && fine <= coarse, listing.join("; "))
}

fn run_gram(dir: &Path, threads: usize) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wavepacket"))
        .args(["--threads", &threads.to_string(), "gram", "-o"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn deterministic() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let (a, b) = (tmp.path().join("t1"), tmp.path().join("t8"));
    for (dir, threads) in [(&a, 1), (&b, 8)] {
        if let Err(e) = run_gram(dir, threads) {
            return verdict(false, format!("gram with {threads} threads failed: {e}"));
        }
    }
    let mut differing = Vec::new();
    for name in ["gram.csv", "decay.json", "decay.svg"] {
        let (x, y) = (std::fs::read(a.join(name)).unwrap_or_default(), std::fs::read(b.join(name)).unwrap_or_default());
        if x.is_empty() || x != y {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            "gram.csv, decay.json, decay.svg identical".into()
        } else {
            format!("differ: {differing:?}")
        },
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |n: u32, name: &'static str, v: Verdict| {
        println!("criterion {n:>2} {:<22} {}  {}", name, if v.passed { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v));
    };

    report(1, "metric axioms", metric_axioms());
    report(2, "separation", separated());
    report(3, "summability", summable());
    report(4, "covering", covered());
    report(5, "fourier identity", dft_identity());
    report(6, "plancherel", plancherel());

    let p = reference();
    let start = Instant::now();
    let records = gram_matrix(&enumerate_indices(&p), &gaussian(&p), DEFAULT_THRESHOLD).expect("gram scan");
    let elapsed = start.elapsed();
    let decay = decay_report(&records).expect("decay report");
    report(7, "gram oracle", gram_oracle(&records, p.delta));
    report(8, "near orthogonality", near_orthogonal(&decay, elapsed));
    report(9, "localization", localized(&records, &decay));
    drop(records);

    report(10, "partition of unity", partition());
    report(11, "frame round trip", frame_round_trip());
    report(12, "determinism", deterministic());

    let failed: Vec<u32> = results.iter().filter(|(_, _, v)| !v.passed).map(|(n, _, _)| *n).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
