// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use wavepacket::field::HEADER_LEN;
use wavepacket::frame::{analyze, synthesize, CoefficientSet, FrameOperator};
use wavepacket::gram::inner_product;
use wavepacket::index::enumerate_indices;
use wavepacket::metric::rho;
use wavepacket::{
    Complex64, Domain, FrequencyIndex, GridSpec, PacketIndex, SampledField, SystemParams, Vec2, WavePacketSystem,
};

fn small() -> WavePacketSystem {
    WavePacketSystem::gaussian(SystemParams { k_radius: 1, ..Default::default() }).unwrap()
}

fn grid() -> GridSpec {
    GridSpec::centered(Vec2::zeros(), 0.05, 200).unwrap()
}

#[test]
fn binary_layout() {
    let g = GridSpec::centered(Vec2::zeros(), 0.5, 4).unwrap();
    let f = SampledField::from_fn(g, Domain::Time, |t| Complex64::new(t.x, -t.y));
    let mut bytes = Vec::new();
    f.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + 16 * 16);
    assert_eq!(&bytes[0..4], &4u32.to_le_bytes());
    assert_eq!(&bytes[8..16], &0.5f64.to_le_bytes());
    // row-major: second value is (p0, p1) = (0, 1)
    let second = HEADER_LEN + 16;
    assert_eq!(&bytes[second + 8..second + 16], &(-f.grid.point(0, 1).y).to_le_bytes());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    std::fs::write(&path, &bytes).unwrap();
    let bare = SampledField::load(&path).unwrap();
    assert_eq!(bare.grid, f.grid);
    assert_eq!(bare.values, f.values);
}

#[test]
fn analysis_of_a_packet_peaks_at_its_index() {
    let system = small();
    let i0 = PacketIndex::new(FrequencyIndex::new(2, 0, 5), 0, -1);
    let f = system.sample_packet(i0, Domain::Time, grid()).unwrap();
    let c = analyze(&f, &system).unwrap();
    assert_eq!(c.argmax(), Some(i0));
    assert!((c.get(i0) - 0.5).norm() < 1e-8, "{}", c.get(i0));

    let fast = FrameOperator::new(&system, grid()).unwrap().analyze(&f, &system.params).unwrap();
    for (i, v) in &c.values {
        assert!((fast.get(*i) - v).norm() < 1e-9, "{i:?}");
    }
}

#[test]
fn synthesis_is_adjoint_to_analysis() {
    let system = small();
    let f = wavepacket::frame::gaussian_signal(grid(), Vec2::new(0.3, -0.2), 0.5);
    let mut c = CoefficientSet::zeros(system.params.clone());
    for (n, v) in c.values.values_mut().enumerate() {
        *v = Complex64::new((n % 7) as f64 - 3.0, (n % 5) as f64 * 0.5);
    }
    let lhs = c.dot(&analyze(&f, &system).unwrap());
    let g = synthesize(&c, grid(), &system).unwrap();
    let rhs = g.inner(&f);
    assert!((lhs - rhs).norm() < 1e-9 * lhs.norm(), "{lhs} vs {rhs}");
}

fn any_index() -> impl Strategy<Value = PacketIndex> {
    let idx = enumerate_indices(&SystemParams::default());
    (0..idx.len()).prop_map(move |n| idx[n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_is_hermitian_and_bounded(a in any_index(), b in any_index()) {
        let system = WavePacketSystem::gaussian(SystemParams::default()).unwrap();
        let ab = inner_product(&system, a, b).unwrap();
        let ba = inner_product(&system, b, a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12);
        prop_assert!(ab.norm() <= 0.5 + 1e-12);
        let d = rho(a, b, &system.params);
        prop_assert_eq!(d.total == 0.0, a == b);
    }
}
