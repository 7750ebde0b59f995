// SPDX-License-Identifier: Apache-2.0

//! Row-major 2D FFTs on top of `rustfft`.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Unnormalised in-place 2D DFT of a row-major `n0 x n1` array.
///
/// `Forward` computes `sum_p x[p] e^{-2 pi i p.q / n}`, `Inverse` the same with
/// a positive exponent.
pub(crate) fn fft2(data: &mut [Complex64], n0: usize, n1: usize, direction: FftDirection) {
    assert_eq!(data.len(), n0 * n1);
    let mut planner = FftPlanner::<f64>::new();

    let rows = planner.plan_fft(n1, direction);
    for row in data.chunks_exact_mut(n1) {
        rows.process(row);
    }

    let cols = planner.plan_fft(n0, direction);
    let mut column = vec![Complex64::new(0.0, 0.0); n0];
    for c in 0..n1 {
        for r in 0..n0 {
            column[r] = data[r * n1 + c];
        }
        cols.process(&mut column);
        for r in 0..n0 {
            data[r * n1 + c] = column[r];
        }
    }
}
