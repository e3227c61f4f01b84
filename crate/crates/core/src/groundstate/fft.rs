use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{Boundary, CouplingParams, LatticeSpec};
use crate::spectrum::dispersion_value;

use super::{guard, CorrelationTable, Engine, TableDomain};

/// In-place 2D DFT of a row-major `m x m` grid.
fn fft2(grid: &mut [Complex64], m: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    for row in grid.chunks_exact_mut(m) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for x in 0..m {
        for y in 0..m {
            column[y] = grid[y * m + x];
        }
        fft.process(&mut column);
        for y in 0..m {
            grid[y * m + x] = column[y];
        }
    }
}

/// Periodic-lattice correlations:
/// `<q_0 q_r> = 1/(2 M^2) sum_k v_k^{-1/2} cos(k.r)` and likewise with
/// `v_k^{1/2}` for momenta, `k = 2 pi (a, b) / M`.
pub fn covariance_pbc_fft(lattice: &LatticeSpec, params: &CouplingParams) -> Result<CorrelationTable> {
    if lattice.boundary() != Boundary::Periodic {
        return Err(Error::InvalidArgument(
            "the fft engine needs a periodic lattice".into(),
        ));
    }
    let m = lattice.side();
    let step = 2.0 * PI / m as f64;
    let mut spectrum = Vec::with_capacity(m * m);
    for b in 0..m {
        for a in 0..m {
            spectrum.push(dispersion_value(params, step * a as f64, step * b as f64));
        }
    }
    let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    guard(params, min)?;

    let norm = 1.0 / (2.0 * (m * m) as f64);
    let transform = |f: fn(f64) -> f64| {
        let mut grid: Vec<Complex64> = spectrum.iter().map(|&v| Complex64::new(f(v), 0.0)).collect();
        fft2(&mut grid, m);
        grid.into_iter().map(|z| z.re * norm).collect::<Vec<f64>>()
    };
    let qq = transform(|v| 1.0 / v.sqrt());
    let pp = transform(f64::sqrt);
    Ok(CorrelationTable::new(
        TableDomain::Periodic { side: m },
        qq,
        pp,
        *params,
        Engine::Fft,
    ))
}
