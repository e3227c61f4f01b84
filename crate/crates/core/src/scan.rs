//! Parameter sweeps, area-law fits and derivatives of the nearest-neighbour
//! two-site parameter `zeta_1`.
//!
//! Every sweep evaluates its rows in parallel and returns them in sample
//! order, so results do not depend on the worker count.

use rayon::prelude::*;

use crate::entanglement::{centered_block_entropy, two_site_params, EntropyMode, TwoSiteParams};
use crate::error::{Error, Result};
use crate::groundstate::{self, center_site, Engine, Moments, QuadratureSpec, ZonePlan};
use crate::model::{CouplingParams, LatticeSpec};
use crate::spectrum::{critical_g_equal, energy_gap, least_squares};

/// Default finite-difference step for `d zeta_1 / dg`.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Relative distance below `g_c` used for near-critical samples.
pub const NEAR_CRITICAL_OFFSET: f64 = 1e-11;

/// `g_c (1 - 1e-11)`.
pub fn near_critical_g(params: &CouplingParams) -> f64 {
    critical_g_equal(params) * (1.0 - NEAR_CRITICAL_OFFSET)
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// 200 points on `[1, g_c - 1e-4]`.
pub fn default_derivative_grid(params: &CouplingParams) -> Vec<f64> {
    linspace(1.0, critical_g_equal(params) - 1e-4, 200)
}

/// The horizontal pair next to the lattice center.
pub fn nearest_neighbor_pair(lattice: &LatticeSpec) -> (groundstate::Site, groundstate::Site) {
    let c = center_site(lattice);
    (c, (c.0 + 1, c.1))
}

fn zeta_nn(state: &impl Moments) -> Result<TwoSiteParams> {
    let (a, b) = nearest_neighbor_pair(&state.lattice());
    two_site_params(state, a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Supplies `omega`, `kappa` and `N`; couplings come from `g_values`.
    pub base: CouplingParams,
    /// Samples of `g = g1 = g2`.
    pub g_values: Vec<f64>,
    pub lattice: LatticeSpec,
    pub engine: Engine,
    /// Block sides; empty skips the entropies.
    pub block_sizes: Vec<usize>,
    pub mode: EntropyMode,
    pub quad: QuadratureSpec,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.g_values.is_empty() {
            return Err(Error::InvalidArgument("sweep has no sample points".into()));
        }
        if self.block_sizes.contains(&0) || self.block_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "block sizes must be positive and strictly increasing: {:?}",
                self.block_sizes
            )));
        }
        self.engine.supports(&self.lattice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepData {
    pub gap: f64,
    /// `(L, E)` for each block size.
    pub entropies: Vec<(usize, f64)>,
    pub zeta1: f64,
    pub eof1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub g: f64,
    pub outcome: Result<SweepData>,
}

fn sweep_point(spec: &SweepSpec, g: f64) -> Result<SweepData> {
    let params = spec.base.with_equal_coupling(g)?;
    let gap = energy_gap(&params, &spec.lattice)?;
    let extent = spec.block_sizes.last().map_or(1, |&l| l.saturating_sub(1).max(1));
    let state = groundstate::solve(&params, &spec.lattice, spec.engine, extent, &spec.quad)?;
    let entropies = spec
        .block_sizes
        .iter()
        .map(|&l| Ok((l, centered_block_entropy(&state, l, spec.mode)?)))
        .collect::<Result<Vec<_>>>()?;
    let two = zeta_nn(&state)?;
    Ok(SweepData {
        gap,
        entropies,
        zeta1: two.zeta,
        eof1: two.eof,
    })
}

/// One row per sample of `g`; a failing sample is recorded in its row.
pub fn sweep_g(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .g_values
        .par_iter()
        .enumerate()
        .map(|(index, &g)| SweepRow {
            index,
            g,
            outcome: sweep_point(spec, g),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// `max_i |E_i - (a L_i + b)| / |E_i|`.
    pub max_rel_residual: f64,
    pub samples: usize,
}

/// Least-squares line `E = a L + b` through an entropy curve.
pub fn area_law_fit(curve: &[(usize, f64)]) -> Result<FitResult> {
    if curve.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", curve.len())));
    }
    let mut ls: Vec<usize> = curve.iter().map(|c| c.0).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 2 {
        return Err(Error::Fit("all block sizes coincide".into()));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(l, e)| (l as f64, e)).collect();
    let (slope, intercept) = least_squares(&pts);
    let max_rel_residual = pts
        .iter()
        .map(|&(l, e)| {
            let r = (e - (slope * l + intercept)).abs();
            if r == 0.0 {
                0.0
            } else {
                r / e.abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        max_rel_residual,
        samples: curve.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub g: f64,
    pub zeta1: f64,
    /// Central difference with step `h`.
    pub raw: f64,
    /// Richardson combination of steps `h` and `h/2`.
    pub richardson: f64,
}

/// `d zeta_1 / dg` by central differences. For the infinite engine every
/// stencil point shares the zone mesh converged at `g + h`.
pub fn derivative_zeta(
    base: &CouplingParams,
    lattice: &LatticeSpec,
    engine: Engine,
    g: f64,
    h: f64,
    quad: &QuadratureSpec,
) -> Result<Derivative> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    engine.supports(lattice)?;
    let points = [g - h, g - 0.5 * h, g, g + 0.5 * h, g + h];
    let zetas: Vec<f64> = match engine {
        Engine::Infinite => {
            let (plan, _) = ZonePlan::converge(&base.with_equal_coupling(g + h)?, 1, quad)?;
            points
                .iter()
                .map(|&x| zeta_nn(&plan.evaluate(&base.with_equal_coupling(x)?, 1)?).map(|t| t.zeta))
                .collect::<Result<_>>()?
        }
        _ => points
            .iter()
            .map(|&x| {
                let state = groundstate::solve(&base.with_equal_coupling(x)?, lattice, engine, 1, quad)?;
                zeta_nn(&state).map(|t| t.zeta)
            })
            .collect::<Result<_>>()?,
    };
    let raw = (zetas[4] - zetas[0]) / (2.0 * h);
    let half = (zetas[3] - zetas[1]) / h;
    Ok(Derivative {
        g,
        zeta1: zetas[2],
        raw,
        richardson: (4.0 * half - raw) / 3.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeRow {
    pub index: usize,
    pub g: f64,
    pub outcome: Result<Derivative>,
}

/// [`derivative_zeta`] over a grid of `g`; failures stay in their rows.
pub fn derivative_scan(
    base: &CouplingParams,
    lattice: &LatticeSpec,
    engine: Engine,
    grid: &[f64],
    h: f64,
    quad: &QuadratureSpec,
) -> Vec<DerivativeRow> {
    grid.par_iter()
        .enumerate()
        .map(|(index, &g)| DerivativeRow {
            index,
            g,
            outcome: derivative_zeta(base, lattice, engine, g, h, quad),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePeak {
    pub side: usize,
    /// Location of the largest `|d zeta_1 / dg|`.
    pub g_peak: f64,
    pub peak: f64,
    pub rows: Vec<Derivative>,
}

/// Peak of `|d zeta_1 / dg|` over `grid` for periodic `M x M` lattices
/// with odd `M >= 5`, using the pair next to the center.
pub fn finite_size_peak(
    base: &CouplingParams,
    sides: &[usize],
    grid: &[f64],
    h: f64,
) -> Result<Vec<FinitePeak>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty g grid".into()));
    }
    if let Some(&bad) = sides.iter().find(|&&m| m < 5 || m % 2 == 0) {
        return Err(Error::InvalidArgument(format!(
            "finite-size sides must be odd and >= 5, got {bad}"
        )));
    }
    let quad = QuadratureSpec::default();
    sides
        .iter()
        .map(|&side| {
            let lattice = LatticeSpec::periodic(side)?;
            let rows = derivative_scan(base, &lattice, Engine::Fft, grid, h, &quad)
                .into_iter()
                .map(|r| r.outcome)
                .collect::<Result<Vec<_>>>()?;
            let best = rows
                .iter()
                .max_by(|a, b| a.richardson.abs().total_cmp(&b.richardson.abs()))
                .expect("grid is non-empty");
            Ok(FinitePeak {
                side,
                g_peak: best.g,
                peak: best.richardson.abs(),
                rows,
            })
        })
        .collect()
}
