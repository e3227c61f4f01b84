//! Block entropies and two-site entanglement of the Gaussian ground state.
//!
//! A block's reduced state is fixed by the principal submatrices `Q_L`,
//! `P_L`. Its symplectic eigenvalues are `nu_i = sqrt(eig(4 Q_L P_L))`,
//! normalised so the vacuum gives `nu = 1`, and the entropy in bits is
//!
//! ```text
//! E = sum_i [ (nu+1)/2 log2 (nu+1)/2 - (nu-1)/2 log2 (nu-1)/2 ].
//! ```

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groundstate::{self, Engine, Moments, QuadratureSpec, Site};
use crate::linalg;
use crate::model::{Boundary, CouplingParams, LatticeSpec};

/// Symplectic eigenvalues below `1 - UNCERTAINTY_SLACK` are rejected.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;

/// Default relative tolerance for pairing degenerate symplectic eigenvalues.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// Relative mismatch of on-site moments tolerated for a two-site pair.
pub const PAIR_SYMMETRY_TOL: f64 = 1e-6;

/// An `L x L` block of sites with lower-left corner `anchor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRegion {
    anchor: Site,
    side: usize,
}

impl BlockRegion {
    pub fn new(anchor: Site, side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidRegion("block side must be >= 1".into()));
        }
        Ok(Self { anchor, side })
    }

    /// Block placed at the center of the lattice.
    pub fn centered(lattice: &LatticeSpec, side: usize) -> Result<Self> {
        if lattice.is_infinite() {
            return Self::new((0, 0), side);
        }
        let m = lattice.side();
        if side > m {
            return Err(Error::InvalidRegion(format!(
                "block side {side} exceeds lattice side {m}"
            )));
        }
        let c = ((m - side) / 2) as i64;
        Self::new((c, c), side)
    }

    pub fn anchor(&self) -> Site {
        self.anchor
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Sites in row-major order.
    pub fn sites(&self) -> Vec<Site> {
        let l = self.side as i64;
        (0..l * l)
            .map(|k| (self.anchor.0 + k % l, self.anchor.1 + k / l))
            .collect()
    }

    fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        let m = lattice.side() as i64;
        let l = self.side as i64;
        match lattice.boundary() {
            Boundary::Infinite => Ok(()),
            Boundary::Periodic if l <= m => Ok(()),
            Boundary::Open
                if self.anchor.0 >= 0
                    && self.anchor.1 >= 0
                    && self.anchor.0 + l <= m
                    && self.anchor.1 + l <= m =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidRegion(format!(
                "{l}x{l} block at {:?} does not fit the {} {m}x{m} lattice",
                self.anchor,
                lattice.boundary().as_str()
            ))),
        }
    }
}

/// Principal submatrices of `Q` and `P` on an arbitrary site list.
pub fn reduce_sites(moments: &impl Moments, sites: &[Site]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = sites.len();
    let mut q = DMatrix::zeros(n, n);
    let mut p = DMatrix::zeros(n, n);
    for (i, &a) in sites.iter().enumerate() {
        for (j, &b) in sites.iter().enumerate().skip(i) {
            let (qq, pp) = moments.pair(a, b)?;
            q[(i, j)] = qq;
            q[(j, i)] = qq;
            p[(i, j)] = pp;
            p[(j, i)] = pp;
        }
    }
    Ok((q, p))
}

pub fn reduce_block(moments: &impl Moments, region: &BlockRegion) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    region.validate(&moments.lattice())?;
    reduce_sites(moments, &region.sites())
}

/// Symplectic eigenvalues, sorted descending, each `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    /// Check the uncertainty bound, clamp round-off below 1 and sort.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if !(*v >= 1.0 - UNCERTAINTY_SLACK) {
                return Err(Error::Uncertainty { value: *v });
            }
            *v = v.max(1.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values with multiplicity 1 or 2: neighbours within
    /// `rel_tol` are paired, each pair consuming exactly two values.
    pub fn multiplicities(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            if i + 1 < self.values.len() && (v - self.values[i + 1]).abs() <= rel_tol * v {
                out.push((v, 2));
                i += 2;
            } else {
                out.push((v, 1));
                i += 1;
            }
        }
        out
    }
}

/// `nu_i = sqrt(eig(4 Q P))` through the symmetric congruence
/// `4 L^T P L` with `Q = L L^T`.
pub fn symplectic_spectrum(q: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    if q.shape() != p.shape() || !q.is_square() {
        return Err(Error::InvalidArgument(format!(
            "Q {:?} and P {:?} must be square and equal in shape",
            q.shape(),
            p.shape()
        )));
    }
    let l = linalg::cholesky_lower(q, "Q")?;
    if nalgebra::Cholesky::new(p.clone()).is_none() {
        return Err(Error::NotPositiveDefinite("P"));
    }
    let mut m = l.transpose() * p * &l * 4.0;
    linalg::symmetrize(&mut m);
    let eig = linalg::symmetric_eigenvalues(m)?;
    SymplecticSpectrum::from_values(eig.iter().map(|&x| x.max(0.0).sqrt()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyMode {
    /// Every symplectic eigenvalue contributes.
    CountAll,
    /// Degenerate pairs contribute once.
    DegenerateOnce { rel_tol: f64 },
}

impl Default for EntropyMode {
    fn default() -> Self {
        EntropyMode::DegenerateOnce {
            rel_tol: DEFAULT_DEGENERACY_TOL,
        }
    }
}

impl EntropyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntropyMode::CountAll => "count_all",
            EntropyMode::DegenerateOnce { .. } => "degenerate_once",
        }
    }
}

/// Entropy in bits of one mode with symplectic eigenvalue `nu >= 1`.
pub fn mode_entropy(nu: f64) -> f64 {
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    let tail = if minus > 0.0 { minus * minus.log2() } else { 0.0 };
    plus * plus.log2() - tail
}

pub fn block_entropy(spectrum: &SymplecticSpectrum, mode: EntropyMode) -> f64 {
    match mode {
        EntropyMode::CountAll => spectrum.values().iter().map(|&nu| mode_entropy(nu)).sum(),
        EntropyMode::DegenerateOnce { rel_tol } => spectrum
            .multiplicities(rel_tol)
            .iter()
            .map(|&(nu, _)| mode_entropy(nu))
            .sum(),
    }
}

/// Entropy of a centered `L x L` block for each `L` in `sizes`.
pub fn entropy_vs_l(
    params: &CouplingParams,
    lattice: &LatticeSpec,
    engine: Engine,
    sizes: &[usize],
    mode: EntropyMode,
    quad: &QuadratureSpec,
) -> Result<Vec<(usize, f64)>> {
    let Some(&max_l) = sizes.last() else {
        return Err(Error::InvalidArgument("no block sizes given".into()));
    };
    if sizes.first() == Some(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "block sizes must be positive and strictly increasing: {sizes:?}"
        )));
    }
    if !lattice.is_infinite() && max_l > lattice.side() {
        return Err(Error::InvalidRegion(format!(
            "largest block {max_l} exceeds lattice side {}",
            lattice.side()
        )));
    }
    let state = groundstate::solve(params, lattice, engine, max_l - 1, quad)?;
    sizes
        .par_iter()
        .map(|&l| Ok((l, centered_block_entropy(&state, l, mode)?)))
        .collect()
}

/// Entropy of the centered `side x side` block of an already solved state.
pub fn centered_block_entropy(state: &impl Moments, side: usize, mode: EntropyMode) -> Result<f64> {
    let region = BlockRegion::centered(&state.lattice(), side)?;
    let (q, p) = reduce_block(state, &region)?;
    Ok(block_entropy(&symplectic_spectrum(&q, &p)?, mode))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteParams {
    pub n: f64,
    pub c: f64,
    pub zeta: f64,
    /// Entanglement of formation in bits.
    pub eof: f64,
    pub separable: bool,
    /// `<q_i q_j> <p_i p_j> > 0`; `c` was set to zero.
    pub sign_anomaly: bool,
}

/// `n = 2 sqrt(<q_i^2> <p_i^2>)`, `c = 2 sqrt(-<q_i q_j> <p_i p_j>)`, `zeta = n - c`.
pub fn two_site_params(moments: &impl Moments, i: Site, j: Site) -> Result<TwoSiteParams> {
    if i == j {
        return Err(Error::InvalidArgument("two-site parameters need distinct sites".into()));
    }
    let (qi, pi) = moments.pair(i, i)?;
    let (qj, pj) = moments.pair(j, j)?;
    let relative = ((qi - qj) / qi).abs().max(((pi - pj) / pi).abs());
    if relative > PAIR_SYMMETRY_TOL {
        return Err(Error::AsymmetricPair { i, j, relative });
    }
    let (qij, pij) = moments.pair(i, j)?;
    let n = 2.0 * (qi * pi).sqrt();
    let product = qij * pij;
    let sign_anomaly = product > 0.0;
    let c = if sign_anomaly { 0.0 } else { 2.0 * (-product).sqrt() };
    let zeta = n - c;
    Ok(TwoSiteParams {
        n,
        c,
        zeta,
        eof: eof_symmetric(zeta)?,
        separable: zeta >= 1.0,
        sign_anomaly,
    })
}

/// Entanglement of formation (bits) of a symmetric two-mode Gaussian state
/// with parameter `zeta`: zero for `zeta >= 1`, otherwise
/// `c+ log2 c+ - c- log2 c-` with `c± = (zeta^{-1/2} ± zeta^{1/2})^2 / 4`.
pub fn eof_symmetric(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "zeta must be finite and > 0, got {zeta}"
        )));
    }
    if zeta >= 1.0 {
        return Ok(0.0);
    }
    let (a, b) = (zeta.powf(-0.5), zeta.sqrt());
    let plus = 0.25 * (a + b).powi(2);
    let minus = 0.25 * (a - b).powi(2);
    let tail = if minus > 0.0 { minus * minus.log2() } else { 0.0 };
    Ok(plus * plus.log2() - tail)
}
