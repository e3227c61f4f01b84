//! Independent checks: exact diagonalization of two coupled large spins,
//! a second route to symplectic spectra, and cross-engine comparisons.
//!
//! Each site carries spin `j = N/2` with
//! `h = omega J_z + 4 kappa J_x^2`; the pair adds `c g J_x^1 J_x^2` where
//! `c = 2` for the full pair convention and `c = 1` for the half one. In
//! the Holstein-Primakoff limit `J_x ~ sqrt(N) (a + a^dag) / 2` this maps to
//! the harmonic pair with `V_12 = c N omega g / 2`.

use nalgebra::{DMatrix, Schur};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entanglement::{symplectic_spectrum, SymplecticSpectrum};
use crate::error::{Error, Result};
use crate::groundstate::{covariance_dense, covariance_infinite, covariance_pbc_fft, QuadratureSpec};
use crate::linalg;
use crate::model::{build_potential, CouplingParams, LatticeSpec, PairConvention};
use crate::spectrum::zone_minimum;

/// Largest `N` accepted by [`exact_two_site`]; the Hilbert space is `(N+1)^2`.
pub const MAX_ATOMS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystemSpec {
    pub n_atoms: u32,
    pub omega: f64,
    pub kappa: f64,
    /// Pair coupling; may be negative.
    pub g: f64,
    pub convention: PairConvention,
}

impl SpinSystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 || self.n_atoms > MAX_ATOMS {
            return Err(Error::Dimension {
                dim: (self.n_atoms as usize + 1).pow(2),
                max: (MAX_ATOMS as usize + 1).pow(2),
            });
        }
        for (name, value) in [("omega", self.omega), ("kappa", self.kappa), ("g", self.g)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        if self.omega <= 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: "need omega > 0 and kappa >= 0".into(),
            });
        }
        Ok(())
    }

    /// Coefficient of `J_x^1 J_x^2`.
    fn pair_coefficient(&self) -> f64 {
        2.0 * self.convention.factor() * self.g
    }

    /// Harmonic on-site potential `omega (omega + 4 kappa N)`.
    fn onsite(&self) -> f64 {
        self.omega * (self.omega + 4.0 * self.kappa * self.n_atoms as f64)
    }

    /// Harmonic inter-site potential `V_12`.
    fn bond(&self) -> f64 {
        0.5 * self.pair_coefficient() * self.n_atoms as f64 * self.omega
    }

    /// Coupling at which the harmonic pair becomes unstable.
    pub fn harmonic_critical_g(&self) -> f64 {
        let unit = 0.5 * 2.0 * self.convention.factor() * self.n_atoms as f64 * self.omega;
        self.onsite() / unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteSpectrum {
    pub gap: f64,
    /// `<J_x^1 J_x^2>` in the ground state.
    pub ground_corr: f64,
    pub ground_energy: f64,
}

/// `J_z` diagonal and `J_x` off-diagonal for spin `j = n/2`, basis `m = -j..j`.
fn spin_operators(n: u32) -> (Vec<f64>, DMatrix<f64>) {
    let dim = n as usize + 1;
    let j = 0.5 * n as f64;
    let jz: Vec<f64> = (0..dim).map(|k| k as f64 - j).collect();
    let mut jx = DMatrix::zeros(dim, dim);
    for k in 0..dim - 1 {
        let m = jz[k];
        let amp = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jx[(k + 1, k)] = amp;
        jx[(k, k + 1)] = amp;
    }
    (jz, jx)
}

/// `omega J_z + 4 kappa J_x^2` on one site.
fn single_site(spec: &SpinSystemSpec) -> (DMatrix<f64>, DMatrix<f64>) {
    let (jz, jx) = spin_operators(spec.n_atoms);
    let mut h = &jx * &jx * (4.0 * spec.kappa);
    for (k, m) in jz.iter().enumerate() {
        h[(k, k)] += spec.omega * m;
    }
    (h, jx)
}

/// Lowest eigenpairs of one parity sector of the two-site Hamiltonian.
///
/// `J_x` flips the parity of `m + j` on a site while `h` preserves it, so
/// the total parity of `(m1 + j) + (m2 + j)` is conserved.
fn sector(
    h: &DMatrix<f64>,
    jx: &DMatrix<f64>,
    coefficient: f64,
    parity: usize,
) -> Result<(Vec<f64>, DMatrix<f64>, Vec<(usize, usize)>)> {
    let dim = h.nrows();
    let basis: Vec<(usize, usize)> = (0..dim)
        .flat_map(|a| (0..dim).map(move |b| (a, b)))
        .filter(|&(a, b)| (a + b) % 2 == parity)
        .collect();
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for (r, &(a, b)) in basis.iter().enumerate() {
        for (c, &(a2, b2)) in basis.iter().enumerate() {
            let mut value = coefficient * jx[(a, a2)] * jx[(b, b2)];
            if b == b2 {
                value += h[(a, a2)];
            }
            if a == a2 {
                value += h[(b, b2)];
            }
            m[(r, c)] = value;
        }
    }
    let eig = linalg::symmetric_eigen(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, 2.min(n), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors, basis))
}

/// Exact two-site spectrum by dense diagonalization in the two parity sectors.
pub fn exact_two_site(spec: &SpinSystemSpec) -> Result<TwoSiteSpectrum> {
    spec.validate()?;
    let (h, jx) = single_site(spec);
    let coefficient = spec.pair_coefficient();
    let (even, odd) = rayon::join(
        || sector(&h, &jx, coefficient, 0),
        || sector(&h, &jx, coefficient, 1),
    );
    let (even, ground, basis) = even?;
    let (odd, _, _) = odd?;
    // the all-down vacuum sits in the even sector
    if odd[0] < even[0] {
        return Err(Error::Eigen(format!(
            "ground state left the even sector ({} > {})",
            even[0], odd[0]
        )));
    }
    let lowest = even[0];
    let first = odd[0].min(*even.get(1).unwrap_or(&f64::INFINITY));
    let ground_vec = ground.column(0);

    let mut corr = 0.0;
    for (r, &(a, b)) in basis.iter().enumerate() {
        for (c, &(a2, b2)) in basis.iter().enumerate() {
            let x = jx[(a, a2)] * jx[(b, b2)];
            if x != 0.0 {
                corr += ground_vec[r] * x * ground_vec[c];
            }
        }
    }
    Ok(TwoSiteSpectrum {
        gap: first - lowest,
        ground_corr: corr,
        ground_energy: lowest,
    })
}

/// Spectrum of a single site, ascending.
pub fn single_site_levels(spec: &SpinSystemSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut levels: Vec<f64> = linalg::symmetric_eigenvalues(single_site(spec).0)?.iter().copied().collect();
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPrediction {
    pub gap: f64,
    pub ground_corr: f64,
    /// Normal-mode frequencies `sqrt(V_11 ± V_12)`.
    pub frequencies: (f64, f64),
}

/// Harmonic pair: `omega_± = sqrt(V_11 ± V_12)`, gap `= min omega_±`,
/// `<J_x^1 J_x^2> = (N omega / 2) <q_1 q_2>` with
/// `<q_1 q_2> = (omega_+^{-1} - omega_-^{-1}) / 4`.
pub fn harmonic_two_site_prediction(spec: &SpinSystemSpec) -> Result<HarmonicPrediction> {
    spec.validate()?;
    let (a, b) = (spec.onsite(), spec.bond());
    let soft = a - b.abs();
    if soft <= 0.0 {
        return Err(Error::Unstable {
            min_eigenvalue: soft,
            g_c: spec.harmonic_critical_g(),
        });
    }
    let plus = (a + b).sqrt();
    let minus = (a - b).sqrt();
    let qq = 0.25 * (1.0 / plus - 1.0 / minus);
    Ok(HarmonicPrediction {
        gap: plus.min(minus),
        ground_corr: 0.5 * spec.n_atoms as f64 * spec.omega * qq,
        frequencies: (plus, minus),
    })
}

/// Symplectic eigenvalues as moduli of the eigenvalues of `J gamma`, with
/// `gamma = 2 diag(Q, P)` in `(q..q, p..p)` order and `J = [[0, I], [-I, 0]]`.
///
/// Uses a real Schur decomposition of the full `2n x 2n` matrix. Positions
/// and momenta are first rescaled by `s` and `1/s` so `Q` and `P` have
/// comparable traces; the rescaling is symplectic and improves conditioning.
pub fn symplectic_bruteforce(q: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n = q.nrows();
    if q.shape() != (n, n) || p.shape() != (n, n) {
        return Err(Error::InvalidArgument("Q and P must be square and equal in shape".into()));
    }
    if nalgebra::Cholesky::new(q.clone()).is_none() {
        return Err(Error::NotPositiveDefinite("Q"));
    }
    if nalgebra::Cholesky::new(p.clone()).is_none() {
        return Err(Error::NotPositiveDefinite("P"));
    }
    let s2 = (p.trace() / q.trace()).sqrt();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    // J gamma = [[0, 2P'], [-2Q', 0]]
    m.view_mut((0, n), (n, n)).copy_from(&(p * (2.0 / s2)));
    m.view_mut((n, 0), (n, n)).copy_from(&(q * (-2.0 * s2)));
    let schur = Schur::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("Schur decomposition did not converge".into()))?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    SymplecticSpectrum::from_values(moduli.into_iter().step_by(2).collect())
}

/// Largest absolute entrywise differences `(q, p)` between dense and FFT
/// covariances on a periodic lattice.
pub fn dense_vs_fft(params: &CouplingParams, side: usize) -> Result<(f64, f64)> {
    let lattice = LatticeSpec::periodic(side)?;
    let dense = covariance_dense(&build_potential(&lattice, params)?)?;
    let fft = covariance_pbc_fft(&lattice, params)?.to_pair()?;
    Ok(((&dense.q - &fft.q).amax(), (&dense.p - &fft.p).amax()))
}

/// Largest relative difference between the infinite engine and a periodic
/// `side x side` lattice over displacements `0..=extent` in each direction.
pub fn infinite_vs_fft(
    params: &CouplingParams,
    side: usize,
    extent: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let e = extent as i64;
    let inf = covariance_infinite(params, &[(e, e)], quad)?;
    let fin = covariance_pbc_fft(&LatticeSpec::periodic(side)?, params)?;
    let mut worst: f64 = 0.0;
    for dx in 0..=e {
        for dy in 0..=e {
            let (a, b) = inf.get(dx, dy)?;
            let (c, d) = fin.get(dx, dy)?;
            worst = worst.max(((a - c) / c).abs()).max(((b - d) / d).abs());
        }
    }
    Ok(worst)
}

/// One randomized comparison of the two symplectic routes.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    pub params: CouplingParams,
    pub lattice: LatticeSpec,
    pub sites: Vec<usize>,
    /// Largest absolute difference between the two spectra.
    pub max_diff: f64,
}

/// Compare [`symplectic_spectrum`] and [`symplectic_bruteforce`] on `count`
/// random blocks of random stable lattices, reproducibly from `seed`.
pub fn random_route_comparisons(count: usize, seed: u64) -> Result<Vec<RouteComparison>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let omega = rng.random_range(100.0..1000.0);
        let n_atoms = rng.random_range(200..2000);
        let probe = CouplingParams::new(omega, 1.0, n_atoms, 0.0, 0.0)?;
        let gc = crate::spectrum::critical_g_equal(&probe);
        let params = probe.with_couplings(rng.random_range(0.0..1.2 * gc), rng.random_range(0.0..1.2 * gc))?;
        if zone_minimum(&params).v_k < 1e-3 * params.onsite() {
            continue;
        }
        let side = rng.random_range(4..8);
        let lattice = if rng.random_bool(0.5) {
            LatticeSpec::periodic(side)?
        } else {
            LatticeSpec::open(side)?
        };
        if build_potential(&lattice, &params)?.min_eigenvalue()? <= 1e-3 * params.onsite() {
            continue;
        }
        let n = lattice.n_sites();
        let size = rng.random_range(1..=6);
        let mut sites = sample(&mut rng, n, size).into_vec();
        sites.sort_unstable();
        cases.push((params, lattice, sites));
    }
    cases
        .into_par_iter()
        .map(|(params, lattice, sites)| {
            let c = covariance_dense(&build_potential(&lattice, &params)?)?;
            let k = sites.len();
            let q = DMatrix::from_fn(k, k, |i, j| c.q[(sites[i], sites[j])]);
            let p = DMatrix::from_fn(k, k, |i, j| c.p[(sites[i], sites[j])]);
            let a = symplectic_spectrum(&q, &p)?;
            let b = symplectic_bruteforce(&q, &p)?;
            let max_diff = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            Ok(RouteComparison {
                params,
                lattice,
                sites,
                max_diff,
            })
        })
        .collect()
}

/// Relative gap error of the harmonic prediction for each `N`, at
/// `omega = kappa N` and `g` set to `fraction` of the harmonic critical value.
pub fn gap_error_trend(
    atoms: &[u32],
    kappa: f64,
    fraction: f64,
    convention: PairConvention,
) -> Result<Vec<(u32, f64)>> {
    atoms
        .par_iter()
        .map(|&n| {
            let mut spec = SpinSystemSpec {
                n_atoms: n,
                omega: kappa * n as f64,
                kappa,
                g: 0.0,
                convention,
            };
            spec.g = fraction * spec.harmonic_critical_g();
            let exact = exact_two_site(&spec)?;
            let harmonic = harmonic_two_site_prediction(&spec)?;
            Ok((n, ((exact.gap - harmonic.gap) / exact.gap).abs()))
        })
        .collect()
}
