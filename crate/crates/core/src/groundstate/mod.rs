//! Gaussian ground-state second moments `<q_i q_j>` and `<p_i p_j>`.
//!
//! For `H = 1/2 p^T p + 1/2 q^T V q` the ground state has
//! `Q = V^{-1/2} / 2`, `P = V^{1/2} / 2`, no `q`-`p` cross moments and
//! vanishing first moments. Three engines compute these:
//!
//! * [`covariance_dense`]: symmetric eigendecomposition of `V` (any
//!   boundary, `M <= 80`).
//! * [`covariance_pbc_fft`]: periodic lattices, where `V` is block
//!   circulant and diagonal in the Fourier basis.
//! * [`covariance_infinite`]: the `M -> infinity` limit as a Brillouin-zone
//!   integral.

mod dense;
mod fft;
mod infinite;

use nalgebra::DMatrix;

pub use dense::covariance_dense;
pub use fft::covariance_pbc_fft;
pub use infinite::{covariance_infinite, QuadratureSpec, ZonePlan};

use crate::error::{Error, Result};
use crate::model::{Boundary, CouplingParams, LatticeSpec};

/// Relative distance to criticality below which engines refuse to run.
pub const NEAR_CRITICAL_LIMIT: f64 = 1e-12;

/// Largest side the dense engine accepts.
pub const DENSE_MAX_SIDE: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Dense,
    Fft,
    Infinite,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Dense => "dense",
            Engine::Fft => "fft",
            Engine::Infinite => "infinite",
        }
    }

    /// Check that this engine can handle the lattice.
    pub fn supports(&self, lattice: &LatticeSpec) -> Result<()> {
        let ok = matches!(
            (self, lattice.boundary()),
            (Engine::Dense, Boundary::Periodic | Boundary::Open)
                | (Engine::Fft, Boundary::Periodic)
                | (Engine::Infinite, Boundary::Infinite)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "engine '{}' cannot handle a {} lattice",
                self.as_str(),
                lattice.boundary().as_str()
            )))
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Engine::Dense),
            "fft" => Ok(Engine::Fft),
            "infinite" => Ok(Engine::Infinite),
            other => Err(Error::InvalidArgument(format!(
                "unknown engine '{other}' (expected dense, fft or infinite)"
            ))),
        }
    }
}

/// Refuse inputs closer to the transition than [`NEAR_CRITICAL_LIMIT`].
///
/// `min_v / V_ii` reduces to `(g_c - g) / g_c` for `g1 = g2 = g`.
pub(crate) fn guard(params: &CouplingParams, min_v: f64) -> Result<()> {
    if min_v <= 0.0 {
        return Err(Error::Unstable {
            min_eigenvalue: min_v,
            g_c: crate::spectrum::critical_g_equal(params),
        });
    }
    let distance = min_v / params.onsite();
    if distance < NEAR_CRITICAL_LIMIT {
        return Err(Error::NearCritical {
            distance,
            limit: NEAR_CRITICAL_LIMIT,
        });
    }
    Ok(())
}

/// Lattice coordinates of a site; may lie outside `[0, M)` for periodic and
/// infinite lattices.
pub type Site = (i64, i64);

/// Anything that can report `(<q_a q_b>, <p_a p_b>)` for a pair of sites.
pub trait Moments {
    fn pair(&self, a: Site, b: Site) -> Result<(f64, f64)>;
    fn lattice(&self) -> LatticeSpec;
    fn engine(&self) -> Engine;
}

/// Full `Q` and `P` matrices of a finite lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub q: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub lattice: LatticeSpec,
    pub params: CouplingParams,
    pub engine: Engine,
}

impl CovariancePair {
    pub fn site_index(&self, site: Site) -> Result<usize> {
        let m = self.lattice.side() as i64;
        let (x, y) = match self.lattice.boundary() {
            Boundary::Periodic => (site.0.rem_euclid(m), site.1.rem_euclid(m)),
            _ => {
                if !(0..m).contains(&site.0) || !(0..m).contains(&site.1) {
                    return Err(Error::InvalidRegion(format!(
                        "site {site:?} lies outside the open {m}x{m} lattice"
                    )));
                }
                site
            }
        };
        Ok(self.lattice.site_index(x as usize, y as usize))
    }
}

impl Moments for CovariancePair {
    fn pair(&self, a: Site, b: Site) -> Result<(f64, f64)> {
        let (i, j) = (self.site_index(a)?, self.site_index(b)?);
        Ok((self.q[(i, j)], self.p[(i, j)]))
    }

    fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    fn engine(&self) -> Engine {
        self.engine
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableDomain {
    /// Every displacement modulo `side`.
    Periodic { side: usize },
    /// `|dx|, |dy| <= extent`; entries depend on `(|dx|, |dy|)` only.
    Infinite { extent: usize },
}

/// Translation-invariant correlations indexed by displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    domain: TableDomain,
    qq: Vec<f64>,
    pp: Vec<f64>,
    params: CouplingParams,
    engine: Engine,
}

impl CorrelationTable {
    pub(crate) fn new(
        domain: TableDomain,
        qq: Vec<f64>,
        pp: Vec<f64>,
        params: CouplingParams,
        engine: Engine,
    ) -> Self {
        Self {
            domain,
            qq,
            pp,
            params,
            engine,
        }
    }

    pub fn domain(&self) -> TableDomain {
        self.domain
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    fn width(&self) -> usize {
        match self.domain {
            TableDomain::Periodic { side } => side,
            TableDomain::Infinite { extent } => extent + 1,
        }
    }

    /// `(<q_0 q_r>, <p_0 p_r>)` for `r = (dx, dy)`.
    pub fn get(&self, dx: i64, dy: i64) -> Result<(f64, f64)> {
        let (ix, iy) = match self.domain {
            TableDomain::Periodic { side } => {
                let m = side as i64;
                (dx.rem_euclid(m) as usize, dy.rem_euclid(m) as usize)
            }
            TableDomain::Infinite { extent } => {
                let (ax, ay) = (dx.unsigned_abs() as usize, dy.unsigned_abs() as usize);
                if ax > extent || ay > extent {
                    return Err(Error::MissingDisplacement { dx, dy });
                }
                (ax, ay)
            }
        };
        let k = iy * self.width() + ix;
        Ok((self.qq[k], self.pp[k]))
    }

    /// Stored entries `(dx, dy, qq, pp)` in row-major displacement order.
    pub fn entries(&self) -> Vec<(i64, i64, f64, f64)> {
        let w = self.width();
        (0..w * w)
            .map(|k| ((k % w) as i64, (k / w) as i64, self.qq[k], self.pp[k]))
            .collect()
    }

    /// Expand a periodic table into full `Q`, `P` matrices.
    pub fn to_pair(&self) -> Result<CovariancePair> {
        let TableDomain::Periodic { side } = self.domain else {
            return Err(Error::InvalidArgument(
                "only periodic tables expand to a finite covariance pair".into(),
            ));
        };
        let lattice = LatticeSpec::periodic(side)?;
        let n = side * side;
        let mut q = DMatrix::zeros(n, n);
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            let (xi, yi) = lattice.coords(i);
            for j in 0..n {
                let (xj, yj) = lattice.coords(j);
                let (a, b) = self.get(xj as i64 - xi as i64, yj as i64 - yi as i64)?;
                q[(i, j)] = a;
                p[(i, j)] = b;
            }
        }
        Ok(CovariancePair {
            q,
            p,
            lattice,
            params: self.params,
            engine: self.engine,
        })
    }
}

impl Moments for CorrelationTable {
    fn pair(&self, a: Site, b: Site) -> Result<(f64, f64)> {
        self.get(b.0 - a.0, b.1 - a.1)
    }

    fn lattice(&self) -> LatticeSpec {
        match self.domain {
            TableDomain::Periodic { side } => {
                LatticeSpec::periodic(side).expect("table built from a valid lattice")
            }
            TableDomain::Infinite { .. } => LatticeSpec::infinite(),
        }
    }

    fn engine(&self) -> Engine {
        self.engine
    }
}

/// Output of any engine.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundState {
    Dense(CovariancePair),
    Table(CorrelationTable),
}

impl Moments for GroundState {
    fn pair(&self, a: Site, b: Site) -> Result<(f64, f64)> {
        match self {
            GroundState::Dense(c) => c.pair(a, b),
            GroundState::Table(t) => t.pair(a, b),
        }
    }

    fn lattice(&self) -> LatticeSpec {
        match self {
            GroundState::Dense(c) => c.lattice(),
            GroundState::Table(t) => t.lattice(),
        }
    }

    fn engine(&self) -> Engine {
        match self {
            GroundState::Dense(c) => c.engine(),
            GroundState::Table(t) => t.engine(),
        }
    }
}

/// Run the selected engine. `extent` is the largest displacement component
/// the infinite engine must tabulate; finite engines ignore it.
pub fn solve(
    params: &CouplingParams,
    lattice: &LatticeSpec,
    engine: Engine,
    extent: usize,
    quad: &QuadratureSpec,
) -> Result<GroundState> {
    engine.supports(lattice)?;
    match engine {
        Engine::Dense => {
            let v = crate::model::build_potential(lattice, params)?;
            Ok(GroundState::Dense(covariance_dense(&v)?))
        }
        Engine::Fft => Ok(GroundState::Table(covariance_pbc_fft(lattice, params)?)),
        Engine::Infinite => {
            let e = extent as i64;
            Ok(GroundState::Table(covariance_infinite(params, &[(e, e)], quad)?))
        }
    }
}

/// Site at the lattice center (origin for the infinite lattice).
pub fn center_site(lattice: &LatticeSpec) -> Site {
    if lattice.is_infinite() {
        (0, 0)
    } else {
        let c = (lattice.side() / 2) as i64;
        (c, c)
    }
}

/// `<c^dag c> / N` from on-site moments, using `c^dag c = (omega q^2 + p^2 / omega - 1) / 2`.
pub fn density_from_moments(params: &CouplingParams, qq: f64, pp: f64) -> f64 {
    let omega = params.omega();
    (omega * qq + pp / omega - 1.0) / (2.0 * params.n())
}

/// Spin-wave excitation density `<c^dag c> / N` at the center site.
pub fn excitation_density(
    params: &CouplingParams,
    lattice: &LatticeSpec,
    engine: Engine,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let state = solve(params, lattice, engine, 0, quad)?;
    let c = center_site(lattice);
    let (qq, pp) = state.pair(c, c)?;
    Ok(density_from_moments(params, qq, pp))
}
