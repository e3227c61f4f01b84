//! Model parameters, lattice geometry and the potential matrix of the
//! harmonic Hamiltonian `H = 1/2 sum_i p_i^2 + 1/2 sum_ij q_i V_ij q_j`.
//!
//! Each site carries one oscillator. The on-site entry is
//! `V_ii = omega (omega + 4 kappa N)` and a bond of dipolar strength `g`
//! contributes `V_ij = N omega g`. Bonds are horizontal (`g1`), vertical
//! (`g2`) and diagonal (`2^{-3/2} g2`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spectrum;

/// `2^{-3/2}`: relative strength of the next-nearest (diagonal) bond.
pub const DIAGONAL_FACTOR: f64 = 0.353_553_390_593_273_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    omega: f64,
    kappa: f64,
    n_atoms: u32,
    g1: f64,
    g2: f64,
}

impl Default for CouplingParams {
    /// `omega = 500 kappa`, `N = 1000`, uncoupled.
    fn default() -> Self {
        Self {
            omega: 500.0,
            kappa: 1.0,
            n_atoms: 1000,
            g1: 0.0,
            g2: 0.0,
        }
    }
}

fn check(name: &'static str, value: f64, ok: bool, rule: &str) -> Result<()> {
    if !value.is_finite() || !ok {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{value} violates {rule}"),
        });
    }
    Ok(())
}

impl CouplingParams {
    pub fn new(omega: f64, kappa: f64, n_atoms: u32, g1: f64, g2: f64) -> Result<Self> {
        check("omega", omega, omega > 0.0, "omega > 0")?;
        check("kappa", kappa, kappa > 0.0, "kappa > 0")?;
        if n_atoms < 1 {
            return Err(Error::InvalidParameter {
                name: "n_atoms",
                reason: "at least one atom per site is required".into(),
            });
        }
        check("g1", g1, g1 >= 0.0, "g1 >= 0")?;
        check("g2", g2, g2 >= 0.0, "g2 >= 0")?;
        Ok(Self {
            omega,
            kappa,
            n_atoms,
            g1,
            g2,
        })
    }

    /// Same model with new dipolar strengths.
    pub fn with_couplings(&self, g1: f64, g2: f64) -> Result<Self> {
        Self::new(self.omega, self.kappa, self.n_atoms, g1, g2)
    }

    /// Same model with `g1 = g2 = g`.
    pub fn with_equal_coupling(&self, g: f64) -> Result<Self> {
        self.with_couplings(g, g)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_atoms(&self) -> u32 {
        self.n_atoms
    }

    /// `N` as a float, for use in formulas.
    pub fn n(&self) -> f64 {
        f64::from(self.n_atoms)
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    /// On-site potential `omega (omega + 4 kappa N)`.
    pub fn onsite(&self) -> f64 {
        self.omega * (self.omega + 4.0 * self.kappa * self.n())
    }

    /// Scale `N omega` converting a bond strength into a matrix entry.
    pub fn bond_scale(&self) -> f64 {
        self.n() * self.omega
    }

    /// Whether `omega` is within an order of magnitude of `kappa N`, the
    /// regime in which the spin-wave reduction is intended to apply.
    pub fn in_spin_wave_regime(&self) -> bool {
        let ratio = self.omega / (self.kappa * self.n());
        (0.1..=10.0).contains(&ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
    /// Continuum Brillouin zone; the side length is ignored.
    Infinite,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
            Boundary::Infinite => "infinite",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            "infinite" => Ok(Boundary::Infinite),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary '{other}' (expected periodic, open or infinite)"
            ))),
        }
    }
}

/// An `M x M` square lattice, sites indexed row-major as `y * M + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    side: usize,
    boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(side: usize, boundary: Boundary) -> Result<Self> {
        match boundary {
            Boundary::Periodic if side < 3 => Err(Error::InvalidLattice(format!(
                "periodic lattice needs side >= 3, got {side} (smaller sides duplicate bonds)"
            ))),
            Boundary::Open if side < 1 => {
                Err(Error::InvalidLattice("open lattice needs side >= 1".into()))
            }
            Boundary::Infinite => Ok(Self { side: 0, boundary }),
            _ => Ok(Self { side, boundary }),
        }
    }

    pub fn periodic(side: usize) -> Result<Self> {
        Self::new(side, Boundary::Periodic)
    }

    pub fn open(side: usize) -> Result<Self> {
        Self::new(side, Boundary::Open)
    }

    pub fn infinite() -> Self {
        Self {
            side: 0,
            boundary: Boundary::Infinite,
        }
    }

    /// Sites per side; zero for the infinite lattice.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_infinite(&self) -> bool {
        self.boundary == Boundary::Infinite
    }

    pub fn n_sites(&self) -> usize {
        self.side * self.side
    }

    pub fn site_index(&self, x: usize, y: usize) -> usize {
        y * self.side + x
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.side, index / self.side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondKind {
    Horizontal,
    Vertical,
    Diagonal,
}

/// One interacting unordered pair, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub kind: BondKind,
    /// Dipolar strength in energy units (`g1`, `g2` or `2^{-3/2} g2`).
    pub strength: f64,
}

/// Enumerate every interacting pair once.
pub fn neighbor_couplings(spec: &LatticeSpec, params: &CouplingParams) -> Result<Vec<Bond>> {
    if spec.is_infinite() {
        return Err(Error::InvalidLattice(
            "bond enumeration needs a finite lattice".into(),
        ));
    }
    // re-validate: LatticeSpec fields are private but keep the invariant local
    let spec = LatticeSpec::new(spec.side, spec.boundary)?;
    let m = spec.side as i64;
    let periodic = spec.boundary == Boundary::Periodic;
    let offsets = [
        (1, 0, BondKind::Horizontal, params.g1),
        (0, 1, BondKind::Vertical, params.g2),
        (1, 1, BondKind::Diagonal, DIAGONAL_FACTOR * params.g2),
        (1, -1, BondKind::Diagonal, DIAGONAL_FACTOR * params.g2),
    ];
    let mut bonds = Vec::with_capacity(4 * spec.n_sites());
    for y in 0..m {
        for x in 0..m {
            for &(dx, dy, kind, strength) in &offsets {
                let (mut nx, mut ny) = (x + dx, y + dy);
                if periodic {
                    nx = nx.rem_euclid(m);
                    ny = ny.rem_euclid(m);
                } else if !(0..m).contains(&nx) || !(0..m).contains(&ny) {
                    continue;
                }
                let i = spec.site_index(x as usize, y as usize);
                let j = spec.site_index(nx as usize, ny as usize);
                bonds.push(Bond {
                    a: i.min(j),
                    b: i.max(j),
                    kind,
                    strength,
                });
            }
        }
    }
    Ok(bonds)
}

/// How the sum over bonds in the spin Hamiltonian is counted.
///
/// `Full` gives `V_ij = N omega g`, the convention under which the lattice
/// reproduces the closed-form critical couplings. `Half` gives
/// `V_ij = N omega g / 2` and is only used for two-site comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairConvention {
    #[default]
    Full,
    Half,
}

impl PairConvention {
    pub fn factor(&self) -> f64 {
        match self {
            PairConvention::Full => 1.0,
            PairConvention::Half => 0.5,
        }
    }
}

/// Symmetric potential matrix stored as a constant diagonal plus one entry
/// per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMatrix {
    lattice: LatticeSpec,
    params: CouplingParams,
    convention: PairConvention,
    diagonal: f64,
    offdiag: BTreeMap<(usize, usize), f64>,
}

pub fn build_potential(spec: &LatticeSpec, params: &CouplingParams) -> Result<PotentialMatrix> {
    build_potential_with(spec, params, PairConvention::Full)
}

pub fn build_potential_with(
    spec: &LatticeSpec,
    params: &CouplingParams,
    convention: PairConvention,
) -> Result<PotentialMatrix> {
    let bonds = neighbor_couplings(spec, params)?;
    let scale = params.bond_scale() * convention.factor();
    let mut offdiag = BTreeMap::new();
    for bond in bonds {
        if bond.strength != 0.0 {
            *offdiag.entry((bond.a, bond.b)).or_insert(0.0) += scale * bond.strength;
        }
    }
    Ok(PotentialMatrix {
        lattice: *spec,
        params: *params,
        convention,
        diagonal: params.onsite(),
        offdiag,
    })
}

impl PotentialMatrix {
    pub fn dim(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn convention(&self) -> PairConvention {
        self.convention
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal;
        }
        let key = (i.min(j), i.max(j));
        self.offdiag.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzero off-diagonal entries with `i < j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.offdiag.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::from_diagonal_element(n, n, self.diagonal);
        for (&(i, j), &v) in &self.offdiag {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Full symmetric triplet list `(row, col, value)`, row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = (0..self.dim())
            .map(|i| (i, i, self.diagonal))
            .collect();
        for (&(i, j), &v) in &self.offdiag {
            out.push((i, j, v));
            out.push((j, i, v));
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,value\n");
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{i},{j},{v}");
        }
        s
    }

    /// Lowest eigenvalue. Periodic lattices are circulant, so the spectrum
    /// is the Fourier symbol of row 0 on the discrete zone.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        match self.lattice.boundary() {
            Boundary::Periodic => Ok(self.circulant_spectrum().into_iter().fold(f64::INFINITY, f64::min)),
            _ => {
                let values = linalg::symmetric_eigenvalues(self.to_dense())?;
                Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
            }
        }
    }

    fn circulant_spectrum(&self) -> Vec<f64> {
        let m = self.lattice.side();
        let row: Vec<(usize, usize, f64)> = (1..self.dim())
            .map(|j| (j % m, j / m, self.get(0, j)))
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        let step = 2.0 * std::f64::consts::PI / m as f64;
        let mut out = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let (kx, ky) = (step * a as f64, step * b as f64);
                let sum: f64 = row
                    .iter()
                    .map(|&(x, y, v)| v * (kx * x as f64 + ky * y as f64).cos())
                    .sum();
                out.push(self.diagonal + sum);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    Stable { min_eigenvalue: f64 },
    Unstable { min_eigenvalue: f64 },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match *self {
            Stability::Stable { min_eigenvalue } | Stability::Unstable { min_eigenvalue } => {
                min_eigenvalue
            }
        }
    }

    /// Turn an unstable verdict into the error downstream engines report.
    pub fn require(self, params: &CouplingParams) -> Result<f64> {
        match self {
            Stability::Stable { min_eigenvalue } => Ok(min_eigenvalue),
            Stability::Unstable { min_eigenvalue } => Err(Error::Unstable {
                min_eigenvalue,
                g_c: spectrum::critical_g_equal(params),
            }),
        }
    }
}

pub fn stability_check(v: &PotentialMatrix) -> Result<Stability> {
    let min_eigenvalue = v.min_eigenvalue()?;
    Ok(if min_eigenvalue > 0.0 {
        Stability::Stable { min_eigenvalue }
    } else {
        Stability::Unstable { min_eigenvalue }
    })
}
