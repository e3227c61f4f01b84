//! Dispersion over the Brillouin zone, the energy gap and the phase
//! boundary of the spin-wave lattice.
//!
//! Fourier transforming the potential matrix gives
//!
//! ```text
//! v_k = omega (omega + 4 kappa N)
//!     + 2 N omega [ g1 cos kx + g2 cos ky + 2^{-3/2} g2 (cos(kx+ky) + cos(kx-ky)) ]
//! ```
//!
//! and the normal-mode frequencies are `sqrt(v_k)`. Writing `x = cos kx`,
//! `y = cos ky`, the bracket is bilinear in `(x, y)`, so its minimum over the
//! zone sits at a corner: `(pi, pi)` when `g2 < sqrt(2) g1`, `(0, pi)` when
//! `g2 > sqrt(2) g1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::model::{Boundary, CouplingParams, LatticeSpec, DIAGONAL_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub kx: f64,
    pub ky: f64,
    pub v_k: f64,
    /// `sqrt(v_k)`, only defined on the stable side.
    pub omega_k: Option<f64>,
}

impl DispersionPoint {
    pub fn is_stable(&self) -> bool {
        self.v_k > 0.0
    }
}

pub(crate) fn dispersion_value(params: &CouplingParams, kx: f64, ky: f64) -> f64 {
    let bracket = params.g1() * kx.cos()
        + params.g2() * ky.cos()
        + DIAGONAL_FACTOR * params.g2() * ((kx + ky).cos() + (kx - ky).cos());
    params.onsite() + 2.0 * params.bond_scale() * bracket
}

pub fn dispersion(params: &CouplingParams, kx: f64, ky: f64) -> DispersionPoint {
    let v_k = dispersion_value(params, kx, ky);
    DispersionPoint {
        kx,
        ky,
        v_k,
        omega_k: (v_k >= 0.0).then(|| v_k.sqrt()),
    }
}

fn wrap(k: f64) -> f64 {
    (k + PI).rem_euclid(2.0 * PI) - PI
}

/// Nelder-Mead on the 2D zone (the integrand is periodic, so no bounds).
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64, tol: f64) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(&f);
    for _ in 0..5000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let size = (1..3)
            .map(|i| (simplex[i][0] - simplex[0][0]).hypot(simplex[i][1] - simplex[0][1]))
            .fold(0.0, f64::max);
        if size < tol {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best], values[best])
}

/// Minimum of `v_k` over the continuous zone: the analytic corner
/// candidates and a coarse grid seed a Nelder-Mead refinement.
pub fn zone_minimum(params: &CouplingParams) -> DispersionPoint {
    const GRID: usize = 32;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let mut consider = |k: [f64; 2]| {
        let v = dispersion_value(params, k[0], k[1]);
        if v < best.0 {
            best = (v, k);
        }
    };
    for k in [[PI, PI], [0.0, PI], [PI, 0.0], [0.0, 0.0]] {
        consider(k);
    }
    for a in 0..GRID {
        for b in 0..GRID {
            let step = 2.0 * PI / GRID as f64;
            consider([-PI + step * (a as f64 + 0.5), -PI + step * (b as f64 + 0.5)]);
        }
    }
    let (k, v) = nelder_mead(|k| dispersion_value(params, k[0], k[1]), best.1, 0.05, 1e-12);
    let (v, k) = if v < best.0 { (v, k) } else { best };
    let (kx, ky) = (wrap(k[0]).abs(), wrap(k[1]).abs());
    DispersionPoint {
        kx,
        ky,
        v_k: v,
        omega_k: (v >= 0.0).then(|| v.sqrt()),
    }
}

/// Minimum of `v_k` over the discrete zone `k = 2 pi (m, n) / M`.
pub fn grid_minimum(params: &CouplingParams, side: usize) -> DispersionPoint {
    let step = 2.0 * PI / side as f64;
    let mut best = dispersion(params, 0.0, 0.0);
    for a in 0..side {
        for b in 0..side {
            let p = dispersion(params, step * a as f64, step * b as f64);
            if p.v_k < best.v_k {
                best = p;
            }
        }
    }
    best
}

/// Lowest excitation energy `Delta = sqrt(min v)`.
///
/// The infinite lattice minimizes over the continuous zone, a periodic
/// lattice over its discrete grid, an open lattice over the eigenvalues of
/// the dense potential matrix.
pub fn energy_gap(params: &CouplingParams, lattice: &LatticeSpec) -> Result<f64> {
    let min = match lattice.boundary() {
        Boundary::Infinite => zone_minimum(params).v_k,
        Boundary::Periodic => grid_minimum(params, lattice.side()).v_k,
        Boundary::Open => crate::model::build_potential(lattice, params)?.min_eigenvalue()?,
    };
    if min <= 0.0 {
        return Err(Error::Unstable {
            min_eigenvalue: min,
            g_c: critical_g_equal(params),
        });
    }
    Ok(min.sqrt())
}

/// `g_c = (omega + 4 kappa N) / (N (4 - sqrt 2))` for `g1 = g2 = g`.
pub fn critical_g_equal(params: &CouplingParams) -> f64 {
    (params.omega() + 4.0 * params.kappa() * params.n()) / (params.n() * (4.0 - SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `g2 < sqrt(2) g1` at criticality; the soft mode is at `(pi, pi)`.
    Below,
    Degenerate,
    /// `g2 > sqrt(2) g1`; the soft mode is at `(0, pi)`.
    Above,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Below => "below",
            Branch::Degenerate => "degenerate",
            Branch::Above => "above",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub g1: f64,
    /// Closed-form critical `g2`. Negative when even `g2 = 0` is unstable.
    pub g2_critical: f64,
    pub branch: Branch,
    /// Wavevector of the soft mode at criticality.
    pub minimizer: (f64, f64),
    /// Bisection root of `min_k v_k(g2) = 0` on `[0, 10 kappa]`; `Some(0)`
    /// if the lattice is already unstable at `g2 = 0`, `None` if no root
    /// lies in the bracket.
    pub numeric: Option<f64>,
}

impl PhasePoint {
    /// The lattice is stable for some `g2 >= 0`.
    pub fn has_stable_region(&self) -> bool {
        self.g2_critical > 0.0
    }

    /// Smallest `g2 >= 0` at which the lattice loses stability.
    pub fn physical_critical(&self) -> f64 {
        self.g2_critical.max(0.0)
    }
}

/// The three closed-form cases `[g2 < sqrt2 g1, g2 = sqrt2 g1, g2 > sqrt2 g1]`.
pub fn phase_boundary_cases(params: &CouplingParams, g1: f64) -> [f64; 3] {
    let base = 4.0 * params.kappa() + params.omega() / params.n();
    [
        (base - 2.0 * g1) / (2.0 - SQRT_2),
        base / 2.0,
        (base + 2.0 * g1) / (2.0 + SQRT_2),
    ]
}

/// `g1` at which the two soft modes become degenerate at criticality.
pub fn branch_switch_g1(params: &CouplingParams) -> f64 {
    (4.0 * params.kappa() + params.omega() / params.n()) / (2.0 * SQRT_2)
}

pub fn critical_g2(params: &CouplingParams, g1: f64) -> Result<PhasePoint> {
    if !(g1 >= 0.0 && g1.is_finite()) {
        return Err(Error::InvalidArgument(format!("g1 must be finite and >= 0, got {g1}")));
    }
    let [below, degenerate, above] = phase_boundary_cases(params, g1);
    let switch = branch_switch_g1(params);
    let (branch, g2_critical, minimizer) = if (g1 - switch).abs() <= 1e-12 * switch.max(1.0) {
        (Branch::Degenerate, degenerate, (PI, PI))
    } else if g1 > switch {
        (Branch::Below, below, (PI, PI))
    } else {
        (Branch::Above, above, (0.0, PI))
    };
    Ok(PhasePoint {
        g1,
        g2_critical,
        branch,
        minimizer,
        numeric: numeric_critical_g2(params, g1)?,
    })
}

/// Bisection on `g2` for `min_k v_k = 0`, tolerance `1e-10 kappa`.
pub fn numeric_critical_g2(params: &CouplingParams, g1: f64) -> Result<Option<f64>> {
    let min_v = |g2: f64| -> Result<f64> { Ok(zone_minimum(&params.with_couplings(g1, g2)?).v_k) };
    let (mut lo, mut hi) = (0.0, 10.0 * params.kappa());
    if min_v(lo)? <= 0.0 {
        return Ok(Some(0.0));
    }
    if min_v(hi)? > 0.0 {
        return Ok(None);
    }
    let tol = 1e-10 * params.kappa();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if min_v(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapFit {
    pub exponent: f64,
    /// `exp(intercept)`: the amplitude `A` in `Delta = A |g - g_c|^exponent`.
    pub prefactor: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Least-squares slope of `log Delta` against `log(g_c - g)` over
/// `n_samples` equally spaced `g = g1 = g2` in `[g_lo, g_hi]`.
pub fn gap_scaling_exponent(
    params: &CouplingParams,
    g_window: (f64, f64),
    n_samples: usize,
) -> Result<GapFit> {
    let (lo, hi) = g_window;
    let gc = critical_g_equal(params);
    if n_samples < 2 {
        return Err(Error::Fit(format!("need at least 2 samples, got {n_samples}")));
    }
    if !(lo >= 0.0 && lo < hi) {
        return Err(Error::Fit(format!("window [{lo}, {hi}] is empty or negative")));
    }
    if hi >= gc {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] touches or crosses g_c = {gc}"
        )));
    }
    let lattice = LatticeSpec::infinite();
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let g = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        samples.push((g, energy_gap(&params.with_equal_coupling(g)?, &lattice)?));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(g, d)| ((gc - g).ln(), d.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    Ok(GapFit {
        exponent: slope,
        prefactor: intercept.exp(),
        samples,
    })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Dispersion evaluated relative to a corner `(x0, y0)` of the `(cos kx,
/// cos ky)` square, accurate when `v_k` is tiny next to the on-site term.
///
/// `dx = cos kx - x0` and `dy = cos ky - y0` must be supplied without
/// cancellation by the caller.
pub(crate) fn corner_expansion(params: &CouplingParams, corner: (f64, f64)) -> impl Fn(f64, f64) -> f64 {
    let (x0, y0) = corner;
    let s = FRAC_1_SQRT_2 * params.g2();
    let two_n_omega = 2.0 * params.bond_scale();
    let base = params.onsite() + two_n_omega * (params.g1() * x0 + params.g2() * y0 + s * x0 * y0);
    let ax = two_n_omega * (params.g1() + s * y0);
    let ay = two_n_omega * (params.g2() + s * x0);
    let axy = two_n_omega * s;
    move |dx, dy| base + ax * dx + ay * dy + axy * dx * dy
}
