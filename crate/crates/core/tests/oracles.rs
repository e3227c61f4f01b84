//! Checks of derived quantities against independent closed forms.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use spinwave::entanglement::{
    block_entropy, eof_symmetric, mode_entropy, reduce_block, symplectic_spectrum, two_site_params,
    BlockRegion, EntropyMode,
};
use spinwave::groundstate::{covariance_dense, covariance_pbc_fft, Engine, Moments, Site};
use spinwave::model::{build_potential, CouplingParams, LatticeSpec};
use spinwave::spectrum::{critical_g_equal, energy_gap, zone_minimum};

fn paper(g1: f64, g2: f64) -> CouplingParams {
    CouplingParams::new(500.0, 1.0, 1000, g1, g2).unwrap()
}

/// Two-mode squeezed vacuum with squeezing `r`, vacuum `<q^2> = 1/2`.
struct Squeezed(f64);

impl Moments for Squeezed {
    fn pair(&self, a: Site, b: Site) -> spinwave::Result<(f64, f64)> {
        let (ch, sh) = ((2.0 * self.0).cosh() / 2.0, (2.0 * self.0).sinh() / 2.0);
        Ok(if a == b { (ch, ch) } else { (sh, -sh) })
    }

    fn lattice(&self) -> LatticeSpec {
        LatticeSpec::infinite()
    }

    fn engine(&self) -> Engine {
        Engine::Infinite
    }
}

/// Entropy of the Schmidt coefficients `(1 - x) x^n`, `x = tanh^2 r`.
fn schmidt_entropy(r: f64) -> f64 {
    let x = r.tanh().powi(2);
    (0..2000)
        .map(|n| (1.0 - x) * x.powi(n))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

#[test]
fn eof_matches_squeezed_vacuum_schmidt_series() {
    for r in [0.05, 0.2, 0.5, 1.0, 1.5] {
        let two = two_site_params(&Squeezed(r), (0, 0), (1, 0)).unwrap();
        assert_relative_eq!(two.zeta, (-2.0 * r).exp(), max_relative = 1e-12);
        let schmidt = schmidt_entropy(r);
        assert_relative_eq!(two.eof, schmidt, max_relative = 1e-10);
        assert_relative_eq!(mode_entropy((2.0 * r).cosh()), schmidt, max_relative = 1e-10);
    }
}

#[test]
fn eof_at_quarter() {
    // e^{-2r} = 1/4
    let r = 2f64.ln();
    assert_relative_eq!(eof_symmetric(0.25).unwrap(), schmidt_entropy(r), max_relative = 1e-10);
    assert_relative_eq!(eof_symmetric(0.25).unwrap(), 1.472_942, epsilon = 1e-6);
}

/// Ground-state moments of a periodic chain `V = a I + b (shift + shift^T)`.
fn chain(m: usize, a: f64, b: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut v = DMatrix::identity(m, m) * a;
    for i in 0..m {
        v[(i, (i + 1) % m)] += b;
        v[((i + 1) % m, i)] += b;
    }
    let eig = v.symmetric_eigen();
    let f = |g: fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(g));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    };
    (f(|x| 0.5 / x.sqrt()), f(|x| 0.5 * x.sqrt()))
}

#[test]
fn rows_decouple_without_vertical_coupling() {
    let params = paper(1.6, 0.0);
    let m = 10;
    let lattice = LatticeSpec::periodic(m).unwrap();
    let state = covariance_pbc_fft(&lattice, &params).unwrap();
    let (cq, cp) = chain(m, params.onsite(), params.bond_scale() * 1.6);
    for l in 1..=4 {
        let (q, p) = reduce_block(&state, &BlockRegion::new((0, 0), l).unwrap()).unwrap();
        let square = block_entropy(&symplectic_spectrum(&q, &p).unwrap(), EntropyMode::CountAll);
        let seg_q = cq.view((0, 0), (l, l)).into_owned();
        let seg_p = cp.view((0, 0), (l, l)).into_owned();
        let segment = block_entropy(&symplectic_spectrum(&seg_q, &seg_p).unwrap(), EntropyMode::CountAll);
        assert_relative_eq!(square, l as f64 * segment, max_relative = 1e-8);
    }
}

#[test]
fn decoupled_single_site_spectrum() {
    let lattice = LatticeSpec::open(3).unwrap();
    let c = covariance_dense(&build_potential(&lattice, &paper(0.0, 0.0)).unwrap()).unwrap();
    let (q, p) = reduce_block(&c, &BlockRegion::new((1, 1), 1).unwrap()).unwrap();
    assert_relative_eq!(q[(0, 0)], 1.0 / 3000.0, max_relative = 1e-14);
    assert_relative_eq!(p[(0, 0)], 750.0, max_relative = 1e-14);
    assert_relative_eq!(symplectic_spectrum(&q, &p).unwrap().values()[0], 1.0, epsilon = 1e-14);
}

#[test]
fn critical_coupling_matches_independent_root() {
    let gc = critical_g_equal(&paper(0.0, 0.0));
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if zone_minimum(&paper(mid, mid)).v_k > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((gc - lo).abs() < 1e-9);
    assert!((gc - 1.74028).abs() < 5e-6);
}

#[test]
fn gap_law_is_exact_for_equal_couplings() {
    let p0 = paper(0.0, 0.0);
    let gc = critical_g_equal(&p0);
    let amplitude = (500.0 * 1000.0 * (4.0 - 2f64.sqrt())).sqrt();
    for g in [0.5, 1.0, 1.7, gc - 1e-6] {
        let gap = energy_gap(&paper(g, g), &LatticeSpec::infinite()).unwrap();
        assert_relative_eq!(gap, amplitude * (gc - g).sqrt(), max_relative = 1e-6);
    }
    let g0 = energy_gap(&p0, &LatticeSpec::infinite()).unwrap();
    assert_relative_eq!(g0, 1500.0, max_relative = 1e-14);
}
