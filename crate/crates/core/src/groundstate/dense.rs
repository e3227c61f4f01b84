use crate::error::{Error, Result};
use crate::linalg;
use crate::model::PotentialMatrix;

use super::{guard, CovariancePair, Engine, DENSE_MAX_SIDE};

/// `Q = V^{-1/2} / 2` and `P = V^{1/2} / 2` from `V = U D U^T`.
pub fn covariance_dense(v: &PotentialMatrix) -> Result<CovariancePair> {
    let lattice = *v.lattice();
    if lattice.side() > DENSE_MAX_SIDE {
        return Err(Error::InvalidArgument(format!(
            "dense engine handles side <= {DENSE_MAX_SIDE}, got {}; use the fft engine",
            lattice.side()
        )));
    }
    let eig = linalg::symmetric_eigen(v.to_dense())?;
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    guard(v.params(), min)?;
    let q = linalg::apply_function(&eig, |d| 0.5 / d.sqrt());
    let p = linalg::apply_function(&eig, |d| 0.5 * d.sqrt());
    Ok(CovariancePair {
        q,
        p,
        lattice,
        params: *v.params(),
        engine: Engine::Dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_potential, CouplingParams, LatticeSpec};

    fn paper(g: f64) -> CouplingParams {
        CouplingParams::new(500.0, 1.0, 1000, g, g).unwrap()
    }

    #[test]
    fn decoupled_covariances() {
        let v = build_potential(&LatticeSpec::open(3).unwrap(), &paper(0.0)).unwrap();
        let c = covariance_dense(&v).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let (eq, ep) = if i == j { (1.0 / 3000.0, 750.0) } else { (0.0, 0.0) };
                assert!((c.q[(i, j)] - eq).abs() < 1e-15);
                assert!((c.p[(i, j)] - ep).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_state_identity() {
        let v = build_potential(&LatticeSpec::open(4).unwrap(), &paper(1.6)).unwrap();
        let c = covariance_dense(&v).unwrap();
        let product = (&c.q * &c.p) * 4.0;
        let eye = nalgebra::DMatrix::<f64>::identity(16, 16);
        assert!((product - eye).amax() < 1e-10);
    }

    #[test]
    fn refuses_unstable_potential() {
        let v = build_potential(&LatticeSpec::periodic(4).unwrap(), &paper(1.9)).unwrap();
        assert!(matches!(covariance_dense(&v), Err(Error::Unstable { .. })));
    }

    #[test]
    fn q_and_p_are_positive_definite() {
        let v = build_potential(&LatticeSpec::periodic(5).unwrap(), &paper(1.7)).unwrap();
        let c = covariance_dense(&v).unwrap();
        assert!(nalgebra::Cholesky::new(c.q.clone()).is_some());
        assert!(nalgebra::Cholesky::new(c.p.clone()).is_some());
    }
}
