//! Infinite-lattice correlations as Brillouin-zone integrals,
//!
//! ```text
//! <q_0 q_r> = 1 / (2 (2 pi)^2) int_zone v_k^{-1/2} cos(k.r) d^2k
//!           = 1 / (2 pi^2)     int_[0,pi]^2 v_k^{-1/2} cos(kx dx) cos(ky dy) d^2k
//! ```
//!
//! (`v_k` is even in `kx` and `ky` separately) and likewise with `v_k^{1/2}`
//! for momenta. The soft mode sits at a corner of `[0, pi]^2`, so the rule is
//! a tensor product of Gauss-Legendre panels graded geometrically toward
//! both ends of each axis. Refinement halves every panel until two
//! successive tables agree.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CouplingParams;
use crate::quadrature::GradedRule;
use crate::spectrum::{corner_expansion, zone_minimum};

use super::{guard, CorrelationTable, Engine, TableDomain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per panel, at least 16.
    pub order: usize,
    /// Convergence threshold on the largest change between refinements,
    /// relative to the on-site moment.
    pub rel_tol: f64,
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 24,
            rel_tol: 1e-10,
            max_refinements: 4,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.order < 16 {
            return Err(Error::InvalidArgument(format!(
                "quadrature order must be >= 16, got {}",
                self.order
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("quadrature tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// A converged zone mesh. Reusing it for nearby parameters keeps finite
/// differences free of mesh-switching noise.
#[derive(Debug, Clone)]
pub struct ZonePlan {
    rule: GradedRule,
    level: u32,
    core: f64,
}

/// Scale on which `v_k` varies near its minimum, `sqrt(min v / curvature)`.
fn soft_scale(params: &CouplingParams, min_v: f64) -> f64 {
    let curvature = 2.0 * params.bond_scale() * params.g1().max(params.g2());
    if curvature <= 0.0 {
        return 1.0;
    }
    (min_v / curvature).sqrt()
}

fn max_width(extent: usize) -> f64 {
    (6.0 / (extent as f64 + 1.0)).min(0.4)
}

impl ZonePlan {
    /// Refine until successive tables agree to `quad.rel_tol`.
    pub fn converge(
        params: &CouplingParams,
        extent: usize,
        quad: &QuadratureSpec,
    ) -> Result<(Self, CorrelationTable)> {
        quad.validate()?;
        let min = zone_minimum(params);
        guard(params, min.v_k)?;
        let core = (0.1 * soft_scale(params, min.v_k)).clamp(1e-15, 0.1);
        let width = max_width(extent);

        let mut plan = ZonePlan {
            rule: GradedRule::new(quad.order, core, width, 0),
            level: 0,
            core,
        };
        let mut previous = plan.evaluate(params, extent)?;
        loop {
            if plan.level >= quad.max_refinements {
                return Err(Error::Quadrature {
                    refinements: plan.level as usize,
                    last: previous.qq[0],
                    previous: f64::NAN,
                });
            }
            let next = ZonePlan {
                rule: GradedRule::new(quad.order, core, width, plan.level + 1),
                level: plan.level + 1,
                core,
            };
            let table = next.evaluate(params, extent)?;
            let change = relative_change(&previous, &table);
            if change < quad.rel_tol {
                return Ok((next, table));
            }
            if next.level >= quad.max_refinements {
                return Err(Error::Quadrature {
                    refinements: next.level as usize,
                    last: table.qq[0],
                    previous: previous.qq[0],
                });
            }
            plan = next;
            previous = table;
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.rule.len()
    }

    /// Innermost panel width at the zone corners.
    pub fn core(&self) -> f64 {
        self.core
    }

    /// Evaluate the table on this mesh, without refinement.
    pub fn evaluate(&self, params: &CouplingParams, extent: usize) -> Result<CorrelationTable> {
        let min = zone_minimum(params);
        guard(params, min.v_k)?;
        // pick the minimizing corner for the cancellation-free expansion
        let corner = (
            if min.kx > PI / 2.0 { -1.0 } else { 1.0 },
            if min.ky > PI / 2.0 { -1.0 } else { 1.0 },
        );
        let v = corner_expansion(params, corner);
        let nodes = &self.rule.nodes;
        let n = nodes.len();
        let d = extent + 1;

        // cos k - x0 without cancellation
        let offsets = |x0: f64| -> Vec<f64> {
            nodes
                .iter()
                .map(|nd| {
                    if x0 > 0.0 {
                        -2.0 * (0.5 * nd.k).sin().powi(2)
                    } else {
                        2.0 * (0.5 * nd.from_pi).sin().powi(2)
                    }
                })
                .collect()
        };
        let dx = offsets(corner.0);
        let dy = offsets(corner.1);
        // weighted cosines, n x d
        let wcos = DMatrix::from_fn(n, d, |i, r| nodes[i].weight * (r as f64 * nodes[i].k).cos());

        // column j of (wcos^T F): independent per ky node
        let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut gq = vec![0.0; d];
                let mut gp = vec![0.0; d];
                for i in 0..n {
                    let value = v(dx[i], dy[j]);
                    let (fq, fp) = (1.0 / value.sqrt(), value.sqrt());
                    for r in 0..d {
                        let c = wcos[(i, r)];
                        gq[r] += c * fq;
                        gp[r] += c * fp;
                    }
                }
                (gq, gp)
            })
            .collect();
        let gq = DMatrix::from_fn(d, n, |r, j| columns[j].0[r]);
        let gp = DMatrix::from_fn(d, n, |r, j| columns[j].1[r]);
        let norm = 1.0 / (2.0 * PI * PI);
        let tq = (gq * &wcos) * norm;
        let tp = (gp * &wcos) * norm;
        // row-major by displacement: index dy * d + dx
        let qq = (0..d * d).map(|k| tq[(k % d, k / d)]).collect();
        let pp = (0..d * d).map(|k| tp[(k % d, k / d)]).collect();
        Ok(CorrelationTable::new(
            TableDomain::Infinite { extent },
            qq,
            pp,
            *params,
            Engine::Infinite,
        ))
    }
}

fn relative_change(a: &CorrelationTable, b: &CorrelationTable) -> f64 {
    let scale_q = a.qq[0].abs();
    let scale_p = a.pp[0].abs();
    let dq = a.qq.iter().zip(&b.qq).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let dp = a.pp.iter().zip(&b.pp).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (dq / scale_q).max(dp / scale_p)
}

/// Correlations of the infinite lattice for every displacement within the
/// bounding box of `displacements`.
pub fn covariance_infinite(
    params: &CouplingParams,
    displacements: &[(i64, i64)],
    quad: &QuadratureSpec,
) -> Result<CorrelationTable> {
    let extent = displacements
        .iter()
        .map(|&(dx, dy)| dx.unsigned_abs().max(dy.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0);
    Ok(ZonePlan::converge(params, extent, quad)?.1)
}
