//! One-dimensional composite Gauss-Legendre rules on `[0, pi]` with
//! geometric grading toward both endpoints.
//!
//! The Brillouin-zone integrands of the infinite lattice are smooth except
//! near the dispersion minimum, which always sits at a corner of the reduced
//! zone `[0, pi]^2`. A tensor product of these graded rules resolves the
//! near-singular corner at every scale down to `core`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A quadrature node on `[0, pi]` carrying both its coordinate and its
/// distance to `pi`, each computed without cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZoneNode {
    pub k: f64,
    pub from_pi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct GradedRule {
    pub nodes: Vec<ZoneNode>,
}

/// Panels measured as distances from an endpoint: `[0, core]`, then
/// geometrically growing by `1/ratio` up to `half`.
fn graded_edges(core: f64, half: f64, ratio: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut x = core.min(half);
    while x < half {
        edges.push(x);
        x /= ratio;
    }
    if *edges.last().unwrap() < half {
        edges.push(half);
    }
    // merge a too-thin last panel
    let n = edges.len();
    if n > 2 && (edges[n - 1] - edges[n - 2]) < 0.3 * (edges[n - 2] - edges[n - 3]) {
        edges.remove(n - 2);
    }
    edges
}

impl GradedRule {
    /// `order` Gauss points per panel; panels at most `max_width` wide
    /// (outside the graded region); each panel split into `2^level` parts.
    pub(crate) fn new(order: usize, core: f64, max_width: f64, level: u32) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let half = PI / 2.0;
        let graded = graded_edges(core, half.min(max_width), 0.2);
        // distances from an endpoint, covering [0, pi/2]
        let mut edges = graded.clone();
        let top = *edges.last().unwrap();
        if top < half {
            let n_uniform = ((half - top) / max_width).ceil().max(1.0) as usize;
            for i in 1..=n_uniform {
                edges.push(top + (half - top) * i as f64 / n_uniform as f64);
            }
        }
        let split = 1usize << level;
        let mut refined = Vec::with_capacity((edges.len() - 1) * split + 1);
        refined.push(edges[0]);
        for w in edges.windows(2) {
            for s in 1..=split {
                refined.push(w[0] + (w[1] - w[0]) * s as f64 / split as f64);
            }
        }

        let mut nodes = Vec::with_capacity(2 * (refined.len() - 1) * order);
        for w in refined.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, rad) = (0.5 * (a + b), 0.5 * (b - a));
            for (&x, &wt) in gx.iter().zip(&gw) {
                let d = mid + rad * x;
                let weight = wt * rad;
                // left half: distance d from 0
                nodes.push(ZoneNode {
                    k: d,
                    from_pi: PI - d,
                    weight,
                });
                // right half: distance d from pi
                nodes.push(ZoneNode {
                    k: PI - d,
                    from_pi: d,
                    weight,
                });
            }
        }
        nodes.sort_by(|a, b| a.k.total_cmp(&b.k));
        Self { nodes }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        for p in 0..24 {
            let numeric: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((numeric - exact).abs() < 1e-14, "p={p}: {numeric} vs {exact}");
        }
    }

    #[test]
    fn graded_rule_covers_zone() {
        let rule = GradedRule::new(16, 1e-9, 0.4, 0);
        let total: f64 = rule.nodes.iter().map(|n| n.weight).sum();
        assert!((total - PI).abs() < 1e-13);
        let cos_int: f64 = rule.nodes.iter().map(|n| n.weight * (3.0 * n.k).cos().powi(2)).sum();
        assert!((cos_int - PI / 2.0).abs() < 1e-13);
        assert!(rule.nodes.iter().all(|n| (n.k + n.from_pi - PI).abs() < 1e-15));
    }

    #[test]
    fn graded_rule_resolves_endpoint_singularity() {
        // int_0^pi x^{-1/2} dx = 2 sqrt(pi)
        let rule = GradedRule::new(20, 1e-14, 0.4, 0);
        let v: f64 = rule.nodes.iter().map(|n| n.weight / n.k.sqrt()).sum();
        assert!((v - 2.0 * PI.sqrt()).abs() < 1e-6, "{v}");
    }
}
