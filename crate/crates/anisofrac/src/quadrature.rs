//! Quadrature machinery for the singular sectional integrals.
//!
//! The integral of `g(y) |y|^{-N-2s}` over `R^N` (with `g` even and
//! `g(y) = O(|y|^2)` at the origin) is reduced to radial lines:
//!
//! * near field `[0, r_near]`: Gauss-Jacobi rule in the weight `r^{1-2s}`
//!   applied to `g(r)/r^2`, which is smooth through the origin — this
//!   absorbs the kernel singularity into the rule and stays accurate
//!   uniformly as `s -> 1`;
//! * mid field `[r_near, R]`: dyadic panels geometrically graded toward
//!   both endpoints of every piece, pieces split where the integrand may
//!   lose smoothness (kink spheres of the field);
//! * far tail `[R, inf)`: exact in closed form once the section is
//!   constant beyond `R`, otherwise bounded through the sup norm.
//!
//! Error estimates come from re-running the same construction at half
//! resolution plus explicit cancellation-noise accounting.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static RULE_CACHE: Lazy<Mutex<HashMap<(usize, u64), Rule>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Golub-Welsch: eigen-decomposition of the Jacobi matrix of the weight
/// `(1+x)^beta` on `[-1,1]` (`beta = 0` gives Gauss-Legendre).
fn golub_welsch(n: usize, beta: f64) -> Rule {
    assert!(n >= 2, "rule degree must be at least 2");
    let alpha = 0.0f64;
    let ab = alpha + beta;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        m[(k, k)] = diag;
        if k + 1 < n {
            let kp = kf + 1.0;
            let num = 4.0 * kp * (kp + alpha) * (kp + beta) * (kp + ab);
            let den = (2.0 * kp + ab).powi(2) * (2.0 * kp + ab + 1.0) * (2.0 * kp + ab - 1.0);
            let off = (num / den).sqrt();
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    let eig = m.symmetric_eigen();
    // mu0 = int_{-1}^{1} (1+x)^beta dx = 2^{beta+1} / (beta+1)
    let mu0 = 2f64.powf(beta + 1.0) / (beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v = eig.eigenvectors.column(j)[0];
            (eig.eigenvalues[j], mu0 * v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Legendre rule of degree `n` (cached).
pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0)
}

/// Gauss rule of degree `n` for the weight `(1+x)^beta` on `[-1,1]` (cached).
pub fn gauss_jacobi(n: usize, beta: f64) -> Rule {
    let key = (n, beta.to_bits());
    if let Some(r) = RULE_CACHE.lock().unwrap().get(&key) {
        return r.clone();
    }
    let r = golub_welsch(n, beta);
    RULE_CACHE.lock().unwrap().insert(key, r.clone());
    r
}

/// How the far tail of the sectional integral is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// Use the exact closed-form tail when the section is constant outside
    /// a known sphere (default).
    Analytic,
    /// Integrate numerically out to an extended cutoff and bound the rest
    /// through the sup norm.
    NumericExtended,
}

/// Discretization parameters of the singular sectional integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Radius of the weighted near-field rule.
    pub near_radius: f64,
    /// Radial budget; the near-field degree and panel order derive from it.
    pub radial_nodes: usize,
    /// Number of directions for two-dimensional groups.
    pub angular_nodes: usize,
    /// Numeric integration extends at least this far before the tail.
    pub far_cutoff: f64,
    pub tail_mode: TailMode,
    /// Nodes below this radius are dropped and covered by a second-difference
    /// Taylor bound in the error estimate.
    pub inner_floor: f64,
    /// Dyadic grading depth toward piece endpoints.
    pub grading_levels: u32,
}

impl QuadratureSpec {
    /// Defaults for a problem whose smallest box radius is `d_min`.
    pub fn for_scale(d_min: f64) -> Self {
        Self {
            near_radius: 0.1 * d_min,
            radial_nodes: 256,
            angular_nodes: 64,
            far_cutoff: d_min,
            tail_mode: TailMode::Analytic,
            inner_floor: 1e-6 * d_min,
            grading_levels: 34,
        }
    }

    pub(crate) fn jacobi_degree(&self) -> usize {
        (self.radial_nodes / 8).clamp(8, 48)
    }

    pub(crate) fn panel_order(&self) -> usize {
        (self.radial_nodes / 16).clamp(4, 24)
    }

    /// Same scheme at half resolution, for error estimation.
    pub(crate) fn coarsened(&self) -> Self {
        Self {
            radial_nodes: (self.radial_nodes / 2).max(32),
            angular_nodes: (self.angular_nodes / 2).max(4),
            grading_levels: self.grading_levels.saturating_sub(4).max(8),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_radius > 0.0) {
            return Err(Error::InvalidParameter(
                "near_radius must be positive".into(),
            ));
        }
        if self.far_cutoff <= self.near_radius {
            return Err(Error::InvalidParameter(
                "far_cutoff must exceed near_radius".into(),
            ));
        }
        if self.radial_nodes < 4 || self.angular_nodes < 4 {
            return Err(Error::InvalidParameter(
                "node counts must be at least 4".into(),
            ));
        }
        // an inner floor at or above the near radius is legitimate: the
        // whole near field is then covered by the stub model (sampled
        // fields on coarse grids)
        if !(self.inner_floor >= 0.0 && self.inner_floor.is_finite()) {
            return Err(Error::InvalidParameter(
                "inner_floor must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::for_scale(1.0)
    }
}

/// Integrate `f` over `[a, b]` with dyadic panels graded toward both
/// endpoints; `levels` controls the grading depth.
pub fn integrate_graded(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    order: usize,
    levels: u32,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let rule = gauss_legendre(order);
    let mut panel = |lo: f64, hi: f64| -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    };
    let h = 0.5 * (b - a);
    let mut total = 0.0;
    // left half, outermost to innermost
    let mut hi = a + h;
    for k in 1..=levels {
        let lo = a + h * 0.5f64.powi(k as i32);
        total += panel(lo, hi);
        hi = lo;
    }
    total += panel(a, hi);
    // right half
    let mut lo = b - h;
    for k in 1..=levels {
        let hi2 = b - h * 0.5f64.powi(k as i32);
        total += panel(lo, hi2);
        lo = hi2;
    }
    total += panel(lo, b);
    total
}

/// A flattened node of a sectional rule: direction index, radius, weight.
/// The weight multiplies the even integrand value `g(r * e_dir)`.
#[derive(Clone, Copy, Debug)]
pub struct RadialNode {
    pub dir: u32,
    pub radius: f64,
    pub weight: f64,
}

/// Discretization of `int_{R^N} g(y) |y|^{-N-2s} dy` for an even `g`
/// vanishing to second order at the origin:
/// `sum_q w_q g(r_q e_{dir_q}) + tail_coefficient * g_infinity`,
/// where `g_infinity` is the constant value of `g` beyond `tail_radius`
/// (exact when `constant_exterior`, a sup-norm-bounded approximation
/// otherwise).
#[derive(Clone, Debug)]
pub struct SectionRule {
    pub directions: Vec<Vec<f64>>,
    pub nodes: Vec<RadialNode>,
    pub tail_coefficient: f64,
    pub tail_radius: f64,
    pub constant_exterior: bool,
    /// Sum of |w_q| / r_q^2 over near-field nodes: multiplier for the
    /// cancellation-noise term of the error estimate.
    pub noise_weight: f64,
    /// Taylor bound coefficient for mass below the inner floor
    /// (multiplies a second-derivative estimate).
    pub stub_coefficient: f64,
}

/// Positive roots of `|X + r e| = rho` and `|X - r e| = rho`:
/// the radii at which the section through `x` crosses the sphere.
fn sphere_crossings(x_group: &[f64], dir: &[f64], rho: f64, out: &mut Vec<f64>) {
    let b: f64 = x_group.iter().zip(dir).map(|(xi, ei)| xi * ei).sum();
    let xx: f64 = x_group.iter().map(|t| t * t).sum();
    let disc = b * b + rho * rho - xx;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for r in [-b + sq, -b - sq, b + sq, b - sq] {
        if r > 1e-14 {
            out.push(r);
        }
    }
}

/// Build the sectional rule for a group of dimension `group_dim` at base
/// point block `x_group`, with the field's kink spheres and constancy
/// sphere for that group.
pub fn section_rule(
    group_dim: usize,
    s: f64,
    x_group: &[f64],
    kink_spheres: &[f64],
    constancy_radius: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<SectionRule> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::FractionalOrder(s));
    }
    spec.validate()?;
    let x_norm: f64 = x_group.iter().map(|t| t * t).sum::<f64>().sqrt();

    let directions: Vec<Vec<f64>> = match group_dim {
        1 => vec![vec![1.0]],
        2 => (0..spec.angular_nodes)
            .map(|j| {
                let th = (j as f64 + 0.5) * std::f64::consts::PI / spec.angular_nodes as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        d => return Err(Error::UnsupportedGroupDim(d)),
    };
    // angular weights summing to sigma_{N-1}
    let ang_weight = match group_dim {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / spec.angular_nodes as f64,
    };
    let sigma = ang_weight * directions.len() as f64;

    // tail radius: exact constancy when available
    let (tail_radius, constant_exterior) = match (constancy_radius, spec.tail_mode) {
        (Some(rho), TailMode::Analytic) => ((rho + x_norm).max(spec.near_radius * 2.0), true),
        (Some(rho), TailMode::NumericExtended) => (
            ((rho + x_norm).max(spec.far_cutoff)).max(spec.near_radius * 2.0),
            true,
        ),
        (None, _) => ((16.0 * spec.far_cutoff).max(spec.near_radius * 2.0), false),
    };
    let tail_radius = tail_radius.max(spec.far_cutoff.min(tail_radius)); // keep >= near field
    let tail_coefficient = sigma * tail_radius.powf(-2.0 * s) / (2.0 * s);

    let jacobi = gauss_jacobi(spec.jacobi_degree(), 1.0 - 2.0 * s);
    let gl_order = spec.panel_order();

    let mut nodes = Vec::new();
    let mut noise_weight = 0.0f64;
    let mut stub_active = false;
    for (di, dir) in directions.iter().enumerate() {
        let mut kinks: Vec<f64> = Vec::new();
        for &rho in kink_spheres {
            sphere_crossings(x_group, dir, rho, &mut kinks);
        }
        kinks.retain(|&r| r < tail_radius);
        kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        // weighted near field [0, r_near]
        let min_kink = kinks.first().copied().unwrap_or(f64::INFINITY);
        let r_near = spec
            .near_radius
            .min(0.5 * min_kink)
            .min(0.5 * tail_radius)
            .max(1e-300);
        let beta = 1.0 - 2.0 * s;
        let r_min_mapped = r_near * (1.0 + jacobi.nodes[0]) / 2.0;
        if spec.inner_floor < r_min_mapped {
            // int_0^rn g(r)/r^2 * r^{1-2s} dr via the (1+xi)^{1-2s} rule;
            // every node lies above the floor, nothing is skipped
            let scale_w = (r_near / 2.0).powf(beta + 1.0);
            for (xi, w) in jacobi.nodes.iter().zip(&jacobi.weights) {
                let r = r_near * (1.0 + xi) / 2.0;
                let weight = ang_weight * scale_w * w / (r * r);
                nodes.push(RadialNode {
                    dir: di as u32,
                    radius: r,
                    weight,
                });
                noise_weight += weight.abs();
            }
        } else if spec.inner_floor < r_near {
            // active floor (sampled fields): graded panels on [floor, r_near],
            // the mass below the floor goes into the stub bound
            stub_active = true;
            let rule = gauss_legendre(gl_order);
            let (a, b) = (spec.inner_floor, r_near);
            let h = 0.5 * (b - a);
            let emit = |lo: f64, hi: f64, nodes: &mut Vec<RadialNode>, nw: &mut f64| {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for (xq, wq) in rule.nodes.iter().zip(&rule.weights) {
                    let r = mid + half * xq;
                    let weight = ang_weight * half * wq * r.powf(-1.0 - 2.0 * s);
                    nodes.push(RadialNode {
                        dir: di as u32,
                        radius: r,
                        weight,
                    });
                    *nw += weight.abs();
                }
            };
            let mut hi = a + h;
            for k in 1..=spec.grading_levels {
                let lo = a + h * 0.5f64.powi(k as i32);
                emit(lo, hi, &mut nodes, &mut noise_weight);
                hi = lo;
            }
            emit(a, hi, &mut nodes, &mut noise_weight);
            let mut lo = b - h;
            for k in 1..=spec.grading_levels {
                let hi2 = b - h * 0.5f64.powi(k as i32);
                emit(lo, hi2, &mut nodes, &mut noise_weight);
                lo = hi2;
            }
            emit(lo, b, &mut nodes, &mut noise_weight);
        } else {
            // the floor swallows the whole near field
            stub_active = true;
        }

        // mid field [r_near, tail_radius], pieces split at kinks
        let mid_start = r_near.max(spec.inner_floor.min(0.5 * tail_radius));
        let mut edges = vec![mid_start];
        edges.extend(
            kinks
                .iter()
                .copied()
                .filter(|&r| r > mid_start && r < tail_radius),
        );
        edges.push(tail_radius);
        let rule = gauss_legendre(gl_order);
        for win in edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            if !(b > a) {
                continue;
            }
            let h = 0.5 * (b - a);
            let mut emit_panel = |lo: f64, hi: f64, nodes: &mut Vec<RadialNode>| {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for (xq, wq) in rule.nodes.iter().zip(&rule.weights) {
                    let r = mid + half * xq;
                    let weight = ang_weight * half * wq * r.powf(-1.0 - 2.0 * s);
                    nodes.push(RadialNode {
                        dir: di as u32,
                        radius: r,
                        weight,
                    });
                    noise_weight += weight.abs();
                }
            };
            let mut hi = a + h;
            for k in 1..=spec.grading_levels {
                let lo = a + h * 0.5f64.powi(k as i32);
                emit_panel(lo, hi, &mut nodes);
                hi = lo;
            }
            emit_panel(a, hi, &mut nodes);
            let mut lo = b - h;
            for k in 1..=spec.grading_levels {
                let hi2 = b - h * 0.5f64.powi(k as i32);
                emit_panel(lo, hi2, &mut nodes);
                lo = hi2;
            }
            emit_panel(lo, b, &mut nodes);
        }
    }

    // mass below the inner floor, relative to a unit second derivative:
    // sigma * eps^{2-2s} / (2-2s); zero when no node was skipped
    let stub_coefficient = if stub_active {
        sigma * spec.inner_floor.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    } else {
        0.0
    };

    Ok(SectionRule {
        directions,
        nodes,
        tail_coefficient,
        tail_radius,
        constant_exterior,
        noise_weight,
        stub_coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_degree_five_reference() {
        let r = gauss_legendre(5);
        let expected_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let expected_weights = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for (a, b) in r.nodes.iter().zip(expected_nodes) {
            assert_relative_eq!(*a, b, epsilon = 1e-13);
        }
        for (a, b) in r.weights.iter().zip(expected_weights) {
            assert_relative_eq!(*a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobi_rule_integrates_weighted_monomials() {
        // int_{-1}^{1} (1+x)^beta x^k dx for beta = -0.5
        let beta = -0.5;
        let r = gauss_jacobi(12, beta);
        let quad = |k: i32| -> f64 {
            r.nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum()
        };
        // references computed by expanding (x = t^2 - 1, dx = 2t dt):
        // k=0: 2 sqrt(2); k=1: -2 sqrt(2)/3; k=2: 2 sqrt(2) * 7/15
        let s2 = std::f64::consts::SQRT_2;
        assert_relative_eq!(quad(0), 2.0 * s2, max_relative = 1e-12);
        assert_relative_eq!(quad(1), -2.0 * s2 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(quad(2), 2.0 * s2 * 7.0 / 15.0, max_relative = 1e-12);
    }

    #[test]
    fn graded_panels_handle_endpoint_singularity() {
        // int_0^1 r^{-1/2} dr = 2: unbounded integrable singularity
        let mut f = |r: f64| r.powf(-0.5);
        let v = integrate_graded(&mut f, 0.0, 1.0, 16, 34);
        assert_relative_eq!(v, 2.0, max_relative = 1e-6);
        // int_0^1 r^{1/4} dr = 4/5: bounded endpoint singularity, the kind
        // produced by profile edges; grading resolves it to high accuracy
        let mut f = |r: f64| r.powf(0.25);
        let v = integrate_graded(&mut f, 0.0, 1.0, 16, 34);
        assert_relative_eq!(v, 0.8, max_relative = 1e-11);
    }

    #[test]
    fn graded_panels_smooth_reference() {
        let mut f = |r: f64| (r * 1.3).sin();
        let v = integrate_graded(&mut f, 0.0, 2.0, 16, 20);
        let exact = (1.0 - (2.0f64 * 1.3).cos()) / 1.3;
        assert_relative_eq!(v, exact, max_relative = 1e-12);
    }

    #[test]
    fn section_rule_reproduces_power_integral() {
        // g(y) = min(|y|^2, 1): int g |y|^{-1-2s} dy over R with s = 0.25:
        // 2 [ int_0^1 r^{1-2s} dr + int_1^inf r^{-1-2s} dr ]
        //   = 2 [ 1/(2-2s) + 1/(2s) ]
        let s = 0.25;
        let spec = QuadratureSpec {
            inner_floor: 0.0,
            ..QuadratureSpec::for_scale(1.0)
        };
        let rule = section_rule(1, s, &[0.0], &[1.0], Some(1.0), &spec).unwrap();
        let g = |r: f64| r.powi(2).min(1.0);
        let mut total: f64 = rule.nodes.iter().map(|n| n.weight * g(n.radius)).sum();
        total += rule.tail_coefficient * 1.0;
        let exact = 2.0 * (1.0 / (2.0 - 2.0 * s) + 1.0 / (2.0 * s));
        assert_relative_eq!(total, exact, max_relative = 1e-10);
    }

    #[test]
    fn section_rule_rejects_bad_group_dims() {
        let spec = QuadratureSpec::for_scale(1.0);
        assert!(section_rule(3, 0.5, &[0.0, 0.0, 0.0], &[], Some(1.0), &spec).is_err());
        assert!(section_rule(1, 1.0, &[0.0], &[], Some(1.0), &spec).is_err());
    }
}
