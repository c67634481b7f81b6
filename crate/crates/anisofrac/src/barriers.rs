//! The extended-space barrier pair.
//!
//! From a base solution `u(X', x_n)` two functions of `(X', y, z)` are
//! built:
//!
//! * the increment barrier
//!   `phi = (1/4)[u(X', y_+ + z_+) - u(X', y_+ - z_+) - u(X', -y_+ + z_+) + u(X', -y_+ - z_+)]`,
//!   which vanishes identically off the positive quadrant in `(y, z)` and
//!   whose extended image equals the alternating combination of `L u`;
//! * the dominating barrier `psi`, a sum of per-group profile bumps, a
//!   product term `4 M y_+ z_+ / d_m`, and the logarithmic term
//!   `kappa y_+ z_+ |log(2 d_m / (y_+ + z_+))|`.
//!
//! The checks in this module verify, probe by probe, every property that
//! feeds the comparison argument: the extended-image identity of `phi`,
//! its exact vanishing and Lipschitz bound, the exterior domination
//! `psi >= |phi|` on the five regions covering the complement of `Q'`,
//! the interior supersolution margin of `psi`, the closed-form trace
//! identity of the `y z log` profile, and the quarter bound of
//! `h(t) = t/(1+t)^2`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::EstimateParameters;
use crate::decomposition::{BoxDomain, CoordinateDecomposition, ExtendedPoint, GroupSpan};
use crate::error::Result;
use crate::fields::{Field, ScalarField};
use crate::operator::{apply_extended, apply_l};
use crate::quadrature::QuadratureSpec;
use crate::report::{param_f64, param_str, CheckReport, Params, ProbeRecord};

/// The four-point increment barrier over a base field.
pub struct BarrierPhi<'a> {
    base: &'a ScalarField,
    n: usize,
}

impl<'a> BarrierPhi<'a> {
    pub fn new(base: &'a ScalarField) -> Self {
        Self {
            base,
            n: base.dim(),
        }
    }

    pub fn eval_point(&self, p: &ExtendedPoint) -> f64 {
        self.eval(&p.coords())
    }

    /// The four arguments `(y_+ + z_+, y_+ - z_+, -y_+ + z_+, -y_+ - z_+)`.
    fn last_args(y: f64, z: f64) -> [f64; 4] {
        let yp = y.max(0.0);
        let zp = z.max(0.0);
        [yp + zp, yp - zp, -yp + zp, -yp - zp]
    }
}

impl Field for BarrierPhi<'_> {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn eval(&self, coords: &[f64]) -> f64 {
        let (y, z) = (coords[self.n - 1], coords[self.n]);
        if y <= 0.0 || z <= 0.0 {
            return 0.0;
        }
        let mut x = coords[..self.n].to_vec();
        let args = Self::last_args(y, z);
        let mut vals = [0.0f64; 4];
        for (v, t) in vals.iter_mut().zip(args) {
            x[self.n - 1] = t;
            *v = self.base.eval(&x);
        }
        0.25 * (vals[0] - vals[1] - vals[2] + vals[3])
    }

    fn sup_bound(&self) -> Option<f64> {
        self.base.sup_bound()
    }

    fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        self.base.group_constancy_radius(span)
    }

    fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        self.base.group_kink_radii(span)
    }

    fn second_partial(&self, coords: &[f64], axis: usize) -> Option<f64> {
        // exact only in the X' block (the chain through y, z is taken by
        // finite differences in the extended operator)
        if axis >= self.n - 1 {
            return None;
        }
        let (y, z) = (coords[self.n - 1], coords[self.n]);
        if y <= 0.0 || z <= 0.0 {
            return Some(0.0);
        }
        let mut x = coords[..self.n].to_vec();
        let args = Self::last_args(y, z);
        let mut vals = [0.0f64; 4];
        for (v, t) in vals.iter_mut().zip(args) {
            x[self.n - 1] = t;
            *v = self.base.second_partial(&x, axis)?;
        }
        Some(0.25 * (vals[0] - vals[1] - vals[2] + vals[3]))
    }
}

/// The dominating barrier.
pub struct BarrierPsi<'a> {
    pub decomp: &'a CoordinateDecomposition,
    pub domain: &'a BoxDomain,
    pub sup_u: f64,
    pub sup_dnu: f64,
    pub kappa: f64,
}

impl BarrierPsi<'_> {
    pub fn eval_point(&self, p: &ExtendedPoint) -> f64 {
        self.eval(&p.coords())
    }

    fn group_term(&self, i: usize, coords: &[f64]) -> f64 {
        let s = self.decomp.order(i);
        let d = self.domain.radii[i];
        let coef = self.sup_u / (1.0 - 0.75f64.powf(s));
        let r2: f64 = self
            .decomp
            .span(i)
            .range()
            .map(|k| coords[k] * coords[k])
            .sum();
        let bump = (1.0 - r2 / (d * d)).max(0.0).powf(s);
        coef * (1.0 - bump)
    }
}

impl Field for BarrierPsi<'_> {
    fn dim(&self) -> usize {
        self.decomp.dim() + 1
    }

    fn eval(&self, coords: &[f64]) -> f64 {
        let n = self.decomp.dim();
        let d_m = self.domain.local_radius();
        let yp = coords[n - 1].max(0.0);
        let zp = coords[n].max(0.0);
        let mut acc = 0.0;
        for i in 0..self.decomp.num_groups() - 1 {
            acc += self.group_term(i, coords);
        }
        acc += 4.0 * self.sup_dnu * yp * zp / d_m;
        if yp > 0.0 && zp > 0.0 {
            acc += self.kappa * yp * zp * (2.0 * d_m / (yp + zp)).ln().abs();
        }
        acc
    }

    fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        for i in 0..self.decomp.num_groups() - 1 {
            if self.decomp.span(i) == *span {
                return Some(self.domain.radii[i]);
            }
        }
        None
    }

    fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        for i in 0..self.decomp.num_groups() - 1 {
            if self.decomp.span(i) == *span {
                return vec![self.domain.radii[i]];
            }
        }
        vec![]
    }
}

/// `h(t) = t / (1+t)^2`, the profile whose supremum pins the quarter
/// bound `y z / (y+z)^2 <= 1/4`.
pub fn h_profile(t: f64) -> f64 {
    t / ((1.0 + t) * (1.0 + t))
}

/// `(d^2/dy^2 + d^2/dz^2) [ y z log(2 d_m/(y+z)) ] = -2 + 2 y z/(y+z)^2`.
pub fn yz_log_trace(y: f64, z: f64) -> f64 {
    -2.0 + 2.0 * y * z / ((y + z) * (y + z))
}

fn yz_log(y: f64, z: f64, d_m: f64) -> f64 {
    y * z * (2.0 * d_m / (y + z)).ln()
}

/// Uniform point in the radius-`r` ball of dimension `dim` (rejection).
fn sample_ball(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|t| t * t).sum();
        if n2 < 1.0 {
            return v.into_iter().map(|t| t * r).collect();
        }
    }
}

/// Random point strictly inside `Q'`.
pub fn sample_interior(
    rng: &mut ChaCha8Rng,
    decomp: &CoordinateDecomposition,
    domain: &BoxDomain,
) -> ExtendedPoint {
    let mut x_prime = Vec::with_capacity(decomp.dim() - 1);
    for i in 0..decomp.num_groups() - 1 {
        x_prime.extend(sample_ball(
            rng,
            decomp.group_dim(i),
            domain.radii[i] * 0.98,
        ));
    }
    let q = domain.local_radius() / 4.0;
    let y = rng.gen_range(0.015 * q..0.985 * q);
    let z = rng.gen_range(0.015 * q..0.985 * q);
    ExtendedPoint::new(x_prime, y, z)
}

/// The five regions covering the complement of `Q'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExteriorRegion {
    /// some `|X'_i| >= d_i / 2` (sampled both in the shell `[d_i/2, d_i)`
    /// and beyond `d_i`)
    GroupShell,
    NonpositiveY,
    NonpositiveZ,
    LargeY,
    LargeZ,
}

pub const EXTERIOR_REGIONS: [ExteriorRegion; 5] = [
    ExteriorRegion::GroupShell,
    ExteriorRegion::NonpositiveY,
    ExteriorRegion::NonpositiveZ,
    ExteriorRegion::LargeY,
    ExteriorRegion::LargeZ,
];

/// Random point of the given exterior region.
pub fn sample_exterior(
    rng: &mut ChaCha8Rng,
    decomp: &CoordinateDecomposition,
    domain: &BoxDomain,
    region: ExteriorRegion,
    index: usize,
) -> ExtendedPoint {
    let d_m = domain.local_radius();
    let q = d_m / 4.0;
    let mut x_prime = Vec::with_capacity(decomp.dim() - 1);
    // default X' block: inside the half balls
    for i in 0..decomp.num_groups() - 1 {
        x_prime.extend(sample_ball(
            rng,
            decomp.group_dim(i),
            domain.radii[i] * 0.45,
        ));
    }
    let mut y = rng.gen_range(0.0..q);
    let mut z = rng.gen_range(0.0..q);
    match region {
        ExteriorRegion::GroupShell => {
            // put one group block into [d/2, d) or [d, 2d], alternating
            let g = index % (decomp.num_groups() - 1);
            let d = domain.radii[g];
            let (lo, hi) = if index % 2 == 0 {
                (0.5 * d, 0.999 * d)
            } else {
                (d, 2.0 * d)
            };
            let r = rng.gen_range(lo..hi);
            let dir = sample_ball(rng, decomp.group_dim(g), 1.0);
            let norm: f64 = dir.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-9);
            let span = decomp.span(g);
            for (j, k) in span.range().enumerate() {
                x_prime[k] = dir[j] / norm * r;
            }
            y = rng.gen_range(-d_m..d_m);
            z = rng.gen_range(-d_m..d_m);
        }
        ExteriorRegion::NonpositiveY => {
            y = -rng.gen_range(0.0..d_m);
            z = rng.gen_range(-d_m..d_m);
        }
        ExteriorRegion::NonpositiveZ => {
            z = -rng.gen_range(0.0..d_m);
            y = rng.gen_range(-d_m..d_m);
        }
        ExteriorRegion::LargeY => {
            y = rng.gen_range(q..d_m);
        }
        ExteriorRegion::LargeZ => {
            z = rng.gen_range(q..d_m);
        }
    }
    ExtendedPoint::new(x_prime, y, z)
}

/// Verify the four properties of the increment barrier:
/// the extended-image identity, exact vanishing off the quadrant, exact
/// symmetry in `(y, z)`, and the Lipschitz bound
/// `|phi| <= sup|du/dx_n| min(y_+, z_+)`.
pub fn check_phi_properties(
    u: &ScalarField,
    decomp: &CoordinateDecomposition,
    domain: &BoxDomain,
    sup_dnu: f64,
    identity_probes: usize,
    bound_probes: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Vec<CheckReport>> {
    let phi = BarrierPhi::new(u);
    let n = decomp.dim();
    let mut reports = Vec::new();

    // (1) extended image of phi vs the alternating combination of L u
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes = Vec::with_capacity(identity_probes);
        for _ in 0..identity_probes {
            let p = sample_interior(&mut rng, decomp, domain);
            let coords = p.coords();
            let lhs = apply_extended(&phi, decomp, &coords, spec)?;
            let mut rhs = 0.0;
            let mut rhs_err = 0.0;
            let mut x = coords[..n].to_vec();
            for (sign, t) in [
                (1.0, p.y + p.z),
                (-1.0, p.y - p.z),
                (-1.0, -p.y + p.z),
                (1.0, -p.y - p.z),
            ] {
                x[n - 1] = t;
                let lu = apply_l(u, decomp, &x, spec)?;
                rhs += 0.25 * sign * lu.value;
                rhs_err += 0.25 * lu.error_estimate;
            }
            let tol = 10.0 * (lhs.error_estimate + rhs_err) + 1e-10;
            probes.push(ProbeRecord {
                input: coords,
                lhs: lhs.value,
                rhs,
                slack: tol - (lhs.value - rhs).abs(),
            });
        }
        let mut params = Params::new();
        param_f64(&mut params, "probes", identity_probes as f64);
        param_str(&mut params, "tolerance", "10x summed error estimates");
        reports.push(CheckReport::from_probes(
            "phi-extended-image",
            params,
            probes,
        ));
    }

    // (2) exact vanishing off the positive quadrant and exact symmetry
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let mut probes = Vec::new();
        for _ in 0..bound_probes {
            let p = sample_interior(&mut rng, decomp, domain);
            for (y, z) in [
                (-p.y, p.z),
                (p.y, -p.z),
                (-p.y, -p.z),
                (0.0, p.z),
                (p.y, 0.0),
            ] {
                let q = ExtendedPoint::new(p.x_prime.clone(), y, z);
                let v = phi.eval_point(&q);
                probes.push(ProbeRecord {
                    input: q.coords(),
                    lhs: v.abs(),
                    rhs: 0.0,
                    slack: if v == 0.0 { 0.0 } else { -v.abs() },
                });
            }
            // symmetry is exact: the four base evaluations coincide pairwise
            let a = phi.eval_point(&p);
            let b = phi.eval_point(&ExtendedPoint::new(p.x_prime.clone(), p.z, p.y));
            probes.push(ProbeRecord {
                input: p.coords(),
                lhs: (a - b).abs(),
                rhs: 0.0,
                slack: if a == b { 0.0 } else { -(a - b).abs() },
            });
        }
        reports.push(CheckReport::from_probes(
            "phi-vanishing-symmetry",
            Params::new(),
            probes,
        ));
    }

    // (3) |phi| <= sup|du/dx_n| min(y_+, z_+)
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2545f4914f6cdd1d);
        let mut probes = Vec::with_capacity(bound_probes);
        for _ in 0..bound_probes {
            // also sample outside Q' where the bound still holds
            let mut p = sample_interior(&mut rng, decomp, domain);
            if rng.gen_bool(0.3) {
                p.y = rng.gen_range(-0.5..domain.local_radius());
                p.z = rng.gen_range(-0.5..domain.local_radius());
            }
            let v = phi.eval_point(&p).abs();
            let bound = sup_dnu * p.y.max(0.0).min(p.z.max(0.0));
            probes.push(ProbeRecord {
                input: p.coords(),
                lhs: v,
                rhs: bound,
                slack: bound - v + 1e-9,
            });
        }
        let mut params = Params::new();
        param_f64(&mut params, "sup_dnu", sup_dnu);
        reports.push(CheckReport::from_probes(
            "phi-lipschitz-bound",
            params,
            probes,
        ));
    }

    Ok(reports)
}

/// Verify the dominating barrier: exterior sign `psi +- phi >= 0` over the
/// five covering regions, the interior supersolution margin, pointwise
/// domination `psi >= |phi|` inside `Q'`, the `y z log` trace identity,
/// and the quarter bound of `h`.
///
/// The supersolution margin is checked in the orientation that feeds the
/// comparison argument: the extended image of `psi` stays at or above
/// `sup|L u|` inside `Q'`, so that the images of `psi +- phi` stay
/// nonnegative there.
pub fn check_psi_supersolution(
    u: &ScalarField,
    params_in: &EstimateParameters,
    decomp: &CoordinateDecomposition,
    domain: &BoxDomain,
    interior_probes: usize,
    exterior_samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Vec<CheckReport>> {
    let phi = BarrierPhi::new(u);
    let psi = BarrierPsi {
        decomp,
        domain,
        sup_u: params_in.sup_u,
        sup_dnu: params_in.sup_dnu,
        kappa: params_in.kappa,
    };
    let d_m = domain.local_radius();
    let mut reports = Vec::new();

    // (a) exterior sign on the five regions
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_region = exterior_samples.div_ceil(EXTERIOR_REGIONS.len());
        let mut probes = Vec::new();
        for region in EXTERIOR_REGIONS {
            for idx in 0..per_region {
                let p = sample_exterior(&mut rng, decomp, domain, region, idx);
                let pv = psi.eval_point(&p);
                let fv = phi.eval_point(&p);
                let worst = pv - fv.abs(); // covers both psi + phi and psi - phi
                probes.push(ProbeRecord {
                    input: p.coords(),
                    lhs: fv.abs(),
                    rhs: pv,
                    slack: worst + 1e-9,
                });
            }
        }
        let mut params = Params::new();
        param_f64(&mut params, "samples", probes.len() as f64);
        param_str(
            &mut params,
            "regions",
            "group-shell, y<=0, z<=0, y>=d/4, z>=d/4",
        );
        reports.push(CheckReport::from_probes(
            "psi-exterior-sign",
            params,
            probes,
        ));
    }

    // (b) interior supersolution margin and pointwise domination
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a09e667f3bcc909);
        let mut margin_probes = Vec::with_capacity(interior_probes);
        let mut dominate_probes = Vec::with_capacity(interior_probes);
        for _ in 0..interior_probes {
            let p = sample_interior(&mut rng, decomp, domain);
            let coords = p.coords();
            let lpsi = apply_extended(&psi, decomp, &coords, spec)?;
            let tol = 10.0 * lpsi.error_estimate + 1e-8;
            margin_probes.push(ProbeRecord {
                input: coords.clone(),
                lhs: params_in.sup_lu,
                rhs: lpsi.value,
                slack: lpsi.value - params_in.sup_lu + tol,
            });
            let pv = psi.eval_point(&p);
            let fv = phi.eval_point(&p).abs();
            dominate_probes.push(ProbeRecord {
                input: coords,
                lhs: fv,
                rhs: pv,
                slack: pv - fv + 1e-9,
            });
        }
        let mut params = Params::new();
        param_f64(&mut params, "kappa", params_in.kappa);
        param_f64(&mut params, "sup_lu", params_in.sup_lu);
        param_str(
            &mut params,
            "orientation",
            "extended image of psi >= sup|Lu| - tol",
        );
        reports.push(CheckReport::from_probes(
            "psi-supersolution-margin",
            params,
            margin_probes,
        ));
        reports.push(CheckReport::from_probes(
            "psi-dominates-phi-interior",
            Params::new(),
            dominate_probes,
        ));
    }

    // (c) trace identity of the y z log profile vs central differences
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbb67ae8584caa73b);
        let mut probes = Vec::new();
        let h = 1e-4 * d_m;
        for _ in 0..100 {
            let y = rng.gen_range(0.05 * d_m..0.9 * d_m);
            let z = rng.gen_range(0.05 * d_m..(2.0 * d_m - y) * 0.9);
            let analytic = yz_log_trace(y, z);
            let fd = (yz_log(y + h, z, d_m) - 2.0 * yz_log(y, z, d_m)
                + yz_log(y - h, z, d_m)
                + yz_log(y, z + h, d_m)
                - 2.0 * yz_log(y, z, d_m)
                + yz_log(y, z - h, d_m))
                / (h * h);
            probes.push(ProbeRecord {
                input: vec![y, z],
                lhs: fd,
                rhs: analytic,
                slack: 1e-6 - (fd - analytic).abs(),
            });
        }
        let mut params = Params::new();
        param_f64(&mut params, "fd_step", h);
        reports.push(CheckReport::from_probes(
            "yz-log-trace-identity",
            params,
            probes,
        ));
    }

    // (d) sup h = h(1) = 1/4 by dense scan
    {
        let mut best = (0.0f64, 0.0f64);
        let step = 1e-4;
        let mut t = 0.0;
        while t <= 10.0 {
            let v = h_profile(t);
            if v > best.1 {
                best = (t, v);
            }
            t += step;
        }
        let probes = vec![
            ProbeRecord {
                input: vec![best.0],
                lhs: best.1,
                rhs: 0.25,
                slack: 0.25 - best.1 + 1e-9,
            },
            ProbeRecord {
                input: vec![1.0],
                lhs: h_profile(1.0),
                rhs: 0.25,
                slack: -(h_profile(1.0) - 0.25).abs(),
            },
            ProbeRecord {
                input: vec![best.0],
                lhs: (best.0 - 1.0).abs(),
                rhs: step,
                slack: step - (best.0 - 1.0).abs(),
            },
        ];
        let mut params = Params::new();
        param_f64(&mut params, "scan_step", step);
        reports.push(CheckReport::from_probes("h-quarter-bound", params, probes));
    }

    Ok(reports)
}
