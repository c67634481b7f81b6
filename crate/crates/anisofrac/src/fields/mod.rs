//! Scalar fields on `R^n`: closed-form expression trees and grid samples.
//!
//! Everything the operator evaluation needs from a field goes through the
//! [`Field`] trait: pointwise values, a sup-norm bound, and two pieces of
//! per-group structure used by the singular quadrature — the radius beyond
//! which sections are constant (enabling the exact far tail) and the radii
//! of spheres where smoothness may drop (panel split points).

pub mod expr;
pub mod grid;
pub mod presets;

use crate::decomposition::GroupSpan;
use crate::error::{Error, Result};

pub use expr::{Expr, ProfileKind};
pub use grid::{Exterior, GridField};

/// Pointwise-evaluable scalar function with the metadata the singular
/// integral discretization consumes.
pub trait Field: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// A finite upper bound for `|u|` on all of `R^n`, when one is known.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    /// `Some(rho)`: with every other coordinate frozen, the section
    /// `X_span -> u` is constant on `{|X_span| >= rho}`. The constant may
    /// depend on the frozen coordinates; it is recovered by evaluation.
    fn group_constancy_radius(&self, _span: &GroupSpan) -> Option<f64> {
        None
    }

    /// Radii of spheres `|X_span| = rho` across which the field may lose
    /// smoothness; quadrature panels are split at the induced radii.
    fn group_kink_radii(&self, _span: &GroupSpan) -> Vec<f64> {
        vec![]
    }

    /// Length scale below which second differences of the field stop being
    /// informative (grid spacing for sampled fields).
    fn resolution_floor(&self) -> Option<f64> {
        None
    }

    /// Exact first partial along `axis`, when the field carries one.
    fn partial(&self, _x: &[f64], _axis: usize) -> Option<f64> {
        None
    }

    /// Exact second partial along `axis`, when the field carries one.
    fn second_partial(&self, _x: &[f64], _axis: usize) -> Option<f64> {
        None
    }
}

/// Per-group structure of a closed form, aligned with the decomposition the
/// field was built for.
#[derive(Clone, Debug)]
pub struct GroupMeta {
    pub span: GroupSpan,
    pub constancy_radius: Option<f64>,
    pub kink_radii: Vec<f64>,
}

/// A closed-form field: expression tree plus the symbolic first and second
/// partials along every axis.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    expr: Expr,
    dim: usize,
    sup: Option<f64>,
    groups: Vec<GroupMeta>,
    d1: Vec<Expr>,
    d2: Vec<Expr>,
}

impl ClosedForm {
    pub fn new(expr: Expr, dim: usize, sup: Option<f64>, groups: Vec<GroupMeta>) -> Self {
        let d1: Vec<Expr> = (0..dim).map(|k| expr.diff(k)).collect();
        let d2: Vec<Expr> = (0..dim).map(|k| d1[k].diff(k)).collect();
        Self {
            expr,
            dim,
            sup,
            groups,
            d1,
            d2,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn groups(&self) -> &[GroupMeta] {
        &self.groups
    }

    fn find_group(&self, span: &GroupSpan) -> Option<&GroupMeta> {
        self.groups.iter().find(|g| g.span == *span)
    }

    /// The translated field `x -> u(x + delta)` with metadata carried over
    /// (kink and constancy spheres are unchanged for groups whose block of
    /// `delta` vanishes; others widen by the shift length).
    pub fn shifted(&self, delta: &[f64]) -> Result<ClosedForm> {
        if delta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: delta.len(),
            });
        }
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let block: f64 = g
                    .span
                    .range()
                    .map(|k| delta[k] * delta[k])
                    .sum::<f64>()
                    .sqrt();
                GroupMeta {
                    span: g.span,
                    constancy_radius: g.constancy_radius.map(|r| r + block),
                    kink_radii: if block == 0.0 {
                        g.kink_radii.clone()
                    } else {
                        // conservative: a shifted kink sphere is no longer a
                        // sphere around the origin; widen to cover it
                        g.kink_radii.iter().map(|r| r + block).collect()
                    },
                }
            })
            .collect();
        Ok(ClosedForm {
            expr: self.expr.shift(delta),
            dim: self.dim,
            sup: self.sup,
            groups,
            d1: self.d1.iter().map(|e| e.shift(delta)).collect(),
            d2: self.d2.iter().map(|e| e.shift(delta)).collect(),
        })
    }
}

impl Field for ClosedForm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }

    fn sup_bound(&self) -> Option<f64> {
        self.sup
    }

    fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        self.find_group(span).and_then(|g| g.constancy_radius)
    }

    fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        self.find_group(span)
            .map(|g| g.kink_radii.clone())
            .unwrap_or_default()
    }

    fn partial(&self, x: &[f64], axis: usize) -> Option<f64> {
        Some(self.d1[axis].eval(x))
    }

    fn second_partial(&self, x: &[f64], axis: usize) -> Option<f64> {
        Some(self.d2[axis].eval(x))
    }
}

/// A scalar field: either a closed form or grid samples with an explicit
/// exterior extension.
#[derive(Clone, Debug)]
pub enum ScalarField {
    ClosedForm(ClosedForm),
    Grid(GridField),
}

impl ScalarField {
    pub fn as_closed_form(&self) -> Option<&ClosedForm> {
        match self {
            ScalarField::ClosedForm(f) => Some(f),
            ScalarField::Grid(_) => None,
        }
    }
}

impl Field for ScalarField {
    fn dim(&self) -> usize {
        match self {
            ScalarField::ClosedForm(f) => f.dim(),
            ScalarField::Grid(g) => g.dim(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::ClosedForm(f) => f.eval(x),
            ScalarField::Grid(g) => g.eval(x),
        }
    }

    fn sup_bound(&self) -> Option<f64> {
        match self {
            ScalarField::ClosedForm(f) => f.sup_bound(),
            ScalarField::Grid(g) => g.sup_bound(),
        }
    }

    fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        match self {
            ScalarField::ClosedForm(f) => f.group_constancy_radius(span),
            ScalarField::Grid(g) => g.group_constancy_radius(span),
        }
    }

    fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        match self {
            ScalarField::ClosedForm(f) => f.group_kink_radii(span),
            ScalarField::Grid(g) => g.group_kink_radii(span),
        }
    }

    fn resolution_floor(&self) -> Option<f64> {
        match self {
            ScalarField::ClosedForm(_) => None,
            ScalarField::Grid(g) => Some(g.resolution_floor()),
        }
    }

    fn partial(&self, x: &[f64], axis: usize) -> Option<f64> {
        match self {
            ScalarField::ClosedForm(f) => f.partial(x, axis),
            ScalarField::Grid(_) => None,
        }
    }

    fn second_partial(&self, x: &[f64], axis: usize) -> Option<f64> {
        match self {
            ScalarField::ClosedForm(f) => f.second_partial(x, axis),
            ScalarField::Grid(_) => None,
        }
    }
}

/// First partial along `axis`: exact when the field carries one, otherwise
/// a central difference with step `h`.
pub fn partial_or_fd(field: &dyn Field, x: &[f64], axis: usize, h: f64) -> f64 {
    if let Some(v) = field.partial(x, axis) {
        return v;
    }
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[axis] += h;
    xm[axis] -= h;
    (field.eval(&xp) - field.eval(&xm)) / (2.0 * h)
}

/// Dense scan of `max |g|` over an axis-aligned box, with a few rounds of
/// local grid refinement around the running maximum. A lower bound of the
/// true sup, tight for smooth fields at the default resolution.
pub fn sup_abs_on_box(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    refine_rounds: usize,
) -> f64 {
    let dim = lo.len();
    assert_eq!(hi.len(), dim);
    let mut best = f64::NEG_INFINITY;
    let mut best_x = lo.to_vec();
    let mut scan_lo = lo.to_vec();
    let mut scan_hi = hi.to_vec();
    let mut n = per_axis.max(2);
    for _round in 0..=refine_rounds {
        let total: usize = (0..dim).map(|_| n).product();
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0f64; dim];
        for flat in 0..total {
            let mut rem = flat;
            for k in 0..dim {
                idx[k] = rem % n;
                rem /= n;
                x[k] = scan_lo[k] + (scan_hi[k] - scan_lo[k]) * idx[k] as f64 / (n - 1) as f64;
            }
            let v = g(&x).abs();
            if v > best {
                best = v;
                best_x.copy_from_slice(&x);
            }
        }
        // shrink the box around the best point
        for k in 0..dim {
            let half = (scan_hi[k] - scan_lo[k]) / (n - 1) as f64 * 2.0;
            scan_lo[k] = (best_x[k] - half).max(lo[k]);
            scan_hi[k] = (best_x[k] + half).min(hi[k]);
        }
        n = 33;
    }
    best
}

/// Measured norms of a field: a sup bound for `|u|` over `R^n` and a
/// scanned bound for `|du/dx_n|`.
#[derive(Clone, Copy, Debug)]
pub struct FieldNorms {
    pub sup_u: f64,
    pub sup_dnu: f64,
}

/// Scan box per axis from the field's per-group constancy radii; axes
/// without constancy fall back to `fallback` half-width.
pub fn scan_box(
    field: &dyn Field,
    decomp: &crate::decomposition::CoordinateDecomposition,
    fallback: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = decomp.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..decomp.num_groups() {
        let span = decomp.span(i);
        let r = field
            .group_constancy_radius(&span)
            .filter(|r| *r > 0.0)
            .unwrap_or(fallback);
        for k in span.range() {
            lo[k] = -r;
            hi[k] = r;
        }
    }
    (lo, hi)
}

/// `sup |u|` (exact bound when the field carries one, scanned otherwise)
/// and `sup |du/dx_n|` by dense scan with local refinement. The scan is a
/// lower bound of the true sup; for the smooth manufactured fields used in
/// the checks it is accurate to roughly the refinement resolution.
pub fn measure_norms(
    field: &dyn Field,
    decomp: &crate::decomposition::CoordinateDecomposition,
    per_axis: usize,
) -> FieldNorms {
    let (lo, hi) = scan_box(field, decomp, 2.0);
    let sup_u = match field.sup_bound() {
        Some(b) => b,
        None => sup_abs_on_box(&|x: &[f64]| field.eval(x), &lo, &hi, per_axis, 3),
    };
    let axis = decomp.local_axis();
    let h = 1e-5 * (hi[axis] - lo[axis]);
    let g = move |x: &[f64]| partial_or_fd(field, x, axis, h);
    let sup_dnu = sup_abs_on_box(&g, &lo, &hi, per_axis, 3);
    FieldNorms { sup_u, sup_dnu }
}
