//! Named closed-form field presets and their JSON schema.
//!
//! The presets are the manufactured fields used throughout the checks:
//! all of them are globally defined, carry exact sup bounds or compactly
//! supported structure, and expose the per-group spheres the quadrature
//! needs.

use serde::{Deserialize, Serialize};

use crate::decomposition::CoordinateDecomposition;
use crate::error::{Error, Result};

use super::expr::{Expr, ProfileKind};
use super::grid::{Exterior, GridField};
use super::{ClosedForm, GroupMeta, ScalarField};

/// JSON description of a field (`field.json`). Group indices are 1-based
/// in this external schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `(constant + slope * x_n)` tapered to zero between the two radii.
    Affine {
        #[serde(default)]
        constant: f64,
        #[serde(default = "one")]
        slope: f64,
        #[serde(default = "default_taper")]
        taper: (f64, f64),
    },
    /// `x_n^2` tapered to zero between the two radii.
    QuadraticTaper {
        #[serde(default = "default_taper")]
        taper: (f64, f64),
    },
    /// Product over groups of smooth compactly supported bumps
    /// `exp(1 - 1/(1 - |X_i|^2/w_i^2))`, scaled by `amplitude`.
    SeparableBump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        widths: Option<Vec<f64>>,
    },
    /// `(1 - |X_g|^2 / radius^2)_+^s` in a single group `g` (1-based).
    FractionalBump { group: usize, s: f64, radius: f64 },
    /// Grid samples plus exterior extension.
    Grid {
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<f64>,
        exterior: Box<ExteriorSpec>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExteriorSpec {
    Constant { constant: f64 },
    Field(FieldSpec),
}

fn one() -> f64 {
    1.0
}

fn default_taper() -> (f64, f64) {
    (1.5, 2.0)
}

impl FieldSpec {
    pub fn build(&self, decomp: &CoordinateDecomposition) -> Result<ScalarField> {
        match self {
            FieldSpec::Affine {
                constant,
                slope,
                taper,
            } => affine(decomp, *constant, *slope, *taper),
            FieldSpec::QuadraticTaper { taper } => quadratic_taper(decomp, *taper),
            FieldSpec::SeparableBump { amplitude, widths } => {
                let w = widths
                    .clone()
                    .unwrap_or_else(|| vec![0.9; decomp.num_groups()]);
                separable_bump(decomp, *amplitude, &w)
            }
            FieldSpec::FractionalBump { group, s, radius } => {
                if *group == 0 || *group > decomp.num_groups() {
                    return Err(Error::GroupIndex {
                        index: *group,
                        m: decomp.num_groups(),
                    });
                }
                fractional_bump(decomp, group - 1, *s, *radius)
            }
            FieldSpec::Grid {
                origin,
                spacing,
                shape,
                values,
                exterior,
            } => {
                let ext = match exterior.as_ref() {
                    ExteriorSpec::Constant { constant } => Exterior::Constant(*constant),
                    ExteriorSpec::Field(spec) => Exterior::Field(Box::new(spec.build(decomp)?)),
                };
                Ok(ScalarField::Grid(GridField::new(
                    origin.clone(),
                    spacing.clone(),
                    shape.clone(),
                    values.clone(),
                    ext,
                )?))
            }
        }
    }
}

fn plateau_factor(decomp: &CoordinateDecomposition, group: usize, r1: f64, r2: f64) -> Expr {
    Expr::Profile {
        kind: ProfileKind::Plateau { r1, r2 },
        order: 0,
        inner: Box::new(Expr::scaled_norm_sq(decomp.span(group).range(), 1.0)),
    }
}

fn all_group_meta(
    decomp: &CoordinateDecomposition,
    constancy: impl Fn(usize) -> Option<f64>,
    kinks: impl Fn(usize) -> Vec<f64>,
) -> Vec<GroupMeta> {
    (0..decomp.num_groups())
        .map(|g| GroupMeta {
            span: decomp.span(g),
            constancy_radius: constancy(g),
            kink_radii: kinks(g),
        })
        .collect()
}

/// Affine in the local variable, tapered to zero between `taper.0` and
/// `taper.1` in every group. Globally bounded with exact derivative
/// `slope` throughout the inner plateau.
pub fn affine(
    decomp: &CoordinateDecomposition,
    constant: f64,
    slope: f64,
    taper: (f64, f64),
) -> Result<ScalarField> {
    check_taper(taper)?;
    let n = decomp.dim();
    let mut factors = vec![Expr::Sum(vec![
        Expr::Const(constant),
        Expr::Scale(slope, Box::new(Expr::Coord(n - 1))),
    ])];
    for g in 0..decomp.num_groups() {
        factors.push(plateau_factor(decomp, g, taper.0, taper.1));
    }
    let sup = constant.abs() + slope.abs() * taper.1;
    let groups = all_group_meta(decomp, |_| Some(taper.1), |_| vec![taper.0, taper.1]);
    Ok(ScalarField::ClosedForm(ClosedForm::new(
        Expr::Prod(factors),
        n,
        Some(sup),
        groups,
    )))
}

/// `x_n^2` tapered to zero between the two radii in every group.
pub fn quadratic_taper(decomp: &CoordinateDecomposition, taper: (f64, f64)) -> Result<ScalarField> {
    check_taper(taper)?;
    let n = decomp.dim();
    let mut factors = vec![Expr::PowI(Box::new(Expr::Coord(n - 1)), 2)];
    for g in 0..decomp.num_groups() {
        factors.push(plateau_factor(decomp, g, taper.0, taper.1));
    }
    let groups = all_group_meta(decomp, |_| Some(taper.1), |_| vec![taper.0, taper.1]);
    Ok(ScalarField::ClosedForm(ClosedForm::new(
        Expr::Prod(factors),
        n,
        Some(taper.1 * taper.1),
        groups,
    )))
}

/// `amplitude * prod_i exp(1 - 1/(1 - |X_i|^2/w_i^2))`: smooth, supported in
/// the product of group balls of radii `w_i`, with sup exactly `|amplitude|`.
pub fn separable_bump(
    decomp: &CoordinateDecomposition,
    amplitude: f64,
    widths: &[f64],
) -> Result<ScalarField> {
    if widths.len() != decomp.num_groups() {
        return Err(Error::DimensionMismatch {
            expected: decomp.num_groups(),
            got: widths.len(),
        });
    }
    if widths.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter(
            "bump widths must be positive".into(),
        ));
    }
    let n = decomp.dim();
    let factors: Vec<Expr> = (0..decomp.num_groups())
        .map(|g| Expr::Profile {
            kind: ProfileKind::SmoothBump,
            order: 0,
            inner: Box::new(Expr::scaled_norm_sq(
                decomp.span(g).range(),
                1.0 / (widths[g] * widths[g]),
            )),
        })
        .collect();
    let groups = all_group_meta(decomp, |g| Some(widths[g]), |g| vec![widths[g]]);
    Ok(ScalarField::ClosedForm(ClosedForm::new(
        Expr::Scale(amplitude, Box::new(Expr::Prod(factors))),
        n,
        Some(amplitude.abs()),
        groups,
    )))
}

/// `(1 - |X_g|^2 / radius^2)_+^s` depending on group `g` (0-based) only.
pub fn fractional_bump(
    decomp: &CoordinateDecomposition,
    group: usize,
    s: f64,
    radius: f64,
) -> Result<ScalarField> {
    if group >= decomp.num_groups() {
        return Err(Error::GroupIndex {
            index: group,
            m: decomp.num_groups(),
        });
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} not in (0,1]")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let n = decomp.dim();
    let expr = Expr::Profile {
        kind: ProfileKind::FracBump { s },
        order: 0,
        inner: Box::new(Expr::scaled_norm_sq(
            decomp.span(group).range(),
            1.0 / (radius * radius),
        )),
    };
    // independent of every other group: their sections are constant outright
    let groups = all_group_meta(
        decomp,
        |g| Some(if g == group { radius } else { 0.0 }),
        |g| if g == group { vec![radius] } else { vec![] },
    );
    Ok(ScalarField::ClosedForm(ClosedForm::new(
        expr,
        n,
        Some(1.0),
        groups,
    )))
}

fn check_taper(taper: (f64, f64)) -> Result<()> {
    if !(taper.0 > 0.0 && taper.1 > taper.0) {
        return Err(Error::InvalidParameter(format!(
            "taper radii must satisfy 0 < {} < {}",
            taper.0, taper.1
        )));
    }
    Ok(())
}
