//! Fields given by samples on a uniform tensor grid, with an explicit
//! extension outside the bounding box.

use crate::decomposition::GroupSpan;
use crate::error::{Error, Result};

use super::{Field, ScalarField};

/// What the field looks like outside the grid's bounding box.
#[derive(Clone, Debug)]
pub enum Exterior {
    Constant(f64),
    Field(Box<ScalarField>),
}

/// Uniform tensor grid with multilinear interpolation inside the node hull
/// and the `exterior` extension outside it.
#[derive(Clone, Debug)]
pub struct GridField {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub exterior: Exterior,
    strides: Vec<usize>,
    sup_values: f64,
}

impl GridField {
    pub fn new(
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<f64>,
        exterior: Exterior,
    ) -> Result<Self> {
        let dim = origin.len();
        if spacing.len() != dim || shape.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: spacing.len().max(shape.len()),
            });
        }
        if shape.iter().any(|&k| k < 2) || spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidParameter(
                "grid needs >= 2 nodes and positive spacing per axis".into(),
            ));
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: values.len(),
            });
        }
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        let sup_values = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            origin,
            spacing,
            shape,
            values,
            exterior,
            strides,
            sup_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn node_coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(self.origin.iter().zip(&self.spacing))
            .map(|(&i, (&o, &h))| o + i as f64 * h)
            .collect()
    }

    fn inside_hull(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(k, &xk)| {
            let hi = self.origin[k] + (self.shape[k] - 1) as f64 * self.spacing[k];
            xk >= self.origin[k] && xk <= hi
        })
    }

    fn eval_exterior(&self, x: &[f64]) -> f64 {
        match &self.exterior {
            Exterior::Constant(c) => *c,
            Exterior::Field(f) => f.eval(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.inside_hull(x) {
            return self.eval_exterior(x);
        }
        let dim = self.dim();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0f64; dim];
        for k in 0..dim {
            let t = (x[k] - self.origin[k]) / self.spacing[k];
            let mut i = t.floor() as isize;
            if i as usize >= self.shape[k] - 1 {
                i = self.shape[k] as isize - 2;
            }
            if i < 0 {
                i = 0;
            }
            base[k] = i as usize;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
        // multilinear: sum over the 2^dim cell corners
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut off = 0usize;
            for k in 0..dim {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    off += self.strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[self.node_index(&base) + off];
            }
        }
        acc
    }

    /// Multilinear weights of `x` onto grid nodes (flat index, weight).
    /// Only meaningful inside the hull.
    pub fn interpolation_weights(&self, x: &[f64]) -> Vec<(usize, f64)> {
        debug_assert!(self.inside_hull(x));
        let dim = self.dim();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0f64; dim];
        for k in 0..dim {
            let t = (x[k] - self.origin[k]) / self.spacing[k];
            let mut i = t.floor() as isize;
            if i as usize >= self.shape[k] - 1 {
                i = self.shape[k] as isize - 2;
            }
            if i < 0 {
                i = 0;
            }
            base[k] = i as usize;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
        let base_flat = self.node_index(&base);
        let mut out = Vec::with_capacity(1 << dim);
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut off = 0usize;
            for k in 0..dim {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    off += self.strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                out.push((base_flat + off, w));
            }
        }
        out
    }

    pub fn is_inside_hull(&self, x: &[f64]) -> bool {
        self.inside_hull(x)
    }

    pub fn sup_bound(&self) -> Option<f64> {
        let ext = match &self.exterior {
            Exterior::Constant(c) => Some(c.abs()),
            Exterior::Field(f) => f.sup_bound(),
        };
        ext.map(|e| e.max(self.sup_values))
    }

    /// Largest `|X_span|` attainable inside the bounding box; beyond this the
    /// point is certainly outside the hull.
    fn hull_group_radius(&self, span: &GroupSpan) -> f64 {
        span.range()
            .map(|k| {
                let lo = self.origin[k].abs();
                let hi = (self.origin[k] + (self.shape[k] - 1) as f64 * self.spacing[k]).abs();
                lo.max(hi).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        let hull = self.hull_group_radius(span);
        match &self.exterior {
            Exterior::Constant(_) => Some(hull),
            Exterior::Field(f) => f.group_constancy_radius(span).map(|r| r.max(hull)),
        }
    }

    pub fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        match &self.exterior {
            Exterior::Constant(_) => vec![],
            Exterior::Field(f) => f.group_kink_radii(span),
        }
    }

    pub fn resolution_floor(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl Field for GridField {
    fn dim(&self) -> usize {
        GridField::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        GridField::eval(self, x)
    }

    fn sup_bound(&self) -> Option<f64> {
        GridField::sup_bound(self)
    }

    fn group_constancy_radius(&self, span: &GroupSpan) -> Option<f64> {
        GridField::group_constancy_radius(self, span)
    }

    fn group_kink_radii(&self, span: &GroupSpan) -> Vec<f64> {
        GridField::group_kink_radii(self, span)
    }

    fn resolution_floor(&self) -> Option<f64> {
        Some(GridField::resolution_floor(self))
    }
}
