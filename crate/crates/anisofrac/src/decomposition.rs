//! Grouped coordinate system, increment embeddings and box domains.
//!
//! The coordinates of `R^n` are split into `m` groups `X_1, ..., X_m` of
//! dimensions `N_1, ..., N_m`, the last group being the single "local"
//! variable `x_n`. Each nonlocal group carries an order `s_i` in `(0,1]`
//! and a nonnegative weight `a_i`; the local group always acts through a
//! classical second derivative with weight one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous index range of one coordinate group inside `R^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSpan {
    pub offset: usize,
    pub len: usize,
}

impl GroupSpan {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// The grouped-variable structure defining the operator: group dimensions,
/// fractional orders and weights.
///
/// Invariants enforced at construction: the last group has dimension 1 and
/// order 1, every other order lies in `(0,1]`, and weights are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateDecomposition {
    group_dims: Vec<usize>,
    orders: Vec<f64>,
    weights: Vec<f64>,
    prefix: Vec<usize>, // prefix[i] = N_1 + ... + N_i, prefix[0] = 0
}

impl CoordinateDecomposition {
    /// `group_dims` lists `N_1..N_m` (the last must be 1), `orders` the
    /// `s_1..s_{m-1}` of the nonlocal groups, `weights` their `a_i >= 0`.
    pub fn new(group_dims: Vec<usize>, orders: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let m = group_dims.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "at least one group required".into(),
            ));
        }
        if *group_dims.last().unwrap() != 1 {
            return Err(Error::InvalidParameter(format!(
                "last group must have dimension 1, got {}",
                group_dims.last().unwrap()
            )));
        }
        if group_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(
                "group dimensions must be positive".into(),
            ));
        }
        if orders.len() != m - 1 || weights.len() != m - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} orders and weights for {} groups",
                m - 1,
                m
            )));
        }
        for &s in &orders {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "order s = {s} not in (0,1]"
                )));
            }
        }
        for &a in &weights {
            if !(a >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weight a = {a} must be >= 0"
                )));
            }
        }
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(0usize);
        for &d in &group_dims {
            prefix.push(prefix.last().unwrap() + d);
        }
        let mut orders = orders;
        orders.push(1.0); // s_m = 1 for the local group
        Ok(Self {
            group_dims,
            orders,
            weights,
            prefix,
        })
    }

    /// Number of groups `m`.
    pub fn num_groups(&self) -> usize {
        self.group_dims.len()
    }

    /// Ambient dimension `n = N_1 + ... + N_m`.
    pub fn dim(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    /// Dimension of group `i` (0-based).
    pub fn group_dim(&self, i: usize) -> usize {
        self.group_dims[i]
    }

    /// Order `s_i`; the local group reports `1.0`.
    pub fn order(&self, i: usize) -> f64 {
        self.orders[i]
    }

    /// Weight `a_i` of a nonlocal group; the local group's weight is 1.
    pub fn weight(&self, i: usize) -> f64 {
        if i + 1 == self.num_groups() {
            1.0
        } else {
            self.weights[i]
        }
    }

    /// Index range of group `i` inside `R^n`.
    pub fn span(&self, i: usize) -> GroupSpan {
        GroupSpan {
            offset: self.prefix[i],
            len: self.group_dims[i],
        }
    }

    /// Index of the local coordinate `x_n`.
    pub fn local_axis(&self) -> usize {
        self.dim() - 1
    }

    /// Index of the local group (always the last).
    pub fn local_group(&self) -> usize {
        self.num_groups() - 1
    }

    fn check_group(&self, i: usize) -> Result<()> {
        if i >= self.num_groups() {
            return Err(Error::GroupIndex {
                index: i,
                m: self.num_groups(),
            });
        }
        Ok(())
    }

    /// The n-vector whose group-`i` block equals `y` and which vanishes
    /// elsewhere (the increment induced by `y` in the i-th coordinates).
    pub fn embed_increment(&self, i: usize, y: &[f64]) -> Result<Vec<f64>> {
        self.check_group(i)?;
        if y.len() != self.group_dims[i] {
            return Err(Error::DimensionMismatch {
                expected: self.group_dims[i],
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        out[self.span(i).range()].copy_from_slice(y);
        Ok(out)
    }

    /// The group-`i` block of `x`; inverse of [`embed_increment`](Self::embed_increment).
    pub fn project_group(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_group(i)?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x[self.span(i).range()].to_vec())
    }

    /// Euclidean norm of the group-`i` block of `x`.
    pub fn group_norm(&self, i: usize, x: &[f64]) -> f64 {
        x[self.span(i).range()]
            .iter()
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt()
    }
}

/// The box `Q_{d,kappa}`: a product of balls of radii `d_i` in the nonlocal
/// groups times the interval `(-kappa d_m, kappa d_m)` in the local variable.
/// With `dilation = 1` this is `Q_d`. Membership is strict (open sets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub radii: Vec<f64>,
    pub dilation: f64,
}

impl BoxDomain {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        Self::with_dilation(radii, 1.0)
    }

    pub fn with_dilation(radii: Vec<f64>, dilation: f64) -> Result<Self> {
        if radii.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::InvalidParameter("all radii must be positive".into()));
        }
        if !(dilation > 0.0) {
            return Err(Error::InvalidParameter("dilation must be positive".into()));
        }
        Ok(Self { radii, dilation })
    }

    /// Radius of the local interval (last entry of `d`).
    pub fn local_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Strict membership `x in Q_{d,kappa}`.
    pub fn contains(&self, decomp: &CoordinateDecomposition, x: &[f64]) -> bool {
        debug_assert_eq!(self.radii.len(), decomp.num_groups());
        for i in 0..decomp.num_groups() {
            let r = decomp.group_norm(i, x);
            let bound = if i + 1 == decomp.num_groups() {
                self.dilation * self.radii[i]
            } else {
                self.radii[i]
            };
            if r >= bound {
                return false;
            }
        }
        true
    }
}

/// A point of the extended space `R^{n+1}`: the `X' = (X_1,...,X_{m-1})`
/// block together with the two translation variables `y` and `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoint {
    pub x_prime: Vec<f64>,
    pub y: f64,
    pub z: f64,
}

impl ExtendedPoint {
    pub fn new(x_prime: Vec<f64>, y: f64, z: f64) -> Self {
        Self { x_prime, y, z }
    }

    /// Flat coordinates `(X', y, z)` as a vector of length `n + 1`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.x_prime.clone();
        v.push(self.y);
        v.push(self.z);
        v
    }

    /// Strict membership in `Q'`: `X'_i` inside the ball of radius `d_i`
    /// for every nonlocal group and `y, z` in `(0, d_m/4)`.
    pub fn in_extended_domain(&self, domain: &BoxDomain, decomp: &CoordinateDecomposition) -> bool {
        debug_assert_eq!(self.x_prime.len(), decomp.dim() - 1);
        let quarter = domain.local_radius() / 4.0;
        if !(self.y > 0.0 && self.y < quarter && self.z > 0.0 && self.z < quarter) {
            return false;
        }
        for i in 0..decomp.num_groups() - 1 {
            let span = decomp.span(i);
            let r = self.x_prime[span.range()]
                .iter()
                .map(|t| t * t)
                .sum::<f64>()
                .sqrt();
            if r >= domain.radii[i] {
                return false;
            }
        }
        true
    }
}

/// Free-function form of domain membership.
pub fn in_domain(domain: &BoxDomain, decomp: &CoordinateDecomposition, x: &[f64]) -> bool {
    domain.contains(decomp, x)
}

/// Free-function form of extended-domain membership.
pub fn in_extended_domain(
    domain: &BoxDomain,
    decomp: &CoordinateDecomposition,
    p: &ExtendedPoint,
) -> bool {
    p.in_extended_domain(domain, decomp)
}
