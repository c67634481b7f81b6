//! Dense collocation for the exterior-data Dirichlet problem
//! `L u = f` in `Q_d`, `u` prescribed on the complement.
//!
//! Unknowns are the values at uniform grid nodes strictly inside `Q_d`;
//! the discrete operator applies the same sectional quadrature as the
//! pointwise evaluation, taken against the multilinear interpolant of the
//! node values (plus the known exterior data). The symmetric difference
//! uses values only; the cell below the grid scale is represented by a
//! nodal second-difference model, which keeps every off-diagonal entry
//! nonpositive and the discrete comparison principle intact.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::constants::c_ns;
use crate::decomposition::{BoxDomain, CoordinateDecomposition};
use crate::error::{Error, Result};
use crate::fields::{Exterior, Field, GridField, ScalarField};
use crate::quadrature::{section_rule, QuadratureSpec};

/// Discretization of one exterior-data Dirichlet problem.
pub struct CollocationProblem<'a> {
    pub decomp: &'a CoordinateDecomposition,
    pub domain: &'a BoxDomain,
    /// Right-hand side `f`, evaluated at interior nodes.
    pub rhs: &'a dyn Field,
    /// Exterior data, evaluated everywhere outside `Q_d`.
    pub exterior: &'a ScalarField,
    /// Grid spacing per axis.
    pub spacing: Vec<f64>,
    pub quad: QuadratureSpec,
    /// Dense-assembly cap on the number of interior nodes.
    pub node_cap: usize,
}

pub const DEFAULT_NODE_CAP: usize = 5000;

struct Lattice {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    /// flat node index -> interior unknown index
    interior_of_node: Vec<Option<usize>>,
    /// interior unknown index -> flat node index
    nodes_of_interior: Vec<usize>,
    /// exterior data sampled at every non-interior node
    known_values: Vec<f64>,
}

impl Lattice {
    fn build(p: &CollocationProblem) -> Result<Self> {
        let decomp = p.decomp;
        let n = decomp.dim();
        if p.spacing.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.spacing.len(),
            });
        }
        if p.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidParameter(
                "grid spacing must be positive".into(),
            ));
        }
        let mut origin = vec![0.0; n];
        let mut shape = vec![0usize; n];
        for i in 0..decomp.num_groups() {
            let extent = if i + 1 == decomp.num_groups() {
                p.domain.dilation * p.domain.radii[i]
            } else {
                p.domain.radii[i]
            };
            for k in decomp.span(i).range() {
                let n_half = (extent / p.spacing[k] - 1e-12).ceil() as usize + 1; // one ghost ring
                origin[k] = -(n_half as f64) * p.spacing[k];
                shape[k] = 2 * n_half + 1;
            }
        }
        let mut strides = vec![1usize; n];
        for k in (0..n - 1).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        let total: usize = shape.iter().product();
        let mut interior_of_node = vec![None; total];
        let mut nodes_of_interior = Vec::new();
        let mut known_values = vec![0.0; total];
        let mut coords = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            for k in 0..n {
                let idx = rem / strides[k];
                rem %= strides[k];
                coords[k] = origin[k] + idx as f64 * p.spacing[k];
            }
            if p.domain.contains(decomp, &coords) {
                interior_of_node[flat] = Some(nodes_of_interior.len());
                nodes_of_interior.push(flat);
            } else {
                known_values[flat] = p.exterior.eval(&coords);
            }
        }
        if nodes_of_interior.len() > p.node_cap {
            return Err(Error::NodeCapExceeded {
                got: nodes_of_interior.len(),
                cap: p.node_cap,
            });
        }
        if nodes_of_interior.is_empty() {
            return Err(Error::InvalidParameter(
                "no interior nodes; refine the grid".into(),
            ));
        }
        Ok(Self {
            origin,
            spacing: p.spacing.clone(),
            shape,
            strides,
            interior_of_node,
            nodes_of_interior,
            known_values,
        })
    }

    fn node_coords(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        let mut c = vec![0.0; self.origin.len()];
        for k in 0..c.len() {
            let idx = rem / self.strides[k];
            rem %= self.strides[k];
            c[k] = self.origin[k] + idx as f64 * self.spacing[k];
        }
        c
    }

    fn inside_hull(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(k, &xk)| {
            let hi = self.origin[k] + (self.shape[k] - 1) as f64 * self.spacing[k];
            xk >= self.origin[k] && xk <= hi
        })
    }

    /// Multilinear weights of `x` onto flat node indices.
    fn weights(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let dim = self.origin.len();
        let mut base_flat = 0usize;
        let mut frac = [0.0f64; 8];
        debug_assert!(dim <= 8);
        for k in 0..dim {
            let t = (x[k] - self.origin[k]) / self.spacing[k];
            let mut i = t.floor() as isize;
            if i as usize >= self.shape[k] - 1 {
                i = self.shape[k] as isize - 2;
            }
            if i < 0 {
                i = 0;
            }
            base_flat += (i as usize) * self.strides[k];
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
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
    }

    /// Largest group-block norm attainable inside the hull.
    fn hull_group_radius(&self, span: std::ops::Range<usize>) -> f64 {
        span.map(|k| {
            let lo = self.origin[k].abs();
            let hi = (self.origin[k] + (self.shape[k] - 1) as f64 * self.spacing[k]).abs();
            lo.max(hi).powi(2)
        })
        .sum::<f64>()
        .sqrt()
    }
}

/// Dense linear system `A v = b` over the interior node values.
pub struct AssembledSystem {
    lattice: Lattice,
    /// row-major `n x n`
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

impl AssembledSystem {
    pub fn num_unknowns(&self) -> usize {
        self.rhs.len()
    }

    pub fn interior_coords(&self) -> Vec<Vec<f64>> {
        self.lattice
            .nodes_of_interior
            .iter()
            .map(|&f| self.lattice.node_coords(f))
            .collect()
    }

    pub fn matrix_entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.rhs.len() + col]
    }

    pub fn rhs_entry(&self, row: usize) -> f64 {
        self.rhs[row]
    }
}

/// Assemble the dense collocation system: row `i` encodes `L` applied to
/// the interpolant at interior node `i`; exterior data folds into the
/// right-hand side.
pub fn assemble(p: &CollocationProblem) -> Result<AssembledSystem> {
    let lattice = Lattice::build(p)?;
    let decomp = p.decomp;
    let n_int = lattice.nodes_of_interior.len();

    struct GroupData {
        span: std::ops::Range<usize>,
        weight: f64,
        s: f64,
        c: f64,
        constancy: f64,
        kinks: Vec<f64>,
        h_probe: f64,
        floor: f64,
    }
    let mut frac_groups = Vec::new();
    let mut stencil_groups = Vec::new(); // (axes range, weight)
    for i in 0..decomp.num_groups() - 1 {
        let a = decomp.weight(i);
        if a == 0.0 {
            continue;
        }
        let s = decomp.order(i);
        let span = decomp.span(i);
        if s >= 1.0 {
            stencil_groups.push((span.range(), a));
            continue;
        }
        let ext_const = p
            .exterior
            .group_constancy_radius(&span)
            .ok_or(Error::UncontrolledTail)?;
        let hull = lattice.hull_group_radius(span.range());
        let h_probe = span
            .range()
            .map(|k| lattice.spacing[k])
            .fold(0.0f64, f64::max);
        frac_groups.push(GroupData {
            span: span.range(),
            weight: a,
            s,
            c: c_ns(span.len, s)?,
            constancy: ext_const.max(hull),
            kinks: p.exterior.group_kink_radii(&span),
            h_probe,
            floor: 0.5 * h_probe,
        });
    }
    // the local group always contributes its stencil with weight one
    stencil_groups.push((decomp.span(decomp.local_group()).range(), 1.0));

    let mut matrix = vec![0.0f64; n_int * n_int];
    let mut rhs = vec![0.0f64; n_int];

    matrix
        .par_chunks_mut(n_int)
        .zip(rhs.par_iter_mut())
        .enumerate()
        .try_for_each(|(i, (row, b))| -> Result<()> {
            let x = lattice.node_coords(lattice.nodes_of_interior[i]);
            *b = p.rhs.eval(&x);
            let mut wbuf: Vec<(usize, f64)> = Vec::with_capacity(1 << x.len());

            // distribute `coeff * v(point)` onto the row / rhs
            let mut distribute = |point: &[f64], coeff: f64, row: &mut [f64], b: &mut f64| {
                if lattice.inside_hull(point) {
                    lattice.weights(point, &mut wbuf);
                    for &(flat, w) in wbuf.iter() {
                        match lattice.interior_of_node[flat] {
                            Some(j) => row[j] += coeff * w,
                            None => *b -= coeff * w * lattice.known_values[flat],
                        }
                    }
                } else {
                    *b -= coeff * p.exterior.eval(point);
                }
            };

            // classical stencils
            for (axes, a) in &stencil_groups {
                for k in axes.clone() {
                    let h = lattice.spacing[k];
                    let c = a / (h * h);
                    row[i] += 2.0 * c;
                    let mut xp = x.clone();
                    xp[k] = x[k] + h;
                    distribute(&xp, -c, row, b);
                    xp[k] = x[k] - h;
                    distribute(&xp, -c, row, b);
                }
            }

            // fractional groups via the sectional rule on the interpolant
            for g in &frac_groups {
                let x_group: Vec<f64> = g.span.clone().map(|k| x[k]).collect();
                let spec = QuadratureSpec {
                    inner_floor: p.quad.inner_floor.max(g.floor),
                    ..p.quad
                };
                let rule = section_rule(
                    g.span.len(),
                    g.s,
                    &x_group,
                    &g.kinks,
                    Some(g.constancy),
                    &spec,
                )?;
                let ac = g.weight * g.c;
                let mut xp = x.clone();
                for node in &rule.nodes {
                    let dir = &rule.directions[node.dir as usize];
                    let w = ac * node.weight;
                    row[i] += 2.0 * w;
                    for (j, k) in g.span.clone().enumerate() {
                        xp[k] = x[k] + node.radius * dir[j];
                    }
                    distribute(&xp, -w, row, b);
                    for (j, k) in g.span.clone().enumerate() {
                        xp[k] = x[k] - node.radius * dir[j];
                    }
                    distribute(&xp, -w, row, b);
                    for k in g.span.clone() {
                        xp[k] = x[k];
                    }
                }
                // exact tail: sections equal the exterior constant out there
                let far = rule.tail_radius * (1.0 + 1e-9) + g.h_probe;
                let mut xf = x.clone();
                xf[g.span.start] += far;
                let c_sec = p.exterior.eval(&xf);
                row[i] += ac * rule.tail_coefficient * 2.0;
                *b += ac * rule.tail_coefficient * 2.0 * c_sec;
                // sub-floor mass: second-difference model at the grid scale
                if rule.stub_coefficient > 0.0 {
                    let per_dir = rule.stub_coefficient / rule.directions.len() as f64;
                    let hp = g.h_probe;
                    for dir in &rule.directions {
                        let w = ac * per_dir / (hp * hp);
                        row[i] += 2.0 * w;
                        for (j, k) in g.span.clone().enumerate() {
                            xp[k] = x[k] + hp * dir[j];
                        }
                        distribute(&xp, -w, row, b);
                        for (j, k) in g.span.clone().enumerate() {
                            xp[k] = x[k] - hp * dir[j];
                        }
                        distribute(&xp, -w, row, b);
                        for k in g.span.clone() {
                            xp[k] = x[k];
                        }
                    }
                }
            }
            Ok(())
        })?;

    Ok(AssembledSystem {
        lattice,
        matrix,
        rhs,
    })
}

/// Solved problem: node values, interpolating field, solve diagnostics.
pub struct DiscreteSolution {
    pub field: GridField,
    pub interior_values: Vec<f64>,
    pub interior_coords: Vec<Vec<f64>>,
    /// relative max-norm residual of the linear solve
    pub residual: f64,
    /// pivot-ratio conditioning estimate (max |u_ii| / min |u_ii|)
    pub condition_estimate: f64,
    /// set when the conditioning estimate exceeds 1e12
    pub condition_warning: bool,
}

/// Assemble and solve by dense LU with partial pivoting.
pub fn solve(p: &CollocationProblem) -> Result<DiscreteSolution> {
    let sys = assemble(p)?;
    solve_assembled(p, sys)
}

pub fn solve_assembled(p: &CollocationProblem, sys: AssembledSystem) -> Result<DiscreteSolution> {
    let n = sys.rhs.len();
    let a = DMatrix::from_row_slice(n, n, &sys.matrix);
    let b = DVector::from_column_slice(&sys.rhs);
    let lu = a.clone().lu();
    let v = lu.solve(&b).ok_or(Error::SingularSystem)?;

    let mut u_max = f64::NEG_INFINITY;
    let mut u_min = f64::INFINITY;
    for k in 0..n {
        let u = lu.u()[(k, k)].abs();
        u_max = u_max.max(u);
        u_min = u_min.min(u);
    }
    let condition_estimate = if u_min > 0.0 {
        u_max / u_min
    } else {
        f64::INFINITY
    };

    let resid = (&a * &v - &b).amax();
    let scale = b.amax().max(1e-300);

    let mut values = sys.lattice.known_values.clone();
    for (j, &flat) in sys.lattice.nodes_of_interior.iter().enumerate() {
        values[flat] = v[j];
    }
    let field = GridField::new(
        sys.lattice.origin.clone(),
        sys.lattice.spacing.clone(),
        sys.lattice.shape.clone(),
        values,
        Exterior::Field(Box::new(p.exterior.clone())),
    )?;
    Ok(DiscreteSolution {
        field,
        interior_values: v.iter().cloned().collect(),
        interior_coords: sys.interior_coords(),
        residual: resid / scale,
        condition_estimate,
        condition_warning: condition_estimate > 1e12,
    })
}

/// Outcome of the discrete sign check.
#[derive(Clone, Debug)]
pub struct MaxPrincipleReport {
    pub min_value: f64,
    pub min_location: Vec<f64>,
    pub pass: bool,
    pub tol: f64,
}

/// With sign-definite forcing `f >= 0` and nonnegative exterior data, the
/// discrete solution must be nonnegative: `min_j v_j >= -tol`.
pub fn check_max_principle(
    p: &CollocationProblem,
    solution: &DiscreteSolution,
    tol: f64,
) -> MaxPrincipleReport {
    let mut min_value = f64::INFINITY;
    let mut min_location = vec![];
    for (v, x) in solution
        .interior_values
        .iter()
        .zip(&solution.interior_coords)
    {
        if *v < min_value {
            min_value = *v;
            min_location = x.clone();
        }
    }
    debug_assert!({
        // precondition: sign-definite forcing at the nodes
        solution
            .interior_coords
            .iter()
            .all(|x| p.rhs.eval(x) >= -1e-12)
    });
    MaxPrincipleReport {
        min_value,
        min_location,
        pass: min_value >= -tol,
        tol,
    }
}
