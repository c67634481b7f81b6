//! Small closed-form expression trees with symbolic differentiation.
//!
//! The node set is deliberately minimal: polynomials, products, scalar
//! profiles applied to a subexpression. Profiles are closed under the
//! derivatives the library needs (up to second order), so differentiating
//! an expression stays inside the node set.

/// Scalar profile `P(t)` applied to an inner subexpression.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    /// `(1 - t)_+^s`
    FracBump { s: f64 },
    /// `exp(1 - 1/(1 - t))` for `t < 1`, zero otherwise
    SmoothBump,
    /// Plateau in `r = sqrt(t)`: one for `r <= r1`, zero for `r >= r2`,
    /// quintic smoothstep transition (value and two derivatives match at
    /// both ends, so the profile is C^2).
    Plateau { r1: f64, r2: f64 },
}

impl ProfileKind {
    /// `order`-th derivative of the profile with respect to `t`.
    pub fn eval(&self, t: f64, order: u8) -> f64 {
        match self {
            ProfileKind::FracBump { s } => {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = *s;
                match order {
                    0 => (1.0 - t).powf(s),
                    1 => -s * (1.0 - t).powf(s - 1.0),
                    2 => s * (s - 1.0) * (1.0 - t).powf(s - 2.0),
                    3 => -s * (s - 1.0) * (s - 2.0) * (1.0 - t).powf(s - 3.0),
                    _ => unreachable!("profile derivative order > 3"),
                }
            }
            ProfileKind::SmoothBump => {
                if t >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 / (1.0 - t);
                let p = (1.0 - w).exp(); // underflows to +0 before w powers overflow
                match order {
                    0 => p,
                    1 => -p * w * w,
                    2 => p * (w * w * w * w - 2.0 * w * w * w),
                    3 => p * (-w.powi(6) + 6.0 * w.powi(5) - 6.0 * w.powi(4)),
                    _ => unreachable!("profile derivative order > 3"),
                }
            }
            ProfileKind::Plateau { r1, r2 } => {
                let (r1, r2) = (*r1, *r2);
                if t <= r1 * r1 {
                    return if order == 0 { 1.0 } else { 0.0 };
                }
                if t >= r2 * r2 {
                    return 0.0;
                }
                let r = t.sqrt();
                let u = (r - r1) / (r2 - r1);
                let du = 1.0 / (r2 - r1);
                // q(r) = 1 - S(u), S the quintic smoothstep
                let q1 = -(30.0 * u * u * (u - 1.0) * (u - 1.0)) * du;
                let q2 = -(120.0 * u * u * u - 180.0 * u * u + 60.0 * u) * du * du;
                match order {
                    0 => 1.0 - (6.0 * u.powi(5) - 15.0 * u.powi(4) + 10.0 * u.powi(3)),
                    1 => q1 / (2.0 * r),
                    2 => q2 / (4.0 * r * r) - q1 / (4.0 * r * r * r),
                    _ => unreachable!("plateau derivative order > 2"),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Scale(f64, Box<Expr>),
    /// Nonnegative integer power of a subexpression.
    PowI(Box<Expr>, u32),
    /// `order`-th derivative of the profile, applied to `inner`.
    Profile {
        kind: ProfileKind,
        order: u8,
        inner: Box<Expr>,
    },
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Coord(k) => x[*k],
            Expr::Sum(terms) => terms.iter().map(|e| e.eval(x)).sum(),
            Expr::Prod(fs) => fs.iter().map(|e| e.eval(x)).product(),
            Expr::Scale(c, e) => c * e.eval(x),
            Expr::PowI(e, p) => e.eval(x).powi(*p as i32),
            Expr::Profile { kind, order, inner } => kind.eval(inner.eval(x), *order),
        }
    }

    /// Symbolic partial derivative along `axis`.
    pub fn diff(&self, axis: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Coord(k) => Expr::Const(if *k == axis { 1.0 } else { 0.0 }),
            Expr::Sum(terms) => Expr::Sum(terms.iter().map(|e| e.diff(axis)).collect()),
            Expr::Prod(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let mut factors = Vec::with_capacity(fs.len());
                    for (j, f) in fs.iter().enumerate() {
                        factors.push(if i == j { f.diff(axis) } else { f.clone() });
                    }
                    terms.push(Expr::Prod(factors));
                }
                Expr::Sum(terms)
            }
            Expr::Scale(c, e) => Expr::Scale(*c, Box::new(e.diff(axis))),
            Expr::PowI(e, p) => {
                if *p == 0 {
                    Expr::Const(0.0)
                } else {
                    Expr::Scale(
                        *p as f64,
                        Box::new(Expr::Prod(vec![Expr::PowI(e.clone(), p - 1), e.diff(axis)])),
                    )
                }
            }
            Expr::Profile { kind, order, inner } => Expr::Prod(vec![
                Expr::Profile {
                    kind: kind.clone(),
                    order: order + 1,
                    inner: inner.clone(),
                },
                inner.diff(axis),
            ]),
        }
    }

    /// The expression with coordinates translated by `delta`
    /// (evaluates the original at `x + delta`).
    pub fn shift(&self, delta: &[f64]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Coord(k) => {
                if delta[*k] == 0.0 {
                    Expr::Coord(*k)
                } else {
                    Expr::Sum(vec![Expr::Coord(*k), Expr::Const(delta[*k])])
                }
            }
            Expr::Sum(terms) => Expr::Sum(terms.iter().map(|e| e.shift(delta)).collect()),
            Expr::Prod(fs) => Expr::Prod(fs.iter().map(|e| e.shift(delta)).collect()),
            Expr::Scale(c, e) => Expr::Scale(*c, Box::new(e.shift(delta))),
            Expr::PowI(e, p) => Expr::PowI(Box::new(e.shift(delta)), *p),
            Expr::Profile { kind, order, inner } => Expr::Profile {
                kind: kind.clone(),
                order: *order,
                inner: Box::new(inner.shift(delta)),
            },
        }
    }

    /// Sum of squared coordinates over an index range, optionally scaled:
    /// `scale * (x_a^2 + ... + x_b^2)`.
    pub fn scaled_norm_sq(range: std::ops::Range<usize>, scale: f64) -> Expr {
        let terms = range
            .map(|k| Expr::PowI(Box::new(Expr::Coord(k)), 2))
            .collect();
        Expr::Scale(scale, Box::new(Expr::Sum(terms)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_derivatives() {
        // f = 3 x0^2 x1 + x1
        let f = Expr::Sum(vec![
            Expr::Scale(
                3.0,
                Box::new(Expr::Prod(vec![
                    Expr::PowI(Box::new(Expr::Coord(0)), 2),
                    Expr::Coord(1),
                ])),
            ),
            Expr::Coord(1),
        ]);
        let x = [2.0, 5.0];
        assert_relative_eq!(f.eval(&x), 65.0);
        assert_relative_eq!(f.diff(0).eval(&x), 60.0); // 6 x0 x1
        assert_relative_eq!(f.diff(1).eval(&x), 13.0); // 3 x0^2 + 1
        assert_relative_eq!(f.diff(0).diff(0).eval(&x), 30.0); // 6 x1
    }

    #[test]
    fn shift_translates() {
        let f = Expr::PowI(Box::new(Expr::Coord(0)), 2);
        let g = f.shift(&[1.5]);
        assert_relative_eq!(g.eval(&[2.0]), 12.25); // (2 + 1.5)^2
    }

    fn fd2(kind: &ProfileKind, t: f64, h: f64) -> f64 {
        (kind.eval(t + h, 0) - 2.0 * kind.eval(t, 0) + kind.eval(t - h, 0)) / (h * h)
    }

    fn fd1(kind: &ProfileKind, t: f64, h: f64) -> f64 {
        (kind.eval(t + h, 0) - kind.eval(t - h, 0)) / (2.0 * h)
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let cases = [
            (ProfileKind::FracBump { s: 0.5 }, 0.3),
            (ProfileKind::FracBump { s: 0.75 }, 0.6),
            (ProfileKind::SmoothBump, 0.4),
            (ProfileKind::SmoothBump, 0.85),
            (ProfileKind::Plateau { r1: 0.75, r2: 0.8 }, 0.77 * 0.77),
        ];
        for (kind, t) in cases {
            let h = 1e-5;
            assert_relative_eq!(kind.eval(t, 1), fd1(&kind, t, h), max_relative = 1e-6);
            assert_relative_eq!(kind.eval(t, 2), fd2(&kind, t, h), max_relative = 1e-4);
        }
    }

    #[test]
    fn profiles_vanish_outside_support() {
        assert_eq!(ProfileKind::FracBump { s: 0.5 }.eval(1.2, 0), 0.0);
        assert_eq!(ProfileKind::SmoothBump.eval(1.0, 0), 0.0);
        assert_eq!(ProfileKind::SmoothBump.eval(0.999_999_999, 0), 0.0); // underflow region
        let p = ProfileKind::Plateau { r1: 0.75, r2: 0.8 };
        assert_eq!(p.eval(0.5, 0), 1.0);
        assert_eq!(p.eval(0.64, 0), 0.0);
        assert_eq!(p.eval(0.5, 1), 0.0);
    }

    #[test]
    fn smoothbump_is_one_at_origin() {
        assert_eq!(ProfileKind::SmoothBump.eval(0.0, 0), 1.0);
    }
}
