//! JSON problem configuration.
//!
//! `problem.json` describes the decomposition and domain, and optionally
//! the solver data and quadrature overrides:
//!
//! ```json
//! {
//!   "groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}],
//!   "radii": [1.0, 1.0],
//!   "h": 0.125,
//!   "rhs": {"preset": "separable-bump"},
//!   "exterior": {"preset": "separable-bump"},
//!   "quadrature": {"radial_nodes": 128}
//! }
//! ```
//!
//! The last group is the local variable: dimension 1 and no `s`/`a` keys.

use serde::{Deserialize, Serialize};

use crate::decomposition::{BoxDomain, CoordinateDecomposition};
use crate::error::{Error, Result};
use crate::fields::presets::FieldSpec;
use crate::quadrature::{QuadratureSpec, TailMode};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpacingSpec {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_mode: Option<TailMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading_levels: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub groups: Vec<GroupSpec>,
    pub radii: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<SpacingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_cap: Option<usize>,
}

impl ProblemConfig {
    /// The default two-group problem: one fractional direction of order
    /// 1/2 with unit weight, unit radii.
    pub fn default_two_group() -> Self {
        Self {
            groups: vec![
                GroupSpec {
                    dim: 1,
                    s: Some(0.5),
                    a: Some(1.0),
                },
                GroupSpec {
                    dim: 1,
                    s: None,
                    a: None,
                },
            ],
            radii: vec![1.0, 1.0],
            dilation: None,
            h: None,
            rhs: None,
            exterior: None,
            quadrature: None,
            node_cap: None,
        }
    }

    pub fn decomposition(&self) -> Result<CoordinateDecomposition> {
        if self.groups.is_empty() {
            return Err(Error::Config("\"groups\" must not be empty".into()));
        }
        let last = self.groups.last().unwrap();
        if last.dim != 1 {
            return Err(Error::Config(format!(
                "last group must have \"dim\": 1 (the local variable), got {}",
                last.dim
            )));
        }
        if last.s.is_some() || last.a.is_some() {
            return Err(Error::Config(
                "last group is the local variable: keys \"s\" and \"a\" are not allowed there"
                    .into(),
            ));
        }
        let mut dims = Vec::new();
        let mut orders = Vec::new();
        let mut weights = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            dims.push(g.dim);
            if i + 1 < self.groups.len() {
                orders.push(g.s.ok_or_else(|| {
                    Error::Config(format!("group {} is nonlocal and needs key \"s\"", i + 1))
                })?);
                weights.push(g.a.ok_or_else(|| {
                    Error::Config(format!("group {} is nonlocal and needs key \"a\"", i + 1))
                })?);
            }
        }
        CoordinateDecomposition::new(dims, orders, weights)
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        if self.radii.len() != self.groups.len() {
            return Err(Error::Config(format!(
                "\"radii\" must list one radius per group ({} groups, {} radii)",
                self.groups.len(),
                self.radii.len()
            )));
        }
        BoxDomain::with_dilation(self.radii.clone(), self.dilation.unwrap_or(1.0))
    }

    pub fn quadrature_spec(&self) -> Result<QuadratureSpec> {
        let domain = self.domain()?;
        let mut spec = QuadratureSpec::for_scale(domain.min_radius());
        if let Some(o) = &self.quadrature {
            if let Some(v) = o.near_radius {
                spec.near_radius = v;
            }
            if let Some(v) = o.radial_nodes {
                spec.radial_nodes = v;
            }
            if let Some(v) = o.angular_nodes {
                spec.angular_nodes = v;
            }
            if let Some(v) = o.far_cutoff {
                spec.far_cutoff = v;
            }
            if let Some(v) = o.tail_mode {
                spec.tail_mode = v;
            }
            if let Some(v) = o.inner_floor {
                spec.inner_floor = v;
            }
            if let Some(v) = o.grading_levels {
                spec.grading_levels = v;
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn spacing(&self) -> Result<Vec<f64>> {
        let decomp = self.decomposition()?;
        match &self.h {
            None => Err(Error::Config(
                "solver needs key \"h\" (grid spacing)".into(),
            )),
            Some(SpacingSpec::Uniform(h)) => Ok(vec![*h; decomp.dim()]),
            Some(SpacingSpec::PerAxis(hs)) => {
                if hs.len() != decomp.dim() {
                    return Err(Error::Config(format!(
                        "\"h\" must list one spacing per axis ({} axes, {} values)",
                        decomp.dim(),
                        hs.len()
                    )));
                }
                Ok(hs.clone())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// `field.json` loader.
pub fn field_spec_from_path(path: &std::path::Path) -> Result<FieldSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

/// `probes.json`: explicit probe offsets for the gradient-estimate check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbesSpec {
    pub ys: Vec<f64>,
}

pub fn probes_from_path(path: &std::path::Path) -> Result<ProbesSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_problem() {
        let cfg: ProblemConfig = ProblemConfig::from_json(
            r#"{"groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}], "radii": [1.0, 1.0]}"#,
        )
        .unwrap();
        let d = cfg.decomposition().unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.order(0), 0.5);
        let q = cfg.domain().unwrap();
        assert_eq!(q.local_radius(), 1.0);
    }

    #[test]
    fn rejects_local_group_with_order() {
        let cfg = ProblemConfig::from_json(
            r#"{"groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1, "s": 0.7}], "radii": [1, 1]}"#,
        )
        .unwrap();
        let err = cfg.decomposition().unwrap_err();
        assert!(err.to_string().contains("\"s\""), "{err}");
    }

    #[test]
    fn parse_error_names_offending_key() {
        let err = ProblemConfig::from_json(r#"{"groups": [], "radik": []}"#).unwrap_err();
        assert!(err.to_string().contains("radik"), "{err}");
    }

    #[test]
    fn quadrature_overrides_apply() {
        let cfg = ProblemConfig::from_json(
            r#"{"groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}], "radii": [2.0, 2.0],
                "quadrature": {"radial_nodes": 64, "tail_mode": "numeric-extended"}}"#,
        )
        .unwrap();
        let spec = cfg.quadrature_spec().unwrap();
        assert_eq!(spec.radial_nodes, 64);
        assert_eq!(spec.tail_mode, TailMode::NumericExtended);
        assert_eq!(spec.near_radius, 0.2); // scaled to d_min = 2
    }
}
