//! Problem definitions loaded from TOML.
//!
//! ```toml
//! [problem]
//! dimension = 2
//! p0 = "0, 0"
//! t0 = 0.0
//!
//! [field]
//! registry = "parabola-field"          # or: components = ["1", "z2"]
//!
//! [foliation]
//! kind = "registry"                    # identity | affine | graph | curve | map | registry | direction
//! name = "parabola-foliation"
//!
//! [check]
//! radius = 0.25
//! budget = 4096
//! seed = 42
//! threshold = 1e-6
//!
//! [modulus]
//! p = "1, 1"
//! v = "1, 0"
//! delta = 1e-3
//!
//! [funnel]
//! t_end = 0.5
//! step = 1e-4
//! epsilons = "1e-2, 1e-3, 1e-4, 1e-5"
//! directions = 8
//! ```
//!
//! Vectors are comma-separated reals. Expressions are strings in the
//! variables of their context: field components in `z1 ..`, map components
//! in `s, y1 ..`, graph functions in `y1 ..` and curves in `t`. Every
//! default is filled in on load, so a [`ProblemConfig`] carries no implicit
//! state.

use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

use crate::checker::CheckParams;
use crate::expr::{parse_in, Scope};
use crate::field::{registry_get, DiffeoMap, ScalarMap, VectorField};
use crate::foliation::{affine_foliation, curve_foliation, graph_foliation, CurveFrame, Foliation};
use crate::linalg::Vector;
use crate::projective::{hyperplane_basis, ProjectivePoint};
use crate::sampling::{DEFAULT_BUDGET, DEFAULT_SEED};
use crate::transform::{DEFAULT_RADIUS, TRANSVERSALITY_THRESHOLD};

pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_CURVE_SAMPLES: usize = 64;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_EPSILONS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
pub const DEFAULT_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    At {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    field: RawField,
    foliation: Option<RawFoliation>,
    check: Option<RawCheck>,
    modulus: Option<RawModulus>,
    funnel: Option<RawFunnel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dimension: Spanned<usize>,
    p0: Spanned<String>,
    t0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    name: Option<String>,
    registry: Option<Spanned<String>>,
    components: Option<Vec<Spanned<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFoliation {
    kind: Spanned<String>,
    name: Option<Spanned<String>>,
    normal: Option<Spanned<String>>,
    g: Option<Spanned<String>>,
    forward: Option<Vec<Spanned<String>>>,
    inverse: Option<Vec<Spanned<String>>>,
    gamma1: Option<Vec<Spanned<String>>>,
    gamma2: Option<Vec<Spanned<String>>>,
    interval: Option<Spanned<String>>,
    samples: Option<usize>,
    u: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    radius: Option<f64>,
    budget: Option<usize>,
    seed: Option<u64>,
    threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulus {
    p: Option<Spanned<String>>,
    v: Option<Spanned<String>>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunnel {
    t_end: Option<f64>,
    step: Option<f64>,
    epsilons: Option<Spanned<String>>,
    directions: Option<usize>,
}

/// How the leaves are built; expression texts are kept for reports.
#[derive(Debug, Clone)]
pub enum FoliationSpec {
    Identity,
    Affine {
        normal: Vector,
    },
    Graph {
        g: String,
    },
    Curve {
        gamma1: Vec<String>,
        gamma2: Vec<String>,
        interval: (f64, f64),
        samples: usize,
    },
    Map {
        forward: Vec<String>,
        inverse: Option<Vec<String>>,
    },
    Registry {
        name: String,
    },
    /// A constant direction in the plane, for fields of the form `(1, f)`.
    Direction {
        u: Vector,
    },
}

impl FoliationSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FoliationSpec::Identity => "identity",
            FoliationSpec::Affine { .. } => "affine",
            FoliationSpec::Graph { .. } => "graph",
            FoliationSpec::Curve { .. } => "curve",
            FoliationSpec::Map { .. } => "map",
            FoliationSpec::Registry { .. } => "registry",
            FoliationSpec::Direction { .. } => "direction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusSpec {
    pub p: Vector,
    pub v: Vector,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunnelSpec {
    pub t_end: f64,
    pub step: f64,
    pub epsilons: Vec<f64>,
    pub directions: usize,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub dimension: usize,
    /// Registry name or the component expressions joined by `; `.
    pub field_source: String,
    pub field: VectorField,
    pub p0: Vector,
    pub t0: f64,
    pub foliation_spec: FoliationSpec,
    /// Built and validated on load; `None` for the identity, affine and
    /// direction kinds, which the checker constructs itself.
    pub foliation: Option<Foliation>,
    pub check: CheckParams,
    pub modulus: ModulusSpec,
    pub funnel: FunnelSpec,
    /// Hex SHA-256 of the configuration text.
    pub sha256: String,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_col(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        (line, column)
    }

    fn at(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let (line, column) = self.line_col(span.start);
        ConfigError::At {
            line,
            column,
            message: message.into(),
        }
    }

    /// Offset of the first character inside a quoted string value.
    fn content_start(&self, span: &Range<usize>) -> usize {
        let raw = &self.text[span.clone()];
        if raw.starts_with("\"\"\"") || raw.starts_with("'''") {
            span.start + 3
        } else if raw.starts_with('"') || raw.starts_with('\'') {
            span.start + 1
        } else {
            span.start
        }
    }

    fn expr(&self, s: &Spanned<String>, scope: Scope, what: &str) -> Result<String, ConfigError> {
        match parse_in(s.get_ref(), scope) {
            Ok(_) => Ok(s.get_ref().clone()),
            Err(e) => {
                let start = self.content_start(&s.span()) + e.pos().unwrap_or(0);
                Err(self.at(start..start, format!("{what}: {e}")))
            }
        }
    }

    fn exprs(
        &self,
        list: &[Spanned<String>],
        scope: Scope,
        what: &str,
    ) -> Result<Vec<String>, ConfigError> {
        list.iter()
            .enumerate()
            .map(|(i, s)| self.expr(s, scope, &format!("{what} component {}", i + 1)))
            .collect()
    }

    fn reals(&self, s: &Spanned<String>, what: &str) -> Result<Vec<f64>, ConfigError> {
        parse_reals(s.get_ref()).map_err(|m| self.at(s.span(), format!("{what}: {m}")))
    }

    fn vector(&self, s: &Spanned<String>, dim: usize, what: &str) -> Result<Vector, ConfigError> {
        let v = self.reals(s, what)?;
        if v.len() != dim {
            return Err(self.at(
                s.span(),
                format!("{what}: expected {dim} entries, found {}", v.len()),
            ));
        }
        Vector::new(v).map_err(|e| self.at(s.span(), format!("{what}: {e}")))
    }
}

/// Parses `"1, -2.5, 3e-4"`.
pub fn parse_reals(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{p}` is not a finite real"))
        })
        .collect()
}

pub fn load_config(path: &Path) -> Result<ProblemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let src = Source { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => src.at(span, e.message().to_string()),
        None => ConfigError::Invalid(e.message().to_string()),
    })?;
    let sha256 = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();

    let dim = *raw.problem.dimension.get_ref();
    if dim < 2 {
        return Err(src.at(raw.problem.dimension.span(), "dimension must be at least 2"));
    }
    let p0 = src.vector(&raw.problem.p0, dim, "p0")?;
    let t0 = raw.problem.t0.unwrap_or(0.0);
    if !t0.is_finite() {
        return Err(ConfigError::Invalid("t0 must be finite".into()));
    }

    let (field_source, field) = load_field(&src, &raw.field, dim)?;
    let (foliation_spec, foliation) = match &raw.foliation {
        Some(f) => load_foliation(&src, f, dim, &p0, &field)?,
        None => (FoliationSpec::Identity, None),
    };

    let c = raw.check.unwrap_or_default();
    let check = CheckParams {
        radius: c.radius.unwrap_or(DEFAULT_RADIUS),
        budget: c.budget.unwrap_or(DEFAULT_BUDGET),
        seed: c.seed.unwrap_or(DEFAULT_SEED),
        threshold: c.threshold.unwrap_or(TRANSVERSALITY_THRESHOLD),
    };
    if !(check.radius.is_finite() && check.radius > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "check.radius must be positive, got {}",
            check.radius
        )));
    }
    if !(check.threshold.is_finite() && check.threshold >= 0.0) {
        return Err(ConfigError::Invalid(format!(
            "check.threshold must be non-negative, got {}",
            check.threshold
        )));
    }

    let m = raw.modulus.unwrap_or_default();
    let modulus = ModulusSpec {
        p: match &m.p {
            Some(s) => src.vector(s, dim, "modulus.p")?,
            None => p0.clone(),
        },
        v: match &m.v {
            Some(s) => src.vector(s, dim, "modulus.v")?,
            None => Vector::basis(dim, 0),
        },
        delta: m.delta.unwrap_or(DEFAULT_DELTA),
    };

    let f = raw.funnel.unwrap_or_default();
    let funnel = FunnelSpec {
        t_end: f.t_end.unwrap_or(t0 + 1.0),
        step: f.step.unwrap_or(DEFAULT_STEP),
        epsilons: match &f.epsilons {
            Some(s) => src.reals(s, "funnel.epsilons")?,
            None => DEFAULT_EPSILONS.to_vec(),
        },
        directions: f.directions.unwrap_or(DEFAULT_DIRECTIONS),
    };

    Ok(ProblemConfig {
        dimension: dim,
        field_source,
        field,
        p0,
        t0,
        foliation_spec,
        foliation,
        check,
        modulus,
        funnel,
        sha256,
    })
}

fn load_field(
    src: &Source,
    raw: &RawField,
    dim: usize,
) -> Result<(String, VectorField), ConfigError> {
    let field = match (&raw.registry, &raw.components) {
        (Some(name), None) => {
            let f = registry_get(name.get_ref())
                .and_then(|e| e.into_field())
                .map_err(|e| src.at(name.span(), e.to_string()))?;
            if f.dim() != dim {
                return Err(src.at(
                    name.span(),
                    format!("{} has dimension {}, problem has {dim}", f.name(), f.dim()),
                ));
            }
            (name.get_ref().clone(), f)
        }
        (None, Some(list)) => {
            if list.len() != dim {
                return Err(ConfigError::Invalid(format!(
                    "field has {} components, problem dimension is {dim}",
                    list.len()
                )));
            }
            let texts = src.exprs(list, Scope::Ambient { dim }, "field")?;
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let name = raw
                .name
                .clone()
                .unwrap_or_else(|| "config-field".to_string());
            let f = VectorField::from_exprs(name, &refs)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            (texts.join("; "), f)
        }
        _ => {
            return Err(ConfigError::Invalid(
                "field needs exactly one of `registry` or `components`".into(),
            ))
        }
    };
    Ok(field)
}

fn required<'a, T>(value: &'a Option<T>, key: &str, kind: &str) -> Result<&'a T, ConfigError> {
    value
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid(format!("foliation kind `{kind}` needs `{key}`")))
}

fn load_foliation(
    src: &Source,
    raw: &RawFoliation,
    dim: usize,
    p0: &Vector,
    field: &VectorField,
) -> Result<(FoliationSpec, Option<Foliation>), ConfigError> {
    let kind = raw.kind.get_ref().as_str();
    let invalid = |e: &dyn std::fmt::Display| src.at(raw.kind.span(), format!("foliation: {e}"));
    match kind {
        "identity" => {
            Foliation::identity(p0).map_err(|e| invalid(&e))?;
            Ok((FoliationSpec::Identity, None))
        }
        "affine" => {
            let s = required(&raw.normal, "normal", kind)?;
            let normal = src.vector(s, dim, "foliation.normal")?;
            let point =
                ProjectivePoint::new(&normal).map_err(|e| src.at(s.span(), e.to_string()))?;
            let basis = hyperplane_basis(&point);
            affine_foliation(p0, basis.normal(), &basis).map_err(|e| invalid(&e))?;
            Ok((FoliationSpec::Affine { normal }, None))
        }
        "graph" => {
            let s = required(&raw.g, "g", kind)?;
            let text = src.expr(s, Scope::Leaf { dim: dim - 1 }, "foliation.g")?;
            let g = ScalarMap::from_expr("graph", &text, Scope::Leaf { dim: dim - 1 })
                .map_err(|e| src.at(s.span(), e.to_string()))?;
            let phi = graph_foliation(&g, p0).map_err(|e| invalid(&e))?;
            Ok((FoliationSpec::Graph { g: text }, Some(phi)))
        }
        "curve" => {
            let g1 = src.exprs(
                required(&raw.gamma1, "gamma1", kind)?,
                Scope::Parameter,
                "foliation.gamma1",
            )?;
            let g2 = src.exprs(
                required(&raw.gamma2, "gamma2", kind)?,
                Scope::Parameter,
                "foliation.gamma2",
            )?;
            if g1.len() != dim || g2.len() != dim {
                return Err(invalid(&format!("curves need {dim} components each")));
            }
            let iv = required(&raw.interval, "interval", kind)?;
            let ends = src.reals(iv, "foliation.interval")?;
            if ends.len() != 2 || ends[0] >= ends[1] {
                return Err(src.at(iv.span(), "foliation.interval: expected `a, b` with a < b"));
            }
            let interval = (ends[0], ends[1]);
            let samples = raw.samples.unwrap_or(DEFAULT_CURVE_SAMPLES);
            let r1: Vec<&str> = g1.iter().map(String::as_str).collect();
            let r2: Vec<&str> = g2.iter().map(String::as_str).collect();
            let frame = CurveFrame::from_exprs(&r1, &r2, interval).map_err(|e| invalid(&e))?;
            let phi = curve_foliation(&frame, samples).map_err(|e| invalid(&e))?;
            check_base(&phi, p0).map_err(|e| invalid(&e))?;
            Ok((
                FoliationSpec::Curve {
                    gamma1: g1,
                    gamma2: g2,
                    interval,
                    samples,
                },
                Some(phi),
            ))
        }
        "map" => {
            let forward = src.exprs(
                required(&raw.forward, "forward", kind)?,
                Scope::Foliation { leaf_dim: dim - 1 },
                "foliation.forward",
            )?;
            let inverse = match &raw.inverse {
                Some(list) => Some(src.exprs(list, Scope::Ambient { dim }, "foliation.inverse")?),
                None => None,
            };
            if forward.len() != dim || inverse.as_ref().is_some_and(|i| i.len() != dim) {
                return Err(invalid(&format!("map needs {dim} components")));
            }
            let fw: Vec<&str> = forward.iter().map(String::as_str).collect();
            let iv: Option<Vec<&str>> = inverse
                .as_ref()
                .map(|i| i.iter().map(String::as_str).collect());
            let name = raw
                .name
                .as_ref()
                .map_or("config-map".to_string(), |n| n.get_ref().clone());
            let map = DiffeoMap::from_exprs(name, &fw, iv.as_deref()).map_err(|e| invalid(&e))?;
            let phi = Foliation::from_map(map, p0.clone()).map_err(|e| invalid(&e))?;
            Ok((FoliationSpec::Map { forward, inverse }, Some(phi)))
        }
        "registry" => {
            let n = required(&raw.name, "name", kind)?;
            let map = registry_get(n.get_ref())
                .and_then(|e| e.into_map())
                .map_err(|e| src.at(n.span(), e.to_string()))?;
            if map.dim() != dim {
                return Err(src.at(
                    n.span(),
                    format!("{} has dimension {}", map.name(), map.dim()),
                ));
            }
            let phi = Foliation::from_map(map, p0.clone()).map_err(|e| invalid(&e))?;
            Ok((
                FoliationSpec::Registry {
                    name: n.get_ref().clone(),
                },
                Some(phi),
            ))
        }
        "direction" => {
            if dim != 2 {
                return Err(invalid(&"direction foliations live in the plane"));
            }
            let s = required(&raw.u, "u", kind)?;
            let u = src.vector(s, 2, "foliation.u")?;
            let f0 = field.eval(p0).map_err(|e| invalid(&e))?;
            if f0[0] != 1.0 {
                return Err(invalid(&"direction checks need a field of the form (1, f)"));
            }
            Ok((FoliationSpec::Direction { u }, None))
        }
        other => Err(src.at(raw.kind.span(), format!("unknown foliation kind `{other}`"))),
    }
}

fn check_base(phi: &Foliation, p0: &Vector) -> Result<(), String> {
    let d = phi.base().distance(p0);
    if d > 1e-10 {
        return Err(format!("curve starts at {}, not at p0 = {p0}", phi.base()));
    }
    Ok(())
}
