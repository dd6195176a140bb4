//! JSON run configuration. Numbers may be given as JSON numbers or as
//! constant expressions such as `"1/2500"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{CertifyOptions, ProblemSpec, Theorem};
use crate::expr::Expression;
use crate::green::{BoundaryModel, C0Mode, GreenKind, GreenTable};
use crate::kernel::Kernel;
use crate::par::Execution;
use crate::solve::SolveOptions;
use crate::varexp::ExponentProfile;

/// Configurations shipped with the binary, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("example212", include_str!("../configs/example212.json")),
    ("quadratic", include_str!("../configs/quadratic.json")),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// A JSON number or a constant expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn eval(&self, key: &str) -> Result<f64, ConfigError> {
        let v = match self {
            Number::Value(v) => *v,
            Number::Expr(s) => {
                let e = Expression::parse(s, &[]).map_err(|e| invalid(key, e))?;
                e.eval(&[]).map_err(|e| invalid(key, e))?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, format!("{v} is not finite")))
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// `A(t)`.
    #[serde(rename = "A")]
    pub a: String,
    /// `f(t, u)`.
    pub f: String,
    /// `p(t)`.
    pub p: String,
    /// Replaces the scanned `(p⁻, p⁺)`.
    #[serde(default)]
    pub p_bounds: Option<[Number; 2]>,
    #[serde(default)]
    pub kernel: KernelConfig,
    pub boundary: BoundaryConfig,
    #[serde(default = "one")]
    pub lambda: Number,
    pub rho1: Number,
    pub rho2: Number,
    #[serde(default)]
    pub q: Option<Number>,
    /// `auto` or one of t2.8, t3.6, t4.4, c2.10, c2.11.
    #[serde(default = "auto")]
    pub theorem: String,
}

fn one() -> Number {
    Number::Value(1.0)
}

fn auto() -> String {
    "auto".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `constant_one`, `riemann_liouville` or `expression`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub order: Option<Number>,
    /// `b(t)` for `expression` kernels.
    #[serde(default)]
    pub b: Option<String>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: "constant_one".into(),
            order: None,
            b: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    /// `dirichlet`, `right_focal` or `tabulated`.
    #[serde(rename = "type")]
    pub kind: String,
    pub alpha: Number,
    pub beta: Number,
    /// CSV file for `tabulated`.
    #[serde(default)]
    pub table: Option<String>,
    #[serde(default)]
    pub c0_mode: C0Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub n_nodes: usize,
    pub grid_res: usize,
    pub tol_inner: f64,
    pub tol_outer: f64,
    pub quad_tol: f64,
    pub margin: f64,
    pub scan_points: usize,
    pub max_iters: usize,
    pub check_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let s = SolveOptions::default();
        Self {
            n_nodes: s.n_nodes,
            grid_res: crate::certify::DEFAULT_GRID_RES,
            tol_inner: s.tol_inner,
            tol_outer: s.tol_outer,
            quad_tol: Kernel::DEFAULT_TOL,
            margin: 0.0,
            scan_points: s.scan_points,
            max_iters: s.max_iters,
            check_tol: s.check_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub json: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Run {
    pub name: String,
    pub spec: ProblemSpec,
    pub theorem: Option<Theorem>,
    pub certify: CertifyOptions,
    pub solve: SolveOptions,
    pub outputs: OutputsConfig,
}

/// Parses JSON text, reporting the key path of any schema error.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { "config".to_string() } else { path };
        invalid(&key, e.into_inner())
    })
}

/// Loads a file, or a bundled configuration when `source` names one and
/// no such file exists.
pub fn load_config(source: &str) -> Result<RunConfig, ConfigError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == source) {
            return parse_config(text);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: source.to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    if cfg.name.is_none() {
        cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

fn parse_expr(key: &str, src: &str, vars: &[&str]) -> Result<Expression, ConfigError> {
    Expression::parse(src, vars).map_err(|e| invalid(key, e))
}

impl RunConfig {
    /// Validates every field and assembles the problem.
    pub fn build(&self, exec: Execution) -> Result<Run, ConfigError> {
        let pr = &self.problem;
        let nu = &self.numerics;
        let a = parse_expr("problem.A", &pr.a, &["t"])?;
        let f = parse_expr("problem.f", &pr.f, &["t", "u"])?;
        let p = parse_expr("problem.p", &pr.p, &["t"])?;
        let bounds = match &pr.p_bounds {
            Some([lo, hi]) => Some((lo.eval("problem.p_bounds[0]")?, hi.eval("problem.p_bounds[1]")?)),
            None => None,
        };
        let profile = ExponentProfile::new(p, bounds, exec).map_err(|e| {
            let key = if bounds.is_some() {
                "problem.p_bounds"
            } else {
                "problem.p"
            };
            invalid(key, e)
        })?;

        if !(nu.quad_tol > 0.0) {
            return Err(invalid("numerics.quad_tol", "must be positive"));
        }
        let kernel = match pr.kernel.kind.as_str() {
            "constant_one" => Kernel::constant_one(),
            "riemann_liouville" => {
                let order = pr
                    .kernel
                    .order
                    .as_ref()
                    .ok_or_else(|| invalid("problem.kernel.order", "required for riemann_liouville"))?
                    .eval("problem.kernel.order")?;
                Kernel::riemann_liouville(order).map_err(|e| invalid("problem.kernel.order", e))?
            }
            "expression" => {
                let src = pr
                    .kernel
                    .b
                    .as_deref()
                    .ok_or_else(|| invalid("problem.kernel.b", "required for expression kernels"))?;
                let b = parse_expr("problem.kernel.b", src, &["t"])?;
                Kernel::from_expression_with_tolerance(b, nu.quad_tol).map_err(|e| invalid("problem.kernel.b", e))?
            }
            other => {
                return Err(invalid(
                    "problem.kernel.type",
                    format!("unknown kernel `{other}`; expected constant_one, riemann_liouville or expression"),
                ))
            }
        }
        .with_tolerance(nu.quad_tol);

        let bc = &pr.boundary;
        let alpha = bc.alpha.eval("problem.boundary.alpha")?;
        let beta = bc.beta.eval("problem.boundary.beta")?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid("problem.boundary.alpha", format!("{alpha} is outside [0, 1)")));
        }
        if !(beta > alpha && beta <= 1.0) {
            return Err(invalid(
                "problem.boundary.beta",
                format!("need alpha < beta <= 1, got beta = {beta}"),
            ));
        }
        let kind = match bc.kind.as_str() {
            "dirichlet" => GreenKind::Dirichlet,
            "right_focal" => GreenKind::RightFocal,
            "tabulated" => {
                let rel = bc
                    .table
                    .as_deref()
                    .ok_or_else(|| invalid("problem.boundary.table", "required for tabulated boundaries"))?;
                let path = match &self.base_dir {
                    Some(dir) if Path::new(rel).is_relative() => dir.join(rel),
                    _ => PathBuf::from(rel),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| invalid("problem.boundary.table", format!("{}: {e}", path.display())))?;
                GreenKind::Tabulated(GreenTable::from_csv(&text).map_err(|e| invalid("problem.boundary.table", e))?)
            }
            other => {
                return Err(invalid(
                    "problem.boundary.type",
                    format!("unknown boundary `{other}`; expected dirichlet, right_focal or tabulated"),
                ))
            }
        };
        let boundary = BoundaryModel::new(kind, alpha, beta, bc.c0_mode).map_err(|e| invalid("problem.boundary", e))?;

        let lambda = pr.lambda.eval("problem.lambda")?;
        if lambda < 0.0 {
            return Err(invalid("problem.lambda", "must be nonnegative"));
        }
        let rho1 = pr.rho1.eval("problem.rho1")?;
        let rho2 = pr.rho2.eval("problem.rho2")?;
        if rho1 <= 0.0 {
            return Err(invalid("problem.rho1", "must be positive"));
        }
        if rho2 <= rho1 {
            return Err(invalid(
                "problem.rho2",
                format!("need rho1 < rho2, got rho1 = {rho1}, rho2 = {rho2}"),
            ));
        }
        let q = match &pr.q {
            Some(q) => Some(q.eval("problem.q")?),
            None => None,
        };
        let theorem = match pr.theorem.as_str() {
            "auto" => None,
            s => Some(s.parse::<Theorem>().map_err(|e| invalid("problem.theorem", e))?),
        };
        if let Some(t) = theorem {
            if t.regime() != profile.regime() {
                return Err(invalid(
                    "problem.theorem",
                    format!("{t} needs the {} regime, but p gives {}", t.regime(), profile.regime()),
                ));
            }
        }

        if nu.n_nodes < 3 {
            return Err(invalid("numerics.n_nodes", "need at least 3 nodes"));
        }
        if nu.grid_res < 2 {
            return Err(invalid("numerics.grid_res", "need at least 2 points per axis"));
        }
        for (key, v) in [
            ("numerics.tol_inner", nu.tol_inner),
            ("numerics.tol_outer", nu.tol_outer),
        ] {
            if !(v > 0.0) {
                return Err(invalid(key, "must be positive"));
            }
        }
        if !(nu.margin >= 0.0 && nu.margin.is_finite()) {
            return Err(invalid("numerics.margin", "must be finite and nonnegative"));
        }
        if nu.scan_points < 2 {
            return Err(invalid("numerics.scan_points", "need at least 2 points"));
        }

        Ok(Run {
            name: self.name.clone().unwrap_or_else(|| "config".into()),
            spec: ProblemSpec {
                a,
                f,
                p: profile,
                kernel,
                boundary,
                lambda,
                rho1,
                rho2,
                q,
            },
            theorem,
            certify: CertifyOptions {
                margin: nu.margin,
                grid_res: nu.grid_res,
                exec,
            },
            solve: SolveOptions {
                n_nodes: nu.n_nodes,
                tol_inner: nu.tol_inner,
                max_iters: nu.max_iters,
                tol_outer: nu.tol_outer,
                scan_points: nu.scan_points,
                check_tol: nu.check_tol,
                exec,
            },
            outputs: self.outputs.clone(),
        })
    }
}
