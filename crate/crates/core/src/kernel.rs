//! The convolution weight `b` and the nonlocal functional
//! `z(u) = ∫₀¹ b(1 - s) u(s)^{p(s)} ds`.

use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::grid::GridFunction;
use crate::quad::{self, Adaptive, AdaptiveOptions, Mesh};

/// Grading exponent used for expression kernels, whose singularity order
/// is unknown; matches a `t^{-1/2}` weight.
const EXPRESSION_GRADING: f64 = 4.0;
/// Sample count for the nonnegativity check on load.
const POSITIVITY_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("Riemann-Liouville order must lie in (0, 1), got {0}")]
    BadOrder(f64),
    #[error("kernel is negative at t = {t}: b(t) = {value}")]
    Negative { t: f64, value: f64 },
    #[error("kernel mass must be positive, got {0}")]
    ZeroMass(f64),
    #[error("quadrature did not converge: estimate {value} with error {error_estimate}")]
    NonConvergent { value: f64, error_estimate: f64 },
    #[error("reverse Hölder exponent must satisfy q > 1, got {0}")]
    BadExponent(f64),
    #[error("integration range [{lo}, {hi}] is not inside [0, 1]")]
    Range { lo: f64, hi: f64 },
    #[error("grid function sample {index} is negative ({value})")]
    NegativeSample { index: usize, value: f64 },
    #[error("exponent p({t}) = {value} is outside (0, ∞)")]
    ExponentRange { t: f64, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    ConstantOne,
    RiemannLiouville { order: f64 },
    Expression(Expression),
}

/// Value of `∫₀¹ b^{1/(1-q)}`, or a report that refinement kept growing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HolderNorm {
    Finite(f64),
    NonIntegrable,
}

impl HolderNorm {
    pub fn finite(self) -> Option<f64> {
        match self {
            HolderNorm::Finite(v) => Some(v),
            HolderNorm::NonIntegrable => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    kind: KernelKind,
    panels: usize,
    tol: f64,
    mass: f64,
}

impl Kernel {
    pub const DEFAULT_PANELS: usize = 64;
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn constant_one() -> Self {
        Self {
            kind: KernelKind::ConstantOne,
            panels: Self::DEFAULT_PANELS,
            tol: Self::DEFAULT_TOL,
            mass: 1.0,
        }
    }

    /// `b(t) = t^{order - 1} / Γ(order)`.
    pub fn riemann_liouville(order: f64) -> Result<Self, KernelError> {
        if !(order > 0.0 && order < 1.0) {
            return Err(KernelError::BadOrder(order));
        }
        Ok(Self {
            kind: KernelKind::RiemannLiouville { order },
            panels: Self::DEFAULT_PANELS,
            tol: Self::DEFAULT_TOL,
            mass: 1.0 / libm::tgamma(order + 1.0),
        })
    }

    /// Kernel defined by an expression in `t`; checked for nonnegativity on
    /// a uniform sample of (0, 1] and for positive mass.
    pub fn from_expression(expr: Expression) -> Result<Self, KernelError> {
        Self::from_expression_with_tolerance(expr, Self::DEFAULT_TOL)
    }

    /// [`Kernel::from_expression`] with the adaptive quadrature tolerance
    /// (absolute and relative) set to `tol`.
    pub fn from_expression_with_tolerance(expr: Expression, tol: f64) -> Result<Self, KernelError> {
        for k in 1..=POSITIVITY_SAMPLES {
            let t = k as f64 / POSITIVITY_SAMPLES as f64;
            let value = expr.eval(&[t])?;
            if value < 0.0 {
                return Err(KernelError::Negative { t, value });
            }
        }
        let mut kernel = Self {
            kind: KernelKind::Expression(expr),
            panels: Self::DEFAULT_PANELS,
            tol,
            mass: f64::NAN,
        };
        let mass = kernel.partial_mass(0.0, 1.0)?;
        if mass <= 0.0 {
            return Err(KernelError::ZeroMass(mass));
        }
        kernel.mass = mass;
        Ok(kernel)
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    /// Tolerance for adaptive quadrature. Masses of expression kernels keep
    /// the value computed at construction.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self.kind, KernelKind::ConstantOne)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            KernelKind::ConstantOne => "1".into(),
            KernelKind::RiemannLiouville { order } => {
                format!("t^({order} - 1) / Gamma({order})")
            }
            KernelKind::Expression(e) => e.pretty(),
        }
    }

    /// `b(t)` for `t ∈ (0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64, KernelError> {
        Ok(match &self.kind {
            KernelKind::ConstantOne => 1.0,
            KernelKind::RiemannLiouville { order } => t.powf(order - 1.0) / libm::tgamma(*order),
            KernelKind::Expression(e) => e.eval(&[t])?,
        })
    }

    /// `(b * 1)(1) = ∫₀¹ b(s) ds`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn adaptive_options(&self, grading: f64) -> AdaptiveOptions {
        AdaptiveOptions {
            initial_panels: self.panels,
            grading,
            abs_tol: self.tol,
            rel_tol: self.tol,
            ..Default::default()
        }
    }

    /// `∫_lo^hi b(τ) dτ`. With `lo = 1 - β`, `hi = 1 - α` this is
    /// `∫_α^β b(1 - t) dt`.
    pub fn partial_mass(&self, lo: f64, hi: f64) -> Result<f64, KernelError> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(KernelError::Range { lo, hi });
        }
        match &self.kind {
            KernelKind::ConstantOne => Ok(hi - lo),
            KernelKind::RiemannLiouville { order } => {
                Ok((hi.powf(*order) - lo.powf(*order)) / libm::tgamma(order + 1.0))
            }
            KernelKind::Expression(e) => {
                let grading = if lo == 0.0 { EXPRESSION_GRADING } else { 1.0 };
                let outcome = quad::adaptive(lo, hi, &self.adaptive_options(grading), |t| e.eval(&[t]))?;
                match outcome {
                    Adaptive::Converged { value, .. } => Ok(value),
                    Adaptive::NotConverged { value, error_estimate } => {
                        Err(KernelError::NonConvergent { value, error_estimate })
                    }
                    Adaptive::Diverging { history } => Err(KernelError::NonConvergent {
                        value: *history.last().unwrap_or(&f64::INFINITY),
                        error_estimate: f64::INFINITY,
                    }),
                }
            }
        }
    }

    /// `(b^{1/(1-q)} * 1)(1) = ∫₀¹ b(s)^{1/(1-q)} ds`.
    pub fn reverse_holder_norm(&self, q: f64) -> Result<HolderNorm, KernelError> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(KernelError::BadExponent(q));
        }
        let r = 1.0 / (1.0 - q);
        match &self.kind {
            KernelKind::ConstantOne => Ok(HolderNorm::Finite(1.0)),
            KernelKind::RiemannLiouville { order } => {
                // b^r = Γ(α)^{-r} t^{(α-1) r}, a vanishing power since r < 0
                let exponent = (order - 1.0) * r;
                let scale = libm::tgamma(*order).powf(-r);
                Ok(HolderNorm::Finite(scale / (1.0 + exponent)))
            }
            KernelKind::Expression(e) => {
                let outcome = quad::adaptive(0.0, 1.0, &self.adaptive_options(EXPRESSION_GRADING), |t| {
                    let b = e.eval(&[t])?;
                    Ok::<f64, EvalError>(if b == 0.0 { f64::INFINITY } else { b.powf(r) })
                })?;
                match outcome {
                    Adaptive::Converged { value, .. } if value.is_finite() => Ok(HolderNorm::Finite(value)),
                    Adaptive::Converged { .. } | Adaptive::Diverging { .. } => Ok(HolderNorm::NonIntegrable),
                    Adaptive::NotConverged { value, error_estimate } if value.is_finite() => {
                        Err(KernelError::NonConvergent { value, error_estimate })
                    }
                    Adaptive::NotConverged { .. } => Ok(HolderNorm::NonIntegrable),
                }
            }
        }
    }

    /// Quadrature plan for `z(u)` on an `n`-node uniform grid, using this
    /// kernel's panel count.
    pub fn nonlocal_functional(&self, n: usize, p: &Expression) -> Result<NonlocalFunctional, KernelError> {
        NonlocalFunctional::new(self, n, p, self.panels)
    }

    /// `∫₀¹ b(1 - s) ũ(s)^{p(s)} ds` with `ũ` the linear interpolant of `u`.
    /// Panels are doubled until two levels agree to 1e-10.
    pub fn nonlocal_value(&self, u: &GridFunction, p: &Expression) -> Result<f64, KernelError> {
        self.nonlocal_value_with_estimate(u, p).map(|(v, _)| v)
    }

    /// Like [`Kernel::nonlocal_value`], also returning the two-level difference.
    pub fn nonlocal_value_with_estimate(&self, u: &GridFunction, p: &Expression) -> Result<(f64, f64), KernelError> {
        let tol = self.tol;
        const MAX_DOUBLINGS: usize = 8;
        let mut panels = self.panels;
        let mut prev = NonlocalFunctional::new(self, u.len(), p, panels)?.evaluate(u)?;
        let mut diff = f64::INFINITY;
        for _ in 0..MAX_DOUBLINGS {
            panels *= 2;
            let next = NonlocalFunctional::new(self, u.len(), p, panels)?.evaluate(u)?;
            diff = (next - prev).abs();
            prev = next;
            if diff <= tol.max(tol * next.abs()) {
                return Ok((next, diff));
            }
        }
        Err(KernelError::NonConvergent {
            value: prev,
            error_estimate: diff,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct QuadPoint {
    cell: usize,
    theta: f64,
    weight: f64,
    exponent: f64,
}

/// Precomputed quadrature for `z(u)` on a fixed uniform grid: every node
/// carries its grid cell, interpolation offset, kernel-weighted quadrature
/// weight, and the value of `p` there.
#[derive(Debug, Clone)]
pub struct NonlocalFunctional {
    n: usize,
    points: Vec<QuadPoint>,
}

impl NonlocalFunctional {
    pub fn new(kernel: &Kernel, n: usize, p: &Expression, panels: usize) -> Result<Self, KernelError> {
        let n = n.max(2);
        let cells = (n - 1) as f64;
        let grid = crate::grid::uniform_nodes(n);
        let mut raw: Vec<(f64, f64)> = Vec::new(); // (s, weight including b)
        match kernel.kind() {
            KernelKind::ConstantOne | KernelKind::Expression(_) => {
                // work in τ = 1 - s where the kernel is b(τ)
                let grading = match kernel.kind() {
                    KernelKind::ConstantOne => 1.0,
                    _ => EXPRESSION_GRADING,
                };
                let mut pts = Mesh::graded(0.0, 1.0, panels, grading).points().to_vec();
                pts.extend(grid.iter().map(|s| 1.0 - s));
                for (tau, w) in Mesh::from_points(pts).nodes() {
                    raw.push((1.0 - tau, w * kernel.eval(tau)?));
                }
            }
            KernelKind::RiemannLiouville { order } => {
                // τ = v^{1/α} absorbs the weight: ∫ b(τ) g dτ = ∫ g dv / (α Γ(α))
                let inv = 1.0 / order;
                let scale = 1.0 / libm::tgamma(order + 1.0);
                let mut pts = Mesh::graded(0.0, 1.0, panels, 2.0).points().to_vec();
                pts.extend(grid.iter().map(|s| (1.0 - s).powf(*order)));
                for (v, w) in Mesh::from_points(pts).nodes() {
                    raw.push((1.0 - v.powf(inv), w * scale));
                }
            }
        }
        let mut points = Vec::with_capacity(raw.len());
        for (s, weight) in raw {
            let s = s.clamp(0.0, 1.0);
            let exponent = p.eval(&[s])?;
            if !(exponent > 0.0) {
                return Err(KernelError::ExponentRange { t: s, value: exponent });
            }
            let x = s * cells;
            let cell = (x.floor() as usize).min(n - 2);
            points.push(QuadPoint {
                cell,
                theta: x - cell as f64,
                weight,
                exponent,
            });
        }
        Ok(Self { n, points })
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn evaluate(&self, u: &GridFunction) -> Result<f64, KernelError> {
        self.evaluate_values(u.values())
    }

    /// Same as [`NonlocalFunctional::evaluate`] on raw node values.
    pub fn evaluate_values(&self, values: &[f64]) -> Result<f64, KernelError> {
        assert_eq!(values.len(), self.n, "grid size mismatch");
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(KernelError::NegativeSample { index, value });
        }
        Ok(self.points.iter().fold(0.0, |acc, q| {
            let u = (1.0 - q.theta) * values[q.cell] + q.theta * values[q.cell + 1];
            acc + q.weight * u.powf(q.exponent)
        }))
    }

    /// `z(c·u)` for a scalar `c ≥ 0` without materializing the scaled grid.
    pub fn evaluate_scaled(&self, values: &[f64], c: f64) -> f64 {
        self.points.iter().fold(0.0, |acc, q| {
            let u = c * ((1.0 - q.theta) * values[q.cell] + q.theta * values[q.cell + 1]);
            acc + q.weight * u.max(0.0).powf(q.exponent)
        })
    }
}
