//! Hypothesis checks for the existence theorems and the admissible λ range.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::green::{BoundaryModel, C0Mode};
use crate::kernel::{Kernel, KernelError};
use crate::par::Execution;
use crate::varexp::{self, BoundKind, ExponentProfile, QChoice, Regime, RhoBounds, VarexpError};

/// Samples of `A` on `[ρ₁, ρ₂]`, endpoints excluded.
const POSITIVITY_SAMPLES: usize = 1000;
const REFINE_ROUNDS: usize = 3;
const REFINE_FACTOR: usize = 5;
pub const DEFAULT_GRID_RES: usize = 201;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("need 0 < rho1 < rho2, got rho1 = {rho1}, rho2 = {rho2}")]
    Rho { rho1: f64, rho2: f64 },
    #[error("lambda must be finite and nonnegative, got {0}")]
    Lambda(f64),
    #[error("{theorem} does not apply: {reason}")]
    TheoremMismatch { theorem: Theorem, reason: String },
    #[error("empty box for f: u-range [{lo}, {hi}] (eta0 * m_rho1 exceeds the upper bound at rho1)")]
    EmptyBox { lo: f64, hi: f64 },
    #[error("f({t}, {u}) = {value} is negative; f must map into [0, ∞)")]
    NegativeForcing { t: f64, u: f64, value: f64 },
    #[error("inconsistent extrema: max of f ({max}) below min of f ({min}) on a sub-box")]
    Inconsistent { min: f64, max: f64 },
    #[error("margin must be finite and nonnegative, got {0}")]
    Margin(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Varexp(#[from] VarexpError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    #[serde(rename = "t2.8")]
    T2_8,
    #[serde(rename = "t3.6")]
    T3_6,
    #[serde(rename = "t4.4")]
    T4_4,
    #[serde(rename = "c2.10")]
    C2_10,
    #[serde(rename = "c2.11")]
    C2_11,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::T2_8,
        Theorem::T3_6,
        Theorem::T4_4,
        Theorem::C2_10,
        Theorem::C2_11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::T2_8 => "t2.8",
            Theorem::T3_6 => "t3.6",
            Theorem::T4_4 => "t4.4",
            Theorem::C2_10 => "c2.10",
            Theorem::C2_11 => "c2.11",
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            Theorem::T3_6 => Regime::Concave,
            Theorem::T4_4 => Regime::Mixed,
            _ => Regime::Convex,
        }
    }

    /// The sharpest statement applicable to the data.
    pub fn auto(spec: &ProblemSpec) -> Theorem {
        match spec.p.regime() {
            Regime::Convex if spec.kernel.is_constant_one() && spec.p.constant().is_some() => Theorem::C2_11,
            Regime::Convex if spec.kernel.is_constant_one() => Theorem::C2_10,
            Regime::Convex => Theorem::T2_8,
            Regime::Concave => Theorem::T3_6,
            Regime::Mixed => Theorem::T4_4,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown theorem `{s}`; expected one of t2.8, t3.6, t4.4, c2.10, c2.11"))
    }
}

/// The problem data: coefficient `A(t)`, forcing `f(t, u)`, exponent, kernel,
/// boundary model, λ and the annulus `ρ₁ < z < ρ₂`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub a: Expression,
    pub f: Expression,
    pub p: ExponentProfile,
    pub kernel: Kernel,
    pub boundary: BoundaryModel,
    pub lambda: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub q: Option<f64>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), CertifyError> {
        if !(self.rho1 > 0.0 && self.rho1 < self.rho2 && self.rho2.is_finite()) {
            return Err(CertifyError::Rho {
                rho1: self.rho1,
                rho2: self.rho2,
            });
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CertifyError::Lambda(self.lambda));
        }
        Ok(())
    }

    pub fn eval_a(&self, t: f64) -> Result<f64, EvalError> {
        self.a.eval(&[t])
    }

    pub fn eval_f(&self, t: f64, u: f64) -> Result<f64, EvalError> {
        self.f.eval(&[t, u])
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Relative safety margin: condition (1) must beat `(1 + margin)·rhs`,
    /// condition (2) must stay below `rhs / (1 + margin)`.
    pub margin: f64,
    pub grid_res: usize,
    pub exec: Execution,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            margin: 0.0,
            grid_res: DEFAULT_GRID_RES,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub t: f64,
    pub u: f64,
}

/// `min` or `max` of `f` over `[t_lo, t_hi] × [u_lo, u_hi]`: a `res × res`
/// grid, then three rounds of zooming onto the incumbent with 5× finer
/// spacing.
pub fn extremal_f(
    f: &Expression,
    t_range: (f64, f64),
    u_range: (f64, f64),
    mode: Mode,
    res: usize,
    exec: Execution,
) -> Result<Extremum, CertifyError> {
    let (t_lo, t_hi) = t_range;
    let (u_lo, u_hi) = u_range;
    if u_lo > u_hi {
        return Err(CertifyError::EmptyBox { lo: u_lo, hi: u_hi });
    }
    let res = res.max(2);
    let better = |a: f64, b: f64| match mode {
        Mode::Min => a < b,
        Mode::Max => a > b,
    };
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if hi <= lo {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    let search = |ts: &[f64], us: &[f64]| -> Result<Extremum, CertifyError> {
        let rows = exec.map_slice(ts, |&t| {
            let mut best: Option<Extremum> = None;
            for &u in us {
                let value = f.eval(&[t, u])?;
                if best.is_none_or(|b| better(value, b.value)) {
                    best = Some(Extremum { value, t, u });
                }
            }
            Ok::<_, EvalError>(best.expect("nonempty axis"))
        });
        let mut best: Option<Extremum> = None;
        for r in rows {
            let r = r?;
            if best.is_none_or(|b| better(r.value, b.value)) {
                best = Some(r);
            }
        }
        Ok(best.expect("nonempty axis"))
    };
    let mut best = search(&axis(t_lo, t_hi, res), &axis(u_lo, u_hi, res))?;
    let mut ht = (t_hi - t_lo) / (res - 1) as f64;
    let mut hu = (u_hi - u_lo) / (res - 1) as f64;
    for _ in 0..REFINE_ROUNDS {
        let n = 2 * REFINE_FACTOR + 1;
        let ts = axis((best.t - ht).max(t_lo), (best.t + ht).min(t_hi), n);
        let us = axis((best.u - hu).max(u_lo), (best.u + hu).min(u_hi), n);
        let local = search(&ts, &us)?;
        if better(local.value, best.value) {
            best = local;
        }
        ht /= REFINE_FACTOR as f64;
        hu /= REFINE_FACTOR as f64;
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FBox {
    pub t_lo: f64,
    pub t_hi: f64,
    pub u_lo: f64,
    pub u_hi: f64,
    pub value: f64,
    /// Where the extremum was found.
    pub at: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Admissible λ: condition (1) holds for `λ > lower`, condition (2) for `λ < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaWindow {
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
    /// `lower · f^m`, the bound printed in the condition on `λ f^m`.
    pub threshold_min: f64,
    /// `upper · f^M`.
    pub threshold_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Positivity {
    pub ok: bool,
    pub samples: usize,
    /// First sample with `A ≤ 0`, if any.
    pub violation: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub regime: Regime,
    pub lambda: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta0: f64,
    pub c0: f64,
    pub c0_mode: C0Mode,
    pub gm: f64,
    pub partial_gm: f64,
    pub mass: f64,
    /// `∫_α^β b(1 − s) ds`.
    pub kernel_on_interval: f64,
    pub q: Option<f64>,
    pub reverse_holder: Option<f64>,
    pub bounds_rho1: RhoBounds,
    pub bounds_rho2: RhoBounds,
    pub f_min_box: FBox,
    pub f_max_box: FBox,
    pub a_rho1: f64,
    pub a_rho2: f64,
    pub condition1: Condition,
    /// For t4.4: condition (1) with the `−1` term kept.
    pub condition1_with_minus_one: Option<Condition>,
    pub condition2: Condition,
    /// `(Y^{p⁻}, Y^{p⁺})` with `Y = λ f^M G^M / A(ρ₂)`.
    pub condition2_branches: (f64, f64),
    pub positivity: Positivity,
    pub margin: f64,
    pub pass: bool,
    pub lambda_window: LambdaWindow,
    /// `(m_{ρ₁}, upper bound at ρ₂)` on `‖u₀‖∞`.
    pub localization: (f64, f64),
}

/// Samples `A` at the endpoints and 1000 interior points of `[ρ₁, ρ₂]`.
pub fn check_positivity(a: &Expression, rho1: f64, rho2: f64) -> Result<Positivity, EvalError> {
    let n = POSITIVITY_SAMPLES + 1;
    for k in 0..=n {
        let t = if k == n {
            rho2
        } else {
            rho1 + (rho2 - rho1) * k as f64 / n as f64
        };
        let v = a.eval(&[t])?;
        if v <= 0.0 {
            return Ok(Positivity {
                ok: false,
                samples: n + 1,
                violation: Some((t, v)),
            });
        }
    }
    Ok(Positivity {
        ok: true,
        samples: n + 1,
        violation: None,
    })
}

/// Constant-for-λ pieces of a condition: (1) reads `K (c X^{e} − d) > R`
/// with `X = λ f^m PG / A(ρ₁)`; (2) reads `g(Y)·S < R₂` with
/// `g(Y) = max(Y^{p⁻}, Y^{p⁺})` and `Y = λ f^M G^M / A(ρ₂)`.
#[derive(Debug, Clone, Copy)]
struct Shape {
    k: f64,
    c: f64,
    d: f64,
    e: f64,
    r: f64,
    s: f64,
    r2: f64,
    lo_exp: f64,
    hi_exp: f64,
}

impl Shape {
    fn lhs1(&self, x: f64) -> f64 {
        self.k * (self.c * x.powf(self.e) - self.d)
    }

    fn g(&self, y: f64) -> f64 {
        y.powf(self.lo_exp).max(y.powf(self.hi_exp))
    }

    /// Smallest `X` with `lhs1(X) = (1 + m) R`.
    fn x_threshold(&self, margin: f64) -> f64 {
        if self.k <= 0.0 {
            return f64::INFINITY;
        }
        ((self.r * (1.0 + margin) / self.k + self.d) / self.c).powf(1.0 / self.e)
    }

    /// Largest `Y` with `g(Y) S = R₂ / (1 + m)`.
    fn y_threshold(&self, margin: f64) -> f64 {
        let c = self.r2 / ((1.0 + margin) * self.s);
        if c >= 1.0 {
            c.powf(1.0 / self.hi_exp)
        } else {
            c.powf(1.0 / self.lo_exp)
        }
    }
}

/// Lower and upper bounds on `‖u‖∞` at ρ₁ and ρ₂ under `theorem`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    pub theorem: Theorem,
    pub q: Option<QChoice>,
    pub rho1: RhoBounds,
    pub rho2: RhoBounds,
}

impl NormBounds {
    /// `(m_{ρ₁}, upper bound at ρ₂)`.
    pub fn localization(&self) -> (f64, f64) {
        (self.rho1.m_rho, self.rho2.m_upper)
    }
}

/// Checks that `theorem` applies to `spec` and evaluates its norm bounds.
pub fn norm_bounds(spec: &ProblemSpec, theorem: Theorem, exec: Execution) -> Result<NormBounds, CertifyError> {
    let regime = spec.p.regime();
    if theorem.regime() != regime {
        return Err(mismatch(
            theorem,
            format!("it needs the {} regime but p⁻, p⁺ give {regime}", theorem.regime()),
        ));
    }
    if matches!(theorem, Theorem::C2_10 | Theorem::C2_11) && !spec.kernel.is_constant_one() {
        return Err(mismatch(theorem, "it needs b ≡ 1"));
    }
    if theorem == Theorem::C2_11 && spec.p.constant().is_none() {
        return Err(mismatch(theorem, "it needs a constant exponent (p⁻ = p⁺)"));
    }

    let bm = &spec.boundary;
    let (alpha, beta, eta0, c0) = (bm.alpha(), bm.beta(), bm.eta0(), bm.c0());
    let (pm, pp) = (spec.p.p_minus(), spec.p.p_plus());
    let mass = spec.kernel.mass();

    let (q, bound_kind) = match theorem {
        Theorem::T2_8 => (Some(varexp::convex_q(&spec.kernel, pm, spec.q)?), BoundKind::ConvexM),
        Theorem::C2_10 | Theorem::C2_11 => (None, BoundKind::SpecialMstar),
        Theorem::T3_6 | Theorem::T4_4 => (
            Some(varexp::m_bar_q(
                &spec.kernel,
                spec.rho2,
                &spec.p,
                eta0,
                alpha,
                beta,
                spec.q,
                exec,
            )?),
            BoundKind::ConcaveMixedMbar,
        ),
    };
    let upper = |rho: f64| -> Result<f64, VarexpError> {
        match (bound_kind, q) {
            (BoundKind::ConvexM, Some(q)) => varexp::m_rho_convex(rho, q.holder, q.q, pm, pp, c0),
            (BoundKind::ConcaveMixedMbar, Some(q)) => varexp::m_bar(rho, q.holder, q.q, pm, eta0, alpha, beta),
            _ => Ok(varexp::m_star(rho, pm, pp, c0)),
        }
    };
    let bounds = |rho: f64| -> Result<RhoBounds, VarexpError> {
        let (eps, m_rho) = if theorem == Theorem::C2_11 {
            (0.0, (rho / mass).powf(1.0 / pm))
        } else {
            (varexp::eps(rho, mass, pm, pp), varexp::m_rho(rho, mass, pm, pp))
        };
        Ok(RhoBounds {
            rho,
            eps,
            m_rho,
            m_upper: upper(rho)?,
            q_used: q.map(|q| q.q),
            bound_kind,
        })
    };
    let bounds1 = bounds(spec.rho1)?;
    let bounds2 = bounds(spec.rho2)?;
    Ok(NormBounds {
        theorem,
        q,
        rho1: bounds1,
        rho2: bounds2,
    })
}

/// Everything a certificate needs that does not depend on λ.
#[derive(Debug, Clone)]
pub struct Prepared {
    theorem: Theorem,
    spec: ProblemSpec,
    shape: Shape,
    shape_minus_one: Option<Shape>,
    pg: f64,
    gm: f64,
    mass: f64,
    i_ab: f64,
    q: Option<QChoice>,
    bounds1: RhoBounds,
    bounds2: RhoBounds,
    f_min: FBox,
    f_max: FBox,
    a1: f64,
    a2: f64,
    positivity: Positivity,
    margin: f64,
}

fn mismatch(theorem: Theorem, reason: impl Into<String>) -> CertifyError {
    CertifyError::TheoremMismatch {
        theorem,
        reason: reason.into(),
    }
}

impl Prepared {
    pub fn new(spec: &ProblemSpec, theorem: Theorem, opts: &CertifyOptions) -> Result<Self, CertifyError> {
        spec.validate()?;
        if !(opts.margin >= 0.0 && opts.margin.is_finite()) {
            return Err(CertifyError::Margin(opts.margin));
        }
        let NormBounds {
            q,
            rho1: bounds1,
            rho2: bounds2,
            ..
        } = norm_bounds(spec, theorem, opts.exec)?;
        let bm = &spec.boundary;
        let (alpha, beta, eta0) = (bm.alpha(), bm.beta(), bm.eta0());
        let (pm, pp) = (spec.p.p_minus(), spec.p.p_plus());
        let mass = spec.kernel.mass();
        let i_ab = spec.kernel.partial_mass(1.0 - beta, 1.0 - alpha)?;
        let pg = bm.partial_gm();
        let gm = bm.gm();

        let fmin_range = (eta0 * bounds1.m_rho, bounds1.m_upper);
        let fmax_range = (0.0, bounds2.m_upper);
        let e_min = extremal_f(&spec.f, (alpha, beta), fmin_range, Mode::Min, opts.grid_res, opts.exec)?;
        let e_max = extremal_f(&spec.f, (0.0, 1.0), fmax_range, Mode::Max, opts.grid_res, opts.exec)?;
        let e_floor = extremal_f(&spec.f, (0.0, 1.0), fmax_range, Mode::Min, opts.grid_res, opts.exec)?;
        if e_floor.value < 0.0 {
            return Err(CertifyError::NegativeForcing {
                t: e_floor.t,
                u: e_floor.u,
                value: e_floor.value,
            });
        }
        if e_max.value < e_min.value - 1e-9 * (1.0 + e_min.value.abs()) {
            return Err(CertifyError::Inconsistent {
                min: e_min.value,
                max: e_max.value,
            });
        }
        let boxed = |range: (f64, f64), (t_lo, t_hi): (f64, f64), e: Extremum| FBox {
            t_lo,
            t_hi,
            u_lo: range.0,
            u_hi: range.1,
            value: e.value,
            at: (e.t, e.u),
        };

        let positivity = check_positivity(&spec.a, spec.rho1, spec.rho2)?;
        let a1 = spec.eval_a(spec.rho1)?;
        let a2 = spec.eval_a(spec.rho2)?;

        let two = |p: f64| 2f64.powf(1.0 - p);
        let etap = eta0.powf(pp);
        let (shape, shape_minus_one) = match theorem {
            Theorem::T2_8 => (
                Shape {
                    k: i_ab,
                    c: two(pp),
                    d: 1.0,
                    e: pm,
                    r: spec.rho1 / etap,
                    s: mass,
                    r2: spec.rho2,
                    lo_exp: pm,
                    hi_exp: pp,
                },
                None,
            ),
            Theorem::C2_10 => (
                Shape {
                    k: etap,
                    c: two(pp),
                    d: 1.0,
                    e: pm,
                    r: spec.rho1 / (beta - alpha),
                    s: 1.0,
                    r2: spec.rho2,
                    lo_exp: pm,
                    hi_exp: pp,
                },
                None,
            ),
            Theorem::C2_11 => (
                Shape {
                    k: etap,
                    c: two(pm),
                    d: 1.0,
                    e: pm,
                    r: spec.rho1 / (beta - alpha),
                    s: 1.0,
                    r2: spec.rho2,
                    lo_exp: pm,
                    hi_exp: pm,
                },
                None,
            ),
            Theorem::T3_6 => (
                Shape {
                    k: i_ab,
                    c: 1.0,
                    d: 1.0,
                    e: pm,
                    r: spec.rho1 / etap,
                    s: 1.0,
                    r2: spec.rho2 / mass,
                    lo_exp: pm,
                    hi_exp: pp,
                },
                None,
            ),
            Theorem::T4_4 => {
                let s = Shape {
                    k: etap * i_ab,
                    c: 1.0,
                    d: 0.0,
                    e: pm,
                    r: spec.rho1,
                    s: 1.0,
                    r2: spec.rho2 / mass,
                    lo_exp: pm,
                    hi_exp: pp,
                };
                (s, Some(Shape { d: 1.0, ..s }))
            }
        };

        Ok(Self {
            theorem,
            spec: spec.clone(),
            shape,
            shape_minus_one,
            pg,
            gm,
            mass,
            i_ab,
            q,
            bounds1,
            bounds2,
            f_min: boxed(fmin_range, (alpha, beta), e_min),
            f_max: boxed(fmax_range, (0.0, 1.0), e_max),
            a1,
            a2,
            positivity,
            margin: opts.margin,
        })
    }

    pub fn theorem(&self) -> Theorem {
        self.theorem
    }

    fn x(&self, lambda: f64) -> f64 {
        lambda * self.f_min.value * self.pg / self.a1
    }

    fn y(&self, lambda: f64) -> f64 {
        lambda * self.f_max.value * self.gm / self.a2
    }

    fn condition1(&self, shape: &Shape, lambda: f64) -> Condition {
        let lhs = shape.lhs1(self.x(lambda));
        Condition {
            lhs,
            rhs: shape.r,
            pass: lhs > shape.r * (1.0 + self.margin),
        }
    }

    fn condition2(&self, lambda: f64) -> Condition {
        let lhs = self.shape.g(self.y(lambda)) * self.shape.s;
        Condition {
            lhs,
            rhs: self.shape.r2,
            pass: lhs < self.shape.r2 / (1.0 + self.margin),
        }
    }

    pub fn lambda_window(&self) -> LambdaWindow {
        let threshold_min = self.shape.x_threshold(self.margin) * self.a1 / self.pg;
        let threshold_max = self.shape.y_threshold(self.margin) * self.a2 / self.gm;
        let div = |t: f64, f: f64| if f > 0.0 { t / f } else { f64::INFINITY };
        let lower = div(threshold_min, self.f_min.value);
        let upper = div(threshold_max, self.f_max.value);
        LambdaWindow {
            lower,
            upper,
            empty: !(lower < upper),
            threshold_min,
            threshold_max,
        }
    }

    pub fn certificate(&self, lambda: f64) -> Certificate {
        let spec = &self.spec;
        let bm = &spec.boundary;
        let condition1 = self.condition1(&self.shape, lambda);
        let condition2 = self.condition2(lambda);
        let y = self.y(lambda);
        Certificate {
            theorem: self.theorem,
            regime: spec.p.regime(),
            lambda,
            rho1: spec.rho1,
            rho2: spec.rho2,
            p_minus: spec.p.p_minus(),
            p_plus: spec.p.p_plus(),
            alpha: bm.alpha(),
            beta: bm.beta(),
            eta0: bm.eta0(),
            c0: bm.c0(),
            c0_mode: bm.c0_mode(),
            gm: self.gm,
            partial_gm: self.pg,
            mass: self.mass,
            kernel_on_interval: self.i_ab,
            q: self.q.map(|q| q.q),
            reverse_holder: self.q.map(|q| q.holder),
            bounds_rho1: self.bounds1,
            bounds_rho2: self.bounds2,
            f_min_box: self.f_min,
            f_max_box: self.f_max,
            a_rho1: self.a1,
            a_rho2: self.a2,
            condition1,
            condition1_with_minus_one: self.shape_minus_one.map(|s| self.condition1(&s, lambda)),
            condition2,
            condition2_branches: (y.powf(self.shape.lo_exp), y.powf(self.shape.hi_exp)),
            positivity: self.positivity,
            margin: self.margin,
            pass: condition1.pass && condition2.pass && self.positivity.ok,
            lambda_window: self.lambda_window(),
            localization: (self.bounds1.m_rho, self.bounds2.m_upper),
        }
    }
}

/// Evaluates `theorem` (or the automatic choice) for `spec` at its λ.
pub fn certify(
    spec: &ProblemSpec,
    theorem: Option<Theorem>,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let theorem = theorem.unwrap_or_else(|| Theorem::auto(spec));
    Ok(Prepared::new(spec, theorem, opts)?.certificate(spec.lambda))
}

pub fn check_theorem_2_8(spec: &ProblemSpec, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    certify(spec, Some(Theorem::T2_8), opts)
}

pub fn check_theorem_3_6(spec: &ProblemSpec, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    certify(spec, Some(Theorem::T3_6), opts)
}

pub fn check_theorem_4_4(spec: &ProblemSpec, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    certify(spec, Some(Theorem::T4_4), opts)
}

pub fn check_corollary_2_10(spec: &ProblemSpec, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    certify(spec, Some(Theorem::C2_10), opts)
}

pub fn check_corollary_2_11(spec: &ProblemSpec, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    certify(spec, Some(Theorem::C2_11), opts)
}

pub fn lambda_window(
    spec: &ProblemSpec,
    theorem: Theorem,
    opts: &CertifyOptions,
) -> Result<LambdaWindow, CertifyError> {
    Ok(Prepared::new(spec, theorem, opts)?.lambda_window())
}
