//! Command implementations and their human- and machine-readable reports.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certify::{self, Certificate, CertifyError, Theorem};
use crate::config::Run;
use crate::green::C0Mode;
use crate::kernel::KernelError;
use crate::solve::{ScanPoint, SolutionProfile, SolveError, Solver};
use crate::varexp::{self, Regime, RhoBounds};

/// Bumped whenever a report field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

/// Accepted `‖u − T u‖∞` for a reported solution.
pub const RESIDUAL_ACCEPT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    InputError,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::InputError => 2,
            Status::NumericalFailure => 3,
        }
    }
}

fn kernel_status(e: &KernelError) -> Status {
    match e {
        KernelError::NonConvergent { .. } => Status::NumericalFailure,
        _ => Status::InputError,
    }
}

pub fn certify_status(e: &CertifyError) -> Status {
    match e {
        CertifyError::Kernel(k) => kernel_status(k),
        CertifyError::Varexp(varexp::VarexpError::Kernel(k)) => kernel_status(k),
        _ => Status::InputError,
    }
}

pub fn solve_status(e: &SolveError) -> Status {
    match e {
        SolveError::NoRoot { .. } => Status::Fail,
        SolveError::DegenerateCoefficient { .. } | SolveError::Divergence { .. } | SolveError::NotConverged { .. } => {
            Status::NumericalFailure
        }
        SolveError::Kernel(k) => kernel_status(k),
        SolveError::Certify(c) => certify_status(c),
        _ => Status::InputError,
    }
}

/// `Some((p, q))` when `x` is within 1e-12 (relative) of `p/q` with `q ≤ 1000`.
pub fn as_fraction(x: f64) -> Option<(i64, i64)> {
    if !x.is_finite() || x.abs() > 1e9 {
        return None;
    }
    (1..=1000i64).find_map(|q| {
        let p = (x * q as f64).round();
        ((p / q as f64 - x).abs() <= 1e-12 * x.abs().max(1e-300)).then_some((p as i64, q))
    })
}

/// Plain decimal in a readable range, scientific otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e7).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `3/32 = 0.09375` for values with a small exact fraction, otherwise the float.
pub fn exact(x: f64) -> String {
    match as_fraction(x) {
        Some((p, 1)) => format!("{p}"),
        Some((p, q)) => format!("{p}/{q} = {}", num(x)),
        None => num(x),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub boundary: String,
    pub alpha: f64,
    pub beta: f64,
    pub eta0: f64,
    pub c0: f64,
    pub c0_mode: C0Mode,
    pub c0_coercive_inf: f64,
    pub c0_paper_sup: f64,
    pub gm: f64,
    pub partial_gm: f64,
    pub kernel: String,
    pub mass: f64,
    pub kernel_on_interval: f64,
    pub p: String,
    pub p_minus: f64,
    pub p_plus: f64,
    pub p_scanned: (f64, f64),
    pub regime: Regime,
    pub theorem: Theorem,
    pub q: Option<f64>,
    pub reverse_holder: Option<f64>,
    pub bounds_rho1: RhoBounds,
    pub bounds_rho2: RhoBounds,
    /// `M*` at `(ρ₁, ρ₂)`, convex regime only.
    pub m_star: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: String,
    pub status: Status,
    pub exit_code: i32,
    pub constants: Option<Constants>,
    pub certificate: Option<Certificate>,
    pub solutions: Option<Vec<SolutionProfile>>,
    pub scan: Option<Vec<ScanPoint>>,
    pub error: Option<String>,
}

impl Report {
    fn new(command: &str, run: &Run) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: run.name.clone(),
            status: Status::Pass,
            exit_code: 0,
            constants: None,
            certificate: None,
            solutions: None,
            scan: None,
            error: None,
        }
    }

    /// Report for a run that never got past input validation.
    pub fn input_error(command: &str, config: &str, message: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.into(),
            status: Status::InputError,
            exit_code: Status::InputError.exit_code(),
            constants: None,
            certificate: None,
            solutions: None,
            scan: None,
            error: Some(message),
        }
    }

    fn finish(mut self, status: Status, error: Option<String>) -> Self {
        self.status = status;
        self.exit_code = status.exit_code();
        self.error = error;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kvge {} · {}", self.command, self.config);
        if let Some(c) = &self.constants {
            render_constants(&mut out, c);
        }
        if let Some(c) = &self.certificate {
            render_certificate(&mut out, c);
        }
        if let Some(sols) = &self.solutions {
            for (k, s) in sols.iter().enumerate() {
                render_solution(&mut out, k, s);
            }
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(out, "status: {:?} (exit {})", self.status, self.exit_code);
        out
    }
}

fn line(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "  {label:<28} {value}");
}

fn render_constants(out: &mut String, c: &Constants) {
    let _ = writeln!(out, "constants");
    line(
        out,
        "boundary",
        format!("{} on [{}, {}]", c.boundary, exact(c.alpha), exact(c.beta)),
    );
    line(out, "eta0", exact(c.eta0));
    line(out, "C0 (coercive_inf)", exact(c.c0_coercive_inf));
    line(out, "C0 (paper_sup)", exact(c.c0_paper_sup));
    line(out, "G^M", exact(c.gm));
    line(out, "max ∫_α^β G(τ,s) ds", exact(c.partial_gm));
    line(out, "kernel b", &c.kernel);
    line(out, "mass (b*1)(1)", exact(c.mass));
    line(out, "∫_α^β b(1-s) ds", exact(c.kernel_on_interval));
    line(out, "p", &c.p);
    line(out, "p on [0,1]", format!("[{}, {}]", c.p_scanned.0, c.p_scanned.1));
    line(out, "(p-, p+)", format!("({}, {})", exact(c.p_minus), exact(c.p_plus)));
    line(out, "regime", c.regime);
    line(out, "theorem", c.theorem);
    if let Some(q) = c.q {
        line(out, "q", q);
    }
    if let Some(r) = c.reverse_holder {
        line(out, "∫ b^(1/(1-q))", r);
    }
    for b in [&c.bounds_rho1, &c.bounds_rho2] {
        line(out, &format!("rho = {}", exact(b.rho)), "");
        line(out, "  eps", num(b.eps));
        line(out, "  m_rho", exact(b.m_rho));
        line(out, &format!("  upper ({:?})", b.bound_kind), num(b.m_upper));
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_certificate(out: &mut String, c: &Certificate) {
    let _ = writeln!(
        out,
        "certificate ({}, {} regime, λ = {})",
        c.theorem, c.regime, c.lambda
    );
    line(out, "A(rho1), A(rho2)", format!("{}, {}", num(c.a_rho1), num(c.a_rho2)));
    let b = &c.f_min_box;
    line(
        out,
        "f^m",
        format!(
            "{} on [{}, {}]×[{}, {}]",
            num(b.value),
            num(b.t_lo),
            num(b.t_hi),
            num(b.u_lo),
            num(b.u_hi)
        ),
    );
    let b = &c.f_max_box;
    line(
        out,
        "f^M",
        format!(
            "{} on [{}, {}]×[{}, {}]",
            num(b.value),
            num(b.t_lo),
            num(b.t_hi),
            num(b.u_lo),
            num(b.u_hi)
        ),
    );
    line(
        out,
        "condition (1)",
        format!(
            "{} > {}  {}",
            num(c.condition1.lhs),
            num(c.condition1.rhs),
            verdict(c.condition1.pass)
        ),
    );
    if let Some(alt) = &c.condition1_with_minus_one {
        line(
            out,
            "  with the -1 term",
            format!("{} > {}  {}", num(alt.lhs), num(alt.rhs), verdict(alt.pass)),
        );
    }
    line(
        out,
        "condition (2)",
        format!(
            "{} < {}  {}",
            num(c.condition2.lhs),
            num(c.condition2.rhs),
            verdict(c.condition2.pass)
        ),
    );
    line(
        out,
        "  branches Y^p-, Y^p+",
        format!("{}, {}", num(c.condition2_branches.0), num(c.condition2_branches.1)),
    );
    line(out, "A > 0 on [rho1, rho2]", verdict(c.positivity.ok));
    let w = &c.lambda_window;
    line(out, "λ f^m threshold", num(w.threshold_min));
    line(out, "λ f^M threshold", num(w.threshold_max));
    if w.empty {
        line(out, "λ window", "empty");
    } else {
        line(out, "λ window", format!("({}, {})", num(w.lower), num(w.upper)));
    }
    line(
        out,
        "localization of ‖u‖∞",
        format!("[{}, {}]", num(c.localization.0), num(c.localization.1)),
    );
    line(out, "verdict", verdict(c.pass));
}

fn render_solution(out: &mut String, k: usize, s: &SolutionProfile) {
    let _ = writeln!(out, "solution {k}");
    line(out, "z*", num(s.z_star));
    line(out, "|Φ(z*) - z*|", num(s.outer_residual));
    line(out, "‖u - Tu‖∞", num(s.residual_sup));
    line(out, "‖u‖∞", num(s.sup_norm));
    line(out, "localization", verdict(s.localization_ok));
    line(out, "cone", verdict(s.cone_ok));
    line(out, "annulus", verdict(s.annulus_ok));
}

/// A profile counts as a solution when every check holds and the residual is small.
pub fn accepted(s: &SolutionProfile) -> bool {
    s.localization_ok && s.cone_ok && s.annulus_ok && s.residual_sup <= RESIDUAL_ACCEPT * s.sup_norm.max(1.0)
}

pub fn constants(run: &Run) -> Result<Constants, CertifyError> {
    let spec = &run.spec;
    let bm = &spec.boundary;
    let theorem = run.theorem.unwrap_or_else(|| Theorem::auto(spec));
    let nb = certify::norm_bounds(spec, theorem, run.certify.exec)?;
    let c0_of = |mode| bm.compute_c0(mode).unwrap_or(f64::NAN);
    let (pm, pp) = (spec.p.p_minus(), spec.p.p_plus());
    Ok(Constants {
        boundary: bm.name().into(),
        alpha: bm.alpha(),
        beta: bm.beta(),
        eta0: bm.eta0(),
        c0: bm.c0(),
        c0_mode: bm.c0_mode(),
        c0_coercive_inf: c0_of(C0Mode::CoerciveInf),
        c0_paper_sup: c0_of(C0Mode::PaperSup),
        gm: bm.gm(),
        partial_gm: bm.partial_gm(),
        kernel: spec.kernel.describe(),
        mass: spec.kernel.mass(),
        kernel_on_interval: spec.kernel.partial_mass(1.0 - bm.beta(), 1.0 - bm.alpha())?,
        p: spec.p.expression().pretty(),
        p_minus: pm,
        p_plus: pp,
        p_scanned: spec.p.scanned(),
        regime: spec.p.regime(),
        theorem,
        q: nb.q.map(|q| q.q),
        reverse_holder: nb.q.map(|q| q.holder),
        bounds_rho1: nb.rho1,
        bounds_rho2: nb.rho2,
        m_star: (spec.p.regime() == Regime::Convex).then(|| {
            (
                varexp::m_star(spec.rho1, pm, pp, bm.c0()),
                varexp::m_star(spec.rho2, pm, pp, bm.c0()),
            )
        }),
    })
}

pub fn cmd_constants(run: &Run) -> Report {
    let report = Report::new("constants", run);
    match constants(run) {
        Ok(c) => Report {
            constants: Some(c),
            ..report
        }
        .finish(Status::Pass, None),
        Err(e) => report.finish(certify_status(&e), Some(e.to_string())),
    }
}

pub fn cmd_certify(run: &Run) -> Report {
    let report = Report::new("certify", run);
    match certify::certify(&run.spec, run.theorem, &run.certify) {
        Ok(c) => {
            let status = if c.pass { Status::Pass } else { Status::Fail };
            Report {
                certificate: Some(c),
                ..report
            }
            .finish(status, None)
        }
        Err(e) => report.finish(certify_status(&e), Some(e.to_string())),
    }
}

pub fn cmd_solve(run: &Run) -> Report {
    let report = Report::new("solve", run);
    let solver = match Solver::new(&run.spec, run.theorem, run.solve) {
        Ok(s) => s,
        Err(e) => return report.finish(solve_status(&e), Some(e.to_string())),
    };
    match solver.outer_solve() {
        Ok(profiles) => {
            let status = if profiles.iter().any(accepted) {
                Status::Pass
            } else {
                Status::Fail
            };
            Report {
                solutions: Some(profiles),
                ..report
            }
            .finish(status, None)
        }
        Err(SolveError::NoRoot { rho1, rho2, scan }) => {
            let msg = SolveError::NoRoot {
                rho1,
                rho2,
                scan: Vec::new(),
            }
            .to_string();
            Report {
                scan: Some(scan),
                ..report
            }
            .finish(Status::Fail, Some(msg))
        }
        Err(e) => report.finish(solve_status(&e), Some(e.to_string())),
    }
}
