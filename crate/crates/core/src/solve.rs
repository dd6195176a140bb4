//! Collocation solver. The coefficient sees `u` only through the scalar
//! `z = ∫₀¹ b(1 − s) u(s)^{p(s)} ds`, so the problem splits into a local
//! Hammerstein equation `u = T_z u` for frozen `z` and a scalar fixed point
//! `Φ(z) = z(u_z)`.

use serde::Serialize;
use thiserror::Error;

use crate::certify::{self, CertifyError, NormBounds, ProblemSpec, Theorem};
use crate::expr::EvalError;
use crate::grid::{self, GridError, GridFunction};
use crate::kernel::{KernelError, NonlocalFunctional};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("A({z}) = {value} is not positive; the coefficient degenerates")]
    DegenerateCoefficient { z: f64, value: f64 },
    #[error("Picard iteration diverged at z = {z}: residual {residual} after {iterations} iterations")]
    Divergence { z: f64, residual: f64, iterations: usize },
    #[error("Picard iteration hit {iterations} iterations at z = {z} with residual {residual}")]
    NotConverged { z: f64, residual: f64, iterations: usize },
    #[error("no self-consistent solution located in [{rho1}, {rho2}]: Φ(z) − z has no sign change on the scan")]
    NoRoot { rho1: f64, rho2: f64, scan: Vec<ScanPoint> },
    #[error("grid needs at least 3 nodes, got {0}")]
    GridSize(usize),
    #[error("initial iterate has {got} nodes, expected {expected}")]
    InitialLength { got: usize, expected: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub n_nodes: usize,
    pub tol_inner: f64,
    pub max_iters: usize,
    pub tol_outer: f64,
    pub scan_points: usize,
    /// Slack for the cone and localization checks on a computed profile.
    pub check_tol: f64,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_nodes: 257,
            tol_inner: 1e-10,
            max_iters: 10_000,
            tol_outer: 1e-10,
            scan_points: 64,
            check_tol: 1e-6,
            exec: Execution::default(),
        }
    }
}

const OMEGA_FLOOR: f64 = 1.0 / 64.0;
/// Iterations without a new best residual before the damping is halved.
const STALL_WINDOW: usize = 50;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Last sup-norm change.
    pub change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub z: f64,
    /// `Φ(z) − z`, or `None` where `A(z) ≤ 0` or the inner solve failed.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileChecks {
    pub localization_ok: bool,
    pub cone_ok: bool,
    pub annulus_ok: bool,
    pub residual_sup: f64,
    pub sup_norm: f64,
    pub min_on_interval: f64,
    pub integral: f64,
    pub localization: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionProfile {
    #[serde(skip)]
    pub u: GridFunction,
    pub z_star: f64,
    /// `|Φ(z*) − z*|`.
    pub outer_residual: f64,
    pub residual_sup: f64,
    pub sup_norm: f64,
    pub localization_ok: bool,
    pub cone_ok: bool,
    pub annulus_ok: bool,
    pub checks: ProfileChecks,
    pub inner_iterations: usize,
}

impl SolutionProfile {
    /// `t,u` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u\n");
        for (t, u) in self.u.nodes().iter().zip(self.u.values()) {
            out.push_str(&format!("{t:.16e},{u:.16e}\n"));
        }
        out
    }
}

/// Discretized problem on a fixed uniform grid.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: ProblemSpec,
    opts: SolveOptions,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    functional: NonlocalFunctional,
    bounds: NormBounds,
    depends_on_u: bool,
}

impl Solver {
    /// Norm bounds come from `theorem`, or the automatic choice.
    pub fn new(spec: &ProblemSpec, theorem: Option<Theorem>, opts: SolveOptions) -> Result<Self, SolveError> {
        spec.validate()?;
        let n = opts.n_nodes;
        if n < 3 {
            return Err(SolveError::GridSize(n));
        }
        let theorem = theorem.unwrap_or_else(|| Theorem::auto(spec));
        Ok(Self {
            spec: spec.clone(),
            opts,
            nodes: grid::uniform_nodes(n),
            weights: grid::trapezoid_weights(n),
            functional: spec.kernel.nonlocal_functional(n, spec.p.expression())?,
            bounds: certify::norm_bounds(spec, theorem, opts.exec)?,
            depends_on_u: spec.f.uses("u"),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn bounds(&self) -> &NormBounds {
        &self.bounds
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn coefficient(&self, z: f64) -> Result<f64, SolveError> {
        let a = self.spec.eval_a(z)?;
        if a > 0.0 {
            Ok(a)
        } else {
            Err(SolveError::DegenerateCoefficient { z, value: a })
        }
    }

    fn forcing(&self, u: &[f64]) -> Result<Vec<f64>, SolveError> {
        self.nodes
            .iter()
            .zip(u)
            .zip(&self.weights)
            .map(|((&s, &v), &w)| Ok(w * self.spec.eval_f(s, v)?))
            .collect()
    }

    /// `(T_z u)(tᵢ) = λ / A(z) · Σⱼ wⱼ G(tᵢ, sⱼ) f(sⱼ, uⱼ)`.
    pub fn apply_t(&self, u: &[f64], z: f64) -> Result<Vec<f64>, SolveError> {
        let scale = self.spec.lambda / self.coefficient(z)?;
        let mut v = self.spec.boundary.apply_nodes(&self.forcing(u)?);
        v.iter_mut().for_each(|x| *x *= scale);
        Ok(v)
    }

    /// [`Solver::apply_t`] summing the Green's matrix directly.
    pub fn apply_t_direct(&self, u: &[f64], z: f64) -> Result<Vec<f64>, SolveError> {
        let scale = self.spec.lambda / self.coefficient(z)?;
        let mut v = self.spec.boundary.apply_nodes_direct(&self.forcing(u)?);
        v.iter_mut().for_each(|x| *x *= scale);
        Ok(v)
    }

    /// The inner start `u₀ ≡ m_{ρ₁}`.
    pub fn initial_guess(&self) -> Vec<f64> {
        vec![self.bounds.rho1.m_rho; self.nodes.len()]
    }

    /// Damped Picard iteration for `u = T_z u`.
    pub fn inner_solve(&self, z: f64, u0: &[f64]) -> Result<InnerSolution, SolveError> {
        let n = self.nodes.len();
        if u0.len() != n {
            return Err(SolveError::InitialLength {
                got: u0.len(),
                expected: n,
            });
        }
        if !self.depends_on_u {
            let values = self.apply_t(u0, z)?;
            return Ok(InnerSolution {
                values,
                iterations: 1,
                change: 0.0,
            });
        }
        let tol = self.opts.tol_inner;
        let mut omega = 1.0;
        let mut u = u0.to_vec();
        let mut best = f64::INFINITY;
        let mut since_best = 0;
        let mut change = f64::INFINITY;
        for it in 1..=self.opts.max_iters {
            let tu = match self.apply_t(&u, z) {
                // the first iterate was evaluable, so a later failure means the iteration left the domain
                Err(SolveError::Eval(_)) if it > 1 => {
                    return Err(SolveError::Divergence {
                        z,
                        residual: f64::INFINITY,
                        iterations: it,
                    })
                }
                r => r?,
            };
            change = sup_diff(&tu, &u);
            let scale = sup(&u).max(1.0);
            if !change.is_finite() {
                return Err(SolveError::Divergence {
                    z,
                    residual: change,
                    iterations: it,
                });
            }
            if change <= tol * scale {
                return Ok(InnerSolution {
                    values: tu,
                    iterations: it,
                    change,
                });
            }
            if change < best {
                best = change;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= STALL_WINDOW {
                    omega *= 0.5;
                    if omega < OMEGA_FLOOR {
                        return Err(SolveError::Divergence {
                            z,
                            residual: change,
                            iterations: it,
                        });
                    }
                    best = change;
                    since_best = 0;
                }
            }
            for (x, y) in u.iter_mut().zip(&tu) {
                *x = ((1.0 - omega) * *x + omega * y).max(0.0);
            }
        }
        Err(SolveError::NotConverged {
            z,
            residual: change,
            iterations: self.opts.max_iters,
        })
    }

    /// `z(u)` for grid values `u`.
    pub fn nonlocal(&self, u: &[f64]) -> Result<f64, SolveError> {
        Ok(self.functional.evaluate_values(u)?)
    }

    /// `Φ(z) − z` and the inner solution behind it.
    pub fn gap(&self, z: f64) -> Result<(f64, InnerSolution), SolveError> {
        let inner = self.inner_solve(z, &self.initial_guess())?;
        Ok((self.nonlocal(&inner.values)? - z, inner))
    }

    /// Scan sample points in `[ρ₁, ρ₂]`: geometric when the ratio is at least 10.
    pub fn scan_grid(&self) -> Vec<f64> {
        let (a, b) = (self.spec.rho1, self.spec.rho2);
        let m = self.opts.scan_points.max(2);
        (0..m)
            .map(|k| {
                let s = k as f64 / (m - 1) as f64;
                if k == m - 1 {
                    b
                } else if b / a >= 10.0 {
                    a * (b / a).powf(s)
                } else {
                    a + (b - a) * s
                }
            })
            .collect()
    }

    fn scan_detailed(&self) -> Vec<(f64, Result<f64, SolveError>)> {
        let zs = self.scan_grid();
        self.opts.exec.map_slice(&zs, |&z| (z, self.gap(z).map(|(g, _)| g)))
    }

    pub fn scan(&self) -> Vec<ScanPoint> {
        self.scan_detailed()
            .into_iter()
            .map(|(z, g)| ScanPoint { z, gap: g.ok() })
            .collect()
    }

    /// Every root of `Φ(z) = z` bracketed by the scan, refined by bisection.
    /// When no sample yields a gap at all, the first sample's error is returned.
    pub fn outer_solve(&self) -> Result<Vec<SolutionProfile>, SolveError> {
        let detailed = self.scan_detailed();
        if detailed.iter().all(|(_, g)| g.is_err()) {
            if let Some((_, Err(e))) = detailed.into_iter().next() {
                return Err(e);
            }
            unreachable!("scan grid has at least two points");
        }
        let scan: Vec<ScanPoint> = detailed
            .into_iter()
            .map(|(z, g)| ScanPoint { z, gap: g.ok() })
            .collect();
        let mut brackets = Vec::new();
        for (k, w) in scan.windows(2).enumerate() {
            let (Some(ga), Some(gb)) = (w[0].gap, w[1].gap) else {
                continue;
            };
            if ga == 0.0 {
                brackets.push((w[0].z, w[0].z));
            } else if ga.signum() != gb.signum() && gb != 0.0 {
                brackets.push((w[0].z, w[1].z));
            }
            if k + 2 == scan.len() && gb == 0.0 {
                brackets.push((w[1].z, w[1].z));
            }
        }
        if brackets.is_empty() {
            return Err(SolveError::NoRoot {
                rho1: self.spec.rho1,
                rho2: self.spec.rho2,
                scan,
            });
        }
        let roots = self.opts.exec.map_slice(&brackets, |&(a, b)| self.bisect(a, b));
        roots
            .into_iter()
            .map(|r| {
                let (z, gap, inner) = r?;
                let mut profile = self.verify_profile(GridFunction::new(inner.values)?, z)?;
                profile.outer_residual = gap.abs();
                profile.inner_iterations = inner.iterations;
                Ok(profile)
            })
            .collect()
    }

    fn bisect(&self, mut a: f64, mut b: f64) -> Result<(f64, f64, InnerSolution), SolveError> {
        let (mut ga, mut inner) = self.gap(a)?;
        if a == b || ga.abs() <= self.opts.tol_outer {
            return Ok((a, ga, inner));
        }
        let (gb, inner_b) = self.gap(b)?;
        if gb.abs() <= self.opts.tol_outer {
            return Ok((b, gb, inner_b));
        }
        let mut z = a;
        let mut gz = ga;
        for _ in 0..MAX_BISECTIONS {
            z = 0.5 * (a + b);
            let (g, sol) = self.gap(z)?;
            gz = g;
            inner = sol;
            if gz.abs() <= self.opts.tol_outer || z == a || z == b {
                break;
            }
            if gz.signum() == ga.signum() {
                a = z;
                ga = gz;
            } else {
                b = z;
            }
        }
        Ok((z, gz, inner))
    }

    /// Residual, cone, localization and annulus checks for `u` at `z*`.
    pub fn checks(&self, u: &GridFunction, z_star: f64) -> Result<ProfileChecks, SolveError> {
        let tol = self.opts.check_tol;
        let bm = &self.spec.boundary;
        let tu = self.apply_t(u.values(), z_star)?;
        let residual_sup = sup_diff(&tu, u.values());
        let sup_norm = u.sup_norm();
        let min_on_interval = u.min_on(bm.alpha(), bm.beta());
        let integral = u.integral();
        let (lo, hi) = self.bounds.localization();
        Ok(ProfileChecks {
            localization_ok: sup_norm >= lo - tol && sup_norm <= hi + tol,
            cone_ok: u.values().iter().all(|&v| v >= 0.0)
                && min_on_interval >= bm.eta0() * sup_norm - tol
                && integral >= bm.c0() * sup_norm - tol,
            annulus_ok: self.spec.rho1 < z_star && z_star < self.spec.rho2,
            residual_sup,
            sup_norm,
            min_on_interval,
            integral,
            localization: (lo, hi),
        })
    }

    pub fn verify_profile(&self, u: GridFunction, z_star: f64) -> Result<SolutionProfile, SolveError> {
        let checks = self.checks(&u, z_star)?;
        let outer_residual = (self.nonlocal(u.values())? - z_star).abs();
        Ok(SolutionProfile {
            u,
            z_star,
            outer_residual,
            residual_sup: checks.residual_sup,
            sup_norm: checks.sup_norm,
            localization_ok: checks.localization_ok,
            cone_ok: checks.cone_ok,
            annulus_ok: checks.annulus_ok,
            checks,
            inner_iterations: 0,
        })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Convenience wrapper: build a [`Solver`] and run the outer search.
pub fn outer_solve(
    spec: &ProblemSpec,
    theorem: Option<Theorem>,
    opts: SolveOptions,
) -> Result<Vec<SolutionProfile>, SolveError> {
    Solver::new(spec, theorem, opts)?.outer_solve()
}
