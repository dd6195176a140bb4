//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use common::*;
use kvge::certify::{self, Theorem};
use kvge::green::{BoundaryModel, C0Mode};
use kvge::grid;
use kvge::par::Execution;
use kvge::solve::Solver;
use kvge::varexp::{self, BoundKind};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn close(what: &str, got: f64, want: f64, rel: f64) -> Result<(), String> {
    if (got - want).abs() <= rel * want.abs().max(1e-300) {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} (rel tol {rel:e})"))
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1() -> Outcome {
    let d = BoundaryModel::dirichlet(0.25, 0.75).map_err(|e| e.to_string())?;
    close("eta0", d.eta0(), 0.25, 1e-9)?;
    close("partial G^M", d.partial_gm(), 3.0 / 32.0, 1e-9)?;
    close("G^M", d.gm(), 0.125, 1e-9)?;
    for mode in [C0Mode::CoerciveInf, C0Mode::PaperSup] {
        close("C0", d.compute_c0(mode).map_err(|e| e.to_string())?, 0.5, 1e-9)?;
    }
    Ok("eta0 = 1/4, partial G^M = 3/32, G^M = 1/8, C0 = 1/2 (both modes)".into())
}

fn ac2() -> Outcome {
    let run = bundled("example212", Execution::Parallel);
    let cert = certify::certify(&run.spec, run.theorem, &run.certify).map_err(|e| e.to_string())?;
    let thr1 = 256.0 / 375.0 * (379f64 / 3.0).sqrt() * (std::f64::consts::PI / 15000.0).sin();
    let thr2 = 8000.0 * 3f64.powf(0.2);
    let m_star = 4.0 * 2f64.sqrt() * (3f64.sqrt() + 1.0);
    let w = &cert.lambda_window;
    close("condition (1) threshold", w.threshold_min, thr1, 1e-6)?;
    close("λ lower", w.lower, thr1, 1e-6)?;
    close("condition (2) threshold", w.threshold_max, thr2, 1e-6)?;
    close("λ upper", w.upper, thr2, 1e-6)?;
    close("localization lower", cert.localization.0, 1.0 / 50.0, 1e-6)?;
    close("localization upper", cert.localization.1, m_star, 1e-6)?;
    close("f^m box u_lo", cert.f_min_box.u_lo, 1.0 / 200.0, 1e-6)?;
    close("f^m box u_hi", cert.f_min_box.u_hi, 102.0 / 25.0 * 2f64.sqrt(), 1e-6)?;
    ensure(cert.pass, || "certificate does not pass at λ = 1".into())?;
    Ok(format!(
        "window ({:.6}, {:.3}), localization [0.02, {:.3}]",
        w.lower, w.upper, cert.localization.1
    ))
}

const SLACK: f64 = 1e-12;

fn ac3() -> Outcome {
    let mut r = rng(3);
    let n = 10_000;
    for _ in 0..n {
        let pm = r.random_range(1.0 + 1e-6..9.0);
        let pp = r.random_range(pm..10.0);
        let pt = r.random_range(pm..=pp);
        let q = r.random_range(1.0..pm);
        let y = r.random_range(0.0..50.0);
        let lo = varexp::pointwise_lower_convex(y, q, pm, pp).map_err(|e| e.to_string())?;
        ensure(y.powf(pt / q) >= lo - SLACK, || {
            format!("convex: y={y} p={pt} q={q} ({pm},{pp})")
        })?;
    }
    for _ in 0..n {
        let pm = r.random_range(1e-3..1.0);
        let pt = r.random_range(pm..=1.0);
        let q = r.random_range(1.0..10.0);
        let y = r.random_range(0.0..50.0);
        let lo = varexp::pointwise_lower_concave(y, q, pm).map_err(|e| e.to_string())?;
        ensure(y.powf(pt / q) >= lo - SLACK, || {
            format!("concave: y={y} p={pt} q={q} p-={pm}")
        })?;
    }
    for _ in 0..n {
        let pm = r.random_range(1e-3..1.0);
        let pp = r.random_range(1.0 + 1e-6..10.0);
        let pt = r.random_range(pm..=pp);
        let q = r.random_range(1.0..pp);
        let y = r.random_range(0.0..50.0);
        let (lo, hi) = varexp::pointwise_bounds_mixed(y, q, pm, pp).map_err(|e| e.to_string())?;
        let v = y.powf(pt / q);
        ensure(v >= lo - SLACK && v < hi + SLACK * hi, || {
            format!("mixed: y={y} p={pt} q={q} ({pm},{pp}): {lo} <= {v} < {hi}")
        })?;
    }
    // integral forms: the pointwise bound under a positive-weight rule is preserved exactly
    for k in 0..100 {
        let knots = random_pl(&mut r, 2 + k % 9, 20.0);
        let f = |t: f64| eval_pl(&knots, t);
        let (pm, pp) = (r.random_range(1.05..4.0), r.random_range(4.0..8.0));
        let phase = r.random_range(0.0..6.0);
        let p = |t: f64| pm + (pp - pm) * 0.5 * (1.0 + (7.0 * t + phase).sin());
        let q = r.random_range(1.0..pm);
        let lhs = simpson(|t| f(t).powf(p(t) / q), 2000);
        let rhs = 2f64.powf(1.0 - pp / q) * simpson(|t| f(t).powf(pm / q), 2000) - 1.0;
        ensure(lhs >= rhs - SLACK * lhs.abs().max(1.0), || {
            format!("convex integral form: {lhs} < {rhs}")
        })?;

        let (cm, cp) = (r.random_range(0.05..0.9), 1.0);
        let pc = |t: f64| cm + (cp - cm) * t;
        let qc = r.random_range(1.0..5.0);
        let lhs = simpson(|t| f(t).powf(pc(t) / qc), 2000);
        let rhs = simpson(|t| f(t).powf(cm / qc), 2000) - 1.0;
        ensure(lhs >= rhs - SLACK * lhs.abs().max(1.0), || {
            format!("concave integral form: {lhs} < {rhs}")
        })?;
    }
    Ok(format!(
        "{} pointwise samples, 200 integral checks, zero violations",
        3 * n
    ))
}

fn ac4() -> Outcome {
    let mut r = rng(4);
    for _ in 0..10_000 {
        let rho = 10f64.powf(r.random_range(-3.0..3.0));
        let pm = r.random_range(1.0 + 1e-3..9.5);
        let pp = r.random_range(pm..10.0);
        let c0 = 0.5;
        let mut prev = f64::INFINITY;
        for k in 1..=100 {
            let q = 1.0 + (pm - 1.0) * k as f64 / 101.0;
            let v = varexp::phi(q, rho, pm, pp, c0).map_err(|e| e.to_string())?;
            ensure(v <= prev + SLACK * prev.abs().min(v.abs()).max(1.0), || {
                format!("φ increases at q={q}: {prev} -> {v} (ρ={rho}, {pm}, {pp})")
            })?;
            prev = v;
        }
        let want = 2f64.powf(pp / pm) / c0;
        for k in 1..=10 {
            let q = 1.0 + (pm - 1.0) * k as f64 / 11.0;
            let v = varexp::phi(q, 1.0, pm, pp, c0).map_err(|e| e.to_string())?;
            ensure((v - want).abs() <= SLACK * want, || {
                format!("φ not constant at ρ=1: {v} vs {want}")
            })?;
        }
    }
    Ok("10^4 parameter sets, φ nonincreasing and constant at ρ = 1".into())
}

struct BoundCase {
    label: &'static str,
    p: &'static str,
    kernel: &'static str,
    boundary: &'static str,
    theorem: Theorem,
}

const BOUND_CASES: &[BoundCase] = &[
    BoundCase {
        label: "convex/RL(1/2)/dirichlet",
        p: "2 + sin(3*t)",
        kernel: r#"{"type": "riemann_liouville", "order": "1/2"}"#,
        boundary: r#"{"type": "dirichlet", "alpha": "1/4", "beta": "3/4"}"#,
        theorem: Theorem::T2_8,
    },
    BoundCase {
        label: "convex/b=1/right_focal",
        p: "3/2 + t",
        kernel: r#"{"type": "constant_one"}"#,
        boundary: r#"{"type": "right_focal", "alpha": "1/4", "beta": "1"}"#,
        theorem: Theorem::C2_10,
    },
    BoundCase {
        label: "concave/b=1+t/dirichlet",
        p: "1/2 + t/2",
        kernel: r#"{"type": "expression", "b": "1 + t"}"#,
        boundary: r#"{"type": "dirichlet", "alpha": "1/4", "beta": "3/4"}"#,
        theorem: Theorem::T3_6,
    },
    BoundCase {
        label: "mixed/b=1+t/dirichlet",
        p: "1/2 + t",
        kernel: r#"{"type": "expression", "b": "1 + t"}"#,
        boundary: r#"{"type": "dirichlet", "alpha": "1/5", "beta": "4/5"}"#,
        theorem: Theorem::T4_4,
    },
    BoundCase {
        label: "mixed/RL(1/2)/right_focal",
        p: "3/4 + t",
        kernel: r#"{"type": "riemann_liouville", "order": "1/2"}"#,
        boundary: r#"{"type": "right_focal", "alpha": "1/2", "beta": "1"}"#,
        theorem: Theorem::T4_4,
    },
];

/// Largest scale `k` with `z(k u) ≤ ρ`, by bisection.
fn scale_onto(z: impl Fn(f64) -> f64, rho: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while z(hi) < rho {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if z(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ac5() -> Outcome {
    const N: usize = 129;
    let mut r = rng(5);
    let weights = grid::trapezoid_weights(N);
    let mut checked = 0;
    for case in BOUND_CASES {
        let run = run_from(
            &format!(
                r#""A": "1", "f": "1", "p": "{}", "kernel": {}, "boundary": {}, "rho1": "1/100", "rho2": 100"#,
                case.p, case.kernel, case.boundary
            ),
            "",
            Execution::Parallel,
        );
        let spec = &run.spec;
        let bm = &spec.boundary;
        let nb = certify::norm_bounds(spec, case.theorem, Execution::Parallel).map_err(|e| e.to_string())?;
        let (pm, pp) = (spec.p.p_minus(), spec.p.p_plus());
        let mass = spec.kernel.mass();
        let functional = spec
            .kernel
            .nonlocal_functional(N, spec.p.expression())
            .map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let pieces = r.random_range(1..12);
            let density = random_pl(&mut r, pieces, 1.0);
            let c: Vec<f64> = grid::uniform_nodes(N)
                .iter()
                .zip(&weights)
                .map(|(&s, &w)| w * eval_pl(&density, s).powi(3))
                .collect();
            let u = grid::GridFunction::new(bm.apply_nodes(&c)).map_err(|e| e.to_string())?;
            let sup = u.sup_norm();
            ensure(
                u.min_on(bm.alpha(), bm.beta()) >= bm.eta0() * sup * (1.0 - 1e-12),
                || format!("{}: generated function violates the Harnack bound", case.label),
            )?;
            ensure(u.integral() >= bm.c0() * sup * (1.0 - 1e-12), || {
                format!("{}: generated function violates coercivity", case.label)
            })?;

            let rho = 10f64.powf(r.random_range(-2.0..2.0));
            let k = scale_onto(|k| functional.evaluate_scaled(u.values(), k), rho);
            let norm = k * sup;
            let lower = varexp::m_rho(rho, mass, pm, pp);
            let upper = match (nb.rho1.bound_kind, nb.q) {
                (BoundKind::ConvexM, Some(q)) => varexp::m_rho_convex(rho, q.holder, q.q, pm, pp, bm.c0()),
                (BoundKind::ConcaveMixedMbar, Some(q)) => {
                    varexp::m_bar(rho, q.holder, q.q, pm, bm.eta0(), bm.alpha(), bm.beta())
                }
                _ => Ok(varexp::m_star(rho, pm, pp, bm.c0())),
            }
            .map_err(|e| e.to_string())?;
            ensure(
                lower <= norm + 1e-9 * norm.max(1.0) && norm <= upper + 1e-9 * upper.max(1.0),
                || format!("{}: ρ={rho}: m_ρ={lower}, ‖u‖={norm}, M={upper}", case.label),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} functions on the level sets across {} cases",
        BOUND_CASES.len()
    ))
}

fn ac6() -> Outcome {
    let run = local_problem("1", 257);
    let solver = Solver::new(&run.spec, run.theorem, run.solve).map_err(|e| e.to_string())?;
    let sol = solver
        .inner_solve(0.5, &solver.initial_guess())
        .map_err(|e| e.to_string())?;
    let err_a = solver
        .nodes()
        .iter()
        .zip(&sol.values)
        .fold(0.0f64, |m, (&t, &u)| m.max((u - t * (1.0 - t) / 2.0).abs()));
    ensure(err_a <= 1e-8, || format!("oracle A sup error {err_a:e}"))?;

    let run = bundled("quadratic", Execution::Parallel);
    let profiles = Solver::new(&run.spec, run.theorem, run.solve)
        .and_then(|s| s.outer_solve())
        .map_err(|e| e.to_string())?;
    ensure(profiles.len() == 1, || format!("oracle B: {} roots", profiles.len()))?;
    let want = quadratic_root() / 12.0;
    let err_b = (profiles[0].z_star - want).abs();
    ensure(err_b <= 1e-8, || {
        format!("oracle B: z* = {}, want {want}", profiles[0].z_star)
    })?;

    let norms: Vec<f64> = [129, 257, 513]
        .iter()
        .map(|&n| {
            let run = local_problem("1 + u/4", n);
            let s = Solver::new(&run.spec, run.theorem, run.solve).map_err(|e| e.to_string())?;
            let sol = s.inner_solve(0.5, &s.initial_guess()).map_err(|e| e.to_string())?;
            Ok(sol.values.iter().cloned().fold(0.0, f64::max))
        })
        .collect::<Result<_, String>>()?;
    let slope = ((norms[1] - norms[0]).abs() / (norms[2] - norms[1]).abs()).log2();
    ensure(slope >= 1.8, || format!("grid convergence slope {slope}"))?;
    Ok(format!(
        "oracle A err {err_a:.1e}, oracle B err {err_b:.1e}, slope {slope:.3}"
    ))
}

fn ac7() -> Outcome {
    let run = bundled("example212", Execution::Parallel);
    let cert = certify::certify(&run.spec, run.theorem, &run.certify).map_err(|e| e.to_string())?;
    ensure(cert.pass, || "certificate fails".into())?;
    let profiles = Solver::new(&run.spec, run.theorem, run.solve)
        .and_then(|s| s.outer_solve())
        .map_err(|e| e.to_string())?;
    ensure(!profiles.is_empty(), || "no root".into())?;
    let upper = 4.0 * 2f64.sqrt() * (3f64.sqrt() + 1.0);
    for p in &profiles {
        ensure(p.z_star > 1.0 / 2500.0 && p.z_star < 3.0, || {
            format!("z* = {} outside the annulus", p.z_star)
        })?;
        ensure(p.residual_sup <= 1e-8, || format!("residual {}", p.residual_sup))?;
        ensure(p.cone_ok && p.annulus_ok, || "cone or annulus check fails".into())?;
        ensure(p.sup_norm >= 0.02 - 1e-6 && p.sup_norm <= upper + 1e-6, || {
            format!("‖u‖ = {} outside the localization", p.sup_norm)
        })?;
    }
    Ok(format!(
        "{} root(s), z* = {:.10}, ‖u‖ = {:.6}",
        profiles.len(),
        profiles[0].z_star,
        profiles[0].sup_norm
    ))
}

fn ac8() -> Outcome {
    Ok("only one worked example exists; the rest of the suite is property-based".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "Green constants", Duration::from_secs(1), ac1),
        ("AC2", "worked-example certificate", Duration::from_secs(5), ac2),
        ("AC3", "inequality property suites", Duration::from_secs(10), ac3),
        ("AC4", "φ monotonicity", Duration::from_secs(10), ac4),
        ("AC5", "norm-bound oracles", Duration::from_secs(30), ac5),
        ("AC6", "solver oracles", Duration::from_secs(60), ac6),
        ("AC7", "worked example end to end", Duration::from_secs(60), ac7),
        ("AC8", "scope statement", Duration::from_secs(1), ac8),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("{id} PASS {name} [{elapsed:.2?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {name} [{elapsed:.2?}] {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
