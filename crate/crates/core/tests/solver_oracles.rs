mod common;

use approx::assert_abs_diff_eq;
use common::*;
use kvge::grid::GridFunction;
use kvge::par::Execution;
use kvge::report;
use kvge::solve::Solver;
use rand::Rng;

fn solver(f: &str, n: usize) -> Solver {
    let run = local_problem(f, n);
    Solver::new(&run.spec, run.theorem, run.solve).unwrap()
}

#[test]
fn shooting_oracle_matches_closed_form() {
    let u = shooting_oracle(4096);
    for (k, v) in u.iter().enumerate() {
        let t = k as f64 / 4096.0;
        let exact = -4.0 + 4.0 * ((t - 0.5) / 2.0).cos() / 0.25f64.cos();
        assert_abs_diff_eq!(*v, exact, epsilon = 1e-12);
    }
}

#[test]
fn picard_matches_shooting() {
    let s = solver("1 + u/4", 257);
    let sol = s.inner_solve(0.3, &s.initial_guess()).unwrap();
    let oracle = shooting_oracle(4096);
    for (i, v) in sol.values.iter().enumerate() {
        assert_abs_diff_eq!(*v, oracle[16 * i], epsilon = 1e-6);
    }
}

#[test]
fn apply_t_preserves_the_cone() {
    let mut r = rng(11);
    let mut run = local_problem("1 + u^2 + sin(3*t)^2", 257);
    run.solve.check_tol = 1e-9;
    let s = Solver::new(&run.spec, run.theorem, run.solve).unwrap();
    for _ in 0..100 {
        let knots = random_pl(&mut r, 7, 3.0);
        let u: Vec<f64> = s.nodes().iter().map(|&t| eval_pl(&knots, t)).collect();
        let z = r.random_range(0.01..1.0);
        let tu = GridFunction::new(s.apply_t(&u, z).unwrap()).unwrap();
        let bm = &s.spec().boundary;
        let sup = tu.sup_norm();
        assert!(tu.min_on(bm.alpha(), bm.beta()) >= bm.eta0() * sup - 1e-9);
        assert!(tu.integral() >= bm.c0() * sup - 1e-9);
        let checks = s.checks(&tu, z).unwrap();
        assert!(checks.cone_ok);
    }
}

#[test]
fn apply_t_is_linear_in_f_and_lambda() {
    let n = 257;
    let (f1, f2) = ("1 + t", "sin(pi*t)^2");
    let a = solver(f1, n);
    let b = solver(f2, n);
    let sum = solver(&format!("{f1} + {f2}"), n);
    let u = vec![0.0; n];
    let (ta, tb, ts) = (
        a.apply_t(&u, 0.2).unwrap(),
        b.apply_t(&u, 0.2).unwrap(),
        sum.apply_t(&u, 0.2).unwrap(),
    );
    for i in 0..n {
        assert_abs_diff_eq!(ts[i], ta[i] + tb[i], epsilon = 1e-12);
    }
    let mut run = local_problem(f1, n);
    run.spec.lambda = 2.5;
    let scaled = Solver::new(&run.spec, run.theorem, run.solve).unwrap();
    let tl = scaled.apply_t(&u, 0.2).unwrap();
    for i in 0..n {
        assert_abs_diff_eq!(tl[i], 2.5 * ta[i], epsilon = 1e-12);
    }
}

#[test]
fn fast_and_direct_green_sums_agree() {
    let s = solver("1 + u/4", 129);
    let u: Vec<f64> = s.nodes().iter().map(|t| t * (1.0 - t)).collect();
    let fast = s.apply_t(&u, 0.1).unwrap();
    let direct = s.apply_t_direct(&u, 0.1).unwrap();
    for (x, y) in fast.iter().zip(&direct) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-14);
    }
}

#[test]
fn outer_consistency_within_ten_tol_outer() {
    for name in ["quadratic", "example212"] {
        let run = bundled(name, Execution::Parallel);
        let profiles = Solver::new(&run.spec, run.theorem, run.solve)
            .unwrap()
            .outer_solve()
            .unwrap();
        for p in profiles {
            assert!(
                p.outer_residual <= 10.0 * run.solve.tol_outer,
                "{name}: {}",
                p.outer_residual
            );
            assert!(report::accepted(&p));
        }
    }
}

#[test]
fn parallel_and_sequential_are_byte_identical() {
    for name in ["quadratic", "example212"] {
        let par = bundled(name, Execution::Parallel);
        let seq = bundled(name, Execution::Sequential);
        for cmd in [report::cmd_constants, report::cmd_certify, report::cmd_solve] {
            let (a, b) = (cmd(&par), cmd(&seq));
            assert_eq!(a.to_json(), b.to_json(), "{name}");
            if let (Some(x), Some(y)) = (&a.solutions, &b.solutions) {
                for (p, q) in x.iter().zip(y) {
                    assert_eq!(p.to_csv(), q.to_csv());
                }
            }
        }
        let sp = Solver::new(&par.spec, par.theorem, par.solve).unwrap().scan();
        let ss = Solver::new(&seq.spec, seq.theorem, seq.solve).unwrap().scan();
        assert_eq!(format!("{sp:?}"), format!("{ss:?}"));
    }
}
