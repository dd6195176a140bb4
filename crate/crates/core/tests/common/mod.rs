#![allow(dead_code)]

use kvge::config::{self, Run};
use kvge::par::Execution;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn bundled(name: &str, exec: Execution) -> Run {
    config::load_config(name).unwrap().build(exec).unwrap()
}

/// A run from inline JSON `problem` fields plus optional `numerics`.
pub fn run_from(problem: &str, numerics: &str, exec: Execution) -> Run {
    let text = format!(r#"{{"problem": {{{problem}}}, "numerics": {{{numerics}}}}}"#);
    config::parse_config(&text).unwrap().build(exec).unwrap()
}

/// Dirichlet on [1/4, 3/4] with constant A and the given forcing.
pub fn local_problem(f: &str, n_nodes: usize) -> Run {
    run_from(
        &format!(
            r#""A": "1", "f": "{f}", "p": "1", "kernel": {{"type": "constant_one"}},
               "boundary": {{"type": "dirichlet", "alpha": "1/4", "beta": "3/4"}},
               "rho1": "1/100", "rho2": 1"#
        ),
        &format!(r#""n_nodes": {n_nodes}, "tol_inner": 1e-13"#),
        Execution::Sequential,
    )
}

/// Nonnegative piecewise-linear function on `pieces` equal cells.
pub fn random_pl(rng: &mut StdRng, pieces: usize, max: f64) -> Vec<f64> {
    (0..=pieces).map(|_| rng.random_range(0.0..max)).collect()
}

pub fn eval_pl(knots: &[f64], t: f64) -> f64 {
    let m = knots.len() - 1;
    let x = (t * m as f64).min(m as f64 - 1e-15);
    let k = x.floor() as usize;
    let w = x - k as f64;
    knots[k] * (1.0 - w) + knots[k + 1] * w
}

/// Composite Simpson on `[0, 1]` with `2 m` intervals.
pub fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    acc * h / 3.0
}

/// RK4 for `u'' = g(t, u)`, returning `u` at `steps + 1` uniform points.
pub fn rk4_second_order(g: impl Fn(f64, f64) -> f64, u0: f64, v0: f64, steps: usize) -> Vec<f64> {
    let h = 1.0 / steps as f64;
    let (mut t, mut u, mut v) = (0.0, u0, v0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(u);
    for _ in 0..steps {
        let (k1u, k1v) = (v, g(t, u));
        let (k2u, k2v) = (v + 0.5 * h * k1v, g(t + 0.5 * h, u + 0.5 * h * k1u));
        let (k3u, k3v) = (v + 0.5 * h * k2v, g(t + 0.5 * h, u + 0.5 * h * k2u));
        let (k4u, k4v) = (v + h * k3v, g(t + h, u + h * k3u));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += h;
        out.push(u);
    }
    out
}

/// Linear shooting for `−u'' = 1 + u/4`, `u(0) = u(1) = 0`.
pub fn shooting_oracle(steps: usize) -> Vec<f64> {
    let g = |_t: f64, u: f64| -(1.0 + u / 4.0);
    let a = rk4_second_order(g, 0.0, 0.0, steps);
    let b = rk4_second_order(g, 0.0, 1.0, steps);
    let (ea, eb) = (a[steps], b[steps]);
    let slope = -ea / (eb - ea);
    a.iter().zip(&b).map(|(x, y)| x + slope * (y - x)).collect()
}

/// `c` with `c²/12 + c − 1 = 0`, `c > 0`.
pub fn quadratic_root() -> f64 {
    (-12.0 + 192f64.sqrt()) / 2.0
}
