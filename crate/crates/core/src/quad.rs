//! Composite Gauss–Legendre quadrature on uniform or graded panels.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Points per panel of the composite rule.
pub const POINTS_PER_PANEL: usize = 16;

/// Gauss–Legendre nodes and weights mapped to the reference interval [0, 1].
pub fn unit_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let degree = NonZeroUsize::new(POINTS_PER_PANEL).expect("non-zero degree");
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(degree)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// Panel breakpoints `a = x_0 < x_1 < ... < x_n = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    points: Vec<f64>,
}

impl Mesh {
    pub fn uniform(a: f64, b: f64, panels: usize) -> Self {
        Self::graded(a, b, panels, 1.0)
    }

    /// Panels clustered toward `a`: `x_k = a + (b - a) (k/n)^grading`.
    pub fn graded(a: f64, b: f64, panels: usize, grading: f64) -> Self {
        let n = panels.max(1);
        let mut points: Vec<f64> = (0..=n)
            .map(|k| a + (b - a) * (k as f64 / n as f64).powf(grading))
            .collect();
        points[n] = b;
        Self { points }
    }

    /// Mesh from arbitrary breakpoints; sorted, deduplicated.
    pub fn from_points(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        points.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1.0));
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn panels(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Every quadrature node with its weight, in increasing order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let rule = unit_rule();
        self.panels().flat_map(move |(lo, hi)| {
            let h = hi - lo;
            rule.iter().map(move |&(x, w)| (lo + h * x, h * w))
        })
    }

    pub fn integrate<E, F>(&self, mut f: F) -> Result<f64, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let mut sum = 0.0;
        for (x, w) in self.nodes() {
            sum += w * f(x)?;
        }
        Ok(sum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub initial_panels: usize,
    pub grading: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            initial_panels: 64,
            grading: 1.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_doublings: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Adaptive {
    Converged {
        value: f64,
        error_estimate: f64,
        panels: usize,
    },
    /// Four successive refinements kept growing without settling.
    Diverging {
        history: Vec<f64>,
    },
    NotConverged {
        value: f64,
        error_estimate: f64,
    },
}

/// Doubles the panel count until two successive levels agree.
pub fn adaptive<E, F>(a: f64, b: f64, opts: &AdaptiveOptions, mut f: F) -> Result<Adaptive, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut panels = opts.initial_panels.max(1);
    let mut history = vec![Mesh::graded(a, b, panels, opts.grading).integrate(&mut f)?];
    for _ in 0..opts.max_doublings {
        panels *= 2;
        let value = Mesh::graded(a, b, panels, opts.grading).integrate(&mut f)?;
        let prev = *history.last().expect("non-empty history");
        history.push(value);
        let diff = (value - prev).abs();
        if diff <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Adaptive::Converged {
                value,
                error_estimate: diff,
                panels,
            });
        }
        if looks_divergent(&history, opts.abs_tol) {
            return Ok(Adaptive::Diverging { history });
        }
    }
    let n = history.len();
    Ok(Adaptive::NotConverged {
        value: history[n - 1],
        error_estimate: (history[n - 1] - history[n - 2]).abs(),
    })
}

/// Growth test over the last four refinements: either every step grew the
/// estimate by more than 1.5x, or the increments kept one sign and stopped
/// contracting (logarithmic divergence never triggers the ratio test).
fn looks_divergent(history: &[f64], abs_tol: f64) -> bool {
    if history.len() < 5 {
        return false;
    }
    let tail = &history[history.len() - 5..];
    let geometric = tail.windows(2).all(|w| w[1].abs() > 1.5 * w[0].abs());
    let steps: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let same_sign = steps.iter().all(|d| *d > abs_tol) || steps.iter().all(|d| *d < -abs_tol);
    let stalled = steps.windows(2).all(|d| d[1].abs() >= 0.9 * d[0].abs());
    geometric || (same_sign && stalled)
}
