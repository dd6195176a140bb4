//! Green's functions for the boundary data and the cone constants derived
//! from them.

use std::path::Path;

use thiserror::Error;

/// Dense s-samples used for numerically computed constants.
const DENSE_SAMPLES: usize = 4096;
/// Distance kept from the endpoints where `𝒢(s)` may vanish.
const ENDPOINT_MARGIN: f64 = 1e-6;
const REFINE_ROUNDS: usize = 3;
/// Smallest accepted table: 33 × 33.
pub const MIN_TABLE_SIZE: usize = 33;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("need 0 <= alpha < beta <= 1, got alpha = {alpha}, beta = {beta}")]
    Interval { alpha: f64, beta: f64 },
    #[error("argument ({t}, {s}) outside [0, 1]²")]
    OutOfRange { t: f64, s: f64 },
    #[error("Harnack constant eta0 = {0} is not positive on the chosen [alpha, beta]")]
    Eta0NotPositive(f64),
    #[error("coercivity constant C0 = {0} is not positive")]
    C0NotPositive(f64),
    #[error("Green's function table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Mode {
    /// Supremum of the column ratio, as printed in the hypothesis.
    PaperSup,
    /// Infimum of the column ratio, the constant the cone actually needs.
    #[default]
    CoerciveInf,
}

/// `G` sampled on a uniform `n × n` grid over [0, 1]², row-major in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTable {
    n: usize,
    values: Vec<f64>,
}

impl GreenTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, GreenError> {
        if n < MIN_TABLE_SIZE {
            return Err(GreenError::Table(format!(
                "grid is {n}x{n}; at least {MIN_TABLE_SIZE}x{MIN_TABLE_SIZE} is required"
            )));
        }
        if values.len() != n * n {
            return Err(GreenError::Table(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(GreenError::Table(format!(
                "entry (row {}, column {}) = {v} is not a finite nonnegative number",
                k / n,
                k % n
            )));
        }
        Ok(Self { n, values })
    }

    /// Samples a closure on the `n × n` grid.
    pub fn from_fn(n: usize, g: impl Fn(f64, f64) -> f64) -> Result<Self, GreenError> {
        let h = 1.0 / (n - 1) as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(g(i as f64 * h, j as f64 * h));
            }
        }
        Self::new(n, values)
    }

    /// Parses the CSV layout: header `t\s,s_0,...,s_{n-1}`, then one row
    /// per `t_i` starting with `t_i`.
    pub fn from_csv(text: &str) -> Result<Self, GreenError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| GreenError::Table("empty file".into()))?;
        let mut cols = header.split(',').map(str::trim);
        let corner = cols.next().unwrap_or_default();
        if corner != "t\\s" {
            return Err(GreenError::Table(format!(
                "header must start with `t\\s`, found `{corner}`"
            )));
        }
        let s_nodes = parse_row(cols, "header")?;
        let n = s_nodes.len();
        check_uniform(&s_nodes, "s")?;
        let mut t_nodes = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * n);
        for (row, line) in lines.enumerate() {
            let cells = parse_row(line.split(',').map(str::trim), &format!("row {}", row + 1))?;
            if cells.len() != n + 1 {
                return Err(GreenError::Table(format!(
                    "row {} has {} values, expected {}",
                    row + 1,
                    cells.len() - 1,
                    n
                )));
            }
            t_nodes.push(cells[0]);
            values.extend_from_slice(&cells[1..]);
        }
        if t_nodes.len() != n {
            return Err(GreenError::Table(format!(
                "table must be square: {} t-rows for {} s-columns",
                t_nodes.len(),
                n
            )));
        }
        check_uniform(&t_nodes, "t")?;
        Self::new(n, values)
    }

    pub fn to_csv(&self) -> String {
        let h = 1.0 / (self.n - 1) as f64;
        let mut out = String::from("t\\s");
        for j in 0..self.n {
            out.push_str(&format!(",{:?}", j as f64 * h));
        }
        out.push('\n');
        for i in 0..self.n {
            out.push_str(&format!("{:?}", i as f64 * h));
            for j in 0..self.n {
                out.push_str(&format!(",{:?}", self.values[i * self.n + j]));
            }
            out.push('\n');
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let y = x * (self.n - 1) as f64;
        let k = (y.floor() as usize).min(self.n - 2);
        (k, y - k as f64)
    }

    fn bilinear(&self, t: f64, s: f64) -> f64 {
        let (i, a) = self.locate(t);
        let (j, b) = self.locate(s);
        (1.0 - a) * ((1.0 - b) * self.node(i, j) + b * self.node(i, j + 1))
            + a * ((1.0 - b) * self.node(i + 1, j) + b * self.node(i + 1, j + 1))
    }

    fn axis(&self) -> Vec<f64> {
        crate::grid::uniform_nodes(self.n)
    }
}

fn parse_row<'a>(cells: impl Iterator<Item = &'a str>, what: &str) -> Result<Vec<f64>, GreenError> {
    cells
        .map(|c| {
            c.parse::<f64>()
                .map_err(|_| GreenError::Table(format!("{what}: `{c}` is not a number")))
        })
        .collect()
}

fn check_uniform(nodes: &[f64], axis: &str) -> Result<(), GreenError> {
    let n = nodes.len();
    if n < 2 {
        return Err(GreenError::Table(format!("{axis}-axis needs at least 2 nodes")));
    }
    let h = 1.0 / (n - 1) as f64;
    for (i, x) in nodes.iter().enumerate() {
        if (x - i as f64 * h).abs() > 1e-9 {
            return Err(GreenError::Table(format!(
                "{axis}-axis must be uniform on [0, 1]; node {i} is {x}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum GreenKind {
    /// `u(0) = u(1) = 0`.
    Dirichlet,
    /// `u(0) = u'(1) = 0`.
    RightFocal,
    Tabulated(GreenTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryModel {
    kind: GreenKind,
    alpha: f64,
    beta: f64,
    eta0: f64,
    c0: f64,
    c0_mode: C0Mode,
}

impl BoundaryModel {
    pub fn new(kind: GreenKind, alpha: f64, beta: f64, c0_mode: C0Mode) -> Result<Self, GreenError> {
        if !(0.0 <= alpha && alpha < beta && beta <= 1.0) {
            return Err(GreenError::Interval { alpha, beta });
        }
        let mut model = Self {
            kind,
            alpha,
            beta,
            eta0: f64::NAN,
            c0: f64::NAN,
            c0_mode,
        };
        model.eta0 = model.compute_eta0()?;
        model.c0 = model.compute_c0(c0_mode)?;
        Ok(model)
    }

    pub fn dirichlet(alpha: f64, beta: f64) -> Result<Self, GreenError> {
        Self::new(GreenKind::Dirichlet, alpha, beta, C0Mode::default())
    }

    pub fn right_focal(alpha: f64, beta: f64) -> Result<Self, GreenError> {
        Self::new(GreenKind::RightFocal, alpha, beta, C0Mode::default())
    }

    pub fn from_csv_file(path: &Path, alpha: f64, beta: f64, c0_mode: C0Mode) -> Result<Self, GreenError> {
        let text = std::fs::read_to_string(path).map_err(|e| GreenError::Table(format!("{}: {e}", path.display())))?;
        Self::new(GreenKind::Tabulated(GreenTable::from_csv(&text)?), alpha, beta, c0_mode)
    }

    pub fn kind(&self) -> &GreenKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            GreenKind::Dirichlet => "dirichlet",
            GreenKind::RightFocal => "right_focal",
            GreenKind::Tabulated(_) => "tabulated",
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c0_mode(&self) -> C0Mode {
        self.c0_mode
    }

    /// Same model with a different C₀ convention.
    pub fn with_c0_mode(&self, mode: C0Mode) -> Result<Self, GreenError> {
        let mut m = self.clone();
        m.c0 = m.compute_c0(mode)?;
        m.c0_mode = mode;
        Ok(m)
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<f64, GreenError> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
            return Err(GreenError::OutOfRange { t, s });
        }
        Ok(self.g(t, s))
    }

    #[inline]
    pub(crate) fn g(&self, t: f64, s: f64) -> f64 {
        match &self.kind {
            GreenKind::Dirichlet => {
                if t <= s {
                    t * (1.0 - s)
                } else {
                    s * (1.0 - t)
                }
            }
            GreenKind::RightFocal => t.min(s),
            GreenKind::Tabulated(table) => table.bilinear(t, s),
        }
    }

    /// `𝒢(s) = max_t G(t, s)`.
    pub fn script_g(&self, s: f64) -> f64 {
        match &self.kind {
            GreenKind::Dirichlet => s * (1.0 - s),
            GreenKind::RightFocal => s,
            // piecewise linear in t, so the maximum sits on a row node
            GreenKind::Tabulated(table) => table
                .axis()
                .into_iter()
                .map(|t| table.bilinear(t, s))
                .fold(0.0, f64::max),
        }
    }

    /// `min_{t ∈ [α, β]} G(t, s)`.
    pub fn min_on_interval(&self, s: f64) -> f64 {
        let mut m = self.g(self.alpha, s).min(self.g(self.beta, s));
        if let GreenKind::Tabulated(table) = &self.kind {
            for t in table.axis() {
                if t > self.alpha && t < self.beta {
                    m = m.min(table.bilinear(t, s));
                }
            }
        }
        m
    }

    /// `∫₀¹ G(t, s) dt`.
    pub fn column_integral(&self, s: f64) -> f64 {
        match &self.kind {
            GreenKind::Dirichlet => 0.5 * s * (1.0 - s),
            GreenKind::RightFocal => s - 0.5 * s * s,
            GreenKind::Tabulated(table) => {
                let h = 1.0 / (table.n - 1) as f64;
                let vals: Vec<f64> = table.axis().into_iter().map(|t| table.bilinear(t, s)).collect();
                trapezoid(&vals, h)
            }
        }
    }

    /// `∫_a^b G(τ, s) ds`, exact for every supported kind.
    pub fn row_integral(&self, tau: f64, a: f64, b: f64) -> f64 {
        match &self.kind {
            GreenKind::Dirichlet => {
                let lo = a.min(tau);
                let hi = b.min(tau);
                let left = (1.0 - tau) * 0.5 * (hi * hi - lo * lo);
                let lo = a.max(tau);
                let hi = b.max(tau);
                let right = tau * ((hi - 0.5 * hi * hi) - (lo - 0.5 * lo * lo));
                left + right
            }
            GreenKind::RightFocal => {
                let lo = a.min(tau);
                let hi = b.min(tau);
                let left = 0.5 * (hi * hi - lo * lo);
                let right = tau * (b.max(tau) - a.max(tau));
                left + right
            }
            GreenKind::Tabulated(table) => {
                let mut pts = vec![a, b];
                pts.extend(table.axis().into_iter().filter(|s| *s > a && *s < b));
                pts.sort_by(f64::total_cmp);
                pts.windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (table.bilinear(tau, w[0]) + table.bilinear(tau, w[1])))
                    .sum()
            }
        }
    }

    /// `G^M = max_τ ∫₀¹ G(τ, s) ds`.
    pub fn gm(&self) -> f64 {
        maximize(|tau| self.row_integral(tau, 0.0, 1.0))
    }

    /// `max_τ ∫_α^β G(τ, s) ds`.
    pub fn partial_gm(&self) -> f64 {
        maximize(|tau| self.row_integral(tau, self.alpha, self.beta))
    }

    /// η₀, from the closed form when one exists.
    pub fn compute_eta0(&self) -> Result<f64, GreenError> {
        let eta0 = match self.kind {
            GreenKind::Dirichlet => self.alpha.min(1.0 - self.beta),
            GreenKind::RightFocal => self.alpha,
            GreenKind::Tabulated(_) => self.eta0_numeric(),
        };
        if eta0 > 0.0 {
            Ok(eta0.min(1.0))
        } else {
            Err(GreenError::Eta0NotPositive(eta0))
        }
    }

    /// Dense-grid infimum of `min_{[α,β]} G(·, s) / 𝒢(s)`.
    pub fn eta0_numeric(&self) -> f64 {
        extremize_ratio(
            |s| {
                let denom = self.script_g(s);
                (denom > 0.0).then(|| self.min_on_interval(s) / denom)
            },
            Extremum::Min,
        )
    }

    /// C₀ in the requested mode, from the closed form when one exists.
    pub fn compute_c0(&self, mode: C0Mode) -> Result<f64, GreenError> {
        let c0 = match (&self.kind, mode) {
            (GreenKind::Dirichlet, _) => 0.5,
            (GreenKind::RightFocal, C0Mode::CoerciveInf) => 0.5,
            (GreenKind::RightFocal, C0Mode::PaperSup) => 1.0,
            (GreenKind::Tabulated(_), _) => self.c0_numeric(mode),
        };
        if c0 > 0.0 {
            Ok(c0.min(1.0))
        } else {
            Err(GreenError::C0NotPositive(c0))
        }
    }

    /// Dense-grid inf or sup of `∫₀¹ G(t, s) dt / 𝒢(s)`.
    pub fn c0_numeric(&self, mode: C0Mode) -> f64 {
        let ext = match mode {
            C0Mode::CoerciveInf => Extremum::Min,
            C0Mode::PaperSup => Extremum::Max,
        };
        extremize_ratio(
            |s| {
                let denom = self.script_g(s);
                (denom > 0.0).then(|| self.column_integral(s) / denom)
            },
            ext,
        )
    }

    /// `v_i = Σ_j G(t_i, s_j) c_j` on the uniform `n`-node grid, `n = c.len()`.
    /// The closed-form kinds are separable, so prefix and suffix sums give O(n).
    /// Nothing is subtracted, so nonnegative `c` gives nonnegative `v`.
    pub fn apply_nodes(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len();
        let nodes = crate::grid::uniform_nodes(n);
        // right[i] = Σ_{j>i} w(s_j) c_j
        let suffix = |w: &dyn Fn(f64) -> f64| {
            let mut right = vec![0.0; n];
            for i in (0..n.saturating_sub(1)).rev() {
                right[i] = right[i + 1] + w(nodes[i + 1]) * c[i + 1];
            }
            right
        };
        match self.kind {
            GreenKind::Dirichlet => {
                // v_i = (1 - t_i) Σ_{j<=i} s_j c_j + t_i Σ_{j>i} (1 - s_j) c_j
                let right = suffix(&|s| 1.0 - s);
                let mut left = 0.0;
                (0..n)
                    .map(|i| {
                        left += nodes[i] * c[i];
                        (1.0 - nodes[i]) * left + nodes[i] * right[i]
                    })
                    .collect()
            }
            GreenKind::RightFocal => {
                let right = suffix(&|_| 1.0);
                let mut left = 0.0;
                (0..n)
                    .map(|i| {
                        left += nodes[i] * c[i];
                        left + nodes[i] * right[i]
                    })
                    .collect()
            }
            GreenKind::Tabulated(_) => self.apply_nodes_direct(c),
        }
    }

    /// Plain O(n²) evaluation of [`BoundaryModel::apply_nodes`].
    pub fn apply_nodes_direct(&self, c: &[f64]) -> Vec<f64> {
        let nodes = crate::grid::uniform_nodes(c.len());
        nodes
            .iter()
            .map(|&t| nodes.iter().zip(c).map(|(&s, &cj)| self.g(t, s) * cj).sum())
            .collect()
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Min,
    Max,
}

/// Extremum of `ratio(s)` over `[margin, 1 - margin]`: dense sampling, then
/// three rounds of zooming around the incumbent.
fn extremize_ratio(ratio: impl Fn(f64) -> Option<f64>, ext: Extremum) -> f64 {
    let better = |a: f64, b: f64| match ext {
        Extremum::Min => a < b,
        Extremum::Max => a > b,
    };
    let (lo, hi) = (ENDPOINT_MARGIN, 1.0 - ENDPOINT_MARGIN);
    let mut best_s = f64::NAN;
    let mut best = f64::NAN;
    let scan = |a: f64, b: f64, samples: usize, best_s: &mut f64, best: &mut f64| {
        for k in 0..=samples {
            let s = a + (b - a) * k as f64 / samples as f64;
            if let Some(r) = ratio(s) {
                if best.is_nan() || better(r, *best) {
                    *best = r;
                    *best_s = s;
                }
            }
        }
    };
    scan(lo, hi, DENSE_SAMPLES, &mut best_s, &mut best);
    let mut width = (hi - lo) / DENSE_SAMPLES as f64;
    for _ in 0..REFINE_ROUNDS {
        if best_s.is_nan() {
            break;
        }
        let a = (best_s - width).max(lo);
        let b = (best_s + width).min(hi);
        scan(a, b, 64, &mut best_s, &mut best);
        width /= 32.0;
    }
    best
}

/// Maximum over τ ∈ [0, 1] of a function that is concave for the
/// supported kernels: dense grid, then golden-section around the best node.
fn maximize(f: impl Fn(f64) -> f64) -> f64 {
    const SAMPLES: usize = 4096;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=SAMPLES {
        let v = f(k as f64 / SAMPLES as f64);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let h = 1.0 / SAMPLES as f64;
    let mut a = (best_k as f64 * h - h).max(0.0);
    let mut b = (best_k as f64 * h + h).min(1.0);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd).max(f(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dirichlet() -> BoundaryModel {
        BoundaryModel::dirichlet(0.25, 0.75).unwrap()
    }

    #[test]
    fn green_values() {
        let d = dirichlet();
        assert_eq!(d.eval(0.25, 0.5).unwrap(), 0.125);
        assert_eq!(d.eval(0.5, 0.5).unwrap(), 0.25);
        let rf = BoundaryModel::right_focal(0.25, 0.75).unwrap();
        assert_eq!(rf.eval(0.3, 0.7).unwrap(), 0.3);
        assert!(matches!(d.eval(1.5, 0.0), Err(GreenError::OutOfRange { .. })));
    }

    #[test]
    fn script_g_values() {
        assert_eq!(dirichlet().script_g(0.5), 0.25);
        let rf = BoundaryModel::right_focal(0.25, 0.75).unwrap();
        assert_eq!(rf.script_g(0.8), 0.8);
        assert_eq!(rf.script_g(0.0), 0.0);
        assert_eq!(dirichlet().script_g(0.0), 0.0);
        // grid-max oracle
        for s in [0.1, 0.37, 0.9] {
            let brute = (0..=10_000)
                .map(|k| dirichlet().g(k as f64 / 1e4, s))
                .fold(0.0, f64::max);
            assert_abs_diff_eq!(dirichlet().script_g(s), brute, epsilon = 1e-4);
        }
    }

    #[test]
    fn eta0_values() {
        assert_eq!(dirichlet().eta0(), 0.25);
        let d = BoundaryModel::dirichlet(1.0 / 3.0, 0.5).unwrap();
        assert_abs_diff_eq!(d.eta0(), 1.0 / 3.0, epsilon = 1e-15);
        let rf = BoundaryModel::right_focal(0.25, 0.75).unwrap();
        assert_eq!(rf.eta0(), 0.25);
        // 10⁴-point grid oracle, independent of the closed forms
        for (m, want) in [(&d, 1.0 / 3.0), (&rf, 0.25), (&dirichlet(), 0.25)] {
            let brute = (1..10_000)
                .map(|k| {
                    let s = k as f64 / 1e4;
                    let min_t = (0..=200)
                        .map(|j| m.alpha + (m.beta - m.alpha) * j as f64 / 200.0)
                        .map(|t| m.g(t, s))
                        .fold(f64::INFINITY, f64::min);
                    min_t / (0..=10_000).map(|i| m.g(i as f64 / 1e4, s)).fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(brute, want, epsilon = 1e-3);
            assert_abs_diff_eq!(m.eta0_numeric(), want, epsilon = 1e-5);
        }
        assert!(matches!(
            BoundaryModel::dirichlet(0.0, 0.5),
            Err(GreenError::Eta0NotPositive(_))
        ));
        assert!(matches!(
            BoundaryModel::dirichlet(0.5, 0.5),
            Err(GreenError::Interval { .. })
        ));
    }

    #[test]
    fn c0_values() {
        let d = dirichlet();
        assert_eq!(d.compute_c0(C0Mode::CoerciveInf).unwrap(), 0.5);
        assert_eq!(d.compute_c0(C0Mode::PaperSup).unwrap(), 0.5);
        assert_abs_diff_eq!(d.c0_numeric(C0Mode::PaperSup), 0.5, epsilon = 1e-12);
        let rf = BoundaryModel::right_focal(0.25, 0.75).unwrap();
        assert_eq!(rf.c0(), 0.5);
        assert_eq!(rf.with_c0_mode(C0Mode::PaperSup).unwrap().c0(), 1.0);
        assert_abs_diff_eq!(rf.c0_numeric(C0Mode::CoerciveInf), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(rf.c0_numeric(C0Mode::PaperSup), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gm_values() {
        let d = dirichlet();
        assert_abs_diff_eq!(d.gm(), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(d.partial_gm(), 3.0 / 32.0, epsilon = 1e-12);
        let rf = BoundaryModel::right_focal(0.25, 0.75).unwrap();
        assert_abs_diff_eq!(rf.gm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn row_integral_matches_quadrature() {
        for m in [dirichlet(), BoundaryModel::right_focal(0.2, 0.9).unwrap()] {
            for &tau in &[0.0, 0.3, 0.5, 0.77, 1.0] {
                let n = 200_000;
                let brute: f64 = (0..n)
                    .map(|k| m.g(tau, 0.1 + 0.7 * (k as f64 + 0.5) / n as f64))
                    .sum::<f64>()
                    * 0.7
                    / n as f64;
                assert_abs_diff_eq!(m.row_integral(tau, 0.1, 0.8), brute, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn harnack_and_coercivity_on_grid() {
        let models = [
            dirichlet(),
            BoundaryModel::dirichlet(0.1, 0.6).unwrap(),
            BoundaryModel::right_focal(0.25, 0.75).unwrap(),
        ];
        for m in &models {
            for j in 0..=200 {
                let s = j as f64 / 200.0;
                let min_t = (0..=200)
                    .map(|i| i as f64 / 200.0)
                    .filter(|t| *t >= m.alpha() && *t <= m.beta())
                    .map(|t| m.g(t, s))
                    .fold(f64::INFINITY, f64::min);
                assert!(min_t >= m.eta0() * m.script_g(s) - 1e-12);
                assert!(m.column_integral(s) >= m.c0() * m.script_g(s) - 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_green_inverts_second_derivative() {
        // u(t) = ∫ G(t,s) g(s) ds with g = cos(3s) + 2; check -u'' = g by finite differences
        let d = dirichlet();
        let n = 2049;
        let h = 1.0 / (n - 1) as f64;
        let g: Vec<f64> = crate::grid::uniform_nodes(n)
            .iter()
            .map(|s| (3.0 * s).cos() + 2.0)
            .collect();
        let w = crate::grid::trapezoid_weights(n);
        let c: Vec<f64> = g.iter().zip(&w).map(|(a, b)| a * b).collect();
        let u = d.apply_nodes(&c);
        assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[n - 1], 0.0, epsilon = 1e-14);
        for i in (1..n - 1).step_by(64) {
            let second = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            assert_abs_diff_eq!(-second, g[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn fast_and_direct_application_agree() {
        for m in [dirichlet(), BoundaryModel::right_focal(0.25, 0.75).unwrap()] {
            let c: Vec<f64> = (0..101).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
            let fast = m.apply_nodes(&c);
            let direct = m.apply_nodes_direct(&c);
            for (a, b) in fast.iter().zip(&direct) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn tabulated_reproduces_closed_forms() {
        let table = GreenTable::from_fn(65, |t, s| if t <= s { t * (1.0 - s) } else { s * (1.0 - t) }).unwrap();
        let csv = table.to_csv();
        let parsed = GreenTable::from_csv(&csv).unwrap();
        assert_eq!(parsed, table);
        let m = BoundaryModel::new(GreenKind::Tabulated(parsed), 0.25, 0.75, C0Mode::CoerciveInf).unwrap();
        // near s = 0 the interpolant is linear in s between the first two
        // columns, so the ratio tends to (1 - β) / (1 - h) rather than 1 - β
        assert_abs_diff_eq!(m.eta0(), 0.25 / (1.0 - 1.0 / 64.0), epsilon = 1e-9);
        assert_abs_diff_eq!(m.c0(), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(m.gm(), 0.125, epsilon = 1e-4);
        assert_abs_diff_eq!(m.partial_gm(), 3.0 / 32.0, epsilon = 1e-4);
        assert_abs_diff_eq!(m.eval(0.25, 0.5).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn table_validation() {
        assert!(GreenTable::from_fn(17, |t, s| t.min(s)).is_err());
        assert!(GreenTable::from_csv("x,0,1\n").is_err());
        let mut csv = GreenTable::from_fn(33, |t, s| t.min(s)).unwrap().to_csv();
        csv = csv.replacen(",0.5,", ",zzz,", 1);
        assert!(GreenTable::from_csv(&csv).is_err());
        let neg = GreenTable::from_fn(33, |t, s| t - s);
        assert!(neg.is_err());
    }
}
