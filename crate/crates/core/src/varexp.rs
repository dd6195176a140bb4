//! Variable-exponent bounds: `p⁻`/`p⁺`, the pointwise power inequalities,
//! and the lower and upper bounds on `‖u‖∞` over the level set `z(u) = ρ`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::kernel::{HolderNorm, Kernel, KernelError};
use crate::par::Execution;

const SCAN_POINTS: usize = 100_000;
const BOUND_SLACK: f64 = 1e-9;
/// Step of the q-grids searched for the upper bounds.
pub const Q_STEP: f64 = 1e-3;
/// Upper end of the q-search in the concave regime, where q is unbounded.
pub const CONCAVE_Q_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarexpError {
    #[error("p({t}) = {value} is not positive")]
    NonPositive { t: f64, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(
        "p⁻ = {p_minus}, p⁺ = {p_plus} fits no regime (p⁻ = 1 < p⁺); \
         override the bounds, e.g. lower p⁻ below 1"
    )]
    RegimeGap { p_minus: f64, p_plus: f64 },
    #[error("override ({p_minus}, {p_plus}) does not enclose p on [0, 1], whose range is [{min}, {max}]")]
    BadOverride {
        p_minus: f64,
        p_plus: f64,
        min: f64,
        max: f64,
    },
    #[error("{what}: q = {q} outside {range}")]
    QRange { what: &'static str, q: f64, range: String },
    #[error("b^(1/(1-q)) is not integrable for q = {0}")]
    NonIntegrable(f64),
    #[error("no admissible q: {0}")]
    NoAdmissibleQ(String),
    #[error("{0} requires the {1} regime")]
    Regime(&'static str, Regime),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `1 < p⁻ ≤ p⁺`.
    Convex,
    /// `0 < p⁻ ≤ p⁺ ≤ 1`.
    Concave,
    /// `p⁻ < 1 < p⁺`.
    Mixed,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Convex => "convex",
            Regime::Concave => "concave",
            Regime::Mixed => "mixed",
        })
    }
}

impl Regime {
    pub fn classify(p_minus: f64, p_plus: f64) -> Result<Self, VarexpError> {
        if p_minus > 1.0 {
            Ok(Regime::Convex)
        } else if p_plus <= 1.0 {
            Ok(Regime::Concave)
        } else if p_minus < 1.0 {
            Ok(Regime::Mixed)
        } else {
            Err(VarexpError::RegimeGap { p_minus, p_plus })
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExponentProfile {
    p: Expression,
    p_minus: f64,
    p_plus: f64,
    scanned: (f64, f64),
    regime: Regime,
}

impl ExponentProfile {
    /// Scans `p` on [0, 1]; `bounds` replaces the scanned `(p⁻, p⁺)` when
    /// it encloses them.
    pub fn new(p: Expression, bounds: Option<(f64, f64)>, exec: Execution) -> Result<Self, VarexpError> {
        let (min, max) = extract_bounds(&p, exec)?;
        let (p_minus, p_plus) = match bounds {
            None => (min, max),
            Some((lo, hi)) => {
                if !(lo > 0.0 && lo <= min + BOUND_SLACK && hi >= max - BOUND_SLACK && hi.is_finite()) {
                    return Err(VarexpError::BadOverride {
                        p_minus: lo,
                        p_plus: hi,
                        min,
                        max,
                    });
                }
                (lo, hi)
            }
        };
        let regime = Regime::classify(p_minus, p_plus)?;
        Ok(Self {
            p,
            p_minus,
            p_plus,
            scanned: (min, max),
            regime,
        })
    }

    pub fn expression(&self) -> &Expression {
        &self.p
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Range of `p` found on [0, 1] before any override.
    pub fn scanned(&self) -> (f64, f64) {
        self.scanned
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `Some(p₀)` when `p⁻ = p⁺ = p₀`.
    pub fn constant(&self) -> Option<f64> {
        (self.p_minus == self.p_plus).then_some(self.p_minus)
    }
}

/// `(min p, max p)` over [0, 1]: a 10⁵-point scan refined by golden-section
/// search around the extreme samples.
pub fn extract_bounds(p: &Expression, exec: Execution) -> Result<(f64, f64), VarexpError> {
    let eval = |t: f64| -> Result<f64, VarexpError> {
        let v = p.eval(&[t])?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(VarexpError::NonPositive { t, value: v })
        }
    };
    const CHUNK: usize = 1024;
    let chunks = SCAN_POINTS / CHUNK + 1;
    let h = 1.0 / SCAN_POINTS as f64;
    let partial = exec.map_range(chunks, |c| {
        let mut lo = (f64::INFINITY, 0usize);
        let mut hi = (f64::NEG_INFINITY, 0usize);
        for k in c * CHUNK..((c + 1) * CHUNK).min(SCAN_POINTS + 1) {
            let v = eval(k as f64 * h)?;
            if v < lo.0 {
                lo = (v, k);
            }
            if v > hi.0 {
                hi = (v, k);
            }
        }
        Ok::<_, VarexpError>((lo, hi))
    });
    let mut lo = (f64::INFINITY, 0usize);
    let mut hi = (f64::NEG_INFINITY, 0usize);
    for r in partial {
        let (l, u) = r?;
        if l.0 < lo.0 {
            lo = l;
        }
        if u.0 > hi.0 {
            hi = u;
        }
    }
    let bracket = |k: usize| ((k.max(1) - 1) as f64 * h, ((k + 1).min(SCAN_POINTS)) as f64 * h);
    let (a, b) = bracket(lo.1);
    let min = golden(a, b, |t| eval(t).unwrap_or(f64::INFINITY)).min(lo.0);
    let (a, b) = bracket(hi.1);
    let max = -golden(a, b, |t| eval(t).map_or(f64::INFINITY, |v| -v)).min(-hi.0);
    Ok((min, max))
}

/// Minimum value of `f` on `[a, b]` by golden-section search.
fn golden(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// `ε(ρ, b)`: `r^{1/p⁻} − r^{1/p⁺}` with `r = ρ / mass` when `r^{1/p⁺} < 1`, else 0.
pub fn eps(rho: f64, mass: f64, p_minus: f64, p_plus: f64) -> f64 {
    let r = rho / mass;
    let upper = r.powf(1.0 / p_plus);
    if upper < 1.0 {
        if p_minus == p_plus {
            0.0
        } else {
            r.powf(1.0 / p_minus) - upper
        }
    } else {
        0.0
    }
}

/// `m_ρ = r^{1/p⁺} + ε(ρ, b)`, evaluated in collapsed form.
pub fn m_rho(rho: f64, mass: f64, p_minus: f64, p_plus: f64) -> f64 {
    let r = rho / mass;
    let upper = r.powf(1.0 / p_plus);
    if upper < 1.0 {
        r.powf(1.0 / p_minus)
    } else {
        upper
    }
}

/// `C₀⁻¹ 2^{(p⁺−p⁻)/p⁻} (ρ^{1/p⁻} + 1)`.
pub fn m_star(rho: f64, p_minus: f64, p_plus: f64, c0: f64) -> f64 {
    if p_minus == p_plus {
        return (rho.powf(1.0 / p_minus) + 1.0) / c0;
    }
    2f64.powf((p_plus - p_minus) / p_minus) * (rho.powf(1.0 / p_minus) + 1.0) / c0
}

/// `C₀⁻¹ 2^{(p⁺−q)/p⁻} [ρ^{1/q} R^{(q−1)/q} + 1]^{q/p⁻}` with `R` the
/// reverse-Hölder integral at `q`.
pub fn m_rho_convex(rho: f64, holder: f64, q: f64, p_minus: f64, p_plus: f64, c0: f64) -> Result<f64, VarexpError> {
    if !(q > 1.0 && q < p_minus) {
        return Err(VarexpError::QRange {
            what: "convex upper bound",
            q,
            range: format!("(1, {p_minus})"),
        });
    }
    let bracket = rho.powf(1.0 / q) * holder.powf((q - 1.0) / q) + 1.0;
    Ok(2f64.powf((p_plus - q) / p_minus) * bracket.powf(q / p_minus) / c0)
}

/// `η₀⁻¹ (β−α)^{−q/p⁻} [ρ^{1/q} R^{(q−1)/q} + 1]^{q/p⁻}`.
pub fn m_bar(
    rho: f64,
    holder: f64,
    q: f64,
    p_minus: f64,
    eta0: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, VarexpError> {
    if !(q > 1.0) {
        return Err(VarexpError::QRange {
            what: "concave/mixed upper bound",
            q,
            range: "(1, ∞)".into(),
        });
    }
    let bracket = rho.powf(1.0 / q) * holder.powf((q - 1.0) / q) + 1.0;
    Ok((beta - alpha).powf(-q / p_minus) * bracket.powf(q / p_minus) / eta0)
}

/// `φ(q) = C₀⁻¹ 2^{(p⁺−q)/p⁻} (ρ^{1/q} + 1)^{q/p⁻}`.
pub fn phi(q: f64, rho: f64, p_minus: f64, p_plus: f64, c0: f64) -> Result<f64, VarexpError> {
    m_rho_convex(rho, 1.0, q, p_minus, p_plus, c0).map_err(|_| VarexpError::QRange {
        what: "phi",
        q,
        range: format!("(1, {p_minus})"),
    })
}

fn check_q(what: &'static str, q: f64, ok: bool, range: String) -> Result<(), VarexpError> {
    if ok {
        Ok(())
    } else {
        Err(VarexpError::QRange { what, q, range })
    }
}

/// Convex-regime lower bound `2^{1−p⁺/q} y^{p⁻/q} − 1 ≤ y^{p(t)/q}`, `1 ≤ q < p⁻`.
pub fn pointwise_lower_convex(y: f64, q: f64, p_minus: f64, p_plus: f64) -> Result<f64, VarexpError> {
    check_q(
        "convex pointwise bound",
        q,
        (1.0..p_minus).contains(&q),
        format!("[1, {p_minus})"),
    )?;
    Ok(2f64.powf(1.0 - p_plus / q) * y.powf(p_minus / q) - 1.0)
}

/// Concave-regime lower bound `y^{p⁻/q} − 1 ≤ y^{p(t)/q}`, `q ≥ 1`.
pub fn pointwise_lower_concave(y: f64, q: f64, p_minus: f64) -> Result<f64, VarexpError> {
    check_q("concave pointwise bound", q, q >= 1.0, "[1, ∞)".into())?;
    Ok(y.powf(p_minus / q) - 1.0)
}

/// Mixed-regime two-sided bound
/// `y^{p⁻/q} − 1 ≤ y^{p(t)/q} < 2^{p⁺/q − 1} (y^{p⁺/q} + 1)`, `1 ≤ q < p⁺`.
pub fn pointwise_bounds_mixed(y: f64, q: f64, p_minus: f64, p_plus: f64) -> Result<(f64, f64), VarexpError> {
    check_q(
        "mixed pointwise bounds",
        q,
        (1.0..p_plus).contains(&q),
        format!("[1, {p_plus})"),
    )?;
    Ok((
        y.powf(p_minus / q) - 1.0,
        2f64.powf(p_plus / q - 1.0) * (y.powf(p_plus / q) + 1.0),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `M_ρ`, convex regime, general kernel.
    ConvexM,
    /// `M̄_ρ`, concave and mixed regimes.
    ConcaveMixedMbar,
    /// `M*_ρ`, convex regime with `b ≡ 1`.
    SpecialMstar,
}

/// Lower and upper bounds on `‖u‖∞` for cone functions with `z(u) = ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoBounds {
    pub rho: f64,
    pub eps: f64,
    pub m_rho: f64,
    pub m_upper: f64,
    pub q_used: Option<f64>,
    pub bound_kind: BoundKind,
}

/// The q used by an upper bound together with `R = ∫ b^{1/(1−q)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QChoice {
    pub q: f64,
    pub holder: f64,
}

fn holder_at(kernel: &Kernel, q: f64) -> Result<Option<f64>, VarexpError> {
    Ok(match kernel.reverse_holder_norm(q)? {
        HolderNorm::Finite(v) => Some(v),
        HolderNorm::NonIntegrable => None,
    })
}

/// Resolves the q for `M_ρ`: the given one if admissible, otherwise the
/// largest `p⁻ − k·10⁻³` with a finite reverse-Hölder integral.
pub fn convex_q(kernel: &Kernel, p_minus: f64, q: Option<f64>) -> Result<QChoice, VarexpError> {
    if let Some(q) = q {
        check_q(
            "convex upper bound",
            q,
            q > 1.0 && q < p_minus,
            format!("(1, {p_minus})"),
        )?;
        let holder = holder_at(kernel, q)?.ok_or(VarexpError::NonIntegrable(q))?;
        return Ok(QChoice { q, holder });
    }
    let mut k = 1;
    loop {
        let q = p_minus - k as f64 * Q_STEP;
        if q <= 1.0 {
            return Err(VarexpError::NoAdmissibleQ(format!(
                "no q on the grid p⁻ − k·{Q_STEP} in (1, {p_minus}) has a finite reverse-Hölder integral"
            )));
        }
        if let Some(holder) = holder_at(kernel, q)? {
            return Ok(QChoice { q, holder });
        }
        k += 1;
    }
}

/// Resolves the q for `M̄_ρ`: the given one if admissible, otherwise the
/// minimizer of `M̄_ρ` over `1 + k·10⁻³` (below `p⁺` in the mixed regime,
/// up to 5 in the concave one), searched coarse-to-fine.
#[allow(clippy::too_many_arguments)]
pub fn m_bar_q(
    kernel: &Kernel,
    rho: f64,
    profile: &ExponentProfile,
    eta0: f64,
    alpha: f64,
    beta: f64,
    q: Option<f64>,
    exec: Execution,
) -> Result<QChoice, VarexpError> {
    let q_max = match profile.regime() {
        Regime::Mixed => profile.p_plus(),
        Regime::Concave => CONCAVE_Q_MAX,
        Regime::Convex => return Err(VarexpError::Regime("M̄", Regime::Concave)),
    };
    let pm = profile.p_minus();
    if let Some(q) = q {
        let (ok, range) = match profile.regime() {
            Regime::Mixed => (q > 1.0 && q < q_max, format!("(1, {q_max})")),
            _ => (q > 1.0, "(1, ∞)".to_string()),
        };
        check_q("concave/mixed upper bound", q, ok, range)?;
        let holder = holder_at(kernel, q)?.ok_or(VarexpError::NonIntegrable(q))?;
        return Ok(QChoice { q, holder });
    }
    let steps = ((q_max - 1.0) / Q_STEP).ceil() as usize;
    let grid_q = |k: usize| 1.0 + k as f64 * Q_STEP;
    let score = |k: usize| -> Option<(f64, QChoice)> {
        let q = grid_q(k);
        let holder = holder_at(kernel, q).ok()??;
        let v = m_bar(rho, holder, q, pm, eta0, alpha, beta).ok()?;
        v.is_finite().then_some((v, QChoice { q, holder }))
    };
    let pick = |ks: Vec<usize>| {
        exec.map_slice(&ks, |&k| score(k).map(|s| (k, s)))
            .into_iter()
            .flatten()
            .fold(None, |best: Option<(usize, (f64, QChoice))>, cand| match best {
                Some(b) if b.1 .0 <= cand.1 .0 => Some(b),
                _ => Some(cand),
            })
    };
    let valid = |k: &usize| *k >= 1 && grid_q(*k) < q_max;
    let coarse: Vec<usize> = (1..steps)
        .step_by(10)
        .chain([steps.saturating_sub(1)])
        .filter(valid)
        .collect();
    let Some((k0, _)) = pick(coarse) else {
        return Err(VarexpError::NoAdmissibleQ(format!(
            "no q in (1, {q_max}) has a finite reverse-Hölder integral"
        )));
    };
    let fine: Vec<usize> = (k0.saturating_sub(10)..=k0 + 10).filter(valid).collect();
    let (_, (_, choice)) = pick(fine).expect("the coarse winner is in the fine window");
    Ok(choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn profile(src: &str, bounds: Option<(f64, f64)>) -> Result<ExponentProfile, VarexpError> {
        ExponentProfile::new(Expression::parse(src, &["t"]).unwrap(), bounds, Execution::Parallel)
    }

    #[test]
    fn bounds_and_regimes() {
        let p = profile("7/2 + 3/2*cos(t)", None).unwrap();
        assert_abs_diff_eq!(p.p_plus(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.p_minus(), 3.5 + 1.5 * 1f64.cos(), epsilon = 1e-12);
        assert!((p.p_minus() - 4.3104).abs() < 1e-4);
        assert_eq!(p.regime(), Regime::Convex);
        let p = profile("7/2 + 3/2*cos(t)", Some((2.0, 5.0))).unwrap();
        assert_eq!((p.p_minus(), p.p_plus()), (2.0, 5.0));
        assert!(matches!(
            profile("7/2 + 3/2*cos(t)", Some((4.5, 5.0))),
            Err(VarexpError::BadOverride { .. })
        ));

        let p = profile("2", None).unwrap();
        assert_eq!((p.p_minus(), p.p_plus()), (2.0, 2.0));
        assert_eq!(p.constant(), Some(2.0));
        let p = profile("1/2 + t/4", None).unwrap();
        assert_abs_diff_eq!(p.p_minus(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_plus(), 0.75, epsilon = 1e-15);
        assert_eq!(p.regime(), Regime::Concave);
        assert_eq!(profile("1/2 + t", None).unwrap().regime(), Regime::Mixed);
        assert!(matches!(profile("1 + t", None), Err(VarexpError::RegimeGap { .. })));
        assert!(matches!(profile("t - 1/2", None), Err(VarexpError::NonPositive { .. })));
        // interior maximum found by the golden-section pass
        let p = profile("3 - (t - 0.3183)^2", None).unwrap();
        assert_abs_diff_eq!(p.p_plus(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eps_and_m_rho() {
        let e = eps(1.0 / 2500.0, 1.0, 2.0, 5.0);
        assert_abs_diff_eq!(e, 0.02 - (1.0f64 / 2500.0).powf(0.2), epsilon = 1e-15);
        assert!((e + 0.18913).abs() < 1e-5);
        assert_abs_diff_eq!(m_rho(1.0 / 2500.0, 1.0, 2.0, 5.0), 0.02, epsilon = 1e-15);
        assert_eq!(eps(0.3, 1.0, 2.0, 2.0), 0.0);
        assert_eq!(eps(2.0, 1.0, 2.0, 5.0), 0.0);
        assert_eq!(m_rho(1.7, 1.7, 2.0, 5.0), 1.0);
        assert_abs_diff_eq!(m_rho(32.0, 1.0, 2.0, 5.0), 2.0, epsilon = 1e-15);
        // collapsed form equals the sum of its two terms
        for &(rho, mass) in &[(0.01, 1.0), (0.5, 2.0), (3.0, 1.0), (0.2, 1.128)] {
            let r: f64 = rho / mass;
            assert_abs_diff_eq!(
                m_rho(rho, mass, 1.5, 4.0),
                r.powf(0.25) + eps(rho, mass, 1.5, 4.0),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn upper_bounds() {
        let sqrt2 = 2f64.sqrt();
        let sqrt3 = 3f64.sqrt();
        let m = m_star(3.0, 2.0, 5.0, 0.5);
        assert_abs_diff_eq!(m, 4.0 * sqrt2 * (sqrt3 + 1.0), epsilon = 1e-12);
        assert!((m - 15.455).abs() < 1e-3);
        assert_abs_diff_eq!(
            m_star(1.0 / 2500.0, 2.0, 5.0, 0.5),
            102.0 / 25.0 * sqrt2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(m_star(1.0, 2.0, 2.0, 0.5), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m_star(0.0, 2.0, 5.0, 0.5), 2.0 * 2f64.powf(1.5), epsilon = 1e-15);
        // q → p⁻ approaches M*
        let near = m_rho_convex(3.0, 1.0, 2.0 - 1e-9, 2.0, 5.0, 0.5).unwrap();
        assert_abs_diff_eq!(near, m, epsilon = 1e-6);
        let near = m_rho_convex(1.0 / 2500.0, 1.0, 2.0 - 1e-9, 2.0, 5.0, 0.5).unwrap();
        assert_abs_diff_eq!(near, 102.0 / 25.0 * sqrt2, epsilon = 1e-6);
        assert!(m_rho_convex(3.0, 1.0, 2.0, 2.0, 5.0, 0.5).is_err());
        assert!(m_rho_convex(3.0, 1.0, 1.0, 2.0, 5.0, 0.5).is_err());

        assert_abs_diff_eq!(
            m_bar(1.0, 1.0, 2.0, 0.5, 0.25, 0.25, 0.75).unwrap(),
            1024.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            m_bar(0.0, 1.0, 2.0, 0.5, 0.25, 0.25, 0.75).unwrap(),
            4.0 * 16.0,
            epsilon = 1e-12
        );
        assert!(m_bar(1.0, 1.0, 1.0, 0.5, 0.25, 0.25, 0.75).is_err());
        let a = m_bar(0.5, 1.0, 2.0, 0.5, 0.25, 0.25, 0.75).unwrap();
        assert!(a < m_bar(0.6, 1.0, 2.0, 0.5, 0.25, 0.25, 0.75).unwrap());
    }

    #[test]
    fn phi_properties() {
        for k in 1..100 {
            let q = 1.0 + k as f64 / 100.0;
            assert_abs_diff_eq!(
                phi(q, 1.0, 2.0, 5.0, 0.5).unwrap(),
                2.0 * 2f64.powf(2.5),
                epsilon = 1e-12
            );
        }
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let v = phi(1.0 + k as f64 / 100.0, 3.0, 2.0, 5.0, 0.5).unwrap();
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        assert!(phi(2.5, 3.0, 2.0, 5.0, 0.5).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let b = pointwise_lower_convex(1.0, 1.5, 2.0, 5.0).unwrap();
        assert_abs_diff_eq!(b, 2f64.powf(1.0 - 5.0 / 1.5) - 1.0, epsilon = 1e-15);
        assert!(b <= 1.0);
        assert_eq!(pointwise_lower_concave(0.0, 1.0, 0.5).unwrap(), -1.0);
        let (lo, hi) = pointwise_bounds_mixed(2.0, 1.0, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(lo, 2f64.sqrt() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 10.0, epsilon = 1e-15);
        assert!(pointwise_lower_convex(1.0, 2.0, 2.0, 5.0).is_err());
        assert!(pointwise_lower_concave(1.0, 0.5, 0.5).is_err());
        assert!(pointwise_bounds_mixed(1.0, 2.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn q_selection() {
        let one = Kernel::constant_one();
        let c = convex_q(&one, 2.0, None).unwrap();
        assert_abs_diff_eq!(c.q, 1.999, epsilon = 1e-12);
        assert_eq!(c.holder, 1.0);
        assert!(convex_q(&one, 1.0005, None).is_err());
        assert!(convex_q(&one, 2.0, Some(2.5)).is_err());

        let p = profile("1/2 + t/4", None).unwrap();
        let c = m_bar_q(&one, 1.0, &p, 0.25, 0.25, 0.75, None, Execution::Parallel).unwrap();
        // oracle: brute force over the whole fine grid
        let best = (1..4000)
            .map(|k| 1.0 + k as f64 * 1e-3)
            .map(|q| (m_bar(1.0, 1.0, q, 0.5, 0.25, 0.25, 0.75).unwrap(), q))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        assert_abs_diff_eq!(c.q, best.1, epsilon = 1e-12);

        let mixed = profile("1/2 + t", None).unwrap();
        let c = m_bar_q(&one, 2.0, &mixed, 0.25, 0.25, 0.75, None, Execution::Sequential).unwrap();
        assert!(c.q > 1.0 && c.q < 1.5);
    }
}
