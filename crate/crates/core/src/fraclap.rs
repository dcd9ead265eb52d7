//! One-dimensional fractional Laplacian `Δ^{α/2}` and its truncation
//! `Δ̂^{α/2}_λ` (jumps of size at most `λ`) acting on half-line profiles.
//!
//! Both are evaluated from the second-difference form
//! `A(1,−α) ∫ (u(x+h) + u(x−h) − 2u(x)) h^{−1−α} dh`: a Taylor series on
//! `[0, ε]`, adaptive Gauss–Kronrod on `[ε, L]` with break points at the
//! kinks of `h ↦ u(x ± h)`, and a closed-form far field beyond `L`.

use serde::{Deserialize, Serialize};

use crate::analytic::stable_constant;
use crate::error::{param, Error, Result};
use crate::quadrature::{integrate_panels, Tolerance};

/// Clamped cubic spline through `(knots, values)` with zero end slopes,
/// extended by constants outside the knot range. Linear in `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct TabulatedProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    curvature: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawTable> for TabulatedProfile {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        Self::new(raw.knots, raw.values)
    }
}

impl From<TabulatedProfile> for RawTable {
    fn from(t: TabulatedProfile) -> Self {
        RawTable {
            knots: t.knots,
            values: t.values,
        }
    }
}

impl TabulatedProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(param("profile", "need at least two knots with one value each"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(param(
                "profile",
                "knots must be finite and strictly increasing; values finite",
            ));
        }
        let curvature = clamped_spline_curvature(&knots, &values);
        Ok(Self {
            knots,
            values,
            curvature,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, x: f64) -> usize {
        (self.knots.partition_point(|&k| k <= x).max(1) - 1).min(self.knots.len() - 2)
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = 1.0 - a;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.curvature[i] + (b * b * b - b) * self.curvature[i + 1]) * h * h / 6.0
    }

    /// Radius of the largest window `[x − ε, x + ε]` free of knots other
    /// than `x` itself, with the exact expansion
    /// `u(x+h) + u(x−h) − 2u(x) = c2 h² + c3 h³` valid on it.
    fn local_cubic(&self, x: f64) -> (f64, f64, f64) {
        let n = self.knots.len();
        let scale = self.knots[n - 1] - self.knots[0];
        let on_knot = |k: f64| (k - x).abs() <= 1e-14 * scale.max(x.abs());
        let eps = self
            .knots
            .iter()
            .filter(|&&k| !on_knot(k))
            .map(|k| (k - x).abs())
            .fold(f64::INFINITY, f64::min);
        // One-sided second and third derivatives.
        let side = |right: bool| -> (f64, f64) {
            let probe = if right { x + 0.5 * eps } else { x - 0.5 * eps };
            if probe <= self.knots[0] || probe >= self.knots[n - 1] {
                return (0.0, 0.0);
            }
            let i = self.segment(probe);
            let h = self.knots[i + 1] - self.knots[i];
            let b = ((x - self.knots[i]) / h).clamp(0.0, 1.0);
            let m = (1.0 - b) * self.curvature[i] + b * self.curvature[i + 1];
            let t = (self.curvature[i + 1] - self.curvature[i]) / h;
            (m, t)
        };
        let (m_r, t_r) = side(true);
        let (m_l, t_l) = side(false);
        (eps, 0.5 * (m_l + m_r), (t_r - t_l) / 6.0)
    }
}

/// Second derivatives of the cubic spline with `s'(k_0) = s'(k_n) = 0`.
fn clamped_spline_curvature(k: &[f64], v: &[f64]) -> Vec<f64> {
    let n = k.len();
    let h: Vec<f64> = k.windows(2).map(|w| w[1] - w[0]).collect();
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    diag[0] = h[0] / 3.0;
    upper[0] = h[0] / 6.0;
    rhs[0] = (v[1] - v[0]) / h[0];
    for i in 1..n - 1 {
        lower[i] = h[i - 1] / 6.0;
        diag[i] = (h[i - 1] + h[i]) / 3.0;
        upper[i] = h[i] / 6.0;
        rhs[i] = (v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1];
    }
    lower[n - 1] = h[n - 2] / 6.0;
    diag[n - 1] = h[n - 2] / 3.0;
    rhs[n - 1] = -(v[n - 1] - v[n - 2]) / h[n - 2];
    // Thomas algorithm.
    for i in 1..n {
        let m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut out = vec![0.0; n];
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
    out
}

/// Test profile on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `w_p(x) = (x⁺)^p`.
    Power {
        p: f64,
    },
    /// `(min(x⁺, cap))^p`, a power profile frozen beyond `cap`.
    BoundedPower {
        p: f64,
        cap: f64,
    },
    Constant {
        value: f64,
    },
    Tabulated(TabulatedProfile),
}

impl Profile {
    pub fn power(p: f64) -> Result<Self> {
        let prof = Profile::Power { p };
        prof.validate()?;
        Ok(prof)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Profile::Power { p } if !(p > 0.0 && p.is_finite()) => Err(param("p", format!("{p} must be positive"))),
            Profile::BoundedPower { p, cap } if !(p > 0.0 && p.is_finite() && cap > 0.0 && cap.is_finite()) => {
                Err(param("profile", "bounded power needs p > 0 and cap > 0"))
            }
            Profile::Constant { value } if !value.is_finite() => Err(param("value", "must be finite")),
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Power { p } => {
                if x > 0.0 {
                    x.powf(*p)
                } else {
                    0.0
                }
            }
            Profile::BoundedPower { p, cap } => {
                if x > 0.0 {
                    x.min(*cap).powf(*p)
                } else {
                    0.0
                }
            }
            Profile::Constant { value } => *value,
            Profile::Tabulated(t) => t.value(x),
        }
    }

    /// Kink locations in `h` of `h ↦ u(x ± h)`.
    fn kinks(&self, x: f64) -> Vec<f64> {
        match self {
            Profile::Power { .. } => vec![x.abs()],
            Profile::BoundedPower { cap, .. } => vec![x.abs(), (cap - x).abs()],
            Profile::Constant { .. } => Vec::new(),
            Profile::Tabulated(t) => t.knots.iter().map(|k| (k - x).abs()).collect(),
        }
    }

    /// Radius `ε` and the series `(c2, c3, c4, remainder)` such that
    /// `u(x+h) + u(x−h) − 2u(x) = c2 h² + c3 h³ + c4 h⁴ + O(remainder · h⁶)`
    /// on `[0, ε]`.
    fn local_series(&self, x: f64) -> (f64, f64, f64, f64, f64) {
        const SHARE: f64 = 0.05;
        match self {
            Profile::Power { p } => {
                let d = |k: i32| falling(*p, k) * x.powf(p - k as f64);
                (SHARE * x, d(2), 0.0, d(4) / 12.0, (d(6) / 360.0).abs())
            }
            Profile::BoundedPower { p, cap } => {
                if x >= *cap {
                    ((x - cap) * SHARE, 0.0, 0.0, 0.0, 0.0)
                } else {
                    let d = |k: i32| falling(*p, k) * x.powf(p - k as f64);
                    (SHARE * x.min(cap - x), d(2), 0.0, d(4) / 12.0, (d(6) / 360.0).abs())
                }
            }
            Profile::Constant { .. } => (f64::INFINITY, 0.0, 0.0, 0.0, 0.0),
            Profile::Tabulated(t) => {
                let (eps, c2, c3) = t.local_cubic(x);
                (eps, c2, c3, 0.0, 0.0)
            }
        }
    }

    /// `(u(−∞), u(+∞))` for profiles that are constant far away.
    fn far_constants(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Power { .. } => None,
            Profile::BoundedPower { p, cap } => Some((0.0, cap.powf(*p))),
            Profile::Constant { value } => Some((*value, *value)),
            Profile::Tabulated(t) => Some((t.values[0], *t.values.last().expect("non-empty"))),
        }
    }
}

/// Half of a quadrature panel, parametrised by `w ∈ [0, 1]` with nodes
/// clustered quartically at the outer end `anchor`, where the profile may
/// have an algebraic kink.
#[derive(Debug, Clone, Copy)]
struct HalfPanel {
    anchor: f64,
    /// Signed length from `anchor` to the panel midpoint.
    span: f64,
}

impl HalfPanel {
    #[inline]
    fn map(&self, w: f64) -> (f64, f64) {
        let w = w.clamp(0.0, 1.0);
        let w3 = w * w * w;
        (self.anchor + self.span * w3 * w, 4.0 * self.span.abs() * w3)
    }
}

fn half_panels(breaks: &[f64]) -> Vec<HalfPanel> {
    breaks
        .windows(2)
        .flat_map(|b| {
            let m = 0.5 * (b[0] + b[1]);
            [
                HalfPanel {
                    anchor: b[0],
                    span: m - b[0],
                },
                HalfPanel {
                    anchor: b[1],
                    span: m - b[1],
                },
            ]
        })
        .collect()
}

/// `p (p−1) ⋯ (p−k+1)`.
fn falling(p: f64, k: i32) -> f64 {
    (0..k).map(|j| p - j as f64).product()
}

/// Operator value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorValue {
    pub value: f64,
    pub error: f64,
}

/// `∫_lo^hi h^{s−1} dh`, with `hi = ∞` allowed for `s < 0`.
fn power_integral(s: f64, lo: f64, hi: f64) -> f64 {
    if hi.is_infinite() {
        return -lo.powf(s) / s;
    }
    if s.abs() < 1e-14 {
        (hi / lo).ln()
    } else {
        (hi.powf(s) - lo.powf(s)) / s
    }
}

/// `∫_L^Λ ((x+h)^p − 2x^p) h^{−1−α} dh` for `L > x` by the binomial series.
fn power_far_field(p: f64, x: f64, alpha: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut sum = -2.0 * x.powf(p) * power_integral(-alpha, lo, hi);
    let mut coeff = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..400 {
        let term = coeff * x.powi(k) * power_integral(p - k as f64 - alpha, lo, hi);
        sum += term;
        last = term.abs();
        if last <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        coeff *= (p - k as f64) / (k + 1) as f64;
        if coeff == 0.0 {
            last = 0.0;
            break;
        }
    }
    (sum, last)
}

fn second_difference_integral(profile: &Profile, alpha: f64, x: f64, lambda: f64, tol: f64) -> Result<OperatorValue> {
    profile.validate()?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", format!("{alpha} not in (0, 2)")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(param("x", format!("{x} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(param("tol", "must be positive"));
    }
    if let Profile::Power { p } = *profile {
        if lambda.is_infinite() && p >= alpha {
            return Err(param(
                "p",
                format!("the full operator needs p < alpha, got p = {p}, alpha = {alpha}"),
            ));
        }
    }
    if let Profile::Constant { .. } = profile {
        return Ok(OperatorValue { value: 0.0, error: 0.0 });
    }
    let c = stable_constant(1, alpha)?;
    let u0 = profile.value(x);
    let second_diff = |h: f64| profile.value(x + h) + profile.value(x - h) - 2.0 * u0;

    let (eps_series, c2, c3, c4, rem) = profile.local_series(x);
    let mut eps = eps_series.min(lambda);
    if rem > 0.0 {
        eps = eps.min((0.25 * tol / c * (6.0 - alpha) / rem).powf(1.0 / (6.0 - alpha)));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    if eps > 0.0 {
        value += c2 * eps.powf(2.0 - alpha) / (2.0 - alpha)
            + c3 * eps.powf(3.0 - alpha) / (3.0 - alpha)
            + c4 * eps.powf(4.0 - alpha) / (4.0 - alpha);
        error += rem * eps.powf(6.0 - alpha) / (6.0 - alpha);
    }

    let kinks = profile.kinks(x);
    let far = match profile {
        Profile::Power { .. } => 4.0 * x,
        _ => 2.0 * kinks.iter().copied().fold(0.0, f64::max).max(x),
    }
    .max(eps);
    let upper = far.min(lambda);
    if upper > eps {
        let mut breaks = vec![eps];
        breaks.extend(kinks.iter().copied().filter(|&k| k > eps && k < upper));
        breaks.push(upper);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let budget = Tolerance {
            abs: 0.5 * tol / c,
            rel: 0.0,
            max_intervals: 50_000,
        };
        let pieces = half_panels(&breaks);
        let integrand = |t: f64| {
            let j = (t.floor() as usize).min(pieces.len() - 1);
            let (h, jac) = pieces[j].map(t - j as f64);
            second_diff(h) * h.powf(-1.0 - alpha) * jac
        };
        let unit_breaks: Vec<f64> = (0..=pieces.len()).map(|j| j as f64).collect();
        let q = integrate_panels(integrand, &unit_breaks, budget);
        let q = match q {
            Ok(q) => q,
            Err(Error::Accuracy { estimate, error: e }) => {
                return Err(Error::Accuracy {
                    estimate: c * (value + estimate),
                    error: c * (error + e),
                })
            }
            Err(e) => return Err(e),
        };
        value += q.value;
        error += q.error;
    }
    if lambda > far {
        match profile.far_constants() {
            Some((left, right)) => value += (left + right - 2.0 * u0) * power_integral(-alpha, far, lambda),
            None => {
                let Profile::Power { p } = *profile else { unreachable!() };
                let (tail, last) = power_far_field(p, x, alpha, far, lambda);
                value += tail;
                error += last;
            }
        }
    }
    let out = OperatorValue {
        value: c * value,
        error: c * error,
    };
    if out.error > tol {
        return Err(Error::Accuracy {
            estimate: out.value,
            error: out.error,
        });
    }
    Ok(out)
}

/// `Δ^{α/2} u(x)` for a one-dimensional profile.
pub fn frac_laplacian_1d(profile: &Profile, alpha: f64, x: f64, tol: f64) -> Result<OperatorValue> {
    second_difference_integral(profile, alpha, x, f64::INFINITY, tol)
}

/// The operator with jumps restricted to `|y − x| ≤ lambda`, normalised
/// by `A(1, −exponent)`.
pub fn truncated_frac_laplacian_1d(
    profile: &Profile,
    exponent: f64,
    lambda: f64,
    x: f64,
    tol: f64,
) -> Result<OperatorValue> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(param("lambda", format!("{lambda} must be positive and finite")));
    }
    second_difference_integral(profile, exponent, x, lambda, tol)
}

/// Closed form `Δ^{α/2} w_p(x) = A(1,−α) Γ(−α) [Γ(α−p)/Γ(−p) + Γ(p+1)/Γ(p+1−α)] x^{p−α}`
/// for `0 < p < α`, `α ≠ 1`, obtained by continuing the two Beta integrals
/// of the second-difference form.
pub fn power_profile_exact(p: f64, alpha: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && p < alpha && alpha < 2.0) || (alpha - 1.0).abs() < 1e-12 {
        return Err(param("p", "closed form needs 0 < p < alpha < 2 and alpha != 1"));
    }
    let rgamma = |z: f64| {
        if z <= 0.0 && z == z.round() {
            0.0
        } else {
            1.0 / libm::tgamma(z)
        }
    };
    let bracket = libm::tgamma(alpha - p) * rgamma(-p) + libm::tgamma(p + 1.0) * rgamma(p + 1.0 - alpha);
    Ok(stable_constant(1, alpha)? * libm::tgamma(-alpha) * bracket * x.powf(p - alpha))
}
