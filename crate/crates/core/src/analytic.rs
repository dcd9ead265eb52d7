//! Closed-form quantities attached to the operator `Δ^{α/2} + a^β Δ^{β/2}`:
//! the fractional-Laplacian normalising constant, the Lévy density of the
//! mixed process, and the two-sided comparison functions for the free heat
//! kernel, the Dirichlet heat kernel and the Green function.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{param, Error, Result};

/// The triple `(α, β, a)` together with the dimension `d`.
///
/// Construction validates `d ≥ 1`, `0 < β < α < 2` and `a ≥ 0`, and caches
/// the two normalising constants `A(d, −α)` and `A(d, −β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct MixedStableParams {
    d: usize,
    alpha: f64,
    beta: f64,
    a: f64,
    const_alpha: f64,
    const_beta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    d: usize,
    alpha: f64,
    beta: f64,
    a: f64,
}

impl TryFrom<RawParams> for MixedStableParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        MixedStableParams::new(raw.d, raw.alpha, raw.beta, raw.a)
    }
}

impl From<MixedStableParams> for RawParams {
    fn from(p: MixedStableParams) -> Self {
        RawParams {
            d: p.d,
            alpha: p.alpha,
            beta: p.beta,
            a: p.a,
        }
    }
}

impl MixedStableParams {
    pub fn new(d: usize, alpha: f64, beta: f64, a: f64) -> Result<Self> {
        if d == 0 {
            return Err(param("d", "dimension must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(param("alpha", format!("{alpha} not in (0, 2)")));
        }
        if !(beta > 0.0 && beta < alpha) {
            return Err(param("beta", format!("{beta} not in (0, alpha={alpha})")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(param("a", format!("{a} must be finite and >= 0")));
        }
        Ok(Self {
            d,
            alpha,
            beta,
            a,
            const_alpha: stable_constant(d, alpha)?,
            const_beta: stable_constant(d, beta)?,
        })
    }

    /// Pure α-stable parameters (`a = 0`); β only has to satisfy `0 < β < α`.
    pub fn pure(d: usize, alpha: f64) -> Result<Self> {
        Self::new(d, alpha, alpha / 2.0, 0.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same exponents and dimension with a different weight.
    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.d, self.alpha, self.beta, a)
    }

    /// `A(d, −α)`.
    pub fn const_alpha(&self) -> f64 {
        self.const_alpha
    }
    /// `A(d, −β)`.
    pub fn const_beta(&self) -> f64 {
        self.const_beta
    }

    /// `a^β`, the coefficient in front of `Δ^{β/2}`.
    pub fn weight(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            self.a.powf(self.beta)
        }
    }
}

/// A time together with two points and their distances to the complement of
/// a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta_x: f64,
    pub delta_y: f64,
}

impl SpaceTimePoint {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>, delta_x: f64, delta_y: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        if !(delta_x >= 0.0 && delta_y >= 0.0) {
            return Err(Error::Domain("distances to the boundary must be >= 0".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Domain("x and y have different dimensions".into()));
        }
        Ok(Self {
            t,
            x,
            y,
            delta_x,
            delta_y,
        })
    }

    pub fn distance(&self) -> f64 {
        euclidean(&self.x, &self.y)
    }
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `A(d, −α) = α 2^{α−1} π^{−d/2} Γ((d+α)/2) / Γ(1 − α/2)`.
pub fn stable_constant(d: usize, alpha: f64) -> Result<f64> {
    if d == 0 {
        return Err(param("d", "dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", format!("{alpha} not in (0, 2)")));
    }
    let d = d as f64;
    Ok(
        alpha * 2f64.powf(alpha - 1.0) * PI.powf(-d / 2.0) * libm::tgamma((d + alpha) / 2.0)
            / libm::tgamma(1.0 - alpha / 2.0),
    )
}

/// `ψ^a(r) = 1 + a^β (A(d,−β)/A(d,−α)) r^{α−β}`.
pub fn psi_a(r: f64, p: &MixedStableParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("r = {r} must be >= 0")));
    }
    let w = p.weight();
    if w == 0.0 || r == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 + w * p.const_beta / p.const_alpha * r.powf(p.alpha - p.beta))
}

/// Jump intensity `j^a(r) = A(d,−α) r^{−d−α} + a^β A(d,−β) r^{−d−β}`.
pub fn levy_density(r: f64, p: &MixedStableParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    Ok(levy_density_unchecked(r, p))
}

#[inline]
pub(crate) fn levy_density_unchecked(r: f64, p: &MixedStableParams) -> f64 {
    let d = p.d as f64;
    let mut j = p.const_alpha * r.powf(-d - p.alpha);
    let w = p.weight();
    if w > 0.0 {
        j += w * p.const_beta * r.powf(-d - p.beta);
    }
    j
}

/// `∫_{B(c,R)} j^a(|x − y|) dy` for a point `x` at distance `dist > R`
/// from the centre `c`, by quadrature over the distance `ρ = |x − y|`
/// weighted with the measure of `{y ∈ B(c,R) : |x − y| = ρ}`.
pub fn levy_mass_ball(dist: f64, radius: f64, p: &MixedStableParams) -> Result<f64> {
    if !(radius > 0.0 && dist > radius) {
        return Err(Error::Domain(format!(
            "need 0 < radius < dist, got radius={radius}, dist={dist}"
        )));
    }
    if p.d > 3 {
        return Err(Error::UnsupportedDimension(p.d));
    }
    let (lo, hi) = (dist - radius, dist + radius);
    let shell = |rho: f64| -> f64 {
        let cos = ((rho * rho + dist * dist - radius * radius) / (2.0 * rho * dist)).clamp(-1.0, 1.0);
        match p.d {
            1 => 1.0,
            2 => 2.0 * rho * cos.acos(),
            _ => 2.0 * PI * rho * rho * (1.0 - cos),
        }
    };
    let tol = crate::quadrature::Tolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_intervals: 5_000,
    };
    let res = crate::quadrature::integrate(|rho| levy_density_unchecked(rho, p) * shell(rho), lo, hi, tol)?;
    Ok(res.value)
}

/// `t/r^{d+α} + a^β t/r^{d+β}`; `None` when `r = 0`.
fn jump_term(t: f64, r: f64, p: &MixedStableParams) -> Option<f64> {
    if r == 0.0 {
        return None;
    }
    let d = p.d as f64;
    Some(t * r.powf(-d - p.alpha) + p.weight() * t * r.powf(-d - p.beta))
}

/// Free two-sided comparison function
/// `f^a(t, r) = ((a^β t)^{−d/β} ∧ t^{−d/α}) ∧ (t/r^{d+α} + a^β t/r^{d+β})`.
///
/// At `r = 0` the jump term is infinite and the on-diagonal term is returned.
pub fn free_bound_f(t: f64, r: f64, p: &MixedStableParams) -> Result<f64> {
    check_time(t)?;
    check_radius(r)?;
    let d = p.d as f64;
    let mut diag = t.powf(-d / p.alpha);
    let w = p.weight();
    if w > 0.0 {
        diag = diag.min((w * t).powf(-d / p.beta));
    }
    Ok(match jump_term(t, r, p) {
        Some(j) => diag.min(j),
        None => diag,
    })
}

/// `E_x[τ_{B(0,R)}]` for the pure isotropic α-stable process:
/// `(R² − |x|²)^{α/2} Γ(d/2) / (2^α Γ(1 + α/2) Γ((d + α)/2))`.
pub fn pure_stable_mean_exit_time(d: usize, alpha: f64, radius: f64, dist_from_center: f64) -> Result<f64> {
    if d == 0 {
        return Err(param("d", "dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", format!("{alpha} not in (0, 2)")));
    }
    if !(radius > 0.0 && dist_from_center >= 0.0 && dist_from_center < radius) {
        return Err(Error::Domain("need 0 <= |x| < radius".into()));
    }
    let df = d as f64;
    Ok(
        (radius * radius - dist_from_center * dist_from_center).powf(alpha / 2.0) * libm::tgamma(df / 2.0)
            / (2f64.powf(alpha) * libm::tgamma(1.0 + alpha / 2.0) * libm::tgamma((df + alpha) / 2.0)),
    )
}

/// Boundary factor `1 ∧ δ^{α/2}/√t`.
pub fn boundary_factor(delta: f64, t: f64, alpha: f64) -> f64 {
    (delta.powf(alpha / 2.0) / t.sqrt()).min(1.0)
}

/// Dirichlet comparison function
/// `f_D^a = (1 ∧ δ_x^{α/2}/√t)(1 ∧ δ_y^{α/2}/√t)(t^{−d/α} ∧ (t/r^{d+α} + a^β t/r^{d+β}))`.
pub fn dirichlet_bound_fd(pt: &SpaceTimePoint, p: &MixedStableParams) -> Result<f64> {
    check_time(pt.t)?;
    if !(pt.delta_x >= 0.0 && pt.delta_y >= 0.0) {
        return Err(Error::Domain("distances to the boundary must be >= 0".into()));
    }
    let t = pt.t;
    let diag = t.powf(-(p.d as f64) / p.alpha);
    let bulk = match jump_term(t, pt.distance(), p) {
        Some(j) => diag.min(j),
        None => diag,
    };
    Ok(boundary_factor(pt.delta_x, t, p.alpha) * boundary_factor(pt.delta_y, t, p.alpha) * bulk)
}

/// Green-function comparison function `g_D(x, y)` written in terms of
/// `r = |x − y|`, `δ_D(x)` and `δ_D(y)`.
///
/// The branch is selected by `d` and `α`: `d > α`, `d = 1 = α` (exact float
/// equality), or `d = 1 < α`.
pub fn green_bound_gd(r: f64, delta_x: f64, delta_y: f64, p: &MixedStableParams) -> Result<f64> {
    check_radius(r)?;
    if !(delta_x >= 0.0 && delta_y >= 0.0) {
        return Err(Error::Domain("distances to the boundary must be >= 0".into()));
    }
    let alpha = p.alpha;
    let d = p.d as f64;
    let u0_num = delta_x.powf(alpha / 2.0) * delta_y.powf(alpha / 2.0);
    match GreenBranch::of(p) {
        GreenBranch::Transient => {
            if r == 0.0 {
                return Err(Error::Singular("g_D is infinite on the diagonal when d > alpha".into()));
            }
            Ok((u0_num / r.powf(alpha)).min(1.0) * r.powf(alpha - d))
        }
        GreenBranch::Critical => {
            if r == 0.0 {
                return Err(Error::Singular(
                    "g_D is infinite on the diagonal when d = 1 = alpha".into(),
                ));
            }
            Ok((u0_num / r).ln_1p())
        }
        GreenBranch::Recurrent => {
            let first = (delta_x * delta_y).powf((alpha - 1.0) / 2.0);
            if r == 0.0 {
                Ok(first)
            } else {
                Ok(first.min(u0_num / r))
            }
        }
    }
}

/// Which of the three Green-function regimes applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenBranch {
    /// `d > α`
    Transient,
    /// `d = 1 = α`
    Critical,
    /// `d = 1 < α`
    Recurrent,
}

impl GreenBranch {
    pub fn of(p: &MixedStableParams) -> Self {
        let d = p.d as f64;
        if d > p.alpha {
            GreenBranch::Transient
        } else if d == p.alpha {
            GreenBranch::Critical
        } else {
            GreenBranch::Recurrent
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t = {t} must be positive and finite")))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("r = {r} must be finite and >= 0")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(d: usize, alpha: f64, beta: f64, a: f64) -> MixedStableParams {
        MixedStableParams::new(d, alpha, beta, a).unwrap()
    }

    #[test]
    fn cauchy_interval_exit_time_is_one() {
        assert!((pure_stable_mean_exit_time(1, 1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        // Brownian limit with generator Δ: E_0 τ = R²/(2d).
        let near_two = pure_stable_mean_exit_time(3, 1.999_999, 1.0, 0.0).unwrap();
        assert!((near_two - 1.0 / 6.0).abs() < 1e-5);
        assert!(pure_stable_mean_exit_time(1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn stable_constant_cauchy() {
        let c = stable_constant(1, 1.0).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-14);
        let c2 = stable_constant(2, 1.0).unwrap();
        assert!((c2 - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!(stable_constant(1, 1e-12).unwrap() < 1e-11);
        assert!(stable_constant(1, 2.0).is_err());
        assert!(stable_constant(1, 0.0).is_err());
    }

    #[test]
    fn stable_constant_matches_hand_values() {
        // α = 1.5, d = 1: 1.5·√2·π^{-1/2}·Γ(1.25)/Γ(0.25)
        let gamma_125 = 0.906_402_477_055_477_f64;
        let gamma_025 = 3.625_609_908_221_908_f64;
        let want = 1.5 * 2f64.sqrt() / PI.sqrt() * gamma_125 / gamma_025;
        assert!((stable_constant(1, 1.5).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn params_validation() {
        assert!(MixedStableParams::new(0, 1.5, 0.5, 1.0).is_err());
        assert!(MixedStableParams::new(1, 1.5, 1.5, 1.0).is_err());
        assert!(MixedStableParams::new(1, 1.5, 0.5, -1.0).is_err());
        assert!(MixedStableParams::new(1, 2.0, 0.5, 1.0).is_err());
        let p = params(1, 1.5, 0.5, 1.0);
        assert_eq!(p.with_a(0.0).unwrap().weight(), 0.0);
    }

    #[test]
    fn psi_examples() {
        let p0 = params(1, 1.5, 0.5, 0.0);
        assert_eq!(psi_a(3.0, &p0).unwrap(), 1.0);
        let p1 = params(1, 1.5, 0.5, 1.0);
        assert_eq!(psi_a(0.0, &p1).unwrap(), 1.0);
        let want = 1.0 + stable_constant(1, 0.5).unwrap() / stable_constant(1, 1.5).unwrap();
        assert!((psi_a(1.0, &p1).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn levy_density_examples() {
        let p = params(1, 1.0, 0.5, 0.0);
        assert!((levy_density(1.0, &p).unwrap() - 1.0 / PI).abs() < 1e-14);
        let q = params(1, 1.5, 0.5, 1.0);
        assert!(levy_density(2.0, &q).unwrap() < levy_density(1.0, &q).unwrap());
        assert!(levy_density(0.0, &q).is_err());
    }

    #[test]
    fn levy_mass_ball_d1_closed_form() {
        let p = params(1, 1.5, 0.5, 1.0);
        // ∫_3^4 (A_α ρ^{-2.5} + A_β ρ^{-1.5}) dρ
        let want = p.const_alpha() / 1.5 * (3f64.powf(-1.5) - 4f64.powf(-1.5))
            + p.const_beta() / 0.5 * (3f64.powf(-0.5) - 4f64.powf(-0.5));
        let got = levy_mass_ball(3.5, 0.5, &p).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
        assert!(levy_mass_ball(0.4, 0.5, &p).is_err());
    }

    #[test]
    fn levy_mass_ball_small_ball_limit() {
        // a tiny far ball sees j(dist)·|B|
        for d in 2..=3 {
            let p = params(d, 1.2, 0.4, 0.7);
            let (dist, radius) = (2.0, 1e-3);
            let vol = if d == 2 {
                PI * radius * radius
            } else {
                4.0 / 3.0 * PI * radius.powi(3)
            };
            let got = levy_mass_ball(dist, radius, &p).unwrap();
            let want = levy_density(dist, &p).unwrap() * vol;
            assert!(((got - want) / want).abs() < 1e-5, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn free_bound_examples() {
        let p = params(1, 1.5, 0.5, 1.0);
        assert_eq!(free_bound_f(1.0, 0.0, &p).unwrap(), 1.0);
        let v = free_bound_f(1.0, 10.0, &p).unwrap();
        assert!((v - (10f64.powf(-2.5) + 10f64.powf(-1.5))).abs() < 1e-15);
        assert!((v - 0.034_785).abs() < 1e-5);
        assert!(free_bound_f(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn dirichlet_bound_examples() {
        let p = params(1, 1.5, 0.5, 1.0);
        let pt = SpaceTimePoint::new(0.5, vec![0.1], vec![0.4], 0.0, 0.3).unwrap();
        assert_eq!(dirichlet_bound_fd(&pt, &p).unwrap(), 0.0);

        let pt = SpaceTimePoint::new(0.5, vec![0.1], vec![0.4], 0.9, 0.7).unwrap();
        let r: f64 = 0.3;
        let bulk = 0.5f64.powf(-1.0 / 1.5).min(0.5 / r.powf(2.5) + 0.5 / r.powf(1.5));
        assert!((dirichlet_bound_fd(&pt, &p).unwrap() - bulk).abs() < 1e-15);
        assert!(SpaceTimePoint::new(0.0, vec![0.0], vec![0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn green_bound_examples() {
        let p = params(1, 1.5, 0.5, 1.0);
        assert!((green_bound_gd(10.0, 1.0, 1.0, &p).unwrap() - 0.1).abs() < 1e-15);

        let cauchy = params(1, 1.0, 0.5, 1.0);
        assert_eq!(green_bound_gd(0.5, 0.0, 0.7, &cauchy).unwrap(), 0.0);
        assert!(green_bound_gd(0.0, 0.5, 0.7, &cauchy).is_err());

        let p3 = params(3, 1.5, 0.5, 1.0);
        let r: f64 = 0.2;
        assert!((green_bound_gd(r, 0.9, 0.9, &p3).unwrap() - r.powf(1.5 - 3.0)).abs() < 1e-12);
        assert!(green_bound_gd(0.0, 0.5, 0.5, &p3).is_err());
        // d = 1 < α is finite on the diagonal
        assert!((green_bound_gd(0.0, 0.25, 0.25, &p).unwrap() - 0.0625f64.powf(0.25)).abs() < 1e-15);
    }

    fn arb_params() -> impl Strategy<Value = MixedStableParams> {
        (1usize..=3, 0.05f64..1.95, 0.01f64..0.99, 0.0f64..3.0)
            .prop_map(|(d, alpha, frac, a)| MixedStableParams::new(d, alpha, alpha * frac, a).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn psi_at_least_one_and_monotone(p in arb_params(), r in 0.0f64..50.0, dr in 0.0f64..5.0, da in 0.0f64..2.0) {
            let v = psi_a(r, &p).unwrap();
            prop_assert!(v >= 1.0);
            prop_assert!(psi_a(r + dr, &p).unwrap() >= v);
            let q = p.with_a(p.a() + da).unwrap();
            prop_assert!(psi_a(r, &q).unwrap() >= v);
        }

        #[test]
        fn levy_density_factorises(p in arb_params(), r in 1e-3f64..100.0) {
            let d = p.d() as f64;
            let lhs = levy_density(r, &p).unwrap();
            let rhs = p.const_alpha() / r.powf(d + p.alpha()) * psi_a(r, &p).unwrap();
            prop_assert!(((lhs - rhs) / lhs).abs() <= 1e-12);
        }

        #[test]
        fn dirichlet_bound_symmetric_and_monotone(
            p in arb_params(), t in 1e-3f64..10.0,
            x in -2.0f64..2.0, y in -2.0f64..2.0,
            dx in 0.0f64..2.0, dy in 0.0f64..2.0, bump in 0.0f64..1.0,
        ) {
            let n = p.d();
            let xv = vec![x; n];
            let yv = vec![y; n];
            let fwd = dirichlet_bound_fd(&SpaceTimePoint::new(t, xv.clone(), yv.clone(), dx, dy).unwrap(), &p).unwrap();
            let bwd = dirichlet_bound_fd(&SpaceTimePoint::new(t, yv.clone(), xv.clone(), dy, dx).unwrap(), &p).unwrap();
            prop_assert!((fwd - bwd).abs() <= 1e-15 * fwd.abs().max(1.0));
            let bigger = dirichlet_bound_fd(&SpaceTimePoint::new(t, xv.clone(), yv.clone(), dx + bump, dy).unwrap(), &p).unwrap();
            prop_assert!(bigger >= fwd);
            prop_assert_eq!(fwd == 0.0, dx == 0.0 || dy == 0.0);
        }

        #[test]
        fn free_bound_pure_stable_limit(alpha in 0.05f64..1.95, d in 1usize..=3, t in 1e-3f64..100.0, r in 0.0f64..100.0) {
            let p = MixedStableParams::pure(d, alpha).unwrap();
            let df = d as f64;
            let diag = t.powf(-df / alpha);
            let want = if r == 0.0 { diag } else { diag.min(t * r.powf(-df - alpha)) };
            let got = free_bound_f(t, r, &p).unwrap();
            prop_assert!((got - want).abs() <= 1e-14 * want);
        }

        #[test]
        fn green_bound_transient_below_riesz(alpha in 0.05f64..1.95, d in 2usize..=3, r in 1e-3f64..5.0, dx in 0.0f64..3.0, dy in 0.0f64..3.0) {
            let p = MixedStableParams::new(d, alpha, alpha / 2.0, 1.0).unwrap();
            let g = green_bound_gd(r, dx, dy, &p).unwrap();
            prop_assert!(g >= 0.0);
            prop_assert!(g <= r.powf(alpha - d as f64) * (1.0 + 1e-14));
        }
    }
}
