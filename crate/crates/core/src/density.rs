//! Free transition density `p^a(t, x, y)` of the mixed process by Fourier
//! inversion of `exp(−t(|ξ|^α + a^β|ξ|^β))`.
//!
//! The d-dimensional inversion is reduced to a radial integral:
//!
//! * d = 1: `(1/π) ∫ e^{−tψ(s)} cos(sr) ds`
//! * d = 2: `(1/2π) ∫ e^{−tψ(s)} J₀(sr) s ds`
//! * d = 3: `(1/(2π² r)) ∫ e^{−tψ(s)} s sin(sr) ds`
//!
//! Panels are at most an eighth of the oscillation period wide and the
//! frequency range is cut where an incomplete-gamma bound on the remaining
//! tail drops below a tenth of the absolute tolerance.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic::{free_bound_f, MixedStableParams};
use crate::error::{param, Error, Result};
use crate::quadrature::{integrate_panels, QuadResult, Tolerance};
use crate::special::bessel_j0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CutoffPolicy {
    /// Cut where `e^{−t s^α} < 1e−14` and the analytic tail bound is below
    /// `abs_tol / 10`.
    TailBound,
    /// Integrate on `[0, s_max]` only; the tail bound is still added to the
    /// reported error.
    Fixed { s_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub cutoff_policy: CutoffPolicy,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_panels: 50_000,
            cutoff_policy: CutoffPolicy::TailBound,
        }
    }
}

impl QuadratureSettings {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(param("quadrature tolerance", "abs_tol and rel_tol must be > 0"));
        }
        if self.max_panels == 0 {
            return Err(param("max_panels", "must be >= 1"));
        }
        Ok(())
    }
}

fn radial_prefactor(d: usize) -> f64 {
    match d {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    }
}

/// Bound on `Γ(a, x)` for `x > max(a − 1, 0) + 1`.
fn upper_gamma_bound(a: f64, x: f64) -> f64 {
    let base = (a - 1.0) * x.ln() - x;
    if a <= 1.0 {
        base.exp()
    } else {
        base.exp() * x / (x - (a - 1.0))
    }
}

/// Bound on `c_d ∫_S^∞ s^{d−1} e^{−t s^α} ds`.
fn tail_bound(d: usize, t: f64, alpha: f64, s: f64) -> f64 {
    let a = d as f64 / alpha;
    let x = t * s.powf(alpha);
    if x <= (a - 1.0).max(0.0) + 1.0 {
        return f64::INFINITY;
    }
    radial_prefactor(d) / alpha * t.powf(-a) * upper_gamma_bound(a, x)
}

fn frequency_cutoff(d: usize, t: f64, alpha: f64, q: &QuadratureSettings) -> (f64, f64) {
    match q.cutoff_policy {
        CutoffPolicy::Fixed { s_max } => (s_max, tail_bound(d, t, alpha, s_max)),
        CutoffPolicy::TailBound => {
            let target = q.abs_tol / 10.0;
            let mut s = (1e14f64.ln() / t).powf(1.0 / alpha);
            while tail_bound(d, t, alpha, s) > target {
                s *= 1.25;
            }
            (s, tail_bound(d, t, alpha, s))
        }
    }
}

fn check_args(t: f64, r: f64, p: &MixedStableParams, q: &QuadratureSettings) -> Result<()> {
    if p.d() > 3 {
        return Err(Error::UnsupportedDimension(p.d()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r = {r} must be >= 0")));
    }
    q.validate()
}

fn panels(s_max: f64, r: f64, max_panels: usize) -> Result<Vec<f64>> {
    let width = PI / (4.0 * r.max(1.0));
    let n = (s_max / width).ceil() as usize;
    if n > max_panels {
        return Err(Error::Accuracy {
            estimate: f64::NAN,
            error: f64::INFINITY,
        });
    }
    let n = n.max(1);
    Ok((0..=n).map(|k| s_max * k as f64 / n as f64).collect())
}

/// `p^a(t, x, y)` for `|x − y| = r`, with the quadrature error bound.
pub fn free_density_with_error(t: f64, r: f64, p: &MixedStableParams, q: &QuadratureSettings) -> Result<QuadResult> {
    check_args(t, r, p, q)?;
    let (alpha, beta, w, d) = (p.alpha(), p.beta(), p.weight(), p.d());
    let (s_max, tail) = frequency_cutoff(d, t, alpha, q);
    let breaks = panels(s_max, r, q.max_panels)?;
    let damp = move |s: f64| {
        if s == 0.0 {
            1.0
        } else {
            let mut e = s.powf(alpha);
            if w > 0.0 {
                e += w * s.powf(beta);
            }
            (-t * e).exp()
        }
    };
    let prefactor = radial_prefactor(d);
    let tol = Tolerance {
        abs: q.abs_tol / prefactor,
        rel: q.rel_tol,
        max_intervals: q.max_panels.max(breaks.len() + 1),
    };
    let res = match d {
        1 => integrate_panels(|s| damp(s) * (s * r).cos(), &breaks, tol),
        2 => integrate_panels(|s| damp(s) * bessel_j0(s * r) * s, &breaks, tol),
        _ if r == 0.0 => integrate_panels(|s| damp(s) * s * s, &breaks, tol),
        _ => integrate_panels(|s| damp(s) * s * (s * r).sin() / r, &breaks, tol),
    };
    match res {
        Ok(res) => Ok(QuadResult {
            value: prefactor * res.value,
            error: prefactor * res.error + tail,
            evals: res.evals,
        }),
        Err(Error::Accuracy { estimate, error }) => Err(Error::Accuracy {
            estimate: prefactor * estimate,
            error: prefactor * error + tail,
        }),
        Err(e) => Err(e),
    }
}

/// `p^a(t, x, y)` for `|x − y| = r`.
pub fn free_density(t: f64, r: f64, p: &MixedStableParams, q: &QuadratureSettings) -> Result<f64> {
    free_density_with_error(t, r, p, q).map(|res| res.value)
}

/// `p^a(t, r) / f^a(t, r)`.
pub fn free_density_bound_check(t: f64, r: f64, p: &MixedStableParams, q: &QuadratureSettings) -> Result<f64> {
    let density = free_density(t, r, p, q)?;
    let bound = free_bound_f(t, r, p)?;
    Ok(density / bound)
}

/// One-dimensional distribution function `P(X^a_t ≤ x)` from
/// `1/2 + (1/π) ∫ e^{−tψ(s)} sin(sx)/s ds`.
pub fn free_cdf_1d(t: f64, x: f64, p: &MixedStableParams, q: &QuadratureSettings) -> Result<f64> {
    if p.d() != 1 {
        return Err(Error::UnsupportedDimension(p.d()));
    }
    check_args(t, x.abs(), p, q)?;
    if x == 0.0 {
        return Ok(0.5);
    }
    let (alpha, beta, w) = (p.alpha(), p.beta(), p.weight());
    // sin(sx)/s ≤ |x|, so the s^{0} tail bound times |x| covers the remainder.
    let scaled = QuadratureSettings {
        abs_tol: q.abs_tol / x.abs().max(1.0),
        ..*q
    };
    let (s_max, _) = frequency_cutoff(1, t, alpha, &scaled);
    let breaks = panels(s_max, x.abs(), q.max_panels)?;
    let tol = Tolerance {
        abs: q.abs_tol * PI,
        rel: q.rel_tol,
        max_intervals: q.max_panels.max(breaks.len() + 1),
    };
    let res = integrate_panels(
        |s| {
            if s == 0.0 {
                return x;
            }
            let mut e = s.powf(alpha);
            if w > 0.0 {
                e += w * s.powf(beta);
            }
            (-t * e).exp() * (s * x).sin() / s
        },
        &breaks,
        tol,
    )?;
    Ok((0.5 + res.value / PI).clamp(0.0, 1.0))
}
