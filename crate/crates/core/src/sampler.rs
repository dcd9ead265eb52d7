//! Exact samplers for stable laws and for increments of the mixed process
//! and of the mixed subordinator.
//!
//! * symmetric 1-d stable: Chambers–Mallows–Stuck, characteristic function
//!   `e^{−|ξ|^α}`;
//! * one-sided stable: Kanter's representation, Laplace transform
//!   `e^{−λ^γ}`;
//! * isotropic d-dimensional stable: a Gaussian vector with variance `2S`
//!   per coordinate, `S` one-sided `α/2`-stable.

use rand::RngCore;
use std::f64::consts::PI;

use crate::analytic::MixedStableParams;
use crate::error::{param, Error, Result};
use crate::rng::{add_normals, open_unit};

#[inline]
fn exp1<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -libm::log(open_unit(rng))
}

/// Symmetric α-stable law with characteristic function `e^{−|ξ|^α}`.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricStable {
    alpha: f64,
    inv_alpha: f64,
    tail_exp: f64,
}

impl SymmetricStable {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(param("alpha", format!("{alpha} not in (0, 2)")));
        }
        Ok(Self {
            alpha,
            inv_alpha: 1.0 / alpha,
            tail_exp: (1.0 - alpha) / alpha,
        })
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (open_unit(rng) - 0.5);
        if self.alpha == 1.0 {
            return libm::tan(v);
        }
        let w = exp1(rng);
        libm::sin(self.alpha * v) / libm::pow(libm::cos(v), self.inv_alpha)
            * libm::pow(libm::cos(v * (1.0 - self.alpha)) / w, self.tail_exp)
    }
}

/// One-sided γ-stable law with Laplace transform `e^{−λ^γ}`, `0 < γ < 1`.
#[derive(Debug, Clone, Copy)]
pub struct PositiveStable {
    gamma: f64,
    inv_gamma: f64,
    tail_exp: f64,
}

impl PositiveStable {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(param("gamma", format!("{gamma} not in (0, 1)")));
        }
        Ok(Self {
            gamma,
            inv_gamma: 1.0 / gamma,
            tail_exp: (1.0 - gamma) / gamma,
        })
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = PI * open_unit(rng);
        let w = exp1(rng);
        libm::sin(self.gamma * u) / libm::pow(libm::sin(u), self.inv_gamma)
            * libm::pow(libm::sin(u * (1.0 - self.gamma)) / w, self.tail_exp)
    }
}

pub fn sample_symmetric_stable_1d<R: RngCore + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    Ok(SymmetricStable::new(alpha)?.sample(rng))
}

pub fn sample_positive_stable<R: RngCore + ?Sized>(gamma: f64, rng: &mut R) -> Result<f64> {
    Ok(PositiveStable::new(gamma)?.sample(rng))
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time step {t} must be positive")))
    }
}

/// Increment over time `t` of the isotropic α-stable process in `R^d`, by
/// Gaussian subordination. Only `d` and `α` of `p` are used.
pub fn sample_isotropic_stable<R: RngCore + ?Sized>(p: &MixedStableParams, t: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_time(t)?;
    let sub = PositiveStable::new(p.alpha() / 2.0)?;
    let s = libm::pow(t, 2.0 / p.alpha()) * sub.sample(rng);
    let mut v = vec![0.0; p.d()];
    add_normals(rng, (2.0 * s).sqrt(), &mut v);
    Ok(v)
}

/// How [`IncrementSampler`] produces draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementMethod {
    /// Two Chambers–Mallows–Stuck draws; only valid for `d = 1`.
    Cms,
    /// Gaussian vector whose per-coordinate variance is
    /// `2(t^{2/α} S_α + a² t^{2/β} S_β)` with independent one-sided
    /// `α/2`- and `β/2`-stable `S_α`, `S_β`.
    Subordination,
}

/// Fixed-step sampler for increments of `X^a` over a time step `dt`,
/// with the scale factors precomputed.
#[derive(Debug, Clone, Copy)]
pub struct IncrementSampler {
    d: usize,
    method: IncrementMethod,
    alpha_scale: f64,
    beta_scale: f64,
    cms_alpha: SymmetricStable,
    cms_beta: SymmetricStable,
    sub_alpha: PositiveStable,
    sub_beta: PositiveStable,
}

impl IncrementSampler {
    /// CMS in one dimension, subordination otherwise.
    pub fn new(p: &MixedStableParams, dt: f64) -> Result<Self> {
        let method = if p.d() == 1 {
            IncrementMethod::Cms
        } else {
            IncrementMethod::Subordination
        };
        Self::with_method(p, dt, method)
    }

    pub fn with_method(p: &MixedStableParams, dt: f64, method: IncrementMethod) -> Result<Self> {
        check_time(dt)?;
        if method == IncrementMethod::Cms && p.d() != 1 {
            return Err(param("method", "CMS increments are one-dimensional"));
        }
        let (alpha, beta) = (p.alpha(), p.beta());
        let (alpha_scale, beta_scale) = match method {
            IncrementMethod::Cms => (libm::pow(dt, 1.0 / alpha), p.a() * libm::pow(dt, 1.0 / beta)),
            IncrementMethod::Subordination => (
                2.0 * libm::pow(dt, 2.0 / alpha),
                2.0 * p.a() * p.a() * libm::pow(dt, 2.0 / beta),
            ),
        };
        Ok(Self {
            d: p.d(),
            method,
            alpha_scale,
            beta_scale,
            cms_alpha: SymmetricStable::new(alpha)?,
            cms_beta: SymmetricStable::new(beta)?,
            sub_alpha: PositiveStable::new(alpha / 2.0)?,
            sub_beta: PositiveStable::new(beta / 2.0)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Adds one increment to `pos` in place.
    #[inline]
    pub fn add_to<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [f64]) {
        match self.method {
            IncrementMethod::Cms => {
                let mut step = self.alpha_scale * self.cms_alpha.sample(rng);
                if self.beta_scale > 0.0 {
                    step += self.beta_scale * self.cms_beta.sample(rng);
                }
                pos[0] += step;
            }
            IncrementMethod::Subordination => {
                let mut var = self.alpha_scale * self.sub_alpha.sample(rng);
                if self.beta_scale > 0.0 {
                    var += self.beta_scale * self.sub_beta.sample(rng);
                }
                add_normals(rng, var.sqrt(), pos);
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        self.add_to(rng, &mut v);
        v
    }
}

/// Increment of `X^a = X + aY` over time `t`; characteristic function
/// `e^{−t(|ξ|^α + a^β|ξ|^β)}`.
pub fn sample_mixed_increment<R: RngCore + ?Sized>(p: &MixedStableParams, t: f64, rng: &mut R) -> Result<Vec<f64>> {
    Ok(IncrementSampler::new(p, t)?.sample(rng))
}

/// Fixed-step sampler for the subordinator with Laplace exponent
/// `λ + a^β λ^{β/α}`: each increment is `dt + a^α dt^{α/β} S` with `S`
/// one-sided `β/α`-stable.
#[derive(Debug, Clone, Copy)]
pub struct SubordinatorSampler {
    drift: f64,
    jump_scale: f64,
    jumps: PositiveStable,
}

impl SubordinatorSampler {
    pub fn new(p: &MixedStableParams, dt: f64) -> Result<Self> {
        check_time(dt)?;
        let (alpha, beta) = (p.alpha(), p.beta());
        let jump_scale = if p.a() == 0.0 {
            0.0
        } else {
            libm::pow(p.a(), alpha) * libm::pow(dt, alpha / beta)
        };
        Ok(Self {
            drift: dt,
            jump_scale,
            jumps: PositiveStable::new(beta / alpha)?,
        })
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.jump_scale == 0.0 {
            self.drift
        } else {
            self.drift + self.jump_scale * self.jumps.sample(rng)
        }
    }
}

/// Increment over time `t` of the mixed subordinator `T^a`. Returns `t`
/// exactly when `a = 0`.
pub fn sample_mixed_subordinator_increment<R: RngCore + ?Sized>(
    p: &MixedStableParams,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(SubordinatorSampler::new(p, t)?.sample(rng))
}
