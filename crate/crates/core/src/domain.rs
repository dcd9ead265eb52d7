//! Model C^{1,1} open sets with closed-form distance to the complement.

use serde::{Deserialize, Serialize};

use crate::analytic::euclidean;
use crate::error::{param, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    ExteriorBall {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{x : normal·x > offset}`; `normal` is normalised on validation.
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Disjoint balls whose closures are at least `gap_min` apart.
    UnionOfBalls {
        balls: Vec<BallSpec>,
        gap_min: f64,
    },
    /// Intersection of the parts, e.g. `D ∩ B(Q, r)` for localised
    /// harmonic functions. Not C^{1,1} in general.
    Intersection {
        parts: Vec<Domain>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dom = Domain::Ball { center, radius };
        dom.validate()?;
        Ok(dom)
    }

    /// Symmetric interval `(−radius, radius)` shifted to `center`, i.e. a
    /// one-dimensional ball.
    pub fn interval(center: f64, radius: f64) -> Result<Self> {
        Self::ball(vec![center], radius)
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        let dom = Domain::Annulus { center, r_in, r_out };
        dom.validate()?;
        Ok(dom)
    }

    pub fn exterior_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dom = Domain::ExteriorBall { center, radius };
        dom.validate()?;
        Ok(dom)
    }

    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(param("normal", "must be non-zero"));
        }
        Ok(Domain::HalfSpace {
            normal: normal.iter().map(|v| v / norm).collect(),
            offset,
        })
    }

    pub fn union_of_balls(balls: Vec<BallSpec>, gap_min: f64) -> Result<Self> {
        let dom = Domain::UnionOfBalls { balls, gap_min };
        dom.validate()?;
        Ok(dom)
    }

    pub fn intersection(parts: Vec<Domain>) -> Result<Self> {
        let dom = Domain::Intersection { parts };
        dom.validate()?;
        Ok(dom)
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } | Domain::Annulus { center, .. } | Domain::ExteriorBall { center, .. } => {
                center.len()
            }
            Domain::HalfSpace { normal, .. } => normal.len(),
            Domain::UnionOfBalls { balls, .. } => balls.first().map_or(0, |b| b.center.len()),
            Domain::Intersection { parts } => parts.first().map_or(0, Domain::dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(param("domain", "empty coordinate vector"));
        }
        match self {
            Domain::Ball { radius, .. } | Domain::ExteriorBall { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(param("radius", format!("{radius} must be positive")));
                }
            }
            Domain::Annulus { r_in, r_out, .. } => {
                if !(*r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
                    return Err(param("annulus", format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
                }
            }
            Domain::HalfSpace { normal, offset } => {
                let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 || !offset.is_finite() {
                    return Err(param("normal", "half-space normal must be a unit vector"));
                }
            }
            Domain::UnionOfBalls { balls, gap_min } => {
                if !(*gap_min > 0.0) {
                    return Err(param("gap_min", "must be positive"));
                }
                let d = self.dim();
                for b in balls {
                    if b.center.len() != d || !(b.radius > 0.0) {
                        return Err(param("balls", "inconsistent dimension or non-positive radius"));
                    }
                }
                for (i, b) in balls.iter().enumerate() {
                    for c in &balls[i + 1..] {
                        let gap = euclidean(&b.center, &c.center) - b.radius - c.radius;
                        if gap < *gap_min {
                            return Err(param(
                                "balls",
                                format!("components {gap} apart, below gap_min {gap_min}"),
                            ));
                        }
                    }
                }
            }
            Domain::Intersection { parts } => {
                let d = self.dim();
                for part in parts {
                    part.validate()?;
                    if part.dim() != d {
                        return Err(param("parts", "intersection parts differ in dimension"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.dist_to_complement(x) > 0.0
    }

    /// `δ_D(x)`, zero outside the domain.
    pub fn dist_to_complement(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Ball { center, radius } => (radius - euclidean(x, center)).max(0.0),
            Domain::Annulus { center, r_in, r_out } => {
                let r = euclidean(x, center);
                (r - r_in).min(r_out - r).max(0.0)
            }
            Domain::ExteriorBall { center, radius } => (euclidean(x, center) - radius).max(0.0),
            Domain::HalfSpace { normal, offset } => {
                let s: f64 = normal.iter().zip(x).map(|(n, v)| n * v).sum();
                (s - offset).max(0.0)
            }
            Domain::UnionOfBalls { balls, .. } => balls
                .iter()
                .map(|b| b.radius - euclidean(x, &b.center))
                .fold(0.0, f64::max),
            Domain::Intersection { parts } => parts
                .iter()
                .map(|d| d.dist_to_complement(x))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Diameter for bounded domains.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            Domain::Ball { radius, .. } => Some(2.0 * radius),
            Domain::Annulus { r_out, .. } => Some(2.0 * r_out),
            Domain::ExteriorBall { .. } | Domain::HalfSpace { .. } => None,
            Domain::UnionOfBalls { balls, .. } => {
                let mut diam: f64 = 0.0;
                for b in balls {
                    for c in balls {
                        diam = diam.max(euclidean(&b.center, &c.center) + b.radius + c.radius);
                    }
                }
                Some(diam)
            }
            Domain::Intersection { parts } => parts.iter().filter_map(Domain::diameter).reduce(f64::min),
        }
    }

    /// The image `λ·D`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(param("lambda", "scale factor must be positive"));
        }
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * lambda).collect::<Vec<_>>();
        Ok(match self {
            Domain::Ball { center, radius } => Domain::Ball {
                center: sc(center),
                radius: radius * lambda,
            },
            Domain::Annulus { center, r_in, r_out } => Domain::Annulus {
                center: sc(center),
                r_in: r_in * lambda,
                r_out: r_out * lambda,
            },
            Domain::ExteriorBall { center, radius } => Domain::ExteriorBall {
                center: sc(center),
                radius: radius * lambda,
            },
            Domain::HalfSpace { normal, offset } => Domain::HalfSpace {
                normal: normal.clone(),
                offset: offset * lambda,
            },
            Domain::UnionOfBalls { balls, gap_min } => Domain::UnionOfBalls {
                balls: balls
                    .iter()
                    .map(|b| BallSpec {
                        center: sc(&b.center),
                        radius: b.radius * lambda,
                    })
                    .collect(),
                gap_min: gap_min * lambda,
            },
            Domain::Intersection { parts } => Domain::Intersection {
                parts: parts.iter().map(|d| d.scaled(lambda)).collect::<Result<_>>()?,
            },
        })
    }

    pub(crate) fn require_inside(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Precondition(format!(
                "{what} has dimension {} but the domain has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.contains(x) {
            return Err(Error::Precondition(format!("{what} = {x:?} is not inside the domain")));
        }
        Ok(())
    }
}

/// A measurable target set for exit-position events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Everywhere,
    Nowhere,
    Inside {
        domain: Domain,
    },
    /// Complement of the domain, including its boundary.
    Outside {
        domain: Domain,
    },
    Intersection {
        parts: Vec<Region>,
    },
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Everywhere => true,
            Region::Nowhere => false,
            Region::Inside { domain } => domain.contains(x),
            Region::Outside { domain } => !domain.contains(x),
            Region::Intersection { parts } => parts.iter().all(|r| r.contains(x)),
        }
    }
}
