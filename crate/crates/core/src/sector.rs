//! Angular sectors, ellipticity and the numerical range `Σ(q) = closure of q(R^{2n})`.

use crate::error::{Error, Result};
use crate::linalg::wrap_angle;
use crate::reduction::{max_margin_direction, simultaneous_reduce, factor_1d};
use crate::symbol::QuadraticSymbol;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorKind {
    FullPlane,
    HalfLine,
    Sector,
}

/// Closed convex sector `{r e^{it} : r >= 0, theta_min <= t <= theta_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSector {
    pub kind: SectorKind,
    pub theta_min: f64,
    pub theta_max: f64,
}

/// Angles closer than this are treated as one half-line.
pub const HALFLINE_TOL: f64 = 1e-9;

impl AngularSector {
    pub fn full_plane() -> Self {
        Self { kind: SectorKind::FullPlane, theta_min: 0.0, theta_max: 0.0 }
    }

    pub fn half_line(theta: f64) -> Self {
        let t = wrap_angle(theta);
        Self { kind: SectorKind::HalfLine, theta_min: t, theta_max: t }
    }

    /// `theta_min` is wrapped into `(-pi, pi]`; `theta_max = theta_min + opening`.
    pub fn sector(theta_min: f64, opening: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::PI).contains(&opening) {
            return Err(Error::InvalidArgument(format!("sector opening {opening} not in [0, pi)")));
        }
        if opening <= HALFLINE_TOL {
            return Ok(Self::half_line(theta_min + opening / 2.0));
        }
        let t = wrap_angle(theta_min);
        Ok(Self { kind: SectorKind::Sector, theta_min: t, theta_max: t + opening })
    }

    pub fn opening(&self) -> f64 {
        self.theta_max - self.theta_min
    }

    /// Unit vectors of the boundary half-lines: `[e^{i theta_min}, e^{i theta_max}]`.
    pub fn boundary_directions(&self) -> Option<[C64; 2]> {
        match self.kind {
            SectorKind::FullPlane => None,
            _ => Some([C64::from_polar(1.0, self.theta_min), C64::from_polar(1.0, self.theta_max)]),
        }
    }

    pub fn contains(&self, z: C64, angle_tol: f64) -> bool {
        if self.kind == SectorKind::FullPlane || z.norm() == 0.0 {
            return true;
        }
        let d = wrap_angle(z.arg() - self.theta_min);
        d >= -angle_tol && d <= self.opening() + angle_tol
    }

    /// Euclidean distance from `z` to the sector.
    pub fn distance(&self, z: C64) -> f64 {
        match self.kind {
            SectorKind::FullPlane => 0.0,
            _ if self.contains(z, 0.0) => 0.0,
            _ => ray_distance(z, self.theta_min).min(ray_distance(z, self.theta_max)),
        }
    }
}

fn ray_distance(z: C64, theta: f64) -> f64 {
    let w = z * C64::from_polar(1.0, -theta);
    if w.re <= 0.0 {
        z.norm()
    } else {
        w.im.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EllipticityCertificate {
    /// `Re(e^{i angle} q)` is positive definite with smallest eigenvalue `margin`.
    PositiveDirection { angle: f64, margin: f64 },
    /// `n = 1`: `q = a (ξ - λ1 x)(ξ - λ2 x)` with both roots non-real.
    Factorization {
        #[serde(with = "crate::io::c64_vec")]
        roots: Vec<C64>,
        #[serde(with = "crate::io::c64_pair")]
        leading: C64,
    },
    /// Best angle found; its margin is not positive.
    Failed { best_angle: f64, best_margin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    pub elliptic: bool,
    pub certificate: EllipticityCertificate,
}

/// Relative margin below which `Re(e^{iθ} q)` is not considered positive definite.
pub const PD_MARGIN_TOL: f64 = 1e-12;

/// `q(X) = 0 ⇒ X = 0`. For `n >= 2` this is equivalent to the existence of a positive
/// definite direction; for `n = 1` a factorization with non-real roots also qualifies.
pub fn is_elliptic(q: &QuadraticSymbol) -> Ellipticity {
    let (angle, margin) = max_margin_direction(q);
    if margin > PD_MARGIN_TOL * q.norm() {
        return Ellipticity { elliptic: true, certificate: EllipticityCertificate::PositiveDirection { angle, margin } };
    }
    if q.dim() == 1 {
        if let Some(f) = factor_1d(q) {
            if f.roots.iter().all(|l| l.im.abs() > 1e-10 * (1.0 + l.norm())) {
                return Ellipticity {
                    elliptic: true,
                    certificate: EllipticityCertificate::Factorization { roots: f.roots.to_vec(), leading: f.leading },
                };
            }
        }
    }
    Ellipticity { elliptic: false, certificate: EllipticityCertificate::Failed { best_angle: angle, best_margin: margin } }
}

/// The numerical range of an elliptic symbol: the plane (`n = 1` only), a half-line
/// (normal multiples of a positive form) or a closed sector of opening `< pi`.
pub fn numerical_range(q: &QuadraticSymbol) -> Result<AngularSector> {
    let e = is_elliptic(q);
    match e.certificate {
        EllipticityCertificate::PositiveDirection { angle, .. } => {
            let red = simultaneous_reduce(q, angle)?;
            Ok(red.sector())
        }
        EllipticityCertificate::Factorization { .. } => Ok(AngularSector::full_plane()),
        EllipticityCertificate::Failed { .. } => Err(Error::NotElliptic),
    }
}
