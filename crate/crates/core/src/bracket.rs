//! Poisson brackets of quadratic forms, normality, and point classification.

use crate::error::{Error, Result};
use crate::linalg;
use crate::sector::{numerical_range, AngularSector, SectorKind};
use crate::symbol::{QuadraticSymbol, RealQuadraticForm};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// `{a, b} = ∂_ξ a · ∂_x b - ∂_x a · ∂_ξ b`; for `a = X^T A X`, `b = X^T B X` this is
/// the form with matrix `sym(4 A sigma B)`. Since `(A sigma B)^T = -B sigma A`, that is
/// `D + D^T` with `D = A sigma B - B sigma A`, which is antisymmetric in `(a, b)` bit for bit.
pub fn poisson_bracket(a: &RealQuadraticForm, b: &RealQuadraticForm) -> Result<RealQuadraticForm> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let s = linalg::sigma_matrix(a.dim());
    let d = a.matrix() * &s * b.matrix() - b.matrix() * &s * a.matrix();
    let m = &d + d.transpose();
    Ok(RealQuadraticForm::from_matrix_unchecked(m))
}

/// Relative tolerance for `{Re q, Im q} = 0`.
pub const NORMAL_TOL: f64 = 1e-10;

/// `true` iff `||{Re q, Im q}||_F <= 1e-10 ||Q||_F^2`.
pub fn is_normal(q: &QuadraticSymbol) -> bool {
    bracket_norm(q) <= NORMAL_TOL * q.norm().powi(2)
}

pub fn bracket_norm(q: &QuadraticSymbol) -> f64 {
    poisson_bracket(&q.real_part(), &q.imag_part()).map(|b| b.norm()).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Interior,
    Boundary,
    Outside,
}

/// Angular tolerance used to decide that `z` sits on a boundary half-line.
pub const BOUNDARY_ANGLE_TOL: f64 = 1e-9;

/// Position of `z` relative to the numerical range `Σ(q) ≠ C`.
pub fn classify_point(q: &QuadraticSymbol, z: C64) -> Result<PointClass> {
    let sector = numerical_range(q)?;
    classify_in_sector(&sector, z)
}

pub fn classify_in_sector(sector: &AngularSector, z: C64) -> Result<PointClass> {
    if sector.kind == SectorKind::FullPlane {
        return Err(Error::FullPlane);
    }
    if z.norm() == 0.0 {
        return Ok(PointClass::Boundary);
    }
    if !sector.contains(z, BOUNDARY_ANGLE_TOL) {
        return Ok(PointClass::Outside);
    }
    if sector.kind == SectorKind::HalfLine {
        return Ok(PointClass::Boundary);
    }
    let a = z.arg();
    let near = |t: f64| linalg::wrap_angle(a - t).abs() <= BOUNDARY_ANGLE_TOL;
    if near(sector.theta_min) || near(sector.theta_max) {
        Ok(PointClass::Boundary)
    } else {
        Ok(PointClass::Interior)
    }
}
