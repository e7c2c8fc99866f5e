//! Reference operators used throughout the tests and the CLI examples, given by their
//! differential-operator coefficients (∂ convention) and converted with the Weyl table.

use crate::linalg::{self, Rng};
use crate::reduction::NormalFormKind;
use crate::symbol::{from_operator_terms, DerivativeConvention, OperatorTerm, QuadraticSymbol, random_symplectic};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng as _;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

struct Op2 {
    second: Vec<((usize, usize), C64)>,
    xd: Vec<((usize, usize), C64)>,
    xx: Vec<((usize, usize), C64)>,
    constant: C64,
}

impl Op2 {
    fn terms(&self) -> Vec<OperatorTerm> {
        let n = 2;
        let mut out = Vec::new();
        let mi = |js: &[usize]| {
            let mut v = vec![0u32; n];
            for &j in js {
                v[j] += 1;
            }
            v
        };
        for &((j, k), v) in &self.second {
            out.push(OperatorTerm::new(mi(&[]), mi(&[j, k]), v, DerivativeConvention::Partial));
        }
        for &((j, k), v) in &self.xd {
            out.push(OperatorTerm::new(mi(&[j]), mi(&[k]), v, DerivativeConvention::Partial));
        }
        for &((j, k), v) in &self.xx {
            out.push(OperatorTerm::new(mi(&[j, k]), mi(&[]), v, DerivativeConvention::Partial));
        }
        out.push(OperatorTerm::new(mi(&[]), mi(&[]), self.constant, DerivativeConvention::Partial));
        out
    }
}

/// Operator terms of the normal two-dimensional example with spectrum
/// `(2k1+1) + (2k2+1) √2 e^{iπ/4}`.
pub fn q1_terms() -> Vec<OperatorTerm> {
    Op2 {
        second: vec![((0, 0), c(-1.0, -1.0)), ((1, 1), c(-1.0, 0.0))],
        xd: vec![
            ((0, 0), c(-4.0, 4.0)),
            ((1, 0), c(-2.0, 2.0)),
            ((1, 1), c(0.0, 6.0)),
            ((0, 1), c(0.0, 2.0)),
        ],
        xx: vec![((0, 0), c(6.0, 5.0)), ((1, 1), c(11.0, 1.0)), ((0, 1), c(10.0, 4.0))],
        constant: c(-2.0, 5.0),
    }
    .terms()
}

/// Non-normal example with range the first quadrant, order 6 on `R+` and 2 on `iR+`:
/// `ξ1² + 2ξ2² - 4x2ξ2 + 2x1² + (4+i)x2² + 4x1x2`.
pub fn q2_terms() -> Vec<OperatorTerm> {
    Op2 {
        second: vec![((0, 0), c(-1.0, 0.0)), ((1, 1), c(-2.0, 0.0))],
        xd: vec![((1, 1), c(0.0, 4.0))],
        xx: vec![((0, 0), c(2.0, 0.0)), ((1, 1), c(4.0, 1.0)), ((0, 1), c(4.0, 0.0))],
        constant: c(0.0, 2.0),
    }
    .terms()
}

/// Non-normal example with range `0 <= arg z <= π/4`, infinite order on `R+`.
pub fn q3_terms() -> Vec<OperatorTerm> {
    Op2 {
        second: vec![((0, 0), c(-1.0, -1.0)), ((1, 1), c(-2.0, 0.0))],
        xd: vec![((0, 0), c(-4.0, 4.0)), ((1, 0), c(2.0, -2.0)), ((0, 1), c(0.0, -4.0))],
        xx: vec![((0, 0), c(9.0, 4.0)), ((1, 1), c(2.0, 1.0)), ((0, 1), c(-4.0, -4.0))],
        constant: c(-2.0, 2.0),
    }
    .terms()
}

pub fn q1() -> QuadraticSymbol {
    from_operator_terms(2, &q1_terms()).expect("valid fixture").0
}

pub fn q2() -> QuadraticSymbol {
    from_operator_terms(2, &q2_terms()).expect("valid fixture").0
}

pub fn q3() -> QuadraticSymbol {
    from_operator_terms(2, &q3_terms()).expect("valid fixture").0
}

/// `ξ² + e^{iθ} x²`.
pub fn rotated_oscillator(theta: f64) -> QuadraticSymbol {
    let z = c(0.0, 0.0);
    QuadraticSymbol::new(1, DMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, theta), z, z, c(1.0, 0.0)]))
        .expect("symmetric")
}

/// `x² + ξ²` in `n` dimensions.
pub fn harmonic(n: usize) -> QuadraticSymbol {
    QuadraticSymbol::harmonic(n, c(1.0, 0.0))
}

/// A random elliptic symbol `e^{-iφ}(R + i I)` with `R` positive definite; non-normal
/// with probability one.
pub fn random_elliptic(n: usize, rng: &mut Rng) -> QuadraticSymbol {
    let d = 2 * n;
    let a = linalg::random_gaussian_matrix(rng, d, d, 1.0);
    let re = &a * a.transpose() / d as f64 + DMatrix::identity(d, d) * 0.3;
    let im = linalg::symmetrize(&linalg::random_gaussian_matrix(rng, d, d, 1.0));
    let phi: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    QuadraticSymbol::from_parts(&re, &im).expect("symmetric").rotated(phi)
}

/// A random `n = 1` symbol with full-plane range: a type (ii) or (iii) normal form,
/// transported by a random symplectic map.
pub fn random_full_plane_1d(rng: &mut Rng) -> (QuadraticSymbol, NormalFormKind) {
    let alpha = C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0));
    let eta_re = rng.random_range(-2.0..2.0);
    let eta_im = rng.random_range(0.3..2.5);
    let kind = if rng.random_bool(0.5) {
        NormalFormKind::TypeII { alpha, eta: c(eta_re, eta_im) }
    } else {
        NormalFormKind::TypeIII { alpha, eta: c(eta_re, -eta_im) }
    };
    let s = random_symplectic(1, rng, 0.4);
    (kind.symbol().apply_symplectic(&s).expect("symplectic"), kind)
}
