//! Positive-definite rotations, simultaneous reduction, Williamson normal form and the
//! one-dimensional normal forms.

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eig, wrap_angle};
use crate::sector::{AngularSector, PD_MARGIN_TOL, HALFLINE_TOL};
use crate::symbol::{QuadraticSymbol, RealQuadraticForm, SymplecticForm};
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SCAN_POINTS: usize = 720;
const REFINE_TOL: f64 = 1e-10;

fn margin(q: &QuadraticSymbol, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let m = q.matrix().map(|z| c * z.re - s * z.im);
    linalg::min_eigenvalue(&m)
}

/// The angle in `(-pi, pi]` maximizing the smallest eigenvalue of `Re(e^{iθ} q)`, and
/// that eigenvalue. Scans 720 angles, then golden-section refines around the best one
/// (the margin is concave wherever it is positive).
pub fn max_margin_direction(q: &QuadraticSymbol) -> (f64, f64) {
    let step = 2.0 * PI / SCAN_POINTS as f64;
    let mut best = (PI, margin(q, PI));
    for k in 0..SCAN_POINTS {
        let t = -PI + (k + 1) as f64 * step;
        let m = margin(q, t);
        if m > best.1 {
            best = (t, m);
        }
    }
    if best.1 <= 0.0 {
        return best;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (margin(q, c), margin(q, d));
    while b - a > REFINE_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = margin(q, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = margin(q, d);
        }
    }
    let t = 0.5 * (a + b);
    let m = margin(q, t);
    if m >= best.1 {
        (wrap_angle(t), m)
    } else {
        (wrap_angle(best.0), best.1)
    }
}

/// `θ*` with `Re(e^{iθ*} q)` positive definite (max-margin), or `None` when `n = 1` and
/// `Σ(q) = C`.
pub fn positive_definite_direction(q: &QuadraticSymbol) -> Result<Option<f64>> {
    let (t, m) = max_margin_direction(q);
    if m > PD_MARGIN_TOL * q.norm() {
        return Ok(Some(t));
    }
    if q.dim() == 1 {
        if let Some(f) = factor_1d(q) {
            if f.roots.iter().all(|l| l.im.abs() > 1e-10 * (1.0 + l.norm())) {
                return Ok(None);
            }
        }
    }
    Err(Error::NotElliptic)
}

/// `P^T Re(e^{iθ*}q) P = I`, `P^T Im(e^{iθ*}q) P = diag(alphas)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousReduction {
    pub theta_star: f64,
    pub p: DMatrix<f64>,
    pub alphas: Vec<f64>,
}

impl SimultaneousReduction {
    /// The numerical range, spanned by `e^{-iθ*}(1 + i alpha_j)`.
    pub fn sector(&self) -> AngularSector {
        let a1 = self.alphas[0];
        let am = *self.alphas.last().expect("non-empty");
        if am - a1 <= HALFLINE_TOL * (1.0 + a1.abs() + am.abs()) {
            let mid = 0.5 * (a1 + am);
            return AngularSector::half_line(mid.atan() - self.theta_star);
        }
        AngularSector::sector(a1.atan() - self.theta_star, am.atan() - a1.atan())
            .expect("opening of atan differences is below pi")
    }

    /// `P^{-T} (I + i diag(alphas)) P^{-1}`, i.e. the matrix of `e^{iθ*} q`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let pinv = self.p.clone().try_inverse().expect("P is invertible");
        let d = DMatrix::from_fn(self.p.nrows(), self.p.ncols(), |a, b| {
            if a == b {
                C64::new(1.0, self.alphas[a])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let pc = linalg::complexify(&pinv);
        pc.transpose() * d * pc
    }

    /// Columns of `P` spanning the eigenspace of the eigenvalue `alphas[idx]`, i.e. all
    /// indices within the clustering tolerance of it.
    pub fn cluster(&self, idx: usize) -> Vec<usize> {
        let a = self.alphas[idx];
        let tol = HALFLINE_TOL * (1.0 + self.alphas[0].abs() + self.alphas.last().unwrap().abs());
        (0..self.alphas.len()).filter(|&k| (self.alphas[k] - a).abs() <= tol).collect()
    }
}

pub fn simultaneous_reduce(q: &QuadraticSymbol, theta_star: f64) -> Result<SimultaneousReduction> {
    let w = C64::from_polar(1.0, theta_star);
    let m = q.matrix() * w;
    let re = linalg::symmetrize(&linalg::re_part(&m));
    let im = linalg::symmetrize(&linalg::im_part(&m));
    let chol = Cholesky::new(re.clone()).ok_or(Error::NotPositiveDefinite)?;
    if linalg::min_eigenvalue(&re) <= PD_MARGIN_TOL * q.norm() {
        return Err(Error::NotPositiveDefinite);
    }
    let l = chol.l();
    let d = re.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or(Error::NotPositiveDefinite)?;
    let c = &linv * im * linv.transpose();
    let (alphas, v) = sym_eig(&c);
    let p = linv.transpose() * v;
    Ok(SimultaneousReduction { theta_star, p, alphas })
}

/// `S^T M S = diag(lambdas, lambdas)` with `S` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct Williamson {
    pub s: DMatrix<f64>,
    pub lambdas: Vec<f64>,
}

/// Symplectic diagonalization of a positive definite form. With `K = M^{1/2} σ^{-1} M^{1/2}`
/// (antisymmetric), the Hermitian matrix `iK` has eigenvalues `±λ_j`; for each `-λ_j`
/// eigenvector `u`, `v = sqrt(2λ) M^{-1/2} u` gives the symplectic pair `(Re v, Im v)`.
pub fn williamson(m: &RealQuadraticForm) -> Result<Williamson> {
    let n = m.dim();
    let (d, u) = sym_eig(m.matrix());
    let dmax = d.last().copied().unwrap_or(0.0);
    if d[0] <= 1e-14 * dmax.max(f64::MIN_POSITIVE) || d[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let diag = |f: &dyn Fn(f64) -> f64| {
        let dd = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| f(x))));
        &u * dd * u.transpose()
    };
    let half = diag(&|x| x.sqrt());
    let inv_half = diag(&|x| 1.0 / x.sqrt());
    let k = &half * (-linalg::sigma_matrix(n)) * &half;
    let h = k.map(|x| C64::new(0.0, x));
    let eig = SymmetricEigen::new(h);
    let mut neg: Vec<usize> = (0..2 * n).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
    neg.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if neg.len() != n {
        return Err(Error::NotPositiveDefinite);
    }
    let inv_half_c = linalg::complexify(&inv_half);
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    let mut lambdas = Vec::with_capacity(n);
    for (j, &i) in neg.iter().enumerate() {
        let lam = -eig.eigenvalues[i];
        let mut v = &inv_half_c * eig.eigenvectors.column(i) * C64::new((2.0 * lam).sqrt(), 0.0);
        let vn = v.norm();
        if let Some(k0) = (0..2 * n).find(|&k| v[k].norm() > 1e-6 * vn) {
            let ph = v[k0].conj() / v[k0].norm();
            v *= ph;
        }
        for a in 0..2 * n {
            s[(a, j)] = v[a].re;
            s[(a, n + j)] = v[a].im;
        }
        lambdas.push(lam);
    }
    Ok(Williamson { s, lambdas })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Factor1D {
    /// Ordered by `|Im|` ascending, then by real part.
    pub roots: [C64; 2],
    pub leading: C64,
}

/// `q = a (ξ - λ1 x)(ξ - λ2 x)` for `n = 1`; `None` if there is no `ξ²` coefficient.
pub(crate) fn factor_1d(q: &QuadraticSymbol) -> Option<Factor1D> {
    if q.dim() != 1 {
        return None;
    }
    let m = q.matrix();
    let (c, b, a) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    if a.norm() <= 1e-14 * q.norm() {
        return None;
    }
    // a λ² + 2 b λ + c = 0, stable form
    let disc = (b * b - a * c).sqrt();
    let s1 = -b - disc;
    let s2 = -b + disc;
    let s = if s1.norm() >= s2.norm() { s1 } else { s2 };
    let (l1, l2) = if s.norm() == 0.0 {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    } else {
        (s / a, c / s)
    };
    let mut roots = [l1, l2];
    roots.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()).then(x.re.total_cmp(&y.re)));
    Some(Factor1D { roots, leading: a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum NormalFormKind {
    /// `alpha (ξ² + e^{iθ} x²)`, `0 <= θ < pi`.
    TypeI {
        #[serde(with = "crate::io::c64_pair")]
        alpha: C64,
        theta: f64,
    },
    /// `alpha (ξ + i x)(ξ + η x)`, `Im η > 0`.
    TypeII {
        #[serde(with = "crate::io::c64_pair")]
        alpha: C64,
        #[serde(with = "crate::io::c64_pair")]
        eta: C64,
    },
    /// `alpha (ξ - i x)(ξ + η x)`, `Im η < 0`.
    TypeIII {
        #[serde(with = "crate::io::c64_pair")]
        alpha: C64,
        #[serde(with = "crate::io::c64_pair")]
        eta: C64,
    },
}

impl NormalFormKind {
    pub fn fredholm_index(&self) -> i32 {
        match self {
            NormalFormKind::TypeI { .. } => 0,
            NormalFormKind::TypeII { .. } => -2,
            NormalFormKind::TypeIII { .. } => 2,
        }
    }

    pub fn symbol(&self) -> QuadraticSymbol {
        let z = C64::new(0.0, 0.0);
        let i = C64::i();
        let m = match *self {
            NormalFormKind::TypeI { alpha, theta } => [alpha * C64::from_polar(1.0, theta), z, alpha],
            // (ξ ± i x)(ξ + η x) = ξ² + (η ± i) x ξ ± i η x²
            NormalFormKind::TypeII { alpha, eta } => [alpha * i * eta, alpha * (eta + i) * 0.5, alpha],
            NormalFormKind::TypeIII { alpha, eta } => [-alpha * i * eta, alpha * (eta - i) * 0.5, alpha],
        };
        QuadraticSymbol::new(1, DMatrix::from_row_slice(2, 2, &[m[0], m[1], m[1], m[2]])).expect("symmetric 2x2")
    }
}

/// `q ∘ S` equals `kind.symbol()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm1D {
    pub kind: NormalFormKind,
    #[serde(rename = "S")]
    pub s: [[f64; 2]; 2],
    pub fredholm_index: i32,
}

impl NormalForm1D {
    pub fn s_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.s[0][0], self.s[0][1], self.s[1][0], self.s[1][1]])
    }

    fn new(kind: NormalFormKind, s: &DMatrix<f64>) -> Self {
        // ±S give the same q∘S; fix the sign so the first non-zero entry of column 0 is positive.
        let flip = if s[(0, 0)].abs() > 1e-14 { s[(0, 0)] < 0.0 } else { s[(1, 0)] < 0.0 };
        let sg = if flip { -1.0 } else { 1.0 };
        Self {
            kind,
            s: [[sg * s[(0, 0)], sg * s[(0, 1)]], [sg * s[(1, 0)], sg * s[(1, 1)]]],
            fredholm_index: kind.fredholm_index(),
        }
    }
}

/// One-dimensional normal form of an elliptic symbol.
pub fn reduce_1d(q: &QuadraticSymbol) -> Result<NormalForm1D> {
    if q.dim() != 1 {
        return Err(Error::InvalidArgument(format!("reduce_1d needs n = 1, got n = {}", q.dim())));
    }
    match positive_definite_direction(q)? {
        Some(theta_star) => reduce_type_one(q, theta_star),
        None => reduce_full_plane(q),
    }
}

fn reduce_type_one(q: &QuadraticSymbol, theta_star: f64) -> Result<NormalForm1D> {
    let w = C64::from_polar(1.0, theta_star);
    let wq = q.scaled(w);
    let wil = williamson(&wq.real_part())?;
    let lam = wil.lambdas[0];
    let s1 = wil.s;
    let b = s1.transpose() * wq.imag_part().matrix() * &s1 / lam;
    let (g, mut r) = sym_eig(&b);
    if r.determinant() < 0.0 {
        r.column_mut(1).neg_mut();
    }
    let (g1, g2) = (g[0], g[1]);
    let ratio = C64::new(1.0, g1) / C64::new(1.0, g2);
    let (rho, mut theta) = (ratio.norm(), ratio.arg());
    let dscale = DMatrix::from_row_slice(2, 2, &[rho.powf(-0.25), 0.0, 0.0, rho.powf(0.25)]);
    let mut s = s1 * r * dscale;
    let mut alpha = C64::new(lam, lam * g2) * rho.sqrt() / w;
    if theta < 0.0 {
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        s *= swap;
        alpha *= C64::from_polar(1.0, theta);
        theta = -theta;
    }
    Ok(NormalForm1D::new(NormalFormKind::TypeI { alpha, theta }, &s))
}

fn reduce_full_plane(q: &QuadraticSymbol) -> Result<NormalForm1D> {
    let f = factor_1d(q).ok_or(Error::NotElliptic)?;
    let [l1, l2] = f.roots;
    let shear = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, l1.re, 1.0]);
    let r = l1.im;
    let b = C64::new(l1.re, 0.0) - l2;
    let ar = r.abs();
    let scale = DMatrix::from_row_slice(2, 2, &[ar.powf(-0.5), 0.0, 0.0, ar.sqrt()]);
    let s = shear * scale;
    let alpha = f.leading * ar;
    let eta = b / ar;
    let kind = if r < 0.0 && eta.im > 0.0 {
        NormalFormKind::TypeII { alpha, eta }
    } else if r > 0.0 && eta.im < 0.0 {
        NormalFormKind::TypeIII { alpha, eta }
    } else {
        // Σ(q) = C forces r Im b < 0; anything else means the angle scan missed a direction.
        return Err(Error::InvalidArgument("factorization inconsistent with a full-plane range".into()));
    };
    debug_assert!(SymplecticForm::new(1).is_symplectic(&s));
    Ok(NormalForm1D::new(kind, &s))
}
