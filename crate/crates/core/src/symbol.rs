//! Quadratic symbols, the symplectic form, Hamilton maps and the Weyl
//! correspondence with polynomial operators.

use crate::error::{Error, Result};
use crate::linalg::{self, Rng};
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const SYMMETRY_TOL: f64 = 1e-12;
const SYMPLECTIC_TOL: f64 = 1e-10;

/// `q(X) = X^T Q X` on `R^{2n}` with coordinates `X = (x_1..x_n, xi_1..xi_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSymbol {
    n: usize,
    q: DMatrix<C64>,
}

/// A real quadratic form `X^T M X`, e.g. a real part, an imaginary part or a bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct RealQuadraticForm {
    n: usize,
    m: DMatrix<f64>,
}

impl RealQuadraticForm {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: 2 * (m.nrows() / 2).max(1), got: m.ncols() });
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let defect = (&m - m.transpose()).norm() / scale;
        if defect > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { defect });
        }
        Ok(Self { n: m.nrows() / 2, m: linalg::symmetrize(&m) })
    }

    /// Caller guarantees `m` is square of even size; it is symmetrized.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { n: m.nrows() / 2, m: linalg::symmetrize(&m) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.m * &v))
    }
}

impl QuadraticSymbol {
    /// Validates size and symmetry (relative defect below 1e-12), then stores the exact
    /// symmetrization.
    pub fn new(n: usize, q: DMatrix<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if q.nrows() != 2 * n || q.ncols() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: q.nrows().max(q.ncols()) });
        }
        let scale = linalg::cfrob(&q).max(f64::MIN_POSITIVE);
        let defect = linalg::cfrob(&(&q - q.transpose())) / scale;
        if defect > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { defect });
        }
        let q = (&q + q.transpose()) * C64::new(0.5, 0.0);
        Ok(Self { n, q })
    }

    pub fn from_parts(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch { expected: re.nrows(), got: im.nrows() });
        }
        Self::new(re.nrows() / 2, linalg::combine(re, im))
    }

    /// The harmonic oscillator `x^2 + xi^2` in `n` degrees of freedom, scaled by `c`.
    pub fn harmonic(n: usize, c: C64) -> Self {
        Self { n, q: DMatrix::identity(2 * n, 2 * n) * c }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.q
    }

    pub fn norm(&self) -> f64 {
        linalg::cfrob(&self.q)
    }

    pub fn eval(&self, x: &[f64]) -> Result<C64> {
        self.polar(x, x)
    }

    /// The bilinear form `q(X, Y) = X^T Q Y`.
    pub fn polar(&self, x: &[f64], y: &[f64]) -> Result<C64> {
        let d = 2 * self.n;
        for v in [x, y] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..d {
                row += self.q[(a, b)] * y[b];
            }
            acc += row * x[a];
        }
        Ok(acc)
    }

    pub fn real_part(&self) -> RealQuadraticForm {
        RealQuadraticForm::from_matrix_unchecked(linalg::re_part(&self.q))
    }

    pub fn imag_part(&self) -> RealQuadraticForm {
        RealQuadraticForm::from_matrix_unchecked(linalg::im_part(&self.q))
    }

    /// `c * q`.
    pub fn scaled(&self, c: C64) -> Self {
        Self { n: self.n, q: &self.q * c }
    }

    /// `e^{i angle} q`.
    pub fn rotated(&self, angle: f64) -> Self {
        self.scaled(C64::from_polar(1.0, angle))
    }

    pub fn hamilton_map(&self) -> HamiltonMap {
        HamiltonMap::of(self)
    }

    /// `q ∘ S`, i.e. the matrix `S^T Q S`. `S` must be real symplectic.
    pub fn apply_symplectic(&self, s: &DMatrix<f64>) -> Result<Self> {
        let d = 2 * self.n;
        if s.nrows() != d || s.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.nrows() });
        }
        let defect = SymplecticForm::new(self.n).defect(s);
        if defect > SYMPLECTIC_TOL * s.norm_squared().max(1.0) {
            return Err(Error::NotSymplectic { defect });
        }
        let sc = linalg::complexify(s);
        Ok(Self { n: self.n, q: sc.transpose() * &self.q * sc })
    }

    /// SHA-256 over a canonical byte encoding of `(n, Q)`.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"quadspec-symbol-v1");
        h.update((self.n as u64).to_le_bytes());
        for a in 0..2 * self.n {
            for b in 0..2 * self.n {
                let z = self.q[(a, b)];
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// `sigma(X, Y) = xi.y - x.eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        linalg::sigma_matrix(self.n)
    }

    pub fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n;
        (0..n).map(|j| x[n + j] * y[j] - x[j] * y[n + j]).sum()
    }

    /// `||S^T sigma S - sigma||_F`.
    pub fn defect(&self, s: &DMatrix<f64>) -> f64 {
        let sig = self.matrix();
        (s.transpose() * &sig * s - sig).norm()
    }

    pub fn is_symplectic(&self, s: &DMatrix<f64>) -> bool {
        s.nrows() == 2 * self.n
            && s.ncols() == 2 * self.n
            && self.defect(s) <= SYMPLECTIC_TOL * s.norm_squared().max(1.0)
    }
}

/// `F = sigma^{-1} Q`, so that `q(X, Y) = sigma(X, F Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonMap {
    pub matrix: DMatrix<C64>,
}

impl HamiltonMap {
    pub fn of(q: &QuadraticSymbol) -> Self {
        // sigma^{-1} = -sigma
        let s = linalg::complexify(&linalg::sigma_matrix(q.dim()));
        Self { matrix: -(s * q.matrix()) }
    }

    /// Eigenvalues sorted by `(re, im)`.
    pub fn eigenvalues(&self) -> Vec<C64> {
        // Complex Schur form is upper triangular.
        let (_, t) = Schur::new(self.matrix.clone()).unpack();
        let mut ev: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
        linalg::sort_complex(&mut ev);
        ev
    }
}

/// A random element of `Sp(2n, R)`, `exp(sigma H)` with `H` symmetric Gaussian.
pub fn random_symplectic(n: usize, rng: &mut Rng, std: f64) -> DMatrix<f64> {
    let h = linalg::symmetrize(&linalg::random_gaussian_matrix(rng, 2 * n, 2 * n, std));
    (linalg::sigma_matrix(n) * h).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeConvention {
    /// Coefficients multiply `∂^β`.
    #[default]
    Partial,
    /// Coefficients multiply `D^β = (-i∂)^β`.
    #[serde(alias = "D")]
    D,
}

/// Which factor acts first in a mixed `x_j`/`∂_j` product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TermOrdering {
    /// `x^α D^β`: derivatives act first.
    #[default]
    Xd,
    /// `D^β x^α`.
    Dx,
}

/// One term `coeff · x^α D^β` (or `coeff · x^α ∂^β`) of a differential operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    #[serde(with = "crate::io::c64_pair")]
    pub coeff: C64,
    #[serde(default)]
    pub convention: DerivativeConvention,
    #[serde(default)]
    pub ordering: TermOrdering,
}

impl OperatorTerm {
    pub fn new(alpha: Vec<u32>, beta: Vec<u32>, coeff: C64, convention: DerivativeConvention) -> Self {
        Self { alpha, beta, coeff, convention, ordering: TermOrdering::Xd }
    }

    fn degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }
}

fn indices(multi: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    for (j, &m) in multi.iter().enumerate() {
        for _ in 0..m {
            out.push(j);
        }
    }
    out
}

/// Weyl symbol of a sum of quadratic operator terms. Returns the quadratic symbol and
/// the scalar residual (constant part of the Weyl symbol, including ordering corrections).
pub fn from_operator_terms(n: usize, terms: &[OperatorTerm]) -> Result<(QuadraticSymbol, C64)> {
    let d = 2 * n;
    let mut q = DMatrix::<C64>::zeros(d, d);
    let mut residual = C64::new(0.0, 0.0);
    let i = C64::i();
    for t in terms {
        if t.alpha.len() != n || t.beta.len() != n {
            return Err(Error::InvalidTerm(format!(
                "multi-indices must have length {n}, got {} and {}",
                t.alpha.len(),
                t.beta.len()
            )));
        }
        if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
            return Err(Error::InvalidTerm("non-finite coefficient".into()));
        }
        let deg = t.degree();
        let nb = t.beta.iter().sum::<u32>();
        // ∂ = iD, so ∂^β = i^{|β|} D^β.
        let c = match t.convention {
            DerivativeConvention::Partial => t.coeff * i.powu(nb),
            DerivativeConvention::D => t.coeff,
        };
        match deg {
            0 => residual += c,
            1 => {
                return Err(Error::InvalidTerm(format!(
                    "degree-one term (alpha {:?}, beta {:?}) is not quadratic",
                    t.alpha, t.beta
                )))
            }
            2 => {
                let xs = indices(&t.alpha);
                let ds = indices(&t.beta);
                let vars: Vec<usize> = xs.iter().copied().chain(ds.iter().map(|j| n + j)).collect();
                let (a, b) = (vars[0], vars[1]);
                if a == b {
                    q[(a, a)] += c;
                } else {
                    q[(a, b)] += c * 0.5;
                    q[(b, a)] += c * 0.5;
                }
                if xs.len() == 1 && ds.len() == 1 && xs[0] == ds[0] {
                    // x D = sym + i/2, D x = sym - i/2
                    let corr = match t.ordering {
                        TermOrdering::Xd => i * 0.5,
                        TermOrdering::Dx => -i * 0.5,
                    };
                    residual += c * corr;
                }
            }
            _ => {
                return Err(Error::InvalidTerm(format!(
                    "term of degree {deg} (alpha {:?}, beta {:?}) exceeds two",
                    t.alpha, t.beta
                )))
            }
        }
    }
    Ok((QuadraticSymbol::new(n, q)?, residual))
}

/// Canonical operator terms (D convention, `x^α D^β` ordering) whose Weyl symbol is
/// `q + residual`.
pub fn to_operator_terms(q: &QuadraticSymbol, residual: C64) -> Vec<OperatorTerm> {
    let n = q.dim();
    let m = q.matrix();
    let mut out = Vec::new();
    let mut constant = residual;
    let add = |v: &mut Vec<u32>, j: usize| v[j] += 1;
    for a in 0..2 * n {
        for b in a..2 * n {
            let c = if a == b { m[(a, a)] } else { m[(a, b)] * 2.0 };
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let mut alpha = vec![0u32; n];
            let mut beta = vec![0u32; n];
            for v in [a, b] {
                if v < n {
                    add(&mut alpha, v);
                } else {
                    add(&mut beta, v - n);
                }
            }
            if a < n && b == a + n {
                constant -= c * C64::new(0.0, 0.5);
            }
            out.push(OperatorTerm::new(alpha, beta, c, DerivativeConvention::D));
        }
    }
    if constant != C64::new(0.0, 0.0) {
        out.push(OperatorTerm::new(vec![0; n], vec![0; n], constant, DerivativeConvention::D));
    }
    out
}
