//! Complex band matrices, banded LU with partial pivoting, and the smallest singular value
//! of a band matrix by Lanczos on `(A A^*)^{-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored by columns:
/// `A[i, j]` lives at `data[(ku + i - j) + j * (kl + ku + 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    dim: usize,
    kl: usize,
    ku: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(dim: usize, kl: usize, ku: usize) -> Self {
        Self { dim, kl, ku, data: vec![C64::new(0.0, 0.0); dim * (kl + ku + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.dim && j < self.dim && i + self.ku >= j && j + self.kl >= i
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (self.ku + i - j) + j * (self.kl + self.ku + 1)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Panics outside the band: assembly bugs must not be silently dropped.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for j in 0..self.dim {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.dim - 1);
            for i in lo..=hi {
                y[i] += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// LU factorization of `A - shift I`.
    pub fn factor_shifted(&self, shift: C64) -> BandLu {
        BandLu::factor(self, shift)
    }
}

/// Banded LU with partial pivoting (LAPACK `gbtf2` layout: `kl` extra rows for fill-in).
#[derive(Debug, Clone)]
pub struct BandLu {
    dim: usize,
    kl: usize,
    ku: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
    singular: bool,
}

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, c: usize) -> usize {
        (self.kl + self.ku + i - c) + c * (2 * self.kl + self.ku + 1)
    }

    pub fn factor(a: &BandMatrix, shift: C64) -> Self {
        let (n, kl, ku) = (a.dim, a.kl, a.ku);
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self { dim: n, kl, ku, ab: vec![C64::new(0.0, 0.0); n * ldab], ipiv: vec![0; n], singular: false };
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n.saturating_sub(1));
            for i in lo..=hi {
                let k = lu.at(i, j);
                lu.ab[k] = a.data[a.idx(i, j)];
            }
            let k = lu.at(j, j);
            lu.ab[k] -= shift;
        }
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = cabs1(lu.ab[lu.at(j, j)]);
            for r in 1..=km {
                let v = cabs1(lu.ab[lu.at(j + r, j)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.ipiv[j] = j + p;
            if best == 0.0 {
                lu.singular = true;
                continue;
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let (x, y) = (lu.at(j, c), lu.at(j + p, c));
                    lu.ab.swap(x, y);
                }
            }
            if km > 0 {
                let inv = C64::new(1.0, 0.0) / lu.ab[lu.at(j, j)];
                let base = lu.at(j, j);
                for r in 1..=km {
                    lu.ab[base + r] *= inv;
                }
                for c in j + 1..=ju {
                    let u = lu.ab[lu.at(j, c)];
                    if u == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let cb = lu.at(j, c);
                    for r in 1..=km {
                        let l = lu.ab[base + r];
                        lu.ab[cb + r] -= l * u;
                    }
                }
            }
        }
        lu
    }

    /// An exactly zero pivot was met: the shifted matrix is singular.
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [C64]) {
        let n = self.dim;
        let kv = self.kl + self.ku;
        if self.kl > 0 {
            for j in 0..n.saturating_sub(1) {
                let lm = self.kl.min(n - 1 - j);
                let l = self.ipiv[j];
                if l != j {
                    b.swap(l, j);
                }
                let bj = b[j];
                let base = self.at(j, j);
                for r in 1..=lm {
                    b[j + r] -= self.ab[base + r] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[self.at(j, j)];
            let bj = b[j];
            let base = self.at(j, j);
            for i in j.saturating_sub(kv)..j {
                // A(i, j) sits (j - i) rows above the diagonal entry in column j
                b[i] -= self.ab[base - (j - i)] * bj;
            }
        }
    }

    /// Solves `A^* x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [C64]) {
        let n = self.dim;
        let kv = self.kl + self.ku;
        for j in 0..n {
            let base = self.at(j, j);
            let mut acc = b[j];
            for i in j.saturating_sub(kv)..j {
                acc -= self.ab[base - (j - i)].conj() * b[i];
            }
            b[j] = acc / self.ab[base].conj();
        }
        if self.kl > 0 {
            for j in (0..n.saturating_sub(1)).rev() {
                let lm = self.kl.min(n - 1 - j);
                let base = self.at(j, j);
                let mut acc = b[j];
                for r in 1..=lm {
                    acc -= self.ab[base + r].conj() * b[j + r];
                }
                b[j] = acc;
                let l = self.ipiv[j];
                if l != j {
                    b.swap(l, j);
                }
            }
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix (diag `a`, off-diag `b`).
fn tridiag_max_eig(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < k { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    // count of eigenvalues strictly below x
    let below = |x: f64| {
        let mut c = 0;
        let mut d = 1.0f64;
        for i in 0..k {
            let off = if i > 0 { b[i - 1] * b[i - 1] / d } else { 0.0 };
            d = a[i] - x - off;
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1e-300);
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Surrogate reported for singular shifts.
pub const SINGULAR_NORM: f64 = 1e300;

/// Smallest singular value of the factored matrix: `1/sqrt(λ_max((A A^*)^{-1}))`, with
/// λ_max found by Lanczos with full reorthogonalization. Returns 0 for an exactly
/// singular factorization.
pub fn smallest_singular_value(lu: &BandLu) -> f64 {
    let n = lu.dim();
    if n == 0 {
        return f64::INFINITY;
    }
    if lu.is_singular() {
        return 0.0;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut q: Vec<C64> = (0..n)
        .map(|_| {
            let (re, im): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            C64::new(re, im)
        })
        .collect();
    let nq = vnorm(&q);
    q.iter_mut().for_each(|z| *z /= nq);
    let maxit = n.min(120);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(maxit);
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut theta = 0.0f64;
    let mut stable = 0;
    for k in 0..maxit {
        let mut w = q.clone();
        lu.solve(&mut w);
        lu.solve_adjoint(&mut w);
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return 0.0;
        }
        let alpha = dot(&q, &w).re;
        basis.push(q.clone());
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &w);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        alphas.push(alpha);
        let t = tridiag_max_eig(&alphas, &betas);
        let beta = vnorm(&w);
        if k > 0 && (t - theta).abs() <= 1e-13 * t {
            stable += 1;
        } else {
            stable = 0;
        }
        theta = t;
        if stable >= 2 || beta <= 1e-14 * theta.abs() {
            break;
        }
        betas.push(beta);
        q = w.into_iter().map(|z| z / beta).collect();
    }
    if theta <= 0.0 {
        return f64::INFINITY;
    }
    1.0 / theta.sqrt()
}

/// Smallest singular value of a dense matrix (oracle for the banded path).
pub fn dense_sigma_min(a: &DMatrix<C64>) -> f64 {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        let mut rng = linalg::rng(seed);
        let re = linalg::random_gaussian_matrix(&mut rng, n, n, 1.0);
        let im = linalg::random_gaussian_matrix(&mut rng, n, n, 1.0);
        let mut b = BandMatrix::zeros(n, kl, ku);
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                b.add(i, j, C64::new(re[(i, j)], im[(i, j)]));
            }
        }
        b
    }

    #[test]
    fn solves_match_dense() {
        for (kl, ku) in [(0, 0), (1, 2), (3, 1), (4, 4)] {
            let b = random_band(30, kl, ku, (kl * 10 + ku) as u64);
            let shift = C64::new(0.3, -0.2);
            let lu = b.factor_shifted(shift);
            let dense = b.to_dense() - DMatrix::<C64>::identity(30, 30) * shift;
            let rhs: Vec<C64> = (0..30).map(|i| C64::new(i as f64, 1.0 - i as f64 * 0.5)).collect();
            let mut x = rhs.clone();
            lu.solve(&mut x);
            let ax = &dense * nalgebra::DVector::from_column_slice(&x);
            let err: f64 = ax.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "solve ({kl},{ku}) err {err}");
            let mut y = rhs.clone();
            lu.solve_adjoint(&mut y);
            let ay = dense.adjoint() * nalgebra::DVector::from_column_slice(&y);
            let err: f64 = ay.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "adjoint ({kl},{ku}) err {err}");
        }
    }

    #[test]
    fn sigma_min_matches_dense_svd() {
        for seed in 0..5 {
            let b = random_band(60, 2, 2, seed);
            let s = smallest_singular_value(&b.factor_shifted(C64::new(0.5, 0.5)));
            let dense = b.to_dense() - DMatrix::<C64>::identity(60, 60) * C64::new(0.5, 0.5);
            let d = dense_sigma_min(&dense);
            assert!((s - d).abs() <= 1e-10 * d.max(1e-3), "{s} vs {d}");
        }
    }

    #[test]
    fn singular_shift_detected() {
        let mut b = BandMatrix::zeros(3, 0, 0);
        for i in 0..3 {
            b.add(i, i, C64::new(i as f64, 0.0));
        }
        assert_eq!(smallest_singular_value(&b.factor_shifted(C64::new(1.0, 0.0))), 0.0);
        let s = smallest_singular_value(&b.factor_shifted(C64::new(0.5, 0.0)));
        assert!((s - 0.5).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn out_of_band_write_panics() {
        BandMatrix::zeros(4, 1, 1).add(0, 3, C64::new(1.0, 0.0));
    }
}
