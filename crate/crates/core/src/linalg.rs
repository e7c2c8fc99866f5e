//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The matrix of the symplectic form, `[[0, -I], [I, 0]]`.
pub fn sigma_matrix(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        s[(j, n + j)] = -1.0;
        s[(n + j, j)] = 1.0;
    }
    s
}

pub fn re_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn im_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.im)
}

pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

pub fn combine(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<C64> {
    re.zip_map(im, C64::new)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eig(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(m.nrows(), m.ncols());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the column span (columns with negligible R diagonal are dropped).
pub fn orthonormalize(v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let scale = v.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in v.column_iter() {
        let mut w = c.clone_owned();
        for _ in 0..2 {
            for u in &cols {
                let p = u.dot(&w);
                w -= u * p;
            }
        }
        let nw = w.norm();
        if nw > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            cols.push(w / nw);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(v.nrows(), 0);
    }
    DMatrix::from_columns(&cols)
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub fn frob(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

pub fn cfrob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn random_gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, std: f64) -> DMatrix<f64> {
    use rand_distr::{Distribution, Normal};
    let d = Normal::new(0.0, std).expect("valid normal");
    DMatrix::from_fn(rows, cols, |_, _| d.sample(rng))
}

pub fn random_unit_vector(rng: &mut Rng, dim: usize) -> DVector<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            let x: f64 = StandardNormal.sample(rng);
            x
        });
        let nv = v.norm();
        if nv > 1e-8 {
            return v / nv;
        }
    }
}

/// Largest-modulus-first ordering is never wanted here; sort complex values by (re, im).
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_squares_to_minus_identity() {
        let s = sigma_matrix(3);
        let p = &s * &s;
        assert!((p + DMatrix::<f64>::identity(6, 6)).norm() < 1e-15);
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let v = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let q = orthonormalize(&v);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
    }
}
