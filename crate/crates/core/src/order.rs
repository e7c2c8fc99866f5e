//! Iterated Poisson brackets and the order of `q - z` on the boundary half-lines of `Σ(q)`.

use crate::bracket::{is_normal, poisson_bracket};
use crate::error::{Error, Result};
use crate::linalg::{self, Rng};
use crate::reduction::{positive_definite_direction, simultaneous_reduce, SimultaneousReduction};
use crate::sector::SectorKind;
use crate::symbol::{QuadraticSymbol, RealQuadraticForm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Relative vanishing tolerance for `p_I(X)` against `||p_I|| ||X||²`.
pub const VANISH_TOL: f64 = 1e-9;
/// Forms with `||M_I||` below this fraction of the a-priori bound `4^{L-1} ||Q||^L` are
/// round-off of an identically vanishing bracket.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum HalfLineOrder {
    Finite { k: u32 },
    /// Every bracket up to length `cap + 1` vanishes somewhere on the zero set: infinite order.
    ExceedsCap { cap: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    /// 1 for the half-line at `theta_min`, 2 for `theta_max`.
    pub halfline_index: usize,
    #[serde(with = "crate::io::c64_pair")]
    pub halfline_direction: C64,
    /// Representative point of the half-line; every witness point lies on `q^{-1}(z)`.
    #[serde(with = "crate::io::c64_pair")]
    pub z: C64,
    pub order: HalfLineOrder,
    /// Dimension of the extremal eigenspace carrying the zero set.
    pub multiplicity: usize,
    pub witness_points: Vec<Vec<f64>>,
    /// Pointwise order of each witness point; the value `4n - 1` means every bracket
    /// checked vanishes there.
    pub per_point_orders: Vec<u32>,
}

pub fn order_cap(n: usize) -> u32 {
    (4 * n - 2) as u32
}

/// All iterated brackets `{p_{i1}, {p_{i2}, ... p_{iL}}}` with `p_1 = Re q`, `p_2 = Im q`,
/// grouped by length `L = 1..=max_len` (index `L - 1`).
pub fn iterated_brackets(q: &QuadraticSymbol, max_len: usize) -> Vec<Vec<RealQuadraticForm>> {
    let base = [q.real_part(), q.imag_part()];
    let mut levels: Vec<Vec<RealQuadraticForm>> = vec![base.to_vec()];
    for _ in 1..max_len {
        let prev = levels.last().expect("non-empty");
        let mut next = Vec::with_capacity(2 * prev.len());
        for p in &base {
            for f in prev {
                next.push(poisson_bracket(p, f).expect("same dimension"));
            }
        }
        levels.push(next);
    }
    levels
}

fn noise_floor(q: &QuadraticSymbol, len: usize) -> f64 {
    let s = q.norm();
    NOISE_FLOOR * 4f64.powi(len as i32 - 1) * s.powi(len as i32)
}

/// Pointwise order at `x ∈ q^{-1}(z)`: the largest `j` such that every bracket of length
/// at most `j` vanishes at `x` (length-one brackets vanish by assumption).
pub fn pointwise_order(q: &QuadraticSymbol, levels: &[Vec<RealQuadraticForm>], x: &[f64]) -> u32 {
    let nx2: f64 = x.iter().map(|v| v * v).sum();
    for (li, forms) in levels.iter().enumerate().skip(1) {
        let len = li + 1;
        let floor = noise_floor(q, len);
        for f in forms {
            let nf = f.norm();
            if nf <= floor {
                continue;
            }
            if f.eval(x).abs() > VANISH_TOL * nf * nx2 {
                return li as u32;
            }
        }
    }
    levels.len() as u32
}

struct Boundary {
    z: C64,
    direction: C64,
    /// Columns are points of `q^{-1}(z)`.
    basis: DMatrix<f64>,
}

fn boundary_data(q: &QuadraticSymbol, j: usize) -> Result<(SimultaneousReduction, Boundary)> {
    if j != 1 && j != 2 {
        return Err(Error::InvalidArgument(format!("half-line index must be 1 or 2, got {j}")));
    }
    let theta = positive_definite_direction(q)?.ok_or(Error::FullPlane)?;
    let red = simultaneous_reduce(q, theta)?;
    let sector = red.sector();
    let d = red.alphas.len();
    let idx = if sector.kind == SectorKind::HalfLine || j == 1 { 0 } else { d - 1 };
    let cols: Vec<usize> = if sector.kind == SectorKind::HalfLine { (0..d).collect() } else { red.cluster(idx) };
    let alpha = red.alphas[idx];
    let z = C64::from_polar(1.0, -theta) * C64::new(1.0, alpha);
    let basis = DMatrix::from_fn(d, cols.len(), |a, b| red.p[(a, cols[b])]);
    Ok((red, Boundary { z, direction: z / z.norm(), basis }))
}

/// Sample points of `q^{-1}(z_j)` for the representative `z_j` of the `j`-th boundary
/// half-line: the `m` eigenspace basis directions followed by `max(8, 2m²)` random
/// combinations, all mapped through the reduction `P`.
pub fn boundary_zero_set(q: &QuadraticSymbol, j: usize, rng: &mut Rng) -> Result<(C64, Vec<Vec<f64>>)> {
    let (_, b) = boundary_data(q, j)?;
    Ok((b.z, sample_zero_set(&b, rng)))
}

fn sample_zero_set(b: &Boundary, rng: &mut Rng) -> Vec<Vec<f64>> {
    let m = b.basis.ncols();
    let mut pts: Vec<Vec<f64>> = b.basis.column_iter().map(|c| c.iter().copied().collect()).collect();
    for _ in 0..(2 * m * m).max(8) {
        let y = linalg::random_unit_vector(rng, m);
        pts.push((&b.basis * y).iter().copied().collect());
    }
    pts
}

/// Order of `q - z` on the `j`-th boundary half-line (maximum of pointwise orders over
/// the zero set). The maximum is located by restricting the brackets to the zero-set
/// subspace level by level; random samples are reported alongside.
pub fn order_at_halfline(q: &QuadraticSymbol, j: usize, rng: &mut Rng) -> Result<OrderReport> {
    if is_normal(q) {
        return Err(Error::NormalSymbol);
    }
    let (_, b) = boundary_data(q, j)?;
    let n = q.dim();
    let cap = order_cap(n);
    let levels = iterated_brackets(q, cap as usize + 1);
    let mut points = sample_zero_set(&b, rng);
    let v0 = linalg::orthonormalize(&b.basis);
    let search = subspace_search(q, &levels, &v0, rng);
    let mut x: Vec<f64> = search.iter().copied().collect();
    let val = q.eval(&x)?;
    let scale = (b.z.norm() / val.norm()).sqrt();
    x.iter_mut().for_each(|v| *v *= scale);
    points.push(x);
    let per: Vec<u32> = points.iter().map(|p| pointwise_order(q, &levels, p)).collect();
    let best = per.iter().copied().max().unwrap_or(1);
    let order = if best > cap { HalfLineOrder::ExceedsCap { cap } } else { HalfLineOrder::Finite { k: best } };
    Ok(OrderReport {
        halfline_index: j,
        halfline_direction: b.direction,
        z: b.z,
        order,
        multiplicity: b.basis.ncols(),
        witness_points: points,
        per_point_orders: per,
    })
}

/// Point of the subspace `span(v)` where the largest number of bracket levels vanish.
fn subspace_search(
    q: &QuadraticSymbol,
    levels: &[Vec<RealQuadraticForm>],
    v0: &DMatrix<f64>,
    rng: &mut Rng,
) -> DVector<f64> {
    let mut v = v0.clone();
    for (li, forms) in levels.iter().enumerate().skip(1) {
        let floor = noise_floor(q, li + 1);
        for f in forms {
            let nf = f.norm();
            if nf <= floor {
                continue;
            }
            let c = linalg::symmetrize(&(v.transpose() * f.matrix() * &v));
            let nc = c.norm();
            if nc <= VANISH_TOL * nf {
                continue;
            }
            let (w, u) = linalg::sym_eig(&(c / nc));
            let (lo, hi) = (w[0], *w.last().unwrap());
            if lo < -VANISH_TOL && hi > VANISH_TOL {
                return nonlinear_search(q, levels, &v, li, rng);
            }
            let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k].abs() <= VANISH_TOL).collect();
            if keep.is_empty() {
                return v.column(0).clone_owned();
            }
            let ker = DMatrix::from_fn(u.nrows(), keep.len(), |a, b| u[(a, keep[b])]);
            v = linalg::orthonormalize(&(&v * ker));
        }
    }
    v.column(0).clone_owned()
}

/// Restricted, normalized constraint matrices of the non-negligible forms at one level.
fn restricted(q: &QuadraticSymbol, forms: &[RealQuadraticForm], len: usize, v: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let floor = noise_floor(q, len);
    forms
        .iter()
        .filter(|f| f.norm() > floor)
        .map(|f| linalg::symmetrize(&(v.transpose() * f.matrix() * v)) / f.norm())
        .collect()
}

fn max_residual(cs: &[DMatrix<f64>], u: &DVector<f64>) -> f64 {
    cs.iter().map(|c| u.dot(&(c * u)).abs()).fold(0.0, f64::max)
}

/// Common zeros on the unit sphere of several quadratic forms, by damped Gauss–Newton.
fn sphere_zero(cs: &[DMatrix<f64>], start: DVector<f64>) -> Option<DVector<f64>> {
    let d = start.len();
    let mut u = start.normalize();
    let mut mu = 1e-3;
    let cost = |u: &DVector<f64>| cs.iter().map(|c| u.dot(&(c * u)).powi(2)).sum::<f64>();
    let mut cur = cost(&u);
    for _ in 0..300 {
        if max_residual(cs, &u) <= 1e-13 {
            break;
        }
        let proj = DMatrix::identity(d, d) - &u * u.transpose();
        let mut jt = DMatrix::zeros(d, cs.len());
        let mut r = DVector::zeros(cs.len());
        for (i, c) in cs.iter().enumerate() {
            let cu = c * &u;
            r[i] = u.dot(&cu);
            jt.set_column(i, &(&proj * cu * 2.0));
        }
        let h = &jt * jt.transpose() + DMatrix::identity(d, d) * mu;
        let g = &jt * &r;
        let Some(step) = h.lu().solve(&(-g)) else { break };
        let cand = (&u + &proj * step).normalize();
        let cc = cost(&cand);
        if cc < cur {
            u = cand;
            cur = cc;
            mu = (mu * 0.3).max(1e-15);
        } else {
            mu *= 10.0;
            if mu > 1e8 {
                break;
            }
        }
    }
    (max_residual(cs, &u) <= VANISH_TOL * 0.1).then_some(u)
}

/// Fallback when a restricted form is indefinite: the zero set of the current level is a
/// cone, not a subspace, so continue with multistart sphere solves.
fn nonlinear_search(
    q: &QuadraticSymbol,
    levels: &[Vec<RealQuadraticForm>],
    v: &DMatrix<f64>,
    start_level: usize,
    rng: &mut Rng,
) -> DVector<f64> {
    let d = v.ncols();
    let mut cs: Vec<DMatrix<f64>> = Vec::new();
    let mut best = v.column(0).clone_owned();
    let mut found: Vec<DVector<f64>> = Vec::new();
    for li in start_level..levels.len() {
        cs.extend(restricted(q, &levels[li], li + 1, v));
        let mut next: Vec<DVector<f64>> = found.iter().filter_map(|u| sphere_zero(&cs, u.clone())).collect();
        if next.is_empty() {
            for _ in 0..48 {
                if let Some(u) = sphere_zero(&cs, linalg::random_unit_vector(rng, d)) {
                    next.push(u);
                    if next.len() >= 4 {
                        break;
                    }
                }
            }
        }
        if next.is_empty() {
            return best;
        }
        best = v * &next[0];
        found = next;
    }
    best
}
