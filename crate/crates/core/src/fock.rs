//! Exact compressions of quadratic Weyl operators to the tensor Hermite basis
//! `{Ψ_k : 0 <= k_j < N}`.

use crate::band::{self, BandMatrix};
use crate::error::{Error, Result};
use crate::symbol::QuadraticSymbol;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default maximum number of rows `N^n`.
pub const DEFAULT_BUDGET_ROWS: usize = 4096;
pub const BUDGET_ENV: &str = "QUADSPEC_BUDGET_ROWS";

/// `QUADSPEC_BUDGET_ROWS` if set to a positive integer, else the default.
pub fn budget_from_env() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET_ROWS)
}

/// Annihilation and creation matrices truncated to `N` states: `a[k-1, k] = sqrt(k)`.
pub fn ladder_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    let ad = a.transpose();
    (a, ad)
}

/// Single-mode factors appearing in a quadratic symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModeOp {
    X,
    D,
    XX,
    DD,
    /// `(xD + Dx) / 2`
    XDSym,
}

/// Non-zero entries `(row, col, value)` of the compression of a single-mode operator.
fn mode_entries(op: ModeOp, n: usize) -> Vec<(usize, usize, C64)> {
    let mut e = Vec::new();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let re = |v: f64| C64::new(v, 0.0);
    let im = |v: f64| C64::new(0.0, v);
    for k in 0..n {
        let k1 = (k + 1) as f64;
        let kk = (((k + 1) * (k + 2)) as f64).sqrt() / 2.0;
        let diag = (2 * k + 1) as f64 / 2.0;
        match op {
            ModeOp::X => {
                if k + 1 < n {
                    e.push((k, k + 1, re(k1.sqrt() * r2)));
                    e.push((k + 1, k, re(k1.sqrt() * r2)));
                }
            }
            ModeOp::D => {
                if k + 1 < n {
                    e.push((k + 1, k, im(k1.sqrt() * r2)));
                    e.push((k, k + 1, im(-k1.sqrt() * r2)));
                }
            }
            ModeOp::XX | ModeOp::DD => {
                let s = if op == ModeOp::XX { 1.0 } else { -1.0 };
                e.push((k, k, re(diag)));
                if k + 2 < n {
                    e.push((k + 2, k, re(s * kk)));
                    e.push((k, k + 2, re(s * kk)));
                }
            }
            ModeOp::XDSym => {
                if k + 2 < n {
                    e.push((k + 2, k, im(kk)));
                    e.push((k, k + 2, im(-kk)));
                }
            }
        }
    }
    e
}

/// Matrix of `q(x, ξ)^w` compressed to `N` Hermite states per mode; index of the state
/// `(k_1, ..., k_n)` is `Σ k_j N^{j-1}`.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub n: usize,
    pub cutoff: usize,
    pub matrix: BandMatrix,
    pub symbol_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpSidecar {
    pub format: String,
    pub n: usize,
    pub cutoff: usize,
    pub rows: usize,
    pub cols: usize,
    pub header_bytes: usize,
    pub entry_layout: String,
    pub index_order: String,
    pub symbol_hash: String,
}

impl FockOperator {
    pub fn rows(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    /// `σ_min(A - z)`.
    pub fn sigma_min(&self, z: C64) -> f64 {
        band::smallest_singular_value(&self.matrix.factor_shifted(z))
    }

    /// `1 / σ_min(A - z)`, with [`band::SINGULAR_NORM`] for (numerically) singular shifts.
    pub fn resolvent_norm(&self, z: C64) -> f64 {
        norm_from_sigma(self.sigma_min(z))
    }

    /// Dense binary dump: `"QSPC"`, `n` and `N` as little-endian `u32`, then the row-major
    /// entries as `(re, im)` little-endian `f64` pairs.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"QSPC")?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.cutoff as u32).to_le_bytes())?;
        let d = self.rows();
        for i in 0..d {
            for j in 0..d {
                let v = self.matrix.get(i, j);
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn sidecar(&self) -> DumpSidecar {
        DumpSidecar {
            format: "QSPC".into(),
            n: self.n,
            cutoff: self.cutoff,
            rows: self.rows(),
            cols: self.rows(),
            header_bytes: 12,
            entry_layout: "row-major complex, (re, im) little-endian f64".into(),
            index_order: "mixed-radix little-endian over per-mode Hermite indices".into(),
            symbol_hash: self.symbol_hash.clone(),
        }
    }
}

pub fn norm_from_sigma(s: f64) -> f64 {
    if s < 1e-300 {
        band::SINGULAR_NORM
    } else {
        1.0 / s
    }
}

/// Rows needed for `N` states per mode in `n` dimensions (saturating).
pub fn rows_for(n: usize, cutoff: usize) -> usize {
    (0..n).fold(1usize, |acc, _| acc.saturating_mul(cutoff))
}

/// Builds the exact compression. Each monomial `Q_ab X_a X_b` maps to its Weyl operator:
/// same-mode `x_j ξ_j` to `(x_j D_j + D_j x_j)/2`, distinct modes to tensor products.
pub fn assemble_weyl_matrix(q: &QuadraticSymbol, cutoff: usize, budget_rows: usize) -> Result<FockOperator> {
    let n = q.dim();
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let rows = rows_for(n, cutoff);
    if rows > budget_rows {
        return Err(Error::BudgetExceeded { rows, budget: budget_rows });
    }
    let band = if n == 1 { 2 } else { 2 * rows_for(n - 1, cutoff) };
    let mut m = BandMatrix::zeros(rows, band, band);
    let qm = q.matrix();
    let stride: Vec<usize> = (0..n).map(|j| rows_for(j, cutoff)).collect();
    let var = |a: usize| -> (usize, ModeOp) { if a < n { (a, ModeOp::X) } else { (a - n, ModeOp::D) } };

    let single = |mode: usize, op: ModeOp, c: C64, m: &mut BandMatrix| {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let ents = mode_entries(op, cutoff);
        for base in 0..rows {
            if (base / stride[mode]) % cutoff != 0 {
                continue;
            }
            for &(r, col, v) in &ents {
                m.add(base + r * stride[mode], base + col * stride[mode], c * v);
            }
        }
    };
    for a in 0..2 * n {
        for b in a..2 * n {
            let c = if a == b { qm[(a, a)] } else { qm[(a, b)] * 2.0 };
            let ((ja, oa), (jb, ob)) = (var(a), var(b));
            if ja == jb {
                let op = match (oa, ob) {
                    (ModeOp::X, ModeOp::X) => ModeOp::XX,
                    (ModeOp::D, ModeOp::D) => ModeOp::DD,
                    _ => ModeOp::XDSym,
                };
                single(ja, op, c, &mut m);
            } else if c != C64::new(0.0, 0.0) {
                let (ea, eb) = (mode_entries(oa, cutoff), mode_entries(ob, cutoff));
                for base in 0..rows {
                    if (base / stride[ja]) % cutoff != 0 || (base / stride[jb]) % cutoff != 0 {
                        continue;
                    }
                    for &(ra, ca, va) in &ea {
                        for &(rb, cb, vb) in &eb {
                            m.add(
                                base + ra * stride[ja] + rb * stride[jb],
                                base + ca * stride[ja] + cb * stride[jb],
                                c * va * vb,
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(FockOperator { n, cutoff, matrix: m, symbol_hash: q.hash_hex() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg;

    #[test]
    fn ladder_examples() {
        let (a, ad) = ladder_matrices(3);
        assert_eq!(a[(0, 1)], 1.0);
        assert!((a[(1, 2)] - 2f64.sqrt()).abs() < 1e-15);
        let comm = &a * &ad - &ad * &a;
        let top = comm.view((0, 0), (2, 2)).clone_owned();
        assert!((top - DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
        let x = (&a + &ad) * std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[(0, 1)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn mode_entries_match_ladder_products_in_the_interior() {
        // Away from the truncation edge the compression of x², D², sym(xD) equals the
        // product of compressions.
        let nn = 12;
        let (a, ad) = ladder_matrices(nn);
        let ac = linalg::complexify(&a);
        let adc = linalg::complexify(&ad);
        let r2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let x = (&ac + &adc) * r2;
        let d = (&adc - &ac) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let dense = |op| {
            let mut m = DMatrix::<C64>::zeros(nn, nn);
            for (r, c, v) in mode_entries(op, nn) {
                m[(r, c)] += v;
            }
            m
        };
        let half = C64::new(0.5, 0.0);
        for (op, want) in [
            (ModeOp::X, x.clone()),
            (ModeOp::D, d.clone()),
            (ModeOp::XX, &x * &x),
            (ModeOp::DD, &d * &d),
            (ModeOp::XDSym, (&x * &d + &d * &x) * half),
        ] {
            let got = dense(op);
            let diff = (got - want).view((0, 0), (nn - 2, nn - 2)).clone_owned();
            assert!(linalg::cfrob(&diff) < 1e-12, "{op:?}");
        }
    }

    #[test]
    fn harmonic_is_exactly_diagonal() {
        let f = assemble_weyl_matrix(&fixtures::harmonic(1), 50, 4096).unwrap();
        let d = f.to_dense();
        for i in 0..50 {
            for j in 0..50 {
                let want = if i == j { (2 * i + 1) as f64 } else { 0.0 };
                assert!((d[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let f2 = assemble_weyl_matrix(&fixtures::harmonic(2), 6, 4096).unwrap();
        let d2 = f2.to_dense();
        for i in 0..36 {
            let (k1, k2) = (i % 6, i / 6);
            assert!((d2[(i, i)].re - (2 * (k1 + k2) + 2) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            assemble_weyl_matrix(&fixtures::q2(), 100, 4096),
            Err(Error::BudgetExceeded { rows: 10000, budget: 4096 })
        ));
    }

    #[test]
    fn real_symbols_give_hermitian_matrices() {
        let q = QuadraticSymbol::from_parts(&fixtures::q2().real_part().matrix().clone(), &DMatrix::zeros(4, 4)).unwrap();
        let a = assemble_weyl_matrix(&q, 7, 4096).unwrap().to_dense();
        assert!(linalg::cfrob(&(&a - a.adjoint())) <= 1e-12 * linalg::cfrob(&a));
    }

    #[test]
    fn dump_layout() {
        let f = assemble_weyl_matrix(&fixtures::harmonic(1), 3, 4096).unwrap();
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"QSPC");
        assert_eq!(buf.len(), 12 + 9 * 16);
        let a11 = f64::from_le_bytes(buf[12 + 4 * 16..12 + 4 * 16 + 8].try_into().unwrap());
        assert_eq!(a11, 3.0);
    }
}
