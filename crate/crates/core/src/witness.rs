//! Sign changes of `Im q - Im z` along the Hamilton flow of `Re q` through an interior
//! point of the numerical range.

use crate::bracket::{classify_point, is_normal, poisson_bracket, PointClass};
use crate::error::{Error, Result};
use crate::linalg::{self, Rng};
use crate::reduction::{max_margin_direction, simultaneous_reduce, williamson};
use crate::sector::PD_MARGIN_TOL;
use crate::symbol::{QuadraticSymbol, SymplecticForm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

pub const DEFAULT_HORIZON: f64 = 200.0;
pub const DEFAULT_SAMPLES: usize = 64;
pub const SIGN_STEPS: usize = 10_000;
pub const REFINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicharWitness {
    /// The flow is that of `Re(e^{i rotation} q)`, which is positive definite; `rotation`
    /// is 0 whenever `Re q` already is.
    pub rotation: f64,
    /// `e^{i rotation} z`; `f(t) = Im(e^{i rotation} q)(Y(t)) - Im(z_rotated)`.
    #[serde(with = "crate::io::c64_pair")]
    pub z_rotated: C64,
    pub start_point: Vec<f64>,
    /// `{Re q, Im q}(start_point)`; negative in case 1, positive in case 2.
    pub bracket_at_start: f64,
    pub case: u8,
    pub t_plus: f64,
    pub t_minus: f64,
    pub f_values: [f64; 2],
    /// `2 F_{Re q}` (of the rotated symbol); `Y(t) = exp(t G) X_0`.
    pub flow_generator: Vec<Vec<f64>>,
}

/// Closed-form Hamilton flow of a positive definite form via its Williamson normal form:
/// in symplectic coordinates each pair rotates with angular speed `2 λ_j`.
#[derive(Debug, Clone)]
pub struct QuadraticFlow {
    s: DMatrix<f64>,
    s_inv: DMatrix<f64>,
    lambdas: Vec<f64>,
    generator: DMatrix<f64>,
}

impl QuadraticFlow {
    pub fn new(re: &crate::symbol::RealQuadraticForm) -> Result<Self> {
        let w = williamson(re)?;
        let n = re.dim();
        let sig = linalg::sigma_matrix(n);
        // S^{-1} = σ^{-1} S^T σ for symplectic S
        let s_inv = -(&sig * w.s.transpose() * &sig);
        let generator = -(sig * re.matrix()) * 2.0;
        Ok(Self { s: w.s, s_inv, lambdas: w.lambdas, generator })
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn propagator(&self, t: f64) -> DMatrix<f64> {
        let n = self.lambdas.len();
        let mut r = DMatrix::zeros(2 * n, 2 * n);
        for (j, &l) in self.lambdas.iter().enumerate() {
            let (s, c) = (2.0 * l * t).sin_cos();
            r[(j, j)] = c;
            r[(j, n + j)] = s;
            r[(n + j, j)] = -s;
            r[(n + j, n + j)] = c;
        }
        &self.s * r * &self.s_inv
    }

    pub fn apply(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        self.propagator(t) * x
    }

    pub fn is_symplectic_at(&self, t: f64) -> bool {
        SymplecticForm::new(self.lambdas.len()).is_symplectic(&self.propagator(t))
    }
}

fn rotation_for(q: &QuadraticSymbol) -> f64 {
    let m0 = linalg::min_eigenvalue(q.real_part().matrix());
    if m0 > PD_MARGIN_TOL * q.norm() {
        0.0
    } else {
        max_margin_direction(q).0
    }
}

/// Random points of the level set `{q = z}` for interior `z`, built in the simultaneous
/// reduction where `q(Py) = e^{-iθ*} Σ (1 + i α_j) y_j²`.
pub fn level_set_samples(q: &QuadraticSymbol, z: C64, count: usize, rng: &mut Rng) -> Result<Vec<DVector<f64>>> {
    let (theta, margin) = max_margin_direction(q);
    if margin <= PD_MARGIN_TOL * q.norm() {
        return Err(Error::FullPlane);
    }
    let red = simultaneous_reduce(q, theta)?;
    let w = z * C64::from_polar(1.0, theta);
    if w.re <= 0.0 {
        return Err(Error::NotInterior { re: z.re, im: z.im });
    }
    let rho = w.im / w.re;
    let a = &red.alphas;
    let tol = 1e-12 * (1.0 + a[0].abs() + a[a.len() - 1].abs());
    let above: Vec<usize> = (0..a.len()).filter(|&k| a[k] > rho + tol).collect();
    let below: Vec<usize> = (0..a.len()).filter(|&k| a[k] < rho - tol).collect();
    let level: Vec<usize> = (0..a.len()).filter(|&k| (a[k] - rho).abs() <= tol).collect();
    if above.is_empty() != below.is_empty() {
        return Err(Error::NotInterior { re: z.re, im: z.im });
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut s = vec![0.0; a.len()];
        let mut draw = |idx: &[usize], s: &mut Vec<f64>, weight: &dyn Fn(usize) -> f64| {
            let mut tot = 0.0;
            for &k in idx {
                let e: f64 = Exp1.sample(rng);
                s[k] = e;
                tot += e * weight(k);
            }
            tot
        };
        let ap = draw(&above, &mut s, &|k| a[k] - rho);
        let bm = draw(&below, &mut s, &|k| rho - a[k]);
        for &k in &above {
            s[k] /= ap;
        }
        for &k in &below {
            s[k] /= bm;
        }
        // free weights on the level directions
        draw(&level, &mut s, &|_| 1.0);
        let tot: f64 = s.iter().sum();
        if tot <= 0.0 {
            continue;
        }
        let y = DVector::from_iterator(
            a.len(),
            s.iter().map(|&v| {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * (v * w.re / tot).sqrt()
            }),
        );
        out.push(&red.p * y);
    }
    Ok(out)
}

/// A sign change of `f(t) = Im q(Y(t)) - Im z` along the flow of `Re q` from a level-set
/// point with non-vanishing bracket. Symbols whose real part is only semidefinite are first
/// rotated by the max-margin angle, which multiplies the bracket by `|e^{iθ}|² = 1`.
pub fn bichar_witness(q: &QuadraticSymbol, z: C64, horizon: f64, samples: usize, rng: &mut Rng) -> Result<BicharWitness> {
    if !(horizon > 0.0) || samples == 0 {
        return Err(Error::InvalidArgument("horizon and samples must be positive".into()));
    }
    if is_normal(q) {
        return Err(Error::NormalSymbol);
    }
    if classify_point(q, z)? != PointClass::Interior {
        return Err(Error::NotInterior { re: z.re, im: z.im });
    }
    let rot = rotation_for(q);
    let qr = q.rotated(rot);
    let zr = z * C64::from_polar(1.0, rot);
    let bracket = poisson_bracket(&q.real_part(), &q.imag_part())?;
    let mut cands: Vec<(f64, DVector<f64>)> = level_set_samples(&qr, zr, samples, rng)?
        .into_iter()
        .map(|x| {
            let b = bracket.eval(x.as_slice()) / (bracket.norm() * x.norm_squared());
            (b, x)
        })
        .filter(|(b, _)| b.abs() > 1e-8)
        .collect();
    // Case 1 points (negative bracket) first, most negative first; then case 2.
    cands.sort_by(|a, b| {
        let ka = (a.0 > 0.0, if a.0 < 0.0 { a.0 } else { -a.0 });
        let kb = (b.0 > 0.0, if b.0 < 0.0 { b.0 } else { -b.0 });
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    for (_, x0) in cands {
        if let Ok(w) = witness_from_point(&qr, zr, &x0, horizon) {
            return Ok(BicharWitness { rotation: rot, ..w });
        }
    }
    Err(Error::NoWitnessWithinHorizon { horizon })
}

/// Witness from a given start point on `{q = z}`; `q` must have positive definite real part.
pub fn witness_from_point(q: &QuadraticSymbol, z: C64, x0: &DVector<f64>, horizon: f64) -> Result<BicharWitness> {
    let flow = QuadraticFlow::new(&q.real_part())?;
    let im = q.imag_part();
    let bracket = poisson_bracket(&q.real_part(), &im)?;
    let b0 = bracket.eval(x0.as_slice());
    let f = |t: f64| im.eval(flow.apply(t, x0).as_slice()) - z.im;
    let lmax = flow.lambdas.iter().copied().fold(0.0, f64::max);
    let noise = 1e-13 * im.norm() * x0.norm_squared();
    let build = |case: u8, tp: f64, tm: f64, fp: f64, fm: f64| BicharWitness {
        rotation: 0.0,
        z_rotated: z,
        start_point: x0.iter().copied().collect(),
        bracket_at_start: b0,
        case,
        t_plus: tp,
        t_minus: tm,
        f_values: [fp, fm],
        flow_generator: flow.generator.row_iter().map(|r| r.iter().copied().collect()).collect(),
    };
    let mut eps = 1e-3 / (2.0 * lmax).max(1e-300);
    let mut local = None;
    for _ in 0..40 {
        let (fa, fb) = (f(-eps), f(eps));
        if fa.abs() > noise && fb.abs() > noise && fa.signum() != fb.signum() {
            local = Some((fa, fb));
            break;
        }
        eps *= 0.5;
    }
    let (fa, fb) = local.ok_or(Error::NoWitnessWithinHorizon { horizon })?;
    if b0 < 0.0 && fa > 0.0 && fb < 0.0 {
        return Ok(build(1, -eps, eps, fa, fb));
    }
    // Case 2: f(ε) > 0; march forward to the first negative sample, then bisect.
    let dt = (horizon - eps) / SIGN_STEPS as f64;
    let (mut lo, mut flo) = (eps, fb);
    for k in 1..=SIGN_STEPS {
        let t = eps + k as f64 * dt;
        let ft = f(t);
        if ft < -noise && flo > noise {
            let (mut a, mut b, mut fa, mut fb) = (lo, t, flo, ft);
            while b - a > REFINE_TOL {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm > noise {
                    a = m;
                    fa = fm;
                } else if fm < -noise {
                    b = m;
                    fb = fm;
                } else {
                    break;
                }
            }
            return Ok(build(2, a, b, fa, fb));
        }
        if ft > noise {
            lo = t;
            flo = ft;
        }
    }
    Err(Error::NoWitnessWithinHorizon { horizon })
}
