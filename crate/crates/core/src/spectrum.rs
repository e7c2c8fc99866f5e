//! The eigenvalue lattice `{ Σ (r_λ + 2k_λ)(-iλ) }` of `q(x,ξ)^w` built from the Hamilton map.

use crate::error::{Error, Result};
use crate::linalg;
use crate::sector::{numerical_range, AngularSector, SectorKind};
use crate::symbol::QuadraticSymbol;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Relative single-linkage gap (times `||F||`) for clustering eigenvalues of `F`.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Angle tolerance for deciding `-iλ ∈ Σ(q)`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    #[serde(with = "crate::io::c64_pair")]
    pub lambda: C64,
    pub r: usize,
}

/// Eigenvalues of `F`, clustered (single linkage, gap `1e-8 ||F||`), with algebraic
/// multiplicities.
pub fn hamilton_spectrum(q: &QuadraticSymbol) -> Vec<EigenCluster> {
    let f = q.hamilton_map();
    let ev = f.eigenvalues();
    let tol = CLUSTER_TOL * linalg::cfrob(&f.matrix).max(f64::MIN_POSITIVE);
    // union-find over pairs closer than tol
    let m = ev.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..m {
        for b in a + 1..m {
            if (ev[a] - ev[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut out: Vec<EigenCluster> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    let mut sums: Vec<C64> = Vec::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => {
                out[k].r += 1;
                sums[k] += ev[i];
            }
            None => {
                roots.push(r);
                sums.push(ev[i]);
                out.push(EigenCluster { lambda: ev[i], r: 1 });
            }
        }
    }
    for (c, s) in out.iter_mut().zip(sums) {
        c.lambda = s / c.r as f64;
    }
    out.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(with = "crate::io::c64_pair")]
    pub mu: C64,
    pub r: usize,
    /// `mu` lies within the membership tolerance of a boundary half-line of `Σ(q)`.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLattice {
    pub generators: Vec<Generator>,
    #[serde(with = "crate::io::c64_vec")]
    pub eigenvalues: Vec<C64>,
    pub radius: f64,
}

impl SpectrumLattice {
    pub fn boundary_flagged(&self) -> bool {
        self.generators.iter().any(|g| g.on_boundary)
    }

    /// Lowest eigenvalue `Σ r_λ (-iλ)`.
    pub fn base(&self) -> C64 {
        self.generators.iter().map(|g| g.mu * g.r as f64).sum()
    }
}

fn retained_generators(q: &QuadraticSymbol, sector: &AngularSector) -> Vec<Generator> {
    let mut gens = Vec::new();
    for c in hamilton_spectrum(q) {
        let mu = -C64::i() * c.lambda;
        if mu.norm() <= CLUSTER_TOL * q.norm() {
            continue;
        }
        if sector.contains(mu, MEMBERSHIP_TOL) {
            let on_boundary = match sector.kind {
                SectorKind::Sector => {
                    let a = mu.arg();
                    [sector.theta_min, sector.theta_max]
                        .iter()
                        .any(|&t| linalg::wrap_angle(a - t).abs() <= MEMBERSHIP_TOL)
                }
                _ => false,
            };
            gens.push(Generator { mu, r: c.r, on_boundary });
        }
    }
    gens
}

/// All lattice points with modulus at most `radius`, sorted by `(re, im)`.
pub fn spectrum_lattice(q: &QuadraticSymbol, radius: f64) -> Result<SpectrumLattice> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius {radius} must be finite and non-negative")));
    }
    let sector = numerical_range(q)?;
    if sector.kind == SectorKind::FullPlane {
        return Err(Error::FullPlane);
    }
    let generators = retained_generators(q, &sector);
    let eigenvalues = enumerate(&generators, &sector, radius);
    Ok(SpectrumLattice { generators, eigenvalues, radius })
}

fn enumerate(gens: &[Generator], sector: &AngularSector, radius: f64) -> Vec<C64> {
    if gens.is_empty() {
        return Vec::new();
    }
    // Every generator projects positively on the bisector; partial sums only grow there.
    let bis = C64::from_polar(1.0, -(sector.theta_min + sector.theta_max) / 2.0);
    let proj = |z: C64| (z * bis).re;
    let base: C64 = gens.iter().map(|g| g.mu * g.r as f64).sum();
    let slack = 1e-12 * radius.max(1.0);
    let mut out = Vec::new();
    fn dfs(
        gens: &[Generator],
        i: usize,
        cur: C64,
        radius: f64,
        slack: f64,
        proj: &dyn Fn(C64) -> f64,
        out: &mut Vec<C64>,
    ) {
        if proj(cur) > radius + slack {
            return;
        }
        if i == gens.len() {
            if cur.norm() <= radius + slack {
                out.push(cur);
            }
            return;
        }
        let step = gens[i].mu * 2.0;
        let mut z = cur;
        loop {
            if proj(z) > radius + slack {
                break;
            }
            dfs(gens, i + 1, z, radius, slack, proj, out);
            z += step;
        }
    }
    dfs(gens, 0, base, radius, slack, &proj, &mut out);
    linalg::sort_complex(&mut out);
    let tol = 1e-9 * radius.max(f64::MIN_POSITIVE);
    let mut dedup: Vec<C64> = Vec::with_capacity(out.len());
    for z in out {
        if !dedup.iter().rev().take(64).any(|w| (w - z).norm() <= tol) {
            dedup.push(z);
        }
    }
    dedup
}

/// Distance from `z` to the spectrum. Requires `radius >= 2|z|`; the enumeration
/// radius is widened internally so the nearest lattice point is always included.
pub fn spectrum_distance(q: &QuadraticSymbol, z: C64, radius: f64) -> Result<f64> {
    if radius < 2.0 * z.norm() {
        return Err(Error::RadiusTooSmall { radius, needed: 2.0 * z.norm() });
    }
    let sector = numerical_range(q)?;
    if sector.kind == SectorKind::FullPlane {
        return Err(Error::FullPlane);
    }
    let gens = retained_generators(q, &sector);
    let base: C64 = gens.iter().map(|g| g.mu * g.r as f64).sum();
    let r = radius.max(z.norm() + (z - base).norm());
    let pts = enumerate(&gens, &sector, r);
    Ok(pts.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min))
}
