//! Resolvent norms of truncated Weyl operators: adaptive cutoffs, pseudospectrum grids,
//! half-line profiles and semiclassical index fits.

use crate::band::{self, SINGULAR_NORM};
use crate::error::{Error, Result};
use crate::fock::{self, FockOperator};
use crate::linalg;
use crate::sector::{numerical_range, AngularSector, SectorKind};
use crate::spectrum::spectrum_lattice;
use crate::symbol::QuadraticSymbol;
use num_complex::Complex64 as C64;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};

/// Relative change between `σ_min` at `N` and `2N` accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-2;
/// Grid points this close to a lattice eigenvalue are reported as `+inf`.
pub const LATTICE_TOL: f64 = 1e-9;
/// Largest matrix for which the dense SVD cross-check is run.
pub const DENSE_CHECK_MAX: usize = 1500;
pub const VALIDATION_POINTS: usize = 10;
pub const MAX_GRID_POINTS: usize = 1_000_000;
/// Growth verdict: t-statistic threshold on the slope of `ln ||R||` against `η`.
pub const GROWTH_T: f64 = 5.0;
/// Bounded verdict: `max/min` of the norms.
pub const BOUNDED_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub budget_rows: usize,
    pub doubling_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { budget_rows: fock::budget_from_env(), doubling_tol: DOUBLING_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub converged: bool,
    pub value_n: f64,
    pub value_2n: f64,
    pub cutoff: usize,
}

/// Resolvent norm from the adaptive doubling schedule; `cutoff` is the last `N` used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveNorm {
    pub norm: f64,
    pub sigma_min: f64,
    pub converged: bool,
    pub cutoff: usize,
}

/// Owns one symbol and caches its compressions per cutoff; safe to share across threads.
pub struct ResolventEngine {
    q: QuadraticSymbol,
    config: EngineConfig,
    cache: Mutex<HashMap<usize, Arc<FockOperator>>>,
}

impl ResolventEngine {
    pub fn new(q: QuadraticSymbol) -> Self {
        Self::with_config(q, EngineConfig::default())
    }

    pub fn with_config(q: QuadraticSymbol, config: EngineConfig) -> Self {
        ResolventEngine { q, config, cache: Mutex::new(HashMap::new()) }
    }

    pub fn symbol(&self) -> &QuadraticSymbol {
        &self.q
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn operator(&self, cutoff: usize) -> Result<Arc<FockOperator>> {
        if let Some(op) = self.cache.lock().unwrap().get(&cutoff) {
            return Ok(op.clone());
        }
        let op = Arc::new(fock::assemble_weyl_matrix(&self.q, cutoff, self.config.budget_rows)?);
        Ok(self.cache.lock().unwrap().entry(cutoff).or_insert(op).clone())
    }

    pub fn fits_budget(&self, cutoff: usize) -> bool {
        fock::rows_for(self.q.dim(), cutoff) <= self.config.budget_rows
    }

    pub fn sigma_min(&self, z: C64, cutoff: usize) -> Result<f64> {
        Ok(self.operator(cutoff)?.sigma_min(z))
    }

    /// `1/σ_min(A_N - z)`, with `1e300` standing in for a singular shift.
    pub fn resolvent_norm(&self, z: C64, cutoff: usize) -> Result<f64> {
        Ok(fock::norm_from_sigma(self.sigma_min(z, cutoff)?))
    }

    pub fn truncation_check(&self, z: C64, cutoff: usize) -> Result<TruncationCheck> {
        let a = self.sigma_min(z, cutoff)?;
        let b = self.sigma_min(z, 2 * cutoff)?;
        Ok(TruncationCheck { converged: relative_change(a, b) <= self.config.doubling_tol, value_n: a, value_2n: b, cutoff })
    }

    /// Starting cutoff: `max(64, 4|z|)` for one mode, `max(24, 2|z|)` otherwise.
    pub fn initial_cutoff(&self, z: C64) -> usize {
        if self.q.dim() == 1 {
            64.max((4.0 * z.norm()).ceil() as usize)
        } else {
            24.max((2.0 * z.norm()).ceil() as usize)
        }
    }

    /// Doubles `N` from [`initial_cutoff`](Self::initial_cutoff) until two consecutive
    /// values agree or the next doubling would exceed the budget.
    pub fn adaptive_norm(&self, z: C64) -> Result<AdaptiveNorm> {
        let mut n = self.initial_cutoff(z);
        if !self.fits_budget(n) {
            return Err(Error::BudgetExceeded { rows: fock::rows_for(self.q.dim(), n), budget: self.config.budget_rows });
        }
        let mut prev = self.sigma_min(z, n)?;
        loop {
            if !self.fits_budget(2 * n) {
                return Ok(AdaptiveNorm { norm: fock::norm_from_sigma(prev), sigma_min: prev, converged: false, cutoff: n });
            }
            let next = self.sigma_min(z, 2 * n)?;
            n *= 2;
            if relative_change(prev, next) <= self.config.doubling_tol {
                return Ok(AdaptiveNorm { norm: fock::norm_from_sigma(next), sigma_min: next, converged: true, cutoff: n });
            }
            prev = next;
        }
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(Error::InvalidArgument(format!("bad region [{re_min}, {re_max}] x [{im_min}, {im_max}]")));
        }
        Ok(Region { re_min, re_max, im_min, im_max })
    }

    fn max_modulus(&self) -> f64 {
        [self.re_min.abs(), self.re_max.abs()].iter().fold(0.0f64, |m, &r| {
            m.max(r.hypot(self.im_min.abs())).max(r.hypot(self.im_max.abs()))
        })
    }
}

/// Dense-SVD cross-check of the banded `σ_min` on a random subset of grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub points: usize,
    pub max_relative_error: f64,
}

/// Point `(ix, iy)` is stored at `iy * nx + ix` and sits at
/// `re_min + ix·Δre + i(im_min + iy·Δim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventGrid {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    /// `log10 ||(A_N - z)^{-1}||`; `+inf` near lattice eigenvalues, NaN where the budget was hit.
    pub values: Vec<f64>,
    pub converged: Vec<bool>,
    pub cutoff_used: Vec<usize>,
    pub validation: Validation,
}

impl ResolventGrid {
    pub fn point(&self, ix: usize, iy: usize) -> C64 {
        let r = &self.region;
        C64::new(
            r.re_min + ix as f64 * (r.re_max - r.re_min) / (self.nx - 1) as f64,
            r.im_min + iy as f64 * (r.im_max - r.im_min) / (self.ny - 1) as f64,
        )
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "re,im,log10_norm,converged,cutoff")?;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let z = self.point(ix, iy);
                let k = iy * self.nx + ix;
                writeln!(w, "{},{},{},{},{}", z.re, z.im, self.values[k], self.converged[k], self.cutoff_used[k])?;
            }
        }
        Ok(())
    }
}

fn lattice_points(q: &QuadraticSymbol, radius: f64) -> Result<Vec<C64>> {
    match numerical_range(q)?.kind {
        SectorKind::FullPlane => Ok(Vec::new()),
        _ => Ok(spectrum_lattice(q, radius)?.eigenvalues),
    }
}

/// Per-point adaptive resolvent norms over a rectangle, computed in parallel; output
/// order does not depend on scheduling.
pub fn pseudospectrum_grid(engine: &ResolventEngine, region: Region, nx: usize, ny: usize, seed: u64) -> Result<ResolventGrid> {
    if nx < 2 || ny < 2 || nx.saturating_mul(ny) > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!("resolution {nx}x{ny} outside [2, {MAX_GRID_POINTS}] points")));
    }
    let lattice = lattice_points(engine.symbol(), region.max_modulus() + 1.0)?;
    let mut grid = ResolventGrid {
        region,
        nx,
        ny,
        values: Vec::new(),
        converged: Vec::new(),
        cutoff_used: Vec::new(),
        validation: Validation { points: 0, max_relative_error: 0.0 },
    };
    let results: Vec<(f64, bool, usize)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let z = grid.point(k % nx, k / nx);
            if lattice.iter().any(|&l| (l - z).norm() <= LATTICE_TOL) {
                return (f64::INFINITY, true, 0);
            }
            match engine.adaptive_norm(z) {
                Ok(a) => (a.norm.log10(), a.converged, a.cutoff),
                Err(_) => (f64::NAN, false, 0),
            }
        })
        .collect();
    for (v, c, n) in results {
        grid.values.push(v);
        grid.converged.push(c);
        grid.cutoff_used.push(n);
    }
    grid.validation = validate(engine, &grid, seed);
    Ok(grid)
}

fn validate(engine: &ResolventEngine, grid: &ResolventGrid, seed: u64) -> Validation {
    let eligible: Vec<usize> = (0..grid.values.len())
        .filter(|&k| {
            grid.values[k].is_finite()
                && grid.cutoff_used[k] > 0
                && fock::rows_for(engine.symbol().dim(), grid.cutoff_used[k]) <= DENSE_CHECK_MAX
        })
        .collect();
    let count = eligible.len().min(VALIDATION_POINTS);
    let mut rng = linalg::rng(seed);
    let mut picks: Vec<usize> = sample(&mut rng, eligible.len(), count).into_iter().map(|i| eligible[i]).collect();
    picks.sort_unstable();
    let errs: Vec<f64> = picks
        .par_iter()
        .map(|&k| {
            let z = grid.point(k % grid.nx, k / grid.nx);
            let op = match engine.operator(grid.cutoff_used[k]) {
                Ok(op) => op,
                Err(_) => return f64::NAN,
            };
            let mut dense = op.to_dense();
            for i in 0..dense.nrows() {
                dense[(i, i)] -= z;
            }
            let want = band::dense_sigma_min(&dense);
            let got = op.sigma_min(z);
            (got - want).abs() / want.max(f64::MIN_POSITIVE)
        })
        .collect();
    Validation { points: count, max_relative_error: errs.into_iter().fold(0.0, f64::max) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Growth,
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalflineProfile {
    #[serde(with = "crate::io::c64_pair")]
    pub direction: C64,
    pub etas: Vec<f64>,
    pub norms: Vec<f64>,
    pub converged: Vec<bool>,
    pub cutoffs: Vec<usize>,
    /// Slope of `ln ||R||` against `η` over the growth window, and its t-statistic.
    pub slope: f64,
    pub t_statistic: f64,
    pub ratio: f64,
    pub verdict: Verdict,
}

/// Least-squares slope and its t-statistic (infinite for an exact fit).
pub fn slope_t_statistic(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    if x.len() < 3 || ssr <= 1e-28 * y.iter().map(|v| v * v).sum::<f64>() {
        return (slope, if slope > 0.0 { f64::INFINITY } else if slope < 0.0 { f64::NEG_INFINITY } else { 0.0 });
    }
    let se = (ssr / (m - 2.0) / sxx).sqrt();
    (slope, slope / se)
}

/// Growth when the last `max(3, ⌈m/2⌉)` log-norms rise with t > 5; otherwise Bounded when
/// `max/min ≤ 10`. Any unconverged point makes the verdict Inconclusive.
pub fn classify_profile(etas: &[f64], norms: &[f64], converged: &[bool]) -> (f64, f64, f64, Verdict) {
    let m = etas.len();
    let w = 3.max(m.div_ceil(2)).min(m);
    let logs: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let (slope, t) = slope_t_statistic(&etas[m - w..], &logs[m - w..]);
    let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let ratio = hi / lo;
    let verdict = if converged.iter().any(|c| !c) {
        Verdict::Inconclusive
    } else if slope > 0.0 && t > GROWTH_T {
        Verdict::Growth
    } else if ratio <= BOUNDED_RATIO {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    (slope, t, ratio, verdict)
}

/// Resolvent norms along `η·z0`.
pub fn halfline_profile(engine: &ResolventEngine, z0: C64, etas: &[f64]) -> Result<HalflineProfile> {
    if z0.norm() == 0.0 || !z0.norm().is_finite() {
        return Err(Error::InvalidArgument("direction must be a non-zero complex number".into()));
    }
    let dir = z0 / z0.norm();
    if etas.len() < 3 || etas.iter().any(|e| !(e.is_finite() && *e > 0.0)) || etas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("need at least 3 strictly increasing positive etas".into()));
    }
    let top = etas[etas.len() - 1];
    let lattice = lattice_points(engine.symbol(), top + 1.0)?;
    for &eta in etas {
        if lattice.iter().any(|&l| (l - dir * eta).norm() < 1e-6 * eta) {
            return Err(Error::InvalidArgument(format!("eta = {eta} lies on the spectrum")));
        }
    }
    let samples: Vec<AdaptiveNorm> = etas.par_iter().map(|&e| engine.adaptive_norm(dir * e)).collect::<Result<_>>()?;
    let norms: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    let converged: Vec<bool> = samples.iter().map(|s| s.converged).collect();
    let (slope, t_statistic, ratio, verdict) = classify_profile(etas, &norms, &converged);
    Ok(HalflineProfile {
        direction: dir,
        etas: etas.to_vec(),
        norms,
        converged,
        cutoffs: samples.iter().map(|s| s.cutoff).collect(),
        slope,
        t_statistic,
        ratio,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScSample {
    pub h: f64,
    pub norm: f64,
    pub converged: bool,
    pub cutoff: usize,
}

/// `||(q(x, hξ)^w - z)^{-1}|| = h^{-1} ||(q^w - z/h)^{-1}||` (rescaling `y = h^{1/2} x`).
pub fn semiclassical_norm(engine: &ResolventEngine, z: C64, h: f64) -> Result<ScSample> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("h must lie in (0, 1], got {h}")));
    }
    let a = engine.adaptive_norm(z / h)?;
    let norm = if a.norm >= SINGULAR_NORM { SINGULAR_NORM } else { a.norm / h };
    Ok(ScSample { h, norm, converged: a.converged, cutoff: a.cutoff })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFit {
    #[serde(with = "crate::io::c64_pair")]
    pub z: C64,
    pub hs: Vec<f64>,
    pub sc_norms: Vec<f64>,
    pub cutoffs: Vec<usize>,
    /// Slope of `ln ||R_h||` against `ln(1/h)`.
    pub mu_hat: f64,
    /// Root-mean-square residual of the fit (natural log units).
    pub residual: f64,
}

/// Fits `||R_h|| ~ C h^{-μ}`. Requires at least four values of `h` spanning a factor 8;
/// an unconverged sample aborts with the samples computed before it.
pub fn fit_sc_index(engine: &ResolventEngine, z: C64, hs: &[f64]) -> Result<IndexFit> {
    let (lo, hi) = hs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &h| (a.min(h), b.max(h)));
    if hs.len() < 4 || hi / lo < 8.0 - 1e-12 {
        return Err(Error::InvalidArgument("need at least 4 values of h spanning a factor of 8".into()));
    }
    let samples: Vec<Result<ScSample>> = hs.par_iter().map(|&h| semiclassical_norm(engine, z, h)).collect();
    let mut good = Vec::with_capacity(hs.len());
    for s in samples {
        let s = s?;
        if !s.converged || s.norm >= SINGULAR_NORM {
            return Err(Error::FitAborted { h: s.h, partial: good.iter().map(|g: &ScSample| [g.h, g.norm]).collect() });
        }
        good.push(s);
    }
    let x: Vec<f64> = good.iter().map(|s| (1.0 / s.h).ln()).collect();
    let y: Vec<f64> = good.iter().map(|s| s.norm.ln()).collect();
    let (mu_hat, _) = slope_t_statistic(&x, &y);
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - my - mu_hat * (a - mx)).powi(2)).sum();
    Ok(IndexFit {
        z,
        hs: hs.to_vec(),
        sc_norms: good.iter().map(|s| s.norm).collect(),
        cutoffs: good.iter().map(|s| s.cutoff).collect(),
        mu_hat,
        residual: (ssr / m).sqrt(),
    })
}

/// Distance from `z` to the numerical range, the lower bound for `σ_min(A_N - z)`.
pub fn range_distance(q: &QuadraticSymbol, z: C64) -> Result<f64> {
    let s: AngularSector = numerical_range(q)?;
    Ok(s.distance(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    fn engine(q: QuadraticSymbol) -> ResolventEngine {
        ResolventEngine::with_config(q, EngineConfig { budget_rows: 4096, doubling_tol: DOUBLING_TOL })
    }

    #[test]
    fn harmonic_norms_are_exact() {
        let e = engine(fixtures::harmonic(1));
        assert!((e.resolvent_norm(C64::new(-1.0, 0.0), 64).unwrap() - 0.5).abs() < 1e-12);
        assert!((e.resolvent_norm(C64::new(2.0, 0.0), 64).unwrap() - 1.0).abs() < 1e-12);
        let c = e.truncation_check(C64::new(-1.0, 0.0), 32).unwrap();
        assert!(c.converged && (c.value_n - 2.0).abs() < 1e-12 && (c.value_2n - 2.0).abs() < 1e-12);
        assert_eq!(e.resolvent_norm(C64::new(3.0, 0.0), 64).unwrap(), SINGULAR_NORM);
    }

    #[test]
    fn rotated_oscillator_banded_matches_dense() {
        let e = engine(fixtures::rotated_oscillator(PI / 4.0));
        let z = C64::from_polar(4.0, PI / 6.0);
        let a = e.adaptive_norm(z).unwrap();
        assert!(a.converged);
        let op = e.operator(a.cutoff).unwrap();
        let mut d = op.to_dense();
        for i in 0..d.nrows() {
            d[(i, i)] -= z;
        }
        let want = band::dense_sigma_min(&d);
        assert!((a.sigma_min - want).abs() <= 1e-10 * want.max(1e-300) + 1e-14, "{} {}", a.sigma_min, want);
    }

    #[test]
    fn truncation_rule_detects_unreached_energy() {
        let e = engine(fixtures::rotated_oscillator(PI / 4.0));
        assert!(e.truncation_check(C64::from_polar(5.0, PI / 6.0), 64).unwrap().converged);
        assert!(!e.truncation_check(C64::from_polar(200.0, PI / 6.0), 16).unwrap().converged);
    }

    #[test]
    fn semiclassical_identity() {
        let e = engine(fixtures::harmonic(1));
        let z = C64::new(-1.0, 0.0);
        let s1 = semiclassical_norm(&e, z, 1.0).unwrap();
        assert_eq!(s1.norm, e.adaptive_norm(z).unwrap().norm);
        for h in [0.5, 0.25, 0.1] {
            let s = semiclassical_norm(&e, z, h).unwrap();
            assert!((s.norm - 1.0 / (1.0 + h)).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_index_is_zero_and_bad_windows_rejected() {
        let e = engine(fixtures::harmonic(1));
        let z = C64::new(-1.0, 0.0);
        let fit = fit_sc_index(&e, z, &[0.125, 0.0625, 0.03125, 0.015625]).unwrap();
        assert!(fit.mu_hat.abs() < 0.1, "{}", fit.mu_hat);
        assert!(fit_sc_index(&e, z, &[1.0, 0.5, 0.25]).is_err());
        assert!(fit_sc_index(&e, z, &[1.0, 0.8, 0.5, 0.25]).is_err());
    }

    #[test]
    fn budget_exhaustion_aborts_fit() {
        let e = ResolventEngine::with_config(fixtures::rotated_oscillator(PI / 4.0), EngineConfig { budget_rows: 300, doubling_tol: DOUBLING_TOL });
        match fit_sc_index(&e, C64::new(1.0, 0.0), &[0.5, 0.25, 0.125, 0.0625, 0.01]) {
            Err(Error::FitAborted { .. }) | Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_verdicts() {
        let e = engine(fixtures::harmonic(1));
        let p = halfline_profile(&e, C64::from_polar(1.0, PI / 4.0), &[4.0, 8.0, 16.0, 32.0]).unwrap();
        assert_eq!(p.verdict, Verdict::Bounded);
        for (eta, n) in p.etas.iter().zip(&p.norms) {
            assert!(*n <= 1.0 / (eta * (PI / 4.0).sin()) + 1e-9);
        }
        assert!(p.norms.windows(2).all(|w| w[1] < w[0]));
        assert!(halfline_profile(&e, C64::new(1.0, 0.0), &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn slope_statistics() {
        let (s, t) = slope_t_statistic(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((s - 2.0).abs() < 1e-12 && t.is_infinite());
        let (s, t) = slope_t_statistic(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.1, 2.9, 4.0]);
        assert!((s - 0.98).abs() < 1e-12 && t > 10.0);
    }

    #[test]
    fn harmonic_grid_marks_lattice_and_validates() {
        let e = engine(fixtures::harmonic(1));
        let g = pseudospectrum_grid(&e, Region::new(0.0, 4.0, -1.0, 1.0).unwrap(), 5, 3, 0).unwrap();
        // (1, 0) and (3, 0) are lattice points
        assert_eq!(g.value(1, 1), f64::INFINITY);
        assert_eq!(g.value(3, 1), f64::INFINITY);
        assert!((g.value(2, 1) - 0.0).abs() < 1e-12);
        assert!(g.validation.points > 0 && g.validation.max_relative_error < 1e-10);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("re,im,log10_norm,converged,cutoff\n0,-1,"));
        assert_eq!(text.lines().count(), 16);
    }
}
