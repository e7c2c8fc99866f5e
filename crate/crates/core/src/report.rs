//! The combined analysis of one symbol: ellipticity, range, normality, spectrum, boundary
//! orders and (for `n = 1`) the normal form.

use crate::bracket::{bracket_norm, is_normal};
use crate::error::{Error, Result};
use crate::io::SymbolFile;
use crate::linalg;
use crate::order::{order_at_halfline, OrderReport};
use crate::reduction::{reduce_1d, NormalForm1D};
use crate::sector::{is_elliptic, numerical_range, AngularSector, EllipticityCertificate, SectorKind};
use crate::spectrum::{spectrum_lattice, SpectrumLattice};
use crate::symbol::QuadraticSymbol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityVerdict {
    #[serde(rename = "Normal-Stable")]
    NormalStable,
    #[serde(rename = "NonNormal-Unstable")]
    NonNormalUnstable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolEcho {
    pub symbol: SymbolFile,
    pub hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub symbol: SymbolEcho,
    pub elliptic: bool,
    pub certificate: EllipticityCertificate,
    pub numerical_range: AngularSector,
    pub normal: bool,
    /// Frobenius norm of the matrix of `{Re q, Im q}`.
    pub bracket_norm: f64,
    pub spectrum: Option<SpectrumLattice>,
    /// One report per boundary half-line; absent for normal symbols and whole-plane ranges.
    pub boundary_orders: Option<Vec<OrderReport>>,
    pub verdict: StabilityVerdict,
    pub normal_form_1d: Option<NormalForm1D>,
    pub notes: Vec<String>,
}

/// Runs every analysis that applies. Fails with [`Error::NotElliptic`] for non-elliptic
/// symbols; other sections degrade to `None` with a note.
pub fn analyze(q: &QuadraticSymbol, name: Option<String>, radius: f64, seed: u64) -> Result<AnalysisReport> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let ell = is_elliptic(q);
    if !ell.elliptic {
        return Err(Error::NotElliptic);
    }
    let range = numerical_range(q)?;
    let normal = is_normal(q);
    let mut notes = Vec::new();
    let spectrum = match range.kind {
        SectorKind::FullPlane => {
            notes.push("numerical range is the whole plane: the eigenvalue formula does not apply".into());
            None
        }
        _ => {
            let s = spectrum_lattice(q, radius)?;
            if s.boundary_flagged() {
                notes.push("a spectral generator lies on the boundary of the numerical range; its membership is tolerance-dependent".into());
            }
            Some(s)
        }
    };
    let boundary_orders = if normal {
        None
    } else if range.kind == SectorKind::Sector {
        let mut rng = linalg::rng(seed);
        let a = order_at_halfline(q, 1, &mut rng)?;
        let b = order_at_halfline(q, 2, &mut rng)?;
        Some(vec![a, b])
    } else {
        notes.push("no boundary half-lines: the numerical range is the whole plane".into());
        None
    };
    let normal_form_1d = if q.dim() == 1 { Some(reduce_1d(q)?) } else { None };
    Ok(AnalysisReport {
        symbol: SymbolEcho { symbol: SymbolFile::from_symbol(q, name), hash: q.hash_hex() },
        elliptic: true,
        certificate: ell.certificate,
        numerical_range: range,
        normal,
        bracket_norm: bracket_norm(q),
        spectrum,
        boundary_orders,
        verdict: if normal { StabilityVerdict::NormalStable } else { StabilityVerdict::NonNormalUnstable },
        normal_form_1d,
        notes,
    })
}
