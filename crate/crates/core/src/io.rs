//! Symbol files and serde helpers for complex numbers (`[re, im]` pairs).

use crate::error::{Error, Result};
use crate::symbol::{from_operator_terms, OperatorTerm, QuadraticSymbol};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub mod c64_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

pub mod c64_vec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// On-disk symbol description: either the matrix `Q` directly or operator terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SymbolFile {
    Matrix {
        n: usize,
        #[serde(rename = "Q")]
        q: Vec<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Terms {
        n: usize,
        terms: Vec<OperatorTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

/// A parsed symbol together with the scalar residual of its operator form.
#[derive(Debug, Clone)]
pub struct LoadedSymbol {
    pub symbol: QuadraticSymbol,
    pub residual: C64,
    pub name: Option<String>,
}

impl SymbolFile {
    pub fn from_symbol(q: &QuadraticSymbol, name: Option<String>) -> Self {
        let m = q.matrix();
        SymbolFile::Matrix {
            n: q.dim(),
            q: (0..m.nrows()).map(|a| (0..m.ncols()).map(|b| pair(m[(a, b)])).collect()).collect(),
            name,
        }
    }

    /// Term input must have no scalar residual beyond `1e-9 (1 + ||Q||)`; a pure quadratic
    /// symbol with a leftover constant is not the Weyl quantization of `q`.
    pub fn load(&self) -> Result<LoadedSymbol> {
        match self {
            SymbolFile::Matrix { n, q, name } => {
                if q.len() != 2 * n || q.iter().any(|r| r.len() != 2 * n) {
                    return Err(Error::DimensionMismatch { expected: 2 * n, got: q.len() });
                }
                let m = DMatrix::from_fn(2 * n, 2 * n, |a, b| C64::new(q[a][b][0], q[a][b][1]));
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::Parse("non-finite matrix entry".into()));
                }
                Ok(LoadedSymbol { symbol: QuadraticSymbol::new(*n, m)?, residual: C64::new(0.0, 0.0), name: name.clone() })
            }
            SymbolFile::Terms { n, terms, name } => {
                let (symbol, residual) = from_operator_terms(*n, terms)?;
                if residual.norm() > 1e-9 * (1.0 + symbol.norm()) {
                    return Err(Error::InvalidTerm(format!(
                        "operator has non-zero scalar residual {}{:+}i after Weyl symmetrization",
                        residual.re, residual.im
                    )));
                }
                Ok(LoadedSymbol { symbol, residual, name: name.clone() })
            }
        }
    }
}

pub fn parse_symbol_json(text: &str) -> Result<LoadedSymbol> {
    let f: SymbolFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.load()
}
