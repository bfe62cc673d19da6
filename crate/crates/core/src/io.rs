//! JSON wire formats for the exchanged types.
//!
//! * `SymForm`: `{"dim": N, "entries": [[...], ...]}`
//! * `LinearMap`: `{"dim": N, "matrix": [[...], ...]}`
//! * `CurvTensor`: `{"dim": N, "components": [... N⁴ reals, row-major]}`
//! * `BlockModelSpace`: `{"blocks": [{"dim": d, "form": [[...]], "scale": c}]}`
//!   (`scale` is optional and defaults to 1)
//! * `WreathElement`: `{"sigma": [1-based images], "components": [matrix, ...]}`
//! * `PolyFunction`: `{"p": 3, "terms": [{"exp": [2,0,0], "coef": 0.5}, ...]}`

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{LinearMap, SymForm};
use crate::tensor::CurvTensor;

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymFormWire {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

impl TryFrom<SymFormWire> for SymForm {
    type Error = Error;
    fn try_from(w: SymFormWire) -> Result<Self> {
        SymForm::new(rows_to_matrix(&w.entries, w.dim)?)
    }
}

impl From<SymForm> for SymFormWire {
    fn from(f: SymForm) -> Self {
        SymFormWire {
            dim: f.dim(),
            entries: matrix_to_rows(f.matrix()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMapWire {
    pub dim: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl TryFrom<LinearMapWire> for LinearMap {
    type Error = Error;
    fn try_from(w: LinearMapWire) -> Result<Self> {
        LinearMap::new(rows_to_matrix(&w.matrix, w.dim)?)
    }
}

impl From<LinearMap> for LinearMapWire {
    fn from(a: LinearMap) -> Self {
        LinearMapWire {
            dim: a.dim(),
            matrix: matrix_to_rows(a.matrix()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvTensorWire {
    pub dim: usize,
    pub components: Vec<f64>,
}

impl TryFrom<CurvTensorWire> for CurvTensor {
    type Error = Error;
    fn try_from(w: CurvTensorWire) -> Result<Self> {
        CurvTensor::new(w.dim, w.components)
    }
}

impl From<CurvTensor> for CurvTensorWire {
    fn from(t: CurvTensor) -> Self {
        CurvTensorWire {
            dim: t.dim(),
            components: t.components().to_vec(),
        }
    }
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockWire {
    pub dim: usize,
    pub form: Vec<Vec<f64>>,
    #[serde(default = "unit", skip_serializing_if = "is_unit")]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelWire {
    pub blocks: Vec<BlockWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WreathWire {
    pub sigma: Vec<usize>,
    pub components: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermWire {
    pub exp: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyWire {
    pub p: usize,
    pub terms: Vec<TermWire>,
}
