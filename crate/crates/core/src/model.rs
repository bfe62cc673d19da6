//! Decomposable model spaces `V = V_1 ⊕ … ⊕ V_k` carrying `⊕ c_i R_{φ_i}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{pseudo_orthonormalize, PseudoONBasis, Signature, SymForm, RANK_TOL};
use crate::io::{matrix_to_rows, rows_to_matrix, BlockWire, ModelWire};
use crate::tensor::{build_canonical, direct_sum, CurvTensor};

/// One summand: a form `φ` on `V_i` and a positive curvature scale `c`.
/// The block tensor is `c·R_φ = R_{√c φ}`, so every block is canonical; the
/// form itself doubles as the block metric (sectional curvature of a 2-dim
/// block is `c`).
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    form: SymForm,
    scale: f64,
}

impl Block {
    pub fn new(form: SymForm, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidModel(format!(
                "block scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { form, scale })
    }

    pub fn canonical(form: SymForm) -> Self {
        Self { form, scale: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn form(&self) -> &SymForm {
        &self.form
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ψ = √c·φ`, the form with `R_ψ` equal to the block tensor.
    pub fn canonical_form(&self) -> SymForm {
        if self.scale == 1.0 {
            self.form.clone()
        } else {
            self.form.scaled(self.scale.sqrt())
        }
    }

    pub fn tensor(&self) -> CurvTensor {
        build_canonical(&self.form).scaled(self.scale)
    }

    pub fn signature(&self) -> Signature {
        self.form.signature(RANK_TOL)
    }
}

/// Ordered block decomposition with offset bookkeeping. Offsets are 0-based:
/// block `p` occupies coordinates `offset(p) .. offset(p) + dim(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct BlockModelSpace {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    block_of: Vec<usize>,
}

impl BlockModelSpace {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidModel("model has no blocks".into()));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut block_of = Vec::new();
        let mut off = 0;
        for (p, b) in blocks.iter().enumerate() {
            offsets.push(off);
            block_of.extend(std::iter::repeat_n(p, b.dim()));
            off += b.dim();
        }
        Ok(Self {
            blocks,
            offsets,
            block_of,
        })
    }

    /// Model `⊕ (V_i, R_{φ_i})` with unit scales.
    pub fn from_forms(forms: Vec<SymForm>) -> Result<Self> {
        Self::new(forms.into_iter().map(Block::canonical).collect())
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, p: usize) -> &Block {
        &self.blocks[p]
    }

    pub fn block_dim(&self, p: usize) -> usize {
        self.blocks[p].dim()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::dim).collect()
    }

    pub fn offset(&self, p: usize) -> usize {
        self.offsets[p]
    }

    /// Index of the block containing basis vector `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn block_range(&self, p: usize) -> std::ops::Range<usize> {
        self.offsets[p]..self.offsets[p] + self.blocks[p].dim()
    }

    /// `⊕ c_i R_{φ_i}`.
    pub fn tensor(&self) -> CurvTensor {
        let parts: Vec<CurvTensor> = self.blocks.iter().map(Block::tensor).collect();
        direct_sum(&parts).expect("model has at least one block")
    }

    /// Block-diagonal metric `⊕ φ_i`.
    pub fn metric(&self) -> SymForm {
        let n = self.total_dim();
        let mut m = DMatrix::zeros(n, n);
        for (p, b) in self.blocks.iter().enumerate() {
            let o = self.offsets[p];
            m.view_mut((o, o), (b.dim(), b.dim())).copy_from(b.form().matrix());
        }
        SymForm::new(m).expect("block-diagonal assembly of symmetric blocks is symmetric")
    }

    /// Fails with `DegenerateForm` if any block form is degenerate.
    pub fn ensure_nondegenerate(&self) -> Result<()> {
        for b in &self.blocks {
            let s = b.signature();
            if s.zero > 0 {
                return Err(Error::DegenerateForm { nullity: s.zero });
            }
        }
        Ok(())
    }

    /// Pseudo-orthonormal bases of the canonical block forms `√c_i φ_i`.
    pub fn block_bases(&self) -> Result<Vec<PseudoONBasis>> {
        self.blocks
            .iter()
            .map(|b| pseudo_orthonormalize(&b.canonical_form()))
            .collect()
    }

    /// Block-diagonal change of basis whose columns are the concatenated
    /// pseudo-orthonormal block bases.
    pub fn adapted_basis(&self) -> Result<DMatrix<f64>> {
        let n = self.total_dim();
        let mut e = DMatrix::zeros(n, n);
        for (p, basis) in self.block_bases()?.iter().enumerate() {
            let o = self.offsets[p];
            let d = basis.dim();
            e.view_mut((o, o), (d, d)).copy_from(&basis.vectors);
        }
        Ok(e)
    }
}

impl TryFrom<ModelWire> for BlockModelSpace {
    type Error = Error;
    fn try_from(w: ModelWire) -> Result<Self> {
        let blocks = w
            .blocks
            .into_iter()
            .map(|b| {
                let form = SymForm::new(rows_to_matrix(&b.form, b.dim)?)?;
                Block::new(form, b.scale)
            })
            .collect::<Result<Vec<_>>>()?;
        BlockModelSpace::new(blocks)
    }
}

impl From<BlockModelSpace> for ModelWire {
    fn from(m: BlockModelSpace) -> Self {
        ModelWire {
            blocks: m
                .blocks
                .iter()
                .map(|b| BlockWire {
                    dim: b.dim(),
                    form: matrix_to_rows(b.form().matrix()),
                    scale: b.scale(),
                })
                .collect(),
        }
    }
}
