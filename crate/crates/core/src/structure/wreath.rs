//! Wreath-product elements `(g_1, …, g_k; σ)` and the map `Φ` onto block
//! matrices.
//!
//! `Φ(g; σ)` sends block `σ⁻¹(i)` into block `i` via `g_i`, so the product
//! law `(h; τ)(g; σ) = (h_k g_{τ⁻¹(k)}; τσ)` matches matrix multiplication.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::permutation::{adapted_basis_inverse, allowed_block_permutations, extract_permutation, BlockPermutation};
use super::sampling::{basis_inverse, sample_block_member};
use crate::error::{Error, Result};
use crate::form::{LinearMap, PseudoONBasis};
use crate::io::{matrix_to_rows, rows_to_matrix, WreathWire};
use crate::model::BlockModelSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WreathWire", into = "WreathWire")]
pub struct WreathElement {
    components: Vec<LinearMap>,
    sigma: BlockPermutation,
}

impl WreathElement {
    /// Requires one invertible component per block and `dim g_{σ⁻¹(i)} =
    /// dim g_i`.
    pub fn new(components: Vec<LinearMap>, sigma: BlockPermutation) -> Result<Self> {
        if components.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: sigma.len(),
                found: components.len(),
            });
        }
        for g in &components {
            g.ensure_invertible()?;
        }
        let inv = sigma.inverse();
        if (0..sigma.len()).any(|i| components[inv.apply(i)].dim() != components[i].dim()) {
            return Err(Error::IncompatibleBlocks);
        }
        Ok(Self { components, sigma })
    }

    pub fn identity(model: &BlockModelSpace) -> Self {
        Self {
            components: model.block_dims().into_iter().map(LinearMap::identity).collect(),
            sigma: BlockPermutation::identity(model.num_blocks()),
        }
    }

    pub fn components(&self) -> &[LinearMap] {
        &self.components
    }

    pub fn sigma(&self) -> &BlockPermutation {
        &self.sigma
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.components.iter().map(LinearMap::dim).collect()
    }

    /// Inverse of `Φ`: reads `σ` with [`extract_permutation`] and `g_i` from
    /// the `(i, σ⁻¹(i))` block of `A`.
    pub fn from_matrix(a: &LinearMap, model: &BlockModelSpace, tol: f64) -> Result<Self> {
        let sigma = extract_permutation(a, model, tol)?;
        let inv = sigma.inverse();
        let components = (0..model.num_blocks())
            .map(|i| {
                let rows = model.block_range(i);
                let cols = model.block_range(inv.apply(i));
                LinearMap::new(
                    a.matrix()
                        .view((rows.start, cols.start), (rows.len(), cols.len()))
                        .into_owned(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, sigma)
    }
}

impl TryFrom<WreathWire> for WreathElement {
    type Error = Error;
    fn try_from(w: WreathWire) -> Result<Self> {
        let sigma = BlockPermutation::from_one_based(&w.sigma)?;
        let components = w
            .components
            .iter()
            .map(|rows| LinearMap::new(rows_to_matrix(rows, rows.len())?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, sigma)
    }
}

impl From<WreathElement> for WreathWire {
    fn from(w: WreathElement) -> Self {
        WreathWire {
            sigma: w.sigma.to_one_based(),
            components: w.components.iter().map(|g| matrix_to_rows(g.matrix())).collect(),
        }
    }
}

/// `(h; τ)(g; σ) = (h_k g_{τ⁻¹(k)}; τσ)`.
pub fn wreath_compose(a: &WreathElement, b: &WreathElement) -> Result<WreathElement> {
    if a.block_dims() != b.block_dims() {
        return Err(Error::ModelMismatch);
    }
    let tau_inv = a.sigma.inverse();
    let components = (0..a.components.len())
        .map(|k| a.components[k].compose(&b.components[tau_inv.apply(k)]))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::IncompatibleBlocks)?;
    let sigma = a.sigma.compose(&b.sigma)?;
    WreathElement::new(components, sigma)
}

/// The block matrix `Φ(w)` with `g_i` in block position `(i, σ⁻¹(i))`.
pub fn wreath_to_matrix(w: &WreathElement, model: &BlockModelSpace) -> Result<LinearMap> {
    if w.block_dims() != model.block_dims() {
        return Err(Error::IncompatibleBlocks);
    }
    let n = model.total_dim();
    let inv = w.sigma.inverse();
    let mut m = DMatrix::zeros(n, n);
    for (i, g) in w.components.iter().enumerate() {
        let r = model.offset(i);
        let c = model.offset(inv.apply(i));
        m.view_mut((r, c), (g.dim(), g.dim())).copy_from(g.matrix());
    }
    LinearMap::new(m)
}

/// `T_{j→i}` in pseudo-orthonormal coordinates with `Tᵀ η_i T = ±η_j`: the
/// identity when the signatures agree, otherwise the causal-type swap.
fn transfer(from: &PseudoONBasis, to: &PseudoONBasis) -> DMatrix<f64> {
    let d = from.dim();
    let sf = from.signature();
    if sf == to.signature() {
        return DMatrix::identity(d, d);
    }
    let (p, q) = (sf.plus, sf.minus);
    let mut t = DMatrix::zeros(d, d);
    for a in 0..p {
        t[(q + a, a)] = 1.0;
    }
    for b in 0..q {
        t[(b, p + b)] = 1.0;
    }
    t
}

/// Map `V_j → V_i` built as `E_i T_{j→i} E_j⁻¹ M` where `M ∈ G_{R_{φ_j}}`.
fn block_map(
    model: &BlockModelSpace,
    bases: &[PseudoONBasis],
    j: usize,
    i: usize,
    member: &DMatrix<f64>,
) -> DMatrix<f64> {
    let ej_inv = basis_inverse(&bases[j], &model.block(j).canonical_form());
    &bases[i].vectors * transfer(&bases[j], &bases[i]) * ej_inv * member
}

/// Uniformly sampled admissible `σ` with random block members composed with
/// the transfer maps between blocks of a class.
pub fn sample_wreath_element<R: Rng + ?Sized>(model: &BlockModelSpace, rng: &mut R) -> Result<WreathElement> {
    let classes = allowed_block_permutations(model)?;
    let sigma = classes.sample(rng);
    let inv = sigma.inverse();
    let bases = model.block_bases()?;
    let components = (0..model.num_blocks())
        .map(|i| {
            let j = inv.apply(i);
            let member = sample_block_member(model.block(j).form(), rng)?;
            LinearMap::new(block_map(model, &bases, j, i, &member))
        })
        .collect::<Result<Vec<_>>>()?;
    WreathElement::new(components, sigma)
}

/// `Φ` of a sampled wreath element; always a member of the structure group
/// of the model tensor.
pub fn sample_structure_group_element<R: Rng + ?Sized>(model: &BlockModelSpace, rng: &mut R) -> Result<LinearMap> {
    wreath_to_matrix(&sample_wreath_element(model, rng)?, model)
}

/// The wreath element exchanging blocks `i` and `j` (0-based) by transfer
/// maps and fixing the other blocks.
pub fn block_swap(model: &BlockModelSpace, i: usize, j: usize) -> Result<WreathElement> {
    let classes = allowed_block_permutations(model)?;
    let k = model.num_blocks();
    if i >= k || j >= k {
        return Err(Error::InvalidPermutation(format!(
            "block index out of range for k = {k}"
        )));
    }
    if classes.class_of(i) != classes.class_of(j) {
        return Err(Error::IncompatibleBlocks);
    }
    let bases = model.block_bases()?;
    let sigma = BlockPermutation::transposition(k, i, j);
    let components = (0..k)
        .map(|p| {
            let d = model.block_dim(p);
            let src = sigma.apply(p);
            if src == p {
                Ok(LinearMap::identity(d))
            } else {
                LinearMap::new(block_map(model, &bases, src, p, &DMatrix::identity(d, d)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    WreathElement::new(components, sigma)
}

/// Largest entry of `A` in the adapted basis that couples two different
/// classes; zero for members by the dimension and signature obstructions.
pub fn cross_class_leakage(a: &LinearMap, model: &BlockModelSpace) -> Result<f64> {
    let classes = allowed_block_permutations(model)?;
    let ap = adapted_basis_inverse(model)? * a.matrix() * model.adapted_basis()?;
    let n = model.total_dim();
    let mut leak = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            if classes.class_of(model.block_of(r)) != classes.class_of(model.block_of(c)) {
                leak = leak.max(ap[(r, c)].abs());
            }
        }
    }
    Ok(leak)
}
