//! Block permutations `σ`, admissibility classes, and extraction of `σ` from
//! a member of the structure group of `⊕ R_{φ_i}`.

use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::membership::is_member;
use crate::error::{Error, Result};
use crate::form::{check_dims, LinearMap};
use crate::linalg::max_abs_matrix;
use crate::model::BlockModelSpace;

/// A bijection of the block indices. Stored 0-based; serialized and printed
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockPermutation {
    image: Vec<usize>,
}

impl BlockPermutation {
    /// From 0-based images `σ(0), …, σ(k−1)`.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &s in &image {
            if s >= k {
                return Err(Error::InvalidPermutation(format!(
                    "image {} out of range for k = {k}",
                    s + 1
                )));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidPermutation(format!("image {} repeated", s + 1)));
            }
        }
        Ok(Self { image })
    }

    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        let zero = image
            .iter()
            .map(|&s| {
                s.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("block indices start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero)
    }

    pub fn identity(k: usize) -> Self {
        Self {
            image: (0..k).collect(),
        }
    }

    /// The transposition of blocks `i` and `j` (0-based).
    pub fn transposition(k: usize, i: usize, j: usize) -> Self {
        let mut p = Self::identity(k);
        p.image.swap(i, j);
        p
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.image.iter().map(|s| s + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &s) in self.image.iter().enumerate() {
            inv[s] = i;
        }
        Self { image: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Ok(Self {
            image: other.image.iter().map(|&o| self.image[o]).collect(),
        })
    }

    /// Disjoint cycles, 0-based, fixed points omitted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.image[i];
            }
            out.push(cycle);
        }
        out
    }
}

/// 1-based cycle notation; the identity prints as `()`.
impl fmt::Display for BlockPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for BlockPermutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::from_one_based(&v)
    }
}

impl From<BlockPermutation> for Vec<usize> {
    fn from(p: BlockPermutation) -> Self {
        p.to_one_based()
    }
}

/// Partition of the blocks into classes that may be exchanged: equal
/// dimension and equal unordered signature pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockClasses {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl BlockClasses {
    pub fn num_blocks(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, block: usize) -> usize {
        self.class_of[block]
    }

    /// Classes as lists of 0-based block indices, ordered by first member.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn is_admissible(&self, sigma: &BlockPermutation) -> bool {
        sigma.len() == self.num_blocks() && (0..sigma.len()).all(|i| self.class_of[sigma.apply(i)] == self.class_of[i])
    }

    /// Order of the admissible group `∏ |class|!`.
    pub fn order(&self) -> u128 {
        self.classes
            .iter()
            .map(|c| (1..=c.len() as u128).product::<u128>())
            .product()
    }

    /// Product-of-symmetric-groups description such as `S2 × S1`.
    pub fn description(&self) -> String {
        let parts: Vec<String> = self.classes.iter().map(|c| format!("S{}", c.len())).collect();
        parts.join(" × ")
    }

    /// Adjacent transpositions within each class; together they generate the
    /// admissible group.
    pub fn generators(&self) -> Vec<BlockPermutation> {
        let k = self.num_blocks();
        self.classes
            .iter()
            .flat_map(|c| {
                c.windows(2)
                    .map(move |w| BlockPermutation::transposition(k, w[0], w[1]))
            })
            .collect()
    }

    /// Uniform sample from the admissible group.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BlockPermutation {
        let mut image: Vec<usize> = (0..self.num_blocks()).collect();
        for c in &self.classes {
            let mut targets = c.clone();
            targets.shuffle(rng);
            for (&src, &dst) in c.iter().zip(&targets) {
                image[src] = dst;
            }
        }
        BlockPermutation { image }
    }
}

/// Admissible block permutations of a model: blocks are interchangeable iff
/// they share dimension and unordered signature, since `R_{−φ} = R_φ`.
pub fn allowed_block_permutations(model: &BlockModelSpace) -> Result<BlockClasses> {
    model.ensure_nondegenerate()?;
    let mut keys: Vec<(usize, (usize, usize))> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = Vec::with_capacity(model.num_blocks());
    for (p, b) in model.blocks().iter().enumerate() {
        let key = (b.dim(), b.signature().unordered());
        let c = match keys.iter().position(|k| *k == key) {
            Some(c) => c,
            None => {
                keys.push(key);
                classes.push(Vec::new());
                keys.len() - 1
            }
        };
        classes[c].push(p);
        class_of.push(c);
    }
    Ok(BlockClasses { class_of, classes })
}

/// Block-diagonal inverse of the adapted basis, `E_p⁻¹ = η_p E_pᵀ ψ_p`.
pub(crate) fn adapted_basis_inverse(model: &BlockModelSpace) -> Result<DMatrix<f64>> {
    let n = model.total_dim();
    let mut inv = DMatrix::zeros(n, n);
    for (p, basis) in model.block_bases()?.iter().enumerate() {
        let psi = model.block(p).canonical_form();
        let r = model.block_range(p);
        let block = super::sampling::basis_inverse(basis, &psi);
        inv.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&block);
    }
    Ok(inv)
}

/// Recovers `σ` with `A: V_i → V_{σ(i)}` from a structure-group member.
///
/// Works in the adapted basis `A' = E⁻¹ A E`. For column `i` the first row
/// `w` with `|a'_{wi}| > tol·max|column i|` fixes `σ(n_i) = n_w`; the result
/// is then checked for agreement within each block, bijectivity, and the
/// support condition that column `i` vanishes outside block `σ(n_i)`.
pub fn extract_permutation(a: &LinearMap, model: &BlockModelSpace, tol: f64) -> Result<BlockPermutation> {
    let n = model.total_dim();
    check_dims(n, a.dim())?;
    model.ensure_nondegenerate()?;
    if let Some(p) = (0..model.num_blocks()).find(|&p| model.block_dim(p) < 2) {
        return Err(Error::InvalidModel(format!(
            "block {} has dimension 1, so the model tensor has a kernel",
            p + 1
        )));
    }
    let m = is_member(a, &model.tensor(), tol)?;
    if !m.member {
        return Err(Error::NotAMember { residual: m.residual });
    }

    let ap = adapted_basis_inverse(model)? * a.matrix() * model.adapted_basis()?;
    let global = max_abs_matrix(&ap);
    let k = model.num_blocks();
    let mut image: Vec<Option<usize>> = vec![None; k];
    for i in 0..n {
        let col = ap.column(i);
        let cmax = col.amax();
        let w = (0..n)
            .find(|&r| col[r].abs() > tol * cmax)
            .ok_or_else(|| Error::InconsistentPermutation(format!("column {} vanishes", i + 1)))?;
        let src = model.block_of(i);
        let dst = model.block_of(w);
        match image[src] {
            None => image[src] = Some(dst),
            Some(d) if d != dst => {
                return Err(Error::InconsistentPermutation(format!(
                    "columns of block {} point to blocks {} and {}",
                    src + 1,
                    d + 1,
                    dst + 1
                )))
            }
            _ => {}
        }
        let range = model.block_range(dst);
        for r in (0..n).filter(|r| !range.contains(r)) {
            if col[r].abs() > tol * global {
                return Err(Error::InconsistentPermutation(format!(
                    "column {} leaks into block {} (|a| = {:e})",
                    i + 1,
                    model.block_of(r) + 1,
                    col[r].abs()
                )));
            }
        }
    }
    let image: Vec<usize> = image
        .into_iter()
        .map(|s| s.expect("every block has a column"))
        .collect();
    BlockPermutation::new(image).map_err(|e| Error::InconsistentPermutation(e.to_string()))
}
