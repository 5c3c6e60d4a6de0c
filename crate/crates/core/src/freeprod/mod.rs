//! Left actions of the factor algebras on the truncated free-product space,
//! the free-product vector state, the compression π onto a sub free product,
//! and closed-form actions of ideal words.

mod oracle;
mod scenario;

pub use oracle::{ideal_word_action_oracle, IdealWord, LeftForm, RightForm};
pub use scenario::{compression_pi, invariance_residual, ExactnessScenario, ScenarioSpaces};

use crate::error::{Error, Result};
use crate::hilbert::FreeProductSpace;
use crate::linalg::{self, CMat, CVec, SpMat, C64, ZERO};
use crate::ncpoly::{self, NCPoly, Symbol};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum OperatorSource {
    Lifted { tag: usize, matrix: CMat },
    Composite,
}

/// An operator on a free-product space. `depth_guard` bounds how many
/// levels a vector may climb under one application; identities involving
/// the operator hold on words of length ≤ D − depth_guard.
#[derive(Debug, Clone)]
pub struct FreeOperator {
    pub space: Arc<FreeProductSpace>,
    pub matrix: SpMat,
    pub source: OperatorSource,
    pub depth_guard: usize,
}

impl FreeOperator {
    pub fn identity(space: &Arc<FreeProductSpace>) -> Self {
        FreeOperator {
            space: space.clone(),
            matrix: linalg::sp_identity(space.dim()),
            source: OperatorSource::Composite,
            depth_guard: 0,
        }
    }

    fn composite(&self, matrix: SpMat, depth_guard: usize) -> Self {
        FreeOperator { space: self.space.clone(), matrix, source: OperatorSource::Composite, depth_guard }
    }

    pub fn mul(&self, rhs: &FreeOperator) -> FreeOperator {
        self.composite(linalg::sp_mul(&self.matrix, &rhs.matrix), self.depth_guard + rhs.depth_guard)
    }

    pub fn add(&self, rhs: &FreeOperator) -> FreeOperator {
        self.composite(linalg::sp_add(&self.matrix, &rhs.matrix), self.depth_guard.max(rhs.depth_guard))
    }

    pub fn sub(&self, rhs: &FreeOperator) -> FreeOperator {
        self.composite(linalg::sp_sub(&self.matrix, &rhs.matrix), self.depth_guard.max(rhs.depth_guard))
    }

    pub fn scale(&self, c: C64) -> FreeOperator {
        self.composite(linalg::sp_scale(&self.matrix, c), self.depth_guard)
    }

    pub fn adjoint(&self) -> FreeOperator {
        let source = match &self.source {
            OperatorSource::Lifted { tag, matrix } => OperatorSource::Lifted { tag: *tag, matrix: matrix.adjoint() },
            OperatorSource::Composite => OperatorSource::Composite,
        };
        FreeOperator {
            space: self.space.clone(),
            matrix: linalg::sp_adjoint(&self.matrix),
            source,
            depth_guard: self.depth_guard,
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        linalg::sp_matvec(&self.matrix, v)
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        self.space.interior_mask(self.depth_guard)
    }
}

struct BlockLinks {
    rest: Option<usize>,
    prepend: Option<usize>,
}

/// The canonical left action of A ∈ M(ℋ_tag) on the free-product space,
/// assembled column by column. Components that would leave the truncation
/// are dropped.
pub fn lift_left_operator(a: &CMat, tag: usize, space: &Arc<FreeProductSpace>) -> Result<FreeOperator> {
    if tag >= space.num_factors() {
        return Err(Error::UnknownTag(tag));
    }
    let f = &space.factors()[tag];
    let at = f.to_rotated(a)?;
    let d = f.dim();
    let depth = space.depth();
    let links: Vec<BlockLinks> = space
        .blocks()
        .iter()
        .map(|b| {
            let rest = if b.tags.first() == Some(&tag) { space.block_index(&b.tags[1..]) } else { None };
            let prepend = if b.tags.first() != Some(&tag) && b.tags.len() < depth {
                let mut t = vec![tag];
                t.extend_from_slice(&b.tags);
                space.block_index(&t)
            } else {
                None
            };
            BlockLinks { rest, prepend }
        })
        .collect();
    let cols: Vec<Vec<(usize, C64)>> = (0..space.dim())
        .into_par_iter()
        .map(|p| {
            let bi = space.block_id(p);
            let b = &space.blocks()[bi];
            let local = p - b.offset;
            let mut col = Vec::new();
            if b.tags.first() == Some(&tag) {
                let stride = b.size / b.radices[0];
                let j = local / stride;
                let rest_local = local % stride;
                let rest = &space.blocks()[links[bi].rest.unwrap()];
                col.push((rest.offset + rest_local, at[(0, j + 1)]));
                for k in 1..d {
                    col.push((b.offset + (k - 1) * stride + rest_local, at[(k, j + 1)]));
                }
            } else {
                col.push((p, at[(0, 0)]));
                if let Some(nb) = links[bi].prepend {
                    let nb = &space.blocks()[nb];
                    for k in 1..d {
                        col.push((nb.offset + (k - 1) * b.size + local, at[(k, 0)]));
                    }
                }
            }
            col
        })
        .collect();
    Ok(FreeOperator {
        space: space.clone(),
        matrix: linalg::sp_from_columns(space.dim(), cols),
        source: OperatorSource::Lifted { tag, matrix: a.clone() },
        depth_guard: 1,
    })
}

/// ⟨T ξ₀, ξ₀⟩.
pub fn vector_state(t: &FreeOperator) -> C64 {
    t.matrix.get(0, 0).copied().unwrap_or(ZERO)
}

/// Evaluate a polynomial whose symbols are assigned matrices on their
/// factor spaces (tag of the symbol = factor index).
pub fn eval_on_space(
    p: &NCPoly,
    space: &Arc<FreeProductSpace>,
    assignment: &BTreeMap<Symbol, CMat>,
) -> Result<FreeOperator> {
    let mut lifted: BTreeMap<Symbol, SpMat> = BTreeMap::new();
    for s in p.symbols() {
        let m = assignment.get(&s).ok_or_else(|| Error::UnassignedSymbol(s.to_string()))?;
        lifted.insert(s, lift_left_operator(m, s.tag, space)?.matrix);
    }
    let matrix = ncpoly::eval_dim(p, &lifted, space.dim())?;
    Ok(FreeOperator { space: space.clone(), matrix, source: OperatorSource::Composite, depth_guard: p.degree() })
}

/// Product of lifts of (tag, matrix) factors, left to right.
pub fn lift_word(factors: &[(usize, CMat)], space: &Arc<FreeProductSpace>) -> Result<FreeOperator> {
    let mut acc = FreeOperator::identity(space);
    for (tag, m) in factors {
        acc = acc.mul(&lift_left_operator(m, *tag, space)?);
    }
    Ok(acc)
}
