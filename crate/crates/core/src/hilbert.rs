//! Pointed Hilbert spaces and the truncated free-product word basis.

use crate::error::{Error, Result};
use crate::linalg::{basis_vector, CMat, CVec, SpMat, C64, ONE, ZERO};
use serde::Serialize;
use std::collections::HashMap;

pub const DEFAULT_DIM_CAP: usize = 2_000_000;

/// A finite-dimensional Hilbert space with a distinguished unit vector.
#[derive(Debug, Clone)]
pub struct PointedSpace {
    dim: usize,
    xi: CVec,
    /// Unitary R with R ξ = e₀. Operators are handled as R A R*.
    rotation: CMat,
}

impl PointedSpace {
    /// Householder construction: ξ is first rephased so its leading entry is
    /// real and nonnegative, then reflected onto e₀.
    pub fn new(xi: CVec) -> Result<Self> {
        let dim = xi.len();
        if dim < 1 {
            return Err(Error::InvalidDimension("pointed space needs dim >= 1".into()));
        }
        let nrm = xi.norm();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitVector(nrm));
        }
        let phase = if xi[0].norm() > 0.0 { xi[0].conj() / xi[0].norm() } else { ONE };
        let xr = &xi * phase;
        let mut u = xr.clone();
        // u₀ = xr₀ − 1 written without cancellation (unit norm assumed)
        let tail: f64 = xr.iter().skip(1).map(|v| v.norm_sqr()).sum();
        u[0] = C64::new(-tail / (1.0 + xr[0].re), 0.0);
        let uu = u.norm_squared();
        let mut rotation = CMat::identity(dim, dim);
        if uu > 0.0 {
            rotation -= (&u * u.adjoint()).scale(2.0 / uu);
        }
        rotation *= phase;
        Ok(PointedSpace { dim, xi, rotation })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension("pointed space needs dim >= 1".into()));
        }
        PointedSpace::new(basis_vector(dim, 0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xi(&self) -> &CVec {
        &self.xi
    }

    pub fn rotation(&self) -> &CMat {
        &self.rotation
    }

    /// dim ℋ⁰ = dim − 1.
    pub fn centered_dim(&self) -> usize {
        self.dim - 1
    }

    /// R A R*: the operator in the basis (ξ, ℋ⁰ basis).
    pub fn to_rotated(&self, a: &CMat) -> Result<CMat> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, factor has dimension {}",
                a.nrows(),
                a.ncols(),
                self.dim
            )));
        }
        // split off a[0,0]·I and rotate Hermitian and skew parts separately,
        // so that scalars map exactly and (A*)~ = (A~)* holds bit for bit
        let s = a[(0, 0)];
        let shifted = a - CMat::identity(self.dim, self.dim) * s;
        let adj = shifted.adjoint();
        let h = (&shifted + &adj) * C64::new(0.5, 0.0);
        let k = (&shifted - &adj) * C64::new(0.0, -0.5);
        let sym = |m: &CMat| {
            let r = &self.rotation * m * self.rotation.adjoint();
            (&r + r.adjoint()) * C64::new(0.5, 0.0)
        };
        let mut out = sym(&h) + sym(&k) * C64::i();
        for j in 0..self.dim {
            out[(j, j)] += s;
        }
        Ok(out)
    }

    pub fn vector_to_rotated(&self, v: &CVec) -> CVec {
        &self.rotation * v
    }

    pub fn vector_from_rotated(&self, v: &CVec) -> CVec {
        self.rotation.adjoint() * v
    }

    pub fn state(&self, a: &CMat) -> C64 {
        self.xi.dotc(&(a * &self.xi))
    }
}

/// Rotated-coordinate index map for a pointed subspace `sub` ⊆ `full`,
/// where standard coordinate k of `sub` is coordinate `coords[k]` of `full`.
/// Succeeds only when the map is an exact 0/1 correspondence of rotated
/// basis vectors sending ξ to ξ.
pub fn pointed_inclusion(sub: &PointedSpace, full: &PointedSpace, coords: &[usize]) -> Result<Vec<usize>> {
    if coords.len() != sub.dim() || coords.iter().any(|&c| c >= full.dim()) {
        return Err(Error::IncompatibleFactors("coordinate map does not fit the spaces".into()));
    }
    let mut j = CMat::zeros(full.dim(), sub.dim());
    for (k, &c) in coords.iter().enumerate() {
        j[(c, k)] = ONE;
    }
    let m = full.rotation() * j * sub.rotation().adjoint();
    let mut map = Vec::with_capacity(sub.dim());
    for k in 0..sub.dim() {
        let col = m.column(k);
        let (best, val) = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, v)| (i, *v))
            .unwrap();
        let off: f64 = col.iter().enumerate().filter(|(i, _)| *i != best).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        if (val - ONE).norm() > 1e-12 || off > 1e-12 {
            return Err(Error::IncompatibleFactors(format!(
                "rotated basis vector {k} of the subspace is not a rotated basis vector of the full space"
            )));
        }
        map.push(best);
    }
    if map[0] != 0 {
        return Err(Error::IncompatibleFactors("distinguished vectors differ".into()));
    }
    Ok(map)
}

/// One summand ℋ⁰_{i₁} ⊗ … ⊗ ℋ⁰_{iₙ}; indices are mixed-radix with the
/// first factor most significant.
#[derive(Debug, Clone)]
pub struct WordBlock {
    pub tags: Vec<usize>,
    pub radices: Vec<usize>,
    pub offset: usize,
    pub size: usize,
}

/// A basis word: tag sequence and per-factor indices into ℋ⁰ (index k is
/// rotated basis vector k+1 of that factor).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BasisWord {
    pub tags: Vec<usize>,
    pub idx: Vec<usize>,
}

impl BasisWord {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Enumerate the alternating tag sequences of length `len` over `n` tags.
pub fn alternating_sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for s in &out {
            for t in 0..n {
                if s.last() != Some(&t) {
                    let mut v = s.clone();
                    v.push(t);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// The truncated free product ℂξ₀ ⊕ ⊕ ℋ⁰_{i₁}⊗…⊗ℋ⁰_{iₙ}, n ≤ D.
#[derive(Debug, Clone)]
pub struct FreeProductSpace {
    factors: Vec<PointedSpace>,
    depth: usize,
    blocks: Vec<WordBlock>,
    block_of: HashMap<Vec<usize>, usize>,
    dim: usize,
    pos_block: Vec<u32>,
}

impl FreeProductSpace {
    pub fn new(factors: Vec<PointedSpace>, depth: usize) -> Result<Self> {
        Self::with_cap(factors, depth, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(factors: Vec<PointedSpace>, depth: usize, cap: usize) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidDimension("a free product needs at least two factors".into()));
        }
        let n = factors.len();
        let mut blocks = vec![WordBlock { tags: vec![], radices: vec![], offset: 0, size: 1 }];
        let mut dim: usize = 1;
        for len in 1..=depth {
            for tags in alternating_sequences(n, len) {
                let radices: Vec<usize> = tags.iter().map(|&t| factors[t].centered_dim()).collect();
                let size = radices.iter().try_fold(1usize, |a, &r| a.checked_mul(r)).unwrap_or(usize::MAX);
                if size == 0 {
                    continue;
                }
                blocks.push(WordBlock { tags, radices, offset: dim, size });
                dim = dim.saturating_add(size);
                if dim > cap {
                    return Err(Error::DimensionCap { dim, cap });
                }
            }
        }
        let block_of = blocks.iter().enumerate().map(|(b, w)| (w.tags.clone(), b)).collect();
        let mut pos_block = Vec::with_capacity(dim);
        for (b, w) in blocks.iter().enumerate() {
            pos_block.extend(std::iter::repeat_n(b as u32, w.size));
        }
        Ok(FreeProductSpace { factors, depth, blocks, block_of, dim, pos_block })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn factors(&self) -> &[PointedSpace] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn blocks(&self) -> &[WordBlock] {
        &self.blocks
    }

    pub fn block_index(&self, tags: &[usize]) -> Option<usize> {
        self.block_of.get(tags).copied()
    }

    pub fn block_id(&self, pos: usize) -> usize {
        self.pos_block[pos] as usize
    }

    pub fn block_at(&self, pos: usize) -> &WordBlock {
        &self.blocks[self.pos_block[pos] as usize]
    }

    pub fn word_len(&self, pos: usize) -> usize {
        self.block_at(pos).tags.len()
    }

    pub fn leading_tag(&self, pos: usize) -> Option<usize> {
        self.block_at(pos).tags.first().copied()
    }

    pub fn word(&self, pos: usize) -> BasisWord {
        let b = self.block_at(pos);
        let mut local = pos - b.offset;
        let mut idx = vec![0; b.radices.len()];
        for k in (0..b.radices.len()).rev() {
            idx[k] = local % b.radices[k];
            local /= b.radices[k];
        }
        BasisWord { tags: b.tags.clone(), idx }
    }

    pub fn position(&self, w: &BasisWord) -> Option<usize> {
        if w.tags.len() != w.idx.len() {
            return None;
        }
        let b = &self.blocks[self.block_index(&w.tags)?];
        let mut local = 0;
        for (k, &i) in w.idx.iter().enumerate() {
            if i >= b.radices[k] {
                return None;
            }
            local = local * b.radices[k] + i;
        }
        Some(b.offset + local)
    }

    /// Basis positions of words of length ≤ D − margin.
    pub fn interior_mask(&self, margin: usize) -> Vec<bool> {
        let lim = self.depth.saturating_sub(margin);
        let ok = margin <= self.depth;
        (0..self.dim).map(|p| ok && self.word_len(p) <= lim).collect()
    }

    /// Diagonal projection onto words of length ≤ D − margin.
    pub fn interior_projection(&self, margin: usize) -> SpMat {
        let mask = self.interior_mask(margin);
        let vals: Vec<C64> = mask.iter().map(|&b| if b { ONE } else { ZERO }).collect();
        crate::linalg::sp_diag(&vals)
    }

    pub fn xi0(&self) -> CVec {
        basis_vector(self.dim, 0)
    }
}

/// Closed-form dimension 1 + Σ_{n≤D} Σ_alt Π(dᵢ − 1), computed by a
/// transfer recursion over the last tag.
pub fn free_product_dimension(dims: &[usize], depth: usize) -> usize {
    let n = dims.len();
    let mut ending: Vec<usize> = dims.iter().map(|d| d - 1).collect();
    let mut total = 1 + if depth >= 1 { ending.iter().sum::<usize>() } else { 0 };
    for _ in 2..=depth {
        let sum: usize = ending.iter().sum();
        ending = (0..n).map(|t| (sum - ending[t]) * (dims[t] - 1)).collect();
        total += ending.iter().sum::<usize>();
    }
    total
}

/// The 0/1 isometry from a sub free product into a full one. `coords[i]`
/// gives the standard-coordinate embedding of sub factor i into full factor i.
pub fn embed_subspace(sub: &FreeProductSpace, full: &FreeProductSpace, coords: &[Vec<usize>]) -> Result<SpMat> {
    if sub.depth() != full.depth() || sub.num_factors() != full.num_factors() || coords.len() != sub.num_factors() {
        return Err(Error::IncompatibleFactors("depth or factor count differ".into()));
    }
    let maps: Vec<Vec<usize>> = (0..sub.num_factors())
        .map(|i| pointed_inclusion(&sub.factors()[i], &full.factors()[i], &coords[i]))
        .collect::<Result<_>>()?;
    let mut cols = Vec::with_capacity(sub.dim());
    for p in 0..sub.dim() {
        let w = sub.word(p);
        let idx = w.tags.iter().zip(&w.idx).map(|(&t, &i)| maps[t][i + 1] - 1).collect();
        let q = full
            .position(&BasisWord { tags: w.tags.clone(), idx })
            .ok_or_else(|| Error::IncompatibleFactors("word has no image".into()))?;
        cols.push(vec![(q, ONE)]);
    }
    Ok(crate::linalg::sp_from_columns(full.dim(), cols))
}

/// Identity coordinate embeddings (sub factor i sits in the leading
/// coordinates of full factor i).
pub fn leading_coords(sub: &FreeProductSpace) -> Vec<Vec<usize>> {
    sub.factors().iter().map(|f| (0..f.dim()).collect()).collect()
}
