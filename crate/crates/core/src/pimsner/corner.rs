use super::{PimsnerSpace, PimsnerWord};
use crate::error::{Error, Result};
use crate::freeprod::ExactnessScenario;
use crate::hilbert::{pointed_inclusion, FreeProductSpace, PointedSpace};
use crate::linalg::{self, CMat, SpMat, ONE};
use std::sync::Arc;

/// P = I − S²(S*)², U = P(S + S*)P, ψᵢ(A) = PAP + UAU, and the compression
/// σ onto the copy 𝒦_{1,1} of the free-product space inside 𝒦.
#[derive(Debug, Clone)]
pub struct CornerEmbedding {
    pub space: Arc<PimsnerSpace>,
    pub free: Arc<FreeProductSpace>,
    pub s: SpMat,
    pub p: SpMat,
    pub u: SpMat,
    /// 0/1 isometry from the free-product space into 𝒦.
    pub v: SpMat,
    v_adj: SpMat,
}

impl CornerEmbedding {
    /// `k_depth` must exceed `fp_depth` by at least 2, room for the two
    /// padding ξ₁ factors of the identification.
    pub fn new(factors: Vec<PointedSpace>, fp_depth: usize, k_depth: usize) -> Result<Self> {
        if k_depth < fp_depth + 2 {
            return Err(Error::DepthMismatch(format!(
                "Pimsner depth {k_depth} is too small for free-product depth {fp_depth}"
            )));
        }
        let space = Arc::new(PimsnerSpace::new(factors.clone(), k_depth)?);
        let free = Arc::new(FreeProductSpace::new(factors, fp_depth)?);
        let s = space.s();
        let sa = linalg::sp_adjoint(&s);
        let s2 = linalg::sp_mul(&s, &s);
        let s2a = linalg::sp_mul(&sa, &sa);
        let p = linalg::sp_sub(&linalg::sp_identity(space.dim()), &linalg::sp_mul(&s2, &s2a));
        let u = linalg::sp_mul(&p, &linalg::sp_mul(&linalg::sp_add(&s, &sa), &p));
        let mut cols = Vec::with_capacity(free.dim());
        for pos in 0..free.dim() {
            let w = free.word(pos);
            let mut idx: Vec<usize> = Vec::with_capacity(w.len() + 2);
            if w.tags.first() != Some(&0) {
                idx.push(0);
            }
            idx.extend(w.idx.iter().map(|i| i + 1));
            if w.tags.last() == Some(&1) {
                idx.push(0);
            }
            let q = space
                .position(&PimsnerWord { lead: 0, idx })
                .ok_or_else(|| Error::DepthMismatch("free-product word has no image in 𝒦".into()))?;
            cols.push(vec![(q, ONE)]);
        }
        let v = linalg::sp_from_columns(space.dim(), cols);
        let v_adj = linalg::sp_adjoint(&v);
        Ok(CornerEmbedding { space, free, s, p, u, v, v_adj })
    }

    /// ψᵢ(A) = PAP + UAU with A acting on the 𝒦ᵢ summand.
    pub fn psi(&self, a: &CMat, tag: usize) -> Result<SpMat> {
        let la = self.space.act(a, tag)?;
        let pap = linalg::sp_mul(&self.p, &linalg::sp_mul(&la, &self.p));
        let uau = linalg::sp_mul(&self.u, &linalg::sp_mul(&la, &self.u));
        Ok(linalg::sp_add(&pap, &uau))
    }

    /// Ψ(A₁⋯Aₙ) = ψ_{i₁}(A₁)⋯ψ_{iₙ}(Aₙ) on a centered alternating word;
    /// the empty word maps to P.
    pub fn psi_on_word(&self, word: &[(usize, CMat)]) -> Result<SpMat> {
        for pair in word.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::MalformedWord("consecutive letters share a factor".into()));
            }
        }
        let mut acc = self.p.clone();
        for (tag, a) in word {
            let f = self.space.factors().get(*tag).ok_or(Error::UnknownTag(*tag))?;
            let st = f.state(a).norm();
            if st > 1e-10 {
                return Err(Error::NotCentered(st));
            }
            acc = linalg::sp_mul(&acc, &self.psi(a, *tag)?);
        }
        Ok(acc)
    }

    /// σ(T) = V* T V
    pub fn sigma(&self, t: &SpMat) -> SpMat {
        linalg::sp_mul(&self.v_adj, &linalg::sp_mul(t, &self.v))
    }
}

/// 𝒦 and 𝒦₀ for an exactness scenario, with the compression π′.
#[derive(Debug, Clone)]
pub struct QuotientPimsner {
    pub full: CornerEmbedding,
    pub sub: CornerEmbedding,
    /// 0/1 isometry 𝒦₀ → 𝒦.
    pub w: SpMat,
    w_adj: SpMat,
}

impl QuotientPimsner {
    pub fn new(scn: &ExactnessScenario, fp_depth: usize, k_depth: usize) -> Result<Self> {
        let full = CornerEmbedding::new(scn.full_factors(), fp_depth, k_depth)?;
        let sub = CornerEmbedding::new(scn.sub_factors(), fp_depth, k_depth)?;
        let maps = [
            pointed_inclusion(&scn.h10, &scn.h1, &(0..scn.a).collect::<Vec<_>>())?,
            (0..scn.c).collect::<Vec<_>>(),
        ];
        let mut cols = Vec::with_capacity(sub.space.dim());
        for pos in 0..sub.space.dim() {
            let w = sub.space.word(pos);
            let idx = w.idx.iter().enumerate().map(|(k, &i)| maps[w.tag_at(k)][i]).collect();
            let q = full
                .space
                .position(&PimsnerWord { lead: w.lead, idx })
                .ok_or_else(|| Error::ScenarioMismatch("𝒦₀ word has no image in 𝒦".into()))?;
            cols.push(vec![(q, ONE)]);
        }
        let w = linalg::sp_from_columns(full.space.dim(), cols);
        let w_adj = linalg::sp_adjoint(&w);
        Ok(QuotientPimsner { full, sub, w, w_adj })
    }

    /// π′(T) = P_{𝒦₀} T|_{𝒦₀}
    pub fn pi_prime(&self, t: &SpMat) -> Result<SpMat> {
        if t.rows() != self.full.space.dim() || t.cols() != self.full.space.dim() {
            return Err(Error::ScenarioMismatch("operator does not act on 𝒦".into()));
        }
        Ok(linalg::sp_mul(&self.w_adj, &linalg::sp_mul(t, &self.w)))
    }

    /// ‖π′(Ψ(w)) − Ψ₀(π(w))‖_F over all columns.
    pub fn commuting_square_residual(&self, scn: &ExactnessScenario, word: &[(usize, CMat)]) -> Result<f64> {
        let lhs = self.pi_prime(&self.full.psi_on_word(word)?)?;
        let quotient: Vec<(usize, CMat)> = word
            .iter()
            .map(|(t, a)| Ok((*t, if *t == 0 { scn.q(a)? } else { a.clone() })))
            .collect::<Result<_>>()?;
        let rhs = self.sub.psi_on_word(&quotient)?;
        Ok(linalg::sp_frobenius(&linalg::sp_sub(&lhs, &rhs)))
    }
}

/// Residual helper: ‖σ(T) − E‖_F on free-product columns of length ≤ D − margin.
pub fn sigma_residual(corner: &CornerEmbedding, t: &SpMat, expected: &SpMat, margin: usize) -> f64 {
    let mask = corner.free.interior_mask(margin);
    linalg::sp_residual_on_columns(&corner.sigma(t), expected, &mask)
}
