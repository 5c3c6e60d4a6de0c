//! The Toeplitz–Pimsner space 𝒦 = 𝒦₁ ⊕ 𝒦₂ over two pointed factors, the
//! isometry S, the gauge action, the conditional expectation onto the
//! gauge-fixed part and Fejér partial sums.

mod corner;

pub use corner::{sigma_residual, CornerEmbedding, QuotientPimsner};

use crate::error::{Error, Result};
use crate::hilbert::{PointedSpace, DEFAULT_DIM_CAP};
use crate::linalg::{self, CMat, SpMat, C64, ONE, ZERO};
use serde::Serialize;

/// 𝓛_{lead,len} = ℋ_{i₁} ⊗ … ⊗ ℋ_{i_len}, tags alternating from `lead`.
#[derive(Debug, Clone)]
pub struct PimsnerBlock {
    pub lead: usize,
    pub len: usize,
    pub offset: usize,
    pub size: usize,
    pub radices: Vec<usize>,
}

/// A basis word of 𝒦; indices are rotated coordinates of the full factor
/// spaces, so index 0 is ξ of that factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PimsnerWord {
    pub lead: usize,
    pub idx: Vec<usize>,
}

impl PimsnerWord {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn tag_at(&self, k: usize) -> usize {
        tag_at(self.lead, k)
    }
}

fn tag_at(lead: usize, k: usize) -> usize {
    if k.is_multiple_of(2) {
        lead
    } else {
        1 - lead
    }
}

/// Words of length 1..=D ordered by lead tag, then length, then indices.
#[derive(Debug, Clone)]
pub struct PimsnerSpace {
    factors: Vec<PointedSpace>,
    depth: usize,
    blocks: Vec<PimsnerBlock>,
    dim: usize,
}

impl PimsnerSpace {
    pub fn new(factors: Vec<PointedSpace>, depth: usize) -> Result<Self> {
        if factors.len() != 2 {
            return Err(Error::InvalidDimension("the Pimsner space is built from exactly two factors".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidDimension("Pimsner depth must be at least 1".into()));
        }
        let mut blocks = Vec::with_capacity(2 * depth);
        let mut dim = 0usize;
        for lead in 0..2 {
            for len in 1..=depth {
                let radices: Vec<usize> = (0..len).map(|k| factors[tag_at(lead, k)].dim()).collect();
                let size = radices.iter().try_fold(1usize, |a, &r| a.checked_mul(r)).unwrap_or(usize::MAX);
                blocks.push(PimsnerBlock { lead, len, offset: dim, size, radices });
                dim = dim.saturating_add(size);
                if dim > DEFAULT_DIM_CAP {
                    return Err(Error::DimensionCap { dim, cap: DEFAULT_DIM_CAP });
                }
            }
        }
        Ok(PimsnerSpace { factors, depth, blocks, dim })
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

    pub fn blocks(&self) -> &[PimsnerBlock] {
        &self.blocks
    }

    pub fn block(&self, lead: usize, len: usize) -> &PimsnerBlock {
        &self.blocks[lead * self.depth + len - 1]
    }

    fn block_of(&self, pos: usize) -> &PimsnerBlock {
        let b = self.blocks.partition_point(|b| b.offset <= pos) - 1;
        &self.blocks[b]
    }

    pub fn word_len(&self, pos: usize) -> usize {
        self.block_of(pos).len
    }

    pub fn lead(&self, pos: usize) -> usize {
        self.block_of(pos).lead
    }

    /// Tag of the last tensor factor.
    pub fn final_tag(&self, pos: usize) -> usize {
        let b = self.block_of(pos);
        tag_at(b.lead, b.len - 1)
    }

    pub fn word(&self, pos: usize) -> PimsnerWord {
        let b = self.block_of(pos);
        let mut local = pos - b.offset;
        let mut idx = vec![0; b.len];
        for k in (0..b.len).rev() {
            idx[k] = local % b.radices[k];
            local /= b.radices[k];
        }
        PimsnerWord { lead: b.lead, idx }
    }

    pub fn position(&self, w: &PimsnerWord) -> Option<usize> {
        if w.is_empty() || w.len() > self.depth || w.lead > 1 {
            return None;
        }
        let b = self.block(w.lead, w.len());
        let mut local = 0usize;
        for (k, &i) in w.idx.iter().enumerate() {
            if i >= b.radices[k] {
                return None;
            }
            local = local * b.radices[k] + i;
        }
        Some(b.offset + local)
    }

    fn lengths(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            out.extend(std::iter::repeat_n(b.len, b.size));
        }
        out
    }

    fn diag_from(&self, keep: impl Fn(&PimsnerBlock) -> bool) -> SpMat {
        let mut vals = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            let v = if keep(b) { ONE } else { ZERO };
            vals.extend(std::iter::repeat_n(v, b.size));
        }
        linalg::sp_diag(&vals)
    }

    /// Columns of words with length ≤ D − margin.
    pub fn interior_mask(&self, margin: usize) -> Vec<bool> {
        let ok = margin < self.depth;
        self.lengths().into_iter().map(|l| ok && l + margin <= self.depth).collect()
    }

    /// S prepends ξ of the opposite tag; words of length D go to 0.
    pub fn s(&self) -> SpMat {
        let mut cols = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            for local in 0..b.size {
                if b.len < self.depth {
                    // ξ has index 0, so the local index is unchanged
                    let target = self.block(1 - b.lead, b.len + 1);
                    cols.push(vec![(target.offset + local, ONE)]);
                } else {
                    cols.push(vec![]);
                }
            }
        }
        linalg::sp_from_columns(self.dim, cols)
    }

    /// (A₁ ⊕ A₂) acting on the first tensor factor according to the lead tag.
    pub fn act_diag(&self, a1: &CMat, a2: &CMat) -> Result<SpMat> {
        let rot = [self.factors[0].to_rotated(a1)?, self.factors[1].to_rotated(a2)?];
        let mut cols = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            let a = &rot[b.lead];
            let stride = b.size / b.radices[0];
            for local in 0..b.size {
                let j = local / stride;
                let r = local % stride;
                let col: Vec<(usize, C64)> =
                    (0..b.radices[0]).map(|k| (b.offset + k * stride + r, a[(k, j)])).collect();
                cols.push(col);
            }
        }
        Ok(linalg::sp_from_columns(self.dim, cols))
    }

    /// A in factor `tag`, zero on the other summand.
    pub fn act(&self, a: &CMat, tag: usize) -> Result<SpMat> {
        if tag > 1 {
            return Err(Error::UnknownTag(tag));
        }
        let z = |t: usize| CMat::zeros(self.factors[t].dim(), self.factors[t].dim());
        if tag == 0 {
            self.act_diag(a, &z(1))
        } else {
            self.act_diag(&z(0), a)
        }
    }

    /// P_{i,m}
    pub fn proj_block(&self, lead: usize, len: usize) -> SpMat {
        self.diag_from(|b| b.lead == lead && b.len == len)
    }

    /// P_m
    pub fn proj_length(&self, len: usize) -> SpMat {
        self.diag_from(|b| b.len == len)
    }

    /// Q_n = Σ_{j≤n} P_j
    pub fn proj_upto(&self, n: usize) -> SpMat {
        self.diag_from(|b| b.len <= n)
    }

    /// P_{𝒦_j}
    pub fn proj_lead(&self, lead: usize) -> SpMat {
        self.diag_from(|b| b.lead == lead)
    }

    /// Projection onto words whose last tensor factor has the given tag.
    pub fn proj_final_tag(&self, tag: usize) -> SpMat {
        self.diag_from(|b| tag_at(b.lead, b.len - 1) == tag)
    }

    /// U_θ = diag(e^{−inθ}) on length-n words.
    pub fn gauge_unitary(&self, theta: f64) -> SpMat {
        let vals: Vec<C64> = self.lengths().into_iter().map(|n| C64::from_polar(1.0, -(n as f64) * theta)).collect();
        linalg::sp_diag(&vals)
    }

    /// α_θ(T) = U_θ* T U_θ
    pub fn gauge_apply(&self, t: &SpMat, theta: f64) -> SpMat {
        let u = self.gauge_unitary(theta);
        linalg::sp_mul(&linalg::sp_adjoint(&u), &linalg::sp_mul(t, &u))
    }

    /// 𝓔(T): entries between words of equal length.
    pub fn cond_expectation(&self, t: &SpMat) -> SpMat {
        let lens = self.lengths();
        filter_entries(t, |r, c| lens[r] == lens[c])
    }

    /// (1/N) Σ_k α_{2πk/N}(T).
    pub fn gauge_average(&self, t: &SpMat, n: usize) -> SpMat {
        let mut acc = linalg::sp_zeros(self.dim, self.dim);
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            acc = linalg::sp_add(&acc, &self.gauge_apply(t, theta));
        }
        linalg::sp_scale(&acc, C64::new(1.0 / n as f64, 0.0))
    }

    pub fn default_gauge_samples(&self) -> usize {
        2 * self.depth + 3
    }

    /// max |𝓔(T) − root-of-unity average| with N = 2D + 3.
    pub fn expectation_self_test(&self, t: &SpMat) -> f64 {
        let avg = self.gauge_average(t, self.default_gauge_samples());
        linalg::sp_max_abs(&linalg::sp_sub(&self.cond_expectation(t), &avg))
    }

    /// Σₙ(T) = Σ_{j=0}^n w_j (S*)ʲ 𝓔(SʲT) + Σ_{j=1}^n w_j 𝓔(T(S*)ʲ) Sʲ.
    pub fn fejer_partial(&self, t: &SpMat, n: usize) -> SpMat {
        let w = fejer_weights(n);
        let s = self.s();
        let sa = linalg::sp_adjoint(&s);
        let mut acc = self.cond_expectation(t);
        let mut sj = linalg::sp_identity(self.dim);
        let mut saj = linalg::sp_identity(self.dim);
        for &wj in w.iter().skip(1) {
            sj = linalg::sp_mul(&s, &sj);
            saj = linalg::sp_mul(&sa, &saj);
            let k = C64::new(wj, 0.0);
            let up = linalg::sp_mul(&saj, &self.cond_expectation(&linalg::sp_mul(&sj, t)));
            let down = linalg::sp_mul(&self.cond_expectation(&linalg::sp_mul(t, &saj)), &sj);
            acc = linalg::sp_add(&acc, &linalg::sp_scale(&linalg::sp_add(&up, &down), k));
        }
        acc
    }

    /// len(row) − len(col) when T is supported on a single band.
    pub fn band_of(&self, t: &SpMat) -> Option<isize> {
        let lens = self.lengths();
        let mut band = None;
        for (v, (r, c)) in t.iter() {
            if *v == ZERO {
                continue;
            }
            let b = lens[r] as isize - lens[c] as isize;
            match band {
                None => band = Some(b),
                Some(x) if x != b => return None,
                _ => {}
            }
        }
        band
    }
}

/// w_j = 1 − j/(n+1), j = 0..n
pub fn fejer_weights(n: usize) -> Vec<f64> {
    (0..=n).map(|j| 1.0 - j as f64 / (n as f64 + 1.0)).collect()
}

fn filter_entries(t: &SpMat, keep: impl Fn(usize, usize) -> bool) -> SpMat {
    let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); t.cols()];
    for (v, (r, c)) in t.iter() {
        if keep(r, c) {
            cols[c].push((r, *v));
        }
    }
    linalg::sp_from_columns(t.rows(), cols)
}

/// Residuals of the S*-relations for A, B acting on factor i and j ≠ i.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SStarReport {
    /// S*AS − ⟨Aξᵢ,ξᵢ⟩P_{𝒦ⱼ} on words of length ≤ D − 1
    pub sas: f64,
    /// ASB
    pub asb: f64,
    /// AS*B
    pub as_star_b: f64,
    /// P_{𝒦ⱼ}SA − SA
    pub p_sa: f64,
    /// AS*P_{𝒦ⱼ} − AS*
    pub as_star_p: f64,
}

impl SStarReport {
    pub fn max(&self) -> f64 {
        [self.sas, self.asb, self.as_star_b, self.p_sa, self.as_star_p].into_iter().fold(0.0, f64::max)
    }
}

/// Checks the S*-relations for every sample (tag i, A, B).
pub fn verify_sstar_relations(space: &PimsnerSpace, samples: &[(usize, CMat, CMat)]) -> Result<SStarReport> {
    let s = space.s();
    let sa = linalg::sp_adjoint(&s);
    let interior = space.interior_mask(1);
    let all = vec![true; space.dim()];
    let mut rep = SStarReport::default();
    for (i, a, b) in samples {
        let i = *i;
        if i > 1 {
            return Err(Error::UnknownTag(i));
        }
        let j = 1 - i;
        let la = space.act(a, i)?;
        let lb = space.act(b, i)?;
        let pj = space.proj_lead(j);
        let tau = space.factors()[i].state(a);
        let sas = linalg::sp_mul(&sa, &linalg::sp_mul(&la, &s));
        rep.sas = rep.sas.max(linalg::sp_residual_on_columns(&sas, &linalg::sp_scale(&pj, tau), &interior));
        let asb = linalg::sp_mul(&la, &linalg::sp_mul(&s, &lb));
        rep.asb = rep.asb.max(linalg::sp_frobenius(&asb));
        let asb2 = linalg::sp_mul(&la, &linalg::sp_mul(&sa, &lb));
        rep.as_star_b = rep.as_star_b.max(linalg::sp_frobenius(&asb2));
        let s_a = linalg::sp_mul(&s, &la);
        rep.p_sa = rep.p_sa.max(linalg::sp_residual_on_columns(&linalg::sp_mul(&pj, &s_a), &s_a, &all));
        let a_s = linalg::sp_mul(&la, &sa);
        rep.as_star_p = rep.as_star_p.max(linalg::sp_residual_on_columns(&linalg::sp_mul(&a_s, &pj), &a_s, &all));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, random_unit_vector, sp_equal, sp_frobenius, sp_identity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(seed: u64, d1: usize, d2: usize, depth: usize) -> PimsnerSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = vec![
            PointedSpace::new(random_unit_vector(&mut rng, d1)).unwrap(),
            PointedSpace::new(random_unit_vector(&mut rng, d2)).unwrap(),
        ];
        PimsnerSpace::new(f, depth).unwrap()
    }

    #[test]
    fn dimension_and_word_maps() {
        let k = space(1, 2, 3, 3);
        // lead 1: 2 + 6 + 12, lead 2: 3 + 6 + 18
        assert_eq!(k.dim(), 20 + 27);
        for p in 0..k.dim() {
            assert_eq!(k.position(&k.word(p)), Some(p));
        }
    }

    #[test]
    fn s_is_a_truncated_isometry() {
        let k = space(2, 2, 3, 4);
        let s = k.s();
        let sts = linalg::sp_mul(&linalg::sp_adjoint(&s), &s);
        assert!(sp_equal(&sts, &k.proj_upto(3)));
        let p = k.position(&PimsnerWord { lead: 1, idx: vec![2] }).unwrap();
        let img = linalg::sp_column(&s, p);
        let q = k.position(&PimsnerWord { lead: 0, idx: vec![0, 2] }).unwrap();
        assert_eq!(img[q], ONE);
    }

    #[test]
    fn s_star_kills_words_starting_off_xi() {
        let k = space(3, 3, 2, 3);
        let sa = linalg::sp_adjoint(&k.s());
        for p in 0..k.dim() {
            if k.word(p).idx[0] != 0 {
                assert_eq!(linalg::sp_column(&sa, p).camax(), 0.0);
            }
        }
    }

    #[test]
    fn act_diag_examples() {
        let k = space(4, 2, 2, 3);
        let id = k.act_diag(&CMat::identity(2, 2), &CMat::identity(2, 2)).unwrap();
        assert!(sp_equal(&id, &sp_identity(k.dim())));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = k.act(&random_complex_matrix(&mut rng, 2, 2), 0).unwrap();
        assert_eq!(sp_frobenius(&linalg::sp_mul(&a, &k.proj_lead(1))), 0.0);
    }

    #[test]
    fn gauge_and_expectation() {
        let k = space(6, 2, 2, 4);
        let s = k.s();
        let g = k.gauge_apply(&s, std::f64::consts::PI / 3.0);
        let expect = linalg::sp_scale(&s, C64::from_polar(1.0, std::f64::consts::PI / 3.0));
        assert!(linalg::sp_max_abs(&linalg::sp_sub(&g, &expect)) <= 1e-15);
        assert_eq!(k.cond_expectation(&s).nnz(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = k.act_diag(&random_complex_matrix(&mut rng, 2, 2), &random_complex_matrix(&mut rng, 2, 2)).unwrap();
        assert!(sp_equal(&k.cond_expectation(&d), &d));
        let t = linalg::sp_add(&linalg::sp_mul(&s, &d), &linalg::sp_mul(&d, &linalg::sp_adjoint(&s)));
        let t = linalg::sp_add(&t, &d);
        assert!(k.expectation_self_test(&t) <= 1e-13);
    }

    #[test]
    fn fejer_on_s() {
        let k = space(8, 2, 2, 5);
        let s = k.s();
        for n in 1..4 {
            let f = k.fejer_partial(&s, n);
            let expect = linalg::sp_scale(&s, C64::new(n as f64 / (n as f64 + 1.0), 0.0));
            assert!(linalg::sp_max_abs(&linalg::sp_sub(&f, &expect)) <= 1e-15);
        }
        assert_eq!(k.band_of(&s), Some(1));
    }

    #[test]
    fn sstar_relations_hold() {
        let k = space(9, 2, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let samples = vec![
            (0, random_complex_matrix(&mut rng, 2, 2), random_complex_matrix(&mut rng, 2, 2)),
            (1, random_complex_matrix(&mut rng, 3, 3), random_complex_matrix(&mut rng, 3, 3)),
            (0, CMat::identity(2, 2), CMat::identity(2, 2)),
        ];
        let r = verify_sstar_relations(&k, &samples).unwrap();
        assert!(r.max() <= 1e-13, "{r:?}");
    }
}
